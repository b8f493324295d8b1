/*
 * seedkit C API.
 *
 * Every operation returns an sk_status code (SK_OK = 0 on success); on
 * failure, sk_last_error() gives a message for the most recent failing call
 * on the calling thread. Output strings (char**) are heap-allocated and must
 * be released with sk_string_free(); handle types have their own _free
 * functions. Out-parameters are written only on SK_OK.
 *
 * JSON parameters named *_json take one config section as a JSON object
 * (same keys as the corresponding section of the global config file); NULL
 * or "" selects the defaults.
 */
#ifndef SEEDKIT_H
#define SEEDKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sk_status {
  SK_OK = 0,
  SK_IO_ERROR = 1,
  SK_DECODE_FAILED = 2,
  SK_EMPTY_VIDEO = 3,
  SK_EMPTY_DIRECTORY = 4,
  SK_EMPTY_INPUT = 5,
  SK_MISSING_ASSET = 6,
  SK_CORRUPT_POOL = 7,
  SK_DEGENERATE_CUTOUT = 8,
  SK_EMPTY_POOL = 9,
  SK_MISSING_POOL = 10,
  SK_MANIFEST_INVALID = 11,
  SK_SHAPE_ERROR = 12,
  SK_NUMERIC_ERROR = 13,
  SK_LABEL_ERROR = 14,
  SK_DIVERGENCE = 15,
  SK_CLASS_LIST_MISMATCH = 16,
  SK_ALIGNMENT_ERROR = 17,
  SK_EMPTY_EVALUATION = 18,
  SK_CONFIG_INVALID = 19,
  SK_INTERNAL_ERROR = 20
} sk_status;

/* Semantic version of the library, e.g. "0.1.0". Static storage. */
const char* sk_version(void);

/* Stable name for a status code ("IoError", "DecodeFailed", ...). */
const char* sk_status_name(int status);

/* Message of the last failing call on this thread; "" when none. The pointer
 * stays valid until the next failing call on the same thread. */
const char* sk_last_error(void);

void sk_string_free(char* s);

/* The toolkit's seed-derivation hash over (seed, tag); the same function the
 * pipeline uses to derive per-purpose seeds from the master seed. */
uint64_t sk_derive_seed(uint64_t seed, const char* tag);

/* ---- frame ingest ---------------------------------------------------- */

/* Decodes a video into numbered PNG frames under out_dir using the command
 * template (placeholders {input} and {output_pattern}), keeping every
 * sample_every-th frame. summary_json reports counts and the command used. */
int sk_ingest_video(const char* video_path, const char* decoder_template,
                    int sample_every, const char* out_dir, char** summary_json);

/* Loads and validates a directory of PNG frames; with top_k > 0 the summary
 * additionally lists the top_k sharpest frame ids, sharpest first. */
int sk_ingest_frames(const char* frames_dir, int top_k, char** summary_json);

/* ---- foreground extraction ------------------------------------------- */

/* Segments one frame into seed cutouts and writes them (PNG + JSON-Lines
 * index) into out_pool_dir; append != 0 extends an existing pool. */
int sk_extract(const char* frame_png, const char* class_label, double height_m,
               const char* segmentation_json, const char* out_pool_dir,
               int append, char** summary_json);

/* ---- augmentation ---------------------------------------------------- */

/* Debug helper: writes before.png plus `count` augmented variants of one
 * RGBA cutout to out_dir; variant i uses parameters derived
 * deterministically from (seed, i). summary_json lists the sampled
 * parameters. */
int sk_augment_preview(const char* cutout_png, const char* ranges_json,
                       uint64_t seed, int count, const char* out_dir,
                       char** summary_json);

/* ---- scene synthesis ------------------------------------------------- */

/* Generates the synthetic dataset from cutout pools
 * (<pools_dir>/<class>/<height>/pool_index.jsonl) and canvas PNGs, writing
 * images under out_dir/<class>/ and the manifest to out_dir/manifest.csv.
 * Output is bit-identical for a given (inputs, configs, master_seed)
 * regardless of jobs. */
int sk_synthesize(const char* pools_dir, const char* canvases_dir,
                  const char* synthesis_json, const char* augmentation_json,
                  uint64_t master_seed, int jobs, const char* out_dir,
                  char** summary_json);

/* ---- dataset manifests ----------------------------------------------- */

typedef struct sk_manifest sk_manifest;

int sk_manifest_read(const char* path, sk_manifest** out);
int sk_manifest_write(const sk_manifest* m, const char* path);

/* Stratified train/val assignment by (class, height bucket). */
int sk_manifest_split(sk_manifest* m, double train_fraction, uint64_t split_seed);

/* Record counts by class and split, plus any warnings, as JSON. */
int sk_manifest_counts(const sk_manifest* m, char** counts_json);

void sk_manifest_free(sk_manifest* m);

/* ---- baseline classifier --------------------------------------------- */

/* Trains the baseline head on the manifest's train split (validating on the
 * val split; image paths resolve relative to the manifest's directory) and
 * writes the model file. history_json receives the per-epoch
 * train/validation loss and accuracy. */
int sk_train(const char* manifest_csv, const char* training_json,
             uint64_t init_seed, int jobs, const char* model_out,
             char** history_json);

/* Writes per-image class probabilities for one split ("train", "val" or
 * "test") to preds_out in the softmax exchange format. */
int sk_predict(const char* model_path, const char* manifest_csv,
               const char* split, int jobs, const char* preds_out);

/* ---- ensembling and evaluation --------------------------------------- */

/* Combines softmax files by weighted per-class summation (weight_count may
 * be 0 for equal weights) and writes the combined, unnormalized vectors. */
int sk_ensemble(const char* const* input_paths, size_t input_count,
                const double* weights, size_t weight_count,
                const char* out_path);

typedef struct sk_report sk_report;

/* Confusion of a prediction file against one manifest split, reported as
 * per-class one-vs-rest accuracy/precision/recall plus overall accuracy. */
int sk_evaluate(const char* preds_path, const char* manifest_csv,
                const char* split, sk_report** out);

int sk_report_text(const sk_report* r, char** text_out);
int sk_report_csv(const sk_report* r, char** csv_out);
int sk_report_overall_accuracy(const sk_report* r, double* out);
void sk_report_free(sk_report* r);

/* ---- full pipeline --------------------------------------------------- */

/* Runs ingest, extract, synth, split, train-baseline, predict and eval under
 * a fresh run directory below out_root, per the global config file. jobs
 * must be the caller-resolved worker count (>= 1). summary_json is the run
 * summary also written to <run dir>/summary.json. */
int sk_run(const char* config_path, const char* out_root, int jobs,
           char** summary_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEEDKIT_H */
