#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "seedkit/image.hpp"
#include "seedkit/manifest.hpp"
#include "seedkit/softmax_io.hpp"

namespace seedkit {

// Feature dimensionality: 32x32 grayscale downsample of a 224x224 image.
inline constexpr int kFeatureBlocks = 32;
inline constexpr int kFeatureDim = kFeatureBlocks * kFeatureBlocks;

struct DecaySchedule {
  int decay_steps = 100;
  double decay_rate = 0.96;
  bool staircase = true;  // false: continuous decay rate^(step/steps)
};

enum class Optimizer { adam, sgd };

struct HeadConfig {
  // Hidden layer widths; a single published width applies to all three.
  std::array<int, 3> nodes = {512, 512, 512};
  int num_classes = 0;
  double learning_rate = 1e-3;
  std::optional<DecaySchedule> decay;  // absent: constant learning rate
  double dropout = 0.0;                // in [0, 1)
  int batch_size = 32;
  Optimizer optimizer = Optimizer::adam;
  int epochs = 10;
  uint64_t init_seed = 0;

  void validate() const;  // ConfigInvalid on violation
};

// Three ReLU hidden layers plus a softmax output layer, column-vector
// convention: h1 = relu(W1 x + b1), ..., probs = softmax(Wo h3 + bo).
struct HeadModel {
  Eigen::MatrixXd W1, W2, W3, Wo;  // (H1xD), (H2xH1), (H3xH2), (KxH3)
  Eigen::VectorXd b1, b2, b3, bo;

  int feature_dim() const { return int(W1.cols()); }
  int num_classes() const { return int(Wo.rows()); }
};

// Grayscale (0.299R + 0.587G + 0.114B), area-average over 7x7 blocks down to
// 32x32, scaled by 1/255; row-major. Input must be exactly 224x224
// (ShapeError otherwise).
Eigen::VectorXd featurize(const ImageRGB8& img);

// Clean forward pass (no dropout) for one feature vector; returns softmax
// probabilities computed with max subtraction. Non-finite input or
// activations raise NumericError; a feature length other than the model's
// raises ShapeError.
Eigen::VectorXd forward(const HeadModel& model, const Eigen::VectorXd& x);

struct Gradients {
  Eigen::MatrixXd W1, W2, W3, Wo;
  Eigen::VectorXd b1, b2, b3, bo;
};

// Mean categorical cross-entropy over the batch (features are columns of X)
// with analytic gradients. dropout_rate > 0 applies inverted dropout to each
// hidden activation, masks drawn from Rng(dropout_seed) layer by layer in
// storage order (unit fastest, sample outer); dropout_rate == 0 consumes no
// randomness. Labels outside [0, K) raise LabelError. probs_out, when given,
// receives the batch's (dropout-active) softmax columns.
double loss_and_grad(const HeadModel& model, const Eigen::MatrixXd& X,
                     const std::vector<int>& labels, double dropout_rate,
                     uint64_t dropout_seed, Gradients* grads,
                     Eigen::MatrixXd* probs_out = nullptr);

// Learning rate for a 0-based optimizer step: the configured rate, scaled by
// decay_rate^floor(step/decay_steps) under a staircase schedule (or the
// unfloored exponent when staircase is off).
double lr_at(int64_t step, const HeadConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  HeadModel model;
  std::vector<EpochStats> history;
};

// Trains the head on (Xtrain, ytrain) with per-epoch validation on
// (Xval, yval); features are columns. Weights start He-initialized from
// Rng(hash64(init_seed, "init")) (normal draws in storage order, biases
// zero). Each epoch shuffles the training set with
// Rng(hash64(init_seed, "shuffle", epoch)) and steps through batches of
// batch_size (last batch may be short); batch b of epoch e uses dropout seed
// hash64(init_seed, "dropout", e, b). Optimizer is plain SGD or Adam
// (0.9/0.999/1e-8) at lr_at(global step). Train metrics accumulate over the
// epoch's batches with dropout active; val metrics come from a clean pass.
// A non-finite batch loss raises DivergenceError naming the step. Everything
// is sequential and deterministic: same inputs, same bits.
TrainResult train(const Eigen::MatrixXd& Xtrain, const std::vector<int>& ytrain,
                  const Eigen::MatrixXd& Xval, const std::vector<int>& yval,
                  const HeadConfig& cfg);

// Model file, little-endian binary:
//   magic "SKHM" | u32 version=1 | u32 K | u32 D | u32 H1 | u32 H2 | u32 H3
//   K class names, each u32 byte length + UTF-8 bytes
//   f64 tensors in column-major storage order:
//     W1 (H1xD), b1, W2 (H2xH1), b2, W3 (H3xH2), b3, Wo (KxH3), bo
struct LoadedModel {
  HeadModel model;
  std::vector<std::string> class_list;
};

void save_model(const HeadModel& model, const std::vector<std::string>& class_list,
                const std::filesystem::path& path);
LoadedModel load_model(const std::filesystem::path& path);

// Loads and featurizes the records of one split (manifest order, image paths
// relative to image_root); labels are class_list indices. jobs parallelizes
// image loading; the result does not depend on jobs.
void load_features(const DatasetManifest& manifest,
                   const std::filesystem::path& image_root, Split split,
                   int jobs, Eigen::MatrixXd* X, std::vector<int>* labels);

struct ManifestTrainResult {
  HeadModel model;
  std::vector<std::string> class_list;
  std::vector<EpochStats> history;
};

// train() over a generated dataset: features from the train split, validation
// from the val split (EmptyInput if either is empty). cfg.num_classes is
// taken from the manifest's class list.
ManifestTrainResult train_on_manifest(const DatasetManifest& manifest,
                                      const std::filesystem::path& image_root,
                                      HeadConfig cfg, int jobs);

// Clean-forward probabilities for every record of the split, in manifest
// order; image_id is the record's image path. The manifest's class list must
// equal the model's (ClassListMismatch).
SoftmaxFile predict_on_manifest(const HeadModel& model,
                                const std::vector<std::string>& class_list,
                                const DatasetManifest& manifest,
                                const std::filesystem::path& image_root,
                                Split split, int jobs);

}  // namespace seedkit
