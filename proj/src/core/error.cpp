#include "seedkit/error.hpp"

namespace seedkit {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "Ok";
    case Status::io_error: return "IoError";
    case Status::decode_failed: return "DecodeFailed";
    case Status::empty_video: return "EmptyVideo";
    case Status::empty_directory: return "EmptyDirectory";
    case Status::empty_input: return "EmptyInput";
    case Status::missing_asset: return "MissingAsset";
    case Status::corrupt_pool: return "CorruptPool";
    case Status::degenerate_cutout: return "DegenerateCutout";
    case Status::empty_pool: return "EmptyPool";
    case Status::missing_pool: return "MissingPool";
    case Status::manifest_invalid: return "ManifestInvalid";
    case Status::shape_error: return "ShapeError";
    case Status::numeric_error: return "NumericError";
    case Status::label_error: return "LabelError";
    case Status::divergence: return "DivergenceError";
    case Status::class_list_mismatch: return "ClassListMismatch";
    case Status::alignment_error: return "AlignmentError";
    case Status::empty_evaluation: return "EmptyEvaluation";
    case Status::config_invalid: return "ConfigInvalid";
    case Status::internal_error: return "InternalError";
  }
  return "UnknownStatus";
}

}  // namespace seedkit
