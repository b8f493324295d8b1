#pragma once

#include <stdexcept>
#include <string>

namespace seedkit {

// Failure categories. Numeric values are part of the C ABI: seedkit.h
// mirrors them one-to-one, so existing values must never be renumbered.
enum class Status : int {
  ok = 0,
  io_error = 1,
  decode_failed = 2,
  empty_video = 3,
  empty_directory = 4,
  empty_input = 5,
  missing_asset = 6,
  corrupt_pool = 7,
  degenerate_cutout = 8,
  empty_pool = 9,
  missing_pool = 10,
  manifest_invalid = 11,
  shape_error = 12,
  numeric_error = 13,
  label_error = 14,
  divergence = 15,
  class_list_mismatch = 16,
  alignment_error = 17,
  empty_evaluation = 18,
  config_invalid = 19,
  internal_error = 20,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  Status status() const { return status_; }

private:
  Status status_;
};

[[noreturn]] inline void fail(Status status, const std::string& message) {
  throw Error(status, message);
}

}  // namespace seedkit
