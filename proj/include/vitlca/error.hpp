#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vitlca {

/// Every failure the library reports maps to exactly one of these codes.
enum class Errc {
  io_error,
  bad_magic,
  version_mismatch,
  truncated,
  trailing_bytes,
  non_finite,
  label_out_of_range,
  dimension_mismatch,
  empty_input,
  zero_norm,
  index_out_of_range,
  duplicate_index,
  invalid_parameter,
  size_mismatch,
  divergence,
  overflow,
};

inline const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::io_error: return "io_error";
    case Errc::bad_magic: return "bad_magic";
    case Errc::version_mismatch: return "version_mismatch";
    case Errc::truncated: return "truncated";
    case Errc::trailing_bytes: return "trailing_bytes";
    case Errc::non_finite: return "non_finite";
    case Errc::label_out_of_range: return "label_out_of_range";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::empty_input: return "empty_input";
    case Errc::zero_norm: return "zero_norm";
    case Errc::index_out_of_range: return "index_out_of_range";
    case Errc::duplicate_index: return "duplicate_index";
    case Errc::invalid_parameter: return "invalid_parameter";
    case Errc::size_mismatch: return "size_mismatch";
    case Errc::divergence: return "divergence";
    case Errc::overflow: return "overflow";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised when a record, atom or index is at fault; carries its position.
class IndexedError : public Error {
 public:
  IndexedError(Errc code, std::size_t index, const std::string& what)
      : Error(code, what + " (index " + std::to_string(index) + ")"), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Non-finite neuron state. `step` is the zero-based Euler step that produced it.
class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t step)
      : Error(Errc::divergence, "non-finite neuron state at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace vitlca
