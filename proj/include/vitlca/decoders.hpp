#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "vitlca/error.hpp"

namespace vitlca {

enum class DecoderKind { MaxActivation, MaxSumOfActivations };

inline const char* decoder_name(DecoderKind kind) noexcept {
  return kind == DecoderKind::MaxActivation ? "max" : "maxsum";
}

struct Prediction {
  std::uint32_t predicted_class = 0;
  std::vector<double> per_class_scores;
  DecoderKind decoder_kind = DecoderKind::MaxSumOfActivations;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// The code had no nonzero activation, so there is nothing to decode.
struct NoEvidence {
  DecoderKind decoder_kind = DecoderKind::MaxSumOfActivations;

  friend bool operator==(const NoEvidence&, const NoEvidence&) = default;
};

using Decoded = std::variant<Prediction, NoEvidence>;

inline bool has_prediction(const Decoded& d) noexcept { return std::holds_alternative<Prediction>(d); }

namespace detail {

inline void check_decoder_inputs(std::span<const double> a, std::span<const std::uint32_t> labels,
                                 std::uint32_t n_classes) {
  if (a.size() != labels.size()) {
    throw Error(Errc::dimension_mismatch, "activation and label vectors differ in length");
  }
  if (n_classes == 0) throw Error(Errc::invalid_parameter, "n_classes must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) throw IndexedError(Errc::label_out_of_range, i, "atom label >= C");
  }
}

// Lowest index wins ties.
inline std::uint32_t argmax(std::span<const double> scores) noexcept {
  std::size_t best = 0;
  for (std::size_t c = 1; c < scores.size(); ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return static_cast<std::uint32_t>(best);
}

inline bool all_zero(std::span<const double> a) noexcept {
  for (double x : a) {
    if (x != 0.0) return false;
  }
  return true;
}

}  // namespace detail

/// Per class, the largest |a_i| among its atoms. With `signed_scores` the raw a_i is
/// used instead (classes without an active atom keep score 0).
inline Decoded decode_max_activation(std::span<const double> a, std::span<const std::uint32_t> labels,
                                     std::uint32_t n_classes, bool signed_scores = false) {
  detail::check_decoder_inputs(a, labels, n_classes);
  if (detail::all_zero(a)) return NoEvidence{DecoderKind::MaxActivation};

  Prediction p;
  p.decoder_kind = DecoderKind::MaxActivation;
  p.per_class_scores.assign(n_classes, 0.0);
  std::vector<bool> seen(n_classes, false);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    const double s = signed_scores ? a[i] : std::abs(a[i]);
    auto& score = p.per_class_scores[labels[i]];
    if (!seen[labels[i]] || s > score) score = s;
    seen[labels[i]] = true;
  }
  p.predicted_class = detail::argmax(p.per_class_scores);
  return p;
}

/// Per class, the ℓ1 norm of its atoms' activations; the largest sum wins.
inline Decoded decode_max_sum(std::span<const double> a, std::span<const std::uint32_t> labels,
                              std::uint32_t n_classes) {
  detail::check_decoder_inputs(a, labels, n_classes);
  if (detail::all_zero(a)) return NoEvidence{DecoderKind::MaxSumOfActivations};

  Prediction p;
  p.decoder_kind = DecoderKind::MaxSumOfActivations;
  p.per_class_scores.assign(n_classes, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) p.per_class_scores[labels[i]] += std::abs(a[i]);
  p.predicted_class = detail::argmax(p.per_class_scores);
  return p;
}

}  // namespace vitlca
