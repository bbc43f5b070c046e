#pragma once

// Analytic FLOP and energy model for the encoder.
//
// One multiply or one add is one FLOP; threshold comparisons and shrinkage are not
// counted. With M atoms of length N, K steps and M_hat active neurons per step:
//   training  (Gramian upper triangle)  M (M + 1) (2N - 1) / 2
//   inference, dense                    (2N - 1) M + K (2 M^2 + M)
//   inference, sparse                   (2N - 1) M + K (2 M M_hat + M)
// The per-step 1/K factor on the excitation term is cancelled algebraically so every
// count stays an exact integer.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

#include "vitlca/error.hpp"
#include "vitlca/lca.hpp"
#include "json.hpp"

namespace vitlca {

using FlopCount = std::uint64_t;

/// Energy per FLOP for an 11 TOPS/W multiply-accumulate array.
inline constexpr double kDefaultJoulesPerFlop = 9.09e-14;

namespace detail {

inline FlopCount checked_mul(FlopCount x, FlopCount y) {
  FlopCount r = 0;
  if (__builtin_mul_overflow(x, y, &r)) throw Error(Errc::overflow, "FLOP count exceeds 64 bits");
  return r;
}

inline FlopCount checked_add(FlopCount x, FlopCount y) {
  FlopCount r = 0;
  if (__builtin_add_overflow(x, y, &r)) throw Error(Errc::overflow, "FLOP count exceeds 64 bits");
  return r;
}

inline void require_positive(FlopCount v, const char* name) {
  if (v == 0) throw Error(Errc::invalid_parameter, std::string(name) + " must be >= 1");
}

// (2N - 1) M: the excitation dot products, once per input.
inline FlopCount excitation_flops(FlopCount m, FlopCount n) {
  return checked_mul(checked_mul(2, n) - 1, m);
}

}  // namespace detail

inline FlopCount training_flops(FlopCount m, FlopCount n) {
  detail::require_positive(m, "M");
  detail::require_positive(n, "N");
  // One of M, M + 1 is even, so halve it before multiplying.
  const FlopCount m1 = detail::checked_add(m, 1);
  const FlopCount tri = (m % 2 == 0) ? detail::checked_mul(m / 2, m1) : detail::checked_mul(m, m1 / 2);
  return detail::checked_mul(tri, detail::checked_mul(2, n) - 1);
}

inline FlopCount inference_flops_sparse(FlopCount m, FlopCount n, FlopCount k, FlopCount m_hat) {
  detail::require_positive(m, "M");
  detail::require_positive(n, "N");
  detail::require_positive(k, "K");
  if (m_hat > m) throw Error(Errc::invalid_parameter, "M_hat must not exceed M");
  const FlopCount per_step =
      detail::checked_add(detail::checked_mul(detail::checked_mul(2, m), m_hat), m);
  return detail::checked_add(detail::excitation_flops(m, n), detail::checked_mul(k, per_step));
}

inline FlopCount inference_flops_dense(FlopCount m, FlopCount n, FlopCount k) {
  return inference_flops_sparse(m, n, k, m);
}

/// Sparse count with the actual active count of every step instead of an average:
/// (2N - 1) M + sum_k (2 M m_k + M).
inline FlopCount inference_flops_per_step(FlopCount m, FlopCount n,
                                          std::span<const std::size_t> active_per_step) {
  detail::require_positive(m, "M");
  detail::require_positive(n, "N");
  FlopCount total = detail::excitation_flops(m, n);
  for (std::size_t mk : active_per_step) {
    if (mk > m) throw Error(Errc::invalid_parameter, "per-step active count exceeds M");
    total = detail::checked_add(
        total, detail::checked_add(detail::checked_mul(detail::checked_mul(2, m), mk), m));
  }
  return total;
}

/// Largest gap between the sparse formula at round(mean m_k) and the per-step count.
/// The per-step count is linear in m_k, so only the rounding of the mean contributes:
/// |2 M K (round(mean) - mean)| <= M K.
inline FlopCount averaging_error_bound(FlopCount m, FlopCount k) { return detail::checked_mul(m, k); }

inline double energy_estimate(FlopCount flops, double joules_per_flop) {
  if (!(joules_per_flop > 0.0) || !std::isfinite(joules_per_flop)) {
    throw Error(Errc::invalid_parameter, "joules_per_flop must be finite and > 0");
  }
  return static_cast<double>(flops) * joules_per_flop;
}

/// Mean of the final active counts.
inline double measure_m_hat(std::span<const std::size_t> active_counts) {
  if (active_counts.empty()) throw Error(Errc::empty_input, "no encode results to average");
  double sum = 0.0;
  for (std::size_t c : active_counts) sum += static_cast<double>(c);
  return sum / static_cast<double>(active_counts.size());
}

inline double measure_m_hat(std::span<const EncodeResult> results) {
  std::vector<std::size_t> counts;
  counts.reserve(results.size());
  for (const auto& r : results) counts.push_back(r.active_count);
  return measure_m_hat(counts);
}

/// Cost formulas take M_hat as a count; the measured mean is rounded half away from zero.
inline FlopCount round_m_hat(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw Error(Errc::invalid_parameter, "mean M_hat must be >= 0");
  return static_cast<FlopCount>(std::llround(mean));
}

struct CostParameters {
  FlopCount m = 0;
  FlopCount n = 0;
  FlopCount k = 0;
  FlopCount m_hat = 0;
  double joules_per_flop = kDefaultJoulesPerFlop;

  friend bool operator==(const CostParameters&, const CostParameters&) = default;
};

struct CostReport {
  FlopCount training_flops = 0;
  FlopCount inference_flops_dense = 0;
  FlopCount inference_flops_sparse = 0;
  double energy_joules = 0.0;
  CostParameters parameters;

  friend bool operator==(const CostReport&, const CostReport&) = default;
};

inline CostReport make_cost_report(const CostParameters& p) {
  CostReport r;
  r.parameters = p;
  r.training_flops = training_flops(p.m, p.n);
  r.inference_flops_dense = inference_flops_dense(p.m, p.n, p.k);
  r.inference_flops_sparse = inference_flops_sparse(p.m, p.n, p.k, p.m_hat);
  r.energy_joules = energy_estimate(r.inference_flops_sparse, p.joules_per_flop);
  return r;
}

namespace detail {

inline std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

inline std::string sci(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", value);
  return buf;
}

}  // namespace detail

/// Table-style rounding: training in TFLOPs, inference in GFLOPs, energy in mJ, two decimals.
inline std::string training_tflops_text(const CostReport& r) {
  return detail::fixed(static_cast<double>(r.training_flops) / 1e12, 2);
}
inline std::string inference_gflops_text(const CostReport& r) {
  return detail::fixed(static_cast<double>(r.inference_flops_sparse) / 1e9, 2);
}
inline std::string energy_mj_text(const CostReport& r) { return detail::fixed(r.energy_joules * 1e3, 2); }

/// Flat `key = value` block, one field per line, fixed order.
inline std::string to_key_value(const CostReport& r) {
  std::string s;
  auto line = [&s](const char* key, const std::string& value) {
    s += key;
    s += " = ";
    s += value;
    s += '\n';
  };
  line("M", std::to_string(r.parameters.m));
  line("N", std::to_string(r.parameters.n));
  line("K", std::to_string(r.parameters.k));
  line("M_hat", std::to_string(r.parameters.m_hat));
  line("joules_per_flop", detail::sci(r.parameters.joules_per_flop));
  line("training_flops", std::to_string(r.training_flops));
  line("inference_flops_dense", std::to_string(r.inference_flops_dense));
  line("inference_flops_sparse", std::to_string(r.inference_flops_sparse));
  line("energy_joules", detail::sci(r.energy_joules));
  line("training_tflops", training_tflops_text(r));
  line("inference_gflops", inference_gflops_text(r));
  line("energy_mj", energy_mj_text(r));
  return s;
}

inline nlohmann::ordered_json to_json(const CostReport& r) {
  return {
      {"training_flops", r.training_flops},
      {"inference_flops_dense", r.inference_flops_dense},
      {"inference_flops_sparse", r.inference_flops_sparse},
      {"energy_joules", r.energy_joules},
      {"parameters",
       {{"M", r.parameters.m},
        {"N", r.parameters.n},
        {"K", r.parameters.k},
        {"M_hat", r.parameters.m_hat},
        {"joules_per_flop", r.parameters.joules_per_flop}}},
  };
}

}  // namespace vitlca
