#pragma once

// Locally competitive sparse encoder over an exemplar dictionary.
//
// Neurons follow the leaky-integrator dynamics
//     tau du/dt + u = b - (G - I) a,     a = T_lambda(u),
// integrated with explicit Euler at rate alpha = dt / tau:
//     u[k+1] = u[k] + alpha (b - u[k] - (G - I) a[k]).
//
// The stepping kernel tracks the offset v = u - b, for which the same update reads
//     v[k+1] = (1 - alpha) v[k] - H a[k],     H = alpha (G - I),
// so a step costs one leak multiply per neuron plus one multiply-add per (neuron, active
// neuron) pair. The threshold stage rebuilds u = v + b before shrinking.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vitlca/dictionary.hpp"
#include "vitlca/error.hpp"
#include "vitlca/gramian.hpp"

namespace vitlca {

struct LcaParams {
  double threshold = 2.0;     // lambda
  double leak_tau = 100.0;    // tau
  std::size_t n_steps = 100;  // K
  double step_size = 1.0;     // Euler dt

  double rate() const noexcept { return step_size / leak_tau; }

  void validate() const {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
      throw Error(Errc::invalid_parameter, "threshold (lambda) must be finite and >= 0");
    }
    if (!(leak_tau > 0.0) || !std::isfinite(leak_tau)) {
      throw Error(Errc::invalid_parameter, "leak_tau (tau) must be finite and > 0");
    }
    if (n_steps == 0) throw Error(Errc::invalid_parameter, "n_steps (K) must be positive");
    if (!(step_size > 0.0) || !(step_size <= leak_tau)) {
      throw Error(Errc::invalid_parameter, "step_size (dt) must lie in (0, tau]");
    }
  }
};

/// T_lambda(u): u - lambda sign(u) when |u| >= lambda, else 0. |u| == lambda yields 0.
template <std::floating_point T>
constexpr T soft_threshold(T u, T lambda) noexcept {
  if (u >= lambda) return u - lambda;
  if (u <= -lambda) return u + lambda;
  return T(0);
}

/// Multiply/add tallies of the encoder, split by stage.
///
/// total() is what the analytic cost model predicts: excitation, inhibition and leak.
/// The threshold stage (potential rebuild and shrinkage) is tallied but not costed.
struct OpCounts {
  std::uint64_t excitation_mul = 0;
  std::uint64_t excitation_add = 0;
  std::uint64_t inhibition_mul = 0;
  std::uint64_t inhibition_add = 0;
  std::uint64_t leak_mul = 0;
  std::uint64_t threshold_add = 0;

  std::uint64_t total() const noexcept {
    return excitation_mul + excitation_add + inhibition_mul + inhibition_add + leak_mul;
  }

  OpCounts& operator+=(const OpCounts& o) noexcept {
    excitation_mul += o.excitation_mul;
    excitation_add += o.excitation_add;
    inhibition_mul += o.inhibition_mul;
    inhibition_add += o.inhibition_add;
    leak_mul += o.leak_mul;
    threshold_add += o.threshold_add;
    return *this;
  }

  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// Scaled, zero-diagonal inhibition matrix H = alpha (G - I), built once per
/// (Gramian, rate) and shared read-only by every encode call.
class InhibitionKernel {
 public:
  InhibitionKernel(const Gramian& gram, double rate) : m_(gram.size()), rate_(rate), h_(m_ * m_) {
    if (!(rate > 0.0) || !(rate <= 1.0)) {
      throw Error(Errc::invalid_parameter, "Euler rate dt/tau must lie in (0, 1]");
    }
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) h_[i * m_ + j] = i == j ? 0.0 : rate * gram(i, j);
    }
  }

  std::size_t size() const noexcept { return m_; }
  double rate() const noexcept { return rate_; }
  std::span<const double> row(std::size_t i) const noexcept { return {h_.data() + i * m_, m_}; }

 private:
  std::size_t m_;
  double rate_;
  std::vector<double> h_;
};

struct NeuronState {
  std::vector<double> potentials;   // u
  std::vector<double> activations;  // a = T_lambda(u)

  static NeuronState zeros(std::size_t m) { return {std::vector<double>(m), std::vector<double>(m)}; }

  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

struct EncodeResult {
  std::vector<double> activations;
  std::size_t active_count = 0;
  double fixed_point_residual = 0.0;
  std::vector<double> objective_trajectory;  // one entry per step when requested
  std::vector<std::size_t> active_per_step;  // |{m : a_m[k] != 0}| entering step k
  std::size_t steps_run = 0;
  OpCounts ops;
};

struct EncodeOptions {
  bool record_objective = false;
  /// Diagnostic only: stop once max|u[k+1] - u[k]| falls below this. Runs that stop
  /// early do not execute K steps and fall outside the cost model.
  std::optional<double> stop_tolerance;
};

inline std::size_t count_nonzero(std::span<const double> a) noexcept {
  return static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [](double x) { return x != 0.0; }));
}

/// b_i = <input, atom_i>, one dot product per atom.
inline std::vector<double> excitatory_input(std::span<const double> input, const Dictionary& dict,
                                            OpCounts* ops = nullptr) {
  if (input.size() != dict.n_dim()) {
    throw Error(Errc::dimension_mismatch, "input length " + std::to_string(input.size()) +
                                              " differs from dictionary N " +
                                              std::to_string(dict.n_dim()));
  }
  for (double x : input) {
    if (!std::isfinite(x)) throw Error(Errc::non_finite, "input contains a non-finite entry");
  }
  std::vector<double> b(dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) b[i] = detail::dot(input, dict.atom(i));
  if (ops) {
    const std::uint64_t n = dict.n_dim();
    ops->excitation_mul += n * dict.size();
    ops->excitation_add += (n - 1) * dict.size();
  }
  return b;
}

/// (G - I) a over the nonzero entries of a.
inline std::vector<double> inhibition(const Gramian& gram, std::span<const double> a) {
  if (a.size() != gram.size()) throw Error(Errc::dimension_mismatch, "activation length != M");
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (a[m] == 0.0) continue;
    const auto g = gram.row(m);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i != m) out[i] += g[i] * a[m];
    }
  }
  return out;
}

namespace detail {

// One Euler step on the offset v = u - b. Updates v, u and a in place and returns the
// number of active neurons that drove the step.
inline std::size_t step_offset(std::vector<double>& v, NeuronState& state, std::span<const double> b,
                               const InhibitionKernel& kernel, double lambda,
                               std::vector<std::size_t>& active, OpCounts* ops) {
  const std::size_t m = v.size();
  const double keep = 1.0 - kernel.rate();

  active.clear();
  for (std::size_t j = 0; j < m; ++j) {
    if (state.activations[j] != 0.0) active.push_back(j);
  }

  for (std::size_t i = 0; i < m; ++i) v[i] *= keep;
  // H is symmetric, so column j of H is row j: stream one row per active neuron.
  for (std::size_t j : active) {
    const double aj = state.activations[j];
    const auto h = kernel.row(j);
    for (std::size_t i = 0; i < m; ++i) v[i] -= h[i] * aj;
  }

  std::size_t shrunk = 0;
  for (std::size_t i = 0; i < m; ++i) {
    state.potentials[i] = v[i] + b[i];
    state.activations[i] = soft_threshold(state.potentials[i], lambda);
    if (state.activations[i] != 0.0) ++shrunk;
  }

  if (ops) {
    const std::uint64_t mm = m;
    ops->leak_mul += mm;
    ops->inhibition_mul += mm * active.size();
    ops->inhibition_add += mm * active.size();
    ops->threshold_add += mm + shrunk;
  }
  return active.size();
}

inline void check_dims(const NeuronState& state, std::span<const double> b, std::size_t m) {
  if (state.potentials.size() != m || state.activations.size() != m || b.size() != m) {
    throw Error(Errc::dimension_mismatch, "neuron state, drive and Gramian sizes disagree");
  }
}

inline bool all_finite(std::span<const double> x) noexcept {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace detail

/// One explicit Euler step. `step_index` is only used to label a divergence.
inline NeuronState lca_step(const NeuronState& state, std::span<const double> b,
                            const InhibitionKernel& kernel, double lambda,
                            std::size_t step_index = 0, OpCounts* ops = nullptr) {
  detail::check_dims(state, b, kernel.size());
  std::vector<double> v(state.potentials.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = state.potentials[i] - b[i];
  NeuronState next = state;
  std::vector<std::size_t> active;
  detail::step_offset(v, next, b, kernel, lambda, active, ops);
  if (!detail::all_finite(next.potentials)) throw DivergenceError(step_index);
  return next;
}

inline NeuronState lca_step(const NeuronState& state, std::span<const double> b, const Gramian& gram,
                            const LcaParams& params) {
  params.validate();
  return lca_step(state, b, InhibitionKernel(gram, params.rate()), params.threshold);
}

/// phi^T a: the weighted sum of atoms.
inline std::vector<double> reconstruct(std::span<const double> a, const Dictionary& dict) {
  if (a.size() != dict.size()) throw Error(Errc::dimension_mismatch, "activation length != M");
  std::vector<double> out(dict.n_dim(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    const auto atom = dict.atom(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += a[i] * atom[k];
  }
  return out;
}

/// 1/2 ||input - phi^T a||^2 + lambda ||a||_1
inline double lasso_objective(std::span<const double> input, std::span<const double> a,
                              const Dictionary& dict, double lambda) {
  if (input.size() != dict.n_dim()) throw Error(Errc::dimension_mismatch, "input length != N");
  const auto recon = reconstruct(a, dict);
  double sq = 0.0;
  for (std::size_t k = 0; k < input.size(); ++k) {
    const double r = input[k] - recon[k];
    sq += r * r;
  }
  double l1 = 0.0;
  for (double x : a) l1 += std::abs(x);
  return 0.5 * sq + lambda * l1;
}

/// max_i |a_i - T_lambda(b_i - ((G - I) a)_i)|
inline double fixed_point_residual(std::span<const double> a, std::span<const double> b,
                                   const Gramian& gram, double lambda) {
  const auto inh = inhibition(gram, a);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - soft_threshold(b[i] - inh[i], lambda)));
  }
  return worst;
}

/// Runs exactly params.n_steps Euler steps from u = a = 0 (unless a diagnostic stop
/// tolerance is set). Throws DivergenceError if the state stops being finite.
inline EncodeResult encode(std::span<const double> input, const Dictionary& dict, const Gramian& gram,
                           const InhibitionKernel& kernel, const LcaParams& params,
                           const EncodeOptions& options = {}) {
  params.validate();
  if (gram.size() != dict.size() || kernel.size() != dict.size()) {
    throw Error(Errc::size_mismatch, "Gramian/kernel order differs from dictionary size");
  }
  if (kernel.rate() != params.rate()) {
    throw Error(Errc::invalid_parameter, "inhibition kernel was built for a different dt/tau");
  }

  EncodeResult result;
  const auto b = excitatory_input(input, dict, &result.ops);
  const std::size_t m = dict.size();

  NeuronState state = NeuronState::zeros(m);
  std::vector<double> v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = -b[i];
  std::vector<std::size_t> active;
  active.reserve(m);
  std::vector<double> previous_u;

  result.active_per_step.reserve(params.n_steps);
  if (options.record_objective) result.objective_trajectory.reserve(params.n_steps);

  for (std::size_t k = 0; k < params.n_steps; ++k) {
    if (options.stop_tolerance) previous_u = state.potentials;
    result.active_per_step.push_back(
        detail::step_offset(v, state, b, kernel, params.threshold, active, &result.ops));
    if (!detail::all_finite(state.potentials)) throw DivergenceError(k);
    ++result.steps_run;
    if (options.record_objective) {
      result.objective_trajectory.push_back(
          lasso_objective(input, state.activations, dict, params.threshold));
    }
    if (options.stop_tolerance) {
      double delta = 0.0;
      for (std::size_t i = 0; i < m; ++i) delta = std::max(delta, std::abs(state.potentials[i] - previous_u[i]));
      if (delta < *options.stop_tolerance) break;
    }
  }

  result.active_count = count_nonzero(state.activations);
  result.fixed_point_residual = fixed_point_residual(state.activations, b, gram, params.threshold);
  result.activations = std::move(state.activations);
  return result;
}

/// Convenience overload that builds the inhibition kernel for a single call.
inline EncodeResult encode(std::span<const double> input, const Dictionary& dict, const Gramian& gram,
                           const LcaParams& params, const EncodeOptions& options = {}) {
  params.validate();
  return encode(input, dict, gram, InhibitionKernel(gram, params.rate()), params, options);
}

}  // namespace vitlca
