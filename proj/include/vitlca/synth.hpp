#pragma once

// Seeded isotropic clusters on the unit sphere, for tests and desk-scale runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vitlca/embedset.hpp"
#include "vitlca/error.hpp"

namespace vitlca {

struct SynthSpec {
  std::uint32_t n_classes = 10;
  std::uint32_t per_class = 50;
  std::uint32_t n_dim = 64;
  /// Expected ℓ2 norm of the perturbation added to a cluster center before
  /// renormalization (per-coordinate standard deviation spread / sqrt(N)).
  double spread = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_classes == 0) throw Error(Errc::invalid_parameter, "synth: cluster count must be positive");
    if (per_class == 0) throw Error(Errc::invalid_parameter, "synth: per-cluster count must be positive");
    if (n_dim == 0) throw Error(Errc::invalid_parameter, "synth: N must be positive");
    if (!(spread >= 0.0) || !std::isfinite(spread)) {
      throw Error(Errc::invalid_parameter, "synth: spread must be finite and >= 0");
    }
  }
};

struct SynthData {
  std::vector<std::vector<double>> centers;
  EmbeddingSet set;
};

namespace detail {

inline void normalize_in_place(std::vector<double>& x) {
  double sq = 0.0;
  for (double v : x) sq += v * v;
  const double norm = std::sqrt(sq);
  for (double& v : x) v /= norm;
}

}  // namespace detail

/// Records are grouped by cluster: cluster c occupies [c * per_class, (c + 1) * per_class).
/// Draw order is fixed (all centers first, then points cluster by cluster), so a seed
/// determines the output completely.
inline SynthData synth_clusters(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthData out;
  out.centers.resize(spec.n_classes, std::vector<double>(spec.n_dim));
  for (auto& c : out.centers) {
    do {
      for (double& v : c) v = gauss(rng);
    } while (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }));
    detail::normalize_in_place(c);
  }

  out.set.n_dim = spec.n_dim;
  out.set.n_classes = spec.n_classes;
  out.set.provenance = "synthetic clusters: C=" + std::to_string(spec.n_classes) +
                       " per_class=" + std::to_string(spec.per_class) + " N=" +
                       std::to_string(spec.n_dim) + " spread=" + std::to_string(spec.spread) +
                       " seed=" + std::to_string(spec.seed);
  out.set.records.reserve(static_cast<std::size_t>(spec.n_classes) * spec.per_class);

  const double sigma = spec.spread / std::sqrt(static_cast<double>(spec.n_dim));
  std::vector<double> point(spec.n_dim);
  for (std::uint32_t c = 0; c < spec.n_classes; ++c) {
    for (std::uint32_t p = 0; p < spec.per_class; ++p) {
      for (std::uint32_t k = 0; k < spec.n_dim; ++k) point[k] = out.centers[c][k] + sigma * gauss(rng);
      if (spec.spread > 0.0) detail::normalize_in_place(point);
      EmbeddingRecord rec;
      rec.label = c;
      rec.vector.assign(point.begin(), point.end());
      out.set.records.push_back(std::move(rec));
    }
  }
  return out;
}

/// Index lists for a per-class split of a cluster-grouped set: the first `head` records
/// of each class go to the first list, the rest to the second.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_per_class(
    const EmbeddingSet& set, std::uint32_t head) {
  std::vector<std::uint32_t> taken(set.n_classes, 0);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto& t = taken[set.records[i].label];
    (t < head ? out.first : out.second).push_back(i);
    ++t;
  }
  return out;
}

}  // namespace vitlca
