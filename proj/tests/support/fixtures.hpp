#pragma once

// Builders shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "vitlca/dictionary.hpp"

namespace fixtures {

inline vitlca::Dictionary dict_from(const oracle::Matrix& rows, std::vector<std::uint32_t> labels = {},
                                    std::uint32_t n_classes = 1) {
  if (labels.empty()) labels.assign(rows.size(), 0);
  return vitlca::Dictionary::from_rows(oracle::flatten(rows), static_cast<std::uint32_t>(rows[0].size()),
                                       labels, n_classes);
}

inline oracle::Matrix atoms_of(const vitlca::Dictionary& d) {
  oracle::Matrix out;
  for (std::size_t i = 0; i < d.size(); ++i) out.emplace_back(d.atom(i).begin(), d.atom(i).end());
  return out;
}

/// Orthonormal rows plus a small Gaussian perturbation, renormalized.
inline oracle::Matrix near_orthogonal_rows(std::mt19937_64& rng, std::size_t m, std::size_t n, double jitter) {
  auto rows = oracle::orthonormal_rows(rng, m, n);
  std::normal_distribution<double> g(0.0, jitter / std::sqrt(static_cast<double>(n)));
  for (auto& r : rows) {
    for (double& x : r) x += g(rng);
    r = oracle::unit(r);
  }
  return rows;
}

struct Planted {
  std::vector<double> input;
  std::vector<std::size_t> support;
  std::vector<double> coefficients;
};

/// input = sum of 2-3 planted atoms with |coefficient| in [0.6, 1.0] plus small noise.
inline Planted plant(std::mt19937_64& rng, const oracle::Matrix& atoms, double noise) {
  Planted p;
  const std::size_t k = 2 + rng() % 2;
  while (p.support.size() < k) {
    const std::size_t j = rng() % atoms.size();
    if (std::find(p.support.begin(), p.support.end(), j) == p.support.end()) p.support.push_back(j);
  }
  std::uniform_real_distribution<double> mag(0.6, 1.0);
  p.input.assign(atoms[0].size(), 0.0);
  for (std::size_t j : p.support) {
    const double c = (rng() % 2 ? 1.0 : -1.0) * mag(rng);
    p.coefficients.push_back(c);
    for (std::size_t t = 0; t < p.input.size(); ++t) p.input[t] += c * atoms[j][t];
  }
  std::normal_distribution<double> g(0.0, noise);
  for (double& x : p.input) x += g(rng);
  return p;
}

}  // namespace fixtures
