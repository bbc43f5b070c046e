#pragma once

// Atom Gramian G = φ φᵀ (entry (i, j) is the inner product of atoms i and j) and its cache file.
//
// Cache layout (".gram", little-endian):
//   "VGRM" | u16 version=1 | u64 M | M(M+1)/2 x f32, packed upper triangle, row-major
//   (row i holds G[i][i..M-1]).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <thread>
#include <vector>

#include "vitlca/binary_io.hpp"
#include "vitlca/dictionary.hpp"
#include "vitlca/error.hpp"

namespace vitlca {

inline constexpr std::uint16_t kGramianFormatVersion = 1;

/// Rows per scheduling block in the threaded build.
inline constexpr std::size_t kGramianBlockRows = 32;

/// Offset of (i, j), i <= j, inside a packed row-major upper triangle of order m.
constexpr std::size_t packed_index(std::size_t m, std::size_t i, std::size_t j) noexcept {
  return i * m - i * (i - 1) / 2 + (j - i);
}

constexpr std::uint64_t packed_size(std::uint64_t m) noexcept { return m * (m + 1) / 2; }

/// Dense symmetric M x M matrix, row-major.
class Gramian {
 public:
  Gramian() = default;
  explicit Gramian(std::size_t m) : m_(m), data_(m * m, 0.0) {}

  std::size_t size() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * m_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * m_, m_}; }
  std::span<const double> data() const noexcept { return data_; }

  /// Writes (i, j) and its mirror.
  void set_symmetric(std::size_t i, std::size_t j, double v) noexcept {
    data_[i * m_ + j] = v;
    data_[j * m_ + i] = v;
  }

  friend bool operator==(const Gramian&, const Gramian&) = default;

 private:
  std::size_t m_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline double dot(std::span<const double> x, std::span<const double> y) noexcept {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += x[k] * y[k];
  return acc;
}

}  // namespace detail

/// Computes the upper triangle (including the diagonal) and mirrors it.
///
/// Rows are grouped into blocks of kGramianBlockRows; block b goes to worker b % workers.
/// Each entry is one sequential dot product, so the result is bitwise identical for
/// every worker count.
inline Gramian compute_gramian(const Dictionary& dict, unsigned workers = 1) {
  const std::size_t m = dict.size();
  Gramian gram(m);
  const std::size_t n_blocks = (m + kGramianBlockRows - 1) / kGramianBlockRows;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n_blocks, 1))));

  auto run_worker = [&](unsigned w) {
    for (std::size_t b = w; b < n_blocks; b += workers) {
      const std::size_t row_end = std::min(m, (b + 1) * kGramianBlockRows);
      for (std::size_t i = b * kGramianBlockRows; i < row_end; ++i) {
        const auto ai = dict.atom(i);
        for (std::size_t j = i; j < m; ++j) gram.set_symmetric(i, j, detail::dot(ai, dict.atom(j)));
      }
    }
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
  }

  for (double v : gram.data()) {
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "Gramian contains a non-finite entry");
  }
  return gram;
}

inline void save_gramian(const Gramian& gram, std::ostream& out) {
  const std::size_t m = gram.size();
  detail::put_bytes(out, "VGRM");
  detail::put_le<std::uint16_t>(out, kGramianFormatVersion);
  detail::put_le<std::uint64_t>(out, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) detail::put_f32(out, static_cast<float>(gram(i, j)));
  }
  out.flush();
  detail::check_sink(out);
}

/// Upper triangle as stored in the cache; serves lookups without rehydrating.
class PackedGramian {
 public:
  std::size_t size() const noexcept { return m_; }

  float operator()(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return tri_[packed_index(m_, i, j)];
  }

  Gramian rehydrate() const {
    Gramian gram(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = i; j < m_; ++j) gram.set_symmetric(i, j, tri_[packed_index(m_, i, j)]);
    }
    return gram;
  }

 private:
  friend PackedGramian load_packed_gramian(std::istream& in, std::size_t expected_m);

  std::size_t m_ = 0;
  std::vector<float> tri_;
};

/// Reads a cache and checks its order against `expected_m` before touching the payload.
inline PackedGramian load_packed_gramian(std::istream& in, std::size_t expected_m) {
  detail::expect_magic(in, "VGRM");
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != kGramianFormatVersion) {
    throw Error(Errc::version_mismatch, "unsupported .gram version " + std::to_string(version));
  }
  const auto m = detail::get_le<std::uint64_t>(in, "M");
  if (m != expected_m) {
    throw Error(Errc::size_mismatch, "Gramian cache has M = " + std::to_string(m) +
                                         " but the dictionary has " + std::to_string(expected_m) +
                                         " atoms");
  }
  PackedGramian packed;
  packed.m_ = static_cast<std::size_t>(m);
  packed.tri_.resize(static_cast<std::size_t>(packed_size(m)));
  for (auto& v : packed.tri_) {
    v = detail::get_f32(in, "Gramian entry");
    if (!std::isfinite(v)) throw Error(Errc::non_finite, "Gramian cache holds a non-finite entry");
  }
  detail::expect_eof(in);
  return packed;
}

inline Gramian load_gramian(std::istream& in, const Dictionary& dict) {
  return load_packed_gramian(in, dict.size()).rehydrate();
}

inline void save_gramian(const Gramian& gram, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  save_gramian(gram, out);
}

inline Gramian load_gramian(const std::filesystem::path& path, const Dictionary& dict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return load_gramian(in, dict);
}

}  // namespace vitlca
