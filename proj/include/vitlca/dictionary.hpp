#pragma once

// Exemplar dictionary: one unit-norm atom per training embedding.
//
// Dictionary container layout (little-endian):
//   "VDIC" | u16 version=1 | u32 N | u32 C | u64 M
//   then M atoms of: u32 label, f64 raw_norm, N x f64 atom entries.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "vitlca/binary_io.hpp"
#include "vitlca/embedset.hpp"
#include "vitlca/error.hpp"

namespace vitlca {

inline constexpr std::uint16_t kDictionaryFormatVersion = 1;

/// Source vectors at or below this ℓ2 norm cannot be normalized.
inline constexpr double kMinAtomNorm = 1e-12;

/// Row-major M x N matrix of unit-ℓ2 atoms with per-atom class labels.
class Dictionary {
 public:
  Dictionary() = default;

  std::size_t size() const noexcept { return labels_.size(); }
  std::uint32_t n_dim() const noexcept { return n_dim_; }
  std::uint32_t n_classes() const noexcept { return n_classes_; }

  std::span<const double> atom(std::size_t i) const noexcept {
    return {atoms_.data() + i * n_dim_, n_dim_};
  }
  std::span<const double> atoms() const noexcept { return atoms_; }
  std::span<const std::uint32_t> labels() const noexcept { return labels_; }
  std::span<const double> raw_norms() const noexcept { return raw_norms_; }

  /// Normalizes each row of `rows` (M x n_dim, row-major). Rows keep their order.
  static Dictionary from_rows(std::span<const double> rows, std::uint32_t n_dim,
                              std::span<const std::uint32_t> labels, std::uint32_t n_classes) {
    if (n_dim == 0) throw Error(Errc::invalid_parameter, "n_dim must be positive");
    if (n_classes == 0) throw Error(Errc::invalid_parameter, "n_classes must be positive");
    if (rows.size() != labels.size() * n_dim) {
      throw Error(Errc::dimension_mismatch, "row buffer does not hold labels.size() x n_dim values");
    }
    if (labels.empty()) throw Error(Errc::empty_input, "dictionary needs at least one atom");

    Dictionary dict;
    dict.n_dim_ = n_dim;
    dict.n_classes_ = n_classes;
    dict.atoms_.assign(rows.begin(), rows.end());
    dict.labels_.assign(labels.begin(), labels.end());
    dict.raw_norms_.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= n_classes) {
        throw IndexedError(Errc::label_out_of_range, i, "atom label >= n_classes");
      }
      auto row = std::span<double>(dict.atoms_).subspan(i * n_dim, n_dim);
      double sq = 0.0;
      for (double x : row) {
        if (!std::isfinite(x)) throw IndexedError(Errc::non_finite, i, "non-finite atom entry");
        sq += x * x;
      }
      const double norm = std::sqrt(sq);
      if (!(norm > kMinAtomNorm)) {
        throw IndexedError(Errc::zero_norm, i, "source vector has zero ℓ2 norm");
      }
      for (double& x : row) x /= norm;
      dict.raw_norms_[i] = norm;
    }
    return dict;
  }

  friend bool operator==(const Dictionary&, const Dictionary&) = default;

 private:
  friend Dictionary load_dictionary(std::istream& in);

  std::uint32_t n_dim_ = 0;
  std::uint32_t n_classes_ = 0;
  std::vector<double> atoms_;
  std::vector<std::uint32_t> labels_;
  std::vector<double> raw_norms_;
};

/// Row i is record i's vector divided by its ℓ2 norm (computed in double precision).
inline Dictionary build_dictionary(const EmbeddingSet& train) {
  if (train.empty()) throw Error(Errc::empty_input, "cannot build a dictionary from an empty set");
  std::vector<double> rows;
  rows.reserve(train.size() * train.n_dim);
  std::vector<std::uint32_t> labels;
  labels.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto& rec = train.records[i];
    if (rec.vector.size() != train.n_dim) {
      throw IndexedError(Errc::dimension_mismatch, i, "record length differs from n_dim");
    }
    rows.insert(rows.end(), rec.vector.begin(), rec.vector.end());
    labels.push_back(rec.label);
  }
  return Dictionary::from_rows(rows, train.n_dim, labels, train.n_classes);
}

inline void save_dictionary(const Dictionary& dict, std::ostream& out) {
  detail::put_bytes(out, "VDIC");
  detail::put_le<std::uint16_t>(out, kDictionaryFormatVersion);
  detail::put_le<std::uint32_t>(out, dict.n_dim());
  detail::put_le<std::uint32_t>(out, dict.n_classes());
  detail::put_le<std::uint64_t>(out, dict.size());
  for (std::size_t i = 0; i < dict.size(); ++i) {
    detail::put_le<std::uint32_t>(out, dict.labels()[i]);
    detail::put_f64(out, dict.raw_norms()[i]);
    for (double x : dict.atom(i)) detail::put_f64(out, x);
  }
  out.flush();
  detail::check_sink(out);
}

inline Dictionary load_dictionary(std::istream& in) {
  detail::expect_magic(in, "VDIC");
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != kDictionaryFormatVersion) {
    throw Error(Errc::version_mismatch, "unsupported dictionary version " + std::to_string(version));
  }
  Dictionary dict;
  dict.n_dim_ = detail::get_le<std::uint32_t>(in, "N");
  dict.n_classes_ = detail::get_le<std::uint32_t>(in, "C");
  const auto n_atoms = detail::get_le<std::uint64_t>(in, "M");
  if (dict.n_dim_ == 0 || dict.n_classes_ == 0) {
    throw Error(Errc::invalid_parameter, "dictionary header declares zero N or C");
  }
  if (n_atoms == 0) throw Error(Errc::empty_input, "dictionary header declares zero atoms");
  for (std::uint64_t i = 0; i < n_atoms; ++i) {
    const auto label = detail::get_le<std::uint32_t>(in, "atom label");
    const double raw_norm = detail::get_f64(in, "atom raw norm");
    if (label >= dict.n_classes_) {
      throw IndexedError(Errc::label_out_of_range, static_cast<std::size_t>(i), "atom label >= C");
    }
    if (!(raw_norm > kMinAtomNorm) || !std::isfinite(raw_norm)) {
      throw IndexedError(Errc::zero_norm, static_cast<std::size_t>(i), "invalid stored raw norm");
    }
    dict.labels_.push_back(label);
    dict.raw_norms_.push_back(raw_norm);
    for (std::uint32_t j = 0; j < dict.n_dim_; ++j) {
      const double x = detail::get_f64(in, "atom entry");
      if (!std::isfinite(x)) {
        throw IndexedError(Errc::non_finite, static_cast<std::size_t>(i), "non-finite atom entry");
      }
      dict.atoms_.push_back(x);
    }
  }
  detail::expect_eof(in);
  return dict;
}

inline void save_dictionary(const Dictionary& dict, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  save_dictionary(dict, out);
}

inline Dictionary load_dictionary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return load_dictionary(in);
}

}  // namespace vitlca
