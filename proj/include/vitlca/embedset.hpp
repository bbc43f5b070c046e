#pragma once

// Labeled embedding collections and the ".vlca" container.
//
// Layout (all integers little-endian, no padding):
//   "VLCA" | u16 version=1 | u32 N | u32 C | u64 M | u32 P | P bytes provenance
//   then M records of: u32 label, N x f32 vector entries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "vitlca/binary_io.hpp"
#include "vitlca/error.hpp"

namespace vitlca {

inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 26;

struct EmbeddingRecord {
  std::vector<float> vector;
  std::uint32_t label = 0;

  friend bool operator==(const EmbeddingRecord&, const EmbeddingRecord&) = default;
};

struct EmbeddingSet {
  std::uint32_t n_dim = 0;
  std::uint32_t n_classes = 0;
  std::vector<EmbeddingRecord> records;
  std::string provenance;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&) = default;
};

/// Bytes one record occupies on disk.
constexpr std::uint64_t record_bytes(std::uint32_t n_dim) noexcept {
  return 4u + 4ull * n_dim;
}

/// Total payload (records only, excluding header and provenance).
constexpr std::uint64_t payload_bytes(std::uint32_t n_dim, std::uint64_t n_records) noexcept {
  return n_records * record_bytes(n_dim);
}

namespace detail {

inline void validate_record(const EmbeddingRecord& rec, std::size_t index, std::uint32_t n_dim,
                            std::uint32_t n_classes) {
  if (rec.vector.size() != n_dim) {
    throw IndexedError(Errc::dimension_mismatch, index,
                       "record has " + std::to_string(rec.vector.size()) + " entries, expected " +
                           std::to_string(n_dim));
  }
  for (float x : rec.vector) {
    if (!std::isfinite(x)) throw IndexedError(Errc::non_finite, index, "non-finite vector entry");
  }
  if (rec.label >= n_classes) {
    throw IndexedError(Errc::label_out_of_range, index,
                       "label " + std::to_string(rec.label) + " >= n_classes " +
                           std::to_string(n_classes));
  }
}

}  // namespace detail

/// Throws the first invariant violation found; records are checked in order.
inline void validate(const EmbeddingSet& set) {
  if (set.n_dim == 0) throw Error(Errc::invalid_parameter, "n_dim must be positive");
  if (set.n_classes == 0) throw Error(Errc::invalid_parameter, "n_classes must be positive");
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    detail::validate_record(set.records[i], i, set.n_dim, set.n_classes);
  }
}

inline void save_embedding_set(const EmbeddingSet& set, std::ostream& out) {
  validate(set);
  if (set.provenance.size() > UINT32_MAX) {
    throw Error(Errc::invalid_parameter, "provenance longer than 4 GiB");
  }
  detail::put_bytes(out, "VLCA");
  detail::put_le<std::uint16_t>(out, kEmbeddingFormatVersion);
  detail::put_le<std::uint32_t>(out, set.n_dim);
  detail::put_le<std::uint32_t>(out, set.n_classes);
  detail::put_le<std::uint64_t>(out, set.records.size());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(set.provenance.size()));
  detail::put_bytes(out, set.provenance);
  for (const auto& rec : set.records) {
    detail::put_le<std::uint32_t>(out, rec.label);
    for (float x : rec.vector) detail::put_f32(out, x);
  }
  out.flush();
  detail::check_sink(out);
}

/// Parses a complete .vlca stream. The stream must end exactly after the last record.
inline EmbeddingSet load_embedding_set(std::istream& in) {
  detail::expect_magic(in, "VLCA");
  const auto version = detail::get_le<std::uint16_t>(in, "version");
  if (version != kEmbeddingFormatVersion) {
    throw Error(Errc::version_mismatch, "unsupported .vlca version " + std::to_string(version));
  }
  EmbeddingSet set;
  set.n_dim = detail::get_le<std::uint32_t>(in, "N");
  set.n_classes = detail::get_le<std::uint32_t>(in, "C");
  const auto n_records = detail::get_le<std::uint64_t>(in, "M");
  const auto prov_len = detail::get_le<std::uint32_t>(in, "provenance length");
  if (set.n_dim == 0) throw Error(Errc::invalid_parameter, "header declares N = 0");
  if (set.n_classes == 0) throw Error(Errc::invalid_parameter, "header declares C = 0");

  set.provenance.resize(prov_len);
  detail::get_exact(in, set.provenance.data(), prov_len, "provenance");

  // A corrupt header may declare an absurd M; grow incrementally rather than trusting it.
  set.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n_records, 1u << 16)));
  for (std::uint64_t i = 0; i < n_records; ++i) {
    EmbeddingRecord rec;
    rec.label = detail::get_le<std::uint32_t>(in, "record label");
    rec.vector.resize(set.n_dim);
    for (auto& x : rec.vector) x = detail::get_f32(in, "record vector");
    detail::validate_record(rec, static_cast<std::size_t>(i), set.n_dim, set.n_classes);
    set.records.push_back(std::move(rec));
  }
  detail::expect_eof(in);
  return set;
}

inline void save_embedding_set(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  save_embedding_set(set, out);
}

inline EmbeddingSet load_embedding_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  return load_embedding_set(in);
}

/// Selects records by index, in the order given. N, C and provenance carry over.
inline EmbeddingSet split_set(const EmbeddingSet& set, std::span<const std::size_t> indices) {
  std::vector<bool> seen(set.records.size(), false);
  EmbeddingSet out;
  out.n_dim = set.n_dim;
  out.n_classes = set.n_classes;
  out.provenance = set.provenance;
  out.records.reserve(indices.size());
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const std::size_t idx = indices[pos];
    if (idx >= set.records.size()) {
      throw IndexedError(Errc::index_out_of_range, idx,
                         "split index beyond record count " + std::to_string(set.records.size()));
    }
    if (seen[idx]) throw IndexedError(Errc::duplicate_index, idx, "split index repeated");
    seen[idx] = true;
    out.records.push_back(set.records[idx]);
  }
  return out;
}

}  // namespace vitlca
