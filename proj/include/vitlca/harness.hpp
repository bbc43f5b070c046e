#pragma once

// End-to-end pipeline: dictionary build, Gramian cache, batch evaluation and reports.
//
// Report files are JSON Lines. Evaluation writes one "record" line per test input
// followed by one "summary" line; the cost command writes a single "cost" line.
// Field names are listed in README.md.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vitlca/costmodel.hpp"
#include "vitlca/decoders.hpp"
#include "vitlca/dictionary.hpp"
#include "vitlca/embedset.hpp"
#include "vitlca/error.hpp"
#include "vitlca/gramian.hpp"
#include "vitlca/lca.hpp"
#include "vitlca/synth.hpp"
#include "json.hpp"

namespace vitlca {

enum class DecoderSelection { Max, MaxSum, Both };
enum class FallbackPolicy { None, Majority };

inline const char* selection_name(DecoderSelection s) noexcept {
  switch (s) {
    case DecoderSelection::Max: return "max";
    case DecoderSelection::MaxSum: return "maxsum";
    case DecoderSelection::Both: return "both";
  }
  return "both";
}

struct RunConfig {
  std::filesystem::path dictionary_path;  // .vdic, or a .vlca set to build from
  std::filesystem::path test_path;
  std::optional<std::filesystem::path> gramian_path;
  std::optional<std::filesystem::path> report_path;
  LcaParams lca;
  DecoderSelection decoders = DecoderSelection::Both;
  bool signed_max = false;
  bool normalize_input = false;
  FallbackPolicy fallback = FallbackPolicy::None;
  double joules_per_flop = kDefaultJoulesPerFlop;
  unsigned workers = 0;  // 0: one per hardware thread
  std::uint64_t seed = 0;
  std::size_t max_divergent = 0;

  unsigned resolved_workers() const noexcept {
    return workers != 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
  }

  /// Typed error naming the offending flag.
  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw Error(Errc::invalid_parameter, field + ": " + why);
    };
    if (!(lca.threshold >= 0.0) || !std::isfinite(lca.threshold)) fail("--lambda", "must be finite and >= 0");
    if (!(lca.leak_tau > 0.0) || !std::isfinite(lca.leak_tau)) fail("--tau", "must be finite and > 0");
    if (lca.n_steps == 0) fail("--steps", "must be >= 1");
    if (!(lca.step_size > 0.0) || !(lca.step_size <= lca.leak_tau)) fail("--dt", "must lie in (0, tau]");
    if (!(joules_per_flop > 0.0) || !std::isfinite(joules_per_flop)) fail("--jpf", "must be finite and > 0");
  }

  /// Every resolved setting, for the report.
  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j;
    j["dictionary"] = dictionary_path.string();
    j["test"] = test_path.string();
    j["gramian"] = gramian_path ? nlohmann::ordered_json(gramian_path->string()) : nlohmann::ordered_json();
    j["lambda"] = lca.threshold;
    j["tau"] = lca.leak_tau;
    j["steps"] = lca.n_steps;
    j["dt"] = lca.step_size;
    j["decoder"] = selection_name(decoders);
    j["signed_max"] = signed_max;
    j["normalize_input"] = normalize_input;
    j["fallback"] = fallback == FallbackPolicy::None ? "none" : "majority";
    j["jpf"] = joules_per_flop;
    j["workers"] = resolved_workers();
    j["seed"] = seed;
    j["max_divergent"] = max_divergent;
    return j;
  }
};

enum class RecordStatus { Decided, NoEvidence, Divergent };

inline const char* status_name(RecordStatus s) noexcept {
  switch (s) {
    case RecordStatus::Decided: return "ok";
    case RecordStatus::NoEvidence: return "no_evidence";
    case RecordStatus::Divergent: return "divergent";
  }
  return "ok";
}

struct RecordOutcome {
  std::uint32_t label = 0;
  RecordStatus status = RecordStatus::Decided;
  std::size_t active_count = 0;
  double fixed_point_residual = 0.0;
  std::optional<std::uint32_t> pred_max;
  std::optional<std::uint32_t> pred_maxsum;
  std::optional<std::size_t> divergence_step;
};

/// Per-decoder tallies. Divergent records are excluded, so
/// correct + incorrect + no_evidence + divergent == test size.
struct DecoderTally {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t fallback_correct = 0;  // no-evidence records resolved by the fallback
  double accuracy = 0.0;
};

struct EvalReport {
  std::size_t test_size = 0;
  std::size_t divergent_count = 0;
  std::size_t no_evidence_count = 0;
  std::optional<double> top1_accuracy_max;
  std::optional<double> top1_accuracy_maxsum;
  DecoderTally max;
  DecoderTally maxsum;
  double mean_active_count = 0.0;
  CostReport cost;
  nlohmann::ordered_json config_echo;
};

struct EvalOutcome {
  EvalReport report;
  std::vector<RecordOutcome> records;
};

/// Class owning the most atoms; lowest index on ties.
inline std::uint32_t majority_class(const Dictionary& dict) {
  std::vector<std::size_t> counts(dict.n_classes(), 0);
  for (auto l : dict.labels()) ++counts[l];
  return static_cast<std::uint32_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace detail {

inline RecordOutcome evaluate_record(const EmbeddingRecord& rec, const Dictionary& dict,
                                     const Gramian& gram, const InhibitionKernel& kernel,
                                     const RunConfig& cfg) {
  RecordOutcome out;
  out.label = rec.label;
  std::vector<double> input(rec.vector.begin(), rec.vector.end());
  if (cfg.normalize_input) {
    double sq = 0.0;
    for (double x : input) sq += x * x;
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (double& x : input) x /= norm;
    }
  }
  try {
    const auto enc = encode(input, dict, gram, kernel, cfg.lca);
    out.active_count = enc.active_count;
    out.fixed_point_residual = enc.fixed_point_residual;
    // One encoding feeds both decoders.
    const auto by_max = decode_max_activation(enc.activations, dict.labels(), dict.n_classes(), cfg.signed_max);
    const auto by_sum = decode_max_sum(enc.activations, dict.labels(), dict.n_classes());
    if (!has_prediction(by_sum)) {
      out.status = RecordStatus::NoEvidence;
    } else {
      out.pred_max = std::get<Prediction>(by_max).predicted_class;
      out.pred_maxsum = std::get<Prediction>(by_sum).predicted_class;
    }
  } catch (const DivergenceError& e) {
    out.status = RecordStatus::Divergent;
    out.divergence_step = e.step();
  }
  return out;
}

inline DecoderTally tally(const std::vector<RecordOutcome>& records, bool use_max,
                          std::optional<std::uint32_t> fallback_class) {
  DecoderTally t;
  std::size_t denominator = 0;
  for (const auto& r : records) {
    if (r.status == RecordStatus::Divergent) continue;
    ++denominator;
    if (r.status == RecordStatus::NoEvidence) {
      if (fallback_class && *fallback_class == r.label) ++t.fallback_correct;
      continue;
    }
    const auto pred = use_max ? *r.pred_max : *r.pred_maxsum;
    (pred == r.label ? t.correct : t.incorrect) += 1;
  }
  t.accuracy = denominator == 0 ? 0.0
                                : static_cast<double>(t.correct + t.fallback_correct) /
                                      static_cast<double>(denominator);
  return t;
}

}  // namespace detail

/// Encodes every test record once and decodes it with both decoders.
///
/// Record i is handled by worker i % workers and written to slot i; aggregation walks
/// the slots in index order, so the report does not depend on the worker count.
inline EvalOutcome evaluate(const Dictionary& dict, const Gramian& gram, const EmbeddingSet& test,
                            const RunConfig& cfg) {
  cfg.validate();
  if (test.n_dim != dict.n_dim()) {
    throw Error(Errc::dimension_mismatch, "test set N = " + std::to_string(test.n_dim) +
                                              " but dictionary N = " + std::to_string(dict.n_dim()));
  }
  if (gram.size() != dict.size()) {
    throw Error(Errc::size_mismatch, "Gramian order differs from dictionary size");
  }
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.records[i].label >= dict.n_classes()) {
      throw IndexedError(Errc::label_out_of_range, i, "test label outside the dictionary's classes");
    }
  }

  const InhibitionKernel kernel(gram, cfg.lca.rate());
  EvalOutcome outcome;
  outcome.records.resize(test.size());

  const unsigned workers =
      static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(cfg.resolved_workers(), test.size())));
  auto run_worker = [&](unsigned w) {
    for (std::size_t i = w; i < test.size(); i += workers) {
      outcome.records[i] = detail::evaluate_record(test.records[i], dict, gram, kernel, cfg);
    }
  };
  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
  }

  auto& rep = outcome.report;
  rep.test_size = test.size();
  std::vector<std::size_t> active_counts;
  for (const auto& r : outcome.records) {
    if (r.status == RecordStatus::Divergent) {
      ++rep.divergent_count;
      continue;
    }
    if (r.status == RecordStatus::NoEvidence) ++rep.no_evidence_count;
    active_counts.push_back(r.active_count);
  }
  rep.mean_active_count = active_counts.empty() ? 0.0 : measure_m_hat(active_counts);

  std::optional<std::uint32_t> fallback;
  if (cfg.fallback == FallbackPolicy::Majority) fallback = majority_class(dict);
  rep.max = detail::tally(outcome.records, true, fallback);
  rep.maxsum = detail::tally(outcome.records, false, fallback);
  if (cfg.decoders != DecoderSelection::MaxSum) rep.top1_accuracy_max = rep.max.accuracy;
  if (cfg.decoders != DecoderSelection::Max) rep.top1_accuracy_maxsum = rep.maxsum.accuracy;

  CostParameters cp;
  cp.m = dict.size();
  cp.n = dict.n_dim();
  cp.k = cfg.lca.n_steps;
  cp.m_hat = round_m_hat(rep.mean_active_count);
  cp.joules_per_flop = cfg.joules_per_flop;
  rep.cost = make_cost_report(cp);
  rep.config_echo = cfg.echo();
  return outcome;
}

/// Accepts a dictionary container or an embedding set (built on the fly), by magic.
inline Dictionary load_dictionary_source(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  in.seekg(0);
  if (std::string_view(magic, 4) == "VLCA") return build_dictionary(load_embedding_set(in));
  return load_dictionary(in);
}

inline nlohmann::ordered_json record_json(std::size_t index, const RecordOutcome& r) {
  auto opt = [](const auto& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  return {{"type", "record"},
          {"index", index},
          {"label", r.label},
          {"status", status_name(r.status)},
          {"active_count", r.active_count},
          {"fixed_point_residual", r.fixed_point_residual},
          {"pred_max", opt(r.pred_max)},
          {"pred_maxsum", opt(r.pred_maxsum)},
          {"divergence_step", opt(r.divergence_step)}};
}

inline nlohmann::ordered_json summary_json(const EvalReport& rep) {
  auto tally_json = [](const DecoderTally& t) {
    return nlohmann::ordered_json{{"correct", t.correct},
                                  {"incorrect", t.incorrect},
                                  {"fallback_correct", t.fallback_correct}};
  };
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  return {{"type", "summary"},
          {"test_size", rep.test_size},
          {"top1_accuracy_max", opt(rep.top1_accuracy_max)},
          {"top1_accuracy_maxsum", opt(rep.top1_accuracy_maxsum)},
          {"max", tally_json(rep.max)},
          {"maxsum", tally_json(rep.maxsum)},
          {"mean_active_count", rep.mean_active_count},
          {"m_hat_rounding", "nearest, half away from zero"},
          {"no_evidence_count", rep.no_evidence_count},
          {"divergent_count", rep.divergent_count},
          {"cost", to_json(rep.cost)},
          {"config", rep.config_echo}};
}

/// The full line-delimited report: one line per record, then the summary.
inline std::string report_lines(const EvalOutcome& outcome) {
  std::string out;
  for (std::size_t i = 0; i < outcome.records.size(); ++i) {
    out += record_json(i, outcome.records[i]).dump();
    out += '\n';
  }
  out += summary_json(outcome.report).dump();
  out += '\n';
  return out;
}

inline std::string format_table(const EvalReport& rep) {
  std::ostringstream os;
  auto pct = [](double x) { return detail::fixed(100.0 * x, 2) + "%"; };
  os << "test inputs          " << rep.test_size << '\n';
  if (rep.top1_accuracy_max) os << "top-1 (max |a_i|)    " << pct(*rep.top1_accuracy_max) << '\n';
  if (rep.top1_accuracy_maxsum) os << "top-1 (max sum |a|)  " << pct(*rep.top1_accuracy_maxsum) << '\n';
  os << "no-evidence inputs   " << rep.no_evidence_count << '\n';
  os << "divergent inputs     " << rep.divergent_count << '\n';
  os << "mean active neurons  " << detail::fixed(rep.mean_active_count, 3) << " (M_hat = "
     << rep.cost.parameters.m_hat << ")\n";
  os << "training FLOPs       " << rep.cost.training_flops << " (" << training_tflops_text(rep.cost) << " T)\n";
  os << "inference FLOPs      " << rep.cost.inference_flops_sparse << " (" << inference_gflops_text(rep.cost)
     << " G)\n";
  os << "energy per input     " << detail::sci(rep.cost.energy_joules) << " J (" << energy_mj_text(rep.cost)
     << " mJ)\n";
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(Errc::io_error, "write to " + path.string() + " failed");
}

// ---- command implementations -------------------------------------------------------

inline Dictionary cmd_build_dict(const std::filesystem::path& train_path, const std::filesystem::path& out_path) {
  auto dict = build_dictionary(load_embedding_set(train_path));
  save_dictionary(dict, out_path);
  return dict;
}

struct GramianSummary {
  std::size_t m = 0;
  std::uint32_t n = 0;
  FlopCount training_flops = 0;
};

inline GramianSummary cmd_gramian(const std::filesystem::path& dict_path, const std::filesystem::path& out_path,
                                  unsigned workers = 1) {
  const auto dict = load_dictionary_source(dict_path);
  save_gramian(compute_gramian(dict, workers), out_path);
  return {dict.size(), dict.n_dim(), training_flops(dict.size(), dict.n_dim())};
}

inline EvalOutcome cmd_evaluate(const RunConfig& cfg) {
  cfg.validate();
  const auto dict = load_dictionary_source(cfg.dictionary_path);
  const auto test = load_embedding_set(cfg.test_path);
  const auto gram = cfg.gramian_path ? load_gramian(*cfg.gramian_path, dict)
                                     : compute_gramian(dict, cfg.resolved_workers());
  auto outcome = evaluate(dict, gram, test, cfg);
  if (cfg.report_path) write_text(*cfg.report_path, report_lines(outcome));
  return outcome;
}

inline CostReport cmd_cost(const CostParameters& params) { return make_cost_report(params); }

struct SynthOutputs {
  EmbeddingSet dictionary_part;
  std::optional<EmbeddingSet> test_part;
};

/// Generates per_class + test_per_class points per cluster; the first per_class go to
/// `out`, the rest (same centers) to `test_out` when requested.
inline SynthOutputs cmd_synth(SynthSpec spec, const std::filesystem::path& out,
                              std::uint32_t test_per_class = 0,
                              const std::optional<std::filesystem::path>& test_out = std::nullopt) {
  const std::uint32_t head = spec.per_class;
  spec.per_class += test_per_class;
  auto data = synth_clusters(spec);
  SynthOutputs result;
  if (test_per_class == 0) {
    result.dictionary_part = std::move(data.set);
  } else {
    const auto [first, rest] = split_per_class(data.set, head);
    result.dictionary_part = split_set(data.set, first);
    result.test_part = split_set(data.set, rest);
  }
  save_embedding_set(result.dictionary_part, out);
  if (result.test_part && test_out) save_embedding_set(*result.test_part, *test_out);
  return result;
}

}  // namespace vitlca
