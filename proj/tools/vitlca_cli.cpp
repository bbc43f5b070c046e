// vitlca: command-line front end for the sparse-coding classifier.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error (I/O) or too many
// divergent encodings.

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vitlca/vitlca.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

int exit_code_for(const vitlca::Error& e) {
  return e.code() == vitlca::Errc::io_error ? kExitRuntime : kExitValidation;
}

void add_lca_flags(CLI::App& cmd, vitlca::LcaParams& p) {
  cmd.add_option("--lambda", p.threshold, "soft threshold lambda")->capture_default_str();
  cmd.add_option("--tau", p.leak_tau, "leak time constant tau")->capture_default_str();
  cmd.add_option("--dt", p.step_size, "Euler step dt (0 < dt <= tau)")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exemplar sparse-coding classifier over transformer embeddings"};
  app.require_subcommand(1);

  // build-dict
  std::string train_path, dict_out;
  auto* build = app.add_subcommand("build-dict", "build a dictionary from a .vlca training set");
  build->add_option("train", train_path, "training embeddings (.vlca)")->required();
  build->add_option("out", dict_out, "output dictionary (.vdic)")->required();

  // gramian
  std::string gram_dict, gram_out;
  unsigned gram_workers = 1;
  auto* gramian = app.add_subcommand("gramian", "compute and cache the atom Gramian");
  gramian->add_option("dict", gram_dict, "dictionary (.vdic or .vlca)")->required();
  gramian->add_option("out", gram_out, "output cache (.gram)")->required();
  gramian->add_option("--workers", gram_workers, "threads for the triangle build")->capture_default_str();

  // evaluate
  vitlca::RunConfig cfg;
  std::string eval_dict, eval_test, eval_gram, eval_report, decoder = "both", fallback = "none";
  auto* evaluate = app.add_subcommand("evaluate", "encode and classify a test set");
  evaluate->add_option("--dict", eval_dict, "dictionary (.vdic) or training set (.vlca)")->required();
  evaluate->add_option("--test", eval_test, "test embeddings (.vlca)")->required();
  evaluate->add_option("--gram", eval_gram, "Gramian cache (.gram); computed when omitted");
  add_lca_flags(*evaluate, cfg.lca);
  evaluate->add_option("--steps", cfg.lca.n_steps, "Euler steps K")->capture_default_str();
  evaluate->add_option("--decoder", decoder, "decoders to report")
      ->check(CLI::IsMember({"max", "maxsum", "both"}))
      ->capture_default_str();
  evaluate->add_flag("--signed-max", cfg.signed_max, "use signed activations in the max decoder");
  evaluate->add_flag("--normalize-input", cfg.normalize_input, "ℓ2-normalize test inputs before encoding");
  evaluate->add_option("--fallback", fallback, "prediction for all-zero codes")
      ->check(CLI::IsMember({"none", "majority"}))
      ->capture_default_str();
  evaluate->add_option("--jpf", cfg.joules_per_flop, "joules per FLOP")->capture_default_str();
  evaluate->add_option("--workers", cfg.workers, "encoding threads (0: all cores)")->capture_default_str();
  evaluate->add_option("--seed", cfg.seed, "recorded in the report")->capture_default_str();
  evaluate->add_option("--max-divergent", cfg.max_divergent, "divergent inputs tolerated before exit 2")
      ->capture_default_str();
  evaluate->add_option("--report", eval_report, "JSON Lines report path");

  // cost
  vitlca::CostParameters cost_params;
  cost_params.m = 50000;
  cost_params.n = 768;
  cost_params.k = 100;
  cost_params.m_hat = 200;
  std::string cost_report;
  auto* cost = app.add_subcommand("cost", "print FLOP and energy estimates without running inference");
  cost->add_option("-M,--atoms", cost_params.m, "dictionary size M")->capture_default_str();
  cost->add_option("-N,--dim", cost_params.n, "embedding length N")->capture_default_str();
  cost->add_option("-K,--steps", cost_params.k, "Euler steps K")->capture_default_str();
  cost->add_option("--m-hat", cost_params.m_hat, "average active neurons")->capture_default_str();
  cost->add_option("--jpf", cost_params.joules_per_flop, "joules per FLOP")->capture_default_str();
  cost->add_option("--report", cost_report, "JSON Lines report path");

  // synth
  vitlca::SynthSpec synth_spec;
  std::string synth_out, synth_test_out;
  std::uint32_t test_per_class = 0;
  auto* synth = app.add_subcommand("synth", "generate clustered synthetic embeddings");
  synth->add_option("--classes", synth_spec.n_classes, "cluster count C")->capture_default_str();
  synth->add_option("--per-class", synth_spec.per_class, "points per cluster")->capture_default_str();
  synth->add_option("--dim", synth_spec.n_dim, "embedding length N")->capture_default_str();
  synth->add_option("--spread", synth_spec.spread, "expected perturbation norm")->capture_default_str();
  synth->add_option("--seed", synth_spec.seed, "RNG seed")->capture_default_str();
  synth->add_option("--out", synth_out, "output set (.vlca)")->required();
  synth->add_option("--test-per-class", test_per_class, "extra held-out points per cluster");
  synth->add_option("--test-out", synth_test_out, "held-out set (.vlca)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*build) {
      const auto dict = vitlca::cmd_build_dict(train_path, dict_out);
      std::cout << "M = " << dict.size() << "\nN = " << dict.n_dim() << "\nC = " << dict.n_classes() << '\n';
    } else if (*gramian) {
      const auto s = vitlca::cmd_gramian(gram_dict, gram_out, std::max(1u, gram_workers));
      std::cout << "M = " << s.m << "\nN = " << s.n << "\ntraining_flops = " << s.training_flops << '\n';
    } else if (*evaluate) {
      cfg.dictionary_path = eval_dict;
      cfg.test_path = eval_test;
      if (!eval_gram.empty()) cfg.gramian_path = eval_gram;
      if (!eval_report.empty()) cfg.report_path = eval_report;
      cfg.decoders = decoder == "max"      ? vitlca::DecoderSelection::Max
                     : decoder == "maxsum" ? vitlca::DecoderSelection::MaxSum
                                           : vitlca::DecoderSelection::Both;
      cfg.fallback = fallback == "majority" ? vitlca::FallbackPolicy::Majority : vitlca::FallbackPolicy::None;
      const auto outcome = vitlca::cmd_evaluate(cfg);
      std::cout << vitlca::format_table(outcome.report);
      if (outcome.report.divergent_count > cfg.max_divergent) {
        std::cerr << "error: " << outcome.report.divergent_count << " divergent encodings (limit "
                  << cfg.max_divergent << ")\n";
        return kExitRuntime;
      }
    } else if (*cost) {
      const auto report = vitlca::cmd_cost(cost_params);
      std::cout << vitlca::to_key_value(report);
      if (!cost_report.empty()) {
        auto line = vitlca::to_json(report);
        line["type"] = "cost";
        vitlca::write_text(cost_report, line.dump() + "\n");
      }
    } else if (*synth) {
      std::optional<std::filesystem::path> test_out;
      if (!synth_test_out.empty()) test_out = synth_test_out;
      if (test_per_class > 0 && !test_out) {
        throw vitlca::Error(vitlca::Errc::invalid_parameter, "--test-per-class needs --test-out");
      }
      const auto out = vitlca::cmd_synth(synth_spec, synth_out, test_per_class, test_out);
      std::cout << "records = " << out.dictionary_part.size() << '\n';
      if (out.test_part) std::cout << "test_records = " << out.test_part->size() << '\n';
    }
  } catch (const vitlca::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
