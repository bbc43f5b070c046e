// Builds a small dictionary from synthetic clusters, encodes one held-out point and
// prints its sparse code and both decoder outputs.

#include <iostream>

#include "vitlca/vitlca.hpp"

int main() {
  vitlca::SynthSpec spec;
  spec.n_classes = 4;
  spec.per_class = 11;
  spec.n_dim = 32;
  spec.spread = 0.3;
  spec.seed = 7;
  const auto data = vitlca::synth_clusters(spec);
  const auto [train_idx, test_idx] = vitlca::split_per_class(data.set, 10);
  const auto train = vitlca::split_set(data.set, train_idx);
  const auto test = vitlca::split_set(data.set, test_idx);

  const auto dict = vitlca::build_dictionary(train);
  const auto gram = vitlca::compute_gramian(dict);

  vitlca::LcaParams params;
  params.threshold = 0.1;
  params.leak_tau = 10.0;
  params.n_steps = 200;

  const auto& probe = test.records.front();
  const std::vector<double> input(probe.vector.begin(), probe.vector.end());
  const auto enc = vitlca::encode(input, dict, gram, params);

  std::cout << "true class " << probe.label << ", " << enc.active_count << " of " << dict.size()
            << " neurons active\n";
  for (std::size_t i = 0; i < enc.activations.size(); ++i) {
    if (enc.activations[i] != 0.0) {
      std::cout << "  atom " << i << " (class " << dict.labels()[i] << ") a = " << enc.activations[i] << '\n';
    }
  }
  const auto by_max = vitlca::decode_max_activation(enc.activations, dict.labels(), dict.n_classes());
  const auto by_sum = vitlca::decode_max_sum(enc.activations, dict.labels(), dict.n_classes());
  if (vitlca::has_prediction(by_max)) {
    std::cout << "max activation -> class " << std::get<vitlca::Prediction>(by_max).predicted_class << '\n';
    std::cout << "max sum        -> class " << std::get<vitlca::Prediction>(by_sum).predicted_class << '\n';
  } else {
    std::cout << "no neuron crossed the threshold\n";
  }

  const auto cost = vitlca::make_cost_report({dict.size(), dict.n_dim(), params.n_steps, enc.active_count,
                                              vitlca::kDefaultJoulesPerFlop});
  std::cout << vitlca::to_key_value(cost);
  return 0;
}
