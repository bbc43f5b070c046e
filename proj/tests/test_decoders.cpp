#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "vitlca/decoders.hpp"

using namespace vitlca;

namespace {

const Prediction& pred(const Decoded& d) { return std::get<Prediction>(d); }

struct Case {
  std::vector<double> a;
  std::vector<std::uint32_t> labels;
  std::uint32_t n_classes;
};

Case random_case(std::mt19937_64& rng) {
  Case c;
  c.n_classes = 1 + static_cast<std::uint32_t>(rng() % 8);
  const std::size_t m = 1 + rng() % 40;
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    c.labels.push_back(static_cast<std::uint32_t>(rng() % c.n_classes));
    c.a.push_back(rng() % 3 == 0 ? g(rng) : 0.0);
  }
  if (std::all_of(c.a.begin(), c.a.end(), [](double x) { return x == 0.0; })) c.a[rng() % m] = g(rng);
  return c;
}

}  // namespace

TEST(DecodeMaxActivation, SingleActiveNeuron) {
  std::vector<double> a(6, 0.0);
  a[4] = 0.7;
  const std::vector<std::uint32_t> labels{0, 1, 2, 0, 3, 1};
  const auto d = decode_max_activation(a, labels, 4);
  ASSERT_TRUE(has_prediction(d));
  EXPECT_EQ(pred(d).predicted_class, 3u);
  EXPECT_EQ(pred(d).per_class_scores[3], 0.7);
  EXPECT_EQ(pred(d).decoder_kind, DecoderKind::MaxActivation);
}

TEST(DecodeMaxActivation, LargestSingleActivationWins) {
  const std::vector<double> a{0.5, 0.5, 0.8};
  const std::vector<std::uint32_t> labels{0, 0, 1};
  const auto d = decode_max_activation(a, labels, 2);
  EXPECT_EQ(pred(d).predicted_class, 1u);
  EXPECT_EQ(pred(d).per_class_scores, (std::vector<double>{0.5, 0.8}));
}

TEST(DecodeMaxActivation, AllZeroIsNoEvidence) {
  const std::vector<double> a(3, 0.0);
  const std::vector<std::uint32_t> labels{0, 1, 1};
  EXPECT_EQ(std::get<NoEvidence>(decode_max_activation(a, labels, 2)).decoder_kind, DecoderKind::MaxActivation);
  EXPECT_FALSE(has_prediction(decode_max_sum(a, labels, 2)));
}

TEST(DecodeMaxActivation, SignedMode) {
  const std::vector<double> a{-0.9, 0.3, 0.0};
  const std::vector<std::uint32_t> labels{0, 1, 2};
  EXPECT_EQ(pred(decode_max_activation(a, labels, 3)).predicted_class, 0u);
  const auto s = decode_max_activation(a, labels, 3, true);
  EXPECT_EQ(pred(s).predicted_class, 1u);
  EXPECT_EQ(pred(s).per_class_scores, (std::vector<double>{-0.9, 0.3, 0.0}));
}

TEST(DecodeMaxSum, AgreesOnOneSparseCode) {
  std::vector<double> a(6, 0.0);
  a[4] = 0.7;
  const std::vector<std::uint32_t> labels{0, 1, 2, 0, 3, 1};
  EXPECT_EQ(pred(decode_max_sum(a, labels, 4)).predicted_class, 3u);
}

TEST(DecodeMaxSum, SumBeatsSinglePeak) {
  const std::vector<double> a{0.5, 0.5, 0.8};
  const std::vector<std::uint32_t> labels{0, 0, 1};
  const auto d = decode_max_sum(a, labels, 2);
  EXPECT_EQ(pred(d).predicted_class, 0u);
  EXPECT_EQ(pred(d).per_class_scores, (std::vector<double>{1.0, 0.8}));
  EXPECT_NE(pred(d).predicted_class, pred(decode_max_activation(a, labels, 2)).predicted_class);
}

TEST(DecodeMaxSum, UsesAbsoluteValues) {
  const std::vector<double> a{-0.6, 0.5};
  const std::vector<std::uint32_t> labels{0, 1};
  EXPECT_EQ(pred(decode_max_sum(a, labels, 2)).predicted_class, 0u);
}

TEST(Decoders, TiesGoToLowestClass) {
  const std::vector<double> a{0.0, 0.4, 0.4};
  const std::vector<std::uint32_t> labels{0, 2, 1};
  EXPECT_EQ(pred(decode_max_sum(a, labels, 3)).predicted_class, 1u);
  EXPECT_EQ(pred(decode_max_activation(a, labels, 3)).predicted_class, 1u);
}

TEST(Decoders, InputErrors) {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<std::uint32_t> short_labels{0};
  const std::vector<std::uint32_t> bad_labels{0, 3};
  EXPECT_THROW(decode_max_sum(a, short_labels, 2), Error);
  EXPECT_THROW(decode_max_activation(a, bad_labels, 2), IndexedError);
}

TEST(DecoderProperties, PositiveScalingKeepsPrediction) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    const auto c = random_case(rng);
    const double s = scale(rng);
    auto scaled = c.a;
    for (double& x : scaled) x *= s;
    EXPECT_EQ(pred(decode_max_sum(scaled, c.labels, c.n_classes)).predicted_class,
              pred(decode_max_sum(c.a, c.labels, c.n_classes)).predicted_class);
    EXPECT_EQ(pred(decode_max_activation(scaled, c.labels, c.n_classes)).predicted_class,
              pred(decode_max_activation(c.a, c.labels, c.n_classes)).predicted_class);
  }
}

TEST(DecoderProperties, OneSparseAgreement) {
  std::mt19937_64 rng(32);
  for (int i = 0; i < 2000; ++i) {
    auto c = random_case(rng);
    std::fill(c.a.begin(), c.a.end(), 0.0);
    const std::size_t j = rng() % c.a.size();
    c.a[j] = std::normal_distribution<double>()(rng);
    if (c.a[j] == 0.0) c.a[j] = 1.0;
    EXPECT_EQ(pred(decode_max_sum(c.a, c.labels, c.n_classes)).predicted_class, c.labels[j]);
    EXPECT_EQ(pred(decode_max_activation(c.a, c.labels, c.n_classes)).predicted_class, c.labels[j]);
  }
}

TEST(DecoderProperties, LabelPermutationEquivariance) {
  std::mt19937_64 rng(33);
  for (int i = 0; i < 2000; ++i) {
    const auto c = random_case(rng);
    std::vector<std::uint32_t> sigma(c.n_classes);
    std::iota(sigma.begin(), sigma.end(), 0u);
    std::shuffle(sigma.begin(), sigma.end(), rng);
    std::vector<std::uint32_t> relabeled;
    for (auto l : c.labels) relabeled.push_back(sigma[l]);

    for (int which = 0; which < 2; ++which) {
      const auto base = which ? decode_max_sum(c.a, c.labels, c.n_classes)
                              : decode_max_activation(c.a, c.labels, c.n_classes);
      const auto moved = which ? decode_max_sum(c.a, relabeled, c.n_classes)
                               : decode_max_activation(c.a, relabeled, c.n_classes);
      for (std::uint32_t k = 0; k < c.n_classes; ++k) {
        EXPECT_EQ(pred(moved).per_class_scores[sigma[k]], pred(base).per_class_scores[k]);
      }
      // argmax commutes with the relabeling unless the winning score is tied
      const auto& scores = pred(base).per_class_scores;  // base outlives this reference
      const double top = *std::max_element(scores.begin(), scores.end());
      if (std::count(scores.begin(), scores.end(), top) == 1) {
        EXPECT_EQ(pred(moved).predicted_class, sigma[pred(base).predicted_class]);
      }
    }
  }
}

TEST(DecoderProperties, MaxSumScoresConserveL1Norm) {
  std::mt19937_64 rng(34);
  for (int i = 0; i < 2000; ++i) {
    const auto c = random_case(rng);
    const auto decoded = decode_max_sum(c.a, c.labels, c.n_classes);
    const auto& scores = pred(decoded).per_class_scores;
    double l1 = 0.0;
    for (double x : c.a) l1 += std::abs(x);
    double total = 0.0;
    for (double s : scores) {
      EXPECT_GE(s, 0.0);
      total += s;
    }
    // identical up to the order of floating-point additions
    EXPECT_NEAR(total, l1, 1e-14 * std::max(1.0, l1) * static_cast<double>(c.a.size()));
  }
}
