#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "random_states.hpp"
#include "test_support.hpp"

using namespace cmem;

namespace {

constexpr std::uint64_t kSeed = 20190501;

double channel_mismatch(const Distribution& data, const Channel& c, const Channel& post) {
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) continue;
    for (std::size_t j = 0; j < c.labels(); ++j) {
      if (c(i, j) > 0.0) d += data[i] * c(i, j) * std::log2(c(i, j) / post(i, j));
    }
  }
  return d;
}

}  // namespace

TEST(identity_suite, two_hundred_random_triples) {
  std::mt19937_64 rng(kSeed);
  for (int t = 0; t < 200; ++t) {
    const auto s = random_states::make(rng);
    SCOPED_TRACE("triple " + std::to_string(t));
    const MixtureTable table(s.model, s.data.grid());
    const Channel post = posterior_channel(s.model, s.data);

    // The chain at the posterior channel, and its general form for any channel.
    const MeasureSet at_post = measure_set(s.data, post, table);
    EXPECT_NEAR(at_post.kl, at_post.r + at_post.ky - at_post.g, 1e-9);
    const MeasureSet m = measure_set(s.data, s.channel, table);
    EXPECT_NEAR(m.r + m.ky - m.g, m.kl + channel_mismatch(s.data, s.channel, post), 1e-9);

    const double hx_theta = posterior_cross_entropy(s.data, s.channel, table);
    EXPECT_NEAR(m.g, m.h_x - hx_theta, 1e-9);
    EXPECT_NEAR(-m.q_per_n, m.h_y_theta + hx_theta, 1e-9);

    EXPECT_GE(m.kl, 0.0);
    EXPECT_EQ(kl_divergence(s.data, s.data), 0.0);
  }
}

TEST(identity_suite, oracle_agreement_on_random_triples) {
  std::mt19937_64 rng(kSeed + 1);
  for (int t = 0; t < 50; ++t) {
    const auto s = random_states::make(rng);
    const MeasureSet m = measure_set(s.data, s.channel, s.model);
    const auto o = oracle::measures(support::oracle_grid(s.data.grid()), support::to_oracle(s.data),
                                    support::to_oracle(s.channel), support::to_oracle(s.model));
    EXPECT_NEAR(m.q_per_n, static_cast<double>(o.q), 1e-10) << t;
    EXPECT_NEAR(m.g, static_cast<double>(o.g), 1e-10) << t;
    EXPECT_NEAR(m.r, static_cast<double>(o.r), 1e-10) << t;
    EXPECT_NEAR(m.r_double_prime, static_cast<double>(o.rpp), 1e-10) << t;
    EXPECT_NEAR(m.kl, static_cast<double>(o.kl), 1e-10) << t;
    EXPECT_NEAR(m.ky, static_cast<double>(o.ky), 1e-10) << t;
  }
}

TEST(identity_suite, kl_positive_for_distinct_distributions) {
  std::mt19937_64 rng(kSeed + 2);
  for (int t = 0; t < 100; ++t) {
    const Grid g = Grid::uniform(1, 20);
    const Distribution p(g, random_states::simplex(rng, 20));
    const Distribution q(g, random_states::simplex(rng, 20));
    EXPECT_GT(kl_divergence(p, q), 0.0);
  }
}

TEST(em_property, likelihood_monotone_from_random_starts) {
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> mu(20, 80), sigma(5, 20);
  const Distribution data = support::builtin("example1").data();
  for (int t = 0; t < 20; ++t) {
    const MixtureModel start(LabelWeights(random_states::simplex(rng, 2)),
                             {GaussianParams(mu(rng), sigma(rng)), GaussianParams(mu(rng), sigma(rng))});
    FitConfig cfg;
    cfg.max_iterations = 40;
    const FitResult r = run_em(data, start, cfg);
    for (std::size_t k = 2; k < r.trace.size(); k += 2) {
      EXPECT_LE(r.trace[k].measures.kl, r.trace[k - 2].measures.kl + 1e-9) << "start " << t << " row " << k;
    }
  }
}

TEST(cm_em_property, e2_rows_satisfy_the_fixed_point) {
  for (const char* name : {"example1", "example2", "example3"}) {
    const auto ex = support::builtin(name);
    const CmConfig cfg;
    const FitResult r = run_cm_em(ex.data(), ex.start, cfg);
    for (const auto& row : r.trace) {
      if (row.kind != StepKind::E2) continue;
      EXPECT_LT(row.measures.ky, 1e-6) << name;
      EXPECT_LT(std::abs(row.measures.r - row.measures.r_double_prime), 1e-6) << name;
    }
  }
}

TEST(cm_em_property, kl_descends_from_random_starts) {
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_real_distribution<double> mu(20, 80), sigma(5, 20);
  const Distribution data = support::builtin("example2").data();
  for (int t = 0; t < 20; ++t) {
    const MixtureModel start(LabelWeights(random_states::simplex(rng, 2)),
                             {GaussianParams(mu(rng), sigma(rng)), GaussianParams(mu(rng), sigma(rng))});
    CmConfig cfg;
    cfg.max_outer = 30;
    const FitResult r = run_cm_em(data, start, cfg);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_LE(r.trace[k].measures.kl, r.trace[k - 1].measures.kl + 1e-9) << "start " << t << " row " << k;
    }
  }
}

// Same starts on a grid wide enough that no component tail is cut off. The
// moment-matching MG update is then the exact maximizer and KL descends.
TEST(cm_em_property, kl_descends_from_random_starts_on_a_wide_grid) {
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_real_distribution<double> mu(20, 80), sigma(5, 20);
  const Grid wide = Grid::uniform(-100, 200);
  const Distribution data = mixture_marginal(support::builtin("example2").truth, wide);
  for (int t = 0; t < 20; ++t) {
    const MixtureModel start(LabelWeights(random_states::simplex(rng, 2)),
                             {GaussianParams(mu(rng), sigma(rng)), GaussianParams(mu(rng), sigma(rng))});
    CmConfig cfg;
    cfg.max_outer = 30;
    const FitResult r = run_cm_em(data, start, cfg);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_LE(r.trace[k].measures.kl, r.trace[k - 1].measures.kl + 1e-9) << "start " << t << " row " << k;
    }
  }
}

TEST(variational_property, random_states_have_no_improving_perturbation) {
  std::mt19937_64 rng(kSeed + 5);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_states::make(rng);
    const VariationalReport rep = variational_optimality_check(s.data, s.model, 200, 1e-2, kSeed + t);
    EXPECT_EQ(rep.channel_improving, 0u) << t;
    EXPECT_EQ(rep.weight_improving, 0u) << t;
  }
}

TEST(determinism, identical_inputs_give_identical_traces) {
  std::mt19937_64 rng(kSeed + 6);
  for (int t = 0; t < 5; ++t) {
    const auto s = random_states::make(rng);
    CmConfig cfg;
    cfg.max_outer = 10;
    const FitResult a = run_cm_em(s.data, s.model, cfg);
    const FitResult b = run_cm_em(s.data, s.model, cfg);
    EXPECT_EQ(trace_csv(a.trace), trace_csv(b.trace));
  }
}
