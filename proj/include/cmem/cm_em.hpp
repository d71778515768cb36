#pragma once

// CM-EM: E1 builds the Shannon channel, E2 iterates P(Y) to the fixed point
// P+1(Y) = P(Y), MG re-fits the components to maximize semantic mutual
// information G with the channel held fixed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "cmem/component_family.hpp"
#include "cmem/dist_core.hpp"
#include "cmem/info_measures.hpp"
#include "cmem/trace.hpp"

namespace cmem {

struct CmConfig {
  double kl_threshold = 0.001;
  double e2_tolerance = 1e-8;  // max-norm on the weight update
  std::size_t e2_max_inner = 10000;
  std::size_t max_outer = 200;  // MG-steps

  void validate() const {
    if (!(kl_threshold > 0.0)) throw Error(ErrorCode::config, "kl_threshold must be positive");
    if (!(e2_tolerance > 0.0)) throw Error(ErrorCode::config, "e2_tolerance must be positive");
    if (e2_max_inner < 1) throw Error(ErrorCode::config, "e2_max_inner must be >= 1");
    if (max_outer < 1) throw Error(ErrorCode::config, "max_outer must be >= 1");
  }
};

inline Channel e1_step(const Distribution& data, const MixtureModel& model) {
  return posterior_channel(model, data);
}

struct E2Result {
  LabelWeights weights;
  Channel channel;  // posterior under the returned weights
  std::size_t inner_iterations = 0;
  bool converged = false;
};

// Repeats P+1(y_j) = sum_i P(x_i) P(y_j|x_i); P(Y) <- P+1(Y); rebuild the
// channel. Component densities are evaluated once; only the weights change.
inline E2Result e2_step(const Distribution& data, const MixtureTable& table, const CmConfig& cfg) {
  LabelWeights w = table.weights;
  std::size_t k = 0;
  bool converged = false;
  while (k < cfg.e2_max_inner) {
    ++k;
    const Channel channel = detail::bayes_channel(table, w, &data);
    LabelWeights next = plus_weights(data, channel);
    double delta = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) delta = std::max(delta, std::abs(next[j] - w[j]));
    w = std::move(next);
    if (delta < cfg.e2_tolerance) {
      converged = true;
      break;
    }
  }
  Channel channel = detail::bayes_channel(table, w, &data);
  return {std::move(w), std::move(channel), k, converged};
}

inline E2Result e2_step(const Distribution& data, const MixtureModel& model, const CmConfig& cfg) {
  return e2_step(data, MixtureTable(model, data.grid()), cfg);
}

// The MG target for label j: P(X) P(X|theta_j) / P_theta(X), renormalized.
inline std::vector<std::vector<double>> mg_targets(const Distribution& data, const MixtureTable& table) {
  std::vector<std::vector<double>> out(table.labels(), std::vector<double>(data.size(), 0.0));
  for (std::size_t j = 0; j < table.labels(); ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data[i] == 0.0) continue;
      if (table.marginal[i] == 0.0) {
        throw Error(ErrorCode::zero_evidence, "mixture marginal is zero under positive data", i);
      }
      out[j][i] = data[i] * table.components[j][i] / table.marginal[i];
      total += out[j][i];
    }
    if (!(total > 0.0)) {
      throw Error(ErrorCode::collapsed_component, "MG target has no mass", j);
    }
    for (double& v : out[j]) v /= total;
  }
  return out;
}

// Family-generic MG update; weights are untouched.
template <ComponentFamily Family>
std::vector<FittedComponent<typename Family::params_type>> mg_fit(const Distribution& data,
                                                                  const MixtureTable& table,
                                                                  const Family& family) {
  std::vector<FittedComponent<typename Family::params_type>> out;
  for (const auto& target : mg_targets(data, table)) out.push_back(family.fit(data.grid(), target));
  return out;
}

inline ParameterUpdate mg_step(const Distribution& data, const MixtureTable& table) {
  std::vector<GaussianParams> comps;
  std::vector<std::size_t> floored;
  const auto fitted = mg_fit(data, table, GaussianFamily{});
  for (std::size_t j = 0; j < fitted.size(); ++j) {
    comps.push_back(fitted[j].params);
    if (fitted[j].sigma_floored) floored.push_back(j);
  }
  return {MixtureModel(table.weights, std::move(comps)), std::move(floored)};
}

inline ParameterUpdate mg_step(const Distribution& data, const MixtureModel& model) {
  return mg_step(data, MixtureTable(model, data.grid()));
}

// Loop {E1 -> E2 -> KL test -> MG}. One trace row per sub-step after the
// start row. `iterations` counts MG-steps, `e2_rounds` counts E2-steps.
inline FitResult run_cm_em(const Distribution& data, const MixtureModel& start, const CmConfig& cfg) {
  cfg.validate();
  MixtureModel model = start;
  MixtureTable table(model, data.grid());
  Channel channel = detail::bayes_channel(table, table.weights, &data);

  FitResult result{model, {}, 0, false, StopReason::max_iter};
  result.trace.push_back(make_row(StepKind::Start, data, channel, table, model));

  for (;;) {
    channel = detail::bayes_channel(table, table.weights, &data);
    result.trace.push_back(make_row(StepKind::E1, data, channel, table, model));

    E2Result e2 = e2_step(data, table, cfg);
    ++result.e2_rounds;
    if (!e2.converged) result.inner_nonconverged = true;
    model = model.with_weights(e2.weights);
    table.weights = e2.weights;
    table.marginal = table.mix(e2.weights);
    channel = std::move(e2.channel);
    result.trace.push_back(make_row(StepKind::E2, data, channel, table, model));
    result.final_model = model;

    if (result.trace.back().measures.kl < cfg.kl_threshold) {
      result.converged = true;
      result.stop_reason = StopReason::threshold;
      return result;
    }
    if (result.iterations >= cfg.max_outer) {
      result.stop_reason = StopReason::max_iter;
      return result;
    }

    ParameterUpdate update = mg_step(data, table);
    model = update.model;
    table = MixtureTable(model, data.grid());
    ++result.iterations;
    result.trace.push_back(make_row(StepKind::MG, data, channel, table, model, !update.floored.empty()));
    result.final_model = model;
  }
}

struct VariationalReport {
  std::size_t trials = 0;
  double channel_objective = 0.0;      // R + KY - G at the posterior channel, weights fixed
  std::size_t channel_improving = 0;   // perturbed channels with a strictly lower value
  double channel_min_margin = kInfinity;
  double weight_objective = 0.0;       // same objective at the E2 weights
  std::size_t weight_improving = 0;
  double weight_min_margin = kInfinity;
};

namespace detail {

// sum_i P(x_i) sum_j C_ij log2[C_ij P(x_i) / (w_j P(x_i|theta_j))], i.e.
// I(X;Y) measured against fixed P(Y) minus G.
inline double fixed_weight_gap(const Distribution& data, const Channel& c, const MixtureTable& table,
                               const LabelWeights& w) {
  double v = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) continue;
    for (std::size_t j = 0; j < c.labels(); ++j) {
      const double cij = c(i, j);
      if (cij == 0.0) continue;
      const double denom = w[j] * table.components[j][i];
      if (denom == 0.0) return kInfinity;
      v += data[i] * cij * std::log2(cij * data[i] / denom);
    }
  }
  return v;
}

}  // namespace detail

// Perturbs the E1 channel (weights fixed) and the E2 weights (channel rebuilt
// per the E2 recursion) and counts perturbations that lower R - G. Zero is
// the expected count: both are stationary minima.
inline VariationalReport variational_optimality_check(const Distribution& data, const MixtureModel& model,
                                                      std::size_t trials, double perturbation,
                                                      std::uint64_t seed = 20190501) {
  if (trials < 1) throw Error(ErrorCode::invalid_parameter, "trials must be >= 1");
  if (!(perturbation >= 0.0) || !std::isfinite(perturbation)) {
    throw Error(ErrorCode::invalid_parameter, "perturbation must be finite and non-negative");
  }
  // Differences below this are rounding, not improvement.
  constexpr double kRounding = 1e-12;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const MixtureTable table(model, data.grid());
  const std::size_t m = data.size();
  const std::size_t n = model.size();

  VariationalReport rep;
  rep.trials = trials;

  const Channel best = detail::bayes_channel(table, table.weights, &data);
  rep.channel_objective = detail::fixed_weight_gap(data, best, table, table.weights);
  std::vector<double> entries(m * n);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        entries[i * n + j] = best(i, j) * (1.0 + perturbation * unit(rng));
        total += entries[i * n + j];
      }
      for (std::size_t j = 0; j < n; ++j) entries[i * n + j] /= total;
    }
    const Channel candidate(data.grid(), n, entries);
    const double margin = detail::fixed_weight_gap(data, candidate, table, table.weights) - rep.channel_objective;
    rep.channel_min_margin = std::min(rep.channel_min_margin, margin);
    if (margin < -kRounding) ++rep.channel_improving;
  }

  const CmConfig tight{1.0, 1e-14, 100000, 1};
  const E2Result e2 = e2_step(data, table, tight);
  MixtureTable at_weights = table;
  at_weights.weights = e2.weights;
  rep.weight_objective = detail::fixed_weight_gap(data, e2.channel, at_weights, e2.weights);
  std::vector<double> w(n);
  for (std::size_t t = 0; t < trials; ++t) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w[j] = e2.weights[j] * (1.0 + perturbation * unit(rng));
      total += w[j];
    }
    for (double& v : w) v /= total;
    const LabelWeights lw(w);
    const Channel c = detail::bayes_channel(table, lw, &data);
    const double margin = detail::fixed_weight_gap(data, c, table, lw) - rep.weight_objective;
    rep.weight_min_margin = std::min(rep.weight_min_margin, margin);
    if (margin < -kRounding) ++rep.weight_improving;
  }
  return rep;
}

}  // namespace cmem
