#pragma once

// Classical EM and the MM (F-objective) variant. Both share the same E and M
// fixed points; they differ only in which objective drives the stall test.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cmem/component_family.hpp"
#include "cmem/dist_core.hpp"
#include "cmem/info_measures.hpp"
#include "cmem/trace.hpp"

namespace cmem {

enum class Objective { Q, F, KL };

struct FitConfig {
  double kl_threshold = 0.001;
  std::size_t max_iterations = 500;
  Objective objective = Objective::Q;

  void validate() const {
    if (!(kl_threshold > 0.0)) throw Error(ErrorCode::config, "kl_threshold must be positive");
    if (max_iterations < 1) throw Error(ErrorCode::config, "max_iterations must be >= 1");
  }
};

// Responsibility mass below this collapses a component.
inline constexpr double kCollapsedMass = 1e-12;
// Objective change per full iteration below this is a stall.
inline constexpr double kStallTolerance = 1e-12;

inline Channel em_e_step(const Distribution& data, const MixtureModel& model) {
  return posterior_channel(model, data);
}

// Weighted maximum likelihood: weights <- P+(Y), then responsibility-weighted
// mean and standard deviation per label.
inline ParameterUpdate em_m_step(const Distribution& data, const Channel& channel) {
  require_same_grid(data.grid(), channel.grid());
  const Grid& grid = data.grid();
  const std::size_t n = channel.labels();
  const LabelWeights weights = plus_weights(data, channel);
  const GaussianFamily family;

  std::vector<GaussianParams> comps;
  std::vector<std::size_t> floored;
  std::vector<double> resp(data.size());
  for (std::size_t j = 0; j < n; ++j) {
    double mass = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      resp[i] = data[i] * channel(i, j);
      mass += resp[i];
    }
    if (mass < kCollapsedMass) {
      throw Error(ErrorCode::collapsed_component, "label " + std::to_string(j) + " has no responsibility mass", j);
    }
    for (double& r : resp) r /= mass;
    auto fitted = family.fit(grid, resp);
    if (fitted.sigma_floored) floored.push_back(j);
    comps.push_back(fitted.params);
  }
  return {MixtureModel(weights, std::move(comps)), std::move(floored)};
}

namespace detail {

inline double objective_value(const MeasureSet& m, Objective o) {
  switch (o) {
    case Objective::Q: return m.q_per_n;
    case Objective::F: return m.f_per_n;
    case Objective::KL: return m.kl;
  }
  return m.kl;
}

}  // namespace detail

// Alternates E and M steps. Row 0 is the start state; each iteration appends
// an EM_E row and an EM_M row. Stops on KL below threshold, on an objective
// stall, or at max_iterations.
inline FitResult run_em(const Distribution& data, const MixtureModel& start, const FitConfig& cfg) {
  cfg.validate();
  MixtureModel model = start;
  MixtureTable table(model, data.grid());
  Channel channel = detail::bayes_channel(table, table.weights, &data);

  FitResult result{model, {}, 0, false, StopReason::max_iter};
  result.trace.push_back(make_row(StepKind::Start, data, channel, table, model));
  if (result.trace.back().measures.kl < cfg.kl_threshold) {
    result.converged = true;
    result.stop_reason = StopReason::threshold;
    return result;
  }

  double previous = detail::objective_value(result.trace.back().measures, cfg.objective);
  while (result.iterations < cfg.max_iterations) {
    channel = detail::bayes_channel(table, table.weights, &data);
    result.trace.push_back(make_row(StepKind::EM_E, data, channel, table, model));

    ParameterUpdate update = [&] {
      try {
        return em_m_step(data, channel);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::collapsed_component) throw;
        throw Error(e.code(), std::string(e.what()) + " at iteration " + std::to_string(result.iterations + 1),
                    result.iterations + 1);
      }
    }();
    model = update.model;
    table = MixtureTable(model, data.grid());
    ++result.iterations;
    result.trace.push_back(make_row(StepKind::EM_M, data, channel, table, model, !update.floored.empty()));
    result.final_model = model;

    const MeasureSet& m = result.trace.back().measures;
    if (m.kl < cfg.kl_threshold) {
      result.converged = true;
      result.stop_reason = StopReason::threshold;
      return result;
    }
    const double current = detail::objective_value(m, cfg.objective);
    if (std::abs(current - previous) < kStallTolerance) {
      result.stop_reason = StopReason::stall;
      return result;
    }
    previous = current;
  }
  result.stop_reason = StopReason::max_iter;
  return result;
}

// MM: EM's fixed points with F/N as the tracked objective.
inline FitResult run_mm(const Distribution& data, const MixtureModel& start, FitConfig cfg) {
  cfg.objective = Objective::F;
  return run_em(data, start, cfg);
}

}  // namespace cmem
