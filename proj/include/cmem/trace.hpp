#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "cmem/dist_core.hpp"
#include "cmem/info_measures.hpp"

namespace cmem {

enum class StepKind { Start, E1, E2, MG, EM_E, EM_M };

inline std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::Start: return "Start";
    case StepKind::E1: return "E1";
    case StepKind::E2: return "E2";
    case StepKind::MG: return "MG";
    case StepKind::EM_E: return "EM_E";
    case StepKind::EM_M: return "EM_M";
  }
  return "?";
}

// One row of a fit trace. The measures are taken with the channel the
// algorithm holds at that point, which after an MG or M step is still the
// channel the update was computed from.
struct StepTrace {
  StepKind kind;
  MeasureSet measures;
  LabelWeights weights;
  std::vector<GaussianParams> components;
  bool sigma_floored = false;

  MixtureModel model() const { return MixtureModel(weights, components); }
};

enum class StopReason { threshold, max_iter, stall };

inline std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::threshold: return "threshold";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stall: return "stall";
  }
  return "?";
}

struct FitResult {
  MixtureModel final_model;
  std::vector<StepTrace> trace;
  std::size_t iterations = 0;  // M-steps (EM/MM) or MG-steps (CM-EM)
  bool converged = false;
  StopReason stop_reason = StopReason::max_iter;
  std::size_t e2_rounds = 0;        // CM-EM only
  bool inner_nonconverged = false;  // some E2 loop hit its cap

  const MeasureSet& final_measures() const { return trace.back().measures; }
};

// Result of re-fitting every component: the new model and which labels hit the sigma floor.
struct ParameterUpdate {
  MixtureModel model;
  std::vector<std::size_t> floored;
};

inline StepTrace make_row(StepKind kind, const Distribution& data, const Channel& held, const MixtureTable& table,
                          const MixtureModel& model, bool floored = false) {
  return StepTrace{kind, measure_set(data, held, table), model.weights(), model.components(), floored};
}

}  // namespace cmem
