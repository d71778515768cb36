#pragma once

// Maximum-mutual-information classification of unseen instances under an
// already fitted mixture. A partition of the grid induces a Shannon channel
// P(Z|Y); the matched semantic channel scores each grid point; reassigning
// every point to its best class gives the next partition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cmem/dist_core.hpp"
#include "cmem/info_measures.hpp"

namespace cmem {

// Class index (0-based) per grid point.
struct Partition {
  std::vector<std::size_t> assignment;
  std::size_t classes = 2;

  Partition(std::vector<std::size_t> a, std::size_t n) : assignment(std::move(a)), classes(n) {
    if (classes < 1) throw Error(ErrorCode::invalid_parameter, "partition needs at least one class");
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      if (assignment[i] >= classes) throw Error(ErrorCode::invalid_parameter, "class index out of range", i);
    }
  }

  // Two classes: x <= boundary goes to class 0, the rest to class 1.
  static Partition split(const Grid& grid, double boundary) {
    std::vector<std::size_t> a(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = grid[i] <= boundary ? 0 : 1;
    return Partition(std::move(a), 2);
  }

  bool contiguous() const { return std::is_sorted(assignment.begin(), assignment.end()); }

  // Largest grid point in class 0 when the partition is contiguous.
  std::optional<double> boundary(const Grid& grid) const {
    if (!contiguous() || assignment.empty() || assignment.front() != 0) return std::nullopt;
    std::size_t last = 0;
    while (last + 1 < assignment.size() && assignment[last + 1] == 0) ++last;
    return grid[last];
  }

  friend bool operator==(const Partition&, const Partition&) = default;
};

// P(Y) and normalized P*(X|y_j) on a common grid.
struct FittedMixture {
  LabelWeights weights;
  std::vector<Distribution> components;

  static FittedMixture from_model(const MixtureModel& model, const Grid& grid) {
    MixtureTable t(model, grid);
    return {t.weights, t.components};
  }

  const Grid& grid() const { return components.front().grid(); }

  // P(Y|x_i) by Bayes' rule; a point no component reaches gets the prior.
  std::vector<double> posterior(std::size_t i) const {
    std::vector<double> row(components.size());
    double evidence = 0.0;
    for (std::size_t j = 0; j < components.size(); ++j) {
      row[j] = weights[j] * components[j][i];
      evidence += row[j];
    }
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = evidence > 0.0 ? row[j] / evidence : weights[j];
    return row;
  }
};

// P(z_j|y_i), rows indexed by true label.
struct LabelChannel {
  std::vector<std::vector<double>> rows;
  std::vector<bool> empty_class;

  std::size_t labels() const { return rows.size(); }
  std::size_t classes() const { return rows.empty() ? 0 : rows.front().size(); }
};

// T(theta_zj|y_i) with each class column peaking at 1, plus T(theta_zj).
struct SemanticLabelChannel {
  std::vector<std::vector<double>> truth;
  std::vector<double> t_norms;
};

// P(z_j|y_i) = sum over x_k in C_j of P*(x_k|y_i). Empty classes are flagged.
inline LabelChannel partition_channel(const Partition& partition, std::span<const Distribution> components) {
  LabelChannel out;
  out.rows.assign(components.size(), std::vector<double>(partition.classes, 0.0));
  for (std::size_t y = 0; y < components.size(); ++y) {
    if (components[y].size() != partition.assignment.size()) {
      throw Error(ErrorCode::grid_mismatch, "partition and component sizes differ", y);
    }
    for (std::size_t k = 0; k < partition.assignment.size(); ++k) {
      out.rows[y][partition.assignment[k]] += components[y][k];
    }
  }
  out.empty_class.assign(partition.classes, true);
  for (std::size_t k = 0; k < partition.assignment.size(); ++k) out.empty_class[partition.assignment[k]] = false;
  return out;
}

enum class EmptyClassPolicy { reject, retain };

inline SemanticLabelChannel match_semantic(const LabelChannel& channel, const LabelWeights& weights,
                                           EmptyClassPolicy policy = EmptyClassPolicy::reject) {
  const std::size_t ny = channel.labels();
  const std::size_t nz = channel.classes();
  if (weights.size() != ny) throw Error(ErrorCode::invalid_parameter, "weights do not match channel labels");
  SemanticLabelChannel out{std::vector<std::vector<double>>(ny, std::vector<double>(nz, 0.0)),
                           std::vector<double>(nz, 0.0)};
  for (std::size_t z = 0; z < nz; ++z) {
    double peak = 0.0;
    for (std::size_t y = 0; y < ny; ++y) peak = std::max(peak, channel.rows[y][z]);
    if (!(peak > 0.0)) {
      if (policy == EmptyClassPolicy::reject) {
        throw Error(ErrorCode::empty_class, "class " + std::to_string(z) + " receives no probability", z);
      }
      continue;
    }
    for (std::size_t y = 0; y < ny; ++y) {
      out.truth[y][z] = channel.rows[y][z] / peak;
      out.t_norms[z] += out.truth[y][z] * weights[y];
    }
  }
  return out;
}

// Semantic information z_j carries about Y given the posterior at one point.
inline double semantic_score(std::span<const double> posterior, const SemanticLabelChannel& semantic, std::size_t z) {
  if (semantic.t_norms[z] == 0.0) return -kInfinity;
  double s = 0.0;
  for (std::size_t y = 0; y < posterior.size(); ++y) {
    if (posterior[y] == 0.0) continue;
    const double t = semantic.truth[y][z];
    if (t == 0.0) return -kInfinity;
    s += posterior[y] * std::log2(t / semantic.t_norms[z]);
  }
  return s;
}

// argmax over classes; ties go to the lower index.
inline std::size_t classify_point(std::span<const double> posterior, const SemanticLabelChannel& semantic) {
  const std::size_t nz = semantic.t_norms.size();
  std::size_t best = nz;
  double best_score = -kInfinity;
  for (std::size_t z = 0; z < nz; ++z) {
    const double s = semantic_score(posterior, semantic, z);
    if (s == -kInfinity) continue;
    if (best == nz || s > best_score) {
      best = z;
      best_score = s;
    }
  }
  if (best == nz) throw Error(ErrorCode::all_minus_infinity, "every class scores minus infinity");
  return best;
}

// Shannon I(Y;Z) of a label channel.
inline double label_mutual_information(const LabelChannel& channel, const LabelWeights& weights) {
  std::vector<double> pz(channel.classes(), 0.0);
  for (std::size_t y = 0; y < channel.labels(); ++y) {
    for (std::size_t z = 0; z < channel.classes(); ++z) pz[z] += weights[y] * channel.rows[y][z];
  }
  double mi = 0.0;
  for (std::size_t y = 0; y < channel.labels(); ++y) {
    for (std::size_t z = 0; z < channel.classes(); ++z) {
      mi += weights[y] * detail::plogratio(channel.rows[y][z], pz[z]);
    }
  }
  return mi;
}

// Semantic I(Y;theta_Z|C) = sum_ij P(y_i) P(z_j|y_i) log2[T(theta_zj|y_i) / T(theta_zj)].
inline double label_semantic_information(const LabelChannel& channel, const SemanticLabelChannel& semantic,
                                         const LabelWeights& weights) {
  double s = 0.0;
  for (std::size_t y = 0; y < channel.labels(); ++y) {
    for (std::size_t z = 0; z < channel.classes(); ++z) {
      const double joint = weights[y] * channel.rows[y][z];
      if (joint == 0.0) continue;
      s += joint * std::log2(semantic.truth[y][z] / semantic.t_norms[z]);
    }
  }
  return s;
}

// One pass: channel from the partition, matched semantic channel, reclassify every point.
inline Partition reclassify(const FittedMixture& model, const Partition& current) {
  const LabelChannel channel = partition_channel(current, model.components);
  const SemanticLabelChannel semantic = match_semantic(channel, model.weights, EmptyClassPolicy::retain);
  std::vector<std::size_t> next(current.assignment.size());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = classify_point(model.posterior(i), semantic);
  return Partition(std::move(next), current.classes);
}

struct ClassificationRound {
  Partition partition;
  std::optional<double> boundary;
  double shannon_mi;   // I(Y;Z)
  double semantic_mi;  // I(Y;theta_Z|C) at the matched semantic channel
};

struct ClassificationResult {
  Partition partition;
  std::size_t rounds = 0;
  bool converged = false;
  std::vector<ClassificationRound> trace;  // entry 0 is the start partition

  std::optional<double> boundary(const Grid& grid) const { return partition.boundary(grid); }
};

inline ClassificationRound describe_round(const FittedMixture& model, const Partition& p) {
  const LabelChannel channel = partition_channel(p, model.components);
  const SemanticLabelChannel semantic = match_semantic(channel, model.weights, EmptyClassPolicy::retain);
  return {p, p.boundary(model.grid()), label_mutual_information(channel, model.weights),
          label_semantic_information(channel, semantic, model.weights)};
}

// Iterates reclassify until the partition repeats. A return to an earlier
// partition that is not the immediate predecessor is an oscillation and is
// reported as non-converged.
inline ClassificationResult run_cm_classification(const FittedMixture& model, const Partition& start,
                                                  std::size_t max_rounds) {
  if (start.assignment.size() != model.grid().size()) {
    throw Error(ErrorCode::grid_mismatch, "start partition does not cover the grid");
  }
  ClassificationResult result{start, 0, false, {}};
  result.trace.push_back(describe_round(model, start));
  while (result.rounds < max_rounds) {
    Partition next = reclassify(model, result.partition);
    ++result.rounds;
    result.trace.push_back(describe_round(model, next));
    if (next == result.partition) {
      result.converged = true;
      return result;
    }
    const bool cycled = std::any_of(result.trace.begin(), result.trace.end() - 2,
                                    [&](const ClassificationRound& r) { return r.partition == next; });
    result.partition = std::move(next);
    if (cycled) return result;
  }
  return result;
}

}  // namespace cmem
