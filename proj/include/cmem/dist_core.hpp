#pragma once

// Numerical substrate: grids, exact discrete distributions, channels and
// discretized Gaussian mixtures. Every type is an immutable value once built.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cmem/error.hpp"

namespace cmem {

// Absolute tolerance on "sums to one".
inline constexpr double kProbTolerance = 1e-12;
// Probabilities below this are exact zeros.
inline constexpr double kZeroFloor = 1e-300;

namespace detail {

inline double flush(double p) { return p < kZeroFloor ? 0.0 : p; }

inline void check_simplex(std::span<const double> probs, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::invalid_distribution, std::string(what) + " has a negative or non-finite entry", i);
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    throw Error(ErrorCode::invalid_distribution,
                std::string(what) + " does not sum to 1 (sum=" + std::to_string(sum) + ")");
  }
}

}  // namespace detail

// Ordered support of the instance variable X. Copies share storage.
class Grid {
 public:
  explicit Grid(std::vector<double> points) {
    if (points.size() < 2) {
      throw Error(ErrorCode::invalid_parameter, "grid needs at least 2 points");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!std::isfinite(points[i])) {
        throw Error(ErrorCode::invalid_parameter, "grid point is not finite", i);
      }
      if (i > 0 && !(points[i] > points[i - 1])) {
        throw Error(ErrorCode::invalid_parameter, "grid is not strictly increasing", i);
      }
    }
    points_ = std::make_shared<const std::vector<double>>(std::move(points));
  }

  // lo, lo+step, ..., up to hi inclusive (within rounding).
  static Grid uniform(double lo, double hi, double step = 1.0) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) || !(step > 0.0) || !(hi > lo)) {
      throw Error(ErrorCode::invalid_parameter, "uniform grid needs finite lo < hi and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> pts(count);
    for (std::size_t i = 0; i < count; ++i) pts[i] = lo + static_cast<double>(i) * step;
    return Grid(std::move(pts));
  }

  std::size_t size() const noexcept { return points_->size(); }
  double operator[](std::size_t i) const { return (*points_)[i]; }
  std::span<const double> points() const noexcept { return *points_; }

  double min_spacing() const {
    double best = (*points_)[1] - (*points_)[0];
    for (std::size_t i = 2; i < size(); ++i) best = std::min(best, (*points_)[i] - (*points_)[i - 1]);
    return best;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.points_ == b.points_ || *a.points_ == *b.points_;
  }

 private:
  std::shared_ptr<const std::vector<double>> points_;
};

// Probability vector over a grid.
class Distribution {
 public:
  Distribution(Grid grid, std::vector<double> probs) : grid_(std::move(grid)), probs_(std::move(probs)) {
    if (probs_.size() != grid_.size()) {
      throw Error(ErrorCode::grid_mismatch, "distribution length differs from grid size");
    }
    for (double& p : probs_) {
      if (p >= 0.0) p = detail::flush(p);
    }
    detail::check_simplex(probs_, "distribution");
  }

  // Normalizes non-negative mass; throws degenerate-distribution when it is all zero.
  static Distribution from_mass(Grid grid, std::vector<double> mass) {
    double total = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      if (!std::isfinite(mass[i]) || mass[i] < 0.0) {
        throw Error(ErrorCode::invalid_distribution, "mass entry is negative or non-finite", i);
      }
      total += mass[i];
    }
    if (!(total > 0.0)) {
      throw Error(ErrorCode::degenerate_distribution, "all mass is zero");
    }
    for (double& m : mass) m /= total;
    return Distribution(std::move(grid), std::move(mass));
  }

  static Distribution uniform(Grid grid) {
    const std::size_t m = grid.size();
    return Distribution(std::move(grid), std::vector<double>(m, 1.0 / static_cast<double>(m)));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  Grid grid_;
  std::vector<double> probs_;
};

// P(Y): one probability per label.
class LabelWeights {
 public:
  explicit LabelWeights(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw Error(ErrorCode::invalid_parameter, "label weights are empty");
    for (double& p : probs_) {
      if (p >= 0.0) p = detail::flush(p);
    }
    detail::check_simplex(probs_, "label weights");
  }

  static LabelWeights uniform(std::size_t n) {
    return LabelWeights(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t j) const { return probs_[j]; }
  std::span<const double> probs() const noexcept { return probs_; }

  friend bool operator==(const LabelWeights&, const LabelWeights&) = default;

 private:
  std::vector<double> probs_;
};

// Row-stochastic P(Y|X), one row per grid point, stored row-major.
class Channel {
 public:
  Channel(Grid grid, std::size_t labels, std::vector<double> entries)
      : grid_(std::move(grid)), labels_(labels), entries_(std::move(entries)) {
    if (labels_ == 0) throw Error(ErrorCode::invalid_parameter, "channel needs at least one label");
    if (entries_.size() != grid_.size() * labels_) {
      throw Error(ErrorCode::grid_mismatch, "channel size differs from grid size x labels");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      auto r = std::span<double>(entries_).subspan(i * labels_, labels_);
      for (double& p : r) {
        if (p >= 0.0) p = detail::flush(p);
      }
      try {
        detail::check_simplex(r, "channel row");
      } catch (const Error& e) {
        throw Error(ErrorCode::invalid_distribution, e.what(), i);
      }
    }
  }

  // Every row equal to `row`: the independent channel.
  static Channel constant(Grid grid, const LabelWeights& row) {
    std::vector<double> entries;
    entries.reserve(grid.size() * row.size());
    for (std::size_t i = 0; i < grid.size(); ++i) entries.insert(entries.end(), row.probs().begin(), row.probs().end());
    return Channel(std::move(grid), row.size(), std::move(entries));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t rows() const noexcept { return grid_.size(); }
  std::size_t labels() const noexcept { return labels_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * labels_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * labels_, labels_);
  }

 private:
  Grid grid_;
  std::size_t labels_;
  std::vector<double> entries_;
};

struct GaussianParams {
  double mu;
  double sigma;

  GaussianParams(double mu_, double sigma_) : mu(mu_), sigma(sigma_) {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !(sigma > 0.0)) {
      throw Error(ErrorCode::invalid_parameter, "gaussian needs finite mu and finite sigma > 0");
    }
  }

  friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

// P(Y) together with one Gaussian per label.
class MixtureModel {
 public:
  MixtureModel(LabelWeights weights, std::vector<GaussianParams> components)
      : weights_(std::move(weights)), components_(std::move(components)) {
    if (components_.empty() || components_.size() != weights_.size()) {
      throw Error(ErrorCode::invalid_parameter, "mixture needs n >= 1 components matching the weights");
    }
  }

  const LabelWeights& weights() const noexcept { return weights_; }
  const std::vector<GaussianParams>& components() const noexcept { return components_; }
  const GaussianParams& component(std::size_t j) const { return components_[j]; }
  std::size_t size() const noexcept { return components_.size(); }

  MixtureModel with_weights(LabelWeights w) const { return MixtureModel(std::move(w), components_); }

  friend bool operator==(const MixtureModel&, const MixtureModel&) = default;

 private:
  LabelWeights weights_;
  std::vector<GaussianParams> components_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorCode::grid_mismatch, "operands live on different grids");
}

// P(X|theta): exp(-(x-mu)^2 / 2 sigma^2) normalized over the grid points, so
// the constant absorbs whatever tail mass falls outside the grid.
inline Distribution discretized_gaussian(const Grid& grid, const GaussianParams& params) {
  std::vector<double> mass(grid.size());
  const double two_var = 2.0 * params.sigma * params.sigma;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid[i] - params.mu;
    const double exponent = -(d * d) / two_var;
    if (std::isnan(exponent)) {
      throw Error(ErrorCode::invalid_parameter, "gaussian exponent is not a number", i);
    }
    mass[i] = std::exp(exponent);
  }
  return Distribution::from_mass(grid, std::move(mass));
}

// Component distributions, marginal and weights of one model on one grid.
// Algorithms compute this once per model instead of re-evaluating Gaussians.
struct MixtureTable {
  LabelWeights weights;
  std::vector<Distribution> components;
  std::vector<double> marginal;  // P_theta(x_i), unvalidated working copy

  MixtureTable(const MixtureModel& model, const Grid& grid) : weights(model.weights()) {
    components.reserve(model.size());
    for (const auto& c : model.components()) components.push_back(discretized_gaussian(grid, c));
    marginal = mix(weights);
  }

  std::size_t labels() const noexcept { return components.size(); }
  const Grid& grid() const { return components.front().grid(); }

  // P_theta(X) for the cached components under other weights.
  std::vector<double> mix(const LabelWeights& w) const {
    std::vector<double> out(grid().size(), 0.0);
    for (std::size_t j = 0; j < components.size(); ++j) {
      const auto c = components[j].probs();
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[j] * c[i];
    }
    return out;
  }
};

// P_theta(X) = sum_j P(y_j) P(X|theta_j)
inline Distribution mixture_marginal(const MixtureModel& model, const Grid& grid) {
  MixtureTable t(model, grid);
  return Distribution::from_mass(grid, std::move(t.marginal));
}

namespace detail {

// Bayes rule over cached components. Rows with zero evidence are an error
// unless `support` says the data puts no mass there, in which case the row
// falls back to the weights.
inline Channel bayes_channel(const MixtureTable& table, const LabelWeights& weights,
                             const Distribution* support) {
  const Grid& grid = table.grid();
  const std::size_t m = grid.size();
  const std::size_t n = table.labels();
  std::vector<double> entries(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    double evidence = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      entries[i * n + j] = weights[j] * table.components[j][i];
      evidence += entries[i * n + j];
    }
    if (evidence > 0.0) {
      for (std::size_t j = 0; j < n; ++j) entries[i * n + j] /= evidence;
    } else if (support != nullptr && (*support)[i] == 0.0) {
      for (std::size_t j = 0; j < n; ++j) entries[i * n + j] = weights[j];
    } else {
      throw Error(ErrorCode::zero_evidence, "mixture marginal is zero at grid point x=" + std::to_string(grid[i]), i);
    }
  }
  return Channel(grid, n, std::move(entries));
}

}  // namespace detail

// P(y_j|x_i) = P(y_j) P(x_i|theta_j) / P_theta(x_i); every grid point must carry evidence.
inline Channel posterior_channel(const MixtureModel& model, const Grid& grid) {
  MixtureTable t(model, grid);
  return detail::bayes_channel(t, t.weights, nullptr);
}

// Same, but only points where `data` is positive need evidence.
inline Channel posterior_channel(const MixtureModel& model, const Distribution& data) {
  MixtureTable t(model, data.grid());
  return detail::bayes_channel(t, t.weights, &data);
}

// P(X|y_j) as produced by Bayes' prediction from a channel and a weight vector.
// Left unnormalized on purpose: `mass` is 1 only when the weights match the channel.
struct UnnormalizedConditional {
  std::vector<double> values;
  double mass;
};

inline UnnormalizedConditional conditional_from_channel(const Distribution& data, const Channel& channel,
                                                        const LabelWeights& weights, std::size_t label) {
  require_same_grid(data.grid(), channel.grid());
  if (label >= channel.labels() || weights.size() != channel.labels()) {
    throw Error(ErrorCode::invalid_parameter, "label index or weight count does not match the channel", label);
  }
  if (weights[label] == 0.0) {
    throw Error(ErrorCode::division_by_zero, "label weight is zero", label);
  }
  UnnormalizedConditional out{std::vector<double>(data.size()), 0.0};
  for (std::size_t i = 0; i < data.size(); ++i) {
    out.values[i] = data[i] * channel(i, label) / weights[label];
    out.mass += out.values[i];
  }
  return out;
}

// T(theta_j|X): the likelihood ratio P(X|theta_j)/P(X) scaled so its maximum is 1.
// 0/0 is taken as 0.
inline std::vector<double> truth_function(const Distribution& data, const Distribution& component) {
  require_same_grid(data.grid(), component.grid());
  std::vector<double> ratio(data.size(), 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (component[i] == 0.0) continue;
    if (data[i] == 0.0) {
      throw Error(ErrorCode::undefined_ratio, "data is zero where the component is positive", i);
    }
    ratio[i] = component[i] / data[i];
    peak = std::max(peak, ratio[i]);
  }
  for (double& r : ratio) r /= peak;
  return ratio;
}

// T(theta_j) = sum_i P(x_i) T(theta_j|x_i)
inline double logical_probability(const Distribution& data, std::span<const double> truth) {
  double t = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) t += data[i] * truth[i];
  return t;
}

// Inverse of truth_function: P(X|theta_j) = P(X) T(theta_j|X) / T(theta_j).
inline Distribution likelihood_from_truth(const Distribution& data, std::span<const double> truth) {
  if (truth.size() != data.size()) throw Error(ErrorCode::grid_mismatch, "truth function length differs from grid");
  const double t = logical_probability(data, truth);
  if (!(t > 0.0)) throw Error(ErrorCode::degenerate_distribution, "truth function has zero logical probability");
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i] * truth[i] / t;
  return Distribution::from_mass(data.grid(), std::move(out));
}

}  // namespace cmem
