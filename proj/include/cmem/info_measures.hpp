#pragma once

// Entropies, cross-entropies, divergences and mutual informations, all in bits.
// Quantities that diverge (log of zero under positive weight) come back as
// +/-infinity rather than throwing, so a degenerate trace row still logs.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "cmem/dist_core.hpp"

namespace cmem {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Everything the traces record about one state, in bits.
struct MeasureSet {
  double q_per_n = 0.0;         // Q/N = -H(X,Y|theta)
  double f_per_n = 0.0;         // F/N = Q/N + H(Y)
  double g = 0.0;               // semantic mutual information
  double r = 0.0;               // Shannon mutual information I(X;Y)
  double r_double_prime = 0.0;  // R''
  double kl = 0.0;              // H(P||P_theta)
  double ky = 0.0;              // H(Y+1||Y)
  double h_x = 0.0;             // H(X)
  double h_y_theta = 0.0;       // H_theta(Y) = -sum P+1(y) log P(y)

  // R + KY - G. Equals kl when the channel is the model's posterior and
  // bounds it from above otherwise.
  double rg_gap() const { return r + ky - g; }
};

namespace detail {

// p * log2(p / q) with the 0 log 0 = 0 convention.
inline double plogratio(double p, double q) {
  if (p == 0.0) return 0.0;
  if (q == 0.0) return kInfinity;
  return p * std::log2(p / q);
}

// weight * log2(value), where zero weight contributes nothing.
inline double wlog(double weight, double value) {
  if (weight == 0.0) return 0.0;
  if (value == 0.0) return -kInfinity;
  return weight * std::log2(value);
}

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= wlog(v, v);
  return h;
}

}  // namespace detail

inline double shannon_entropy(const Distribution& d) { return detail::entropy(d.probs()); }
inline double shannon_entropy(const LabelWeights& w) { return detail::entropy(w.probs()); }

// -sum p log2 q; +infinity when q vanishes under p.
inline double cross_entropy(const Distribution& p, const Distribution& q) {
  require_same_grid(p.grid(), q.grid());
  double h = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) h -= detail::wlog(p[i], q[i]);
  return h;
}

// H(P||Q), summed as p log(p/q) directly so small divergences keep their digits.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  require_same_grid(p.grid(), q.grid());
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += detail::plogratio(p[i], q[i]);
  return d;
}

// P+(y_j) = sum_i P(x_i) P(y_j|x_i)
inline LabelWeights plus_weights(const Distribution& data, const Channel& channel) {
  require_same_grid(data.grid(), channel.grid());
  std::vector<double> plus(channel.labels(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < channel.labels(); ++j) plus[j] += data[i] * channel(i, j);
  }
  double total = 0.0;
  for (double v : plus) total += v;
  for (double& v : plus) v /= total;
  return LabelWeights(std::move(plus));
}

// H(Y+1||Y)
inline double ky_divergence(const LabelWeights& plus, const LabelWeights& current) {
  if (plus.size() != current.size()) throw Error(ErrorCode::invalid_parameter, "label counts differ");
  double d = 0.0;
  for (std::size_t j = 0; j < plus.size(); ++j) d += detail::plogratio(plus[j], current[j]);
  return d;
}

// R = sum_ij P(x_i) P(y_j|x_i) log2[P(y_j|x_i) / P+(y_j)]
inline double shannon_mi(const Distribution& data, const Channel& channel) {
  const LabelWeights plus = plus_weights(data, channel);
  double r = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) continue;
    for (std::size_t j = 0; j < channel.labels(); ++j) {
      r += data[i] * detail::plogratio(channel(i, j), plus[j]);
    }
  }
  return r;
}

// Q/N: the joint weights come from `data` and the weighting channel (left of
// the log), the log argument P(y_j) P(x_i|theta_j) from `eval` (right of it).
inline double q_value(const Distribution& data, const Channel& weighting, const MixtureTable& eval) {
  require_same_grid(data.grid(), weighting.grid());
  double q = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < weighting.labels(); ++j) {
      q += detail::wlog(data[i] * weighting(i, j), eval.weights[j] * eval.components[j][i]);
    }
  }
  return q;
}

inline double q_value(const Distribution& data, const Channel& weighting, const MixtureModel& eval) {
  return q_value(data, weighting, MixtureTable(eval, data.grid()));
}

// F/N = Q/N + H(Y)
inline double f_value(double q_per_n, const LabelWeights& weights) { return q_per_n + shannon_entropy(weights); }

// H(X|theta) = -sum_ij P(x_i) P(y_j|x_i) log2 P(x_i|theta_j)
inline double posterior_cross_entropy(const Distribution& data, const Channel& channel, const MixtureTable& model) {
  double h = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < channel.labels(); ++j) {
      h -= detail::wlog(data[i] * channel(i, j), model.components[j][i]);
    }
  }
  return h;
}

// H_theta(Y) = -sum_j P+(y_j) log2 P(y_j)
inline double label_cross_entropy(const LabelWeights& plus, const LabelWeights& weights) {
  double h = 0.0;
  for (std::size_t j = 0; j < plus.size(); ++j) h -= detail::wlog(plus[j], weights[j]);
  return h;
}

// G = sum_ij P(x_i) P(y_j|x_i) log2[P(x_i|theta_j) / P(x_i)]. May be negative.
inline double semantic_mi(const Distribution& data, const Channel& channel, const MixtureTable& model) {
  require_same_grid(data.grid(), channel.grid());
  double g = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) continue;
    for (std::size_t j = 0; j < channel.labels(); ++j) {
      const double joint = data[i] * channel(i, j);
      if (joint == 0.0) continue;
      const double c = model.components[j][i];
      g += c == 0.0 ? -kInfinity : joint * std::log2(c / data[i]);
    }
  }
  return g;
}

inline double semantic_mi(const Distribution& data, const Channel& channel, const MixtureModel& model) {
  return semantic_mi(data, channel, MixtureTable(model, data.grid()));
}

// R'' = sum_ij P(x_i) [P(x_i|theta_j)/P_theta(x_i)] P(y_j) log2[P(x_i|theta_j)/P_theta(x_i)]
inline double r_double_prime(const Distribution& data, const MixtureTable& model) {
  double r = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) continue;
    const double pt = model.marginal[i];
    if (pt == 0.0) {
      throw Error(ErrorCode::zero_evidence, "mixture marginal is zero under positive data", i);
    }
    for (std::size_t j = 0; j < model.labels(); ++j) {
      const double ratio = model.components[j][i] / pt;
      if (ratio == 0.0 || model.weights[j] == 0.0) continue;
      r += data[i] * ratio * model.weights[j] * std::log2(ratio);
    }
  }
  return r;
}

inline double r_double_prime(const Distribution& data, const MixtureModel& model) {
  return r_double_prime(data, MixtureTable(model, data.grid()));
}

// H(P||P_theta) against a cached model.
inline double model_kl(const Distribution& data, const MixtureTable& model) {
  double d = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) d += detail::plogratio(data[i], model.marginal[i]);
  return d;
}

// All measures of one (data, held channel, model) state.
inline MeasureSet measure_set(const Distribution& data, const Channel& channel, const MixtureTable& model) {
  MeasureSet m;
  const LabelWeights plus = plus_weights(data, channel);
  m.q_per_n = q_value(data, channel, model);
  m.f_per_n = f_value(m.q_per_n, model.weights);
  m.g = semantic_mi(data, channel, model);
  m.r = shannon_mi(data, channel);
  m.r_double_prime = r_double_prime(data, model);
  m.kl = model_kl(data, model);
  m.ky = ky_divergence(plus, model.weights);
  m.h_x = shannon_entropy(data);
  m.h_y_theta = label_cross_entropy(plus, model.weights);
  return m;
}

inline MeasureSet measure_set(const Distribution& data, const Channel& channel, const MixtureModel& model) {
  return measure_set(data, channel, MixtureTable(model, data.grid()));
}

}  // namespace cmem
