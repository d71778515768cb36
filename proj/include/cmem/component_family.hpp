#pragma once

// Parameter fitting for mixture components. The CM-EM MG-step and the EM
// M-step reduce to "fit a component to a weighted distribution on the grid";
// a family supplies that fit plus its density. Only the Gaussian family ships.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>

#include "cmem/dist_core.hpp"

namespace cmem {

template <class Params>
struct FittedComponent {
  Params params;
  bool sigma_floored = false;
};

template <class F>
concept ComponentFamily = requires(const F& family, const Grid& grid, std::span<const double> weights,
                                   const typename F::params_type& params) {
  typename F::params_type;
  { family.density(grid, params) } -> std::convertible_to<Distribution>;
  { family.fit(grid, weights) } -> std::same_as<FittedComponent<typename F::params_type>>;
};

// Moment matching. `weights` must be non-negative and sum to 1 over the grid.
// sigma is clamped to half the smallest grid spacing: below that a discrete
// grid makes the likelihood unbounded.
struct GaussianFamily {
  using params_type = GaussianParams;

  Distribution density(const Grid& grid, const GaussianParams& params) const {
    return discretized_gaussian(grid, params);
  }

  FittedComponent<GaussianParams> fit(const Grid& grid, std::span<const double> weights) const {
    double mu = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) mu += weights[i] * grid[i];
    double var = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid[i] - mu;
      var += weights[i] * d * d;
    }
    const double floor = sigma_floor(grid);
    const double sigma = std::sqrt(var);
    if (sigma < floor) return {GaussianParams(mu, floor), true};
    return {GaussianParams(mu, sigma), false};
  }

  static double sigma_floor(const Grid& grid) { return 0.5 * grid.min_spacing(); }
};

static_assert(ComponentFamily<GaussianFamily>);

}  // namespace cmem
