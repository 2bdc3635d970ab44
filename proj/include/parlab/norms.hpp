#pragma once

#include <cmath>
#include <vector>

#include "parlab/coefficients.hpp"
#include "parlab/grid.hpp"

namespace parlab {

namespace detail {
/// Spatial midpoint-quadrature sum of |f|^p at one time sample.
inline double spatial_power_sum(const SourceSpec& f, double t, const Grid& grid, double p) {
  double acc = 0.0;
  for (const Point& y : grid.cell_midpoints()) acc += std::pow(std::abs(f.at(y, t)), p);
  return acc * grid.cell_weight();
}
}  // namespace detail

/// Discrete L^{n+1} norm of f over the slab Omega x (t0, t0 + 2) by midpoint
/// quadrature in space (lattice cells covering Omega) and time. The exponent
/// is n + 1 with n the spatial dimension.
inline double slab_norm(const SourceSpec& f, double t0, const Grid& grid, double dt) {
  const double p = static_cast<double>(grid.dim()) + 1.0;
  const long long m = std::llround(2.0 / dt);
  if (m <= 0 || std::abs(2.0 / dt - static_cast<double>(m)) > 1e-9 * std::max(1.0, 2.0 / dt))
    throw Error(errc::bad_window, "slab norm requires dt dividing the slab length 2");
  double acc = 0.0;
  for (long long k = 0; k < m; ++k)
    acc += detail::spatial_power_sum(f, t0 + (static_cast<double>(k) + 0.5) * dt, grid, p) * dt;
  return std::pow(acc, 1.0 / p);
}

/// sup over slab starts of the slab norm, starts sampled at spacing dt across
/// [t_range_start, t_range_end - 2]. Computed with rolling window sums over
/// the shared time-midpoint samples, which agrees sample-for-sample with
/// evaluating slab_norm at every start.
inline double sliding_norm(const SourceSpec& f, double t_range_start, double t_range_end,
                           const Grid& grid, double dt) {
  if (!(t_range_end - t_range_start >= 2.0 - 1e-12))
    throw Error(errc::window_too_short, "sliding norm needs a time range of length >= 2");
  if (!f.f.uses_time()) return slab_norm(f, t_range_start, grid, dt);

  const double p = static_cast<double>(grid.dim()) + 1.0;
  const long long m = std::llround(2.0 / dt);
  if (m <= 0 || std::abs(2.0 / dt - static_cast<double>(m)) > 1e-9 * std::max(1.0, 2.0 / dt))
    throw Error(errc::bad_window, "sliding norm requires dt dividing the slab length 2");
  const long long total = std::llround((t_range_end - t_range_start) / dt);
  if (total < m) throw Error(errc::window_too_short, "time range shorter than one slab");

  std::vector<long double> prefix(static_cast<std::size_t>(total) + 1, 0.0L);
  for (long long k = 0; k < total; ++k) {
    double t = t_range_start + (static_cast<double>(k) + 0.5) * dt;
    prefix[static_cast<std::size_t>(k) + 1] =
        prefix[static_cast<std::size_t>(k)] +
        static_cast<long double>(detail::spatial_power_sum(f, t, grid, p) * dt);
  }
  long double best = 0.0L;
  for (long long k = 0; k + m <= total; ++k) {
    long double s = prefix[static_cast<std::size_t>(k + m)] - prefix[static_cast<std::size_t>(k)];
    if (s > best) best = s;
  }
  return std::pow(static_cast<double>(best), 1.0 / p);
}

}  // namespace parlab
