// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "avf/density.hpp"
#include "avf/parallel.hpp"
#include "avf/stats.hpp"

namespace avf {

std::size_t DensityGrid::node_count() const {
  std::size_t n = axes.empty() ? 0 : 1;
  for (const auto& a : axes) n *= a.size();
  return n;
}

double DensityGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.size() > 1 ? a[1] - a[0] : 1.0;
  return v;
}

double DensityGrid::mass() const { return pairwise_sum(values) * cell_volume(); }

PhaseVec DensityGrid::node(std::size_t flat) const {
  PhaseVec y(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const std::size_t n = axes[k].size();
    y[k] = axes[k][flat % n];
    flat /= n;
  }
  return y;
}

DensityGrid uniform_grid(const std::vector<std::pair<double, double>>& ranges, int nodes) {
  if (ranges.empty() || static_cast<int>(ranges.size()) > kMaxPhaseDim)
    throw std::invalid_argument("grid dimension out of range");
  if (nodes < 2) throw std::invalid_argument("grid needs >= 2 nodes per axis");
  DensityGrid grid;
  for (const auto& [lo, hi] : ranges) {
    if (!(hi > lo)) throw std::invalid_argument("grid range must have hi > lo");
    std::vector<double> axis(nodes);
    const double step = (hi - lo) / (nodes - 1);
    for (int i = 0; i < nodes; ++i) axis[i] = lo + step * i;
    grid.axes.push_back(std::move(axis));
  }
  return grid;
}

DensityGrid grid_for_samples(const std::vector<PhaseVec>& reference, double rho, int nodes) {
  if (reference.empty()) throw std::invalid_argument("grid needs reference samples");
  const int dim = static_cast<int>(reference.front().size());
  std::vector<std::pair<double, double>> ranges;
  std::vector<double> coord(reference.size());
  for (int k = 0; k < dim; ++k) {
    for (std::size_t i = 0; i < reference.size(); ++i) coord[i] = reference[i][k];
    ranges.emplace_back(quantile(coord, 0.001) - 3.0 * rho, quantile(coord, 0.999) + 3.0 * rho);
  }
  return uniform_grid(ranges, nodes);
}

int default_nodes_per_axis(int dim) {
  switch (dim) {
    case 1: return 1024;
    case 2: return 128;
    case 3: return 96;
    case 4: return 48;
    default: return std::max(4, static_cast<int>(std::pow(6.0e6, 1.0 / dim)));
  }
}

double gaussian_kernel(double sq_norm, double rho, int dim) {
  const double norm = std::pow(2.0 * std::numbers::pi * rho * rho, -0.5 * dim);
  return norm * std::exp(-sq_norm / (2.0 * rho * rho));
}

DensityGrid kde(const std::vector<PhaseVec>& samples, const DensityGrid& grid, double rho,
                unsigned threads, double cutoff) {
  if (samples.empty()) throw std::invalid_argument("kde of an empty sample set");
  if (!(rho > 0.0)) throw std::invalid_argument("kde bandwidth must be positive");
  const int dim = grid.dim();
  for (const auto& x : samples)
    if (x.size() != dim) throw std::invalid_argument("sample dimension does not match grid");

  DensityGrid out;
  out.axes = grid.axes;
  out.bandwidth = rho;
  out.values.assign(grid.node_count(), 0.0);

  const double radius = cutoff * rho;
  const double radius_sq = radius * radius;
  const double norm = std::pow(2.0 * std::numbers::pi * rho * rho, -0.5 * dim);
  const double inv_two_rho_sq = 1.0 / (2.0 * rho * rho);

  std::vector<std::size_t> stride(dim, 1);
  for (int k = dim - 2; k >= 0; --k) stride[k] = stride[k + 1] * grid.axes[k + 1].size();

  // Each worker owns a slab of first-axis indices and visits every sample in
  // order, so each node accumulates in sample order whatever the thread count.
  const std::size_t n0 = grid.axes[0].size();
  const unsigned slabs = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n0));
  parallel_for(slabs, slabs, [&](std::size_t slab) {
    const std::size_t slab_lo = n0 * slab / slabs;
    const std::size_t slab_hi = n0 * (slab + 1) / slabs;
    std::vector<std::size_t> lo(dim), hi(dim), idx(dim);
    for (const auto& x : samples) {
      bool empty = false;
      for (int k = 0; k < dim && !empty; ++k) {
        const auto& axis = grid.axes[k];
        const auto first = std::lower_bound(axis.begin(), axis.end(), x[k] - radius);
        const auto last = std::upper_bound(axis.begin(), axis.end(), x[k] + radius);
        lo[k] = static_cast<std::size_t>(first - axis.begin());
        hi[k] = static_cast<std::size_t>(last - axis.begin());
        if (k == 0) {
          lo[0] = std::max(lo[0], slab_lo);
          hi[0] = std::min(hi[0], slab_hi);
        }
        empty = lo[k] >= hi[k];
      }
      if (empty) continue;
      idx = lo;
      while (true) {
        double sq = 0.0;
        std::size_t flat = 0;
        for (int k = 0; k < dim; ++k) {
          const double diff = grid.axes[k][idx[k]] - x[k];
          sq += diff * diff;
          flat += idx[k] * stride[k];
        }
        if (sq <= radius_sq) out.values[flat] += norm * std::exp(-sq * inv_two_rho_sq);
        int k = dim - 1;
        while (k >= 0 && ++idx[k] == hi[k]) {
          idx[k] = lo[k];
          --k;
        }
        if (k < 0) break;
      }
    }
  });

  const double inv_m = 1.0 / static_cast<double>(samples.size());
  for (double& v : out.values) v *= inv_m;
  return out;
}

double density_distance(const DensityGrid& g1, const DensityGrid& g2) {
  if (g1.axes != g2.axes) throw std::invalid_argument("density grids differ");
  if (g1.bandwidth != g2.bandwidth) throw std::invalid_argument("density bandwidths differ");
  if (g1.values.size() != g2.values.size())
    throw std::invalid_argument("density grids have different value counts");
  double worst = 0.0;
  for (std::size_t i = 0; i < g1.values.size(); ++i)
    worst = std::max(worst, std::abs(g1.values[i] - g2.values[i]));
  return worst;
}

}  // namespace avf
