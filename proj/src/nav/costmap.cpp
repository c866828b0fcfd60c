#include "crowdnav/nav/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdnav::nav {

namespace {

constexpr double kFar = 1e20;

// Lower envelope of parabolas (Felzenszwalb & Huttenlocher) on one line of
// squared distances; `f` is overwritten with the transform.
void distance_transform_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                           std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) / (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
        continue;
      }
      break;
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k + 1)] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k + 1)] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
  f.swap(d);
}

}  // namespace

std::vector<double> obstacle_distance(const OccupancyGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<double> sq(grid.cell_count());
  bool any = false;
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const bool occ = grid.cells()[i] == Cell::occupied;
    sq[i] = occ ? 0.0 : kFar;
    any = any || occ;
  }
  if (!any) return std::vector<double>(grid.cell_count(), std::numeric_limits<double>::infinity());

  const int n = std::max(w, h);
  std::vector<double> f, d(static_cast<std::size_t>(n));
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n) + 1);

  for (int c = 0; c < w; ++c) {
    f.assign(static_cast<std::size_t>(h), 0.0);
    d.resize(static_cast<std::size_t>(h));
    for (int r = 0; r < h; ++r) f[static_cast<std::size_t>(r)] = sq[static_cast<std::size_t>(r * w + c)];
    distance_transform_1d(f, d, v, z);
    for (int r = 0; r < h; ++r) sq[static_cast<std::size_t>(r * w + c)] = f[static_cast<std::size_t>(r)];
  }
  for (int r = 0; r < h; ++r) {
    f.assign(sq.begin() + r * w, sq.begin() + (r + 1) * w);
    d.resize(static_cast<std::size_t>(w));
    distance_transform_1d(f, d, v, z);
    std::copy(f.begin(), f.end(), sq.begin() + r * w);
  }

  std::vector<double> out(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) out[i] = std::sqrt(sq[i]) * grid.resolution();
  return out;
}

double inflation_cost(double d, const InflationParams& params) {
  if (d < params.lethal_radius) return kLethalCost;
  if (d <= params.inflation_radius) return kInscribedCost * std::exp(-params.decay * (d - params.lethal_radius));
  return 0.0;
}

std::vector<double> inflate(const OccupancyGrid& grid, const InflationParams& params) {
  const auto dist = obstacle_distance(grid);
  std::vector<double> layer(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) layer[i] = inflation_cost(dist[i], params);
  return layer;
}

std::vector<double> social_layer(const OccupancyGrid& grid, std::span<const AgentState> agents,
                                 const SocialLayerParams& params) {
  std::vector<double> layer(grid.cell_count(), 0.0);
  const double cutoff = params.cutoff_sigmas * params.sigma;
  const double two_sigma2 = 2.0 * params.sigma * params.sigma;
  const double peak = std::min(params.peak, kInscribedCost);
  for (const auto& agent : agents) {
    if (agent.kind == AgentKind::robot) continue;
    const Vec2 p = agent.pose.position();
    const CellIndex lo = grid.cell_of({p.x - cutoff, p.y - cutoff});
    const CellIndex hi = grid.cell_of({p.x + cutoff, p.y + cutoff});
    for (int r = std::max(lo.row, 0); r <= std::min(hi.row, grid.height() - 1); ++r) {
      for (int c = std::max(lo.col, 0); c <= std::min(hi.col, grid.width() - 1); ++c) {
        const double d2 = (grid.center_of({r, c}) - p).squared_norm();
        if (d2 > cutoff * cutoff) continue;
        double& cell = layer[grid.flat({r, c})];
        cell = std::max(cell, peak * std::exp(-d2 / two_sigma2));
      }
    }
  }
  return layer;
}

Costmap::Costmap(std::shared_ptr<const OccupancyGrid> grid, const InflationParams& params)
    : grid_(std::move(grid)), params_(params) {
  distance_ = obstacle_distance(*grid_);
  static_.resize(grid_->cell_count());
  inflation_.resize(grid_->cell_count());
  for (std::size_t i = 0; i < static_.size(); ++i) {
    static_[i] = grid_->cells()[i] == Cell::occupied ? kLethalCost : 0.0;
    inflation_[i] = inflation_cost(distance_[i], params_);
  }
  social_.assign(grid_->cell_count(), 0.0);
  agents_.assign(grid_->cell_count(), 0.0);
  recombine();
}

void Costmap::set_social_layer(std::vector<double> layer) {
  layer.resize(grid_->cell_count(), 0.0);
  for (auto& v : layer) v = std::clamp(v, 0.0, kInscribedCost);
  social_ = std::move(layer);
  recombine();
}

void Costmap::clear_social_layer() {
  std::fill(social_.begin(), social_.end(), 0.0);
  recombine();
}

void Costmap::set_agent_obstacles(std::span<const AgentState> agents, double padding) {
  std::fill(agents_.begin(), agents_.end(), 0.0);
  const OccupancyGrid& grid = *grid_;
  for (const auto& agent : agents) {
    if (agent.kind == AgentKind::robot) continue;
    const Vec2 p = agent.pose.position();
    const double reach = agent.radius + padding;
    const CellIndex lo = grid.cell_of({p.x - reach, p.y - reach});
    const CellIndex hi = grid.cell_of({p.x + reach, p.y + reach});
    for (int r = std::max(lo.row, 0); r <= std::min(hi.row, grid.height() - 1); ++r)
      for (int c = std::max(lo.col, 0); c <= std::min(hi.col, grid.width() - 1); ++c)
        if ((grid.center_of({r, c}) - p).squared_norm() <= reach * reach) agents_[grid.flat({r, c})] = kLethalCost;
  }
  recombine();
}

void Costmap::clear_agent_obstacles() {
  std::fill(agents_.begin(), agents_.end(), 0.0);
  recombine();
}

void Costmap::recombine() {
  combined_.resize(static_.size());
  for (std::size_t i = 0; i < static_.size(); ++i)
    combined_[i] = std::max({static_[i], inflation_[i], social_[i], agents_[i]});
}

}  // namespace crowdnav::nav
