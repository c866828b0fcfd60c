#include "crowdnav/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace crowdnav {

namespace {

constexpr const char* kMapSchema = "crowdnav.map/1";

double clamp_to(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin,
                             std::vector<Cell> cells)
    : width_(width), height_(height), resolution_(resolution), origin_(origin),
      cells_(std::move(cells)) {
  if (width <= 0 || height <= 0) throw MapError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw MapError("grid resolution must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw MapError("cell count does not match width*height");
}

OccupancyGrid OccupancyGrid::from_rows(const std::vector<std::string>& rows, double resolution,
                                       Vec2 origin) {
  if (rows.empty()) throw MapError("map has no rows");
  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows.front().size());
  std::vector<Cell> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int r = 0; r < height; ++r) {
    const auto& line = rows[static_cast<std::size_t>(height - 1 - r)];
    if (static_cast<int>(line.size()) != width) throw MapError("ragged map rows");
    for (int c = 0; c < width; ++c)
      cells[static_cast<std::size_t>(r * width + c)] =
          line[static_cast<std::size_t>(c)] == '#' ? Cell::occupied : Cell::free;
  }
  return OccupancyGrid(width, height, resolution, origin, std::move(cells));
}

OccupancyGrid OccupancyGrid::load(const std::filesystem::path& path) {
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw MapError("cannot read map " + path.string() + ": " + e.what());
  }
  if (!doc["schema"] || doc["schema"].as<std::string>() != kMapSchema)
    throw MapError(path.string() + ": missing or unknown schema (expected " + kMapSchema + ")");
  if (!doc["resolution"] || !doc["rows"]) throw MapError(path.string() + ": needs resolution and rows");

  const double resolution = doc["resolution"].as<double>();
  const double char_size = doc["char_size"] ? doc["char_size"].as<double>() : resolution;
  const double ratio = char_size / resolution;
  const int scale = static_cast<int>(std::lround(ratio));
  if (scale < 1 || std::abs(ratio - scale) > 1e-9)
    throw MapError(path.string() + ": char_size must be a positive multiple of resolution");
  Vec2 origin{};
  if (doc["origin"]) origin = {doc["origin"][0].as<double>(), doc["origin"][1].as<double>()};

  std::vector<std::string> text;
  std::istringstream in(doc["rows"].as<std::string>());
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) text.push_back(line);
  }
  std::vector<std::string> rows;
  for (const auto& line : text) {
    std::string wide;
    for (char ch : line) wide.append(static_cast<std::size_t>(scale), ch);
    for (int k = 0; k < scale; ++k) rows.push_back(wide);
  }
  return from_rows(rows, resolution, origin);
}

CellIndex OccupancyGrid::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.y - origin_.y) / resolution_)),
          static_cast<int>(std::floor((p.x - origin_.x) / resolution_))};
}

Vec2 OccupancyGrid::center_of(CellIndex c) const {
  return {origin_.x + (c.col + 0.5) * resolution_, origin_.y + (c.row + 0.5) * resolution_};
}

bool OccupancyGrid::is_closed() const {
  for (int c = 0; c < width_; ++c)
    if (!occupied({0, c}) || !occupied({height_ - 1, c})) return false;
  for (int r = 0; r < height_; ++r)
    if (!occupied({r, 0}) || !occupied({r, width_ - 1})) return false;
  return true;
}

bool OccupancyGrid::disc_hits_obstacle(Vec2 center, double radius) const {
  const CellIndex lo = cell_of({center.x - radius, center.y - radius});
  const CellIndex hi = cell_of({center.x + radius, center.y + radius});
  const double r2 = radius * radius;
  for (int r = lo.row; r <= hi.row; ++r) {
    for (int c = lo.col; c <= hi.col; ++c) {
      if (!occupied({r, c})) continue;
      const double x0 = origin_.x + c * resolution_;
      const double y0 = origin_.y + r * resolution_;
      const Vec2 q{clamp_to(center.x, x0, x0 + resolution_), clamp_to(center.y, y0, y0 + resolution_)};
      if ((center - q).squared_norm() < r2) return true;
    }
  }
  return false;
}

bool OccupancyGrid::nearest_obstacle_point(Vec2 p, double cutoff, Vec2& out) const {
  const CellIndex lo = cell_of({p.x - cutoff, p.y - cutoff});
  const CellIndex hi = cell_of({p.x + cutoff, p.y + cutoff});
  double best = cutoff * cutoff;
  bool found = false;
  for (int r = lo.row; r <= hi.row; ++r) {
    for (int c = lo.col; c <= hi.col; ++c) {
      if (!occupied({r, c})) continue;
      const double x0 = origin_.x + c * resolution_;
      const double y0 = origin_.y + r * resolution_;
      const Vec2 q{clamp_to(p.x, x0, x0 + resolution_), clamp_to(p.y, y0, y0 + resolution_)};
      const double d2 = (p - q).squared_norm();
      if (d2 < best || (!found && d2 <= best)) {
        best = d2;
        out = q;
        found = true;
      }
    }
  }
  return found;
}

double OccupancyGrid::raycast(Vec2 origin, Vec2 dir, double max_range) const {
  CellIndex cell = cell_of(origin);
  if (occupied(cell)) return 0.0;

  // Amanatides-Woo traversal: step to whichever cell boundary comes first.
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_c = dir.x > 0 ? 1 : -1;
  const int step_r = dir.y > 0 ? 1 : -1;
  const double next_x = origin_.x + (cell.col + (step_c > 0 ? 1 : 0)) * resolution_;
  const double next_y = origin_.y + (cell.row + (step_r > 0 ? 1 : 0)) * resolution_;
  double t_max_x = dir.x != 0.0 ? (next_x - origin.x) / dir.x : inf;
  double t_max_y = dir.y != 0.0 ? (next_y - origin.y) / dir.y : inf;
  const double t_dx = dir.x != 0.0 ? resolution_ / std::abs(dir.x) : inf;
  const double t_dy = dir.y != 0.0 ? resolution_ / std::abs(dir.y) : inf;
  while (true) {
    double t = 0.0;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_dx;
      cell.col += step_c;
    } else {
      t = t_max_y;
      t_max_y += t_dy;
      cell.row += step_r;
    }
    if (t >= max_range) return max_range;
    if (occupied(cell)) return std::max(t, 0.0);
  }
}

std::vector<CellIndex> OccupancyGrid::segment_cells(Vec2 a, Vec2 b) const {
  CellIndex cell = cell_of(a);
  const CellIndex last = cell_of(b);
  std::vector<CellIndex> out{cell};
  const Vec2 d = b - a;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int step_c = d.x > 0 ? 1 : -1;
  const int step_r = d.y > 0 ? 1 : -1;
  const double next_x = origin_.x + (cell.col + (step_c > 0 ? 1 : 0)) * resolution_;
  const double next_y = origin_.y + (cell.row + (step_r > 0 ? 1 : 0)) * resolution_;
  double t_max_x = d.x != 0.0 ? (next_x - a.x) / d.x : inf;
  double t_max_y = d.y != 0.0 ? (next_y - a.y) / d.y : inf;
  const double t_dx = d.x != 0.0 ? resolution_ / std::abs(d.x) : inf;
  const double t_dy = d.y != 0.0 ? resolution_ / std::abs(d.y) : inf;
  const int max_steps = std::abs(last.col - cell.col) + std::abs(last.row - cell.row);
  for (int i = 0; i < max_steps && cell != last; ++i) {
    if (t_max_x < t_max_y) {
      if (t_max_x > 1.0) break;
      t_max_x += t_dx;
      cell.col += step_c;
    } else {
      if (t_max_y > 1.0) break;
      t_max_y += t_dy;
      cell.row += step_r;
    }
    out.push_back(cell);
  }
  if (out.back() != last) out.push_back(last);  // rounding at a boundary
  return out;
}

bool OccupancyGrid::line_of_sight(Vec2 a, Vec2 b) const {
  const Vec2 d = b - a;
  const double len = d.norm();
  if (occupied(cell_of(a)) || occupied(cell_of(b))) return false;
  if (len == 0.0) return true;
  return raycast(a, d / len, len) >= len;
}

}  // namespace crowdnav
