#include "mbsfn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "mbsfn/errors.hpp"
#include "mbsfn/format.hpp"
#include "mbsfn/rng.hpp"

namespace mbsfn {

namespace {

// Uniform bucket grid for neighbor lookups during placement. Cell side is at
// least r_bs, so any conflicting station lives in the 3x3 ring around a cell.
class ExclusionIndex {
 public:
  ExclusionIndex(double d_net, double r_bs) : d_net_(d_net), r_bs2_(r_bs * r_bs) {
    const int wanted = r_bs > 0.0 ? static_cast<int>(d_net / r_bs) : 1;
    cells_per_axis_ = std::clamp(wanted, 1, 1024);
    cell_ = d_net / cells_per_axis_;
    buckets_.resize(static_cast<std::size_t>(cells_per_axis_) * cells_per_axis_);
  }

  bool admissible(Point p, const std::vector<Point>& stations) const {
    const int cx = cell_of(p.x);
    const int cy = cell_of(p.y);
    for (int gy = std::max(0, cy - 1); gy <= std::min(cells_per_axis_ - 1, cy + 1); ++gy) {
      for (int gx = std::max(0, cx - 1); gx <= std::min(cells_per_axis_ - 1, cx + 1); ++gx) {
        for (int idx : buckets_[static_cast<std::size_t>(gy) * cells_per_axis_ + gx]) {
          if (squared_distance(p, stations[idx]) < r_bs2_) return false;
        }
      }
    }
    return true;
  }

  void insert(Point p, int idx) {
    buckets_[static_cast<std::size_t>(cell_of(p.y)) * cells_per_axis_ + cell_of(p.x)]
        .push_back(idx);
  }

 private:
  int cell_of(double v) const {
    return std::clamp(static_cast<int>(v / cell_), 0, cells_per_axis_ - 1);
  }

  double d_net_;
  double r_bs2_;
  int cells_per_axis_ = 1;
  double cell_ = 0.0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace

NetworkTopology place_base_stations(int n_stations, double d_net, double r_bs,
                                    std::uint64_t seed, int max_attempts_per_station) {
  if (n_stations < 1) throw std::invalid_argument("place_base_stations: M must be >= 1");
  if (d_net <= 0.0) throw std::invalid_argument("place_base_stations: d_net must be > 0");
  if (r_bs < 0.0) throw std::invalid_argument("place_base_stations: r_bs must be >= 0");

  NetworkTopology topo;
  topo.d_net = d_net;
  topo.r_bs = r_bs;
  topo.seed = seed;
  topo.stations.reserve(static_cast<std::size_t>(n_stations));

  Rng rng(seed);
  ExclusionIndex index(d_net, r_bs);
  for (int i = 0; i < n_stations; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts_per_station; ++attempt) {
      ++topo.placement_attempts;
      const Point p{rng.uniform() * d_net, rng.uniform() * d_net};
      if (r_bs == 0.0 || index.admissible(p, topo.stations)) {
        index.insert(p, i);
        topo.stations.push_back(p);
        placed = true;
        break;
      }
    }
    if (!placed) {
      std::ostringstream msg;
      msg << "station " << i << " of " << n_stations << " could not be placed after "
          << max_attempts_per_station << " attempts (d_net=" << format_double(d_net)
          << ", r_bs=" << format_double(r_bs) << ")";
      throw PackingInfeasible(msg.str(), i, max_attempts_per_station);
    }
  }
  return topo;
}

double min_pairwise_distance(const NetworkTopology& topo) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < topo.stations.size(); ++i) {
    for (std::size_t j = i + 1; j < topo.stations.size(); ++j) {
      best = std::min(best, squared_distance(topo.stations[i], topo.stations[j]));
    }
  }
  return std::sqrt(best);
}

std::vector<Point> hex_grid_centers(double d_net, double d_sfn) {
  if (d_sfn <= 0.0) throw std::invalid_argument("hex_grid_centers: d_sfn must be > 0");
  const double center = d_net / 2.0;
  const double row_pitch = d_sfn * std::sqrt(3.0) / 2.0;
  const double margin = d_sfn / 2.0;
  const double lo = -margin - 1e-9 * d_sfn;
  const double hi = d_net + margin + 1e-9 * d_sfn;

  std::vector<Point> anchors;
  const int v_max = static_cast<int>(std::ceil((center + margin) / row_pitch)) + 1;
  for (int v = -v_max; v <= v_max; ++v) {
    const double y = center + v * row_pitch;
    if (y < lo || y > hi) continue;
    const double shift = (v & 1) ? d_sfn / 2.0 : 0.0;
    const int u_max = static_cast<int>(std::ceil((center + margin) / d_sfn)) + 2;
    for (int u = -u_max; u <= u_max; ++u) {
      const double x = center + shift + u * d_sfn;
      if (x < lo || x > hi) continue;
      anchors.push_back({x, y});
    }
  }
  return anchors;
}

MbsfnPartition assign_mbsfn_areas(const NetworkTopology& topo, std::vector<Point> anchors,
                                  double d_sfn, double d_max) {
  if (anchors.empty()) throw std::invalid_argument("assign_mbsfn_areas: need at least one anchor");
  MbsfnPartition part;
  part.anchors = std::move(anchors);
  part.d_sfn = d_sfn;
  part.d_max = d_max;
  part.area_of_station.resize(topo.stations.size());
  for (std::size_t i = 0; i < topo.stations.size(); ++i) {
    int best = 0;
    double best_d2 = squared_distance(topo.stations[i], part.anchors[0]);
    for (std::size_t z = 1; z < part.anchors.size(); ++z) {
      const double d2 = squared_distance(topo.stations[i], part.anchors[z]);
      if (d2 < best_d2) {
        best_d2 = d2;
        best = static_cast<int>(z);
      }
    }
    part.area_of_station[i] = best;
  }
  return part;
}

int nearest_station(Point y, const NetworkTopology& topo) {
  if (topo.stations.empty()) throw std::invalid_argument("nearest_station: empty topology");
  int best = 0;
  double best_d2 = squared_distance(y, topo.stations[0]);
  for (std::size_t i = 1; i < topo.stations.size(); ++i) {
    const double d2 = squared_distance(y, topo.stations[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int serving_area(Point y, const NetworkTopology& topo, const MbsfnPartition& partition) {
  return partition.area_of_station[static_cast<std::size_t>(nearest_station(y, topo))];
}

std::vector<int> combining_set(Point y, const NetworkTopology& topo,
                               const MbsfnPartition& partition) {
  const int area = serving_area(y, topo, partition);
  const double d_max2 = partition.d_max * partition.d_max;
  std::vector<int> members;
  for (std::size_t i = 0; i < topo.stations.size(); ++i) {
    if (partition.area_of_station[i] != area) continue;
    if (squared_distance(y, topo.stations[i]) < d_max2) members.push_back(static_cast<int>(i));
  }
  if (members.empty()) {
    throw EmptyCombiningSet("no station of the serving area lies within d_max");
  }
  return members;
}

EvaluationGrid evaluation_grid(double d_net, double spacing, double eval_side) {
  if (spacing <= 0.0 || spacing > d_net) {
    throw std::invalid_argument("evaluation_grid: need 0 < spacing <= d_net");
  }
  if (eval_side <= 0.0 || eval_side > d_net) {
    throw std::invalid_argument("evaluation_grid: need 0 < eval_side <= d_net");
  }
  EvaluationGrid grid;
  grid.spacing = spacing;
  grid.d_net = d_net;
  grid.eval_side = eval_side;

  const double center = d_net / 2.0;
  const int half_steps = static_cast<int>(std::floor(center / spacing + 1e-9));
  grid.nx = grid.ny = 2 * half_steps + 1;
  grid.points.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  grid.in_eval.reserve(grid.points.capacity());
  const double eval_half = eval_side / 2.0 + 1e-9 * d_net;
  for (int r = -half_steps; r <= half_steps; ++r) {
    const double y = center + r * spacing;
    for (int c = -half_steps; c <= half_steps; ++c) {
      const double x = center + c * spacing;
      const bool eval = std::abs(x - center) <= eval_half && std::abs(y - center) <= eval_half;
      if (eval) grid.eval_indices.push_back(static_cast<std::uint32_t>(grid.points.size()));
      grid.points.push_back({x, y});
      grid.in_eval.push_back(eval ? 1 : 0);
    }
  }
  return grid;
}

EvaluationGrid EvaluationGrid::eval_window() const {
  EvaluationGrid sub;
  sub.spacing = spacing;
  sub.d_net = d_net;
  sub.eval_side = eval_side;
  int min_row = ny, max_row = -1, min_col = nx, max_col = -1;
  for (std::uint32_t idx : eval_indices) {
    min_row = std::min(min_row, row_of(static_cast<int>(idx)));
    max_row = std::max(max_row, row_of(static_cast<int>(idx)));
    min_col = std::min(min_col, col_of(static_cast<int>(idx)));
    max_col = std::max(max_col, col_of(static_cast<int>(idx)));
  }
  sub.nx = max_col - min_col + 1;
  sub.ny = max_row - min_row + 1;
  sub.points.reserve(static_cast<std::size_t>(sub.nx) * sub.ny);
  for (int r = min_row; r <= max_row; ++r) {
    for (int c = min_col; c <= max_col; ++c) {
      sub.points.push_back(points[static_cast<std::size_t>(index(r, c))]);
      sub.eval_indices.push_back(static_cast<std::uint32_t>(sub.points.size() - 1));
      sub.in_eval.push_back(1);
    }
  }
  return sub;
}

void save_topology(const NetworkTopology& topo, std::ostream& out) {
  out << "mbsfn-topology v1 M=" << topo.stations.size()
      << " d_net=" << format_double(topo.d_net) << " r_bs=" << format_double(topo.r_bs)
      << " seed=" << topo.seed << "\n";
  for (const Point& p : topo.stations) {
    out << format_double(p.x) << ' ' << format_double(p.y) << "\n";
  }
}

namespace {

std::string_view expect_field(std::string_view token, std::string_view key) {
  if (token.substr(0, key.size()) != key) {
    throw std::runtime_error("topology file: expected field '" + std::string(key) + "'");
  }
  return token.substr(key.size());
}

}  // namespace

NetworkTopology load_topology(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("topology file: missing header");
  std::istringstream hs(header);
  std::string magic, version, m_tok, dnet_tok, rbs_tok, seed_tok;
  hs >> magic >> version >> m_tok >> dnet_tok >> rbs_tok >> seed_tok;
  if (magic != "mbsfn-topology" || version != "v1") {
    throw std::runtime_error("topology file: unrecognized header '" + header + "'");
  }
  NetworkTopology topo;
  std::uint64_t m = 0;
  if (!parse_u64(expect_field(m_tok, "M="), m) ||
      !parse_double(expect_field(dnet_tok, "d_net="), topo.d_net) ||
      !parse_double(expect_field(rbs_tok, "r_bs="), topo.r_bs) ||
      !parse_u64(expect_field(seed_tok, "seed="), topo.seed)) {
    throw std::runtime_error("topology file: malformed header '" + header + "'");
  }
  topo.stations.reserve(m);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sep = line.find(' ');
    Point p;
    if (sep == std::string::npos || !parse_double(std::string_view(line).substr(0, sep), p.x) ||
        !parse_double(std::string_view(line).substr(sep + 1), p.y)) {
      throw std::runtime_error("topology file: malformed point line '" + line + "'");
    }
    topo.stations.push_back(p);
  }
  if (topo.stations.size() != m) {
    throw std::runtime_error("topology file: header announces " + std::to_string(m) +
                             " stations, found " + std::to_string(topo.stations.size()));
  }
  return topo;
}

}  // namespace mbsfn
