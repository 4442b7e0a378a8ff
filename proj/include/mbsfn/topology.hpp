#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mbsfn/geometry.hpp"

namespace mbsfn {

/// One realization of the constrained-random spatial model: stations placed
/// uniformly one at a time, each keeping an exclusion disk of radius r_bs free.
struct NetworkTopology {
  std::vector<Point> stations;
  double d_net = 0.0;
  double r_bs = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t placement_attempts = 0;  // total uniform draws used
};

/// Hexagonal anchor layout and the station -> area assignment derived from it.
struct MbsfnPartition {
  std::vector<Point> anchors;
  double d_sfn = 0.0;
  std::vector<int> area_of_station;
  double d_max = 0.0;  // combining distance limit
};

/// Regular square lattice of receiver locations, centered on the arena center,
/// with a centered square evaluation window used for metric aggregation.
struct EvaluationGrid {
  std::vector<Point> points;  // row-major: index = row * nx + col
  int nx = 0;
  int ny = 0;
  double spacing = 0.0;
  double d_net = 0.0;
  double eval_side = 0.0;
  std::vector<std::uint8_t> in_eval;           // per point
  std::vector<std::uint32_t> eval_indices;     // indices of eval-window points

  int index(int row, int col) const { return row * nx + col; }
  int row_of(int idx) const { return idx / nx; }
  int col_of(int idx) const { return idx % nx; }

  /// Grid containing only the evaluation-window points (same spacing, same
  /// arena coordinates, eval window spanning all of it). Sweeps run on this.
  EvaluationGrid eval_window() const;
};

/// Sequential rejection sampling of M stations over [0, d_net]^2 with pairwise
/// separation >= r_bs. Throws PackingInfeasible once a station exhausts
/// max_attempts_per_station draws.
NetworkTopology place_base_stations(int n_stations, double d_net, double r_bs,
                                    std::uint64_t seed, int max_attempts_per_station = 10000);

/// Minimum pairwise station distance; +inf for fewer than two stations.
double min_pairwise_distance(const NetworkTopology& topo);

/// Hexagonal lattice with nearest-neighbor spacing d_sfn, one anchor pinned to
/// the arena center, covering the arena plus a half-spacing margin. Row pitch
/// is d_sfn*sqrt(3)/2 and alternate rows are offset by d_sfn/2.
std::vector<Point> hex_grid_centers(double d_net, double d_sfn);

/// Assigns every station to its nearest anchor (lowest anchor index on exact
/// ties).
MbsfnPartition assign_mbsfn_areas(const NetworkTopology& topo, std::vector<Point> anchors,
                                  double d_sfn, double d_max);

/// Index of the station nearest to y (lowest index on ties).
int nearest_station(Point y, const NetworkTopology& topo);

/// Area serving location y: the area of the nearest station.
int serving_area(Point y, const NetworkTopology& topo, const MbsfnPartition& partition);

/// Stations of the serving area whose distance to y is strictly below d_max.
/// Throws EmptyCombiningSet when no admissible station remains; callers treat
/// such locations as in outage.
std::vector<int> combining_set(Point y, const NetworkTopology& topo,
                               const MbsfnPartition& partition);

EvaluationGrid evaluation_grid(double d_net, double spacing, double eval_side);

/// Versioned plain-text persistence:
///   mbsfn-topology v1 M=<int> d_net=<float> r_bs=<float> seed=<u64>
/// followed by one "x y" pair per line.
void save_topology(const NetworkTopology& topo, std::ostream& out);
NetworkTopology load_topology(std::istream& in);

}  // namespace mbsfn
