#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mbsfn/topology.hpp"

namespace mbsfn {

/// Attenuation power law normalized to 1 at the reference distance d_0 and
/// clamped to 1 inside it (near-field guard for receivers adjacent to a
/// station).
double path_loss(double d, double d0, double alpha);

/// Distance-dependent Nakagami shape: 3 inside r_f/2, 2 up to r_f, 1 beyond
/// (boundaries inclusive).
int nakagami_shape(double d, double r_f);

/// Per-station log-normal shadowing factors (dB) over a fixed set of receiver
/// locations. Fields are independent across stations; within a station the
/// spatial autocorrelation decays exponentially with lag, reaching 1/2 at the
/// decorrelation length.
struct ShadowingField {
  int n_stations = 0;
  int n_points = 0;
  double sigma_db = 0.0;
  double d_corr = 0.0;
  std::vector<double> xi;  // station-major: xi[station * n_points + point]

  double at(int station, int point) const {
    return xi[static_cast<std::size_t>(station) * n_points + point];
  }
};

/// Field synthesizer bound to one grid geometry. Factorizations of the spatial
/// correlation matrix are computed once and reused across stations, seeds, and
/// realizations; sigma only scales samples.
///
/// Three synthesis routes, picked by problem size:
///  - exact dense factorization over all grid points (<= dense_cap points);
///  - exact factorization on a coarse lattice of pitch d_corr/2 with bilinear
///    interpolation, variance renormalized per point (when that lattice fits
///    the cap but the grid does not);
///  - exact factorization per spatial tile of the grid, independent across
///    tiles (cross-tile correlations at lags >= grid spacing are dropped).
class ShadowingModel {
 public:
  ShadowingModel(const EvaluationGrid& grid, double d_corr, int dense_cap = 4000);
  ~ShadowingModel();
  ShadowingModel(ShadowingModel&&) noexcept;
  ShadowingModel& operator=(ShadowingModel&&) noexcept;

  /// Draws independent per-station fields. Deterministic in (seed, station
  /// index): station i's field does not depend on n_stations.
  ShadowingField generate(int n_stations, double sigma_db, std::uint64_t seed,
                          int threads = 1) const;

  enum class Route { Dense, CoarseInterp, Tiled };
  Route route() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper building a throwaway ShadowingModel.
ShadowingField generate_shadowing(const EvaluationGrid& grid, const NetworkTopology& topo,
                                  double sigma_db, double d_corr, std::uint64_t seed);

struct ChannelParams {
  double alpha = 3.5;
  double d0 = 0.01;
  double r_f = 0.5;
};

/// Normalized link powers and fading shapes for one receiver location:
/// omega[i] = 10^(xi_i/10) * path_loss(d_i) / N for every station i, where N
/// is the size of the combining set.
struct PointLinks {
  std::vector<double> omega;
  std::vector<int> shape;
  std::vector<int> combining;  // empty means guaranteed outage
  int serving = -1;            // serving area index
};

PointLinks normalized_powers(int point_index, const NetworkTopology& topo,
                             const MbsfnPartition& partition, const EvaluationGrid& grid,
                             const ShadowingField* field, const ChannelParams& params);

/// Batch of normalized_powers over the whole grid, laid out point-major for
/// the outage kernel. Locations without an admissible combining station carry
/// an empty combining list.
struct ChannelProfile {
  int n_stations = 0;
  int n_points = 0;
  ChannelParams params;
  std::vector<double> omega;        // omega[point * n_stations + station]
  std::vector<std::uint8_t> shape;  // same layout
  std::vector<std::vector<int>> combining;
  std::vector<int> serving;

  double omega_at(int point, int station) const {
    return omega[static_cast<std::size_t>(point) * n_stations + station];
  }
  int shape_at(int point, int station) const {
    return shape[static_cast<std::size_t>(point) * n_stations + station];
  }
};

ChannelProfile build_profile(const NetworkTopology& topo, const MbsfnPartition& partition,
                             const EvaluationGrid& grid, const ShadowingField* field,
                             const ChannelParams& params, int threads = 1);

/// CSV export "station,point,xi_db".
void save_shadowing_csv(const ShadowingField& field, std::ostream& out);

}  // namespace mbsfn
