#include "mbsfn/channel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "mbsfn/errors.hpp"
#include "mbsfn/format.hpp"
#include "mbsfn/parallel.hpp"
#include "mbsfn/rng.hpp"

namespace mbsfn {

double path_loss(double d, double d0, double alpha) {
  if (d0 <= 0.0) throw std::invalid_argument("path_loss: d0 must be > 0");
  if (d < 0.0) throw std::invalid_argument("path_loss: d must be >= 0");
  if (d < d0) return 1.0;
  return std::pow(d / d0, -alpha);
}

int nakagami_shape(double d, double r_f) {
  if (d <= r_f / 2.0) return 3;
  if (d <= r_f) return 2;
  return 1;
}

namespace {

constexpr double kLn2 = 0.6931471805599453;

double lag_correlation(double dist, double d_corr) { return std::exp(-dist * kLn2 / d_corr); }

Eigen::LLT<Eigen::MatrixXd> factor_with_jitter(Eigen::MatrixXd& corr) {
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() == Eigen::Success) return llt;
  for (double jitter : {1e-12, 1e-10, 1e-8}) {
    Eigen::MatrixXd jittered = corr;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt;
  }
  throw CovarianceFactorizationFailure(
      "shadowing correlation matrix lost positive-definiteness");
}

}  // namespace

struct ShadowingModel::Impl {
  Route route = Route::Dense;
  double d_corr = 0.0;
  int n_points = 0;

  // Dense / tiled: disjoint point groups, each with a lower-triangular factor.
  struct Tile {
    std::vector<int> point_indices;
    int factor_id = 0;
  };
  std::vector<Tile> tiles;
  std::vector<Eigen::MatrixXd> factors;

  // Coarse-interpolation route.
  int n_nodes = 0;
  Eigen::MatrixXd node_factor;
  struct InterpStencil {
    int node[4];
    double weight[4];
    double renorm;  // restores unit marginal variance after interpolation
  };
  std::vector<InterpStencil> stencils;
};

namespace {

Eigen::MatrixXd correlation_from_points(const std::vector<Point>& pts,
                                        const std::vector<int>& idx, double d_corr) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd corr(n, n);
  for (int i = 0; i < n; ++i) {
    corr(i, i) = 1.0;
    for (int j = 0; j < i; ++j) {
      const double c = lag_correlation(distance(pts[idx[i]], pts[idx[j]]), d_corr);
      corr(i, j) = c;
      corr(j, i) = c;
    }
  }
  return corr;
}

std::vector<int> axis_segments(int n, int max_len) {
  const int nseg = (n + max_len - 1) / max_len;
  std::vector<int> sizes(nseg, n / nseg);
  for (int i = 0; i < n % nseg; ++i) ++sizes[i];
  return sizes;
}

}  // namespace

ShadowingModel::ShadowingModel(const EvaluationGrid& grid, double d_corr, int dense_cap) {
  if (d_corr <= 0.0) throw std::invalid_argument("ShadowingModel: d_corr must be > 0");
  if (dense_cap < 4) throw std::invalid_argument("ShadowingModel: dense_cap too small");
  impl_ = std::make_unique<Impl>();
  impl_->d_corr = d_corr;
  impl_->n_points = static_cast<int>(grid.points.size());

  const int n = impl_->n_points;
  if (n <= dense_cap) {
    impl_->route = Route::Dense;
    Impl::Tile tile;
    tile.point_indices.resize(n);
    for (int i = 0; i < n; ++i) tile.point_indices[i] = i;
    auto corr = correlation_from_points(grid.points, tile.point_indices, d_corr);
    impl_->factors.push_back(factor_with_jitter(corr).matrixL());
    tile.factor_id = 0;
    impl_->tiles.push_back(std::move(tile));
    return;
  }

  double min_x = grid.points[0].x, max_x = grid.points[0].x;
  double min_y = grid.points[0].y, max_y = grid.points[0].y;
  for (const Point& p : grid.points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }

  const double pitch = d_corr / 2.0;
  const std::int64_t cols = static_cast<std::int64_t>(std::ceil((max_x - min_x) / pitch)) + 2;
  const std::int64_t rows = static_cast<std::int64_t>(std::ceil((max_y - min_y) / pitch)) + 2;
  if (rows * cols <= dense_cap) {
    impl_->route = Route::CoarseInterp;
    impl_->n_nodes = static_cast<int>(rows * cols);
    const double ox = min_x - pitch / 2.0;
    const double oy = min_y - pitch / 2.0;
    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>(impl_->n_nodes));
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < cols; ++c) {
        nodes.push_back({ox + c * pitch, oy + r * pitch});
      }
    }
    std::vector<int> all(nodes.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    auto corr = correlation_from_points(nodes, all, d_corr);
    impl_->node_factor = factor_with_jitter(corr).matrixL();

    // Cell-corner correlations are the same for every cell.
    const double c10 = lag_correlation(pitch, d_corr);
    const double c11 = lag_correlation(pitch * std::sqrt(2.0), d_corr);
    impl_->stencils.resize(grid.points.size());
    for (std::size_t p = 0; p < grid.points.size(); ++p) {
      const double fx = (grid.points[p].x - ox) / pitch;
      const double fy = (grid.points[p].y - oy) / pitch;
      const std::int64_t cc = std::clamp<std::int64_t>(static_cast<std::int64_t>(fx), 0, cols - 2);
      const std::int64_t cr = std::clamp<std::int64_t>(static_cast<std::int64_t>(fy), 0, rows - 2);
      const double wx = fx - static_cast<double>(cc);
      const double wy = fy - static_cast<double>(cr);
      auto& st = impl_->stencils[p];
      st.node[0] = static_cast<int>(cr * cols + cc);
      st.node[1] = static_cast<int>(cr * cols + cc + 1);
      st.node[2] = static_cast<int>((cr + 1) * cols + cc);
      st.node[3] = static_cast<int>((cr + 1) * cols + cc + 1);
      st.weight[0] = (1.0 - wx) * (1.0 - wy);
      st.weight[1] = wx * (1.0 - wy);
      st.weight[2] = (1.0 - wx) * wy;
      st.weight[3] = wx * wy;
      // corner correlation matrix in the node order above
      const double r01 = c10, r02 = c10, r03 = c11, r12 = c11, r13 = c10, r23 = c10;
      double quad = 0.0;
      const double* w = st.weight;
      quad += w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3];
      quad += 2.0 * (w[0] * w[1] * r01 + w[0] * w[2] * r02 + w[0] * w[3] * r03 +
                     w[1] * w[2] * r12 + w[1] * w[3] * r13 + w[2] * w[3] * r23);
      st.renorm = quad > 0.0 ? 1.0 / std::sqrt(quad) : 1.0;
    }
    return;
  }

  // Tile the lattice. Tiles are far wider than d_corr whenever this route is
  // reached, so the dropped cross-tile correlation is at most the (already
  // small) lag-one-spacing value.
  impl_->route = Route::Tiled;
  const int axis_max = std::max(2, static_cast<int>(std::floor(std::sqrt(double(dense_cap)))));
  const auto row_sizes = axis_segments(grid.ny, axis_max);
  const auto col_sizes = axis_segments(grid.nx, axis_max);
  std::vector<std::pair<int, int>> shapes;
  int row0 = 0;
  for (int rs : row_sizes) {
    int col0 = 0;
    for (int cs : col_sizes) {
      Impl::Tile tile;
      tile.point_indices.reserve(static_cast<std::size_t>(rs) * cs);
      for (int r = row0; r < row0 + rs; ++r) {
        for (int c = col0; c < col0 + cs; ++c) tile.point_indices.push_back(grid.index(r, c));
      }
      const auto shape = std::make_pair(rs, cs);
      auto it = std::find(shapes.begin(), shapes.end(), shape);
      if (it == shapes.end()) {
        shapes.push_back(shape);
        tile.factor_id = static_cast<int>(shapes.size()) - 1;
      } else {
        tile.factor_id = static_cast<int>(it - shapes.begin());
      }
      impl_->tiles.push_back(std::move(tile));
      col0 += cs;
    }
    row0 += rs;
  }
  impl_->factors.resize(shapes.size());
  for (std::size_t s = 0; s < shapes.size(); ++s) {
    const auto [rs, cs] = shapes[s];
    std::vector<Point> rel;
    rel.reserve(static_cast<std::size_t>(rs) * cs);
    for (int r = 0; r < rs; ++r) {
      for (int c = 0; c < cs; ++c) rel.push_back({c * grid.spacing, r * grid.spacing});
    }
    std::vector<int> all(rel.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    auto corr = correlation_from_points(rel, all, d_corr);
    impl_->factors[s] = factor_with_jitter(corr).matrixL();
  }
}

ShadowingModel::~ShadowingModel() = default;
ShadowingModel::ShadowingModel(ShadowingModel&&) noexcept = default;
ShadowingModel& ShadowingModel::operator=(ShadowingModel&&) noexcept = default;

ShadowingModel::Route ShadowingModel::route() const { return impl_->route; }

ShadowingField ShadowingModel::generate(int n_stations, double sigma_db, std::uint64_t seed,
                                        int threads) const {
  if (n_stations < 0) throw std::invalid_argument("generate: n_stations must be >= 0");
  if (sigma_db < 0.0) throw std::invalid_argument("generate: sigma_db must be >= 0");
  ShadowingField field;
  field.n_stations = n_stations;
  field.n_points = impl_->n_points;
  field.sigma_db = sigma_db;
  field.d_corr = impl_->d_corr;
  field.xi.assign(static_cast<std::size_t>(n_stations) * impl_->n_points, 0.0);
  if (sigma_db == 0.0 || n_stations == 0) return field;

  if (impl_->route == Route::CoarseInterp) {
    parallel_for(static_cast<std::size_t>(n_stations), threads, [&](std::size_t b, std::size_t e) {
      Eigen::VectorXd z(impl_->n_nodes);
      for (std::size_t s = b; s < e; ++s) {
        Rng rng(derive_seed(seed, s, 0));
        for (int i = 0; i < impl_->n_nodes; ++i) z[i] = rng.normal();
        const Eigen::VectorXd nodes =
            impl_->node_factor.triangularView<Eigen::Lower>() * z;
        double* out = field.xi.data() + s * static_cast<std::size_t>(impl_->n_points);
        for (int p = 0; p < impl_->n_points; ++p) {
          const auto& st = impl_->stencils[p];
          double v = 0.0;
          for (int c = 0; c < 4; ++c) v += st.weight[c] * nodes[st.node[c]];
          out[p] = sigma_db * st.renorm * v;
        }
      }
    });
    return field;
  }

  // Dense and tiled routes share the per-tile machinery; a station's stream is
  // sub-seeded per tile so values do not depend on how many stations exist.
  for (std::size_t t = 0; t < impl_->tiles.size(); ++t) {
    const auto& tile = impl_->tiles[t];
    const auto& L = impl_->factors[tile.factor_id];
    const int m = static_cast<int>(tile.point_indices.size());
    parallel_for(static_cast<std::size_t>(n_stations), threads, [&](std::size_t b, std::size_t e) {
      const int cols = static_cast<int>(e - b);
      Eigen::MatrixXd z(m, cols);
      for (int c = 0; c < cols; ++c) {
        Rng rng(derive_seed(seed, b + static_cast<std::size_t>(c), t));
        for (int i = 0; i < m; ++i) z(i, c) = rng.normal();
      }
      const Eigen::MatrixXd values = L.triangularView<Eigen::Lower>() * z;
      for (int c = 0; c < cols; ++c) {
        double* out =
            field.xi.data() + (b + static_cast<std::size_t>(c)) * impl_->n_points;
        for (int i = 0; i < m; ++i) out[tile.point_indices[i]] = sigma_db * values(i, c);
      }
    });
  }
  return field;
}

ShadowingField generate_shadowing(const EvaluationGrid& grid, const NetworkTopology& topo,
                                  double sigma_db, double d_corr, std::uint64_t seed) {
  ShadowingModel model(grid, d_corr);
  return model.generate(static_cast<int>(topo.stations.size()), sigma_db, seed);
}

namespace {

void point_links_into(int point_index, const NetworkTopology& topo,
                      const MbsfnPartition& partition, const EvaluationGrid& grid,
                      const ShadowingField* field, const ChannelParams& params,
                      PointLinks& out) {
  const Point y = grid.points[static_cast<std::size_t>(point_index)];
  const int n = static_cast<int>(topo.stations.size());
  out.omega.resize(n);
  out.shape.resize(n);
  out.combining.clear();

  int nearest = 0;
  double nearest_d2 = squared_distance(y, topo.stations[0]);
  for (int i = 1; i < n; ++i) {
    const double d2 = squared_distance(y, topo.stations[i]);
    if (d2 < nearest_d2) {
      nearest_d2 = d2;
      nearest = i;
    }
  }
  out.serving = partition.area_of_station[static_cast<std::size_t>(nearest)];

  const double d_max2 = partition.d_max * partition.d_max;
  for (int i = 0; i < n; ++i) {
    const double d2 = squared_distance(y, topo.stations[i]);
    if (partition.area_of_station[static_cast<std::size_t>(i)] == out.serving && d2 < d_max2) {
      out.combining.push_back(i);
    }
  }
  const double n_combining = out.combining.empty() ? 1.0 : double(out.combining.size());

  for (int i = 0; i < n; ++i) {
    const double d = distance(y, topo.stations[i]);
    const double shadow = field != nullptr ? std::pow(10.0, field->at(i, point_index) / 10.0) : 1.0;
    out.omega[static_cast<std::size_t>(i)] =
        shadow * path_loss(d, params.d0, params.alpha) / n_combining;
    out.shape[static_cast<std::size_t>(i)] = nakagami_shape(d, params.r_f);
  }
}

}  // namespace

PointLinks normalized_powers(int point_index, const NetworkTopology& topo,
                             const MbsfnPartition& partition, const EvaluationGrid& grid,
                             const ShadowingField* field, const ChannelParams& params) {
  PointLinks links;
  point_links_into(point_index, topo, partition, grid, field, params, links);
  if (links.combining.empty()) {
    throw EmptyCombiningSet("no station of the serving area lies within d_max");
  }
  return links;
}

ChannelProfile build_profile(const NetworkTopology& topo, const MbsfnPartition& partition,
                             const EvaluationGrid& grid, const ShadowingField* field,
                             const ChannelParams& params, int threads) {
  ChannelProfile profile;
  profile.n_stations = static_cast<int>(topo.stations.size());
  profile.n_points = static_cast<int>(grid.points.size());
  profile.params = params;
  const std::size_t total =
      static_cast<std::size_t>(profile.n_stations) * static_cast<std::size_t>(profile.n_points);
  profile.omega.resize(total);
  profile.shape.resize(total);
  profile.combining.resize(static_cast<std::size_t>(profile.n_points));
  profile.serving.resize(static_cast<std::size_t>(profile.n_points));

  parallel_for(static_cast<std::size_t>(profile.n_points), threads,
               [&](std::size_t begin, std::size_t end) {
                 PointLinks links;
                 for (std::size_t j = begin; j < end; ++j) {
                   point_links_into(static_cast<int>(j), topo, partition, grid, field, params,
                                    links);
                   profile.serving[j] = links.serving;
                   profile.combining[j] = links.combining;
                   double* omega_row = profile.omega.data() + j * profile.n_stations;
                   std::uint8_t* shape_row = profile.shape.data() + j * profile.n_stations;
                   for (int i = 0; i < profile.n_stations; ++i) {
                     omega_row[i] = links.omega[static_cast<std::size_t>(i)];
                     shape_row[i] =
                         static_cast<std::uint8_t>(links.shape[static_cast<std::size_t>(i)]);
                   }
                 }
               });
  return profile;
}

void save_shadowing_csv(const ShadowingField& field, std::ostream& out) {
  out << "station,point,xi_db\n";
  for (int s = 0; s < field.n_stations; ++s) {
    for (int p = 0; p < field.n_points; ++p) {
      out << s << ',' << p << ',' << format_double(field.at(s, p)) << "\n";
    }
  }
}

}  // namespace mbsfn
