#include "tdqmc/effective_potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "tdqmc/error.hpp"

namespace tdqmc {

namespace {

constexpr double kExponentFloor = -700.0;

void check_snapshot(std::size_t k, std::span<const double> positions, std::span<const double> bandwidths) {
  if (positions.empty()) throw ConfigError("effective potential needs at least one walker");
  if (bandwidths.size() != positions.size()) throw ConfigError("one bandwidth per walker is required");
  if (k >= positions.size()) throw ConfigError("walker index out of range");
}

bool all_equal_to(std::span<const double> v, double value) {
  return std::all_of(v.begin(), v.end(), [&](double s) { return s == value; });
}

}  // namespace

double kernel_weight(double d, double sigma, bool self) {
  if (self) return 1.0;
  if (sigma == kPairwiseBandwidth) return 0.0;
  if (std::isinf(sigma)) return 1.0;
  const double e = -(d * d) / (sigma * sigma);
  return e < kExponentFloor ? 0.0 : std::exp(e);
}

double weight_factor(std::size_t k, std::span<const double> positions, std::span<const double> bandwidths) {
  check_snapshot(k, positions, bandwidths);
  double z = 0.0;
  for (std::size_t l = 0; l < positions.size(); ++l) {
    z += kernel_weight(positions[l] - positions[k], bandwidths[k], l == k);
  }
  return z;
}

double v_eff(double x, std::size_t k, std::span<const double> positions, std::span<const double> bandwidths,
             const SoftCoreParams& params) {
  check_snapshot(k, positions, bandwidths);
  double num = 0.0;
  double z = 0.0;
  for (std::size_t l = 0; l < positions.size(); ++l) {
    const double w = kernel_weight(positions[l] - positions[k], bandwidths[k], l == k);
    num += w * v_ee(x - positions[l], params);
    z += w;
  }
  return num / z;
}

EffectivePotentialTable::EffectivePotentialTable(Grid1D grid, std::size_t walkers, std::vector<double> values,
                                                 std::vector<double> bandwidths, std::uint64_t snapshot_id)
    : grid_(grid),
      walkers_(walkers),
      values_(std::move(values)),
      bandwidths_(std::move(bandwidths)),
      snapshot_id_(snapshot_id) {
  if (values_.size() != walkers_ * grid_.size()) throw ConfigError("effective potential table has wrong size");
}

EffectivePotentialTable v_eff_batch(const Grid1D& grid, std::span<const double> positions,
                                    std::span<const double> bandwidths, const SoftCoreParams& params,
                                    std::uint64_t snapshot_id) {
  check_snapshot(0, positions, bandwidths);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto m = static_cast<Eigen::Index>(positions.size());
  const auto g = static_cast<Eigen::Index>(grid.size());
  std::vector<double> values(positions.size() * grid.size());
  Eigen::Map<RowMatrix> out(values.data(), m, g);

  const Eigen::Map<const Eigen::ArrayXd> xs(positions.data(), m);
  Eigen::ArrayXd gx(g);
  for (Eigen::Index j = 0; j < g; ++j) gx[j] = grid.x(static_cast<std::size_t>(j));

  // pairwise[l, j] = v_ee(x_j - x_l)
  auto pairwise_row = [&](Eigen::Index l) { return (params.b + (gx - xs[l]).abs()).inverse(); };

  if (all_equal_to(bandwidths, kPairwiseBandwidth)) {
    for (Eigen::Index k = 0; k < m; ++k) out.row(k) = pairwise_row(k).matrix().transpose();
  } else if (std::all_of(bandwidths.begin(), bandwidths.end(), [](double s) { return std::isinf(s); })) {
    Eigen::ArrayXd mean = Eigen::ArrayXd::Zero(g);
    for (Eigen::Index l = 0; l < m; ++l) mean += pairwise_row(l);
    mean /= static_cast<double>(m);
    for (Eigen::Index k = 0; k < m; ++k) out.row(k) = mean.matrix().transpose();
  } else {
    RowMatrix pairwise(m, g);
    for (Eigen::Index l = 0; l < m; ++l) pairwise.row(l) = pairwise_row(l).matrix().transpose();
    RowMatrix weights(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double s = bandwidths[static_cast<std::size_t>(k)];
      auto row = weights.row(k).array();
      if (s == kPairwiseBandwidth) {
        row.setZero();
      } else if (std::isinf(s)) {
        row.setOnes();
      } else {
        const Eigen::ArrayXd e = -(xs - xs[k]).square() / (s * s);
        row = (e < kExponentFloor).select(0.0, e.exp()).transpose();
      }
      row(k) = 1.0;
      row /= row.sum();
    }
    out.noalias() = weights * pairwise;
  }
  return EffectivePotentialTable(grid, positions.size(), std::move(values),
                                 std::vector<double>(bandwidths.begin(), bandwidths.end()), snapshot_id);
}

}  // namespace tdqmc
