#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tdqmc/effective_potential.hpp"
#include "tdqmc/error.hpp"
#include "tdqmc/kde.hpp"

using namespace tdqmc;

namespace {

std::vector<double> random_positions(std::size_t m, unsigned seed, double spread = 3.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, spread);
  std::vector<double> x(m);
  for (auto& v : x) v = d(gen);
  return x;
}

}  // namespace

TEST_CASE("pilot density") {
  const double s = 0.7;
  CHECK(pilot_density(std::vector<double>{1.3}, s)[0] == doctest::Approx(1 / (s * std::sqrt(std::numbers::pi))));
  for (double r : pilot_density(std::vector<double>(9, -2.0), s))
    CHECK(r == doctest::Approx(1 / (s * std::sqrt(std::numbers::pi))).epsilon(1e-14));
  const auto two = pilot_density(std::vector<double>{-1.0, 1.0}, 1.0);
  CHECK(two[0] == doctest::Approx(0.287262).epsilon(1e-6));
  CHECK(two[0] == doctest::Approx((1 + std::exp(-4.0)) / (2 * std::sqrt(std::numbers::pi))).epsilon(1e-14));
  CHECK(two[1] == two[0]);
  CHECK_THROWS_AS(pilot_density(std::vector<double>{}, 1.0), ConfigError);
  CHECK_THROWS_AS(pilot_density(std::vector<double>{0.0}, 0.0), ConfigError);
}

TEST_CASE("pilot density is permutation invariant and translation equivariant") {
  auto x = random_positions(50, 3);
  const auto r = pilot_density(x, 0.8);
  auto shifted = x;
  for (auto& v : shifted) v += 4.25;
  const auto rs = pilot_density(shifted, 0.8);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(rs[k] == doctest::Approx(r[k]).epsilon(1e-12));
  std::reverse(x.begin(), x.end());
  const auto rr = pilot_density(x, 0.8);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(rr[x.size() - 1 - k] == doctest::Approx(r[k]).epsilon(1e-12));
}

TEST_CASE("adaptive bandwidths") {
  SUBCASE("uniform density keeps the pilot width") {
    for (double s : adaptive_bandwidths(std::vector<double>(5, 1.0), 0.6)) CHECK(s == doctest::Approx(0.6).epsilon(1e-14));
  }
  SUBCASE("geometric mean identity") {
    const auto x = random_positions(400, 7);
    const double s = 0.9;
    const auto b = adaptive_bandwidths(x, s);
    double log_sum = 0.0;
    for (double v : b) {
      CHECK(v > 0.0);
      log_sum += std::log(v * v / (s * s));
    }
    CHECK(std::abs(log_sum / b.size()) < 1e-10);
  }
  SUBCASE("denser walkers get narrower kernels") {
    const std::vector<double> x = {0.0, 0.1, 0.2, 5.0};
    const auto b = adaptive_bandwidths(x, 1.0);
    CHECK(b[1] < b[3]);
    auto moved = x;
    moved[3] = 0.3;  // raises rho at walker 3
    CHECK(adaptive_bandwidths(moved, 1.0)[3] < b[3]);
  }
  SUBCASE("global spec ignores positions") {
    BandwidthSpec spec{BandwidthMode::global, 5.0, 10};
    for (double v : bandwidths_for(spec, random_positions(10, 1))) CHECK(v == 5.0);
    spec.refresh_every = 0;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
  }
}

TEST_CASE("variational sigma selection") {
  SUBCASE("single candidate") {
    const auto scan = variational_sigma([](double) { return -1.0; }, std::vector<double>{2.0});
    CHECK(scan.best_sigma == 2.0);
  }
  SUBCASE("minimum and ties") {
    auto f = [](double s) { return (s - 2.0) * (s - 2.0); };
    auto scan = variational_sigma(f, std::vector<double>{0.1, 0.5, 2.0, 5.0, 20.0});
    CHECK(scan.best_sigma == 2.0);
    for (const auto& c : scan.candidates) CHECK(scan.best_energy <= *c.energy);
    scan = variational_sigma([](double) { return 1.0; }, std::vector<double>{3.0, 1.0, 2.0});
    CHECK(scan.best_sigma == 1.0);
  }
  SUBCASE("failed candidates are skipped") {
    auto f = [](double s) -> double {
      if (s < 1.0) throw ConvergenceError("diverged");
      return s;
    };
    const auto scan = variational_sigma(f, std::vector<double>{0.5, 3.0, 2.0});
    CHECK(scan.best_sigma == 2.0);
    CHECK_FALSE(scan.candidates[0].energy.has_value());
    CHECK_FALSE(scan.candidates[0].error.empty());
    CHECK_THROWS_AS(variational_sigma(f, std::vector<double>{0.1, 0.2}), ConvergenceError);
    CHECK_THROWS_AS(variational_sigma(f, std::vector<double>{}), ConfigError);
  }
}

TEST_CASE("weight factor") {
  const std::vector<double> same(6, 0.4);
  CHECK(weight_factor(2, same, std::vector<double>(6, 1.0)) == doctest::Approx(6.0));
  CHECK(weight_factor(0, std::vector<double>{3.0}, std::vector<double>{0.5}) == 1.0);
  const auto x = random_positions(20, 11);
  CHECK(weight_factor(4, x, std::vector<double>(20, kMeanFieldBandwidth)) == 20.0);
  CHECK(weight_factor(4, x, std::vector<double>(20, kPairwiseBandwidth)) == 1.0);
  CHECK(weight_factor(4, x, std::vector<double>(20, 1e6)) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(weight_factor(4, x, std::vector<double>(20, 2.0)) >= 1.0);
}

TEST_CASE("effective potential limits and bounds") {
  const SoftCoreParams p;
  SUBCASE("single walker is the pairwise potential for any width") {
    for (double s : {0.0, 0.3, 5.0, kMeanFieldBandwidth})
      CHECK(v_eff(1.7, 0, std::vector<double>{-0.4}, std::vector<double>{s}) == doctest::Approx(v_ee(2.1)).epsilon(1e-15));
  }
  SUBCASE("two walkers at +-d in the mean-field limit") {
    const double d = 1.5, x = 0.3;
    const std::vector<double> pos = {-d, d};
    const double expect = 0.5 * (v_ee(x - d) + v_ee(x + d));
    CHECK(v_eff(x, 0, pos, std::vector<double>(2, kMeanFieldBandwidth)) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(v_eff(x, 0, pos, std::vector<double>(2, 1e8)) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(v_eff(x, 1, pos, std::vector<double>(2, 1e-8)) == doctest::Approx(v_ee(x - d)).epsilon(1e-12));
  }
  SUBCASE("convex combination bound and permutation invariance") {
    auto pos = random_positions(30, 5);
    const auto bw = adaptive_bandwidths(pos, 1.0);
    for (double x = -8.0; x <= 8.0; x += 0.7) {
      double lo = 1e9, hi = -1e9;
      for (double y : pos) {
        lo = std::min(lo, v_ee(x - y));
        hi = std::max(hi, v_ee(x - y));
      }
      const double v = v_eff(x, 3, pos, bw);
      CHECK(v >= lo - 1e-15);
      CHECK(v <= hi + 1e-15);
      CHECK(v > 0.0);
      CHECK(v <= 1 / p.b);
    }
    // swap two walkers other than k = 3; the width of walker 3 is what matters
    auto pos2 = pos;
    auto bw2 = bw;
    std::swap(pos2[10], pos2[20]);
    std::swap(bw2[10], bw2[20]);
    CHECK(v_eff(0.9, 3, pos2, bw2) == doctest::Approx(v_eff(0.9, 3, pos, bw)).epsilon(1e-14));
  }
  CHECK(kernel_weight(100.0, 1.0, false) == 0.0);
  CHECK(kernel_weight(3.0, 0.0, true) == 1.0);
  CHECK(kernel_weight(0.0, 0.0, false) == 0.0);
  CHECK_THROWS_AS(v_eff(0.0, 2, std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0}), ConfigError);
}

TEST_CASE("batched tables match the direct sum") {
  const Grid1D g(-25.0, 25.0, 512);
  for (std::size_t m = 1; m <= 64; m += (m < 8 ? 1 : 9)) {
    CAPTURE(m);
    const auto pos = random_positions(m, static_cast<unsigned>(100 + m));
    const std::vector<std::vector<double>> specs = {std::vector<double>(m, 5.0), adaptive_bandwidths(pos, 0.5),
                                                    std::vector<double>(m, kPairwiseBandwidth),
                                                    std::vector<double>(m, kMeanFieldBandwidth)};
    for (std::size_t s = 0; s < specs.size(); ++s) {
      const auto table = v_eff_batch(g, pos, specs[s]);
      REQUIRE(table.walkers() == m);
      double err = 0.0;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < g.size(); ++j) {
          double direct;
          if (s == 2) {
            direct = v_ee(g.x(j) - pos[k]);
          } else if (s == 3) {
            direct = 0.0;
            for (double y : pos) direct += v_ee(g.x(j) - y);
            direct /= static_cast<double>(m);
          } else {
            direct = v_eff(g.x(j), k, pos, specs[s]);
          }
          err = std::max(err, std::abs(table(k, j) - direct));
        }
      CAPTURE(s);
      CHECK(err < (s >= 2 ? 1e-10 : 1e-8));
    }
  }
}

TEST_CASE("mean-field table curves are identical") {
  const Grid1D g(-10.0, 10.0, 64);
  const auto pos = random_positions(7, 9);
  const auto t = v_eff_batch(g, pos, std::vector<double>(7, kMeanFieldBandwidth), {}, 42);
  CHECK(t.snapshot_id() == 42);
  for (std::size_t k = 1; k < 7; ++k)
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(t(k, j) == t(0, j));
}
