#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "tdqmc/error.hpp"
#include "tdqmc/field2d.hpp"
#include "tdqmc/propagator.hpp"

using namespace tdqmc;

namespace {

double energy(const WaveField& w, const std::vector<double>& v) {
  return (kinetic_expectation(w) + expectation(w, v)) / norm_squared(w);
}

double max_diff(std::span<const complex> a, std::span<const complex> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

WaveField wavepacket(const Grid1D& g, double c, double q, double w) {
  return normalize(WaveField::from_function(g, [&](double x) {
    return std::exp(-(x - c) * (x - c) / (w * w)) * std::exp(complex(0, q * x));
  }));
}

}  // namespace

TEST_CASE("step spec") {
  StepSpec s{0.1, std::numbers::pi / 2};
  CHECK(std::abs(s.delta() - complex(0, -0.1)) < 1e-16);
  CHECK_FALSE(s.real_time());
  CHECK_THROWS_AS((StepSpec{0.0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((StepSpec{0.1, 2.0}.validate()), ConfigError);
}

TEST_CASE("real-time Crank-Nicolson is unitary") {
  const auto g = Grid1D::production();
  const auto v = g.sample([](double x) { return -2.0 / std::sqrt(1 + x * x) + 0.05 * x; });
  const std::vector<double> zero(g.size(), 0.0);
  auto w = wavepacket(g, -3.0, 1.5, 1.0);
  for (int s = 0; s < 200; ++s) {
    const double before = norm_squared(w);
    w = cn_step(w, s % 2 ? v : zero, {0.1, 0.0});
    CHECK(std::abs(norm_squared(w) - before) / before < 1e-10);
  }
}

TEST_CASE("Crank-Nicolson is time reversible") {
  const auto g = Grid1D::production();
  const auto v = g.sample([](double x) { return -2.0 / std::sqrt(1 + x * x); });
  const auto w0 = wavepacket(g, 2.0, -1.0, 1.3);
  CrankNicolsonOperator fwd(v, g.dx(), complex(0.1, 0.0));
  CrankNicolsonOperator bwd(v, g.dx(), complex(-0.1, 0.0));
  auto w = w0;
  std::vector<complex> scratch(g.size());
  for (int s = 0; s < 50; ++s) fwd.apply(w.amplitudes(), scratch);
  for (int s = 0; s < 50; ++s) bwd.apply(w.amplitudes(), scratch);
  CHECK(max_diff(w.amplitudes(), w0.amplitudes()) < 1e-9);
}

TEST_CASE("oscillator eigenstate is stationary in real time") {
  const Grid1D g(-10.0, 10.0, 501);
  const auto v = g.sample([](double x) { return 0.5 * x * x; });
  // discrete ground state from a long imaginary-time relaxation
  const auto psi0 = relax(WaveField::from_function(g, [](double x) { return std::exp(-x * x / 2); }), v, 2000,
                          {0.05, std::numbers::pi / 2});
  auto w = psi0;
  for (int s = 0; s < 100; ++s) w = cn_step(w, v, {0.1, 0.0});
  CHECK(std::abs(inner_product(psi0, w)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("imaginary-time relaxation finds the oscillator ground energy") {
  // CN barely damps the stiffest modes in imaginary time; dx = 0.04 keeps
  // them decaying faster than the ground state over thousands of steps.
  const Grid1D g(-10.0, 10.0, 501);
  const auto v = g.sample([](double x) { return 0.5 * x * x; });
  SUBCASE("pure imaginary time from an asymmetric start") {
    auto w = WaveField::from_function(g, [](double x) { return std::exp(-(x - 1.3) * (x - 1.3) / 5.0) * (1 + 0.3 * x); });
    w = relax(w, v, 3000, {0.05, std::numbers::pi / 2});
    CHECK(energy(w, v) == doctest::Approx(0.5).epsilon(1e-4));
  }
  SUBCASE("400 rotated steps at pi/4 from a Gaussian") {
    auto w = WaveField::from_function(g, [](double x) { return std::exp(-x * x / 0.25); });
    w = relax(w, v, 400, {0.1, std::numbers::pi / 4});
    CHECK(energy(w, v) == doctest::Approx(0.5).epsilon(1e-3));
    CHECK(norm_squared(w) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("eigenstate is a fixed point") {
    const auto psi0 =
        relax(WaveField::from_function(g, [](double x) { return std::exp(-x * x / 2); }), v, 4000, {0.05, std::numbers::pi / 2});
    const auto w = relax(psi0, v, 400, {0.1, std::numbers::pi / 4});
    CHECK(std::abs(inner_product(psi0, w)) == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("zero steps return the input") {
    const auto w0 = WaveField::from_function(g, [](double x) { return std::exp(-x * x); });
    const auto w = relax(w0, v, 0, {0.1, std::numbers::pi / 4});
    CHECK(max_diff(w.amplitudes(), w0.amplitudes()) == 0.0);
  }
  SUBCASE("real time is rejected") {
    CHECK_THROWS_AS(relax(WaveField(g), v, 1, {0.1, 0.0}), ConfigError);
  }
}

TEST_CASE("batched steps agree with the single-wave operator") {
  const auto g = Grid1D::production();
  const complex delta = 0.1 * std::exp(complex(0, -std::numbers::pi / 4));
  const std::size_t m = 11;  // one full block and a padded one
  std::vector<WaveField> waves, expected;
  std::vector<std::vector<double>> pots;
  for (std::size_t b = 0; b < m; ++b) {
    waves.push_back(wavepacket(g, -2.0 + 0.4 * b, 0.3 * b, 0.5 + 0.1 * b));
    pots.push_back(g.sample([&](double x) { return -2.0 / std::sqrt(1 + x * x) + 1.0 / (1.2 + std::abs(x - 0.2 * b)); }));
    auto w = waves.back();
    std::vector<complex> scratch(g.size());
    CrankNicolsonOperator(pots.back(), g.dx(), delta).apply(w.amplitudes(), scratch);
    expected.push_back(w);
  }
  std::vector<std::span<complex>> wv;
  std::vector<std::span<const double>> pv;
  for (std::size_t b = 0; b < m; ++b) {
    wv.push_back(waves[b].amplitudes());
    pv.push_back(pots[b]);
  }
  cn_step_batch(wv, pv, g.dx(), delta);
  for (std::size_t b = 0; b < m; ++b) CHECK(max_diff(waves[b].amplitudes(), expected[b].amplitudes()) < 1e-13);

  std::vector<double> bad(g.size(), 0.0);
  bad[7] = NAN;
  pv[0] = bad;
  CHECK_THROWS_AS(cn_step_batch(wv, pv, g.dx(), delta), NumericalError);
}

TEST_CASE("absorber mask") {
  const auto g = Grid1D::production();
  Absorber a(g, 0.8);
  const auto m = a.mask();
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(g.x(j)) <= 20.0) CHECK(m[j] == 1.0);
    CHECK(m[j] >= 0.0);
    CHECK(m[j] <= 1.0);
  }
  CHECK(m[0] < 0.7);
  CHECK(m[1] >= m[0]);
  CHECK(m[g.size() / 2] == 1.0);
  CHECK_THROWS_AS(Absorber(g, 1.0), ConfigError);
}

TEST_CASE("ADI stepping") {
  const Grid1D g(-12.0, 12.0, 128);
  const std::vector<double> no_coupling(g.size() * g.size(), 0.0);

  SUBCASE("separable potential matches the 1D tensor product") {
    const auto v = g.sample([](double x) { return -2.0 / std::sqrt(1 + x * x); });
    auto a = wavepacket(g, 1.0, 0.5, 1.0);
    auto b = wavepacket(g, -0.5, -0.2, 1.5);
    auto f = Field2D::product(a, b);
    const StepSpec s{0.1, 0.0};
    for (int n = 0; n < 10; ++n) {
      f = adi_step_2d(f, {v, no_coupling}, s);
      a = cn_step(a, v, s);
      b = cn_step(b, v, s);
    }
    CHECK(max_diff(f.data(), Field2D::product(a, b).data()) < 1e-6);
  }
  SUBCASE("free evolution conserves the norm") {
    const std::vector<double> zero(g.size(), 0.0);
    auto f = Field2D::product(wavepacket(g, 0.0, 1.0, 1.0), wavepacket(g, 2.0, -1.0, 1.0));
    AdiStepper st(g, no_coupling, {0.1, 0.0});
    for (int n = 0; n < 20; ++n) {
      const double before = norm_squared(f);
      st.step(f, zero);
      CHECK(std::abs(norm_squared(f) - before) < 1e-8);
    }
  }
  SUBCASE("coupled real-time steps conserve the norm") {
    std::vector<double> c(g.size() * g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) c[i * g.size() + j] = 1.0 / (1.2 + std::abs(g.x(i) - g.x(j)));
    const auto v = g.sample([](double x) { return -2.0 / std::sqrt(1 + x * x); });
    auto f = Field2D::product(wavepacket(g, 0.5, 0.0, 1.0), wavepacket(g, -0.5, 0.0, 1.0));
    AdiStepper st(g, c, {0.1, 0.0});
    for (int n = 0; n < 20; ++n) {
      const double before = norm_squared(f);
      st.step(f, v);
      CHECK(std::abs(norm_squared(f) - before) < 1e-8);
    }
  }
  SUBCASE("separable oscillator product ground state is stationary") {
    const Grid1D fine(-8.0, 8.0, 161);
    const std::vector<double> zc(fine.size() * fine.size(), 0.0);
    const auto v = fine.sample([](double x) { return 0.5 * x * x; });
    const auto phi = relax(WaveField::from_function(fine, [](double x) { return std::exp(-x * x / 2); }), v, 3000,
                           {0.05, std::numbers::pi / 2});
    const auto f0 = Field2D::product(phi, phi);
    auto f = f0;
    AdiStepper st(fine, zc, {0.1, 0.0});
    for (int n = 0; n < 100; ++n) st.step(f, v);
    CHECK(std::abs(inner_product(f0, f)) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("2D field helpers") {
  const Grid1D g(-5.0, 5.0, 32);
  auto f = Field2D::from_function(g, [](double a, double b) { return std::exp(-a * a - 2 * b * b) * (1 + a); });
  CHECK(exchange_asymmetry(f) > 0.1);
  symmetrize(f);
  CHECK(exchange_asymmetry(f) == 0.0);
  f = normalize(f);
  CHECK(norm_squared(f) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(normalize(Field2D(g)), DegenerateStateError);
}
