#include "tdqmc/field2d.hpp"

#include <cmath>
#include <string>

#include "tdqmc/error.hpp"

namespace tdqmc {

Field2D::Field2D(Grid1D grid) : grid_(grid), data_(grid.size() * grid.size()) {}

Field2D::Field2D(Grid1D grid, std::vector<complex> data) : grid_(grid), data_(std::move(data)) {
  if (data_.size() != grid_.size() * grid_.size()) throw ConfigError("2D field size does not match grid");
}

Field2D Field2D::product(const WaveField& a, const WaveField& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("product of fields on different grids");
  Field2D out(a.grid());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.data_[i * n + j] = a[i] * b[j];
  return out;
}

Field2D& Field2D::operator*=(complex c) {
  for (auto& v : data_) v *= c;
  return *this;
}

complex inner_product(const Field2D& a, const Field2D& b) {
  if (!(a.grid() == b.grid())) throw ConfigError("2D fields live on different grids");
  double re = 0.0;
  double im = 0.0;
  const auto pa = a.data();
  const auto pb = b.data();
  for (std::size_t j = 0; j < pa.size(); ++j) {
    re += pa[j].real() * pb[j].real() + pa[j].imag() * pb[j].imag();
    im += pa[j].real() * pb[j].imag() - pa[j].imag() * pb[j].real();
  }
  const double dx = a.grid().dx();
  return {re * dx * dx, im * dx * dx};
}

double norm_squared(const Field2D& f) {
  double s = 0.0;
  for (const auto& c : f.data()) s += std::norm(c);
  return s * f.grid().dx() * f.grid().dx();
}

Field2D normalize(Field2D f) {
  const double n2 = norm_squared(f);
  if (!(n2 > 0.0) || !std::isfinite(n2)) {
    throw DegenerateStateError("cannot normalize a 2D field with norm^2 = " + std::to_string(n2));
  }
  f *= complex(1.0 / std::sqrt(n2));
  return f;
}

double exchange_asymmetry(const Field2D& f) {
  double worst = 0.0;
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = i + 1; j < f.n(); ++j) worst = std::max(worst, std::abs(f(i, j) - f(j, i)));
  return worst;
}

void symmetrize(Field2D& f) {
  for (std::size_t i = 0; i < f.n(); ++i)
    for (std::size_t j = i + 1; j < f.n(); ++j) {
      const complex s = 0.5 * (f(i, j) + f(j, i));
      f(i, j) = s;
      f(j, i) = s;
    }
}

AdiStepper::AdiStepper(const Grid1D& grid, std::span<const double> coupling, const StepSpec& step)
    : grid_(grid), spec_(step), half_coupling_(coupling.size()) {
  step.validate();
  if (coupling.size() != grid.size() * grid.size()) throw ConfigError("coupling size does not match grid");
  const complex factor = complex(0.0, -0.5) * step.delta();
  for (std::size_t k = 0; k < coupling.size(); ++k) half_coupling_[k] = std::exp(factor * coupling[k]);
}

void AdiStepper::sweep_rows(Field2D& f, const CrankNicolsonOperator& op) const {
  const std::size_t n = f.n();
  auto data = f.data();
  std::vector<complex> scratch(n);
#pragma omp parallel for firstprivate(scratch) schedule(static)
  for (std::size_t i = 0; i < n; ++i) op.apply(data.subspan(i * n, n), scratch);
}

void AdiStepper::sweep_columns(Field2D& f, const CrankNicolsonOperator& op) const {
  // Thomas solve along x1 for every column at once; all columns share the
  // same matrix, so each elimination step is a contiguous row update.
  const std::size_t n = f.n();
  auto data = f.data();
  const complex off = op.off_diagonal();
  const auto rd = op.explicit_diagonal();
  const auto cp = op.forward_ratio();
  const auto ip = op.inverse_pivot();
  std::vector<complex> rhs(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const complex* cur = &data[i * n];
    const complex* up = i > 0 ? &data[(i - 1) * n] : nullptr;
    const complex* down = i + 1 < n ? &data[(i + 1) * n] : nullptr;
    complex* r = &rhs[i * n];
    for (std::size_t j = 0; j < n; ++j) {
      complex nb = 0.0;
      if (up) nb += up[j];
      if (down) nb += down[j];
      r[j] = rd[i] * cur[j] - off * nb;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    complex* r = &rhs[i * n];
    const complex* prev = i > 0 ? &rhs[(i - 1) * n] : nullptr;
    for (std::size_t j = 0; j < n; ++j) {
      const complex carry = prev ? off * prev[j] : complex(0.0);
      r[j] = (r[j] - carry) * ip[i];
    }
  }
  for (std::size_t j = 0; j < n; ++j) data[(n - 1) * n + j] = rhs[(n - 1) * n + j];
  for (std::size_t i = n - 1; i-- > 0;) {
    complex* out = &data[i * n];
    const complex* next = &data[(i + 1) * n];
    const complex* r = &rhs[i * n];
    for (std::size_t j = 0; j < n; ++j) out[j] = r[j] - cp[i] * next[j];
  }
}

void AdiStepper::step(Field2D& f, std::span<const double> axis) const {
  if (!(f.grid() == grid_)) throw ConfigError("2D field grid does not match stepper grid");
  if (axis.size() != grid_.size()) throw ConfigError("one-body potential length does not match grid");
  const CrankNicolsonOperator op(axis, grid_.dx(), spec_.delta());
  auto data = f.data();
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= half_coupling_[k];
  sweep_rows(f, op);
  sweep_columns(f, op);
  for (std::size_t k = 0; k < data.size(); ++k) data[k] *= half_coupling_[k];
}

Field2D adi_step_2d(const Field2D& f, const Potential2D& v, const StepSpec& s) {
  const AdiStepper stepper(f.grid(), v.coupling, s);
  Field2D out = f;
  stepper.step(out, v.axis);
  return out;
}

void apply_absorber(Field2D& f, const Absorber& absorber) {
  const auto m = absorber.mask();
  const std::size_t n = f.n();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) f(i, j) *= m[i] * m[j];
}

}  // namespace tdqmc
