#include "ncsoliton/lattice_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

namespace ncsoliton {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// exp(2πi·k·step) for k in [-kmax, kmax], with step = ∓θ or ±1/θ.
class PhaseTable {
 public:
  PhaseTable(double step, int kmax) : kmax_(kmax), table_(2 * kmax + 1) {
    for (int k = -kmax; k <= kmax; ++k) {
      // reduce the angle before exponentiating to keep |k·step| ≲ 1
      const double turns = std::remainder(static_cast<double>(k) * step, 1.0);
      table_[k + kmax] = std::polar(1.0, 2.0 * kPi * turns);
    }
  }
  Complex operator()(int k) const { return table_[k + kmax_]; }

 private:
  int kmax_;
  std::vector<Complex> table_;
};

// Signed cocycle step: σ(μ, ν) = exp(2πi·m₁·n₂·step).
double cocycle_step(const LatticeSpec& lattice) {
  return lattice.side() == Side::Primal ? -lattice.theta() : 1.0 / lattice.theta();
}

void require_same_lattice(const AlgebraElement& a, const AlgebraElement& b, const char* op) {
  if (a.lattice() != b.lattice()) {
    throw AlgebraError(std::string(op) + ": operands live on different lattices");
  }
}

int support_radius(const AlgebraElement& a) {
  const int R = a.radius();
  int r = 0;
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      if (a(m, n) != Complex(0.0)) r = std::max({r, std::abs(m), std::abs(n)});
    }
  }
  return r;
}

Eigen::MatrixXcd regular_section(const AlgebraElement& a, int radius) {
  const int w = 2 * radius + 1;
  const int dim = w * w;
  const PhaseTable phase(cocycle_step(a.lattice()), 4 * radius * radius);
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  for (int m1 = -radius; m1 <= radius; ++m1) {
    for (int n1 = -radius; n1 <= radius; ++n1) {
      const int row = (m1 + radius) * w + (n1 + radius);
      for (int m2 = -radius; m2 <= radius; ++m2) {
        for (int n2 = -radius; n2 <= radius; ++n2) {
          const int dm = m1 - m2;
          const int dn = n1 - n2;
          if (!a.contains(dm, dn)) continue;
          const Complex v = a(dm, dn);
          if (v == Complex(0.0)) continue;
          M(row, (m2 + radius) * w + (n2 + radius)) = v * phase(dm * n2);
        }
      }
    }
  }
  return M;
}

// Fourier transforming the left-regular representation in n splits it into the banded
// operators H_ξ[m₁, m₂] = â(m₁ - m₂, ξ + step·m₁) on ℓ²(Z), where â(j, ξ) = Σ_k a(j, k)e^{-2πikξ}.
// For irrational θ every fibre has the spectrum of a, and a section of length L has much
// smaller edge effects than a square section of the same dimension.
int fibre_length(int radius) { return std::clamp(16 * (2 * radius + 1), 256, 1024); }

Eigen::MatrixXcd fibre_section(const AlgebraElement& a, int length) {
  const int R = a.radius();
  const double step = cocycle_step(a.lattice());
  const double xi0 = 0.0;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(length, length);
  for (int m1 = 0; m1 < length; ++m1) {
    const double xi = xi0 + std::remainder(step * m1, 1.0);
    for (int j = -R; j <= R; ++j) {
      const int m2 = m1 - j;
      if (m2 < 0 || m2 >= length) continue;
      Complex v = 0.0;
      for (int k = -R; k <= R; ++k) {
        if (a(j, k) == Complex(0.0)) continue;
        v += a(j, k) * std::polar(1.0, -2.0 * kPi * std::remainder(k * xi, 1.0));
      }
      H(m1, m2) = v;
    }
  }
  return H;
}

std::pair<double, double> hermitian_extremes(const Eigen::MatrixXcd& M) {
  const Eigen::MatrixXcd H = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

void require_positive(const AlgebraElement& a, const SpectralBounds& sb, const char* op) {
  if (!(sb.lower > 1e-12 * std::max(1.0, sb.upper)) || !(sb.lower_coarse > 0.0)) {
    throw NotPositiveError(std::string(op) + ": element is not positive (lower spectral bound " +
                           sci(sb.lower) + ")");
  }
  (void)a;
}

}  // namespace

const char* to_string(Side side) { return side == Side::Primal ? "A" : "B"; }

Side side_from_string(const std::string& name) {
  if (name == "A" || name == "primal" || name == "Primal") return Side::Primal;
  if (name == "B" || name == "dual" || name == "Dual") return Side::Dual;
  throw AlgebraError("unknown lattice side '" + name + "'");
}

Complex cocycle(Point z, Point w) { return std::polar(1.0, -2.0 * kPi * z.x * w.omega); }

LatticeSpec::LatticeSpec(double theta, Side side) : theta_(theta), side_(side) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw AlgebraError("theta must lie in (0, 1), got " + sci(theta));
  }
}

Point LatticeSpec::point(int m, int n) const {
  if (side_ == Side::Primal) return {m * theta_, static_cast<double>(n)};
  return {static_cast<double>(m), n / theta_};
}

Complex LatticeSpec::cocycle(int m1, int /*n1*/, int /*m2*/, int n2) const {
  const double turns = std::remainder(static_cast<double>(m1) * n2 * cocycle_step(*this), 1.0);
  return std::polar(1.0, 2.0 * kPi * turns);
}

LatticeSpec LatticeSpec::dual() const {
  return {theta_, side_ == Side::Primal ? Side::Dual : Side::Primal};
}

// ---------------------------------------------------------------------------

AlgebraElement::AlgebraElement(LatticeSpec lattice, int radius)
    : lattice_(lattice), radius_(radius) {
  if (radius < 0) throw AlgebraError("radius must be non-negative");
  coeffs_ = Eigen::MatrixXcd::Zero(width(), width());
}

AlgebraElement::AlgebraElement(LatticeSpec lattice, int radius, Eigen::MatrixXcd coefficients,
                               double tail_norm)
    : lattice_(lattice), radius_(radius), coeffs_(std::move(coefficients)), tail_norm_(tail_norm) {
  if (radius < 0) throw AlgebraError("radius must be non-negative");
  if (coeffs_.rows() != width() || coeffs_.cols() != width()) {
    throw AlgebraError("coefficient grid does not match radius");
  }
}

AlgebraElement AlgebraElement::identity(LatticeSpec lattice, int radius) {
  return monomial(lattice, radius, 0, 0, 1.0);
}

AlgebraElement AlgebraElement::monomial(LatticeSpec lattice, int radius, int m, int n,
                                        Complex value) {
  AlgebraElement e(lattice, radius);
  e.set(m, n, value);
  return e;
}

AlgebraElement AlgebraElement::from_generator_monomials(LatticeSpec lattice, int radius,
                                                        const Eigen::MatrixXcd& monomial_coeffs) {
  AlgebraElement e(lattice, radius);
  if (monomial_coeffs.rows() != e.width() || monomial_coeffs.cols() != e.width()) {
    throw AlgebraError("monomial coefficient grid does not match radius");
  }
  // U1^m U2^n = π(m,0) π(0,n) = σ((m,0),(0,n)) π(m,n)
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) {
      e.set(m, n, monomial_coeffs(m + radius, n + radius) * lattice.cocycle(m, 0, 0, n));
    }
  }
  return e;
}

Complex AlgebraElement::operator()(int m, int n) const {
  if (!contains(m, n)) return 0.0;
  return coeffs_(m + radius_, n + radius_);
}

void AlgebraElement::set(int m, int n, Complex value) {
  if (!contains(m, n)) {
    throw AlgebraError("index (" + std::to_string(m) + "," + std::to_string(n) +
                       ") outside radius " + std::to_string(radius_));
  }
  coeffs_(m + radius_, n + radius_) = value;
}

bool AlgebraElement::truncation_warning() const { return tail_norm_ > 1e-9 * l1_norm(); }

double AlgebraElement::l1_norm() const { return coeffs_.cwiseAbs().sum(); }

double AlgebraElement::sup_norm() const { return coeffs_.cwiseAbs().maxCoeff(); }

AlgebraElement AlgebraElement::resized(int radius) const {
  AlgebraElement out(lattice_, radius);
  out.tail_norm_ = tail_norm_;
  for (int m = -radius_; m <= radius_; ++m) {
    for (int n = -radius_; n <= radius_; ++n) {
      const Complex v = (*this)(m, n);
      if (out.contains(m, n)) {
        out.set(m, n, v);
      } else {
        out.tail_norm_ += std::abs(v);
      }
    }
  }
  return out;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& other) {
  require_same_lattice(*this, other, "operator+");
  if (other.radius_ > radius_) *this = resized(other.radius_);
  const int r = other.radius_;
  coeffs_.block(radius_ - r, radius_ - r, 2 * r + 1, 2 * r + 1) += other.coeffs_;
  tail_norm_ += other.tail_norm_;
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& other) {
  AlgebraElement neg = other;
  neg *= -1.0;
  return *this += neg;
}

AlgebraElement& AlgebraElement::operator*=(Complex scalar) {
  coeffs_ *= scalar;
  tail_norm_ *= std::abs(scalar);
  return *this;
}

AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
AlgebraElement operator*(Complex scalar, AlgebraElement a) { return a *= scalar; }
AlgebraElement operator*(AlgebraElement a, Complex scalar) { return a *= scalar; }

// ---------------------------------------------------------------------------

AlgebraElement twisted_mul(const AlgebraElement& a, const AlgebraElement& b) {
  require_same_lattice(a, b, "twisted_mul");
  const int Ra = a.radius();
  const int Rb = b.radius();
  const int R = std::max(Ra, Rb);
  const int full = Ra + Rb;
  const int fw = 2 * full + 1;
  const PhaseTable phase(cocycle_step(a.lattice()), Ra * Rb);

  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(fw, fw);
  std::vector<Complex> row(2 * Rb + 1);
  for (int m1 = -Ra; m1 <= Ra; ++m1) {
    for (int n2 = -Rb; n2 <= Rb; ++n2) row[n2 + Rb] = phase(m1 * n2);
    for (int n1 = -Ra; n1 <= Ra; ++n1) {
      const Complex av = a(m1, n1);
      if (av == Complex(0.0)) continue;
      for (int m2 = -Rb; m2 <= Rb; ++m2) {
        const auto bcol = b.coefficients().row(m2 + Rb);
        Complex* out = &acc(m1 + m2 + full, 0);
        for (int n2 = -Rb; n2 <= Rb; ++n2) {
          const Complex bv = bcol(n2 + Rb);
          if (bv == Complex(0.0)) continue;
          // column-major storage: step fw per column
          out[static_cast<std::ptrdiff_t>(n1 + n2 + full) * fw] += av * bv * row[n2 + Rb];
        }
      }
    }
  }

  const int off = full - R;
  Eigen::MatrixXcd kept = acc.block(off, off, 2 * R + 1, 2 * R + 1);
  const double dropped = acc.cwiseAbs().sum() - kept.cwiseAbs().sum();
  const double tail = std::max(0.0, dropped) + a.tail_norm() * b.l1_norm() +
                      b.tail_norm() * a.l1_norm();
  return AlgebraElement(a.lattice(), R, std::move(kept), tail);
}

AlgebraElement involution(const AlgebraElement& a) {
  const int R = a.radius();
  AlgebraElement out(a.lattice(), R, Eigen::MatrixXcd::Zero(a.width(), a.width()),
                     a.tail_norm());
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      out.set(m, n, a.lattice().cocycle(m, n, m, n) * std::conj(a(-m, -n)));
    }
  }
  return out;
}

Complex trace(const AlgebraElement& a) { return a(0, 0); }

double s_norm(const AlgebraElement& a, double s) {
  if (s < 0.0) throw AlgebraError("s_norm requires s >= 0");
  const int R = a.radius();
  double total = 0.0;
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      const Point p = a.lattice().point(m, n);
      total += std::abs(a(m, n)) * std::pow(1.0 + p.x * p.x + p.omega * p.omega, 0.5 * s);
    }
  }
  return total;
}

AlgebraElement derive(const AlgebraElement& a, Direction direction) {
  const int R = a.radius();
  const double kappa = a.lattice().derivation_scale();
  const Complex scale = kappa * 2.0 * kPi * kI;
  Eigen::MatrixXcd coeffs = a.coefficients();
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      coeffs(m + R, n + R) *= scale * static_cast<double>(direction == Direction::One ? m : n);
    }
  }
  // dropped mass sits beyond the box, where the multiplier is at least 2π|κ|(R+1)
  return AlgebraElement(a.lattice(), R, std::move(coeffs),
                        a.tail_norm() * 2.0 * kPi * std::abs(kappa) * (R + 1));
}

AlgebraElement d_bar(const AlgebraElement& a) {
  return derive(a, Direction::One) + kI * derive(a, Direction::Two);
}

AlgebraElement d(const AlgebraElement& a) {
  return derive(a, Direction::One) - kI * derive(a, Direction::Two);
}

AlgebraElement laplacian(const AlgebraElement& a) {
  return derive(derive(a, Direction::One), Direction::One) +
         derive(derive(a, Direction::Two), Direction::Two);
}

double l1_distance(const AlgebraElement& a, const AlgebraElement& b) {
  return (a - b).l1_norm();
}

Eigen::MatrixXcd left_regular_matrix(const AlgebraElement& a, int radius) {
  if (support_radius(a) > radius) {
    throw AlgebraError("left_regular_matrix: radius " + std::to_string(radius) +
                       " does not contain the support of the element");
  }
  return regular_section(a, radius);
}

Eigen::VectorXcd to_vector(const AlgebraElement& a, int radius) {
  const int w = 2 * radius + 1;
  Eigen::VectorXcd v(w * w);
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) v((m + radius) * w + (n + radius)) = a(m, n);
  }
  return v;
}

AlgebraElement from_vector(LatticeSpec lattice, int radius, const Eigen::VectorXcd& v) {
  const int w = 2 * radius + 1;
  if (v.size() != w * w) throw AlgebraError("from_vector: size mismatch");
  AlgebraElement out(lattice, radius);
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) out.set(m, n, v((m + radius) * w + (n + radius)));
  }
  return out;
}

bool is_self_adjoint(const AlgebraElement& a, double tol) {
  return l1_distance(a, involution(a)) <= tol * std::max(1.0, a.l1_norm());
}

SpectralBounds spectral_bounds(const AlgebraElement& a, int radius, double convergence_tol) {
  if (!is_self_adjoint(a)) throw AlgebraError("spectral_bounds: element is not self-adjoint");
  if (support_radius(a) > radius) {
    throw AlgebraError("spectral_bounds: radius does not contain the support");
  }
  SpectralBounds sb;
  sb.radius = radius;
  std::tie(sb.lower, sb.upper) = hermitian_extremes(fibre_section(a, fibre_length(radius)));
  if (radius >= 2) {
    std::tie(sb.lower_coarse, sb.upper_coarse) =
        hermitian_extremes(fibre_section(a, fibre_length(radius - 2)));
  } else {
    sb.lower_coarse = sb.lower;
    sb.upper_coarse = sb.upper;
  }
  sb.converged = std::abs(sb.lower - sb.lower_coarse) <= convergence_tol &&
                 std::abs(sb.upper - sb.upper_coarse) <= convergence_tol;
  return sb;
}

AlgebraElement inverse(const AlgebraElement& a, double tol, IterationLimits limits) {
  const SpectralBounds sb = spectral_bounds(a, a.radius());
  require_positive(a, sb, "inverse");

  // Neumann series for (1 - (1 - a/c))^{-1}/c, summed as a Richardson iteration.
  const double c = 0.5 * (sb.lower + sb.upper);
  const AlgebraElement one = AlgebraElement::identity(a.lattice(), a.radius());
  AlgebraElement y = (1.0 / c) * one;
  double previous_step = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int k = 0; k < limits.max_iterations; ++k) {
    const AlgebraElement r = one - twisted_mul(a, y);
    const double step = r.l1_norm() / c;
    y += (1.0 / c) * r;
    if (step < limits.step_tol * std::max(1.0, y.l1_norm())) break;
    stalled = step >= previous_step ? stalled + 1 : 0;
    if (stalled >= 3) break;  // round-off floor
    previous_step = step;
  }
  const double residual = l1_distance(twisted_mul(a, y), one);
  if (!(residual <= tol)) {
    throw ConvergenceError("inverse: residual " + sci(residual) +
                           " exceeds tolerance " + sci(tol));
  }
  return y;
}

AlgebraElement inv_sqrt(const AlgebraElement& a, double tol, IterationLimits limits) {
  const SpectralBounds sb = spectral_bounds(a, a.radius());
  require_positive(a, sb, "inv_sqrt");

  const double c = sb.upper;
  const AlgebraElement x = (1.0 / c) * a;
  const AlgebraElement one = AlgebraElement::identity(a.lattice(), a.radius());
  AlgebraElement y = one;
  double previous_step = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int k = 0; k < limits.max_iterations; ++k) {
    const AlgebraElement xyy = twisted_mul(twisted_mul(x, y), y);
    AlgebraElement next = 0.5 * twisted_mul(y, 3.0 * one - xyy);
    const double step = l1_distance(next, y);
    if (!std::isfinite(step) || step > 1e6) {
      throw ConvergenceError("inv_sqrt: Newton-Schulz iteration diverged");
    }
    y = std::move(next);
    if (step < limits.step_tol * std::max(1.0, y.l1_norm())) break;
    stalled = step >= previous_step ? stalled + 1 : 0;
    if (stalled >= 3) break;
    previous_step = step;
  }
  y *= 1.0 / std::sqrt(c);
  y = 0.5 * (y + involution(y));
  const double residual = l1_distance(twisted_mul(twisted_mul(y, y), a), one);
  if (!(residual <= tol)) {
    throw ConvergenceError("inv_sqrt: residual " + sci(residual) +
                           " exceeds tolerance " + sci(tol));
  }
  return y;
}

AlgebraElement general_inverse(const AlgebraElement& u, double tol) {
  const AlgebraElement u_star = involution(u);
  const AlgebraElement w = twisted_mul(u, u_star);
  const AlgebraElement w_inv = inverse(0.5 * (w + involution(w)), tol);
  AlgebraElement y = twisted_mul(u_star, w_inv);
  const double residual =
      l1_distance(twisted_mul(u, y), AlgebraElement::identity(u.lattice(), u.radius()));
  if (!(residual <= tol)) {
    throw ConvergenceError("general_inverse: residual " + sci(residual) +
                           " exceeds tolerance");
  }
  return y;
}

}  // namespace ncsoliton
