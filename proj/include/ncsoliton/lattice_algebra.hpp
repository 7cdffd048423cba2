#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace ncsoliton {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by inverse/inv_sqrt when the input is not (numerically) positive.
class NotPositiveError : public AlgebraError {
 public:
  using AlgebraError::AlgebraError;
};

class ConvergenceError : public AlgebraError {
 public:
  using AlgebraError::AlgebraError;
};

/// Primal: Λ = θZ×Z carrying the cocycle c (algebra A).
/// Dual:   Λ° = Z×(1/θ)Z carrying the conjugate cocycle (algebra B).
enum class Side { Primal, Dual };

const char* to_string(Side side);
Side side_from_string(const std::string& name);

/// A time-frequency point z = (x, ω).
struct Point {
  double x = 0.0;
  double omega = 0.0;
};

/// c(z, z') = exp(-2πi x η) for z = (x, ω), z' = (y, η).
Complex cocycle(Point z, Point w);

class LatticeSpec {
 public:
  LatticeSpec(double theta, Side side);

  double theta() const { return theta_; }
  Side side() const { return side_; }

  /// Covolume of this side's lattice: θ for Λ, 1/θ for Λ°.
  double vol() const { return side_ == Side::Primal ? theta_ : 1.0 / theta_; }

  /// (mθ, n) on Λ, (m, n/θ) on Λ°.
  Point point(int m, int n) const;

  /// Side-aware cocycle on lattice indices; the dual side returns the conjugate.
  Complex cocycle(int m1, int n1, int m2, int n2) const;

  LatticeSpec dual() const;

  /// Scale κ such that ∂_ν multiplies index (m, n) by κ·2πi·m (ν=1) or κ·2πi·n (ν=2).
  /// Equal to 1 on Λ and -1/θ on Λ° (fixed by compatibility with the module connection).
  double derivation_scale() const { return side_ == Side::Primal ? 1.0 : -1.0 / theta_; }

  bool operator==(const LatticeSpec& other) const {
    return theta_ == other.theta_ && side_ == other.side_;
  }
  bool operator!=(const LatticeSpec& other) const { return !(*this == other); }

 private:
  double theta_;
  Side side_;
};

/// Finitely supported coefficient map over Z² (|m|,|n| ≤ radius), stored densely.
/// Coefficient (m, n) multiplies π(point(m, n)).
class AlgebraElement {
 public:
  AlgebraElement(LatticeSpec lattice, int radius);
  AlgebraElement(LatticeSpec lattice, int radius, Eigen::MatrixXcd coefficients,
                 double tail_norm = 0.0);

  static AlgebraElement identity(LatticeSpec lattice, int radius);
  static AlgebraElement monomial(LatticeSpec lattice, int radius, int m, int n,
                                 Complex value = 1.0);
  /// Builds Σ a_mn U1^m U2^n, where U1 = π(point(1,0)), U2 = π(point(0,1)).
  static AlgebraElement from_generator_monomials(LatticeSpec lattice, int radius,
                                                 const Eigen::MatrixXcd& monomial_coeffs);

  const LatticeSpec& lattice() const { return lattice_; }
  int radius() const { return radius_; }
  int width() const { return 2 * radius_ + 1; }

  Complex operator()(int m, int n) const;
  bool contains(int m, int n) const { return std::abs(m) <= radius_ && std::abs(n) <= radius_; }
  void set(int m, int n, Complex value);

  const Eigen::MatrixXcd& coefficients() const { return coeffs_; }

  /// ℓ¹ mass discarded by truncation while producing this element.
  double tail_norm() const { return tail_norm_; }
  /// True when tail_norm exceeds 1e-9 of the ℓ¹ norm.
  bool truncation_warning() const;

  double l1_norm() const;
  double sup_norm() const;

  /// Re-boxes the coefficients; shrinking adds the dropped mass to tail_norm.
  AlgebraElement resized(int radius) const;

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement& operator-=(const AlgebraElement& other);
  AlgebraElement& operator*=(Complex scalar);

 private:
  LatticeSpec lattice_;
  int radius_;
  Eigen::MatrixXcd coeffs_;
  double tail_norm_ = 0.0;
};

AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b);
AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b);
AlgebraElement operator*(Complex scalar, AlgebraElement a);
AlgebraElement operator*(AlgebraElement a, Complex scalar);

/// Twisted convolution (a♮b)(λ) = Σ_μ a(μ) b(λ-μ) c(μ, λ-μ), truncated to max input radius.
AlgebraElement twisted_mul(const AlgebraElement& a, const AlgebraElement& b);
inline AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  return twisted_mul(a, b);
}

/// a*(λ) = c(λ,λ)·conj(a(-λ)) with the side's own cocycle (the operator adjoint).
AlgebraElement involution(const AlgebraElement& a);

/// Coefficient at the origin.
Complex trace(const AlgebraElement& a);

/// Σ |a(λ)| (1 + |λ|²)^{s/2} over embedded lattice points.
double s_norm(const AlgebraElement& a, double s);

enum class Direction { One = 1, Two = 2 };

AlgebraElement derive(const AlgebraElement& a, Direction direction);
/// ∂̄ = ∂₁ + i∂₂
AlgebraElement d_bar(const AlgebraElement& a);
/// ∂ = ∂₁ - i∂₂
AlgebraElement d(const AlgebraElement& a);
/// Δ = ∂₁² + ∂₂²
AlgebraElement laplacian(const AlgebraElement& a);

/// ℓ¹ distance between two elements of the same lattice (radii may differ).
double l1_distance(const AlgebraElement& a, const AlgebraElement& b);

/// M[λ,μ] = a(λ-μ) c(λ-μ, μ) on the index box |m|,|n| ≤ radius; row-major index
/// (m + R)(2R + 1) + (n + R).
Eigen::MatrixXcd left_regular_matrix(const AlgebraElement& a, int radius);

/// Coefficient vector of a on the box of the given radius, in left_regular_matrix order.
Eigen::VectorXcd to_vector(const AlgebraElement& a, int radius);
AlgebraElement from_vector(LatticeSpec lattice, int radius, const Eigen::VectorXcd& v);

struct SpectralBounds {
  double lower = 0.0;
  double upper = 0.0;
  /// Bounds from the radius-2 section, used for the convergence flag.
  double lower_coarse = 0.0;
  double upper_coarse = 0.0;
  bool converged = false;
  int radius = 0;
};

/// Extreme eigenvalues of a finite section of the left-regular representation, taken in
/// its Fourier-fibred form: a banded operator on ℓ²(Z) sectioned to length
/// clamp(16(2R+1), 256, 1024). The coarse bounds use radius R-2.
/// Throws AlgebraError when ‖a - a*‖₁ exceeds 1e-10·max(1, ‖a‖₁).
SpectralBounds spectral_bounds(const AlgebraElement& a, int radius,
                               double convergence_tol = 1e-4);

bool is_self_adjoint(const AlgebraElement& a, double tol = 1e-10);

struct IterationLimits {
  int max_iterations = 200;
  double step_tol = 1e-14;
};

/// Inverse of a positive element via the scaled Neumann series.
/// Throws unless ‖a♮y - δ₀‖₁ ≤ tol.
AlgebraElement inverse(const AlgebraElement& a, double tol = 1e-10,
                       IterationLimits limits = {});

/// Inverse square root of a positive element via Newton–Schulz.
/// Throws unless ‖y♮y♮a - δ₀‖₁ ≤ tol.
AlgebraElement inv_sqrt(const AlgebraElement& a, double tol = 1e-8,
                        IterationLimits limits = {});

/// Inverse of an arbitrary invertible element: u*♮(u♮u*)^{-1}.
AlgebraElement general_inverse(const AlgebraElement& u, double tol = 1e-10);

}  // namespace ncsoliton
