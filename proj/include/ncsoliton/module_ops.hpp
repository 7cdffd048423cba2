#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ncsoliton/lattice_algebra.hpp"
#include "ncsoliton/windows.hpp"

namespace ncsoliton {

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class QuadratureRule { Trapezoid, GaussLegendre };

const char* to_string(QuadratureRule rule);

struct QuadratureSpec {
  double half_width = 12.0;
  int nodes = 8192;
  QuadratureRule rule = QuadratureRule::Trapezoid;
  /// Bound on the envelope tail outside [-half_width, half_width].
  double tol = 1e-10;

  QuadratureSpec refined() const {
    QuadratureSpec q = *this;
    q.nodes *= 2;
    return q;
  }
};

struct QuadratureGrid {
  Eigen::VectorXd t;
  Eigen::VectorXd w;
};

/// Nodes and weights; Gauss–Legendre uses panels of 16 points.
const QuadratureGrid& quadrature_grid(const QuadratureSpec& spec);

namespace detail {

struct SampleCache;

class VectorNode {
 public:
  virtual ~VectorNode() = default;
  virtual Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const = 0;
  virtual double envelope(double t, int order) const = 0;
  virtual double support_radius() const = 0;
  virtual int smoothness() const = 0;
};

}  // namespace detail

/// An element of the module S(R): a window, or a finite expression built from windows
/// by time-frequency shifts, linear combinations, and the covariant derivatives.
class ModuleVector {
 public:
  explicit ModuleVector(Window window);
  explicit ModuleVector(std::shared_ptr<const detail::VectorNode> node);

  Complex operator()(double t) const { return value(t, 0); }
  Complex value(double t, int order = 0) const;
  /// Values (or derivatives) at arbitrary points.
  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order = 0) const;
  /// Values on the nodes of a quadrature grid, computed once per (grid, order).
  const Eigen::VectorXcd& sample(const QuadratureSpec& q, int order = 0) const;
  double envelope(double t, int order = 0) const { return node_->envelope(t, order); }
  double support_radius() const { return node_->support_radius(); }
  int smoothness() const { return node_->smoothness(); }

  const std::shared_ptr<const detail::VectorNode>& node() const { return node_; }

 private:
  std::shared_ptr<const detail::VectorNode> node_;
  std::shared_ptr<detail::SampleCache> cache_;
};

ModuleVector operator+(const ModuleVector& f, const ModuleVector& g);
ModuleVector operator-(const ModuleVector& f, const ModuleVector& g);
ModuleVector operator*(Complex scalar, const ModuleVector& f);

/// c·π(x, ω) f
ModuleVector shifted(const ModuleVector& f, Point z, Complex c = 1.0);

/// ⟨f, g⟩ = ∫ f conj(g), linear in the first argument.
Complex l2_inner(const ModuleVector& f, const ModuleVector& g, const QuadratureSpec& q = {});
double l2_norm(const ModuleVector& f, const QuadratureSpec& q = {});

/// V_g f(x, ω) = ⟨f, π(x, ω) g⟩. Throws QuadratureError if the envelope tail exceeds q.tol.
Complex stft(const ModuleVector& f, const ModuleVector& g, double x, double omega,
             const QuadratureSpec& q = {});

/// V[i, j] = stft(f, g, xs[i], omegas[j]).
Eigen::MatrixXcd stft_grid(const ModuleVector& f, const ModuleVector& g,
                           const std::vector<double>& xs, const std::vector<double>& omegas,
                           const QuadratureSpec& q = {});

/// A⟨f, g⟩(m, n) = ⟨f, π(mθ, n) g⟩.
AlgebraElement inner_A(const ModuleVector& f, const ModuleVector& g, double theta, int radius,
                       const QuadratureSpec& q = {});

/// ⟨f, g⟩_B(m, n) = θ⁻¹ ⟨π(m, n/θ) g, f⟩, the coefficient of the generator acting as π*(m, n/θ).
AlgebraElement inner_B(const ModuleVector& f, const ModuleVector& g, double theta, int radius,
                       const QuadratureSpec& q = {});

/// Σ a(λ) π(λ) f
ModuleVector act_A(const AlgebraElement& a, const ModuleVector& f);

/// Σ b(λ°) π*(λ°) f, normalized so that act_B(f, δ₀) = f.
ModuleVector act_B(const ModuleVector& f, const AlgebraElement& b);

enum class Connection { One, Two, Bar, Holo };

/// ∇₁ = 2πit/θ, ∇₂ = d/dt, ∇̄ = ∇₁ + i∇₂, ∇ = ∇₁ - i∇₂.
ModuleVector nabla(const ModuleVector& f, Connection which, double theta);

/// Widens half_width in steps of 4 (nodes unchanged) until the envelope tail of f·conj(g(· - x))
/// is below base.tol for every |x| ≤ max_shift.
QuadratureSpec resolve_quadrature(const ModuleVector& f, const ModuleVector& g, double max_shift,
                                  QuadratureSpec base, double max_half_width = 48.0);

struct RadiusChoice {
  int radius = 0;
  /// ℓ¹ mass outside the chosen box relative to the total, at the probe radius.
  double relative_tail = 0.0;
};

/// Smallest radius whose coefficients outside the box carry at most rel_tol of the ℓ¹ mass
/// of the inner product ⟨f, g⟩ on the given side, probing outwards up to max_radius.
RadiusChoice resolve_radius(const ModuleVector& f, const ModuleVector& g, const LatticeSpec& lattice,
                            const QuadratureSpec& q = {}, double rel_tol = 1e-12,
                            int min_radius = 4, int max_radius = 48);

}  // namespace ncsoliton
