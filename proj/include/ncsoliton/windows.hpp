#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ncsoliton/lattice_algebra.hpp"

namespace ncsoliton {

enum class WindowFamily { Gaussian, HyperbolicSecant, TotallyPositive };

const char* to_string(WindowFamily family);

/// Frequency-side form exp(-gauss·ω²) exp(-shift·ω) Π_j 1/(1 + 2πi δ_j ω).
struct TotallyPositiveParams {
  std::vector<double> deltas;
  double gauss = 0.0;
  double shift = 0.0;
};

/// Smoothness grade reported by C^∞ windows.
inline constexpr int kSmooth = 1000;
/// Highest derivative order any window evaluates.
inline constexpr int kMaxDerivativeOrder = 3;

namespace detail {

class WindowImpl {
 public:
  virtual ~WindowImpl() = default;
  virtual Complex value(double t, int order) const = 0;
  virtual double envelope(double t, int order) const = 0;
  virtual double support_radius() const = 0;
  virtual int smoothness() const = 0;
  virtual WindowFamily family() const = 0;
  virtual std::string describe() const = 0;
};

}  // namespace detail

/// An immutable, cheaply copyable window function on the real line.
class Window {
 public:
  explicit Window(std::shared_ptr<const detail::WindowImpl> impl) : impl_(std::move(impl)) {}

  Complex operator()(double t) const { return impl_->value(t, 0); }
  /// order-th derivative, 0 ≤ order ≤ kMaxDerivativeOrder.
  Complex value(double t, int order = 0) const { return impl_->value(t, order); }
  Complex derivative(double t) const { return impl_->value(t, 1); }
  /// Upper bound on |value(t, order)|.
  double envelope(double t, int order = 0) const { return impl_->envelope(t, order); }
  /// |t| beyond which the order-0 envelope is below 1e-16.
  double support_radius() const { return impl_->support_radius(); }
  /// Number of continuous derivatives (kSmooth for C^∞).
  int smoothness() const { return impl_->smoothness(); }
  WindowFamily family() const { return impl_->family(); }
  std::string describe() const { return impl_->describe(); }

  const detail::WindowImpl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const detail::WindowImpl> impl_;
};

/// Unit-norm solution of ∇̄ξ = λξ for ∇̄ = 2πit/θ + i d/dt:
/// ξ(t) = C exp(-πt²/θ - iλt).
Window gaussian(Complex lambda, double theta);

/// sqrt(π/2) / cosh(πt), unit L² norm.
Window hyperbolic_secant();

/// Totally positive window of finite type M = deltas.size() ≥ 2.
/// gauss == 0 uses the exact partial-fraction form (distinct deltas, shift == 0);
/// gauss > 0 inverts the frequency-side form on a 2^16-point grid.
Window totally_positive(const TotallyPositiveParams& params);

/// True for a totally positive window of the boundary type M = 2.
bool is_boundary_type(const TotallyPositiveParams& params);

struct GaussianParams {
  Complex lambda;
  double theta;
  double norm_constant;
};

/// Parameters of a Gaussian window; throws std::invalid_argument for other families.
GaussianParams gaussian_params(const Window& w);

/// ⟨f, π(x,ω) g⟩ for two Gaussian windows, in closed form.
Complex closed_form_gaussian_stft(const Window& f, const Window& g, double x, double omega);

}  // namespace ncsoliton
