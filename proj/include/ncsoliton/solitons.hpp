#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "ncsoliton/lattice_algebra.hpp"
#include "ncsoliton/module_ops.hpp"
#include "ncsoliton/windows.hpp"

namespace ncsoliton {

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolitonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double frame_margin = 1e-8;
  double frame_drift = 1e-4;
  double rayleigh_eps = 1e-3;
  double tight = 1e-7;
  double normalize = 1e-7;
  double projection = 1e-6;
  double module_residual = 1e-5;
  double tau_routes = 1e-5;
  double gauge = 1e-6;
  double gaugeable = 1e-6;
  /// Target residuals for the internal inverse and inverse square root.
  double inverse = 1e-11;
  double inv_sqrt = 1e-10;
};

struct PipelineConfig {
  double theta = 0.41421356237309503;
  /// Truncation radii for A and B; 0 selects them from the window.
  int radius_a = 0;
  int radius_b = 0;
  QuadratureSpec quad;
  /// Widen quad.half_width to cover the tails of the tight window.
  bool auto_quadrature = true;
  Tolerances tol;
  std::uint64_t seed = 20240531;
};

struct Resolution {
  int radius_a = 0;
  int radius_b = 0;
  /// Relative ℓ¹ mass outside the chosen boxes (0 when the radius was given).
  double tail_a = 0.0;
  double tail_b = 0.0;
  QuadratureSpec quad;
};

/// Resolves automatic settings: the B radius from ⟨η,η⟩_B (plus a margin of 4 for the
/// functional calculus), then the quadrature interval and the A radius from the tight
/// window η̃.
Resolution resolve(const ModuleVector& eta, const PipelineConfig& config);
/// The config with every automatic setting fixed; a no-op on resolved configs.
PipelineConfig resolve_config(const ModuleVector& eta, PipelineConfig config);

/// Σ_k c_k · gaussian(λ_k, w_k) with random complex weights, widths in [0.25, 0.85]
/// and centres within about ±0.6.
ModuleVector random_gaussian_mixture(std::mt19937_64& rng, int terms = 2);

struct FrameReport {
  double lower = 0.0;
  double upper = 0.0;
  bool is_frame = false;
  bool tight = false;
  double invertibility_margin = 0.0;
  int radius_used = 0;
  double drift = 0.0;
  bool stable = false;
  int rayleigh_samples = 0;
  double rayleigh_min = 0.0;
  double rayleigh_max = 0.0;
};

/// Frame bounds of {π(λ)g} as the spectral bounds of ⟨g,g⟩_B, checked at radii R and R+2
/// and against Rayleigh quotients Σ_λ |⟨f, π(λ)g⟩|² / ‖f‖² for random mixtures f.
/// Throws FrameError when a Rayleigh quotient leaves [α(1-ε), β(1+ε)].
FrameReport frame_bounds(const ModuleVector& g, const PipelineConfig& config);

struct Normalization {
  ModuleVector vector;
  /// ⟨η,η⟩_B^{-1/2}
  AlgebraElement factor;
  /// ‖⟨η̃,η̃⟩_B - 1_B‖₁
  double tightness_residual = 0.0;
};

/// η̃ = η·⟨η,η⟩_B^{-1/2}. Throws FrameError if ⟨η,η⟩_B is not invertible or the
/// tightness residual exceeds tol.normalize.
Normalization normalize(const ModuleVector& eta, const PipelineConfig& config);

/// ‖f - η̃·⟨η̃, f⟩_B‖
double wexler_raz_residual(const ModuleVector& eta_tilde, const ModuleVector& f,
                           const PipelineConfig& config);

/// ‖f - A⟨f, η̃⟩·η̃‖, the tight-frame expansion over Λ.
double frame_expansion_residual(const ModuleVector& eta_tilde, const ModuleVector& f,
                                const PipelineConfig& config);

struct ProjectionReport {
  AlgebraElement p;
  ModuleVector eta_tilde;
  double tightness_residual = 0.0;
  double idempotency = 0.0;
  double self_adjointness = 0.0;
  Complex trace;
  /// ‖p ∂_ν(p) p‖₁ for ν = 1, 2
  double killing[2] = {0.0, 0.0};
  /// |Tr(∂_νp ∂_νp) - 2 Tr(p ∂_νp ∂_νp)| for ν = 1, 2
  double action_identity[2] = {0.0, 0.0};
  double tail_norm = 0.0;
};

/// p = A⟨η̃, η̃⟩. With strict set, throws SolitonError when idempotency or self-adjointness
/// exceed tol.projection.
ProjectionReport rieffel_projection(const ModuleVector& eta, const PipelineConfig& config,
                                    bool strict = true);

/// Re Tr(∂p ∂̄p); throws SolitonError if the imaginary part reaches 1e-8.
double energy(const AlgebraElement& p);
/// (1/2πi) Tr(p[∂₁p ∂₂p - ∂₂p ∂₁p])
double charge(const AlgebraElement& p);
/// ‖∂̄(p) p‖₁
double self_duality_residual(const AlgebraElement& p);
/// ‖p Δp - Δp p‖₁
double el_residual(const AlgebraElement& p);

struct SolitonReport {
  double energy = 0.0;
  double charge = 0.0;
  double charge_gap = 0.0;
  double bp_gap = 0.0;
  double sd_residual = 0.0;
  double el_residual = 0.0;
  double idempotency = 0.0;
};

SolitonReport soliton_report(const AlgebraElement& p);

struct BResult {
  AlgebraElement b;
  /// ‖∇̄η - η·b‖
  double module_residual = 0.0;
  bool valid = false;
};

/// b = ⟨η,η⟩_B^{-1} ⟨η, ∇̄η⟩_B. With strict set, throws SolitonError when the module
/// residual exceeds tol.module_residual.
BResult compute_b(const ModuleVector& eta, const PipelineConfig& config, bool strict = true);

struct TauReport {
  /// Tr(b), authoritative
  Complex algebraic;
  /// θ⁻¹⟨∇̄η̃, η̃⟩ on the normalized vector
  Complex pairing;
  double discrepancy = 0.0;
  /// ⟨∇̄η, η⟩/‖η‖² on the raw vector, for comparison on non-tight frames
  Complex raw_pairing;
  double module_residual = 0.0;
};

/// With strict set, throws SolitonError when the two routes differ by more than tol.tau_routes.
TauReport tau(const ModuleVector& eta, const PipelineConfig& config, bool strict = true);

struct GaugeTransform {
  ModuleVector eta_u;
  /// U⁻¹bU + U⁻¹∂̄U
  AlgebraElement b_u;
  /// ‖compute_b(η·U) - b_U‖₁
  double law_residual = 0.0;
  /// ‖p(η·U) - p(η)‖₁
  double projection_residual = 0.0;
  /// |S(p(η·U)) - S(p(η))| and |Q(p(η·U)) - Q(p(η))|
  double energy_residual = 0.0;
  double charge_residual = 0.0;
};

/// Inverse of an invertible U in B; exact for monomials.
AlgebraElement gauge_inverse(const AlgebraElement& u, double tol = 1e-11);

GaugeTransform gauge_transform(const ModuleVector& eta, const AlgebraElement& u,
                               const PipelineConfig& config);

/// Period lattice of the gauge action: U = U₁ᵐU₂ⁿ moves b by -(2πi/θ)(m + in),
/// so λ - τ(b) is tested against (2πi/θ)(Z + iZ).
Complex gauge_lattice_generator(double theta);

struct GaugeReport {
  Complex tau_b;
  Complex lambda;
  double lattice_distance = 0.0;
  bool gaugeable = false;
  std::pair<int, int> nearest_point{0, 0};
  Complex lattice_generator;
  double module_residual = 0.0;
};

GaugeReport classify_gauge_to_gaussian(const ModuleVector& eta, Complex lambda,
                                       const PipelineConfig& config);
/// Same classification given a precomputed τ(b).
GaugeReport classify_tau(Complex tau_b, Complex lambda, double theta, double tol = 1e-6);

}  // namespace ncsoliton
