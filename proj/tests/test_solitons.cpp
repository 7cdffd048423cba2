#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "ncsoliton/solitons.hpp"
#include "support.hpp"

using namespace ncsoliton;
using ncsoliton::testing::kTheta;

namespace {

// One resolved Gaussian pipeline shared by the suite; it is the expensive part.
struct GaussianRun {
  Complex lambda{0.7, -0.4};
  ModuleVector eta{gaussian(lambda, kTheta)};
  PipelineConfig config;
  ProjectionReport projection;
  SolitonReport soliton;
  TauReport tau;

  GaussianRun()
      : config(resolve_config(eta, PipelineConfig{})),
        projection(rieffel_projection(eta, config)),
        soliton(soliton_report(projection.p)),
        tau(ncsoliton::tau(eta, config)) {}
};

class GaussianPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    if (!run_) run_ = std::make_unique<GaussianRun>();
  }
  static std::unique_ptr<GaussianRun> run_;
};

std::unique_ptr<GaussianRun> GaussianPipeline::run_;

}  // namespace

TEST(Frame, GaussianBoundsBracketJanssenEstimate) {
  // S = θ⁻¹ Σ_{λ°} ⟨g, π(λ°)g⟩ π(λ°), so Janssen's estimate gives
  // θ⁻¹(‖g‖² - Σ_{λ°≠0} |V_g g(λ°)|) ≤ A ≤ B ≤ θ⁻¹ Σ |V_g g(λ°)|.
  const Window w = gaussian(0.0, kTheta);
  double off = 0.0;
  for (int m = -10; m <= 10; ++m) {
    for (int n = -10; n <= 10; ++n) {
      if (m != 0 || n != 0) off += std::abs(closed_form_gaussian_stft(w, w, m, n / kTheta));
    }
  }
  const FrameReport r = frame_bounds(ModuleVector(w), PipelineConfig{});
  EXPECT_TRUE(r.is_frame);
  EXPECT_FALSE(r.tight);
  EXPECT_TRUE(r.stable);
  EXPECT_GE(r.lower, (1.0 - off) / kTheta - 1e-9);
  EXPECT_LE(r.upper, (1.0 + off) / kTheta + 1e-9);
  EXPECT_LE(r.lower, r.rayleigh_min * (1.0 + 1e-9));
  EXPECT_GE(r.upper, r.rayleigh_max * (1.0 - 1e-9));
  EXPECT_LT(r.drift, 1e-4);
}

TEST(Frame, RayleighQuotientsInvariantUnderScaling) {
  const ModuleVector g(gaussian(0.0, kTheta));
  const FrameReport a = frame_bounds(g, PipelineConfig{});
  const FrameReport b = frame_bounds(Complex(3.0) * g, PipelineConfig{});
  EXPECT_NEAR(b.lower / a.lower, 9.0, 1e-9);
  EXPECT_NEAR(b.upper / a.upper, 9.0, 1e-9);
}

TEST_F(GaussianPipeline, NormalizationIsTight) {
  EXPECT_LT(run_->projection.tightness_residual, 1e-7);
  const AlgebraElement gram = inner_B(run_->projection.eta_tilde, run_->projection.eta_tilde, kTheta,
                                      run_->config.radius_b, run_->config.quad);
  EXPECT_LT(l1_distance(gram, AlgebraElement::identity(gram.lattice(), gram.radius())), 1e-7);
}

TEST_F(GaussianPipeline, NormalizationIgnoresScale) {
  const Normalization a = normalize(run_->eta, run_->config);
  const Normalization b = normalize(Complex(2.5) * run_->eta, run_->config);
  for (double t : {-0.8, 0.0, 0.3, 1.2}) EXPECT_LT(std::abs(a.vector(t) - b.vector(t)), 1e-7);
}

TEST_F(GaussianPipeline, ProjectionProperties) {
  const ProjectionReport& p = run_->projection;
  EXPECT_LT(p.idempotency, 1e-6);
  EXPECT_LT(p.self_adjointness, 1e-10);
  EXPECT_NEAR(p.trace.real(), kTheta, 1e-6);
  EXPECT_NEAR(p.trace.imag(), 0.0, 1e-10);
  EXPECT_LT(p.killing[0], 1e-7);
  EXPECT_LT(p.killing[1], 1e-7);
  EXPECT_LT(p.action_identity[0], 1e-8);
  EXPECT_LT(p.action_identity[1], 1e-8);
}

TEST_F(GaussianPipeline, SelfDualUnitCharge) {
  const SolitonReport& s = run_->soliton;
  EXPECT_NEAR(s.charge, 1.0, 1e-4);
  EXPECT_NEAR(s.energy, 4.0 * kPi, 1e-4);
  EXPECT_LT(std::abs(s.bp_gap), 1e-4);
  EXPECT_LT(s.sd_residual, 1e-5);
  EXPECT_LT(s.el_residual, 1e-5);
}

TEST_F(GaussianPipeline, TraceInvariantIsTheGaussianParameter) {
  EXPECT_LT(std::abs(run_->tau.algebraic - run_->lambda), 1e-7);
  EXPECT_LT(run_->tau.discrepancy, 1e-5);
  EXPECT_LT(run_->tau.module_residual, 1e-5);
  // ∇̄ξ = λξ pointwise, so the raw pairing sees λ too
  EXPECT_LT(std::abs(run_->tau.raw_pairing - run_->lambda), 1e-7);
}

TEST_F(GaussianPipeline, FrameExpansionOverTheDenseLattice) {
  std::mt19937_64 rng(41);
  const ModuleVector f = random_gaussian_mixture(rng, 2);
  const double residual = frame_expansion_residual(run_->projection.eta_tilde, f, run_->config);
  EXPECT_LT(residual, 1e-6 * l2_norm(f));
}

TEST_F(GaussianPipeline, MonomialGaugeShiftsTau) {
  const LatticeSpec dual(kTheta, Side::Dual);
  const AlgebraElement u = AlgebraElement::monomial(dual, 1, 1, -1);
  const GaugeTransform g = gauge_transform(run_->eta, u, run_->config);
  EXPECT_LT(g.law_residual, 1e-6);
  EXPECT_LT(g.projection_residual, 1e-6);
  const TauReport after = tau(g.eta_u, run_->config, false);
  const Complex expected = run_->lambda - gauge_lattice_generator(kTheta) * Complex(1.0, -1.0);
  EXPECT_LT(std::abs(after.algebraic - expected), 1e-6);
}

TEST(Gauge, MonomialInverseIsExact) {
  const LatticeSpec dual(kTheta, Side::Dual);
  const AlgebraElement u = AlgebraElement::monomial(dual, 2, 2, -1, Complex(0.0, 3.0));
  const AlgebraElement v = gauge_inverse(u);
  EXPECT_LT(l1_distance(u * v, AlgebraElement::identity(dual, 2)), 1e-15);
  EXPECT_LT(l1_distance(v * u, AlgebraElement::identity(dual, 2)), 1e-15);
}

TEST(Gauge, ClassifierLattice) {
  const Complex gen = gauge_lattice_generator(kTheta);
  EXPECT_NEAR(gen.imag(), 2.0 * kPi / kTheta, 1e-12);

  const GaugeReport zero = classify_tau(0.0, 0.0, kTheta);
  EXPECT_TRUE(zero.gaugeable);
  EXPECT_EQ(zero.lattice_distance, 0.0);

  const GaugeReport shifted = classify_tau(Complex(0.7, -0.4), Complex(0.7, -0.4) + gen * Complex(2.0, 3.0), kTheta);
  EXPECT_TRUE(shifted.gaugeable);
  EXPECT_EQ(shifted.nearest_point, std::make_pair(2, 3));
  EXPECT_LT(shifted.lattice_distance, 1e-12);

  const GaugeReport off = classify_tau(0.0, 1.0, kTheta);
  EXPECT_FALSE(off.gaugeable);
  EXPECT_NEAR(off.lattice_distance, 1.0, 1e-15);

  // half a generator in each direction is the worst case
  const GaugeReport half = classify_tau(0.0, gen * Complex(0.5, 0.5), kTheta);
  EXPECT_NEAR(half.lattice_distance, std::abs(gen) / std::sqrt(2.0), 1e-12);

  const GaugeReport quarter = classify_tau(0.0, kPi * kI / 2.0, kTheta);
  EXPECT_FALSE(quarter.gaugeable);
}

TEST(Config, ResolutionIsDeterministic) {
  const ModuleVector eta(gaussian(0.0, kTheta));
  const Resolution a = resolve(eta, PipelineConfig{});
  const Resolution b = resolve(eta, PipelineConfig{});
  EXPECT_EQ(a.radius_a, b.radius_a);
  EXPECT_EQ(a.radius_b, b.radius_b);
  EXPECT_EQ(a.quad.half_width, b.quad.half_width);
  EXPECT_LE(a.tail_b, 1e-12);
  const PipelineConfig fixed = resolve_config(eta, PipelineConfig{});
  EXPECT_FALSE(fixed.auto_quadrature);
  EXPECT_EQ(resolve_config(eta, fixed).radius_a, fixed.radius_a);
}

TEST(Config, UnreachableTolerancesAreReported) {
  PipelineConfig config;
  config.tol.normalize = 1e-30;
  EXPECT_THROW(normalize(ModuleVector(gaussian(0.0, kTheta)), config), FrameError);
  PipelineConfig unresolved;
  unresolved.radius_a = 0;
  EXPECT_THROW(wexler_raz_residual(ModuleVector(hyperbolic_secant()), ModuleVector(hyperbolic_secant()), unresolved),
               std::invalid_argument);
}
