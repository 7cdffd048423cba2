#include "ncsoliton/solitons.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ncsoliton {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

constexpr int kFunctionalPad = 4;

void require_radii(const PipelineConfig& config) {
  if (config.radius_a <= 0 || config.radius_b <= 0) {
    throw std::invalid_argument("pipeline radii must be resolved before use");
  }
}

AlgebraElement gram_B(const ModuleVector& eta, const PipelineConfig& config) {
  return inner_B(eta, eta, config.theta, config.radius_b, config.quad);
}

double self_adjointness(const AlgebraElement& a) { return l1_distance(a, involution(a)); }

}  // namespace

Resolution resolve(const ModuleVector& eta, const PipelineConfig& config) {
  Resolution r{config.radius_a, config.radius_b, 0.0, 0.0, config.quad};
  if (r.radius_b <= 0) {
    const RadiusChoice c = resolve_radius(eta, eta, LatticeSpec(config.theta, Side::Dual), r.quad);
    // inverses and square roots of ⟨η,η⟩_B decay more slowly than ⟨η,η⟩_B itself
    r.radius_b = c.radius + kFunctionalPad;
    r.tail_b = c.relative_tail;
  }
  if (!config.auto_quadrature && r.radius_a > 0) return r;

  // The tight window η̃ is what the pipeline integrates; its tails set the quadrature
  // interval and its decay over Λ sets the A radius.
  const AlgebraElement gram = inner_B(eta, eta, config.theta, r.radius_b, r.quad);
  AlgebraElement factor = AlgebraElement::identity(gram.lattice(), gram.radius());
  try {
    factor = inv_sqrt(gram, config.tol.inv_sqrt);
  } catch (const AlgebraError& e) {
    throw FrameError(std::string("resolve: ") + e.what());
  }
  const ModuleVector tilde = act_B(eta, factor);
  if (config.auto_quadrature) {
    r.quad = resolve_quadrature(tilde, tilde, r.radius_b + kFunctionalPad, r.quad);
  }
  if (r.radius_a <= 0) {
    const RadiusChoice c = resolve_radius(tilde, tilde, LatticeSpec(config.theta, Side::Primal), r.quad);
    r.radius_a = c.radius;
    r.tail_a = c.relative_tail;
  }
  return r;
}

PipelineConfig resolve_config(const ModuleVector& eta, PipelineConfig config) {
  if (config.radius_a > 0 && config.radius_b > 0 && !config.auto_quadrature) return config;
  const Resolution r = resolve(eta, config);
  config.radius_a = r.radius_a;
  config.radius_b = r.radius_b;
  config.quad = r.quad;
  config.auto_quadrature = false;
  return config;
}

ModuleVector random_gaussian_mixture(std::mt19937_64& rng, int terms) {
  std::uniform_real_distribution<double> width(0.25, 0.85);
  std::uniform_real_distribution<double> freq(-3.0, 3.0);
  std::normal_distribution<double> normal;
  std::vector<std::pair<Complex, ModuleVector>> parts;
  ModuleVector sum(gaussian(Complex(freq(rng), freq(rng)), width(rng)));
  sum = Complex(normal(rng), normal(rng)) * sum;
  for (int k = 1; k < terms; ++k) {
    const ModuleVector g(gaussian(Complex(freq(rng), freq(rng)), width(rng)));
    sum = sum + Complex(normal(rng), normal(rng)) * g;
  }
  return sum;
}

// ---------------------------------------------------------------------------

FrameReport frame_bounds(const ModuleVector& g, const PipelineConfig& config_in) {
  // Only the B radius is needed here; the rest of the resolution assumes a frame.
  PipelineConfig config = config_in;
  if (config.radius_b <= 0) {
    PipelineConfig probe = config;
    probe.radius_a = 1;
    probe.auto_quadrature = false;
    config.radius_b = resolve(g, probe).radius_b;
  }
  const int R = config.radius_b;
  FrameReport report;
  report.radius_used = R;

  const AlgebraElement gram = gram_B(g, config);
  const SpectralBounds sb = spectral_bounds(gram, R);
  PipelineConfig wider = config;
  wider.radius_b = R + 2;
  const SpectralBounds sb2 = spectral_bounds(gram_B(g, wider), R + 2);

  report.lower = sb.lower;
  report.upper = sb.upper;
  report.invertibility_margin = sb.lower;
  report.drift = std::max(std::abs(sb2.lower - sb.lower), std::abs(sb2.upper - sb.upper));
  report.stable = report.drift < config.tol.frame_drift;
  report.tight = std::abs(sb.upper - sb.lower) <= config.tol.tight;

  // Rayleigh quotients over Λ; the box is generous relative to the decay of V_g f.
  std::mt19937_64 rng(config.seed);
  const int rr = std::max(config.radius_b, 12) + 4;
  std::vector<double> xs, omegas;
  for (int k = -rr; k <= rr; ++k) {
    xs.push_back(k * config.theta);
    omegas.push_back(k);
  }
  report.rayleigh_min = std::numeric_limits<double>::infinity();
  report.rayleigh_max = 0.0;
  const int samples = 20;
  for (int s = 0; s < samples; ++s) {
    const ModuleVector f = random_gaussian_mixture(rng, 1 + s % 3);
    const double energy = stft_grid(f, g, xs, omegas, config.quad).cwiseAbs2().sum();
    const double q = energy / std::norm(l2_norm(f, config.quad));
    report.rayleigh_min = std::min(report.rayleigh_min, q);
    report.rayleigh_max = std::max(report.rayleigh_max, q);
  }
  report.rayleigh_samples = samples;

  const double eps = config.tol.rayleigh_eps;
  if (report.rayleigh_min < report.lower * (1.0 - eps) ||
      report.rayleigh_max > report.upper * (1.0 + eps)) {
    throw FrameError("frame_bounds: Rayleigh quotients [" + sci(report.rayleigh_min) +
                     ", " + sci(report.rayleigh_max) + "] outside spectral bounds [" +
                     sci(report.lower) + ", " + sci(report.upper) + "]");
  }
  report.is_frame = report.lower > config.tol.frame_margin && report.stable;
  return report;
}

Normalization normalize(const ModuleVector& eta, const PipelineConfig& config_in) {
  const PipelineConfig config = resolve_config(eta, config_in);
  const AlgebraElement gram = gram_B(eta, config);
  AlgebraElement factor = AlgebraElement::identity(gram.lattice(), gram.radius());
  try {
    factor = inv_sqrt(gram, config.tol.inv_sqrt);
  } catch (const AlgebraError& e) {
    throw FrameError(std::string("normalize: ") + e.what());
  }
  ModuleVector tilde = act_B(eta, factor);
  const AlgebraElement check = gram_B(tilde, config);
  const double residual = l1_distance(check, AlgebraElement::identity(check.lattice(), check.radius()));
  if (residual > config.tol.normalize) {
    throw FrameError("normalize: tightness residual " + sci(residual) +
                     " exceeds tolerance");
  }
  return {std::move(tilde), std::move(factor), residual};
}

double wexler_raz_residual(const ModuleVector& eta_tilde, const ModuleVector& f,
                           const PipelineConfig& config) {
  require_radii(config);
  const AlgebraElement c = inner_B(eta_tilde, f, config.theta, config.radius_b + 4, config.quad);
  return l2_norm(f - act_B(eta_tilde, c), config.quad);
}

double frame_expansion_residual(const ModuleVector& eta_tilde, const ModuleVector& f,
                                const PipelineConfig& config) {
  require_radii(config);
  const int R = std::max(config.radius_a, 12) + 4;
  const AlgebraElement c = inner_A(f, eta_tilde, config.theta, R, config.quad);
  return l2_norm(f - act_A(c, eta_tilde), config.quad);
}

ProjectionReport rieffel_projection(const ModuleVector& eta, const PipelineConfig& config_in,
                                    bool strict) {
  const PipelineConfig config = resolve_config(eta, config_in);
  Normalization n = normalize(eta, config);
  AlgebraElement p = inner_A(n.vector, n.vector, config.theta, config.radius_a, config.quad);
  ProjectionReport r{p, n.vector, 0.0, 0.0, 0.0, Complex(0.0), {0.0, 0.0}, {0.0, 0.0}, 0.0};
  r.tightness_residual = n.tightness_residual;
  const AlgebraElement pp = p * p;
  r.idempotency = l1_distance(pp, p);
  r.self_adjointness = self_adjointness(p);
  r.trace = trace(p);
  r.tail_norm = pp.tail_norm();
  for (int nu = 0; nu < 2; ++nu) {
    const AlgebraElement dp = derive(p, nu == 0 ? Direction::One : Direction::Two);
    r.killing[nu] = (p * dp * p).l1_norm();
    const Complex lhs = trace(dp * dp);
    const Complex rhs = 2.0 * trace(p * dp * dp);
    r.action_identity[nu] = std::abs(lhs - rhs);
  }
  if (strict && (r.idempotency > config.tol.projection || r.self_adjointness > config.tol.projection)) {
    throw SolitonError("rieffel_projection: idempotency " + sci(r.idempotency) +
                       ", self-adjointness " + sci(r.self_adjointness));
  }
  return r;
}

// ---------------------------------------------------------------------------

double energy(const AlgebraElement& p) {
  const Complex s = trace(d(p) * d_bar(p));
  if (std::abs(s.imag()) >= 1e-8) {
    throw SolitonError("energy: imaginary part " + sci(s.imag()));
  }
  return s.real();
}

double charge(const AlgebraElement& p) {
  const AlgebraElement d1 = derive(p, Direction::One);
  const AlgebraElement d2 = derive(p, Direction::Two);
  const Complex q = trace(p * (d1 * d2 - d2 * d1)) / (2.0 * kPi * kI);
  return q.real();
}

double self_duality_residual(const AlgebraElement& p) { return (d_bar(p) * p).l1_norm(); }

double el_residual(const AlgebraElement& p) {
  const AlgebraElement lap = laplacian(p);
  return (p * lap - lap * p).l1_norm();
}

SolitonReport soliton_report(const AlgebraElement& p) {
  SolitonReport r;
  r.energy = energy(p);
  r.charge = charge(p);
  r.charge_gap = std::abs(r.charge - std::round(r.charge));
  r.bp_gap = r.energy - 4.0 * kPi * std::abs(r.charge);
  r.sd_residual = self_duality_residual(p);
  r.el_residual = el_residual(p);
  r.idempotency = l1_distance(p * p, p);
  return r;
}

// ---------------------------------------------------------------------------

BResult compute_b(const ModuleVector& eta, const PipelineConfig& config_in, bool strict) {
  const PipelineConfig config = resolve_config(eta, config_in);
  const ModuleVector dbar = nabla(eta, Connection::Bar, config.theta);
  const AlgebraElement gram = gram_B(eta, config);
  AlgebraElement b = inverse(gram, config.tol.inverse) *
                     inner_B(eta, dbar, config.theta, config.radius_b, config.quad);
  BResult r{b, 0.0, false};
  r.module_residual = l2_norm(dbar - act_B(eta, b), config.quad);
  r.valid = r.module_residual <= config.tol.module_residual;
  if (strict && !r.valid) {
    throw SolitonError("compute_b: module residual " + sci(r.module_residual) +
                       " exceeds tolerance");
  }
  return r;
}

TauReport tau(const ModuleVector& eta, const PipelineConfig& config_in, bool strict) {
  const PipelineConfig config = resolve_config(eta, config_in);
  TauReport r;
  const BResult b = compute_b(eta, config, false);
  r.algebraic = trace(b.b);
  r.module_residual = b.module_residual;
  const Normalization n = normalize(eta, config);
  r.pairing = l2_inner(nabla(n.vector, Connection::Bar, config.theta), n.vector, config.quad) /
              config.theta;
  r.discrepancy = std::abs(r.algebraic - r.pairing);
  r.raw_pairing = l2_inner(nabla(eta, Connection::Bar, config.theta), eta, config.quad) /
                  l2_inner(eta, eta, config.quad);
  if (strict && r.discrepancy > config.tol.tau_routes) {
    throw SolitonError("tau: routes differ by " + sci(r.discrepancy));
  }
  return r;
}

AlgebraElement gauge_inverse(const AlgebraElement& u, double tol) {
  int nonzero = 0;
  Complex value;
  for (int m = -u.radius(); m <= u.radius(); ++m) {
    for (int n = -u.radius(); n <= u.radius(); ++n) {
      if (u(m, n) != 0.0) {
        ++nonzero;
        value = u(m, n);
      }
    }
  }
  if (nonzero == 1) return involution(u) * (1.0 / std::norm(value));
  return general_inverse(u, tol);
}

GaugeTransform gauge_transform(const ModuleVector& eta, const AlgebraElement& u,
                               const PipelineConfig& config_in) {
  if (u.lattice().side() != Side::Dual) throw AlgebraError("gauge_transform: U must lie in B");
  const PipelineConfig config = resolve_config(eta, config_in);
  const AlgebraElement u_inv = gauge_inverse(u, config.tol.inverse);
  const ModuleVector eta_u = act_B(eta, u);
  const AlgebraElement b = compute_b(eta, config, false).b;
  AlgebraElement b_u = u_inv * b * u + u_inv * d_bar(u);
  GaugeTransform r{eta_u, b_u, 0.0, 0.0, 0.0, 0.0};
  r.law_residual = l1_distance(compute_b(eta_u, config, false).b, b_u);
  const AlgebraElement p = rieffel_projection(eta, config, false).p;
  const AlgebraElement p_u = rieffel_projection(eta_u, config, false).p;
  r.projection_residual = l1_distance(p, p_u);
  r.energy_residual = std::abs(energy(p_u) - energy(p));
  r.charge_residual = std::abs(charge(p_u) - charge(p));
  return r;
}

Complex gauge_lattice_generator(double theta) { return 2.0 * kPi * kI / theta; }

GaugeReport classify_tau(Complex tau_b, Complex lambda, double theta, double tol) {
  GaugeReport r;
  r.tau_b = tau_b;
  r.lambda = lambda;
  r.lattice_generator = gauge_lattice_generator(theta);
  const Complex z = (lambda - tau_b) / r.lattice_generator;
  // the lattice is square, so the nearest of the four neighbours is the rounded point
  double best = std::numeric_limits<double>::infinity();
  const int m0 = static_cast<int>(std::floor(z.real()));
  const int n0 = static_cast<int>(std::floor(z.imag()));
  for (int m = m0; m <= m0 + 1; ++m) {
    for (int n = n0; n <= n0 + 1; ++n) {
      const double dist = std::abs(lambda - tau_b - r.lattice_generator * Complex(m, n));
      if (dist < best) {
        best = dist;
        r.nearest_point = {m, n};
      }
    }
  }
  r.lattice_distance = best;
  r.gaugeable = best <= tol;
  return r;
}

GaugeReport classify_gauge_to_gaussian(const ModuleVector& eta, Complex lambda,
                                       const PipelineConfig& config_in) {
  const PipelineConfig config = resolve_config(eta, config_in);
  const BResult b = compute_b(eta, config, false);
  GaugeReport r = classify_tau(trace(b.b), lambda, config.theta, config.tol.gaugeable);
  r.module_residual = b.module_residual;
  return r;
}

}  // namespace ncsoliton
