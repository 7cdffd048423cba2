#include "ncsoliton/windows.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace ncsoliton {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

constexpr double kEnvelopeFloor = 1e-16;
// ln(1e16)
constexpr double kLogFloor = 36.841361487904734;

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder) {
    throw std::invalid_argument("derivative order " + std::to_string(order) + " not supported");
  }
}

// ---------------------------------------------------------------------------
// Gaussian: exp(P(t)) with P(t) = log C - πt²/θ - iλt.

class GaussianWindow final : public detail::WindowImpl {
 public:
  GaussianWindow(Complex lambda, double theta) : lambda_(lambda), theta_(theta) {
    if (!(theta > 0.0 && theta < 1.0)) {
      throw std::invalid_argument("gaussian: theta must lie in (0, 1)");
    }
    const double b = lambda.imag();
    norm_ = std::pow(2.0 / theta, 0.25) * std::exp(-b * b * theta / (4.0 * kPi));
    const double a = kPi / theta;
    const double c = std::log(norm_) + kLogFloor;
    support_ = (std::abs(b) + std::sqrt(b * b + 4.0 * a * std::max(c, 0.0))) / (2.0 * a);
  }

  Complex value(double t, int order) const override {
    check_order(order);
    const Complex g = norm_ * std::exp(Complex(-kPi * t * t / theta_, 0.0) - kI * lambda_ * t);
    if (order == 0) return g;
    const Complex p1 = -2.0 * kPi * t / theta_ - kI * lambda_;
    const double p2 = -2.0 * kPi / theta_;
    // g^(k+1) = P' g^(k) + k P'' g^(k-1)
    Complex prev = g;
    Complex cur = p1 * g;
    for (int k = 1; k < order; ++k) {
      const Complex next = p1 * cur + static_cast<double>(k) * p2 * prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }

  double envelope(double t, int order) const override {
    check_order(order);
    const double e0 = norm_ * std::exp(-kPi * t * t / theta_ + lambda_.imag() * t);
    const double p1 = std::abs(-2.0 * kPi * t / theta_ - kI * lambda_);
    const double p2 = 2.0 * kPi / theta_;
    double prev = e0;
    double cur = order == 0 ? e0 : p1 * e0;
    for (int k = 1; k < order; ++k) {
      const double next = p1 * cur + k * p2 * prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }

  double support_radius() const override { return support_; }
  int smoothness() const override { return kSmooth; }
  WindowFamily family() const override { return WindowFamily::Gaussian; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "gaussian(lambda=" << lambda_.real() << (lambda_.imag() < 0 ? "" : "+") << lambda_.imag()
       << "i, theta=" << theta_ << ")";
    return os.str();
  }

  Complex lambda() const { return lambda_; }
  double theta() const { return theta_; }
  double norm_constant() const { return norm_; }

 private:
  Complex lambda_;
  double theta_;
  double norm_;
  double support_;
};

// ---------------------------------------------------------------------------

class SecantWindow final : public detail::WindowImpl {
 public:
  Complex value(double t, int order) const override {
    check_order(order);
    const double x = kPi * t;
    const double e = std::exp(-2.0 * std::abs(x));
    const double sech = 2.0 * std::exp(-std::abs(x)) / (1.0 + e);
    const double tanh = std::copysign((1.0 - e) / (1.0 + e), x);
    const double s = kScale * sech;
    switch (order) {
      case 0:
        return s;
      case 1:
        return -kPi * tanh * s;
      case 2:
        return kPi * kPi * s * (tanh * tanh - sech * sech);
      default:
        // d/dt [π² s (τ² - σ²)] with τ' = πσ², σ' = -πτσ
        return kPi * kPi * kPi * s * tanh * (5.0 * sech * sech - tanh * tanh);
    }
  }

  double envelope(double t, int order) const override {
    check_order(order);
    // sech(x) ≤ 2e^{-|x|}, |τ| ≤ 1, |τ² - σ²| ≤ 1, |τ(5σ² - τ²)| ≤ 5
    static constexpr std::array<double, 4> factor{1.0, 1.0, 1.0, 5.0};
    return factor[order] * std::pow(kPi, order) * kScale * 2.0 * std::exp(-kPi * std::abs(t));
  }

  double support_radius() const override { return (std::log(2.0 * kScale) + kLogFloor) / kPi; }
  int smoothness() const override { return kSmooth; }
  WindowFamily family() const override { return WindowFamily::HyperbolicSecant; }
  std::string describe() const override { return "hyperbolic_secant"; }

 private:
  static inline const double kScale = std::sqrt(kPi / 2.0);
};

// ---------------------------------------------------------------------------
// Totally positive, gauss == 0: Σ_j A_j E_j(t), E_j the one-sided exponential
// with transform 1/(1 + 2πiδ_j ω).

class ExactTotallyPositive final : public detail::WindowImpl {
 public:
  explicit ExactTotallyPositive(TotallyPositiveParams params) : params_(std::move(params)) {
    const auto& d = params_.deltas;
    weights_.resize(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) {
      double w = 1.0;
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (k == j) continue;
        const double gap = d[j] - d[k];
        if (std::abs(gap) < 1e-8 * std::max(std::abs(d[j]), std::abs(d[k]))) {
          throw std::invalid_argument(
              "totally_positive: repeated deltas need a Gaussian factor (gauss > 0)");
        }
        w *= d[j] / gap;
      }
      weights_[j] = w;
    }
    double slowest = 0.0;
    double mass = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      slowest = std::max(slowest, std::abs(d[j]));
      mass += std::abs(weights_[j]) / std::abs(d[j]);
    }
    support_ = slowest * (std::log(std::max(mass, 1.0)) + kLogFloor);
  }

  Complex value(double t, int order) const override {
    check_order(order);
    const auto& d = params_.deltas;
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double dj = d[j];
      double side = 0.0;
      if (t == 0.0) {
        side = 0.5;
      } else if ((t > 0.0) == (dj > 0.0)) {
        side = 1.0;
      }
      if (side == 0.0) continue;
      const double e = std::exp(-t / dj) / std::abs(dj);
      total += side * weights_[j] * std::pow(-1.0 / dj, order) * e;
    }
    return total;
  }

  double envelope(double t, int order) const override {
    check_order(order);
    const auto& d = params_.deltas;
    double total = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) {
      const double dj = d[j];
      if (t != 0.0 && (t > 0.0) != (dj > 0.0)) continue;
      total += std::abs(weights_[j]) * std::pow(1.0 / std::abs(dj), order + 1) *
               std::exp(-std::abs(t) / std::abs(dj));
    }
    return total;
  }

  double support_radius() const override { return support_; }
  int smoothness() const override { return static_cast<int>(params_.deltas.size()) - 2; }
  WindowFamily family() const override { return WindowFamily::TotallyPositive; }
  std::string describe() const override { return describe_tp(params_); }

  static std::string describe_tp(const TotallyPositiveParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << "totally_positive(deltas=[";
    for (std::size_t j = 0; j < p.deltas.size(); ++j) os << (j ? "," : "") << p.deltas[j];
    os << "], gauss=" << p.gauss << ", shift=" << p.shift << ")";
    return os.str();
  }

 private:
  TotallyPositiveParams params_;
  std::vector<double> weights_;
  double support_ = 0.0;
};

// ---------------------------------------------------------------------------
// Totally positive, gauss > 0: inverse transform of the frequency-side form on a
// 2^16-point grid, with 8-point Lagrange interpolation in time.

class SpectralTotallyPositive final : public detail::WindowImpl {
 public:
  static constexpr int kGrid = 1 << 16;
  static constexpr int kStencil = 8;

  explicit SpectralTotallyPositive(TotallyPositiveParams params) : params_(std::move(params)) {
    const double delta = params_.gauss;
    const double shift = params_.shift;
    double slowest = 0.0;
    for (double dj : params_.deltas) slowest = std::max(slowest, std::abs(dj));
    const double sigma = std::sqrt(delta / 2.0) / kPi;
    half_period_ = std::max(16.0, 42.0 * slowest + 12.0 * sigma + 4.0);
    const double period = 2.0 * half_period_;
    const double dw = 1.0 / period;
    dt_ = period / kGrid;
    const double band = 0.5 * kGrid * dw;
    const double centre = std::abs(shift) / (2.0 * delta);
    const double needed = centre + std::sqrt((kLogFloor + 4.0 + shift * shift / (4.0 * delta)) / delta);
    if (band < needed) {
      throw std::invalid_argument("totally_positive: frequency band too narrow for the Gaussian factor");
    }

    std::vector<Complex> spectrum(kGrid);
    for (int k = 0; k < kGrid; ++k) spectrum[k] = transform((k - kGrid / 2) * dw);

    // Under-resolution check: the sampled Parseval sum on the fine and on the
    // 2x-coarsened frequency grid must agree.
    double fine = 0.0;
    double coarse = 0.0;
    for (int k = 0; k < kGrid; ++k) {
      const double p = std::norm(spectrum[k]);
      fine += p * dw;
      if (k % 2 == 0) coarse += p * 2.0 * dw;
    }
    parseval_mismatch_ = std::abs(fine - coarse) / fine;
    if (parseval_mismatch_ > 1e-8) {
      throw std::invalid_argument("totally_positive: grid under-resolved (Parseval mismatch " +
                                  sci(parseval_mismatch_) + ")");
    }

    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<Complex> in(kGrid);
    for (int order = 0; order <= kMaxDerivativeOrder; ++order) {
      for (int k = 0; k < kGrid; ++k) {
        const double w = (k - kGrid / 2) * dw;
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        in[k] = sign * std::pow(2.0 * kPi * kI * w, order) * spectrum[k];
      }
      std::vector<Complex> out;
      fft.inv(out, in);
      auto& samples = samples_[order];
      samples.resize(kGrid);
      for (int j = 0; j < kGrid; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        samples[j] = sign * dw * out[j];
      }
      build_envelope(order);
    }

    support_ = 0.0;
    for (int j = 0; j < kGrid; ++j) {
      if (std::abs(samples_[0][j]) >= kEnvelopeFloor) {
        support_ = std::max(support_, std::abs(time(j)) + dt_);
      }
    }
  }

  Complex transform(double w) const {
    Complex v = std::exp(Complex(-params_.gauss * w * w - params_.shift * w, 0.0));
    for (double dj : params_.deltas) v /= (1.0 + 2.0 * kPi * kI * dj * w);
    return v;
  }

  Complex value(double t, int order) const override {
    check_order(order);
    const double u = (t + half_period_) / dt_;
    const int j0 = static_cast<int>(std::floor(u));
    if (j0 - 3 < 0 || j0 + 4 >= kGrid) return 0.0;
    const double s = u - j0;
    const auto& samples = samples_[order];
    Complex total = 0.0;
    for (int a = -3; a <= 4; ++a) {
      double w = 1.0;
      for (int b = -3; b <= 4; ++b) {
        if (b != a) w *= (s - b) / static_cast<double>(a - b);
      }
      total += w * samples[j0 + a];
    }
    return total;
  }

  double envelope(double t, int order) const override {
    check_order(order);
    const double u = (t + half_period_) / dt_;
    if (u < 0.0 || u >= kGrid - 1) return 0.0;
    const int j = static_cast<int>(std::floor(u));
    const auto& env = envelope_[order];
    const int centre = kGrid / 2;
    // outward-looking maximum over the whole interpolation stencil, times a bound on the
    // Lebesgue constant of the 8-point stencil in its central cell
    const double e = t >= 0.0 ? env[std::max(j - 3, centre)] : env[std::min(j + 4, centre)];
    return 2.0 * e + 1e-300;
  }

  double support_radius() const override { return support_; }
  int smoothness() const override { return kSmooth; }
  WindowFamily family() const override { return WindowFamily::TotallyPositive; }
  std::string describe() const override { return ExactTotallyPositive::describe_tp(params_); }

 private:
  double time(int j) const { return (j - kGrid / 2) * dt_; }

  void build_envelope(int order) {
    auto& env = envelope_[order];
    const auto& samples = samples_[order];
    env.assign(kGrid, 0.0);
    const int centre = kGrid / 2;
    double running = 0.0;
    for (int j = kGrid - 1; j >= centre; --j) {
      running = std::max(running, std::abs(samples[j]));
      env[j] = running;
    }
    running = 0.0;
    for (int j = 0; j <= centre; ++j) {
      running = std::max(running, std::abs(samples[j]));
      env[j] = running;
    }
    // the cells adjacent to the origin see both sides
    env[centre] = std::max(env[centre], env[centre - 1]);
  }

  TotallyPositiveParams params_;
  double half_period_ = 0.0;
  double dt_ = 0.0;
  double support_ = 0.0;
  double parseval_mismatch_ = 0.0;
  std::array<std::vector<Complex>, kMaxDerivativeOrder + 1> samples_;
  std::array<std::vector<double>, kMaxDerivativeOrder + 1> envelope_;
};

}  // namespace

const char* to_string(WindowFamily family) {
  switch (family) {
    case WindowFamily::Gaussian:
      return "gaussian";
    case WindowFamily::HyperbolicSecant:
      return "sech";
    case WindowFamily::TotallyPositive:
      return "tp";
  }
  return "unknown";
}

Window gaussian(Complex lambda, double theta) {
  return Window(std::make_shared<GaussianWindow>(lambda, theta));
}

Window hyperbolic_secant() { return Window(std::make_shared<SecantWindow>()); }

Window totally_positive(const TotallyPositiveParams& params) {
  if (params.deltas.size() < 2) {
    throw std::invalid_argument("totally_positive: finite type M >= 2 required");
  }
  for (double dj : params.deltas) {
    if (dj == 0.0 || !std::isfinite(dj)) {
      throw std::invalid_argument("totally_positive: deltas must be finite and non-zero");
    }
  }
  if (params.gauss < 0.0) throw std::invalid_argument("totally_positive: gauss must be >= 0");
  if (params.gauss == 0.0) {
    if (params.shift != 0.0) {
      throw std::invalid_argument("totally_positive: a shift requires a Gaussian factor");
    }
    return Window(std::make_shared<ExactTotallyPositive>(params));
  }
  return Window(std::make_shared<SpectralTotallyPositive>(params));
}

bool is_boundary_type(const TotallyPositiveParams& params) { return params.deltas.size() == 2; }

GaussianParams gaussian_params(const Window& w) {
  const auto* g = dynamic_cast<const GaussianWindow*>(&w.impl());
  if (g == nullptr) throw std::invalid_argument("window is not a Gaussian");
  return {g->lambda(), g->theta(), g->norm_constant()};
}

Complex closed_form_gaussian_stft(const Window& f, const Window& g, double x, double omega) {
  const GaussianParams pf = gaussian_params(f);
  const GaussianParams pg = gaussian_params(g);
  const double af = kPi / pf.theta;
  const double ag = kPi / pg.theta;
  const Complex lg = std::conj(pg.lambda);
  // ∫ exp(-A t² + B t + C0) dt = sqrt(π/A) exp(B²/4A + C0)
  const double A = af + ag;
  const Complex B = -kI * pf.lambda - 2.0 * kPi * kI * omega + 2.0 * ag * x + kI * lg;
  const Complex C0 = -ag * x * x - kI * lg * x;
  return pf.norm_constant * pg.norm_constant * std::sqrt(kPi / A) * std::exp(B * B / (4.0 * A) + C0);
}

}  // namespace ncsoliton
