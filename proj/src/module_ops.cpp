#include "ncsoliton/module_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <tuple>

namespace ncsoliton {

namespace detail {

struct SampleCache {
  std::mutex mutex;
  std::map<std::tuple<double, int, int, int>, Eigen::VectorXcd> entries;
};

}  // namespace detail

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

constexpr int kPanel = 16;

void check_order(int order) {
  if (order < 0 || order > kMaxDerivativeOrder) {
    throw std::invalid_argument("derivative order " + std::to_string(order) + " not supported");
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre(int n) {
  // Golub–Welsch
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Eigen::VectorXd w = 2.0 * solver.eigenvectors().row(0).transpose().array().square();
  return {solver.eigenvalues(), w};
}

QuadratureGrid build_grid(const QuadratureSpec& spec) {
  if (!(spec.half_width > 0.0) || spec.nodes < 2) {
    throw std::invalid_argument("quadrature: need half_width > 0 and at least 2 nodes");
  }
  QuadratureGrid g;
  const double T = spec.half_width;
  if (spec.rule == QuadratureRule::Trapezoid) {
    const int n = spec.nodes;
    const double h = 2.0 * T / n;
    g.t = Eigen::VectorXd::LinSpaced(n + 1, -T, T);
    g.w = Eigen::VectorXd::Constant(n + 1, h);
    g.w(0) = g.w(n) = 0.5 * h;
    return g;
  }
  const int panels = std::max(2, spec.nodes / kPanel + (spec.nodes / kPanel) % 2);
  const auto [x, w] = gauss_legendre(kPanel);
  const double width = 2.0 * T / panels;
  g.t.resize(panels * kPanel);
  g.w.resize(panels * kPanel);
  for (int p = 0; p < panels; ++p) {
    const double mid = -T + (p + 0.5) * width;
    for (int k = 0; k < kPanel; ++k) {
      g.t(p * kPanel + k) = mid + 0.5 * width * x(k);
      g.w(p * kPanel + k) = 0.5 * width * w(k);
    }
  }
  return g;
}

// Trapezoid is only spectrally accurate for smooth integrands.
QuadratureSpec effective(const QuadratureSpec& q, int smoothness) {
  if (q.rule == QuadratureRule::Trapezoid && smoothness < 4) {
    QuadratureSpec gl = q;
    gl.rule = QuadratureRule::GaussLegendre;
    gl.nodes = 2 * q.nodes;
    return gl;
  }
  return q;
}

// ∫_{|t| > T} env_f(t) env_g(t - x) dt, coarse trapezoid.
double tail_bound(const ModuleVector& f, const ModuleVector& g, double x, double T) {
  const double reach = std::max(f.support_radius(), g.support_radius() + std::abs(x)) + 2.0;
  if (reach <= T) return 0.0;
  const double h = 0.02;
  const int steps = static_cast<int>(std::ceil((reach - T) / h));
  double total = 0.0;
  for (int side = -1; side <= 1; side += 2) {
    for (int i = 0; i <= steps; ++i) {
      const double t = side * (T + i * h);
      const double wgt = (i == 0 || i == steps) ? 0.5 * h : h;
      total += wgt * f.envelope(t) * g.envelope(t - x);
    }
  }
  return total;
}

void check_tails(const ModuleVector& f, const ModuleVector& g, const std::vector<double>& xs,
                 const QuadratureSpec& q) {
  for (double x : xs) {
    const double tail = tail_bound(f, g, x, q.half_width);
    if (tail > q.tol) {
      throw QuadratureError("quadrature tail bound " + sci(tail) + " at shift " +
                            sci(x) + " exceeds tolerance");
    }
  }
}

// ---------------------------------------------------------------------------

class WindowNode final : public detail::VectorNode {
 public:
  explicit WindowNode(Window w) : window_(std::move(w)) {}

  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const override {
    check_order(order);
    Eigen::VectorXcd out(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) out(i) = window_.value(t(i), order);
    return out;
  }
  double envelope(double t, int order) const override { return window_.envelope(t, order); }
  double support_radius() const override { return window_.support_radius(); }
  int smoothness() const override { return window_.smoothness(); }

 private:
  Window window_;
};

// Σ_groups f(t - x) Σ_k c_k e^{2πit(ω0 + k dω)}
struct ShiftGroup {
  double x = 0.0;
  double omega0 = 0.0;
  double domega = 0.0;
  Eigen::VectorXcd coeffs;
};

class TfNode final : public detail::VectorNode {
 public:
  TfNode(ModuleVector base, std::vector<ShiftGroup> groups)
      : base_(std::move(base)), groups_(std::move(groups)) {
    for (const auto& g : groups_) {
      std::array<Eigen::VectorXcd, kMaxDerivativeOrder + 1> weighted;
      std::array<double, kMaxDerivativeOrder + 1> mass{};
      for (int j = 0; j <= kMaxDerivativeOrder; ++j) {
        weighted[j].resize(g.coeffs.size());
        for (Eigen::Index k = 0; k < g.coeffs.size(); ++k) {
          const Complex freq = 2.0 * kPi * kI * (g.omega0 + k * g.domega);
          weighted[j](k) = g.coeffs(k) * std::pow(freq, j);
        }
        mass[j] = weighted[j].cwiseAbs().sum();
      }
      weighted_.push_back(std::move(weighted));
      mass_.push_back(mass);
      reach_ = std::max(reach_, std::abs(g.x));
    }
  }

  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const override {
    check_order(order);
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(t.size());
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const ShiftGroup& g = groups_[gi];
      const Eigen::VectorXd ts = t.array() - g.x;
      std::array<Eigen::VectorXcd, kMaxDerivativeOrder + 1> base;
      for (int j = 0; j <= order; ++j) base[j] = base_.sample(ts, j);
      const Eigen::Index K = g.coeffs.size();
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        const Complex z = std::polar(1.0, 2.0 * kPi * std::remainder(t(i) * g.domega, 1.0));
        const Complex lead = std::polar(1.0, 2.0 * kPi * std::remainder(t(i) * g.omega0, 1.0));
        Complex acc = 0.0;
        for (int j = 0; j <= order; ++j) {
          const Eigen::VectorXcd& c = weighted_[gi][j];
          Complex poly = 0.0;
          for (Eigen::Index k = K - 1; k >= 0; --k) poly = poly * z + c(k);
          acc += binomial(order, j) * base[order - j](i) * poly;
        }
        out(i) += lead * acc;
      }
    }
    return out;
  }

  double envelope(double t, int order) const override {
    check_order(order);
    double total = 0.0;
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      for (int j = 0; j <= order; ++j) {
        total += binomial(order, j) * base_.envelope(t - groups_[gi].x, order - j) * mass_[gi][j];
      }
    }
    return total;
  }

  double support_radius() const override { return base_.support_radius() + reach_; }
  int smoothness() const override { return base_.smoothness(); }

 private:
  ModuleVector base_;
  std::vector<ShiftGroup> groups_;
  std::vector<std::array<Eigen::VectorXcd, kMaxDerivativeOrder + 1>> weighted_;
  std::vector<std::array<double, kMaxDerivativeOrder + 1>> mass_;
  double reach_ = 0.0;
};

class LinearNode final : public detail::VectorNode {
 public:
  explicit LinearNode(std::vector<std::pair<Complex, ModuleVector>> terms)
      : terms_(std::move(terms)) {}

  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const override {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(t.size());
    for (const auto& [c, v] : terms_) out += c * v.sample(t, order);
    return out;
  }
  double envelope(double t, int order) const override {
    double total = 0.0;
    for (const auto& [c, v] : terms_) total += std::abs(c) * v.envelope(t, order);
    return total;
  }
  double support_radius() const override {
    double r = 0.0;
    for (const auto& term : terms_) r = std::max(r, term.second.support_radius());
    return r;
  }
  int smoothness() const override {
    int s = kSmooth;
    for (const auto& term : terms_) s = std::min(s, term.second.smoothness());
    return s;
  }

 private:
  std::vector<std::pair<Complex, ModuleVector>> terms_;
};

// (2πi t/θ) f
class MultiplierNode final : public detail::VectorNode {
 public:
  MultiplierNode(ModuleVector base, double theta) : base_(std::move(base)), theta_(theta) {}

  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const override {
    check_order(order);
    Eigen::VectorXcd out = t.cast<Complex>().cwiseProduct(base_.sample(t, order));
    if (order > 0) out += static_cast<double>(order) * base_.sample(t, order - 1);
    return (2.0 * kPi * kI / theta_) * out;
  }
  double envelope(double t, int order) const override {
    double e = std::abs(t) * base_.envelope(t, order);
    if (order > 0) e += order * base_.envelope(t, order - 1);
    return 2.0 * kPi / theta_ * e;
  }
  double support_radius() const override { return base_.support_radius() + 1.0; }
  int smoothness() const override { return base_.smoothness(); }

 private:
  ModuleVector base_;
  double theta_;
};

class DerivativeNode final : public detail::VectorNode {
 public:
  explicit DerivativeNode(ModuleVector base) : base_(std::move(base)) {}

  Eigen::VectorXcd sample(const Eigen::VectorXd& t, int order) const override {
    check_order(order + 1);
    return base_.sample(t, order + 1);
  }
  double envelope(double t, int order) const override {
    check_order(order + 1);
    return base_.envelope(t, order + 1);
  }
  double support_radius() const override { return base_.support_radius(); }
  int smoothness() const override { return std::max(0, base_.smoothness() - 1); }

 private:
  ModuleVector base_;
};

ModuleVector linear(std::vector<std::pair<Complex, ModuleVector>> terms) {
  return ModuleVector(std::make_shared<LinearNode>(std::move(terms)));
}

}  // namespace

const char* to_string(QuadratureRule rule) {
  return rule == QuadratureRule::Trapezoid ? "trapezoid" : "gauss_legendre";
}

const QuadratureGrid& quadrature_grid(const QuadratureSpec& spec) {
  static std::mutex mutex;
  static std::map<std::tuple<double, int, int>, std::unique_ptr<QuadratureGrid>> grids;
  const auto key = std::make_tuple(spec.half_width, spec.nodes, static_cast<int>(spec.rule));
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = grids[key];
  if (!slot) slot = std::make_unique<QuadratureGrid>(build_grid(spec));
  return *slot;
}

// ---------------------------------------------------------------------------

ModuleVector::ModuleVector(Window window)
    : ModuleVector(std::make_shared<WindowNode>(std::move(window))) {}

ModuleVector::ModuleVector(std::shared_ptr<const detail::VectorNode> node)
    : node_(std::move(node)), cache_(std::make_shared<detail::SampleCache>()) {}

Complex ModuleVector::value(double t, int order) const {
  return node_->sample(Eigen::VectorXd::Constant(1, t), order)(0);
}

Eigen::VectorXcd ModuleVector::sample(const Eigen::VectorXd& t, int order) const {
  return node_->sample(t, order);
}

const Eigen::VectorXcd& ModuleVector::sample(const QuadratureSpec& q, int order) const {
  const auto key = std::make_tuple(q.half_width, q.nodes, static_cast<int>(q.rule), order);
  std::lock_guard<std::mutex> lock(cache_->mutex);
  auto it = cache_->entries.find(key);
  if (it == cache_->entries.end()) {
    it = cache_->entries.emplace(key, node_->sample(quadrature_grid(q).t, order)).first;
  }
  return it->second;
}

ModuleVector operator+(const ModuleVector& f, const ModuleVector& g) {
  return linear({{1.0, f}, {1.0, g}});
}

ModuleVector operator-(const ModuleVector& f, const ModuleVector& g) {
  return linear({{1.0, f}, {-1.0, g}});
}

ModuleVector operator*(Complex scalar, const ModuleVector& f) { return linear({{scalar, f}}); }

ModuleVector shifted(const ModuleVector& f, Point z, Complex c) {
  ShiftGroup g{z.x, z.omega, 0.0, Eigen::VectorXcd::Constant(1, c)};
  return ModuleVector(std::make_shared<TfNode>(f, std::vector<ShiftGroup>{g}));
}

// ---------------------------------------------------------------------------

Complex l2_inner(const ModuleVector& f, const ModuleVector& g, const QuadratureSpec& q) {
  return stft(f, g, 0.0, 0.0, q);
}

double l2_norm(const ModuleVector& f, const QuadratureSpec& q) {
  return std::sqrt(std::max(0.0, l2_inner(f, f, q).real()));
}

Complex stft(const ModuleVector& f, const ModuleVector& g, double x, double omega,
             const QuadratureSpec& q) {
  return stft_grid(f, g, {x}, {omega}, q)(0, 0);
}

Eigen::MatrixXcd stft_grid(const ModuleVector& f, const ModuleVector& g,
                           const std::vector<double>& xs, const std::vector<double>& omegas,
                           const QuadratureSpec& q_in) {
  const QuadratureSpec q = effective(q_in, std::min(f.smoothness(), g.smoothness()));
  check_tails(f, g, xs, q);
  const QuadratureGrid& grid = quadrature_grid(q);
  const Eigen::Index N = grid.t.size();
  const Eigen::VectorXcd fw = f.sample(q).cwiseProduct(grid.w.cast<Complex>());

  Eigen::MatrixXcd H(N, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Eigen::VectorXd ts = grid.t.array() - xs[i];
    H.col(i) = fw.cwiseProduct(g.sample(ts).conjugate());
  }
  Eigen::MatrixXcd E(static_cast<Eigen::Index>(omegas.size()), N);
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    for (Eigen::Index k = 0; k < N; ++k) {
      E(j, k) = std::polar(1.0, -2.0 * kPi * std::remainder(grid.t(k) * omegas[j], 1.0));
    }
  }
  return (E * H).transpose();
}

AlgebraElement inner_A(const ModuleVector& f, const ModuleVector& g, double theta, int radius,
                       const QuadratureSpec& q) {
  const LatticeSpec lattice(theta, Side::Primal);
  std::vector<double> xs, omegas;
  for (int k = -radius; k <= radius; ++k) {
    xs.push_back(lattice.point(k, 0).x);
    omegas.push_back(lattice.point(0, k).omega);
  }
  return AlgebraElement(lattice, radius, stft_grid(f, g, xs, omegas, q));
}

AlgebraElement inner_B(const ModuleVector& f, const ModuleVector& g, double theta, int radius,
                       const QuadratureSpec& q) {
  const LatticeSpec lattice(theta, Side::Dual);
  std::vector<double> xs, omegas;
  for (int k = -radius; k <= radius; ++k) {
    xs.push_back(lattice.point(k, 0).x);
    omegas.push_back(lattice.point(0, k).omega);
  }
  // ⟨π(λ°)g, f⟩ = conj⟨f, π(λ°)g⟩
  return AlgebraElement(lattice, radius, stft_grid(f, g, xs, omegas, q).conjugate() / theta);
}

ModuleVector act_A(const AlgebraElement& a, const ModuleVector& f) {
  if (a.lattice().side() != Side::Primal) throw AlgebraError("act_A: element is not in A");
  const int R = a.radius();
  std::vector<ShiftGroup> groups;
  for (int m = -R; m <= R; ++m) {
    Eigen::VectorXcd c = a.coefficients().row(m + R).transpose();
    if (c.isZero(0.0)) continue;
    groups.push_back({a.lattice().point(m, 0).x, -static_cast<double>(R), 1.0, std::move(c)});
  }
  return ModuleVector(std::make_shared<TfNode>(f, std::move(groups)));
}

ModuleVector act_B(const ModuleVector& f, const AlgebraElement& b) {
  if (b.lattice().side() != Side::Dual) throw AlgebraError("act_B: element is not in B");
  const int R = b.radius();
  const double theta = b.lattice().theta();
  std::vector<ShiftGroup> groups;
  for (int m = -R; m <= R; ++m) {
    Eigen::VectorXcd c(2 * R + 1);
    for (int n = -R; n <= R; ++n) {
      // π*(m, n/θ) f(t) = e^{-2πimn/θ} e^{-2πitn/θ} f(t + m)
      const double phase = std::remainder(static_cast<double>(m) * n / theta, 1.0);
      c(n + R) = b(m, n) * std::polar(1.0, -2.0 * kPi * phase);
    }
    if (c.isZero(0.0)) continue;
    groups.push_back({-static_cast<double>(m), R / theta, -1.0 / theta, std::move(c)});
  }
  return ModuleVector(std::make_shared<TfNode>(f, std::move(groups)));
}

ModuleVector nabla(const ModuleVector& f, Connection which, double theta) {
  const ModuleVector d1(std::make_shared<MultiplierNode>(f, theta));
  const ModuleVector d2(std::make_shared<DerivativeNode>(f));
  switch (which) {
    case Connection::One:
      return d1;
    case Connection::Two:
      return d2;
    case Connection::Bar:
      return linear({{1.0, d1}, {kI, d2}});
    case Connection::Holo:
      return linear({{1.0, d1}, {-kI, d2}});
  }
  throw std::invalid_argument("nabla: unknown connection");
}

QuadratureSpec resolve_quadrature(const ModuleVector& f, const ModuleVector& g, double max_shift,
                                  QuadratureSpec base, double max_half_width) {
  while (true) {
    bool ok = true;
    for (double x = -max_shift; x <= max_shift + 1e-12 && ok; x += 0.5) {
      ok = tail_bound(f, g, x, base.half_width) <= base.tol;
    }
    if (ok) return base;
    if (base.half_width + 4.0 > max_half_width) {
      throw QuadratureError("resolve_quadrature: tails exceed tolerance up to half width " +
                            sci(base.half_width));
    }
    base.half_width += 4.0;
  }
}

RadiusChoice resolve_radius(const ModuleVector& f, const ModuleVector& g, const LatticeSpec& lattice,
                            const QuadratureSpec& q, double rel_tol, int min_radius,
                            int max_radius) {
  int probe = std::min(max_radius, std::max(min_radius + 4, 8));
  while (true) {
    const AlgebraElement a = lattice.side() == Side::Primal
                                 ? inner_A(f, g, lattice.theta(), probe, q)
                                 : inner_B(f, g, lattice.theta(), probe, q);
    std::vector<double> ring(probe + 1, 0.0);
    for (int m = -probe; m <= probe; ++m) {
      for (int n = -probe; n <= probe; ++n) {
        ring[std::max(std::abs(m), std::abs(n))] += std::abs(a(m, n));
      }
    }
    const double total = a.l1_norm();
    std::vector<double> outside(probe + 1, 0.0);
    for (int r = probe - 1; r >= 0; --r) outside[r] = outside[r + 1] + ring[r + 1];
    for (int r = min_radius; r <= probe - 2; ++r) {
      if (outside[r] <= rel_tol * total) return {r, outside[r] / total};
    }
    if (probe >= max_radius) return {probe, ring[probe] / total};
    probe = std::min(max_radius, 2 * probe);
  }
}

}  // namespace ncsoliton
