// Batch driver: frame, soliton, gauge and report-all over one or more windows.
//
// Exit codes: 0 positive verdict, 2 negative verdict, 1 error.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncsoliton/serialization.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ncsoliton;

namespace {

constexpr int kPositive = 0;
constexpr int kError = 1;
constexpr int kNegative = 2;

struct RunConfig {
  double theta = 0.41421356237309503;
  std::vector<std::string> windows{"gaussian"};
  int radius_a = 0;
  int radius_b = 0;
  QuadratureSpec quad;
  bool auto_quadrature = true;
  Tolerances tol;
  std::string output_dir = ".";
  Complex lambda = 0.0;
  bool has_monomial = false;
  int monomial_m = 0;
  int monomial_n = 0;
  std::string u_file;
  std::vector<std::string> commands{"frame", "soliton", "gauge"};
  std::uint64_t seed = PipelineConfig{}.seed;
  bool dump_window = false;
};

struct Flags {
  std::string config;
  double theta = 0.0;
  std::vector<std::string> windows;
  std::string radius;
  int nodes = 0;
  double half_width = 0.0;
  std::string lambda;
  std::string monomial;
  std::string u_file;
  std::string output_dir;
  bool dump_window = false;
  std::map<std::string, CLI::Option*> given;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  std::size_t used = 0;
  const int v = std::stoi(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad integer '" + s + "'");
  return v;
}

Complex parse_complex(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.empty() || parts.size() > 2) throw std::invalid_argument("expected re[,im], got '" + s + "'");
  return {to_double(parts[0]), parts.size() == 2 ? to_double(parts[1]) : 0.0};
}

std::pair<int, int> parse_pair(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected m,n, got '" + s + "'");
  return {to_int(parts[0]), to_int(parts[1])};
}

void set_radius(RunConfig& rc, const std::string& text) {
  if (text == "auto") {
    rc.radius_a = rc.radius_b = 0;
  } else {
    const int r = to_int(text);
    if (r < 1) throw std::invalid_argument("radius must be positive or 'auto'");
    rc.radius_a = rc.radius_b = r;
  }
}

double* tolerance_slot(Tolerances& t, const std::string& name) {
  static const std::map<std::string, double Tolerances::*> slots = {
      {"frame_margin", &Tolerances::frame_margin}, {"frame_drift", &Tolerances::frame_drift},
      {"rayleigh_eps", &Tolerances::rayleigh_eps}, {"tight", &Tolerances::tight},
      {"normalize", &Tolerances::normalize},       {"projection", &Tolerances::projection},
      {"module_residual", &Tolerances::module_residual},
      {"tau_routes", &Tolerances::tau_routes},     {"gauge", &Tolerances::gauge},
      {"gaugeable", &Tolerances::gaugeable},       {"inverse", &Tolerances::inverse},
      {"inv_sqrt", &Tolerances::inv_sqrt}};
  const auto it = slots.find(name);
  if (it == slots.end()) throw std::invalid_argument("unknown tolerance '" + name + "'");
  return &(t.*(it->second));
}

void apply_json(RunConfig& rc, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "theta") {
      rc.theta = v.get<double>();
    } else if (key == "window") {
      rc.windows = {v.get<std::string>()};
    } else if (key == "windows") {
      rc.windows = v.get<std::vector<std::string>>();
    } else if (key == "radius") {
      if (v.is_string()) {
        set_radius(rc, v.get<std::string>());
      } else if (v.is_object()) {
        rc.radius_a = v.at("a").get<int>();
        rc.radius_b = v.at("b").get<int>();
      } else {
        set_radius(rc, std::to_string(v.get<int>()));
      }
    } else if (key == "quadrature") {
      if (v.is_string()) {
        if (v.get<std::string>() != "auto") throw std::invalid_argument("quadrature must be 'auto' or an object");
        rc.auto_quadrature = true;
        continue;
      }
      for (const auto& [qk, qv] : v.items()) {
        if (qk == "rule") {
          const auto rule = qv.get<std::string>();
          if (rule == "trapezoid") {
            rc.quad.rule = QuadratureRule::Trapezoid;
          } else if (rule == "gauss_legendre") {
            rc.quad.rule = QuadratureRule::GaussLegendre;
          } else {
            throw std::invalid_argument("unknown quadrature rule '" + rule + "'");
          }
        } else if (qk == "half_width") {
          rc.quad.half_width = qv.get<double>();
          rc.auto_quadrature = false;
        } else if (qk == "nodes") {
          rc.quad.nodes = qv.get<int>();
        } else if (qk == "tol") {
          rc.quad.tol = qv.get<double>();
        } else {
          throw std::invalid_argument("unknown quadrature key '" + qk + "'");
        }
      }
    } else if (key == "tolerances") {
      for (const auto& [tk, tv] : v.items()) *tolerance_slot(rc.tol, tk) = tv.get<double>();
    } else if (key == "output_dir") {
      rc.output_dir = v.get<std::string>();
    } else if (key == "lambda") {
      if (v.is_number()) {
        rc.lambda = v.get<double>();
      } else if (v.is_array()) {
        rc.lambda = Complex(v.at(0).get<double>(), v.at(1).get<double>());
      } else {
        rc.lambda = parse_complex(v.get<std::string>());
      }
    } else if (key == "monomial") {
      const auto mn = v.get<std::vector<int>>();
      if (mn.size() != 2) throw std::invalid_argument("monomial must be [m, n]");
      rc.has_monomial = true;
      rc.monomial_m = mn[0];
      rc.monomial_n = mn[1];
    } else if (key == "u_file") {
      rc.u_file = v.get<std::string>();
    } else if (key == "commands") {
      rc.commands = v.get<std::vector<std::string>>();
    } else if (key == "seed") {
      rc.seed = v.get<std::uint64_t>();
    } else if (key == "dump_window") {
      rc.dump_window = v.get<bool>();
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

bool given(const Flags& f, const std::string& name) {
  const auto it = f.given.find(name);
  return it != f.given.end() && it->second->count() > 0;
}

// Precedence: flag, then environment (output directory only), then config file, then defaults.
RunConfig build_config(const Flags& f) {
  RunConfig rc;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::invalid_argument("cannot open config '" + f.config + "'");
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config parse failure: " + std::string(e.what()));
    }
    apply_json(rc, j);
  }
  if (const char* env = std::getenv("NCSOLITON_OUTPUT_DIR"); env != nullptr && *env) rc.output_dir = env;
  if (given(f, "theta")) rc.theta = f.theta;
  if (given(f, "window")) rc.windows = f.windows;
  if (given(f, "radius")) set_radius(rc, f.radius);
  if (given(f, "nodes")) rc.quad.nodes = f.nodes;
  if (given(f, "half-width")) {
    rc.quad.half_width = f.half_width;
    rc.auto_quadrature = false;
  }
  if (given(f, "lambda")) rc.lambda = parse_complex(f.lambda);
  if (given(f, "monomial")) {
    std::tie(rc.monomial_m, rc.monomial_n) = parse_pair(f.monomial);
    rc.has_monomial = true;
  }
  if (given(f, "u-file")) rc.u_file = f.u_file;
  if (given(f, "output-dir")) rc.output_dir = f.output_dir;
  if (f.dump_window) rc.dump_window = true;

  if (!(rc.theta > 0.0 && rc.theta < 1.0)) {
    throw std::invalid_argument("theta must lie in (0, 1)");
  }
  if (rc.windows.empty()) throw std::invalid_argument("no window given");
  if (rc.has_monomial && !rc.u_file.empty()) {
    throw std::invalid_argument("--monomial and --u-file are exclusive");
  }
  if (rc.quad.nodes < 2 || !(rc.quad.half_width > 0.0)) {
    throw std::invalid_argument("quadrature needs nodes >= 2 and half_width > 0");
  }
  for (const auto& c : rc.commands) {
    if (c != "frame" && c != "soliton" && c != "gauge") {
      throw std::invalid_argument("unknown command '" + c + "' in commands");
    }
  }
  return rc;
}

std::string slug(const std::string& text) {
  std::string s;
  for (char c : text) {
    s += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  }
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Everything a command needs about one window, with automatic settings resolved once.
struct Job {
  WindowSpec spec;
  ModuleVector eta;
  PipelineConfig config;
  Resolution resolution;
  fs::path dir;
  std::string name;
};

PipelineConfig pipeline_config(const RunConfig& rc) {
  PipelineConfig pc;
  pc.theta = rc.theta;
  pc.radius_a = rc.radius_a;
  pc.radius_b = rc.radius_b;
  pc.quad = rc.quad;
  pc.auto_quadrature = rc.auto_quadrature;
  pc.tol = rc.tol;
  pc.seed = rc.seed;
  return pc;
}

Provenance provenance(const Job& job, const RunConfig& rc, const std::string& command,
                      double tail_norm_max) {
  Provenance p;
  p.command = command;
  p.window = job.spec.describe();
  p.theta = rc.theta;
  p.radius_a = job.config.radius_a;
  p.radius_b = job.config.radius_b;
  p.radius_auto = rc.radius_a <= 0 || rc.radius_b <= 0;
  p.quad = job.config.quad;
  p.quadrature_auto = rc.auto_quadrature;
  p.tol = rc.tol;
  p.tail_norm_max = tail_norm_max;
  p.seed = rc.seed;
  return p;
}

Job make_job(const RunConfig& rc, const std::string& window) {
  Job job{parse_window_spec(window), ModuleVector(hyperbolic_secant()), pipeline_config(rc), {}, rc.output_dir, ""};
  job.eta = ModuleVector(job.spec.build(rc.theta));
  job.name = slug(job.spec.describe());
  return job;
}

void resolve_job(Job& job) {
  job.resolution = resolve(job.eta, job.config);
  job.config.radius_a = job.resolution.radius_a;
  job.config.radius_b = job.resolution.radius_b;
  job.config.quad = job.resolution.quad;
  job.config.auto_quadrature = false;
}

int run_frame(Job& job, const RunConfig& rc, std::ostream& log) {
  const FrameReport r = frame_bounds(job.eta, job.config);
  // frame_bounds resolves only the B radius; echo what it used
  PipelineConfig echoed = job.config;
  echoed.radius_b = r.radius_used;
  Job shown = job;
  shown.config = echoed;
  write_file(job.dir / ("frame_" + job.name + ".json"),
             frame_report_json(r, provenance(shown, rc, "frame", 0.0)));
  log << "frame " << job.spec.describe() << ": is_frame=" << (r.is_frame ? "true" : "false")
      << " tight=" << (r.tight ? "true" : "false") << " bounds=[" << format_double(r.lower) << ", "
      << format_double(r.upper) << "]\n";
  return r.is_frame ? kPositive : kNegative;
}

int run_soliton(Job& job, const RunConfig& rc, std::ostream& log) {
  if (job.resolution.radius_a == 0) resolve_job(job);
  const ProjectionReport proj = rieffel_projection(job.eta, job.config);
  const SolitonReport s = soliton_report(proj.p);
  const double tails = std::max({job.resolution.tail_a, job.resolution.tail_b, proj.tail_norm});
  write_file(job.dir / ("soliton_" + job.name + ".json"),
             soliton_report_json(s, proj, provenance(job, rc, "soliton", tails)));
  write_file(job.dir / ("soliton_" + job.name + "_heatmap.csv"), heatmap_csv(proj.p));
  const bool self_dual = s.sd_residual <= rc.tol.module_residual;
  log << "soliton " << job.spec.describe() << ": S=" << format_double(s.energy)
      << " Q=" << format_double(s.charge) << " sd_residual=" << format_double(s.sd_residual)
      << " self_dual=" << (self_dual ? "true" : "false") << "\n";
  return self_dual ? kPositive : kNegative;
}

int run_gauge(Job& job, const RunConfig& rc, std::ostream& log) {
  if (job.resolution.radius_a == 0) resolve_job(job);
  const TauReport t = tau(job.eta, job.config, false);
  GaugeReport g = classify_tau(t.algebraic, rc.lambda, rc.theta, rc.tol.gaugeable);
  g.module_residual = t.module_residual;

  GaugeShift shift;
  const bool with_u = rc.has_monomial || !rc.u_file.empty();
  if (with_u) {
    const LatticeSpec dual(rc.theta, Side::Dual);
    AlgebraElement u = AlgebraElement::identity(dual, 0);
    if (rc.has_monomial) {
      shift.m = rc.monomial_m;
      shift.n = rc.monomial_n;
      u = AlgebraElement::monomial(dual, std::max(std::abs(shift.m), std::abs(shift.n)), shift.m, shift.n);
      shift.predicted_shift = -gauge_lattice_generator(rc.theta) * Complex(shift.m, shift.n);
    } else {
      std::ifstream in(rc.u_file);
      if (!in) throw std::invalid_argument("cannot open U file '" + rc.u_file + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      u = algebra_from_json(buf.str());
      if (u.lattice() != dual) throw std::invalid_argument("U must be an element of B at the run's theta");
      shift.monomial = false;
    }
    const GaugeTransform gt = gauge_transform(job.eta, u, job.config);
    shift.tau_before = t.algebraic;
    shift.tau_after = tau(gt.eta_u, job.config, false).algebraic;
    shift.shift_residual = std::abs(shift.tau_after - shift.tau_before - shift.predicted_shift);
    shift.law_residual = gt.law_residual;
    shift.projection_residual = gt.projection_residual;
    shift.energy_residual = gt.energy_residual;
    shift.charge_residual = gt.charge_residual;
  }
  const double tails = std::max(job.resolution.tail_a, job.resolution.tail_b);
  write_file(job.dir / ("gauge_" + job.name + ".json"),
             gauge_report_json(g, t, with_u ? &shift : nullptr, provenance(job, rc, "gauge", tails)));
  log << "gauge " << job.spec.describe() << ": tau=" << format_double(t.algebraic.real()) << "+"
      << format_double(t.algebraic.imag()) << "i distance=" << format_double(g.lattice_distance)
      << " gaugeable=" << (g.gaugeable ? "true" : "false") << "\n";
  return g.gaugeable ? kPositive : kNegative;
}

int combine(int a, int b) {
  if (a == kError || b == kError) return kError;
  return (a == kNegative || b == kNegative) ? kNegative : kPositive;
}

int run(const std::string& command, const RunConfig& rc) {
  fs::create_directories(rc.output_dir);
  const std::vector<std::string> commands =
      command == "report-all" ? rc.commands : std::vector<std::string>{command};

  // Windows are independent; each job owns its inputs and writes its own files.
  auto work = [&](const std::string& window) -> std::pair<int, std::string> {
    std::ostringstream log;
    int code = kPositive;
    try {
      Job job = make_job(rc, window);
      if (rc.dump_window) {
        write_file(job.dir / ("window_" + job.name + ".csv"),
                   window_samples_csv(job.eta, rc.quad.half_width, 1025));
      }
      for (const auto& c : commands) {
        if (c == "frame") code = combine(code, run_frame(job, rc, log));
        if (c == "soliton") code = combine(code, run_soliton(job, rc, log));
        if (c == "gauge") code = combine(code, run_gauge(job, rc, log));
      }
    } catch (const std::exception& e) {
      log << "error (" << window << "): " << e.what() << "\n";
      code = kError;
    }
    return {code, log.str()};
  };

  std::vector<std::future<std::pair<int, std::string>>> futures;
  for (const auto& w : rc.windows) futures.push_back(std::async(std::launch::async, work, w));
  int code = kPositive;
  for (auto& f : futures) {
    const auto [c, text] = f.get();
    (c == kError ? std::cerr : std::cout) << text;
    code = combine(code, c);
  }
  return code;
}

void add_common(CLI::App* sub, Flags& f) {
  f.given["config"] = sub->add_option("--config", f.config, "JSON run configuration");
  f.given["theta"] = sub->add_option("--theta", f.theta, "Deformation parameter in (0, 1)");
  f.given["window"] = sub->add_option("--window", f.windows,
                                      "gaussian[:re[,im]] | sech | tp:d1,d2,...[;gauss=g][;shift=s]; repeatable");
  f.given["radius"] = sub->add_option("--radius", f.radius, "Truncation radius for A and B, or 'auto'");
  f.given["nodes"] = sub->add_option("--nodes", f.nodes, "Quadrature nodes");
  f.given["half-width"] = sub->add_option("--half-width", f.half_width, "Quadrature half-width (disables auto)");
  f.given["output-dir"] = sub->add_option("--output-dir", f.output_dir, "Report directory");
  sub->add_flag("--dump-window", f.dump_window, "Write window samples t,re,im");
}

void add_gauge(CLI::App* sub, Flags& f) {
  f.given["lambda"] = sub->add_option("--lambda", f.lambda, "Target Gaussian parameter re[,im]");
  f.given["monomial"] = sub->add_option("--monomial", f.monomial, "Gauge by U1^m U2^n, given as m,n");
  f.given["u-file"] = sub->add_option("--u-file", f.u_file, "Gauge element of B as algebra JSON");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gabor-frame solitons on noncommutative tori"};
  app.require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const char* name : {"frame", "soliton", "gauge", "report-all"}) {
    CLI::App* sub = app.add_subcommand(name);
    subs.emplace_back(name, sub);
  }
  subs[0].second->description("Frame bounds of the window");
  subs[1].second->description("Projection, energy, charge and residuals; writes a |p(m,n)| heatmap");
  subs[2].second->description("Trace invariant and gauge classification against a Gaussian");
  subs[3].second->description("Run the configured commands for every window, concurrently");
  // Each subcommand owns its option objects; only the selected one is parsed.
  std::vector<Flags> per(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    add_common(subs[i].second, per[i]);
    if (i >= 2) add_gauge(subs[i].second, per[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i].second->parsed()) continue;
    try {
      return run(subs[i].first, build_config(per[i]));
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kError;
    }
  }
  return kError;
}
