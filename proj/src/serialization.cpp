#include "ncsoliton/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ncsoliton {

std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonWriter::newline() {
  out_ += '\n';
  out_.append(2 * first_.size(), ' ');
}

void JsonWriter::separator() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (first_.empty()) return;
  if (!first_.back()) out_ += ',';
  first_.back() = false;
  newline();
}

JsonWriter& JsonWriter::begin_object() {
  separator();
  out_ += '{';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) newline();
  out_ += '}';
  if (first_.empty()) out_ += '\n';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  separator();
  out_ += '[';
  first_.push_back(true);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const bool empty = first_.back();
  first_.pop_back();
  if (!empty) newline();
  out_ += ']';
  return *this;
}

JsonWriter& JsonWriter::key(std::string_view name) {
  separator();
  out_ += nlohmann::json(std::string(name)).dump();
  out_ += ": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  separator();
  out_ += format_double(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  separator();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  separator();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(std::string_view v) {
  separator();
  out_ += nlohmann::json(std::string(v)).dump();
  return *this;
}

JsonWriter& JsonWriter::value(Complex v) {
  separator();
  out_ += "{\"re\": " + format_double(v.real()) + ", \"im\": " + format_double(v.imag()) + "}";
  return *this;
}

JsonWriter& JsonWriter::row(const std::vector<double>& values) {
  separator();
  out_ += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out_ += ", ";
    const double v = values[i];
    // integral entries (indices) print without exponent noise
    out_ += (v == std::floor(v) && std::abs(v) < 1e9) ? std::to_string(static_cast<long>(v))
                                                      : format_double(v);
  }
  out_ += ']';
  return *this;
}

// ---------------------------------------------------------------------------

std::string algebra_to_json(const AlgebraElement& a) {
  JsonWriter w;
  w.begin_object();
  w.field("theta", a.lattice().theta());
  w.field("side", to_string(a.lattice().side()));
  w.field("radius", a.radius());
  w.field("tail_norm", a.tail_norm());
  w.key("entries").begin_array();
  const int R = a.radius();
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      const Complex v = a(m, n);
      if (v == Complex(0.0)) continue;
      w.row({static_cast<double>(m), static_cast<double>(n), v.real(), v.imag()});
    }
  }
  w.end_array();
  w.end_object();
  return w.str();
}

AlgebraElement algebra_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const LatticeSpec lattice(j.at("theta").get<double>(), side_from_string(j.at("side").get<std::string>()));
  const int radius = j.at("radius").get<int>();
  if (radius < 0) throw std::invalid_argument("algebra element: negative radius");
  AlgebraElement a(lattice, radius);
  for (const auto& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 4) {
      throw std::invalid_argument("algebra element: entries must be [m, n, re, im]");
    }
    a.set(e[0].get<int>(), e[1].get<int>(), Complex(e[2].get<double>(), e[3].get<double>()));
  }
  return a;
}

// ---------------------------------------------------------------------------

namespace {

// Keeps empty fields, so "0.1," has two parts and fails to parse.
std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end - start));
    if (end == std::string::npos) return parts;
    start = end + 1;
  }
}

double parse_number(const std::string& s, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("bad number '" + s + "' in " + context);
  }
  return v;
}

}  // namespace

Window WindowSpec::build(double theta) const {
  switch (family) {
    case WindowFamily::Gaussian:
      return gaussian(lambda, theta);
    case WindowFamily::HyperbolicSecant:
      return hyperbolic_secant();
    case WindowFamily::TotallyPositive:
      return totally_positive(tp);
  }
  throw std::invalid_argument("unknown window family");
}

std::string WindowSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case WindowFamily::Gaussian:
      os << "gaussian:" << lambda.real() << "," << lambda.imag();
      break;
    case WindowFamily::HyperbolicSecant:
      os << "sech";
      break;
    case WindowFamily::TotallyPositive:
      os << "tp:";
      for (std::size_t j = 0; j < tp.deltas.size(); ++j) os << (j ? "," : "") << tp.deltas[j];
      os << ";gauss=" << tp.gauss << ";shift=" << tp.shift;
      break;
  }
  return os.str();
}

WindowSpec parse_window_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : text.substr(colon + 1);
  WindowSpec spec;
  if (name == "gaussian") {
    spec.family = WindowFamily::Gaussian;
    if (!args.empty()) {
      const auto parts = split(args, ',');
      if (parts.empty() || parts.size() > 2) throw std::invalid_argument("gaussian takes re[,im]");
      spec.lambda = Complex(parse_number(parts[0], text),
                            parts.size() == 2 ? parse_number(parts[1], text) : 0.0);
    }
  } else if (name == "sech") {
    if (!args.empty()) throw std::invalid_argument("sech takes no parameters");
    spec.family = WindowFamily::HyperbolicSecant;
  } else if (name == "tp") {
    spec.family = WindowFamily::TotallyPositive;
    const auto sections = split(args, ';');
    if (sections.empty() || sections[0].empty()) throw std::invalid_argument("tp needs deltas");
    for (const auto& d : split(sections[0], ',')) spec.tp.deltas.push_back(parse_number(d, text));
    for (std::size_t i = 1; i < sections.size(); ++i) {
      const auto kv = split(sections[i], '=');
      if (kv.size() != 2) throw std::invalid_argument("tp option '" + sections[i] + "' is not key=value");
      if (kv[0] == "gauss") {
        spec.tp.gauss = parse_number(kv[1], text);
      } else if (kv[0] == "shift") {
        spec.tp.shift = parse_number(kv[1], text);
      } else {
        throw std::invalid_argument("unknown tp option '" + kv[0] + "'");
      }
    }
  } else {
    throw std::invalid_argument("unknown window family '" + name + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------

void write_provenance(JsonWriter& w, const Provenance& p) {
  w.key("provenance").begin_object();
  w.field("schema", kReportSchema);
  w.field("command", p.command);
  w.field("window", p.window);
  w.field("theta", p.theta);
  w.field("radius_a", p.radius_a);
  w.field("radius_b", p.radius_b);
  w.field("radius_auto", p.radius_auto);
  w.key("quadrature").begin_object();
  w.field("rule", to_string(p.quad.rule));
  w.field("half_width", p.quad.half_width);
  w.field("nodes", p.quad.nodes);
  w.field("tail_tol", p.quad.tol);
  w.field("auto", p.quadrature_auto);
  w.end_object();
  w.key("tolerances").begin_object();
  w.field("frame_margin", p.tol.frame_margin);
  w.field("frame_drift", p.tol.frame_drift);
  w.field("rayleigh_eps", p.tol.rayleigh_eps);
  w.field("tight", p.tol.tight);
  w.field("normalize", p.tol.normalize);
  w.field("projection", p.tol.projection);
  w.field("module_residual", p.tol.module_residual);
  w.field("tau_routes", p.tol.tau_routes);
  w.field("gauge", p.tol.gauge);
  w.field("gaugeable", p.tol.gaugeable);
  w.field("inverse", p.tol.inverse);
  w.field("inv_sqrt", p.tol.inv_sqrt);
  w.end_object();
  w.field("tail_norm_max", p.tail_norm_max);
  w.field("seed", static_cast<double>(p.seed));
  w.end_object();
}

std::string frame_report_json(const FrameReport& r, const Provenance& p) {
  JsonWriter w;
  w.begin_object();
  w.field("report", "frame");
  w.field("lower", r.lower);
  w.field("upper", r.upper);
  w.field("is_frame", r.is_frame);
  w.field("tight", r.tight);
  w.field("invertibility_margin", r.invertibility_margin);
  w.field("radius_used", r.radius_used);
  w.field("drift", r.drift);
  w.field("stable", r.stable);
  w.field("rayleigh_samples", r.rayleigh_samples);
  w.field("rayleigh_min", r.rayleigh_min);
  w.field("rayleigh_max", r.rayleigh_max);
  write_provenance(w, p);
  w.end_object();
  return w.str();
}

std::string soliton_report_json(const SolitonReport& s, const ProjectionReport& proj,
                                const Provenance& p) {
  JsonWriter w;
  w.begin_object();
  w.field("report", "soliton");
  w.field("energy", s.energy);
  w.field("charge", s.charge);
  w.field("charge_gap", s.charge_gap);
  w.field("bp_gap", s.bp_gap);
  w.field("sd_residual", s.sd_residual);
  w.field("el_residual", s.el_residual);
  w.field("idempotency", s.idempotency);
  w.field("self_adjointness", proj.self_adjointness);
  w.field("trace", proj.trace);
  w.field("tightness_residual", proj.tightness_residual);
  w.key("killing").row({proj.killing[0], proj.killing[1]});
  w.key("action_identity").row({proj.action_identity[0], proj.action_identity[1]});
  write_provenance(w, p);
  w.end_object();
  return w.str();
}

std::string gauge_report_json(const GaugeReport& g, const TauReport& t, const GaugeShift* shift,
                              const Provenance& p) {
  JsonWriter w;
  w.begin_object();
  w.field("report", "gauge");
  w.field("tau_b", g.tau_b);
  w.field("lambda", g.lambda);
  w.field("lattice_distance", g.lattice_distance);
  w.field("gaugeable", g.gaugeable);
  w.key("nearest_point").row({static_cast<double>(g.nearest_point.first), static_cast<double>(g.nearest_point.second)});
  w.field("lattice_generator", g.lattice_generator);
  w.field("module_residual", g.module_residual);
  w.key("tau").begin_object();
  w.field("algebraic", t.algebraic);
  w.field("pairing", t.pairing);
  w.field("discrepancy", t.discrepancy);
  w.field("raw_pairing", t.raw_pairing);
  w.end_object();
  if (shift != nullptr) {
    w.key("gauge_element").begin_object();
    w.field("kind", shift->monomial ? "monomial" : "file");
    if (shift->monomial) w.key("index").row({static_cast<double>(shift->m), static_cast<double>(shift->n)});
    w.field("tau_before", shift->tau_before);
    w.field("tau_after", shift->tau_after);
    w.field("tau_shift", shift->tau_after - shift->tau_before);
    if (shift->monomial) {
      w.field("predicted_shift", shift->predicted_shift);
      w.field("shift_residual", shift->shift_residual);
    }
    w.field("law_residual", shift->law_residual);
    w.field("projection_residual", shift->projection_residual);
    w.field("energy_residual", shift->energy_residual);
    w.field("charge_residual", shift->charge_residual);
    w.end_object();
  }
  write_provenance(w, p);
  w.end_object();
  return w.str();
}

std::string heatmap_csv(const AlgebraElement& a) {
  std::string out = "m,n,abs\n";
  const int R = a.radius();
  for (int m = -R; m <= R; ++m) {
    for (int n = -R; n <= R; ++n) {
      out += std::to_string(m) + "," + std::to_string(n) + "," + format_double(std::abs(a(m, n))) + "\n";
    }
  }
  return out;
}

std::string window_samples_csv(const ModuleVector& f, double half_width, int n) {
  if (n < 2) throw std::invalid_argument("window_samples_csv: need at least 2 points");
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, -half_width, half_width);
  const Eigen::VectorXcd v = f.sample(t);
  std::string out = "t,re,im\n";
  for (int i = 0; i < n; ++i) {
    out += format_double(t(i)) + "," + format_double(v(i).real()) + "," + format_double(v(i).imag()) + "\n";
  }
  return out;
}

}  // namespace ncsoliton
