#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ncsoliton/lattice_algebra.hpp"
#include "ncsoliton/module_ops.hpp"
#include "ncsoliton/solitons.hpp"
#include "ncsoliton/windows.hpp"

namespace ncsoliton {

inline constexpr const char* kReportSchema = "ncsoliton-report/1";

/// Streaming JSON writer with a fixed key order and 17 significant digits for doubles.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(std::string_view name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(bool v);
  JsonWriter& value(std::string_view v);
  JsonWriter& value(const char* v) { return value(std::string_view(v)); }
  /// {"re": ..., "im": ...}
  JsonWriter& value(Complex v);
  /// Inline array without line breaks, for coefficient entries.
  JsonWriter& row(const std::vector<double>& values);

  template <typename T>
  JsonWriter& field(std::string_view name, const T& v) {
    key(name);
    return value(v);
  }

  const std::string& str() const { return out_; }

 private:
  void separator();
  void newline();

  std::string out_;
  std::vector<bool> first_;
  bool after_key_ = false;
};

std::string format_double(double v);

/// {theta, side, radius, entries: [[m, n, re, im], ...]}; nonzero entries sorted by (m, n).
std::string algebra_to_json(const AlgebraElement& a);
AlgebraElement algebra_from_json(const std::string& text);

/// Parsed window description: "gaussian[:re[,im]]", "sech", "tp:d1,d2,...[;gauss=g][;shift=s]".
struct WindowSpec {
  WindowFamily family = WindowFamily::Gaussian;
  Complex lambda = 0.0;
  TotallyPositiveParams tp;

  Window build(double theta) const;
  std::string describe() const;
};

WindowSpec parse_window_spec(const std::string& text);

/// Everything needed to reproduce a report.
struct Provenance {
  std::string command;
  std::string window;
  double theta = 0.0;
  int radius_a = 0;
  int radius_b = 0;
  bool radius_auto = false;
  QuadratureSpec quad;
  bool quadrature_auto = false;
  Tolerances tol;
  double tail_norm_max = 0.0;
  std::uint64_t seed = 0;
};

void write_provenance(JsonWriter& w, const Provenance& p);

std::string frame_report_json(const FrameReport& r, const Provenance& p);
std::string soliton_report_json(const SolitonReport& s, const ProjectionReport& proj,
                                const Provenance& p);

/// τ before and after η ↦ η·U. For monomial U = U₁ᵐU₂ⁿ the predicted shift is filled in.
struct GaugeShift {
  bool monomial = true;
  int m = 0;
  int n = 0;
  Complex tau_before;
  Complex tau_after;
  Complex predicted_shift;
  double shift_residual = 0.0;
  double law_residual = 0.0;
  double projection_residual = 0.0;
  double energy_residual = 0.0;
  double charge_residual = 0.0;
};

std::string gauge_report_json(const GaugeReport& g, const TauReport& t, const GaugeShift* shift,
                              const Provenance& p);

/// Header `m,n,abs`, one row per coefficient in (m, n) order.
std::string heatmap_csv(const AlgebraElement& a);

/// Header `t,re,im` on n equispaced points of [-half_width, half_width].
std::string window_samples_csv(const ModuleVector& f, double half_width, int n);

}  // namespace ncsoliton
