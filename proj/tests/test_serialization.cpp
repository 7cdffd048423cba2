#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "ncsoliton/serialization.hpp"
#include "support.hpp"

using namespace ncsoliton;
using ncsoliton::testing::kTheta;
using json = nlohmann::json;

TEST(Json, DoublesRoundTripExactly) {
  for (double v : {kTheta, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Json, WriterKeepsFieldOrder) {
  JsonWriter w;
  w.begin_object();
  w.field("zeta", 1);
  w.field("alpha", Complex(0.5, -1.0));
  w.key("list").begin_array().value(true).value("x").end_array();
  w.key("empty").begin_object().end_object();
  w.end_object();
  const json j = json::parse(w.str());
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  // nlohmann sorts keys, so check the raw text instead
  EXPECT_LT(w.str().find("zeta"), w.str().find("alpha"));
  EXPECT_EQ(j["alpha"]["im"].get<double>(), -1.0);
  EXPECT_EQ(j["list"][1].get<std::string>(), "x");
  EXPECT_TRUE(j["empty"].empty());
  EXPECT_EQ(keys.size(), 4u);
}

TEST(Json, AlgebraElementRoundTrip) {
  std::mt19937_64 rng(51);
  AlgebraElement a = ncsoliton::testing::random_element(LatticeSpec(kTheta, Side::Dual), 2, rng);
  a.set(1, 1, 0.0);
  const std::string text = algebra_to_json(a);
  const AlgebraElement b = algebra_from_json(text);
  EXPECT_EQ(b.lattice(), a.lattice());
  EXPECT_EQ(b.radius(), a.radius());
  EXPECT_EQ(l1_distance(a, b), 0.0);
  const json j = json::parse(text);
  EXPECT_EQ(j["entries"].size(), 24u);
  // lexicographic (m, n)
  for (std::size_t i = 1; i < j["entries"].size(); ++i) {
    const auto& p = j["entries"][i - 1];
    const auto& q = j["entries"][i];
    EXPECT_TRUE(std::make_pair(p[0].get<int>(), p[1].get<int>()) < std::make_pair(q[0].get<int>(), q[1].get<int>()));
  }
  EXPECT_EQ(algebra_to_json(b), text);
}

TEST(Json, AlgebraElementRejectsMalformedInput) {
  EXPECT_ANY_THROW(algebra_from_json("{\"theta\": 0.4, \"side\": \"B\"}"));
  EXPECT_ANY_THROW(algebra_from_json("{\"theta\": 0.4, \"side\": \"dual\", \"radius\": 1, \"entries\": [[0, 0, 1]]}"));
  EXPECT_ANY_THROW(algebra_from_json("{\"theta\": 0.4, \"side\": \"dual\", \"radius\": 1, \"entries\": [[2, 0, 1, 0]]}"));
  EXPECT_ANY_THROW(algebra_from_json("{\"theta\": 1.4, \"side\": \"dual\", \"radius\": 1, \"entries\": []}"));
}

TEST(WindowSpecs, Parse) {
  const WindowSpec g = parse_window_spec("gaussian");
  EXPECT_EQ(g.family, WindowFamily::Gaussian);
  EXPECT_EQ(g.lambda, Complex(0.0));
  EXPECT_EQ(parse_window_spec("gaussian:0.7,-0.4").lambda, Complex(0.7, -0.4));
  EXPECT_EQ(parse_window_spec("gaussian:1.5").lambda, Complex(1.5, 0.0));
  EXPECT_EQ(parse_window_spec("sech").family, WindowFamily::HyperbolicSecant);
  const WindowSpec tp = parse_window_spec("tp:0.25,-0.2;gauss=0.5;shift=0.1");
  EXPECT_EQ(tp.family, WindowFamily::TotallyPositive);
  EXPECT_EQ(tp.tp.deltas, (std::vector<double>{0.25, -0.2}));
  EXPECT_EQ(tp.tp.gauss, 0.5);
  EXPECT_EQ(tp.tp.shift, 0.1);
  // describe() parses back to the same window
  EXPECT_EQ(parse_window_spec(tp.describe()).describe(), tp.describe());
}

TEST(WindowSpecs, RejectMalformed) {
  for (const char* bad : {"gausian", "gaussian:x", "gaussian:1,2,3", "sech:1", "tp", "tp:0.1;gauss", "tp:0.1;width=2",
                          "tp:0.1,", ""}) {
    EXPECT_THROW(parse_window_spec(bad), std::invalid_argument) << bad;
  }
}

TEST(Reports, FrameReportCarriesProvenance) {
  FrameReport r;
  r.lower = 1.5;
  r.upper = 2.0;
  r.is_frame = true;
  Provenance p;
  p.command = "frame";
  p.window = "sech";
  p.theta = kTheta;
  p.radius_b = 9;
  const json j = json::parse(frame_report_json(r, p));
  EXPECT_EQ(j["report"], "frame");
  EXPECT_EQ(j["lower"].get<double>(), 1.5);
  EXPECT_EQ(j["provenance"]["schema"], kReportSchema);
  EXPECT_EQ(j["provenance"]["radius_b"].get<int>(), 9);
  EXPECT_EQ(j["provenance"]["theta"].get<double>(), kTheta);
  EXPECT_EQ(j["provenance"]["quadrature"]["nodes"].get<int>(), 8192);
  EXPECT_TRUE(j["provenance"]["tolerances"].contains("projection"));
}

TEST(Reports, GaugeReportWithAndWithoutElement) {
  GaugeReport g;
  g.nearest_point = {2, -3};
  TauReport t;
  Provenance p;
  const json plain = json::parse(gauge_report_json(g, t, nullptr, p));
  EXPECT_FALSE(plain.contains("gauge_element"));
  EXPECT_EQ(plain["nearest_point"][1].get<int>(), -3);
  GaugeShift s;
  s.m = 1;
  s.n = 1;
  s.predicted_shift = Complex(1.0, -1.0);
  const json with = json::parse(gauge_report_json(g, t, &s, p));
  EXPECT_EQ(with["gauge_element"]["kind"], "monomial");
  EXPECT_EQ(with["gauge_element"]["predicted_shift"]["im"].get<double>(), -1.0);
  s.monomial = false;
  const json file = json::parse(gauge_report_json(g, t, &s, p));
  EXPECT_FALSE(file["gauge_element"].contains("predicted_shift"));
}

TEST(Csv, HeatmapLayout) {
  AlgebraElement a(LatticeSpec(kTheta, Side::Primal), 1);
  a.set(-1, 0, Complex(3.0, 4.0));
  std::istringstream in(heatmap_csv(a));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "m,n,abs");
  std::vector<std::string> rows;
  while (std::getline(in, line)) rows.push_back(line);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_EQ(rows[0], "-1,-1,0");
  EXPECT_EQ(rows[1], "-1,0,5");
}

TEST(Csv, WindowSamples) {
  const std::string csv = window_samples_csv(ModuleVector(hyperbolic_secant()), 2.0, 5);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,re,im");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 3), "-2,");
  EXPECT_THROW(window_samples_csv(ModuleVector(hyperbolic_secant()), 2.0, 1), std::invalid_argument);
}
