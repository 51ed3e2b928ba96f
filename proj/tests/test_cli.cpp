#include <cstdlib>
#include <sstream>
#include <string>

#include "ddso/config.hpp"
#include "ddso/csv.hpp"
#include "ddso/manifest.hpp"
#include "ddso/svg.hpp"
#include "doctest.h"

using namespace ddso;

TEST_CASE("config: minimal file fills the documented defaults") {
  std::istringstream in(
      "[experiment]\n"
      "problem = newsvendor\n"
      "n_list = 10, 20\n"
      "replications = 3\n");
  const RunConfig cfg = parse_config(in, "mini");
  CHECK(cfg.experiment.h == 1.0);
  CHECK(cfg.experiment.b == 5.0);
  CHECK(cfg.experiment.p == 5);
  CHECK(cfg.experiment.capacity == 40.0);
  CHECK(cfg.experiment.alpha == 0.7);
  CHECK(cfg.experiment.replications == 3);
  CHECK(cfg.experiment.n_list == std::vector<int>{10, 20});
  CHECK(cfg.experiment.c1_thresholds == std::vector<double>{0.5, 1.0, 1.5});
}

TEST_CASE("config: every offending line is reported") {
  std::istringstream in(
      "problem = newsvendor\n"
      "gamma = 1.5\n"
      "gamma = 0.3\n"
      "mystery = 1\n"
      "replications = zero\n"
      "n_list = 10, 5\n");
  try {
    parse_config(in, "bad");
    CHECK(false);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);  // gamma out of range
    CHECK(msg.find("line 3") != std::string::npos);  // duplicate
    CHECK(msg.find("line 4") != std::string::npos);  // unknown key
    CHECK(msg.find("line 5") != std::string::npos);  // type error
    CHECK(msg.find("strictly increasing") != std::string::npos);
  }
}

TEST_CASE("config: missing n_list and comments") {
  std::istringstream in("problem = newsvendor  # trailing comment\n; full comment\n");
  CHECK_THROWS_AS(parse_config(in, "empty"), ConfigError);
}

TEST_CASE("fmt17 round-trips doubles exactly") {
  const double values[] = {0.1, 1.0 / 3.0, 3.141592653589793, 1.4991056436842608,
                           123456789.123456789, 5e-324, 1e308, -0.75};
  for (double v : values) {
    const std::string s = fmt17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("csv headers and shape") {
  RegretTable t = {{"newsvendor", "well", Method::ETO, 10, 0, 0.5, 5.0}};
  const std::string r = regret_csv(t);
  CHECK(r.find("problem,setting,method,n,rep,regret,n_regret\n") == 0);
  CHECK(r.find("newsvendor,well,ETO,10,0,0.5,5\n") != std::string::npos);
  CHECK(r.find('\r') == std::string::npos);  // LF only

  const SummaryTable s = summarize(t, {0.5, 1.0});
  const std::string sc = summary_csv(s, {0.5, 1.0});
  CHECK(sc.find("method,n,mean,q25,q50,q75,m1,m2,m3,tail_0.5,tail_1\n") == 0);

  const std::string sw = sweep_csv({0.0, 1.0}, {s, s});
  CHECK(sw.find("gamma,n,median_saa,median_eto,median_ieo,ordering_flag\n") == 0);
}

TEST_CASE("csv for the covariance model carries labeled entries") {
  CovModel cov;
  cov.h_theta = Matrix::identity(2);
  cov.fisher = Matrix::identity(2);
  const std::string c = covmodel_csv(cov);
  CHECK(c.find("matrix,row,col,value\n") == 0);
  CHECK(c.find("h_theta,0,0,1\n") != std::string::npos);
  CHECK(c.find("h_theta,0,1,0\n") != std::string::npos);
}

TEST_CASE("svg rendering") {
  SvgSeries s;
  s.label = "ETO";
  s.x = {10.0, 20.0};
  s.y = {0.5, 0.25};
  SvgOptions opt;
  opt.title = "demo <chart> & friends";
  const std::string svg = render_svg_lines({s}, opt);
  CHECK(svg.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>", 0) == 0);
  CHECK(svg.find("<svg ") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("&lt;chart&gt; &amp; friends") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  // no stray unescaped ampersands outside entities
  for (std::size_t pos = svg.find('&'); pos != std::string::npos; pos = svg.find('&', pos + 1)) {
    CHECK((svg.compare(pos, 5, "&amp;") == 0 || svg.compare(pos, 4, "&lt;") == 0 ||
           svg.compare(pos, 4, "&gt;") == 0 || svg.compare(pos, 6, "&quot;") == 0));
  }

  SUBCASE("band chart from a summary renders") {
    RegretTable t;
    for (int rep = 0; rep < 4; ++rep) {
      t.push_back({"x", "well", Method::ETO, 10, rep, 0.1 * (rep + 1), 1.0 * (rep + 1)});
      t.push_back({"x", "well", Method::SAA, 10, rep, 0.2 * (rep + 1), 2.0 * (rep + 1)});
      t.push_back({"x", "well", Method::ETO, 20, rep, 0.05 * (rep + 1), 1.0 * (rep + 1)});
      t.push_back({"x", "well", Method::SAA, 20, rep, 0.1 * (rep + 1), 2.0 * (rep + 1)});
    }
    const SummaryTable sum = summarize(t, {1.0});
    std::vector<SvgSeries> series;
    for (Method m : {Method::SAA, Method::ETO}) {
      SvgSeries sr;
      sr.label = to_string(m);
      for (const SummaryRow& row : sum) {
        if (row.method != m) continue;
        sr.x.push_back(row.n);
        sr.y.push_back(row.q50);
        sr.band_lo.push_back(row.q25);
        sr.band_hi.push_back(row.q75);
      }
      series.push_back(sr);
    }
    const std::string chart = render_svg_lines(series, SvgOptions{});
    CHECK(chart.find("</svg>") != std::string::npos);
    CHECK(chart.find("fill-opacity") != std::string::npos);
  }
  SUBCASE("log scale rejects nonpositive values") {
    SvgSeries bad = s;
    bad.y = {0.5, 0.0};
    SvgOptions logopt;
    logopt.log_y = true;
    CHECK_THROWS_AS(render_svg_lines({bad}, logopt), std::domain_error);
    // and renders fine for positive data
    SvgOptions ok_opt;
    ok_opt.log_y = true;
    CHECK(render_svg_lines({s}, ok_opt).find("</svg>") != std::string::npos);
  }
  SUBCASE("empty series list rejected") {
    CHECK_THROWS_AS(render_svg_lines({}, SvgOptions{}), std::invalid_argument);
  }
}

TEST_CASE("manifest") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

  RunManifest m;
  m.command = "simulate";
  m.master_seed = 99;
  m.config_echo = {{"problem", "newsvendor"}};
  m.output_checksums = {{"regret.csv", fnv1a64("hello")}};
  const std::string j = m.to_json();
  CHECK(j.find("\"tool_version\"") != std::string::npos);
  CHECK(j.find("\"regret.csv\"") != std::string::npos);
  CHECK(j.find("\"master_seed\": 99") != std::string::npos);
}
