#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "erlq/report.hpp"
#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"
#include "erlq/svg.hpp"

#include "helpers.hpp"

using namespace erlq;
using namespace erlq::test;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("g17 formatting round-trips every double") {
  for (double v :
       {0.0, -0.0, 1.5, 0.1, 1.0 / 3.0, M_PI, -2.5e-7, 1e-300, 5e-324,
        DBL_MAX, DBL_MIN, 1.0000000000000002}) {
    const std::string s = format_g17(v);
    const double back = std::strtod(s.c_str(), nullptr);
    CHECK(back == v);
  }
  CHECK(format_g17(1.5) == "1.5");
  CHECK(format_g17(0.1) == "0.10000000000000001");
  CHECK(format_g17(0.0) == "0");
  CHECK(format_g17(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("config fingerprint matches the reference digests") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("hello") != fnv1a_hex("hellp"));
  CHECK(fnv1a_hex("x").size() == 16);
}

TEST_CASE("exact-run CSV bytes are pinned") {
  RunHistory history;
  history.sample_based = false;
  HistoryRow row;
  row.iter = 3;
  row.f = 1.5;
  row.gap = 0.5;
  row.relative_gap = 0.25;
  row.k_err_sq = 0.0625;
  row.sigma_err_sq = 0.1;
  row.eta1 = 2.0;
  row.eta2 = 0.0;
  row.halvings = 4;
  history.rows.push_back(row);

  const auto path = temp_file("erlq_test_exact.csv");
  write_history_csv(history, path.string());
  CHECK(slurp(path) ==
        "iter,f,gap,relative_gap,k_err_sq,sigma_err_sq,eta1,eta2,halvings\n"
        "3,1.5,0.5,0.25,0.0625,0.10000000000000001,2,0,4\n");
  std::filesystem::remove(path);
}

TEST_CASE("sample-based CSV bytes are pinned") {
  RunHistory history;
  history.sample_based = true;
  HistoryRow row;
  row.iter = 0;
  row.f = 1.5;
  row.gap = 0.5;
  row.relative_gap = 0.25;
  row.k_err_sq = 0.0;
  row.sigma_err_sq = 0.0;
  row.eta1 = 0.5;
  row.eta2 = 0.25;
  row.f_est = std::numeric_limits<double>::quiet_NaN();
  row.s_hat = 1.5;
  row.grad_k_std = 0.5;
  row.grad_sigma_std = 0.25;
  row.rejected_k = 7;
  row.rejected_sigma = 8;
  row.halvings = 0;
  history.rows.push_back(row);

  const auto path = temp_file("erlq_test_sample.csv");
  write_history_csv(history, path.string());
  CHECK(slurp(path) ==
        "iter,f,gap,relative_gap,k_err_sq,sigma_err_sq,eta1,eta2,"
        "f_est,s_hat,grad_k_std,grad_sigma_std,rejected_k,rejected_sigma,"
        "halvings\n"
        "0,1.5,0.5,0.25,0,0,0.5,0.25,nan,1.5,0.5,0.25,7,8,0\n");
  std::filesystem::remove(path);
}

TEST_CASE("run histories carry per-iterate optimality distances") {
  const ExperimentConfig cfg = reference_experiment();
  RpgConfig rc = cfg.rpg;
  rc.epsilon = 1e-4;
  rc.record_every = 1;
  const RpgRun run = run_rpg(cfg.system, cfg.k0, cfg.sigma0, rc);
  ExperimentConfig used = cfg;
  used.rpg = rc;
  const RunHistory history = make_history(run, used);

  REQUIRE(history.rows.size() == run.records.size());
  CHECK_FALSE(history.sample_based);
  for (size_t i = 0; i < history.rows.size(); ++i) {
    const HistoryRow& row = history.rows[i];
    const RpgRecord& rec = run.records[i];
    CHECK(row.iter == rec.iter);
    CHECK(row.f == rec.f);
    CHECK(row.gap == rec.gap);
    CHECK(row.relative_gap ==
          doctest::Approx(rec.gap / run.are.f_star).epsilon(1e-15));
    CHECK(row.k_err_sq ==
          doctest::Approx((rec.K - run.are.k_star).squaredNorm())
              .epsilon(1e-15));
    CHECK(row.sigma_err_sq ==
          doctest::Approx((rec.Sigma - run.are.sigma_star).squaredNorm())
              .epsilon(1e-15));
    CHECK(std::isnan(row.f_est));
  }

  // Meta block: version, canonical config and its fingerprint, baseline.
  CHECK(history.meta.at("version") == kVersion);
  const nlohmann::json cfg_json = config_to_json(used);
  CHECK(history.meta.at("config") == cfg_json);
  CHECK(history.meta.at("config_hash") == fnv1a_hex(cfg_json.dump()));
  CHECK(history.meta.at("baseline").at("f_star").get<double>() ==
        doctest::Approx(ref::kFStar).epsilon(1e-12));
  CHECK(history.meta.contains("created"));
}

TEST_CASE("sample-based histories expose the estimator columns") {
  const ExperimentConfig cfg = reference_experiment();
  SbrpgConfig sc = cfg.sbrpg;
  sc.samples = 60;
  sc.horizon = 15;
  sc.iterations = 3;
  sc.seed = 5;
  const SbrpgRun run = run_sbrpg(cfg.system, cfg.k0, cfg.sigma0, sc);
  ExperimentConfig used = cfg;
  used.sbrpg = sc;
  const RunHistory history = make_history(run, used);
  CHECK(history.sample_based);
  REQUIRE(history.rows.size() == run.records.size());
  // Row 0 is the starting policy; later rows carry estimator statistics.
  CHECK(history.rows.back().s_hat == run.records.back().s_hat);
  CHECK(history.rows.back().grad_k_std > 0.0);

  const auto path = temp_file("erlq_test_sbrpg_hist.csv");
  write_history_csv(history, path.string());
  const std::string text = slurp(path);
  CHECK(text.find("f_est,s_hat,grad_k_std") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);  // plain \n line endings
  std::filesystem::remove(path);
}

TEST_CASE("json artifacts are pretty-printed with a trailing newline") {
  nlohmann::json doc;
  doc["alpha"] = 1.5;
  doc["beta"] = {1, 2, 3};
  const auto path = temp_file("erlq_test_doc.json");
  write_json_file(doc, path.string());
  const std::string text = slurp(path);
  CHECK(text.back() == '\n');
  CHECK(nlohmann::json::parse(text) == doc);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(write_json_file(doc, "/nonexistent-dir/x.json"),
                  ConfigError);
}

TEST_CASE("vector and matrix json helpers") {
  Vec v(3);
  v << 1.0, -2.0, 0.5;
  CHECK(vec_json(v) == nlohmann::json::parse("[1.0, -2.0, 0.5]"));
  Mat m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  CHECK(mat_json(m) == nlohmann::json::parse("[[1.0, 2.0], [3.0, 4.0]]"));
}

TEST_CASE("line charts are deterministic and well-formed") {
  ChartSeries series;
  series.name = "gap";
  for (int i = 0; i < 20; ++i)
    series.points.emplace_back(i, std::exp(-0.3 * i));
  series.points.emplace_back(20.0, std::nan(""));  // must be skipped
  ChartOptions opt;
  opt.title = "test";
  opt.x_label = "iter";
  opt.y_label = "gap";
  opt.log_y = true;

  const auto path_a = temp_file("erlq_test_a.svg");
  const auto path_b = temp_file("erlq_test_b.svg");
  write_line_chart(path_a.string(), {series}, opt);
  write_line_chart(path_b.string(), {series}, opt);
  const std::string a = slurp(path_a);
  CHECK(a == slurp(path_b));
  CHECK(a.rfind("<svg", 0) != std::string::npos);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find("nan") == std::string::npos);
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

}  // TEST_SUITE
