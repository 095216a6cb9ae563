#include "erlq/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>

#include "erlq/errors.hpp"

namespace erlq {

namespace {

std::string iso8601_now() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

void fill_policy_errors(HistoryRow* row, const Vec& k, const Mat& sigma,
                        const RiccatiSolution& are) {
  row->k_err_sq = (k - are.k_star).squaredNorm();
  row->sigma_err_sq = (sigma - are.sigma_star).squaredNorm();
  row->relative_gap = are.f_star > 0.0
                          ? row->gap / are.f_star
                          : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

nlohmann::json make_meta(const ExperimentConfig& cfg,
                         const RiccatiSolution& are) {
  nlohmann::json meta;
  meta["version"] = kVersion;
  nlohmann::json config = config_to_json(cfg);
  meta["config_hash"] = fnv1a_hex(config.dump());
  meta["config"] = std::move(config);
  meta["created"] = iso8601_now();
  meta["baseline"] = riccati_json(are);
  return meta;
}

RunHistory make_history(const RpgRun& run, const ExperimentConfig& cfg) {
  RunHistory history;
  history.sample_based = false;
  history.meta = make_meta(cfg, run.are);
  history.rows.reserve(run.records.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const RpgRecord& rec : run.records) {
    HistoryRow row;
    row.iter = rec.iter;
    row.f = rec.f;
    row.gap = rec.gap;
    row.eta1 = rec.eta1;
    row.eta2 = rec.eta2;
    row.halvings = rec.halvings;
    row.f_est = nan;
    row.s_hat = nan;
    row.grad_k_std = nan;
    row.grad_sigma_std = nan;
    fill_policy_errors(&row, rec.K, rec.Sigma, run.are);
    history.rows.push_back(row);
  }
  return history;
}

RunHistory make_history(const SbrpgRun& run, const ExperimentConfig& cfg) {
  RunHistory history;
  history.sample_based = true;
  history.meta = make_meta(cfg, run.are);
  history.rows.reserve(run.records.size());
  for (const SbrpgRecord& rec : run.records) {
    HistoryRow row;
    row.iter = rec.iter;
    row.f = rec.f;
    row.gap = rec.gap;
    row.eta1 = cfg.sbrpg.eta1;
    row.eta2 = cfg.sbrpg.eta2;
    row.f_est = rec.f_est;
    row.s_hat = rec.s_hat;
    row.grad_k_std = rec.grad_k_std;
    row.grad_sigma_std = rec.grad_sigma_std;
    row.rejected_k = rec.rejected_k;
    row.rejected_sigma = rec.rejected_sigma;
    row.halvings = rec.halvings;
    fill_policy_errors(&row, rec.k, rec.sigma, run.are);
    history.rows.push_back(row);
  }
  return history;
}

void write_history_csv(const RunHistory& history, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "iter,f,gap,relative_gap,k_err_sq,sigma_err_sq,eta1,eta2";
  if (history.sample_based)
    out << ",f_est,s_hat,grad_k_std,grad_sigma_std,rejected_k,rejected_sigma";
  out << ",halvings\n";
  for (const HistoryRow& row : history.rows) {
    out << row.iter << ',' << format_g17(row.f) << ',' << format_g17(row.gap)
        << ',' << format_g17(row.relative_gap) << ','
        << format_g17(row.k_err_sq) << ',' << format_g17(row.sigma_err_sq)
        << ',' << format_g17(row.eta1) << ',' << format_g17(row.eta2);
    if (history.sample_based) {
      out << ',' << format_g17(row.f_est) << ',' << format_g17(row.s_hat)
          << ',' << format_g17(row.grad_k_std) << ','
          << format_g17(row.grad_sigma_std) << ',' << row.rejected_k << ','
          << row.rejected_sigma;
    }
    out << ',' << row.halvings << '\n';
  }
  if (!out) throw ConfigError("failed writing file: " + path);
}

void write_json_file(const nlohmann::json& doc, const std::string& path) {
  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing file: " + path);
}

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

nlohmann::json mat_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json riccati_json(const RiccatiSolution& are) {
  nlohmann::json j;
  j["p_star"] = are.p_star;
  j["q_star"] = are.q_star;
  j["k_star"] = vec_json(are.k_star);
  j["sigma_star"] = mat_json(are.sigma_star);
  j["f_star"] = are.f_star;
  j["iterations"] = are.iterations;
  j["residual"] = are.residual;
  return j;
}

nlohmann::json eval_json(const EvalReport& report) {
  nlohmann::json j;
  j["v_k"] = report.v_k;
  j["p_k"] = report.p_k;
  j["q"] = report.q;
  j["f"] = report.f;
  j["s"] = report.s;
  j["e_k"] = vec_json(report.e_k);
  j["grad_k"] = vec_json(report.grad_k);
  j["grad_sigma"] = mat_json(report.grad_sigma);
  return j;
}

nlohmann::json bounds_json(const BoundReport& report) {
  nlohmann::json j;
  j["f"] = report.f;
  j["s"] = report.s;
  j["gap"] = report.gap;
  j["eta1"] = report.eta1;
  j["eta2"] = report.eta2;
  j["lambda1"] = report.lambda1;
  j["lambda2"] = report.lambda2;
  j["lambda2_proof"] = report.lambda2_proof;
  j["grad_k_bound"] = report.grad_k_bound;
  j["grad_sigma_bound"] = report.grad_sigma_bound;
  j["h_sigma"] = report.h_sigma;
  j["h_sigma_alt"] = report.h_sigma_alt;
  j["h2"] = report.h2;
  j["g_sigma"] = report.g_sigma;
  j["h_k"] = report.h_k;
  j["h5"] = report.h5;
  j["h_e"] = report.h_e;
  j["h6"] = report.h6;
  j["h7"] = report.h7;
  j["h8"] = report.h8;
  j["h9"] = report.h9;
  j["h10"] = report.h10;
  j["h11"] = report.h11;
  j["a"] = report.a;
  j["m"] = report.m;
  j["phi"] = report.phi;
  j["n_rpg"] = report.n_rpg;
  j["n_sb"] = report.n_sb;
  j["eps1"] = report.eps1;
  j["eps2"] = report.eps2;
  j["eps3"] = report.eps3;
  j["kappa1"] = report.kappa1;
  j["kappa2"] = report.kappa2;
  j["kappa3"] = report.kappa3;
  j["r1"] = report.r1;
  j["r2"] = report.r2;
  j["r3"] = report.r3;
  j["samples_grad_k"] = report.samples_grad_k;
  j["samples_grad_sigma"] = report.samples_grad_sigma;
  j["samples_smoment"] = report.samples_smoment;
  j["len_grad_k"] = report.len_grad_k;
  j["len_grad_sigma"] = report.len_grad_sigma;
  j["len_smoment"] = report.len_smoment;
  j["growth_constant"] = report.growth_constant;
  j["init_bound"] = report.init_bound;
  return j;
}

}  // namespace erlq
