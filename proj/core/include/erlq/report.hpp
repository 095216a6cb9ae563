#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "erlq/bounds.hpp"
#include "erlq/config.hpp"
#include "erlq/eval.hpp"
#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"

namespace erlq {

inline constexpr const char* kVersion = "0.1.0";

// Shortest 17-significant-digit decimal form ('%.17g', '.' decimal point):
// round-trips every double and is byte-stable across runs.
std::string format_g17(double v);

// FNV-1a 64-bit hex digest; used to fingerprint resolved configs.
std::string fnv1a_hex(const std::string& bytes);

// One recorded optimizer iterate plus its distance to the solved optimum.
// The estimator columns are NaN/0 for exact-gradient runs and for row 0.
struct HistoryRow {
  int iter = 0;
  double f = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  double k_err_sq = 0.0;      // squared distance to the optimal gain
  double sigma_err_sq = 0.0;  // squared Frobenius distance to the optimal cov
  double eta1 = 0.0;
  double eta2 = 0.0;
  double f_est = 0.0;
  double s_hat = 0.0;
  double grad_k_std = 0.0;
  double grad_sigma_std = 0.0;
  long rejected_k = 0;
  long rejected_sigma = 0;
  int halvings = 0;
};

struct RunHistory {
  nlohmann::json meta;  // version, config hash, timestamps, resolved config
  std::vector<HistoryRow> rows;
  bool sample_based = false;  // adds the estimator columns to the CSV
};

// Meta block shared by every artifact: tool version, resolved config and its
// hash, creation timestamp, and the solved baseline the run is measured
// against. Timestamps never enter CSV files (those must be byte-identical
// across reruns).
nlohmann::json make_meta(const ExperimentConfig& cfg,
                         const RiccatiSolution& are);

RunHistory make_history(const RpgRun& run, const ExperimentConfig& cfg);
RunHistory make_history(const SbrpgRun& run, const ExperimentConfig& cfg);

// CSV with a fixed header; exact runs:
//   iter,f,gap,relative_gap,k_err_sq,sigma_err_sq,eta1,eta2,halvings
// sample-based runs insert the estimator columns before halvings:
//   f_est,s_hat,grad_k_std,grad_sigma_std,rejected_k,rejected_sigma
void write_history_csv(const RunHistory& history, const std::string& path);

// Pretty-printed JSON with trailing newline.
void write_json_file(const nlohmann::json& doc, const std::string& path);

nlohmann::json riccati_json(const RiccatiSolution& are);
nlohmann::json eval_json(const EvalReport& report);
nlohmann::json bounds_json(const BoundReport& report);

nlohmann::json vec_json(const Vec& v);
nlohmann::json mat_json(const Mat& m);

}  // namespace erlq
