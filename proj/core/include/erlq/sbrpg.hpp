#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "erlq/eval.hpp"
#include "erlq/rng.hpp"
#include "erlq/system.hpp"

namespace erlq {

// How the smoothed-gradient coefficient d/r^2 picks d.
//
//   kAmbientDim  d equals the dimension of the sphere the perturbation lives
//                on: n for gain perturbations, n(n+1)/2 for symmetric
//                covariance perturbations. This is the choice under which the
//                single-point estimator is unbiased for the smoothed
//                objective, and it is the default.
//   kLiteral     d = n for both estimators. Kept selectable so the effect of
//                the mismatch on the covariance estimate (a constant 2n/(n+1)
//                scale factor in expectation) can be measured.
enum class CoefficientMode { kAmbientDim, kLiteral };

struct SbrpgConfig {
  int samples = 2000;       // M: rollouts per gradient estimate
  int horizon = 30;         // l: rollout truncation length
  double radius_k = 0.35;   // r1: smoothing radius for the gain
  double radius_sigma = 0.025;  // r2: smoothing radius for the covariance
  double eta1 = 0.015;
  double eta2 = 0.05;
  int iterations = 300;     // N: outer iterations
  std::uint64_t seed = 1;
  CoefficientMode coefficient_mode = CoefficientMode::kAmbientDim;
  int threads = 1;
  int record_every = 1;
  // Replace rollout costs with exact evaluations (centered at the current
  // policy). Isolates smoothing/sampling error from truncation noise.
  bool exact_cost = false;
};

// One zeroth-order estimate. `value` is n x 1 for gain gradients, n x n for
// covariance gradients and 1 x 1 for the state-moment sum.
struct GradientEstimate {
  Mat value;
  long samples_used = 0;
  long rejected = 0;          // perturbations redrawn for inadmissibility
  double empirical_std = 0.0; // Frobenius std of the per-sample terms
  double mean_cost = 0.0;     // mean (uncentered) cost across the samples
};

// Uniform draw from the sphere of radius r in R^n.
Vec sample_sphere_vec(int n, double r, Rng& rng);
Vec sample_sphere_vec(int n, double r, std::uint64_t seed);

// Uniform draw from the Frobenius sphere of radius r in the space of
// symmetric n x n matrices (dimension n(n+1)/2, isometric coordinates).
Mat sample_sphere_sym(int n, double r, Rng& rng);
Mat sample_sphere_sym(int n, double r, std::uint64_t seed);

// Single-point estimate of the gain gradient together with the discounted
// state-moment sum, both from the same batch of perturbed rollouts:
//
//   ghat_K = (1/M) sum_i (d/r1^2) f_i U_i,   Shat = (1/M) sum_i S_i,
//
// where f_i and S_i are the truncated discounted cost and squared-state sum
// of a rollout under (K + U_i, Sigma). Perturbations that leave the
// admissible set (or whose rollout diverges) are redrawn; after 100 failed
// attempts for one sample the estimator gives up and throws
// NumericalError("smoothing radius exceeds admissibility margin").
std::pair<GradientEstimate, GradientEstimate> estimate_grad_k_and_s(
    const SystemParams& params, const Vec& k, const Mat& sigma,
    const SbrpgConfig& cfg, std::uint64_t seed);

// Single-point estimate of the covariance gradient from fresh rollouts under
// (K, Sigma + V_i) with symmetric sphere perturbations V_i.
GradientEstimate estimate_grad_sigma(const SystemParams& params, const Vec& k,
                                     const Mat& sigma, const SbrpgConfig& cfg,
                                     std::uint64_t seed);

// Oracle-cost variants: the rollout is replaced by an arbitrary cost
// functional. Used with the exact evaluator (variance studies) and in tests
// (a constant cost must give a zero-mean estimate). When `baseline` is set it
// is subtracted from every cost before weighting, which leaves the estimator
// mean unchanged but shrinks its variance.
GradientEstimate estimate_grad_k_oracle(
    int n, const SbrpgConfig& cfg, std::uint64_t seed,
    const std::function<double(const Vec&)>& cost_of_perturbation,
    std::optional<double> baseline);
GradientEstimate estimate_grad_sigma_oracle(
    int n, const SbrpgConfig& cfg, std::uint64_t seed,
    const std::function<double(const Mat&)>& cost_of_perturbation,
    std::optional<double> baseline);

struct SbrpgStepResult {
  Vec k_new;
  Mat sigma_new;
  double s_hat = 0.0;       // shared-batch state-moment estimate
  double f_est = 0.0;       // mean rollout cost in the gain batch
  double grad_k_std = 0.0;
  double grad_sigma_std = 0.0;
  long rejected_k = 0;
  long rejected_sigma = 0;
  int halvings = 0;         // step halvings needed to stay admissible
};

// One outer iteration: gain phase (shared-batch gradient and state-moment
// estimates, preconditioned update K <- K - eta1 ghat_K / Shat), then
// covariance phase at the updated gain (Sigma <- Sigma - eta2 Sigma ghat Sigma).
// A phase whose update leaves the admissible set retries with a halved step,
// reusing the same estimate, up to 20 times.
SbrpgStepResult sbrpg_step(const SystemParams& params, const Vec& k,
                           const Mat& sigma, const SbrpgConfig& cfg,
                           std::uint64_t iteration_seed);

struct SbrpgRecord {
  int iter = 0;
  Vec k;
  Mat sigma;
  double f = 0.0;           // exact cost of the recorded policy
  double gap = 0.0;
  double f_est = 0.0;
  double s_hat = 0.0;
  double grad_k_std = 0.0;
  double grad_sigma_std = 0.0;
  long rejected_k = 0;
  long rejected_sigma = 0;
  int halvings = 0;
};

struct SbrpgRun {
  std::vector<SbrpgRecord> records;
  RiccatiSolution are;
  int iterations = 0;
};

// Full run from (K0, Sigma0). Exact evaluation is used only for reporting;
// the iterates themselves see nothing but rollouts (unless cfg.exact_cost).
// Bit-identical output for a fixed seed regardless of cfg.threads.
SbrpgRun run_sbrpg(const SystemParams& params, const Vec& k0, const Mat& sigma0,
                   const SbrpgConfig& cfg);

}  // namespace erlq
