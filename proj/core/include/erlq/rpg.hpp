#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "erlq/errors.hpp"
#include "erlq/eval.hpp"
#include "erlq/system.hpp"

namespace erlq {

struct RpgConfig {
  std::optional<double> eta1;  // empty = automatic (computed at the start)
  std::optional<double> eta2;  // empty = automatic
  double epsilon = 1e-6;       // target gap f - f*
  int max_iter = 100000;
  int record_every = 1;
  bool recompute_steps = false;  // re-derive auto steps every iteration
};

struct RpgRecord {
  int iter = 0;
  Vec K;
  Mat Sigma;
  double f = 0.0;
  double gap = 0.0;
  double phi = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  int halvings = 0;  // cumulative step-size halvings up to this record
};

struct RpgRun {
  std::vector<RpgRecord> records;
  RiccatiSolution are;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double phi = 0.0;
  double theoretical_n = 0.0;  // iteration bound for the requested epsilon
  int iterations = 0;
  bool converged = false;
  int halvings = 0;
};

// Raised when a gradient step lands outside the admissible set; carries the
// rejected iterate so the caller can decide (the run loop backtracks).
class StepInadmissibleError : public NumericalError {
 public:
  StepInadmissibleError(const char* op, Vec k, Mat sigma)
      : NumericalError(op, "updated policy left the admissible set"),
        K_new(std::move(k)),
        Sigma_new(std::move(sigma)) {}
  Vec K_new;
  Mat Sigma_new;
};

// One preconditioned gradient step:
//   K'     = K - eta1 E_K
//   Sigma' = Sigma - (eta2/(1-gamma)) Sigma (M~' - (tau/2) Sigma^{-1}) Sigma
// (the Sigma update is Sigma - eta2 Sigma grad_Sigma f Sigma), symmetrized.
std::pair<Vec, Mat> rpg_step(const SystemParams& params, const Vec& K,
                             const Mat& Sigma, double eta1, double eta2);

// Step sizes with eta1 = min{1/(||R|| + (gamma/mu)||B'B+D'D||(f - c_tau)),
// 2/(tau sigma_min(Sigma))} and eta2 = 2 tau (1-gamma) eta1^2, where c_tau is
// the entropy floor (tau n/(2(1-gamma))) log(sigma_min(R)/(pi tau)). When
// sigma_min(R) <= pi tau the floor is unusable and eta1 falls back to
// 1/(||R|| + gamma P_K ||B'B+D'D||).
std::pair<double, double> auto_step_sizes(const SystemParams& params,
                                          const Vec& K, const Mat& Sigma);

// Per-step contraction factor phi = min{eta1 mu sigma_min(R)/S*,
// eta2 a sigma_min(R)/(2(1-gamma))} with a = tau eta1. Throws when the result
// leaves (0, 1). Pass a precomputed solution to avoid re-solving the ARE.
double contraction_phi(const SystemParams& params, const Vec& K,
                       const Mat& Sigma, double eta1, double eta2,
                       const RiccatiSolution* are = nullptr);

// Iteration bound max{S*/(2 mu eta1 sigma_min(R)), 1/(tau^2 eta1^3
// sigma_min(R))} * log(gap0/epsilon).
double theoretical_rpg_iterations(const SystemParams& params, double eta1,
                                  double gap0, double epsilon,
                                  const RiccatiSolution& are);

// Gradient descent until gap <= config.epsilon or max_iter. Backtracks by
// halving both steps (at most 20 times total) if an update leaves the
// admissible set.
RpgRun run_rpg(const SystemParams& params, const Vec& K0, const Mat& Sigma0,
               const RpgConfig& config);

}  // namespace erlq
