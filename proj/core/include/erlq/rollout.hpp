#pragma once

#include <cstdint>
#include <vector>

#include "erlq/system.hpp"

namespace erlq {

// One simulated path of length l: states x_0..x_l, actions u_0..u_{l-1},
// and the two discounted sums the estimators consume.
struct Trajectory {
  std::vector<double> states;
  std::vector<Vec> actions;
  double discounted_cost = 0.0;       // sum_t gamma^t (Q x^2 + u'Ru + tau log pi)
  double discounted_sq_states = 0.0;  // sum_t gamma^t x_t^2
  std::uint64_t seed = 0;
};

// log N(-Kx, Sigma)(u). Throws NumericalError("log_pdf", "degenerate
// covariance") when Sigma is not positive definite.
double log_pdf(const GaussianPolicy& policy, double x, const Vec& u);

// Exact one-step propagation of the state second moment:
// E x_{t+1}^2 = V_K m + Tr(Sigma (B'B + D'D)).
double second_moment_step(const SystemParams& params,
                          const GaussianPolicy& policy, double m);

// Simulates l steps of the plant under the policy. Deterministic in
// (params, policy, l, seed). Throws NumericalError("sample_rollout",
// "trajectory diverged at step t") if |x| exceeds 1e15.
Trajectory sample_rollout(const SystemParams& params,
                          const GaussianPolicy& policy, int l,
                          std::uint64_t seed);

}  // namespace erlq
