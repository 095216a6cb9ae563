#pragma once

#include "erlq/system.hpp"

namespace erlq {

// Snapshot of every closed-form quantity for one policy.
struct EvalReport {
  double v_k = 0.0;
  double p_k = 0.0;
  double q = 0.0;
  double f = 0.0;
  double s = 0.0;
  Vec e_k;
  Vec grad_k;
  Mat grad_sigma;
};

// Optimal-policy baseline from value iteration on the fixed-point equation
// for P.
struct RiccatiSolution {
  double p_star = 0.0;
  double q_star = 0.0;
  Vec k_star;
  Mat sigma_star;
  double f_star = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

// Fixed point P_K = (Q + K'RK) / (1 - gamma V_K). Throws
// NumericalError("p_k", "inadmissible gain (divergent series)") when
// gamma V_K >= 1.
double p_k(const SystemParams& params, const Vec& K);

// q_{K,Sigma} = [Tr(Sigma(R + gamma P_K (B'B+D'D)))
//                - (tau/2)(n + log((2 pi)^n det Sigma))] / (1 - gamma).
double q_k_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma);

// f(K, Sigma) = P_K mu + q_{K,Sigma}.
double cost_f(const SystemParams& params, const Vec& K, const Mat& Sigma);

// Discounted second-moment sum S = sum_t gamma^t E x_t^2, evaluated by the
// singularity-free form [(1-gamma) mu + gamma Tr(Sigma(B'B+D'D))] /
// [(1-gamma)(1 - gamma V_K)].
double s_k_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma);

// E_K = 2RK + 2 gamma P_K [(B'B+D'D)K - A B'];  grad_K f = E_K * S.
Vec e_k(const SystemParams& params, const Vec& K);
Vec grad_k(const SystemParams& params, const Vec& K, const Mat& Sigma);

// grad_Sigma f = (1-gamma)^{-1} [(R + gamma P_K (B'B+D'D))' -
// (tau/2) Sigma^{-1}], symmetrized.
Mat grad_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma);

// All of the above in one report.
EvalReport evaluate(const SystemParams& params, const Vec& K, const Mat& Sigma);

// Finite-horizon truncations: f^(l) and S^(l) (expectations of the length-l
// discounted sums).
double truncated_cost(const SystemParams& params, const Vec& K,
                      const Mat& Sigma, int l);
double truncated_s(const SystemParams& params, const Vec& K, const Mat& Sigma,
                   int l);

// Value iteration P_{j+1} = Q + gamma P (A^2+C^2) - (gamma A P)^2 *
// B (R + gamma P (B'B+D'D))^{-1} B' from P_0 = Q, then
// K* = gamma (R + gamma P N)^{-1} A P B', Sigma* = (tau/2)(R + gamma P N)^{-1}.
RiccatiSolution solve_are(const SystemParams& params, double tol = 1e-14,
                          int max_iter = 100000);

}  // namespace erlq
