#include "erlq/eval.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "erlq/errors.hpp"
#include "erlq/rollout.hpp"

namespace erlq {

namespace {

// log det of a symmetric positive definite matrix; throws on failure.
double log_det_spd(const Mat& S, const char* op) {
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success)
    throw NumericalError(op, "degenerate covariance");
  double out = 0.0;
  for (int i = 0; i < S.rows(); ++i)
    out += 2.0 * std::log(llt.matrixL()(i, i));
  return out;
}

}  // namespace

double p_k(const SystemParams& params, const Vec& K) {
  const double v = v_k(params, K);
  if (params.gamma * v >= 1.0)
    throw NumericalError("p_k", "inadmissible gain (divergent series)");
  return (params.Q + K.dot(params.R * K)) / (1.0 - params.gamma * v);
}

double q_k_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma) {
  const int n = params.n();
  const double p = p_k(params, K);
  const Mat m_tilde = params.R + params.gamma * p * params.bbdd();
  const double log_det = log_det_spd(Sigma, "q_k_sigma");
  const double entropy_term =
      0.5 * params.tau * (n + n * std::log(2.0 * M_PI) + log_det);
  return ((Sigma * m_tilde).trace() - entropy_term) / (1.0 - params.gamma);
}

double cost_f(const SystemParams& params, const Vec& K, const Mat& Sigma) {
  return p_k(params, K) * params.init.mu() + q_k_sigma(params, K, Sigma);
}

double s_k_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma) {
  const double v = v_k(params, K);
  if (params.gamma * v >= 1.0)
    throw NumericalError("s_k_sigma", "inadmissible gain (divergent series)");
  const double mu = params.init.mu();
  const double inflow = (Sigma * params.bbdd()).trace();
  return ((1.0 - params.gamma) * mu + params.gamma * inflow) /
         ((1.0 - params.gamma) * (1.0 - params.gamma * v));
}

Vec e_k(const SystemParams& params, const Vec& K) {
  const double p = p_k(params, K);
  return 2.0 * params.R * K +
         2.0 * params.gamma * p *
             (params.bbdd() * K - params.A * params.B.transpose());
}

Vec grad_k(const SystemParams& params, const Vec& K, const Mat& Sigma) {
  return e_k(params, K) * s_k_sigma(params, K, Sigma);
}

Mat grad_sigma(const SystemParams& params, const Vec& K, const Mat& Sigma) {
  const double p = p_k(params, K);
  Eigen::LLT<Mat> llt(Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("grad_sigma", "degenerate covariance");
  const Mat inv = llt.solve(Mat::Identity(Sigma.rows(), Sigma.cols()));
  const Mat m_tilde = params.R + params.gamma * p * params.bbdd();
  Mat g = (m_tilde.transpose() - 0.5 * params.tau * inv) / (1.0 - params.gamma);
  return 0.5 * (g + g.transpose());
}

EvalReport evaluate(const SystemParams& params, const Vec& K,
                    const Mat& Sigma) {
  EvalReport r;
  r.v_k = v_k(params, K);
  r.p_k = p_k(params, K);
  r.q = q_k_sigma(params, K, Sigma);
  r.f = r.p_k * params.init.mu() + r.q;
  r.s = s_k_sigma(params, K, Sigma);
  r.e_k = e_k(params, K);
  r.grad_k = r.e_k * r.s;
  r.grad_sigma = grad_sigma(params, K, Sigma);
  return r;
}

double truncated_s(const SystemParams& params, const Vec& K, const Mat& Sigma,
                   int l) {
  const double v = v_k(params, K);
  if (params.gamma * v >= 1.0)
    throw NumericalError("truncated_s", "inadmissible gain (divergent series)");
  const double inflow = (Sigma * params.bbdd()).trace();
  double m = params.init.mu();
  double sum = 0.0;
  double discount = 1.0;
  for (int t = 0; t < l; ++t) {
    sum += discount * m;
    m = v * m + inflow;
    discount *= params.gamma;
  }
  return sum;
}

double truncated_cost(const SystemParams& params, const Vec& K,
                      const Mat& Sigma, int l) {
  const int n = params.n();
  const double log_det = log_det_spd(Sigma, "truncated_cost");
  // Expected per-step cost is (Q + K'RK) E x_t^2 + psi, with psi the
  // Sigma-dependent constant part (control noise cost minus entropy bonus).
  const double psi =
      (Sigma * params.R).trace() -
      0.5 * params.tau * (n + n * std::log(2.0 * M_PI) + log_det);
  const double state_weight = params.Q + K.dot(params.R * K);
  const double geo = (1.0 - std::pow(params.gamma, l)) / (1.0 - params.gamma);
  return state_weight * truncated_s(params, K, Sigma, l) + psi * geo;
}

RiccatiSolution solve_are(const SystemParams& params, double tol,
                          int max_iter) {
  if (!(tol > 0.0)) throw ConfigError("solver.are_tol: must be > 0");
  const Mat bbdd = params.bbdd();
  const double drift = params.A * params.A + params.C * params.C;

  auto step = [&](double p) {
    const Mat m_tilde = params.R + params.gamma * p * bbdd;
    Eigen::LLT<Mat> llt(m_tilde);
    if (llt.info() != Eigen::Success)
      throw NumericalError("solve_are", "ARE value iteration failed");
    const double gap = params.gamma * params.A * p;
    const double correction =
        gap * gap * (params.B * llt.solve(params.B.transpose())).value();
    return params.Q + params.gamma * p * drift - correction;
  };

  double p = params.Q;
  int iters = 0;
  for (; iters < max_iter; ++iters) {
    const double next = step(p);
    if (!std::isfinite(next) || next > 1e12)
      throw NumericalError("solve_are", "ARE value iteration failed");
    const bool done = std::abs(next - p) < tol;
    p = next;
    if (done) break;
  }
  if (iters >= max_iter)
    throw NumericalError("solve_are", "ARE value iteration failed");

  RiccatiSolution sol;
  sol.p_star = p;
  sol.iterations = iters + 1;
  sol.residual = std::abs(step(p) - p);

  const Mat m_tilde = params.R + params.gamma * p * bbdd;
  Eigen::LLT<Mat> llt(m_tilde);
  if (llt.info() != Eigen::Success)
    throw NumericalError("solve_are", "ARE value iteration failed");
  sol.k_star =
      params.gamma * params.A * p * llt.solve(params.B.transpose());
  Mat sigma = 0.5 * params.tau *
              llt.solve(Mat::Identity(params.n(), params.n()));
  sol.sigma_star = 0.5 * (sigma + sigma.transpose());
  if (!is_admissible(params, GaussianPolicy{sol.k_star, sol.sigma_star}))
    throw NumericalError("solve_are", "solved policy outside admissible set");
  sol.q_star = q_k_sigma(params, sol.k_star, sol.sigma_star);
  sol.f_star = sol.p_star * params.init.mu() + sol.q_star;
  return sol;
}

}  // namespace erlq
