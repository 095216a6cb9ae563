#include "erlq/rollout.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "erlq/errors.hpp"
#include "erlq/rng.hpp"

namespace erlq {

namespace {

double draw_noise(Rng& rng, NoiseKind kind) {
  return kind == NoiseKind::kGaussian ? rng.gaussian() : rng.rademacher();
}

double draw_initial_state(Rng& rng, const InitialStateDist& init) {
  switch (init.kind) {
    case InitKind::kTwoPoint:
      return rng.rademacher() * init.param;
    case InitKind::kUniform:
      return rng.uniform(-init.param, init.param);
    case InitKind::kGaussian:
    default:
      return init.param * rng.gaussian();
  }
}

}  // namespace

double log_pdf(const GaussianPolicy& policy, double x, const Vec& u) {
  const int n = static_cast<int>(policy.K.size());
  Eigen::LLT<Mat> llt(policy.Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log_pdf", "degenerate covariance");
  const Vec dev = u + policy.K * x;
  const Vec half = llt.matrixL().solve(dev);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (n * std::log(2.0 * M_PI) + log_det + half.squaredNorm());
}

double second_moment_step(const SystemParams& params,
                          const GaussianPolicy& policy, double m) {
  return v_k(params, policy.K) * m + (policy.Sigma * params.bbdd()).trace();
}

Trajectory sample_rollout(const SystemParams& params,
                          const GaussianPolicy& policy, int l,
                          std::uint64_t seed) {
  const int n = params.n();
  Eigen::LLT<Mat> llt(policy.Sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError("sample_rollout", "degenerate covariance");
  const Mat chol = llt.matrixL();

  // Per-action log-density pieces that do not depend on the sampled point.
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(chol(i, i));
  const double log_norm = -0.5 * (n * std::log(2.0 * M_PI) + log_det);

  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(l + 1);
  traj.actions.reserve(l);

  double x = draw_initial_state(rng, params.init);
  traj.states.push_back(x);
  double discount = 1.0;
  Vec z(n), wu(n);
  for (int t = 0; t < l; ++t) {
    for (int i = 0; i < n; ++i) z[i] = rng.gaussian();
    const Vec u = -policy.K * x + chol * z;
    // log pi(u|x) from the whitened draw directly: the quadratic form equals
    // |z|^2 by construction.
    const double logp = log_norm - 0.5 * z.squaredNorm();
    traj.discounted_cost +=
        discount * (params.Q * x * x + u.dot(params.R * u) + params.tau * logp);
    traj.discounted_sq_states += discount * x * x;
    traj.actions.push_back(u);

    const double wx = draw_noise(rng, params.noise);
    for (int i = 0; i < n; ++i) wu[i] = draw_noise(rng, params.noise);
    x = (params.A + wx * params.C) * x +
        (params.B * u).value() + wu.dot(params.D * u);
    if (!std::isfinite(x) || std::abs(x) > 1e15)
      throw NumericalError("sample_rollout", "trajectory diverged at step " +
                                                 std::to_string(t));
    traj.states.push_back(x);
    discount *= params.gamma;
  }
  return traj;
}

}  // namespace erlq
