#include "erlq/system.hpp"

#include <Eigen/Eigenvalues>

#include "erlq/errors.hpp"

namespace erlq {

void SystemParams::validate() const {
  const int dim = n();
  if (dim < 1) throw ConfigError("system.B: control dimension must be >= 1");
  if (D.rows() != dim || D.cols() != dim)
    throw ConfigError("system.D: must be n x n with n = len(B)");
  if (R.rows() != dim || R.cols() != dim)
    throw ConfigError("system.R: must be n x n with n = len(B)");
  if (!(Q > 0.0)) throw ConfigError("system.Q: must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw ConfigError("system.gamma: must lie in (0, 1)");
  if (!(tau > 0.0)) throw ConfigError("system.tau: must be > 0");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("system.R: must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(R);
  const double rmin = es.eigenvalues().minCoeff();
  if (!(rmin > 0.0)) throw ConfigError("system.R: must be positive definite");
  if (!(tau < 2.0 * rmin))
    throw ConfigError("system.tau: must be < 2 sigma_min(R)");
  if (!(init.param > 0.0))
    throw ConfigError("system.init: distribution parameter must be > 0");
}

double v_k(const SystemParams& params, const Vec& K) {
  const double bk = params.B.dot(K);
  return params.A * params.A + params.C * params.C +
         K.dot(params.bbdd() * K) - 2.0 * params.A * bk;
}

bool is_admissible(const SystemParams& params, const GaussianPolicy& policy) {
  if (policy.K.size() != params.n()) return false;
  if (policy.Sigma.rows() != params.n() || policy.Sigma.cols() != params.n())
    return false;
  if ((policy.Sigma - policy.Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(policy.Sigma);
  if (!(es.eigenvalues().minCoeff() > 0.0)) return false;
  return params.gamma * v_k(params, policy.K) < 1.0;
}

}  // namespace erlq
