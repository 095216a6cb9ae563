#include "erlq/rpg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace erlq {

namespace {

double spectral_norm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

std::pair<Vec, Mat> rpg_step(const SystemParams& params, const Vec& K,
                             const Mat& Sigma, double eta1, double eta2) {
  const Vec k_new = K - eta1 * e_k(params, K);
  const Mat g = grad_sigma(params, K, Sigma);
  Mat sigma_new = Sigma - eta2 * Sigma * g * Sigma;
  sigma_new = 0.5 * (sigma_new + sigma_new.transpose());
  if (!is_admissible(params, GaussianPolicy{k_new, sigma_new}))
    throw StepInadmissibleError("rpg_step", k_new, sigma_new);
  return {k_new, sigma_new};
}

std::pair<double, double> auto_step_sizes(const SystemParams& params,
                                          const Vec& K, const Mat& Sigma) {
  const int n = params.n();
  const double r_min = min_eig(params.R);
  const double r_norm = spectral_norm(params.R);
  const double n_norm = spectral_norm(params.bbdd());
  const double mu = params.init.mu();

  double cand;
  if (r_min > M_PI * params.tau) {
    const double entropy_floor = (params.tau * n / (2.0 * (1.0 - params.gamma))) *
                                 std::log(r_min / (M_PI * params.tau));
    const double f = cost_f(params, K, Sigma);
    cand = 1.0 / (r_norm + (params.gamma / mu) * n_norm * (f - entropy_floor));
  } else {
    cand = 1.0 / (r_norm + params.gamma * p_k(params, K) * n_norm);
  }
  const double eta1 = std::min(cand, 2.0 / (params.tau * min_eig(Sigma)));
  const double eta2 = 2.0 * params.tau * (1.0 - params.gamma) * eta1 * eta1;
  return {eta1, eta2};
}

double contraction_phi(const SystemParams& params, const Vec& K,
                       const Mat& Sigma, double eta1, double eta2,
                       const RiccatiSolution* are) {
  RiccatiSolution local;
  if (are == nullptr) {
    local = solve_are(params, 1e-12, 1000000);
    are = &local;
  }
  const double s_star = s_k_sigma(params, are->k_star, are->sigma_star);
  const double r_min = min_eig(params.R);
  const double a = params.tau * eta1;
  const double phi =
      std::min(eta1 * params.init.mu() * r_min / s_star,
               eta2 * a * r_min / (2.0 * (1.0 - params.gamma)));
  if (!(phi > 0.0 && phi < 1.0))
    throw NumericalError("contraction_phi",
                         "step sizes violate contraction preconditions");
  return phi;
}

double theoretical_rpg_iterations(const SystemParams& params, double eta1,
                                  double gap0, double epsilon,
                                  const RiccatiSolution& are) {
  if (gap0 <= epsilon) return 0.0;
  const double r_min = min_eig(params.R);
  const double s_star = s_k_sigma(params, are.k_star, are.sigma_star);
  const double lead =
      std::max(s_star / (2.0 * params.init.mu() * eta1 * r_min),
               1.0 / (params.tau * params.tau * eta1 * eta1 * eta1 * r_min));
  return lead * std::log(gap0 / epsilon);
}

RpgRun run_rpg(const SystemParams& params, const Vec& K0, const Mat& Sigma0,
               const RpgConfig& config) {
  if (!is_admissible(params, GaussianPolicy{K0, Sigma0}))
    throw ConfigError("rpg: initial policy is not admissible");
  if (spectral_norm(Sigma0) > 1.0 + 1e-12)
    throw ConfigError("rpg: initial Sigma must satisfy Sigma <= I");
  if (!(config.epsilon > 0.0)) throw ConfigError("rpg.epsilon: must be > 0");

  RpgRun run;
  run.are = solve_are(params, 1e-12, 1000000);

  auto steps = (config.eta1 && config.eta2)
                   ? std::make_pair(*config.eta1, *config.eta2)
                   : auto_step_sizes(params, K0, Sigma0);
  if (config.eta1) steps.first = *config.eta1;
  if (config.eta2) steps.second = *config.eta2;
  run.eta1 = steps.first;
  run.eta2 = steps.second;
  try {
    run.phi =
        contraction_phi(params, K0, Sigma0, run.eta1, run.eta2, &run.are);
  } catch (const NumericalError&) {
    // User-supplied steps outside the guarantee region still run; the
    // geometric envelope simply is not certified.
    run.phi = std::numeric_limits<double>::quiet_NaN();
  }

  Vec k = K0;
  Mat sigma = Sigma0;
  double f = cost_f(params, k, sigma);
  double gap = f - run.are.f_star;
  run.theoretical_n = theoretical_rpg_iterations(params, run.eta1, gap,
                                                 config.epsilon, run.are);

  const int every = config.record_every > 0 ? config.record_every : 1;
  auto record = [&](int iter) {
    run.records.push_back(RpgRecord{iter, k, sigma, f, gap, run.phi, run.eta1,
                                    run.eta2, run.halvings});
  };
  record(0);

  int iter = 0;
  while (gap > config.epsilon && iter < config.max_iter) {
    if (config.recompute_steps) {
      auto fresh = auto_step_sizes(params, k, sigma);
      run.eta1 = fresh.first;
      run.eta2 = fresh.second;
    }
    bool stepped = false;
    for (int attempt = 0; attempt <= 20 && !stepped; ++attempt) {
      try {
        auto next = rpg_step(params, k, sigma, run.eta1, run.eta2);
        k = std::move(next.first);
        sigma = std::move(next.second);
        stepped = true;
      } catch (const StepInadmissibleError&) {
        if (run.halvings >= 20)
          throw NumericalError("run_rpg",
                               "step-size backtracking exhausted (20 halvings)");
        run.eta1 *= 0.5;
        run.eta2 *= 0.5;
        ++run.halvings;
      }
    }
    ++iter;
    f = cost_f(params, k, sigma);
    gap = f - run.are.f_star;
    if (iter % every == 0 || gap <= config.epsilon || iter == config.max_iter)
      record(iter);
  }
  run.iterations = iter;
  run.converged = gap <= config.epsilon;
  return run;
}

}  // namespace erlq
