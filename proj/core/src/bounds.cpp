#include "erlq/bounds.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

#include "erlq/errors.hpp"
#include "erlq/eval.hpp"
#include "erlq/rpg.hpp"

namespace erlq {

namespace {

constexpr double kPi = 3.14159265358979323846;

double spectral_norm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double log_det_spd(const Mat& m) {
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw NumericalError("log_det_spd", "degenerate covariance");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Entropy-offset part of the running cost: Tr(Sigma R) minus tau/2 times the
// differential entropy constant of N(0, Sigma).
double entropy_offset(const SystemParams& params, const Mat& sigma) {
  const int n = params.n();
  const double logdet = n * std::log(2.0 * kPi) + log_det_spd(sigma);
  return (sigma * params.R).trace() -
         0.5 * params.tau * (n + logdet);
}

int ceil_length(double raw, bool slack) {
  int l = static_cast<int>(std::ceil(raw));
  if (l < 1) l = 1;
  return slack ? l + 1 : l;
}

double ceil_or_inf(double raw, bool slack) {
  if (!std::isfinite(raw)) return raw;
  double v = std::ceil(raw);
  if (v < 1.0) v = 1.0;
  return slack ? v + 1.0 : v;
}

}  // namespace

BoundReport perturbation_report(const SystemParams& params, const Vec& k,
                                const Mat& sigma) {
  const int n = params.n();
  const double gamma = params.gamma;
  const EvalReport ev = evaluate(params, k, sigma);
  const RiccatiSolution are = solve_are(params);

  const Mat noise_gram = params.bbdd();
  const double gram_norm = spectral_norm(noise_gram);
  const double gram_trace = noise_gram.trace();
  const Mat mtilde = params.R + gamma * ev.p_k * noise_gram;
  const double mtilde_norm = spectral_norm(mtilde);
  const double r_min = min_eigenvalue(params.R);
  const double r_norm = spectral_norm(params.R);
  const double sigma_min = min_eigenvalue(sigma);
  const double sigma_norm = spectral_norm(sigma);
  const double mu = params.init.mu();
  const double decay = 1.0 - gamma * ev.v_k;

  BoundReport rep;
  rep.f = ev.f;
  rep.s = ev.s;
  rep.gap = ev.f - are.f_star;
  const double gap_pos = std::max(rep.gap, 0.0);
  rep.init_bound = params.init.bound();

  rep.lambda1 = mu / mtilde_norm;
  rep.lambda2 = 1.0 / (mu * r_min);
  // Constant the proof actually certifies in front of |grad_K f|^2: the
  // optimal policy's state-moment sum over 4 mu^2 sigma_min(R). The quadratic
  // advantage dips at most |E|^2/4 below zero, and |grad| = S |E| >= mu |E|.
  rep.lambda2_proof = s_k_sigma(params, are.k_star, are.sigma_star) /
                      (4.0 * mu * mu * r_min);

  const double psi = entropy_offset(params, sigma);
  // |E_K| <= 2 sqrt(gap / lambda1) by gradient domination, and the
  // state-moment sum is at most (f - psi/(1-gamma))/Q.
  rep.grad_k_bound = 2.0 * ((ev.f - psi / (1.0 - gamma)) / params.Q) *
                     std::sqrt(gap_pos / rep.lambda1);
  rep.grad_sigma_bound =
      (mtilde_norm + 0.5 * params.tau / sigma_min) / (1.0 - gamma);

  // Cross term |K' (B'B + D'D) - A B| shared by several moduli.
  const double cross = (k.transpose() * noise_gram - params.A * params.B).norm();
  const auto radius = [&](double c) {
    return c / (std::sqrt(c * gram_norm + cross * cross) + cross);
  };
  rep.h_sigma = radius(0.5 * mu * mu / (ev.s * ev.s));
  rep.h_sigma_alt = radius(0.5 * decay * decay);
  rep.h2 = gamma * gram_trace / ((1.0 - gamma) * decay);
  rep.g_sigma =
      2.0 / (decay * decay) * (2.0 * cross + gram_norm * rep.h_sigma);
  rep.h_k = 2.0 * rep.g_sigma *
            ((1.0 - gamma) * mu + gamma * (sigma * noise_gram).trace()) /
            (1.0 - gamma);

  const double k_norm = k.norm();
  rep.h5 = 3.0 * k_norm * r_norm / decay +
           (params.Q + 4.0 * r_norm * k_norm * k_norm) * rep.g_sigma;

  rep.h_e = 2.0 * (r_norm + gamma * std::abs(params.A) * rep.h5 * params.B.norm() +
                   gamma * ev.p_k * gram_norm +
                   2.0 * gamma * rep.h5 * gram_norm * k_norm);
  const double domination = 2.0 * std::sqrt(gap_pos / rep.lambda1);
  // Computable majorant for the perturbed policy's state-moment sum.
  const double s_majorant =
      ev.s + rep.h_k * rep.h_sigma + rep.h2 * sigma_norm;
  rep.h6 = rep.h_k * domination + rep.h_e * s_majorant;
  rep.h7 = rep.h2 * domination;
  rep.h8 = gamma * gram_norm * rep.h5 / (1.0 - gamma);
  // Inverse-covariance perturbation modulus, valid for Frobenius changes up
  // to sigma_min/2 (where the perturbed inverse is at most twice as large).
  rep.h9 = params.tau / ((1.0 - gamma) * sigma_min * sigma_min);

  rep.h10 =
      (2.0 * gamma * sigma_norm * gram_trace / (1.0 - gamma) + mu) * rep.h5;

  const auto steps = auto_step_sizes(params, k, sigma);
  rep.eta1 = steps.first;
  rep.eta2 = steps.second;
  rep.a = params.tau * rep.eta1;
  rep.m = std::abs(rep.a - 1.0) < 1e-8
              ? 0.5
              : (rep.a - 1.0 - std::log(rep.a)) /
                    ((rep.a - 1.0) * (rep.a - 1.0));

  // Cost response to a covariance change: first order through the gradient
  // norm bound (Frobenius), second order through the entropy curvature.
  rep.h11 = std::sqrt(static_cast<double>(n)) * rep.grad_sigma_bound +
            params.tau * rep.m / (2.0 * (1.0 - gamma)) /
                (sigma_min * sigma_min) * sigma_norm;

  try {
    rep.phi = contraction_phi(params, k, sigma, rep.eta1, rep.eta2, &are);
  } catch (const NumericalError&) {
    rep.phi = std::numeric_limits<double>::quiet_NaN();
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.n_rpg = nan;
  rep.n_sb = nan;
  rep.eps1 = rep.eps2 = rep.eps3 = nan;
  rep.kappa1 = rep.kappa2 = rep.kappa3 = nan;
  rep.r1 = rep.r2 = rep.r3 = nan;
  rep.samples_grad_k = rep.samples_grad_sigma = rep.samples_smoment = nan;
  rep.len_grad_k = rep.len_grad_sigma = rep.len_smoment = nan;
  rep.growth_constant = nan;
  return rep;
}

std::pair<int, int> rollout_length(const SystemParams& params, const Vec& k,
                                   const Mat& sigma, double epsilon,
                                   bool slack) {
  if (!(epsilon > 0.0))
    throw ConfigError("rollout_length epsilon must be positive");
  const double gamma = params.gamma;
  const double log_gamma = std::log(gamma);
  const double s = s_k_sigma(params, k, sigma);
  const double state_weight = params.Q + (k.transpose() * params.R * k)(0, 0);
  const double psi = entropy_offset(params, sigma);
  const double f_scale = state_weight * s + psi / (1.0 - gamma);

  int l_s = 1;
  if (s > epsilon)
    l_s = ceil_length((std::log(epsilon) - std::log(s)) / log_gamma, false);
  int l_f = 1;
  if (f_scale > epsilon)
    l_f = ceil_length((std::log(epsilon) - std::log(f_scale)) / log_gamma,
                      false);
  if (slack) {
    ++l_s;
    ++l_f;
  }
  return {l_s, l_f};
}

long long bernstein_sample_size(double sigma_sq, double range, double epsilon,
                                double kappa, int dim, bool slack) {
  if (!(sigma_sq > 0.0) || !(range > 0.0) || !(epsilon > 0.0) || dim < 1)
    throw ConfigError("bernstein_sample_size inputs must be positive");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw ConfigError("bernstein_sample_size kappa must be in (0, 1)");
  const double d = static_cast<double>(dim);
  const double raw = (2.0 * d / (epsilon * epsilon)) *
                     (sigma_sq + range * epsilon / (3.0 * std::sqrt(d))) *
                     std::log(d / kappa);
  double v = std::ceil(raw);
  if (v < 1.0) v = 1.0;
  if (slack) v += 1.0;
  const double cap = 9.0e18;
  if (v > cap) v = cap;
  return static_cast<long long>(v);
}

BoundReport sbrpg_schedule(const SystemParams& params, const Vec& k0,
                           const Mat& sigma0, double epsilon, double kappa,
                           double growth_constant, bool slack) {
  if (!(epsilon > 0.0))
    throw ConfigError("sbrpg_schedule epsilon must be positive");
  if (!(kappa > 0.0 && kappa < 1.0))
    throw ConfigError("sbrpg_schedule kappa must be in (0, 1)");
  if (!(growth_constant > 0.0))
    throw ConfigError("sbrpg_schedule growth constant must be positive");

  BoundReport rep = perturbation_report(params, k0, sigma0);
  rep.growth_constant = growth_constant;
  const int n = params.n();
  const double gamma = params.gamma;
  const double mu = params.init.mu();
  const RiccatiSolution are = solve_are(params);

  // Strict contraction factor: schedule requests at a policy without a
  // certified factor are an error, not a NaN report.
  rep.phi = contraction_phi(params, k0, sigma0, rep.eta1, rep.eta2, &are);

  const double gap0 = std::max(rep.gap, epsilon);
  rep.n_rpg = ceil_or_inf(
      theoretical_rpg_iterations(params, rep.eta1, gap0, epsilon, are), slack);
  rep.n_sb = ceil_or_inf(
      rep.n_rpg * std::log1p(-rep.phi) / std::log1p(-0.5 * rep.phi), slack);

  const double denom = rep.h10 + rep.h11;
  rep.eps1 = mu * rep.phi * epsilon / (8.0 * rep.eta1 * denom);
  rep.eps2 =
      rep.phi * spectral_norm(sigma0) * epsilon / (2.0 * rep.eta2 * denom);
  rep.eps3 = mu * mu * rep.phi * epsilon /
             (8.0 * rep.eta1 * rep.grad_k_bound * denom);

  rep.kappa1 = 1.0 - std::pow(1.0 - kappa, 1.0 / (4.0 * rep.n_sb));
  rep.kappa2 = 1.0 - std::pow(1.0 - kappa, 1.0 / (2.0 * rep.n_sb));
  rep.kappa3 = rep.kappa1;

  rep.r1 = rep.eps1 / (2.0 * rep.h6);
  rep.r2 = rep.eps2 / (2.0 * rep.h9);
  rep.r3 = std::min({rep.s / (2.0 * rep.h_k), rep.eps3 / (3.0 * rep.h_k),
                     rep.h_sigma});

  const double f = rep.f;
  const double gk_bar = rep.grad_k_bound;
  const double gs_bar = rep.grad_sigma_bound;
  const double big_l = rep.init_bound;
  const double l_sq = big_l * big_l;
  const double d = static_cast<double>(n);

  // Batch size for the gain gradient: two concentration conditions, one for
  // the bounded-by-coefficient part and one for the growth-assumption part.
  {
    const double log_fac = std::log((d + 1.0) / std::sqrt(rep.kappa1));
    const double mean1 = 2.0 * d * f / rep.r1;
    const double sig1 = mean1 * mean1 +
                        (rep.eps1 / 6.0 + gk_bar) * (rep.eps1 / 6.0 + gk_bar);
    const double rng1 = mean1 + rep.eps1 / 6.0 + gk_bar;
    const double mean2 = 2.0 * growth_constant * l_sq * f * rep.r1;
    const double sig2 = mean2 * mean2 +
                        (rep.eps1 / 2.0 + gk_bar) * (rep.eps1 / 2.0 + gk_bar);
    const double rng2 = mean2 + rep.eps1 / 2.0 + gk_bar;
    const auto cond = [&](double ssq, double rng, double tol) {
      return (2.0 * d / (tol * tol)) *
             (ssq + rng * tol / (3.0 * std::sqrt(d))) * log_fac;
    };
    rep.samples_grad_k = ceil_or_inf(
        std::max(cond(sig1, rng1, rep.eps1 / 6.0),
                 cond(sig2, rng2, rep.eps1 / 3.0)),
        slack);
  }

  // Batch size for the covariance gradient.
  {
    const double log_fac = std::log(d / rep.kappa2);
    const double mean1 = 2.0 * d * f / rep.r2;
    const double sig1 = mean1 * mean1 +
                        (rep.eps2 / 2.0 + gs_bar) * (rep.eps2 / 2.0 + gs_bar);
    const double rng1 = mean1 + rep.eps2 / 2.0 + gs_bar;
    const double mean2 = 2.0 * growth_constant * l_sq * f * rep.r2;
    const double sig2 =
        mean2 * mean2 +
        (5.0 * rep.eps2 / 6.0 + gs_bar) * (5.0 * rep.eps2 / 6.0 + gs_bar);
    const double rng2 = mean2 + 5.0 * rep.eps2 / 6.0 + gs_bar;
    const double c1 = (4.0 / (rep.eps2 * rep.eps2)) *
                      (2.0 * sig1 + rng1 * rep.eps2 / 3.0) * log_fac;
    const double c2 = (6.0 / (rep.eps2 * rep.eps2)) *
                      (3.0 * sig2 + rng2 * rep.eps2 / 3.0) * log_fac;
    rep.samples_grad_sigma = ceil_or_inf(std::max(c1, c2), slack);
  }

  // Batch size for the state-moment sum.
  rep.samples_smoment = ceil_or_inf(
      std::sqrt(3.0 * rep.s / rep.eps3 * std::log(d / rep.kappa3)), slack);

  const double log_gamma = std::log(gamma);
  const double psi1 = entropy_offset(params, sigma0);
  const double k_norm_sq = k0.squaredNorm();
  const double r_norm = spectral_norm(params.R);
  {
    const double bracket =
        2.0 * std::abs(f) * (2.0 * k_norm_sq * r_norm + 1.0 / params.Q) +
        std::abs(psi1) * (1.0 + 1.0 / params.Q + 1.0 / (1.0 - gamma));
    rep.len_grad_k = ceil_or_inf(
        (std::log(rep.r1 * rep.eps1 / (3.0 * d)) - std::log(bracket)) /
            log_gamma,
        slack);
  }
  {
    const double logdet = d * std::log(2.0 * kPi) + log_det_spd(sigma0);
    const double psi2 = (sigma0 * params.R).trace() +
                        0.5 * params.tau * (d + 2.0 * logdet);
    const double lead = 1.0 + k_norm_sq * r_norm / params.Q;
    const double bracket =
        lead * 2.0 * f + (lead + 1.0 / (1.0 - gamma)) * std::abs(psi2);
    rep.len_grad_sigma = ceil_or_inf(
        (std::log(rep.eps2 * rep.r2 / (3.0 * d)) - std::log(bracket)) /
            log_gamma,
        slack);
  }
  rep.len_smoment = ceil_or_inf(
      (std::log(rep.eps3 / 3.0) - std::log(rep.s / 2.0)) / log_gamma, slack);

  return rep;
}

}  // namespace erlq
