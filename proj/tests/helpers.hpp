#pragma once

// Shared fixtures for the test binaries: the bundled benchmark system,
// reference values frozen from an independent fixed-point evaluation of the
// closed forms, finite-difference gradients and random-policy sampling.

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "erlq/config.hpp"
#include "erlq/eval.hpp"
#include "erlq/rng.hpp"
#include "erlq/system.hpp"

namespace erlq::test {

inline SystemParams reference_params() {
  return reference_experiment().system;
}

// Values frozen from an independent fixed-point iteration of the closed
// forms on the reference system, carried to full double precision.
namespace ref {

// Optimum.
inline constexpr double kPStar = 0.65355351130509354;
inline constexpr double kFStar = 1.0082251175556403;
inline constexpr double kSStar = 1.3045280608301517;
inline constexpr double kSigmaMinStar = 0.046764857115668128;
inline constexpr double kMtildeStarNorm = 1.0691789322980307;
inline constexpr double kKStar[3] = {0.0208027064456899, 0.042617197650743226,
                                     0.06463806838667853};
inline constexpr double kSigmaStar[3][3] = {
    {0.049319128823173415, -0.0007277601366328119, -0.0007973217898825691},
    {-0.0007277601366328119, 0.04890052316507943, -0.0013061292721367505},
    {-0.0007973217898825691, -0.0013061292721367503, 0.0482329496916399}};

// At K = 0, Sigma = 0.5 I (the default starting policy).
inline constexpr double kV0 = 0.49089999999999995;
inline constexpr double kP0 = 0.66264661056258689;
inline constexpr double kF0 = 3.0957301959972177;
inline constexpr double kS0 = 1.4782983235040752;
inline constexpr double kGap0 = 2.0875050784415774;

// At K = 0, Sigma = I (log-det term vanishes up to the 2*pi constant).
inline constexpr double kFI = 5.9642885930186855;
inline constexpr double kQI = 5.3016419824560987;
inline constexpr double kSI = 1.6313034258829766;
inline constexpr double kSecondMomentStepI = 0.7218;

// Input-channel second-moment matrix B'B + D'D.
inline constexpr double kTrN = 0.23089999999999999;
inline constexpr double kNNorm = 0.21170089702336958;
inline constexpr double kN[3][3] = {{0.0438, 0.0476, 0.0526},
                                    {0.0476, 0.0718, 0.0856},
                                    {0.0526, 0.0856, 0.1153}};

// Step-size machinery at the starting policy.
inline constexpr double kEntropyFloor = 0.34735656214339372;
inline constexpr double kEta1Auto = 0.77464339220841383;
inline constexpr double kEta2Auto = 0.060007238509215848;
inline constexpr double kPhiAuto = 0.0046484210795838333;
inline constexpr double kNExact1e6 = 3130.4135144730362;
inline constexpr double kNSampleRatio = 2.0023323439320806;

}  // namespace ref

inline Vec reference_k_star() {
  Vec k(3);
  k << ref::kKStar[0], ref::kKStar[1], ref::kKStar[2];
  return k;
}

inline Mat reference_sigma_star() {
  Mat s(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s(i, j) = ref::kSigmaStar[i][j];
  return s;
}

inline Vec zero_gain(const SystemParams& params) {
  return Vec::Zero(params.n());
}

inline Mat half_identity(const SystemParams& params) {
  return 0.5 * Mat::Identity(params.n(), params.n());
}

inline double sigma_min(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

inline double spectral_norm_sym(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline Vec random_gain(const SystemParams& params, Rng& rng, double lo = -0.4,
                       double hi = 0.4) {
  Vec k(params.n());
  for (int i = 0; i < params.n(); ++i) k(i) = rng.uniform(lo, hi);
  return k;
}

inline Mat random_orthogonal(int n, Rng& rng) {
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.gaussian();
  Eigen::HouseholderQR<Mat> qr(g);
  return Mat(qr.householderQ());
}

// SPD matrix with eigenvalues drawn log-uniformly from [eig_lo, eig_hi].
inline Mat random_spd(int n, Rng& rng, double eig_lo, double eig_hi) {
  const Mat q = random_orthogonal(n, rng);
  Vec eigs(n);
  for (int i = 0; i < n; ++i)
    eigs(i) = std::exp(rng.uniform(std::log(eig_lo), std::log(eig_hi)));
  Mat s = q * eigs.asDiagonal() * q.transpose();
  return 0.5 * (s + s.transpose());
}

// Random policy inside the admissible set. Gains in [-0.4, 0.4]^n keep the
// reference system comfortably mean-square stable, so rejection is rare.
inline GaussianPolicy random_admissible_policy(const SystemParams& params,
                                               Rng& rng, double eig_lo = 0.05,
                                               double eig_hi = 2.0) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    GaussianPolicy policy{random_gain(params, rng),
                          random_spd(params.n(), rng, eig_lo, eig_hi)};
    if (is_admissible(params, policy)) return policy;
  }
  throw std::runtime_error("random_admissible_policy: no admissible draw");
}

// Central finite differences of cost_f in K.
inline Vec fd_grad_k(const SystemParams& params, const Vec& k, const Mat& sigma,
                     double h = 1e-6) {
  Vec g(params.n());
  for (int i = 0; i < params.n(); ++i) {
    Vec kp = k;
    Vec km = k;
    kp(i) += h;
    km(i) -= h;
    g(i) = (cost_f(params, kp, sigma) - cost_f(params, km, sigma)) / (2.0 * h);
  }
  return g;
}

// Central finite differences of cost_f in Sigma along symmetric coordinate
// directions. The gradient matrix G is defined by df = sum_ij G_ij dSigma_ij,
// so the derivative along E_ij + E_ji (i != j) equals 2 G_ij.
inline Mat fd_grad_sigma(const SystemParams& params, const Vec& k,
                         const Mat& sigma, double h = 1e-6) {
  const int n = params.n();
  Mat g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Mat dir = Mat::Zero(n, n);
      dir(i, j) = 1.0;
      dir(j, i) = 1.0;
      const double d =
          (cost_f(params, k, sigma + h * dir) -
           cost_f(params, k, sigma - h * dir)) /
          (2.0 * h);
      if (i == j) {
        g(i, i) = d;
      } else {
        g(i, j) = 0.5 * d;
        g(j, i) = 0.5 * d;
      }
    }
  }
  return g;
}

// Constant per-step entropy/control term psi = Tr(Sigma R) - (tau/2)(n +
// log((2 pi)^n det Sigma)); f = (Q + K'RK) S + psi/(1-gamma).
inline double per_step_constant(const SystemParams& params, const Mat& sigma) {
  const int n = params.n();
  Eigen::LLT<Mat> llt(sigma);
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return (params.R * sigma).trace() -
         0.5 * params.tau *
             (n + n * std::log(2.0 * M_PI) + log_det);
}

inline double rel_err(double got, double want, double floor = 1e-12) {
  return std::abs(got - want) / std::max(std::abs(want), floor);
}

}  // namespace erlq::test
