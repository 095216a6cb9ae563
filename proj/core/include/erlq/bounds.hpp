#pragma once

#include <utility>

#include "erlq/system.hpp"

namespace erlq {

// Every theoretical constant the convergence analysis produces, evaluated at
// one policy. Used for diagnostics and property tests only — the optimizers
// never read these on the hot path.
//
// Naming follows the analysis: lambda* are the gradient-domination constants,
// h_sigma/g_sigma/h_k/h2 the state-moment perturbation moduli, h5 the value
// coefficient modulus, h_e/h6-h9 the gradient perturbation moduli and
// h10/h11 the cost perturbation moduli. Schedule fields (sample sizes,
// rollout lengths, radii, tolerance and confidence splits) are only filled in
// by sbrpg_schedule; perturbation_report leaves them NaN.
struct BoundReport {
  // Context of the evaluation.
  double f = 0.0;
  double s = 0.0;
  double gap = 0.0;   // f minus the optimal cost
  double eta1 = 0.0;  // automatic step sizes at this policy
  double eta2 = 0.0;

  // Gradient domination: lambda1 E'E <= gap <= lambda2 |grad_K f|^2 + ...
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda2_proof = 0.0;  // larger constant actually used in the proof

  // Gradient norm bounds.
  double grad_k_bound = 0.0;
  double grad_sigma_bound = 0.0;

  // State-moment sum perturbation: |S' - S| <= h_k|K'-K| + h2|Sigma'-Sigma|
  // valid for |K'-K| <= h_sigma.
  double h_sigma = 0.0;
  double h_sigma_alt = 0.0;  // variant radius from the derivation
  double h2 = 0.0;
  double g_sigma = 0.0;
  double h_k = 0.0;

  // Value coefficient perturbation: |P' - P| <= h5 |K'-K|.
  double h5 = 0.0;

  // Gradient perturbations: |grad_K' - grad_K| <= h6|dK| + h7|dSigma| and
  // |grad_Sigma' - grad_Sigma| <= h8|dK| + h9|dSigma|.
  double h_e = 0.0;
  double h6 = 0.0;
  double h7 = 0.0;
  double h8 = 0.0;
  double h9 = 0.0;

  // Cost perturbation: |f' - f| <= h10|dK| + h11|dSigma|.
  double h10 = 0.0;
  double h11 = 0.0;

  // Entropy curvature coefficient m = (a - 1 - log a)/(a - 1)^2 at a = tau
  // eta1 (the lower eigenvalue floor of admissible covariances).
  double a = 0.0;
  double m = 0.0;

  // Contraction factor and iteration counts.
  double phi = 0.0;
  double n_rpg = 0.0;
  double n_sb = 0.0;

  // Tolerance and confidence splits for the sample-based schedule.
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps3 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;

  // Smoothing radii, batch sizes and rollout lengths the schedule demands.
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double samples_grad_k = 0.0;
  double samples_grad_sigma = 0.0;
  double samples_smoment = 0.0;
  double len_grad_k = 0.0;
  double len_grad_sigma = 0.0;
  double len_smoment = 0.0;

  // Assumption constants: almost-sure growth factor of rollout costs over
  // their mean, and the almost-sure bound on |x_0|.
  double growth_constant = 0.0;
  double init_bound = 0.0;
};

// Evaluates every policy-dependent constant above (schedule fields excepted)
// from the closed forms. Pure and deterministic; throws the evaluator's
// inadmissibility error on bad input. phi is NaN when no contraction factor
// is certified at this policy.
BoundReport perturbation_report(const SystemParams& params, const Vec& k,
                                const Mat& sigma);

// Smallest truncation lengths l with |S - S^(l)| <= epsilon (first) and
// |f - f^(l)| <= epsilon (second). `slack` adds one extra step to each.
std::pair<int, int> rollout_length(const SystemParams& params, const Vec& k,
                                   const Mat& sigma, double epsilon,
                                   bool slack = false);

// Smallest N with N >= (2 dim/eps^2)(sigma_sq + range*eps/(3 sqrt(dim)))
// log(dim/kappa): the sample size under which the mean of N i.i.d. vectors
// with per-sample second moment sigma_sq and norm bound `range` deviates by
// more than eps with probability below kappa.
long long bernstein_sample_size(double sigma_sq, double range, double epsilon,
                                double kappa, int dim, bool slack = false);

// Full theoretical schedule for the sample-based optimizer: iteration count
// n_sb, tolerance splits eps1-eps3, confidence splits kappa1-kappa3 and the
// radii/batch sizes/rollout lengths they imply. Reported for diagnostics;
// the run loop does not consume it by default (the constants are far too
// conservative to run as-is).
BoundReport sbrpg_schedule(const SystemParams& params, const Vec& k0,
                           const Mat& sigma0, double epsilon, double kappa,
                           double growth_constant = 10.0, bool slack = false);

}  // namespace erlq
