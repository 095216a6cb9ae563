// Acceptance gate for the release: ten end-to-end checks, one line of output
// each, exit code = number of failures. Every tolerance is pinned here, next
// to the check that uses it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "erlq/bounds.hpp"
#include "erlq/config.hpp"
#include "erlq/eval.hpp"
#include "erlq/report.hpp"
#include "erlq/rng.hpp"
#include "erlq/rollout.hpp"
#include "erlq/rpg.hpp"
#include "erlq/sbrpg.hpp"
#include "erlq/system.hpp"

#include "helpers.hpp"
#include "inequality_suites.hpp"

using namespace erlq;
using namespace erlq::test;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. Baseline solve: residual <= 1e-12 in under a second, and the solved
// policy is stationary for the analytic gradients (norms <= 1e-8).
Outcome criterion_1(const SystemParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const RiccatiSolution are = solve_are(params, 1e-12, 100000);
  const double dt = seconds_since(t0);
  const double gk = grad_k(params, are.k_star, are.sigma_star).norm();
  const double gs = grad_sigma(params, are.k_star, are.sigma_star).norm();
  Outcome out;
  out.pass = dt < 1.0 && are.residual <= 1e-12 && gk <= 1e-8 && gs <= 1e-8;
  out.detail = "residual=" + fmt("%.2e", are.residual) +
               " |grad_K|=" + fmt("%.2e", gk) + " |grad_S|=" + fmt("%.2e", gs) +
               " (" + fmt("%.2f", dt) + " s)";
  return out;
}

// 2. Analytic gradients match central finite differences to 1e-6 relative
// error on 100 random admissible policies, in under 10 s.
Outcome criterion_2(const SystemParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(202);
  double worst_k = 0.0;
  double worst_s = 0.0;
  for (int t = 0; t < 100; ++t) {
    const GaussianPolicy pol = random_admissible_policy(params, rng, 0.1, 2.0);
    const Vec gk = grad_k(params, pol.K, pol.Sigma);
    const Mat gs = grad_sigma(params, pol.K, pol.Sigma);
    worst_k = std::max(worst_k, (gk - fd_grad_k(params, pol.K, pol.Sigma))
                                        .norm() /
                                    std::max(gk.norm(), 1e-12));
    worst_s = std::max(worst_s,
                       (gs - fd_grad_sigma(params, pol.K, pol.Sigma)).norm() /
                           std::max(gs.norm(), 1e-12));
  }
  const double dt = seconds_since(t0);
  Outcome out;
  out.pass = worst_k <= 1e-6 && worst_s <= 1e-6 && dt < 10.0;
  out.detail = "max rel err K=" + fmt("%.2e", worst_k) +
               " Sigma=" + fmt("%.2e", worst_s) + " over 100 policies (" +
               fmt("%.2f", dt) + " s)";
  return out;
}

// 3. The closed-form state-moment sum agrees with its truncated series, with
// the truncation length chosen for a 1e-10 tail, to 1e-8 on 100 policies.
Outcome criterion_3(const SystemParams& params) {
  Rng rng(303);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const GaussianPolicy pol = random_admissible_policy(params, rng);
    const int l = rollout_length(params, pol.K, pol.Sigma, 1e-10).first;
    worst = std::max(worst, std::abs(s_k_sigma(params, pol.K, pol.Sigma) -
                                     truncated_s(params, pol.K, pol.Sigma, l)));
  }
  Outcome out;
  out.pass = worst <= 1e-8;
  out.detail = "max |S - S_l| = " + fmt("%.2e", worst) + " over 100 policies";
  return out;
}

// 4. Monte Carlo consistency: batch means of rollout cost and state-moment
// sums sit within 3 standard errors (plus the certified 1e-4 truncation
// allowance) of the closed forms, M = 1e5, on 10 policies, under 60 s.
Outcome criterion_4(const SystemParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(404);
  const int kPolicies = 10;
  const long kRollouts = 100000;
  int ok = 0;
  double worst_sigmas = 0.0;
  for (int t = 0; t < kPolicies; ++t) {
    const GaussianPolicy pol = random_admissible_policy(params, rng);
    const auto [l_s, l_f] = rollout_length(params, pol.K, pol.Sigma, 1e-4);
    const int l = std::max(l_s, l_f);
    double sum_f = 0.0, sq_f = 0.0, sum_s = 0.0, sq_s = 0.0;
    for (long i = 0; i < kRollouts; ++i) {
      const Trajectory traj = sample_rollout(
          params, pol, l, substream(909, static_cast<std::uint64_t>(t),
                                    static_cast<std::uint64_t>(i)));
      sum_f += traj.discounted_cost;
      sq_f += traj.discounted_cost * traj.discounted_cost;
      sum_s += traj.discounted_sq_states;
      sq_s += traj.discounted_sq_states * traj.discounted_sq_states;
    }
    const double mean_f = sum_f / kRollouts;
    const double mean_s = sum_s / kRollouts;
    const double se_f = std::sqrt(
        std::max(sq_f / kRollouts - mean_f * mean_f, 0.0) / kRollouts);
    const double se_s = std::sqrt(
        std::max(sq_s / kRollouts - mean_s * mean_s, 0.0) / kRollouts);
    const double err_f = std::abs(mean_f - cost_f(params, pol.K, pol.Sigma));
    const double err_s =
        std::abs(mean_s - s_k_sigma(params, pol.K, pol.Sigma));
    const bool pass_f = err_f <= 3.0 * se_f + 1e-4;
    const bool pass_s = err_s <= 3.0 * se_s + 1e-4;
    worst_sigmas = std::max(
        worst_sigmas, std::max((err_f - 1e-4) / std::max(se_f, 1e-300),
                               (err_s - 1e-4) / std::max(se_s, 1e-300)));
    if (pass_f && pass_s) ++ok;
  }
  const double dt = seconds_since(t0);
  Outcome out;
  out.pass = ok == kPolicies && dt < 60.0;
  out.detail = std::to_string(ok) + "/10 policies within 3 SE (worst " +
               fmt("%.2f", worst_sigmas) + " SE) (" + fmt("%.2f", dt) + " s)";
  return out;
}

// 5. Exact-gradient optimizer: monotone gap descent, geometric envelope
// (1-phi)^t gap_0, convergence to 1e-6 within the certified iteration count,
// under 5 s.
Outcome criterion_5(const SystemParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  RpgConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.max_iter = 20000;
  cfg.record_every = 1;
  const RpgRun run =
      run_rpg(params, Vec::Zero(params.n()),
              0.5 * Mat::Identity(params.n(), params.n()), cfg);
  const double dt = seconds_since(t0);
  bool monotone = true;
  bool envelope = true;
  const double gap0 = run.records.front().gap;
  for (size_t i = 1; i < run.records.size(); ++i) {
    if (run.records[i].gap > run.records[i - 1].gap + 1e-12) monotone = false;
    if (run.records[i].gap >
        std::pow(1.0 - run.phi, run.records[i].iter) * gap0 * (1.0 + 1e-9))
      envelope = false;
  }
  const bool within_bound =
      static_cast<double>(run.iterations) <= std::ceil(run.theoretical_n);
  Outcome out;
  out.pass = run.converged && monotone && envelope && within_bound && dt < 5.0;
  out.detail = "iters=" + std::to_string(run.iterations) + "/" +
               fmt("%.0f", std::ceil(run.theoretical_n)) +
               (monotone ? " monotone" : " NOT-monotone") +
               (envelope ? " enveloped" : " NOT-enveloped") + " (" +
               fmt("%.2f", dt) + " s)";
  return out;
}

// 6. Inequality suites: 1000 sampled instances per suite, zero violations.
Outcome criterion_6(const SystemParams& params) {
  const RiccatiSolution are = solve_are(params);
  std::vector<SuiteResult> results;
  results.push_back(suite_gradient_domination(params, are, 1000, 601));
  results.push_back(suite_grad_norm_bounds(params, 1000, 602));
  results.push_back(suite_almost_smoothness(params, 1000, 603));
  results.push_back(suite_sigma_cone(params, 1000, 604));
  results.push_back(suite_lower_bound(params, 1000, 605));
  results.push_back(suite_s_perturbation(params, 1000, 606));
  results.push_back(suite_p_perturbation(params, 1000, 607));
  results.push_back(suite_grad_perturbation(params, 1000, 608));
  results.push_back(suite_f_perturbation(params, 1000, 609));
  long long violations = 0;
  std::ostringstream os;
  for (const SuiteResult& r : results) {
    violations += r.violations;
    if (r.violations > 0)
      os << " [" << r.name << ": " << r.violations << "/" << r.trials << "]";
  }
  Outcome out;
  out.pass = violations == 0;
  out.detail = "9 suites x >=1000 instances, " + std::to_string(violations) +
               " violations" + os.str();
  return out;
}

// 7. Smoothed-gradient coefficient: with exact costs, r = 1e-3, M = 2e5, the
// ambient-dimension estimators land within 1e-2 (1+|true|) of the analytic
// gradients; the literal-n covariance estimator misses by exactly the
// documented 2/(n+1) scale factor on the same draws.
Outcome criterion_7(const SystemParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  const Vec k0 = Vec::Zero(params.n());
  const Mat s0 = 0.5 * Mat::Identity(params.n(), params.n());
  SbrpgConfig cfg;
  cfg.exact_cost = true;
  cfg.samples = 200000;
  cfg.radius_k = 1e-3;
  cfg.radius_sigma = 1e-3;
  cfg.coefficient_mode = CoefficientMode::kAmbientDim;

  const Vec true_k = grad_k(params, k0, s0);
  const Mat true_s = grad_sigma(params, k0, s0);
  const auto [gk, shat] = estimate_grad_k_and_s(params, k0, s0, cfg, 707);
  const GradientEstimate gs = estimate_grad_sigma(params, k0, s0, cfg, 708);
  const double err_k = (gk.value - true_k).norm();
  const double err_s = (gs.value - true_s).norm();
  const double tol_k = 1e-2 * (1.0 + true_k.norm());
  const double tol_s = 1e-2 * (1.0 + true_s.norm());

  SbrpgConfig lit = cfg;
  lit.coefficient_mode = CoefficientMode::kLiteral;
  const GradientEstimate gs_lit = estimate_grad_sigma(params, k0, s0, lit, 708);
  const double err_lit = (gs_lit.value - true_s).norm();
  // Identical draws: the two modes differ exactly by d_lit/d_amb = 2/(n+1).
  const double factor_dev =
      (0.5 * (params.n() + 1.0) * gs_lit.value - gs.value).norm();
  const bool factor_exact = factor_dev <= 1e-9 * gs.value.norm();

  const double dt = seconds_since(t0);
  Outcome out;
  out.pass = err_k <= tol_k && err_s <= tol_s && err_lit > tol_s &&
             factor_exact && dt < 30.0;
  out.detail = "errK=" + fmt("%.2e", err_k) + "<=" + fmt("%.2e", tol_k) +
               " errS=" + fmt("%.2e", err_s) + "<=" + fmt("%.2e", tol_s) +
               " literal errS=" + fmt("%.2e", err_lit) +
               (factor_exact ? " factor 2/(n+1) exact" : " FACTOR MISMATCH") +
               " (" + fmt("%.2f", dt) + " s)";
  return out;
}

// 8. Sample-based optimizer end to end, desk-scale defaults, seeds 1..10:
// final relative gap <= 0.10, and 10x reduction of both squared policy
// errors, each in at least 8 of 10 seeds, under 2 minutes. (The per-seed
// pass counts are the acceptance reading of the aggregate criterion.)
Outcome criterion_8() {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig base = reference_experiment();
  int gap_ok = 0;
  int k_ok = 0;
  int s_ok = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SbrpgConfig cfg = base.sbrpg;
    cfg.seed = seed;
    cfg.record_every = cfg.iterations;
    const SbrpgRun run =
        run_sbrpg(base.system, base.k0, base.sigma0, cfg);
    const SbrpgRecord& first = run.records.front();
    const SbrpgRecord& last = run.records.back();
    const double rel_gap = std::abs(last.f - run.are.f_star) / run.are.f_star;
    const double k0_err = (first.k - run.are.k_star).squaredNorm();
    const double s0_err = (first.sigma - run.are.sigma_star).squaredNorm();
    const double k_err = (last.k - run.are.k_star).squaredNorm();
    const double s_err = (last.sigma - run.are.sigma_star).squaredNorm();
    if (rel_gap <= 0.10) ++gap_ok;
    if (k_err <= k0_err / 10.0) ++k_ok;
    if (s_err <= s0_err / 10.0) ++s_ok;
  }
  const double dt = seconds_since(t0);
  Outcome out;
  out.pass = gap_ok >= 8 && k_ok >= 8 && s_ok >= 8 && dt < 120.0;
  out.detail = "rel_gap<=0.10: " + std::to_string(gap_ok) +
               "/10, K-err 10x: " + std::to_string(k_ok) +
               "/10, Sigma-err 10x: " + std::to_string(s_ok) +
               "/10 (need >=8 each) (" + fmt("%.1f", dt) + " s)";
  return out;
}

std::string csv_bytes_for(const SystemParams& params, const ExperimentConfig& base,
                          int threads, const std::filesystem::path& path) {
  SbrpgConfig cfg = base.sbrpg;
  cfg.samples = 300;
  cfg.horizon = 25;
  cfg.iterations = 12;
  cfg.seed = 42;
  cfg.threads = threads;
  cfg.record_every = 1;
  const SbrpgRun run = run_sbrpg(params, base.k0, base.sigma0, cfg);
  ExperimentConfig used = base;
  used.sbrpg = cfg;
  write_history_csv(make_history(run, used), path.string());
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 9. Reproducibility: identical config and seed give byte-identical CSV
// across reruns and across thread counts.
Outcome criterion_9(const SystemParams& params) {
  const ExperimentConfig base = reference_experiment();
  const auto dir = std::filesystem::temp_directory_path();
  const std::string a =
      csv_bytes_for(params, base, 1, dir / "erlq_acc_run_a.csv");
  const std::string b =
      csv_bytes_for(params, base, 1, dir / "erlq_acc_run_b.csv");
  const std::string c =
      csv_bytes_for(params, base, 4, dir / "erlq_acc_run_c.csv");
  std::filesystem::remove(dir / "erlq_acc_run_a.csv");
  std::filesystem::remove(dir / "erlq_acc_run_b.csv");
  std::filesystem::remove(dir / "erlq_acc_run_c.csv");
  Outcome out;
  out.pass = !a.empty() && a == b && a == c;
  out.detail = std::string("rerun bytes ") + (a == b ? "equal" : "DIFFER") +
               ", 1-thread vs 4-thread bytes " +
               (a == c ? "equal" : "DIFFER") + " (" +
               std::to_string(a.size()) + " bytes)";
  return out;
}

// 10. Schedule sanity: finite positive schedule with N_SB >= N_RPG, and the
// sample-size calculator is validated empirically: batches of N unit sphere
// vectors (second moment 1, norm bound 1) must have mean norm <= 0.3 in at
// least a 1-kappa fraction of 200 trials at kappa = 0.05.
Outcome criterion_10(const SystemParams& params) {
  const Vec k0 = Vec::Zero(params.n());
  const Mat s0 = 0.5 * Mat::Identity(params.n(), params.n());
  const BoundReport rep = sbrpg_schedule(params, k0, s0, 0.1, 0.05);
  bool finite = rep.n_rpg > 0.0 && rep.n_sb >= rep.n_rpg;
  for (double v : {rep.eps1, rep.eps2, rep.eps3, rep.r1, rep.r2, rep.r3,
                   rep.samples_grad_k, rep.samples_grad_sigma,
                   rep.samples_smoment, rep.len_grad_k, rep.len_grad_sigma,
                   rep.len_smoment})
    finite = finite && std::isfinite(v) && v > 0.0;
  for (double kap : {rep.kappa1, rep.kappa2, rep.kappa3})
    finite = finite && kap > 0.0 && kap < 1.0;

  const double eps = 0.3;
  const double kappa = 0.05;
  const long long n_samples = bernstein_sample_size(1.0, 1.0, eps, kappa, 3);
  int failures = 0;
  const int kTrials = 200;
  for (int t = 0; t < kTrials; ++t) {
    Rng rng(substream(1010, static_cast<std::uint64_t>(t)));
    Vec mean = Vec::Zero(3);
    for (long long i = 0; i < n_samples; ++i)
      mean += sample_sphere_vec(3, 1.0, rng);
    mean /= static_cast<double>(n_samples);
    if (mean.norm() > eps) ++failures;
  }
  const bool empirical =
      failures <= static_cast<int>(kappa * kTrials + 0.5);
  Outcome out;
  out.pass = finite && empirical;
  out.detail = "N_SB=" + fmt("%.0f", rep.n_sb) + ">=N_RPG=" +
               fmt("%.0f", rep.n_rpg) + ", Bernstein N=" +
               std::to_string(n_samples) + ": " + std::to_string(failures) +
               "/200 deviations > eps (cap " +
               std::to_string(static_cast<int>(kappa * kTrials + 0.5)) + ")";
  return out;
}

}  // namespace

int main() {
  const SystemParams params = reference_experiment().system;
  std::vector<Outcome> outcomes;
  outcomes.push_back(criterion_1(params));
  outcomes.push_back(criterion_2(params));
  outcomes.push_back(criterion_3(params));
  outcomes.push_back(criterion_4(params));
  outcomes.push_back(criterion_5(params));
  outcomes.push_back(criterion_6(params));
  outcomes.push_back(criterion_7(params));
  outcomes.push_back(criterion_8());
  outcomes.push_back(criterion_9(params));
  outcomes.push_back(criterion_10(params));

  int failures = 0;
  for (size_t i = 0; i < outcomes.size(); ++i) {
    const Outcome& o = outcomes[i];
    if (!o.pass) ++failures;
    std::printf("criterion %2zu: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
  }
  std::printf("acceptance: %zu/%zu criteria passed\n",
              outcomes.size() - failures, outcomes.size());
  return failures;
}
