#include "erlq/sbrpg.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "erlq/errors.hpp"
#include "erlq/parallel.hpp"
#include "erlq/rollout.hpp"

namespace erlq {

namespace {

// Stream labels so every (iteration, role, sample, attempt) tuple gets an
// independent generator. Redrawing a rejected perturbation advances the
// sample's own perturbation stream; rollouts get a fresh stream per attempt.
constexpr std::uint64_t kStreamPertK = 0;
constexpr std::uint64_t kStreamRollK = 1;
constexpr std::uint64_t kStreamPertSigma = 2;
constexpr std::uint64_t kStreamRollSigma = 3;

constexpr int kMaxRedraws = 100;
constexpr int kMaxHalvings = 20;

double coefficient_dim(CoefficientMode mode, int n, bool symmetric) {
  if (mode == CoefficientMode::kLiteral) return static_cast<double>(n);
  return symmetric ? 0.5 * n * (n + 1) : static_cast<double>(n);
}

void check_covariance(const Mat& sigma, const std::string& op) {
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericalError(op, "degenerate covariance");
}

struct Sample {
  double cost = 0.0;
  double smoment = 0.0;
};

// cost(i, attempt, perturbation) -> sample or nullopt when the perturbed
// policy must be rejected.
template <typename Pert>
using TrialFn =
    std::function<std::optional<Sample>(long, int, const Pert&)>;

template <typename Pert>
struct BatchResult {
  std::vector<Pert> perturbations;
  std::vector<Sample> samples;
  std::vector<long> rejected;
};

template <typename Pert, typename DrawFn>
BatchResult<Pert> run_batch(int samples, int threads, std::uint64_t seed,
                            std::uint64_t pert_stream, DrawFn draw,
                            const TrialFn<Pert>& trial, const std::string& op) {
  BatchResult<Pert> out;
  out.perturbations.resize(samples);
  out.samples.resize(samples);
  out.rejected.assign(samples, 0);
  parallel_for(samples, threads, [&](long i) {
    Rng pert_rng(substream(seed, pert_stream, static_cast<std::uint64_t>(i)));
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      Pert u = draw(pert_rng);
      std::optional<Sample> s = trial(i, attempt, u);
      if (s) {
        out.perturbations[i] = std::move(u);
        out.samples[i] = *s;
        return;
      }
      ++out.rejected[i];
    }
    throw NumericalError(op, "smoothing radius exceeds admissibility margin");
  });
  return out;
}

// Sequentially reduces one batch into a GradientEstimate. `term(i)` is the
// per-sample matrix Z_i; the mean and the Frobenius deviation around it are
// accumulated in index order so the result is independent of thread count.
template <typename TermFn>
GradientEstimate reduce_terms(int samples, int rows, int cols, TermFn term) {
  GradientEstimate est;
  est.samples_used = samples;
  Mat mean = Mat::Zero(rows, cols);
  for (int i = 0; i < samples; ++i) mean += term(i);
  mean /= samples;
  double var = 0.0;
  for (int i = 0; i < samples; ++i)
    var += (term(i) - mean).squaredNorm();
  est.value = mean;
  est.empirical_std = std::sqrt(var / samples);
  return est;
}

}  // namespace

Vec sample_sphere_vec(int n, double r, Rng& rng) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.gaussian();
  double norm = z.norm();
  while (norm == 0.0) {  // measure-zero, but keep the draw well defined
    for (int i = 0; i < n; ++i) z(i) = rng.gaussian();
    norm = z.norm();
  }
  return (r / norm) * z;
}

Vec sample_sphere_vec(int n, double r, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sphere_vec(n, r, rng);
}

Mat sample_sphere_sym(int n, double r, Rng& rng) {
  // Draw on the unit sphere in the isometric coordinates of the symmetric
  // matrices: diagonal entries map one-to-one, each off-diagonal pair (i,j),
  // (j,i) shares one coordinate scaled by 1/sqrt(2). The Frobenius norm of
  // the matrix then equals the Euclidean norm of the coordinates.
  const int dim = n * (n + 1) / 2;
  Vec z = sample_sphere_vec(dim, r, rng);
  Mat v(n, n);
  int idx = 0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j) {
        v(i, i) = z(idx);
      } else {
        v(i, j) = z(idx) * inv_sqrt2;
        v(j, i) = v(i, j);
      }
      ++idx;
    }
  }
  return v;
}

Mat sample_sphere_sym(int n, double r, std::uint64_t seed) {
  Rng rng(seed);
  return sample_sphere_sym(n, r, rng);
}

std::pair<GradientEstimate, GradientEstimate> estimate_grad_k_and_s(
    const SystemParams& params, const Vec& k, const Mat& sigma,
    const SbrpgConfig& cfg, std::uint64_t seed) {
  const int n = params.n();
  const std::string op = "estimate_grad_k_and_s";
  check_covariance(sigma, op);

  std::optional<double> baseline;
  if (cfg.exact_cost) baseline = cost_f(params, k, sigma);

  TrialFn<Vec> trial = [&](long i, int attempt,
                           const Vec& u) -> std::optional<Sample> {
    GaussianPolicy pert{k + u, sigma};
    if (!is_admissible(params, pert)) return std::nullopt;
    if (cfg.exact_cost) {
      return Sample{cost_f(params, pert.K, pert.Sigma),
                    s_k_sigma(params, pert.K, pert.Sigma)};
    }
    const std::uint64_t roll_seed =
        substream(seed, kStreamRollK, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(attempt));
    try {
      Trajectory traj = sample_rollout(params, pert, cfg.horizon, roll_seed);
      return Sample{traj.discounted_cost, traj.discounted_sq_states};
    } catch (const NumericalError&) {
      return std::nullopt;  // diverged rollout: reject and redraw
    }
  };

  auto batch = run_batch<Vec>(
      cfg.samples, cfg.threads, seed, kStreamPertK,
      [&](Rng& rng) { return sample_sphere_vec(n, cfg.radius_k, rng); }, trial,
      op);

  const double coef =
      coefficient_dim(cfg.coefficient_mode, n, /*symmetric=*/false) /
      (cfg.radius_k * cfg.radius_k);
  const double shift = baseline.value_or(0.0);
  GradientEstimate grad = reduce_terms(cfg.samples, n, 1, [&](int i) -> Mat {
    return coef * (batch.samples[i].cost - shift) * batch.perturbations[i];
  });
  GradientEstimate smoment =
      reduce_terms(cfg.samples, 1, 1, [&](int i) -> Mat {
        Mat s(1, 1);
        s(0, 0) = batch.samples[i].smoment;
        return s;
      });
  long rejected = 0;
  double mean_cost = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    rejected += batch.rejected[i];
    mean_cost += batch.samples[i].cost;
  }
  mean_cost /= cfg.samples;
  grad.rejected = rejected;
  grad.mean_cost = mean_cost;
  smoment.rejected = rejected;
  smoment.mean_cost = mean_cost;
  return {std::move(grad), std::move(smoment)};
}

GradientEstimate estimate_grad_sigma(const SystemParams& params, const Vec& k,
                                     const Mat& sigma, const SbrpgConfig& cfg,
                                     std::uint64_t seed) {
  const int n = params.n();
  const std::string op = "estimate_grad_sigma";
  check_covariance(sigma, op);

  std::optional<double> baseline;
  if (cfg.exact_cost) baseline = cost_f(params, k, sigma);

  TrialFn<Mat> trial = [&](long i, int attempt,
                           const Mat& v) -> std::optional<Sample> {
    GaussianPolicy pert{k, sigma + v};
    if (!is_admissible(params, pert)) return std::nullopt;
    if (cfg.exact_cost)
      return Sample{cost_f(params, pert.K, pert.Sigma), 0.0};
    const std::uint64_t roll_seed =
        substream(seed, kStreamRollSigma, static_cast<std::uint64_t>(i),
                  static_cast<std::uint64_t>(attempt));
    try {
      Trajectory traj = sample_rollout(params, pert, cfg.horizon, roll_seed);
      return Sample{traj.discounted_cost, traj.discounted_sq_states};
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  };

  auto batch = run_batch<Mat>(
      cfg.samples, cfg.threads, seed, kStreamPertSigma,
      [&](Rng& rng) { return sample_sphere_sym(n, cfg.radius_sigma, rng); },
      trial, op);

  const double coef =
      coefficient_dim(cfg.coefficient_mode, n, /*symmetric=*/true) /
      (cfg.radius_sigma * cfg.radius_sigma);
  const double shift = baseline.value_or(0.0);
  GradientEstimate grad = reduce_terms(cfg.samples, n, n, [&](int i) -> Mat {
    return coef * (batch.samples[i].cost - shift) * batch.perturbations[i];
  });
  long rejected = 0;
  double mean_cost = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    rejected += batch.rejected[i];
    mean_cost += batch.samples[i].cost;
  }
  grad.rejected = rejected;
  grad.mean_cost = mean_cost / cfg.samples;
  return grad;
}

GradientEstimate estimate_grad_k_oracle(
    int n, const SbrpgConfig& cfg, std::uint64_t seed,
    const std::function<double(const Vec&)>& cost_of_perturbation,
    std::optional<double> baseline) {
  TrialFn<Vec> trial = [&](long, int, const Vec& u) -> std::optional<Sample> {
    return Sample{cost_of_perturbation(u), 0.0};
  };
  auto batch = run_batch<Vec>(
      cfg.samples, cfg.threads, seed, kStreamPertK,
      [&](Rng& rng) { return sample_sphere_vec(n, cfg.radius_k, rng); }, trial,
      "estimate_grad_k_oracle");
  const double coef =
      coefficient_dim(cfg.coefficient_mode, n, /*symmetric=*/false) /
      (cfg.radius_k * cfg.radius_k);
  const double shift = baseline.value_or(0.0);
  GradientEstimate grad = reduce_terms(cfg.samples, n, 1, [&](int i) -> Mat {
    return coef * (batch.samples[i].cost - shift) * batch.perturbations[i];
  });
  double mean_cost = 0.0;
  for (int i = 0; i < cfg.samples; ++i) mean_cost += batch.samples[i].cost;
  grad.mean_cost = mean_cost / cfg.samples;
  return grad;
}

GradientEstimate estimate_grad_sigma_oracle(
    int n, const SbrpgConfig& cfg, std::uint64_t seed,
    const std::function<double(const Mat&)>& cost_of_perturbation,
    std::optional<double> baseline) {
  TrialFn<Mat> trial = [&](long, int, const Mat& v) -> std::optional<Sample> {
    return Sample{cost_of_perturbation(v), 0.0};
  };
  auto batch = run_batch<Mat>(
      cfg.samples, cfg.threads, seed, kStreamPertSigma,
      [&](Rng& rng) { return sample_sphere_sym(n, cfg.radius_sigma, rng); },
      trial, "estimate_grad_sigma_oracle");
  const double coef =
      coefficient_dim(cfg.coefficient_mode, n, /*symmetric=*/true) /
      (cfg.radius_sigma * cfg.radius_sigma);
  const double shift = baseline.value_or(0.0);
  GradientEstimate grad = reduce_terms(cfg.samples, n, n, [&](int i) -> Mat {
    return coef * (batch.samples[i].cost - shift) * batch.perturbations[i];
  });
  double mean_cost = 0.0;
  for (int i = 0; i < cfg.samples; ++i) mean_cost += batch.samples[i].cost;
  grad.mean_cost = mean_cost / cfg.samples;
  return grad;
}

SbrpgStepResult sbrpg_step(const SystemParams& params, const Vec& k,
                           const Mat& sigma, const SbrpgConfig& cfg,
                           std::uint64_t iteration_seed) {
  SbrpgStepResult out;

  auto [grad_k, smoment] =
      estimate_grad_k_and_s(params, k, sigma, cfg, iteration_seed);
  const double s_hat = smoment.value(0, 0);
  if (!(s_hat > 0.0) || !std::isfinite(s_hat))
    throw NumericalError("sbrpg_step",
                         "state-moment estimate is not positive");
  out.s_hat = s_hat;
  out.f_est = grad_k.mean_cost;
  out.grad_k_std = grad_k.empirical_std;
  out.rejected_k = grad_k.rejected;

  const Vec direction = grad_k.value / s_hat;
  double eta1 = cfg.eta1;
  Vec k_new = k - eta1 * direction;
  while (!is_admissible(params, {k_new, sigma})) {
    if (out.halvings >= kMaxHalvings)
      throw NumericalError("sbrpg_step",
                           "step sizes violate contraction preconditions");
    eta1 *= 0.5;
    ++out.halvings;
    k_new = k - eta1 * direction;
  }
  out.k_new = k_new;

  GradientEstimate grad_sigma =
      estimate_grad_sigma(params, k_new, sigma, cfg, iteration_seed);
  out.grad_sigma_std = grad_sigma.empirical_std;
  out.rejected_sigma = grad_sigma.rejected;

  Mat delta = sigma * grad_sigma.value * sigma;
  delta = 0.5 * (delta + delta.transpose()).eval();
  double eta2 = cfg.eta2;
  Mat sigma_new = sigma - eta2 * delta;
  while (!is_admissible(params, {k_new, sigma_new})) {
    if (out.halvings >= kMaxHalvings)
      throw NumericalError("sbrpg_step",
                           "step sizes violate contraction preconditions");
    eta2 *= 0.5;
    ++out.halvings;
    sigma_new = sigma - eta2 * delta;
  }
  out.sigma_new = sigma_new;
  return out;
}

SbrpgRun run_sbrpg(const SystemParams& params, const Vec& k0, const Mat& sigma0,
                   const SbrpgConfig& cfg) {
  params.validate();
  if (cfg.samples < 1) throw ConfigError("sbrpg.samples must be positive");
  if (cfg.horizon < 1) throw ConfigError("sbrpg.horizon must be positive");
  if (cfg.iterations < 0)
    throw ConfigError("sbrpg.iterations must be non-negative");
  if (!(cfg.radius_k > 0.0) || !(cfg.radius_sigma > 0.0))
    throw ConfigError("sbrpg smoothing radii must be positive");
  if (!(cfg.eta1 > 0.0) || !(cfg.eta2 > 0.0))
    throw ConfigError("sbrpg step sizes must be positive");
  if (cfg.record_every < 1)
    throw ConfigError("sbrpg.record_every must be positive");
  if (!is_admissible(params, {k0, sigma0}))
    throw ConfigError("initial policy is not admissible");

  SbrpgRun run;
  run.are = solve_are(params);
  run.iterations = cfg.iterations;

  Vec k = k0;
  Mat sigma = sigma0;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  auto record = [&](int iter, const SbrpgStepResult* step) {
    SbrpgRecord rec;
    rec.iter = iter;
    rec.k = k;
    rec.sigma = sigma;
    rec.f = cost_f(params, k, sigma);
    rec.gap = rec.f - run.are.f_star;
    if (step) {
      rec.f_est = step->f_est;
      rec.s_hat = step->s_hat;
      rec.grad_k_std = step->grad_k_std;
      rec.grad_sigma_std = step->grad_sigma_std;
      rec.rejected_k = step->rejected_k;
      rec.rejected_sigma = step->rejected_sigma;
      rec.halvings = step->halvings;
    } else {
      rec.f_est = nan;
      rec.s_hat = nan;
      rec.grad_k_std = nan;
      rec.grad_sigma_std = nan;
    }
    run.records.push_back(std::move(rec));
  };

  record(0, nullptr);
  for (int iter = 1; iter <= cfg.iterations; ++iter) {
    const std::uint64_t it_seed =
        substream(cfg.seed, 0x17e2, static_cast<std::uint64_t>(iter));
    SbrpgStepResult step = sbrpg_step(params, k, sigma, cfg, it_seed);
    k = step.k_new;
    sigma = step.sigma_new;
    if (iter % cfg.record_every == 0 || iter == cfg.iterations)
      record(iter, &step);
  }
  return run;
}

}  // namespace erlq
