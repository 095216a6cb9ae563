#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>

namespace erlq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowVec = Eigen::RowVectorXd;

enum class NoiseKind {
  kGaussian,  // standard normal noise coordinates
  kBounded,   // Rademacher (+/-1) noise coordinates: same two moments, bounded
};

enum class InitKind {
  kTwoPoint,  // x0 = +/-c with equal probability
  kUniform,   // x0 ~ U[-L, L]
  kGaussian,  // x0 ~ N(0, sigma^2); no almost-sure bound
};

// Distribution of the scalar initial state x0. `param` is c, L, or sigma
// depending on kind.
struct InitialStateDist {
  InitKind kind = InitKind::kTwoPoint;
  double param = 1.0;

  // E[x0^2]
  double mu() const {
    switch (kind) {
      case InitKind::kTwoPoint:
        return param * param;
      case InitKind::kUniform:
        return param * param / 3.0;
      case InitKind::kGaussian:
      default:
        return param * param;
    }
  }

  // Essential bound on |x0| (infinite for the Gaussian kind).
  double bound() const {
    switch (kind) {
      case InitKind::kTwoPoint:
      case InitKind::kUniform:
        return param;
      case InitKind::kGaussian:
      default:
        return std::numeric_limits<double>::infinity();
    }
  }
};

// Scalar-state, n-input plant x_{t+1} = (A + w^x C) x + (B + w^u D) u with
// stage cost Q x^2 + u'Ru plus entropy regularization at temperature tau,
// discounted by gamma.
struct SystemParams {
  double A = 0.0;
  RowVec B;  // 1 x n
  double C = 0.0;
  Mat D;  // n x n
  double Q = 1.0;
  Mat R;  // n x n, symmetric positive definite
  double gamma = 0.5;
  double tau = 0.1;
  InitialStateDist init;
  NoiseKind noise = NoiseKind::kGaussian;

  int n() const { return static_cast<int>(B.cols()); }

  // B'B + D'D: the input-channel second-moment matrix that every closed form
  // depends on.
  Mat bbdd() const { return B.transpose() * B + D.transpose() * D; }

  // Throws ConfigError when any structural invariant fails (dimensions,
  // positivity, gamma/tau ranges, tau < 2 sigma_min(R)).
  void validate() const;
};

// Gaussian policy pi(u|x) = N(-K x, Sigma).
struct GaussianPolicy {
  Vec K;      // n
  Mat Sigma;  // n x n symmetric positive definite when used for sampling
};

// Closed-loop mean-square gain V_K = A^2 + C^2 + K'(B'B+D'D)K - 2ABK.
double v_k(const SystemParams& params, const Vec& K);

// Policy admissibility: gamma * V_K < 1 and Sigma symmetric positive
// definite.
bool is_admissible(const SystemParams& params, const GaussianPolicy& policy);

}  // namespace erlq
