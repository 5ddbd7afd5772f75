#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "gpaml/nelder_mead.hpp"

namespace gpaml {

// Kernel hyperparameters. theta is a lengthscale in normalized-input units;
// g is the nugget, a noise-to-scale ratio applied only to the within-training
// diagonal.
struct GpHyperparams {
  double tau2 = 1.0;
  double theta = 1.0;
  double g = 1e-8;
};

// Per-dimension sampling upper bounds of the design region. Inputs are
// normalized by these (not by the observed max) so that fits taken at
// different campaign steps live on comparable scales.
struct DesignBounds {
  double a = 1.0;
  double b = 1.0;
};

struct PredictiveDistribution {
  Eigen::VectorXd mean;  // de-centered, original response units
  Eigen::MatrixXd cov;   // symmetric; diagonal clamped at zero
};

struct GpFitOptions {
  double theta_lo = 1e-3;
  double theta_hi = 10.0;
  double g_lo = 1e-8;
  double g_hi = 1.0;
  int starts = 5;             // space-filling starts over the (log th, log g) box
  int max_evals_per_start = 80;
  std::optional<double> fixed_theta;  // pin a hyperparameter instead of searching
  std::optional<double> fixed_g;
};

// One row of the multi-start table, for diagnostics.
struct GpStartRecord {
  double theta0 = 0, g0 = 0;      // start point
  double theta = 0, g = 0;        // local optimum reached
  double loglik = 0, tau2 = 0;
  bool chosen = false;
};
using GpFitReport = std::vector<GpStartRecord>;

// tau2 * (exp(-|xi-xj|^2/theta) + g * [same_index]); xi, xj normalized.
// The nugget never applies to cross-covariances.
double kernel_value(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj,
                    const GpHyperparams& hyper, bool same_index);

struct LogLikelihood {
  double value = 0.0;   // concentrated log-likelihood, constants dropped
  double tau2 = 0.0;    // profiled scale Y'K^-1 Y / r
  double jitter = 0.0;  // extra diagonal mass needed for the factorization
};

// Concentrated log-likelihood at (theta, g) for a normalized design and
// centered responses: with K the correlation-plus-nugget matrix,
// tau2 = Y'K^-1 Y / r and the value is -(r/2) log(tau2) - (1/2) log|K|.
// Escalates jitter (1e-10, 1e-8, 1e-6) before declaring K singular.
LogLikelihood gp_log_likelihood(const Eigen::MatrixXd& x_norm,
                                const Eigen::VectorXd& y_centered,
                                double theta, double g);

// Homoskedastic GP with squared-exponential kernel. The scale tau2 is
// profiled analytically; (log theta, log g) are chosen by multi-start
// Nelder-Mead on the concentrated likelihood. Immutable once built; predict
// is safe to call concurrently.
class GpFit {
 public:
  // x_counts is r x 2 in raw count units; rows are normalized by `bounds`.
  // Responses are centered by their mean. Throws FitError on constant or
  // non-finite responses, and when every start fails to factorize.
  static GpFit fit(const Eigen::MatrixXd& x_counts, const Eigen::VectorXd& y,
                   const DesignBounds& bounds, const GpFitOptions& opts = {});

  // Pins the hyperparameters and mean offset directly (no search). When
  // `mean_offset` is empty the responses are centered by their mean.
  static GpFit from_hyperparams(const Eigen::MatrixXd& x_counts,
                                const Eigen::VectorXd& y,
                                const DesignBounds& bounds,
                                const GpHyperparams& hyper,
                                std::optional<double> mean_offset = {});

  // Exact Gaussian conditioning at new count-space inputs. Queries may lie
  // outside the training hull; no hull constraint is imposed here.
  PredictiveDistribution predict(const Eigen::MatrixXd& x_counts) const;

  const GpHyperparams& hyper() const { return hyper_; }
  double mean_offset() const { return offset_; }
  const DesignBounds& bounds() const { return bounds_; }
  const GpFitReport& report() const { return report_; }
  double jitter() const { return jitter_; }
  const Eigen::MatrixXd& x_norm() const { return x_norm_; }
  const Eigen::VectorXd& y_centered() const { return y_centered_; }

  // Replicate-compressed view of the design: distinct normalized rows and
  // the number of observations carried by each.
  const Eigen::MatrixXd& x_unique() const { return x_unique_; }
  const Eigen::VectorXd& replicate_counts() const { return rep_counts_; }

 private:
  GpFit() = default;
  void compress();                        // group identical design rows
  void finalize(double theta, double g);  // factorize and cache alpha

  Eigen::MatrixXd x_norm_;      // r x 2 in [0,1]^2
  Eigen::VectorXd y_centered_;  // r
  double offset_ = 0.0;
  DesignBounds bounds_;
  GpHyperparams hyper_;
  double jitter_ = 0.0;

  // Exact replicate reduction: with C the correlation on the unique rows and
  // D = diag(replicate counts), the full r x r system collapses to
  // C + g D^-1 acting on block means, plus a within-block sum of squares.
  Eigen::MatrixXd x_unique_;    // u x 2
  Eigen::VectorXd rep_counts_;  // u
  Eigen::VectorXd y_block_;     // u, means of centered responses per block
  double ss_within_ = 0.0;
  Eigen::MatrixXd chol_lower_;  // L L' = C + (g+jitter) D^-1
  Eigen::VectorXd alpha_;       // (C + (g+jitter) D^-1)^-1 y_block
  GpFitReport report_;
};

}  // namespace gpaml
