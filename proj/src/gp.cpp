#include "gpaml/gp.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gpaml/error.hpp"

namespace gpaml {

namespace {

constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-8, 1e-6};

Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& x_counts,
                                 const DesignBounds& bounds) {
  if (x_counts.cols() != 2) {
    throw FitError("design matrix must have two columns, got " +
                   std::to_string(x_counts.cols()));
  }
  if (!(bounds.a > 0.0) || !(bounds.b > 0.0)) {
    throw FitError("design bounds must be positive");
  }
  Eigen::MatrixXd out = x_counts;
  out.col(0) /= bounds.a;
  out.col(1) /= bounds.b;
  return out;
}

Eigen::MatrixXd pair_sqdist(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = sq.replicate(1, x.rows()) +
                      sq.transpose().replicate(x.rows(), 1) -
                      2.0 * (x * x.transpose());
  return d.cwiseMax(0.0);
}

Eigen::MatrixXd cross_sqdist(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd d = a.rowwise().squaredNorm().replicate(1, b.rows()) +
                      b.rowwise().squaredNorm().transpose().replicate(a.rows(), 1) -
                      2.0 * (a * b.transpose());
  return d.cwiseMax(0.0);
}

// Exact replicate compression of an r-row design: identical rows are grouped
// into blocks. With C the correlation on the u unique rows, D = diag(counts)
// and g the nugget, the full matrix K = expand(C) + g I collapses to
//   Y'K^-1 Y   = SS_within / g + ybar' (C + g D^-1)^-1 ybar
//   log|K|     = (r-u) log g + sum(log counts) + log|C + g D^-1|
// which degenerates to the plain equations when every row is unique.
struct CompressedDesign {
  Eigen::MatrixXd x_unique;   // u x 2
  Eigen::VectorXd counts;     // u
  Eigen::VectorXd y_block;    // u, per-block means
  double ss_within = 0.0;     // sum of squared deviations from block means
  double log_counts = 0.0;    // sum(log counts)
  Eigen::Index r = 0;
};

CompressedDesign compress_design(const Eigen::MatrixXd& x_norm,
                                 const Eigen::VectorXd& y) {
  std::map<std::pair<double, double>, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < x_norm.rows(); ++i) {
    groups[{x_norm(i, 0), x_norm(i, 1)}].push_back(i);
  }
  CompressedDesign c;
  c.r = x_norm.rows();
  const auto u = static_cast<Eigen::Index>(groups.size());
  c.x_unique.resize(u, 2);
  c.counts.resize(u);
  c.y_block.resize(u);
  Eigen::Index j = 0;
  for (const auto& [key, rows] : groups) {
    c.x_unique(j, 0) = key.first;
    c.x_unique(j, 1) = key.second;
    c.counts[j] = static_cast<double>(rows.size());
    double mean = 0.0;
    for (Eigen::Index i : rows) mean += y[i];
    mean /= static_cast<double>(rows.size());
    c.y_block[j] = mean;
    for (Eigen::Index i : rows) {
      const double dev = y[i] - mean;
      c.ss_within += dev * dev;
    }
    c.log_counts += std::log(static_cast<double>(rows.size()));
    ++j;
  }
  return c;
}

struct LikelihoodEval {
  bool ok = false;
  double loglik = -std::numeric_limits<double>::infinity();
  double tau2 = 0.0;
  double jitter = 0.0;
};

// Concentrated likelihood at (theta, g) on a compressed design, escalating
// jitter until the Cholesky succeeds. Scratch is caller-owned to keep the
// optimizer loop allocation-free.
LikelihoodEval eval_loglik(const CompressedDesign& c,
                           const Eigen::MatrixXd& sqdist_unique, double theta,
                           double g, Eigen::MatrixXd& k_scratch,
                           Eigen::LLT<Eigen::MatrixXd>& llt) {
  LikelihoodEval ev;
  const double r = static_cast<double>(c.r);
  const double u = static_cast<double>(c.x_unique.rows());
  for (double jitter : kJitterLadder) {
    const double g_eff = g + jitter;
    if (!(g_eff > 0.0)) continue;  // a zero nugget needs jitter to be exact here
    k_scratch = (-sqdist_unique / theta).array().exp();
    k_scratch.diagonal() += g_eff * c.counts.cwiseInverse();
    llt.compute(k_scratch);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::VectorXd alpha = llt.solve(c.y_block);
    const double quad = c.ss_within / g_eff + c.y_block.dot(alpha);
    const double tau2 = quad / r;
    if (!(tau2 > 0.0) || !std::isfinite(tau2)) return ev;  // degenerate
    const double logdet = (r - u) * std::log(g_eff) + c.log_counts +
                          2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double ll = -0.5 * r * std::log(tau2) - 0.5 * logdet;
    if (!std::isfinite(ll)) return ev;
    ev.ok = true;
    ev.loglik = ll;
    ev.tau2 = tau2;
    ev.jitter = jitter;
    return ev;
  }
  return ev;  // singular even with maximal jitter
}

// Halton points (bases 2 and 3), a fixed space-filling sequence for the
// multi-start search; index is 1-based.
double halton(int index, int base) {
  double f = 1.0, value = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    value += f * (i % base);
    i /= base;
  }
  return value;
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (!x.allFinite()) throw FitError("design matrix contains non-finite values");
  if (!y.allFinite()) throw FitError("responses contain non-finite values");
  if (x.rows() != y.size()) {
    throw FitError("design has " + std::to_string(x.rows()) + " rows but " +
                   std::to_string(y.size()) + " responses");
  }
}

}  // namespace

double kernel_value(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj,
                    const GpHyperparams& hyper, bool same_index) {
  const double d2 = (xi - xj).squaredNorm();
  double corr = std::exp(-d2 / hyper.theta);
  if (same_index) corr += hyper.g;
  return hyper.tau2 * corr;
}

LogLikelihood gp_log_likelihood(const Eigen::MatrixXd& x_norm,
                                const Eigen::VectorXd& y_centered,
                                double theta, double g) {
  check_finite(x_norm, y_centered);
  if (x_norm.cols() != 2) throw FitError("design matrix must have two columns");
  if (!(theta > 0.0)) throw FitError("lengthscale must be positive");
  if (g < 0.0) throw FitError("nugget must be non-negative");
  const CompressedDesign c = compress_design(x_norm, y_centered);
  const Eigen::MatrixXd sqdist = pair_sqdist(c.x_unique);
  Eigen::MatrixXd k_scratch;
  Eigen::LLT<Eigen::MatrixXd> llt;
  const LikelihoodEval ev = eval_loglik(c, sqdist, theta, g, k_scratch, llt);
  if (!ev.ok) {
    if (y_centered.isZero(0.0)) {
      throw FitError("degenerate responses: centered Y is the zero vector");
    }
    throw FitError("correlation matrix is numerically singular or the "
                   "profiled scale is degenerate");
  }
  return LogLikelihood{ev.loglik, ev.tau2, ev.jitter};
}

GpFit GpFit::fit(const Eigen::MatrixXd& x_counts, const Eigen::VectorXd& y,
                 const DesignBounds& bounds, const GpFitOptions& opts) {
  check_finite(x_counts, y);
  if (x_counts.rows() < 3) {
    throw FitError("need at least 3 observations to fit, got " +
                   std::to_string(x_counts.rows()));
  }
  if (y.maxCoeff() == y.minCoeff()) {
    throw FitError("responses are constant; the profiled scale is degenerate");
  }
  if (opts.starts < 1) throw FitError("fit needs at least one start");

  GpFit gp;
  gp.bounds_ = bounds;
  gp.x_norm_ = normalize_inputs(x_counts, bounds);
  gp.offset_ = y.mean();
  gp.y_centered_ = y.array() - gp.offset_;
  gp.compress();
  if (gp.x_unique_.rows() < 2) {
    throw FitError("need at least 2 distinct design points");
  }

  CompressedDesign c;
  c.x_unique = gp.x_unique_;
  c.counts = gp.rep_counts_;
  c.y_block = gp.y_block_;
  c.ss_within = gp.ss_within_;
  c.log_counts = gp.rep_counts_.array().log().sum();
  c.r = gp.y_centered_.size();
  const Eigen::MatrixXd sqdist = pair_sqdist(c.x_unique);
  Eigen::MatrixXd k_scratch;
  Eigen::LLT<Eigen::MatrixXd> llt;

  const double lt_lo = std::log(opts.fixed_theta.value_or(opts.theta_lo));
  const double lt_hi = std::log(opts.fixed_theta.value_or(opts.theta_hi));
  const double lg_lo = std::log(opts.fixed_g.value_or(opts.g_lo));
  const double lg_hi = std::log(opts.fixed_g.value_or(opts.g_hi));

  auto objective = [&](const Vec2& p) {
    const LikelihoodEval ev = eval_loglik(c, sqdist, std::exp(p[0]),
                                          std::exp(p[1]), k_scratch, llt);
    return ev.ok ? -ev.loglik : std::numeric_limits<double>::infinity();
  };

  double best_ll = -std::numeric_limits<double>::infinity();
  double best_theta = 0.0, best_g = 0.0;
  int best_idx = -1;
  for (int s = 0; s < opts.starts; ++s) {
    const Vec2 start = {lt_lo + halton(s + 1, 2) * (lt_hi - lt_lo),
                        lg_lo + halton(s + 1, 3) * (lg_hi - lg_lo)};
    Vec2 end = start;
    if (!opts.fixed_theta || !opts.fixed_g) {
      NelderMeadOptions nm;
      nm.max_evals = opts.max_evals_per_start;
      const NelderMeadResult res =
          nelder_mead_2d(objective, start, {lt_lo, lg_lo}, {lt_hi, lg_hi}, nm);
      end = res.x;
    }
    const double theta = std::exp(end[0]);
    const double g = std::exp(end[1]);
    const LikelihoodEval ev =
        eval_loglik(c, sqdist, theta, g, k_scratch, llt);
    GpStartRecord rec;
    rec.theta0 = std::exp(start[0]);
    rec.g0 = std::exp(start[1]);
    rec.theta = theta;
    rec.g = g;
    rec.loglik = ev.ok ? ev.loglik : -std::numeric_limits<double>::infinity();
    rec.tau2 = ev.tau2;
    gp.report_.push_back(rec);
    if (ev.ok && ev.loglik > best_ll) {
      best_ll = ev.loglik;
      best_theta = theta;
      best_g = g;
      best_idx = s;
    }
  }
  if (best_idx < 0) {
    throw FitError("every start failed: correlation matrix singular or "
                   "profiled scale degenerate at all candidates");
  }
  gp.report_[static_cast<size_t>(best_idx)].chosen = true;
  gp.finalize(best_theta, best_g);
  return gp;
}

GpFit GpFit::from_hyperparams(const Eigen::MatrixXd& x_counts,
                              const Eigen::VectorXd& y,
                              const DesignBounds& bounds,
                              const GpHyperparams& hyper,
                              std::optional<double> mean_offset) {
  check_finite(x_counts, y);
  if (x_counts.rows() < 1) throw FitError("need at least one observation");
  if (!(hyper.tau2 > 0.0) || !(hyper.theta > 0.0) || hyper.g < 0.0) {
    throw FitError("invalid hyperparameters");
  }
  GpFit gp;
  gp.bounds_ = bounds;
  gp.x_norm_ = normalize_inputs(x_counts, bounds);
  gp.offset_ = mean_offset ? *mean_offset : y.mean();
  gp.y_centered_ = y.array() - gp.offset_;
  gp.compress();
  gp.finalize(hyper.theta, hyper.g);
  gp.hyper_.tau2 = hyper.tau2;
  return gp;
}

void GpFit::compress() {
  const CompressedDesign c = compress_design(x_norm_, y_centered_);
  x_unique_ = c.x_unique;
  rep_counts_ = c.counts;
  y_block_ = c.y_block;
  ss_within_ = c.ss_within;
}

void GpFit::finalize(double theta, double g) {
  const Eigen::MatrixXd sqdist = pair_sqdist(x_unique_);
  for (double jitter : kJitterLadder) {
    const double g_eff = g + jitter;
    if (!(g_eff > 0.0)) continue;
    Eigen::MatrixXd k = (-sqdist / theta).array().exp();
    k.diagonal() += g_eff * rep_counts_.cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) continue;
    chol_lower_ = llt.matrixL();
    alpha_ = llt.solve(y_block_);
    jitter_ = jitter;
    hyper_.theta = theta;
    hyper_.g = g;
    hyper_.tau2 = (ss_within_ / g_eff + y_block_.dot(alpha_)) /
                  static_cast<double>(y_centered_.size());
    return;
  }
  throw FitError("correlation matrix singular even with maximal jitter");
}

PredictiveDistribution GpFit::predict(const Eigen::MatrixXd& x_counts) const {
  const Eigen::MatrixXd q = normalize_inputs(x_counts, bounds_);
  if (!q.allFinite()) throw FitError("query matrix contains non-finite values");
  const Eigen::MatrixXd cross =
      (-cross_sqdist(q, x_unique_) / hyper_.theta).array().exp();

  PredictiveDistribution out;
  out.mean = cross * alpha_;
  out.mean.array() += offset_;

  // Schur complement through the cached factor; queries carry no nugget.
  const Eigen::MatrixXd v =
      chol_lower_.triangularView<Eigen::Lower>().solve(cross.transpose());
  const Eigen::MatrixXd prior = (-pair_sqdist(q) / hyper_.theta).array().exp();
  out.cov = hyper_.tau2 * (prior - v.transpose() * v);
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();

  const double floor = -1e-8 * std::max(1.0, hyper_.tau2);
  for (Eigen::Index i = 0; i < out.cov.rows(); ++i) {
    if (out.cov(i, i) < floor) {
      throw FitError("predictive variance is negative beyond tolerance");
    }
    if (out.cov(i, i) < 0.0) out.cov(i, i) = 0.0;
  }
  return out;
}

}  // namespace gpaml
