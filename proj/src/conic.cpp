#include "gpaml/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gpaml/csv.hpp"
#include "gpaml/error.hpp"

namespace gpaml {

TransectMatrix build_transect(int n_a, int n_b, int n) {
  if (n_a < 1 || n_b < 1) throw DataError("transect origin needs n_a, n_b >= 1");
  if (n < 1) throw DataError("transect move size must be at least 1");
  TransectMatrix t;
  t.n_a0 = n_a;
  t.n_b0 = n_b;
  t.n = n;
  t.points.resize(n + 1, 2);
  for (int k = 1; k <= n + 1; ++k) {
    t.points(k - 1, 0) = n_a + n - (k - 1);
    t.points(k - 1, 1) = n_b + (k - 1);
  }
  return t;
}

ReferenceLine reference_locations(int n_a, int n_b, int n, double bound_a,
                                  double bound_b, int q) {
  if (n_a < 1 || n_b < 1 || n < 1) {
    throw DataError("reference line needs n_a, n_b, n >= 1");
  }
  if (q < 2) throw DataError("need at least 2 reference locations");
  if (!(bound_a > 0.0) || !(bound_b > 0.0)) {
    throw DataError("sampling bounds must be positive");
  }
  const double s_max = std::min(bound_a / (n_a + n), bound_b / (n_b + n));
  const double s_min =
      std::max(2.0 / std::min(n_a, n_b), 0.05 * s_max);
  if (s_min > s_max) {
    throw InfeasibleError(
        "reference scale window is empty (s_min " + std::to_string(s_min) +
        " > s_max " + std::to_string(s_max) +
        "): the data is too small or too unbalanced for a conic decision");
  }
  ReferenceLine refs;
  refs.bound_a = bound_a;
  refs.bound_b = bound_b;
  refs.scales.resize(q);
  refs.locations.resize(q, 2);
  for (int i = 0; i < q; ++i) {
    const double s = s_min + (s_max - s_min) * i / static_cast<double>(q - 1);
    refs.scales[i] = s;
    refs.locations(i, 0) = s * n_a;
    refs.locations(i, 1) = s * n_b;
  }
  return refs;
}

ConeFan reference_transects(const ReferenceLine& refs, const TransectMatrix& t,
                            double total) {
  if (!(total > 0.0)) throw DataError("current total must be positive");
  ConeFan fan;
  fan.transects.reserve(static_cast<std::size_t>(refs.scales.size()));
  for (Eigen::Index i = 0; i < refs.scales.size(); ++i) {
    const double n_ref = (refs.locations(i, 0) + refs.locations(i, 1)) / total;
    fan.transects.push_back(n_ref * t.points);
  }
  fan.weights = linear_weights(refs);
  return fan;
}

Eigen::VectorXd linear_weights(const ReferenceLine& refs) {
  if (refs.scales.size() < 1) throw DataError("no reference scales");
  return refs.scales / refs.scales.sum();
}

AcquisitionDecision gpaml_step(const ExperimentData& data, int n_a, int n_b,
                               int n, int q, const GpFitOptions& gp_opts) {
  const Eigen::MatrixXd x = data.design_matrix();
  const Eigen::VectorXd y = data.responses();
  if (x.rows() == 0) throw DataError("experiment holds no valid observations");
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (x(i, 0) < 1 || x(i, 0) > data.bound_a || x(i, 1) < 1 ||
        x(i, 1) > data.bound_b) {
      throw DataError("observation balance (" + std::to_string(x(i, 0)) +
                      ", " + std::to_string(x(i, 1)) +
                      ") lies outside the sampling bounds");
    }
  }

  AcquisitionDecision d;
  d.transect = build_transect(n_a, n_b, n);
  d.refs = reference_locations(n_a, n_b, n, data.bound_a, data.bound_b, q);
  d.fan = reference_transects(d.refs, d.transect,
                              static_cast<double>(n_a) + n_b);

  const DesignBounds bounds{static_cast<double>(data.bound_a),
                            static_cast<double>(data.bound_b)};
  const GpFit gp = GpFit::fit(x, y, bounds, gp_opts);
  d.gp_hyper = gp.hyper();
  d.gp_jitter = gp.jitter();
  d.gp_report = gp.report();

  d.pred_mean.resize(n + 1, q);
  d.pred_sd.resize(n + 1, q);
  for (int i = 0; i < q; ++i) {
    const PredictiveDistribution pred =
        gp.predict(d.fan.transects[static_cast<std::size_t>(i)]);
    d.pred_mean.col(i) = pred.mean;
    d.pred_sd.col(i) = pred.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  }
  d.g = d.pred_mean * d.fan.weights;

  const int best_k = pick_transect_row(d.g, d.transect);
  d.argmax_k = best_k;
  d.n_a = n - (best_k - 1);
  d.n_b = best_k - 1;
  return d;
}

int pick_transect_row(const Eigen::VectorXd& g, const TransectMatrix& t) {
  if (g.size() != t.n + 1) {
    throw DataError("score vector length does not match the transect");
  }
  const double m = g.maxCoeff();
  const double tol = 1e-12 * std::max(1.0, std::abs(m));
  const double prop_now =
      static_cast<double>(t.n_a0) / (static_cast<double>(t.n_a0) + t.n_b0);
  const double ending_total =
      static_cast<double>(t.n_a0) + t.n_b0 + t.n;
  int best_k = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= t.n + 1; ++k) {
    if (g[k - 1] < m - tol) continue;
    const double prop_end = t.points(k - 1, 0) / ending_total;
    const double dist = std::abs(prop_end - prop_now);
    if (dist < best_dist) {
      best_dist = dist;
      best_k = k;
    }
  }
  return best_k;
}

void write_decision_csv(const AcquisitionDecision& decision,
                        const std::filesystem::path& path) {
  const int n = decision.transect.n;
  const double ending_total =
      static_cast<double>(decision.transect.n_a0) + decision.transect.n_b0 + n;
  CsvWriter w(path);
  w.row({"k", "n_a", "n_b", "ending_prop_a", "G"});
  for (int k = 1; k <= n + 1; ++k) {
    w.row({std::to_string(k), std::to_string(n - (k - 1)),
           std::to_string(k - 1),
           format_double(decision.transect.points(k - 1, 0) / ending_total),
           format_double(decision.g[k - 1])});
  }
  w.close();
}

void write_cone_csv(const AcquisitionDecision& decision,
                    const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"transect", "scale", "k", "n_a", "n_b", "pred_mean", "pred_sd"});
  const auto q = decision.refs.scales.size();
  const int rows = decision.transect.n + 1;
  for (Eigen::Index i = 0; i < q; ++i) {
    const Eigen::MatrixXd& t = decision.fan.transects[static_cast<std::size_t>(i)];
    for (int k = 1; k <= rows; ++k) {
      w.row({std::to_string(i + 1), format_double(decision.refs.scales[i]),
             std::to_string(k), format_double(t(k - 1, 0)),
             format_double(t(k - 1, 1)), format_double(decision.pred_mean(k - 1, i)),
             format_double(decision.pred_sd(k - 1, i))});
    }
  }
  w.close();
}

}  // namespace gpaml
