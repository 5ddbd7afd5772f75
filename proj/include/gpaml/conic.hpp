#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "gpaml/balance_experiment.hpp"
#include "gpaml/gp.hpp"

namespace gpaml {

// The n+1 balances reachable by adding n points from the origin balance.
// Row k (1-based) is (n_a0 + n - (k-1), n_b0 + (k-1)): the all-A move comes
// first and every row sums to n_a0 + n_b0 + n.
struct TransectMatrix {
  Eigen::MatrixXd points;  // (n+1) x 2
  int n_a0 = 0, n_b0 = 0;
  int n = 0;
};

// Scaled-down balances sharing the origin's category proportion. Scale i
// places a reference at s_i * (n_a0, n_b0); all scaled transects stay inside
// the sampling bounds box.
struct ReferenceLine {
  Eigen::VectorXd scales;     // q, strictly increasing
  Eigen::MatrixXd locations;  // q x 2, fractional balances
  double bound_a = 0.0, bound_b = 0.0;
};

// One scaled copy of the transect per reference location, plus the weights
// that average predictions across the fan. Entries may be fractional.
struct ConeFan {
  std::vector<Eigen::MatrixXd> transects;  // q matrices, each (n+1) x 2
  Eigen::VectorXd weights;                 // q, nonnegative, sums to 1
};

struct AcquisitionDecision {
  int n_a = 0, n_b = 0;        // chosen move composition
  int argmax_k = 0;            // 1-based transect row of the chosen move
  Eigen::VectorXd g;           // n+1, weighted predicted accuracy per row
  Eigen::MatrixXd pred_mean;   // (n+1) x q, column i = predictions on transect i
  Eigen::MatrixXd pred_sd;     // same shape; diagnostics only, not used to decide
  TransectMatrix transect;
  ReferenceLine refs;
  ConeFan fan;
  GpHyperparams gp_hyper;
  double gp_jitter = 0.0;
  GpFitReport gp_report;
};

TransectMatrix build_transect(int n_a, int n_b, int n);

// Chooses q scales equally spaced on [s_min, s_max] where s_max is the
// largest scale keeping the whole fan inside the bounds box and s_min keeps
// at least 2 points per category (and at least 5% of s_max). Throws
// InfeasibleError when the window is empty, the signal that the current
// data is too small or too unbalanced for a conic decision.
ReferenceLine reference_locations(int n_a, int n_b, int n, double bound_a,
                                  double bound_b, int q);

// Scales the transect to each reference location by the equivalent move
// size (sum of the reference balance) / total.
ConeFan reference_transects(const ReferenceLine& refs, const TransectMatrix& t,
                            double total);

// w_i proportional to the scale s_i, normalized to sum 1; larger (more
// trusted) references count more.
Eigen::VectorXd linear_weights(const ReferenceLine& refs);

// Best transect row (1-based) for the weighted scores `g`. Rows within
// 1e-12 (relative) of the maximum tie; ties go to the row whose ending
// proportion is closest to the origin's current proportion, then to the
// smaller index.
int pick_transect_row(const Eigen::VectorXd& g, const TransectMatrix& t);

// The full decision: fit the surrogate on the experiment data, predict over
// the fan, average with the weights, and take the best row via
// pick_transect_row.
AcquisitionDecision gpaml_step(const ExperimentData& data, int n_a, int n_b,
                               int n, int q,
                               const GpFitOptions& gp_opts = {});

// decision.csv: k,n_a,n_b,ending_prop_a,G (one row per transect entry).
void write_decision_csv(const AcquisitionDecision& decision,
                        const std::filesystem::path& path);

// cone.csv: transect,scale,k,n_a,n_b,pred_mean,pred_sd (every fan point).
void write_cone_csv(const AcquisitionDecision& decision,
                    const std::filesystem::path& path);

}  // namespace gpaml
