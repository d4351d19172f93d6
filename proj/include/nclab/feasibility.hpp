#pragma once

#include "nclab/core.hpp"
#include "nclab/simplex.hpp"

#include <optional>
#include <vector>

namespace nclab::feasibility {

// ---------------------------------------------------------------------------
// Collapse feasibility: does some beta give X_k^T beta = 1 and X_j^T beta <= 0 (j != k)?
// ---------------------------------------------------------------------------

enum class ClassStatus { Feasible, Infeasible, NumericalFailure };

struct Residuals {
    double eq_residual = 0.0;         ///< ||X_k^T beta - 1||_inf
    double max_ineq_violation = 0.0;  ///< max(0, max_{j != k} X_j^T beta)
};

struct ClassCertificate {
    ClassStatus status = ClassStatus::Infeasible;
    std::optional<Vector> beta;
    Residuals residuals;
    int lp_iterations = 0;
};

struct FeasibilityResult {
    std::vector<ClassCertificate> per_class;
    bool overall = false;
};

/// Residuals recomputed directly from the data; used to certify any candidate beta.
Residuals certificate_residuals(const LabeledDataset& data, int k, const Vector& beta);

/// A feasible status is only returned with a beta whose residuals are within tol.
ClassCertificate nc_feasible(const LabeledDataset& data, int k, double tol = 1e-7,
                             const lp::SimplexOptions& options = {});
FeasibilityResult nc_feasible_all(const LabeledDataset& data, double tol = 1e-7);

/// X_k^T beta >= 1 and X_j^T beta <= 0 for j != k. Throws NumericalError on an LP iteration cap.
bool is_linearly_separable(const LabeledDataset& data, int k, double tol = 1e-7);

// ---------------------------------------------------------------------------
// Constructive certificates for Gaussian mixtures
// ---------------------------------------------------------------------------

struct LemmaMinResult {
    double min_value = 0.0;
    Vector argmin_v;
    bool attained = true;  ///< false when only an approximating v exists (infimum at infinity)
};

/// h(v) = <v1 + v, v2> / sqrt(||v1||^2 + ||v||^2), restricted to <v, v1> = 0.
double lemma_objective(const Vector& v1, const Vector& v2, const Vector& v);

/// Closed-form minimum of lemma_objective. When the infimum is not attained the returned v
/// comes within a relative 1e-6 of it.
LemmaMinResult lemma_min(const Vector& v1, const Vector& v2);

/// Null-space construction of a collapse certificate for class k. Returns a beta only when
/// every constraint verifies within tol.
std::optional<Vector> constructive_beta(const GmmSample& sample, int k, double tol = 1e-7);

// ---------------------------------------------------------------------------
// Theoretical thresholds
// ---------------------------------------------------------------------------

/// min(0.1, 1/(10K)).
double default_epsilon(int K);

/// Largest noise level certified by the union-bound argument, scaled by constant_c.
double union_bound_threshold(const GmmSpec& spec, double epsilon, double constant_c = 1.0);

/// Minimum d/n from the Gaussian comparison bound.
double gordon_threshold(int n, int K);

struct ThresholdReport {
    double union_bound_sigma = 0.0;
    double gordon_min_d_over_n = 0.0;
    bool rank_sufficient = false;  ///< d >= K n
};

ThresholdReport threshold_report(const GmmSpec& spec, double epsilon, double constant_c = 1.0);

// ---------------------------------------------------------------------------
// Phase-transition sweeps
// ---------------------------------------------------------------------------

/// Zero-pads the K x d0 mean matrix to K x d.
Matrix pad_means(const Matrix& base, Index d);

struct SweepGrid {
    std::vector<Index> d_values;
    std::vector<double> sigma_values;
    int K = 2;
    int n = 1;
    Matrix base_means;  ///< K x d0, padded to each d
    int trials = 1;
    bool all_classes = false;
    double epsilon = 0.0;  ///< <= 0 selects default_epsilon(K)
    double constant_c = 1.0;
    double tol = 1e-7;
};

struct SweepRow {
    Index d = 0;
    int n = 0;
    int K = 0;
    double sigma = 0.0;
    int trials = 0;
    int successes = 0;
    int numerical_failures = 0;
    double rate = 0.0;  ///< NaN when any trial hit a numerical failure
    double union_sigma_star = 0.0;  ///< NaN when d <= n
    double gordon_min_d_over_n = 0.0;
};

/// Rows ordered by d, then sigma. Trial t of cell c draws from rng.substream(c).substream(t).
std::vector<SweepRow> feasibility_sweep(const SweepGrid& grid, const RngStream& rng, int threads = 0);

}  // namespace nclab::feasibility
