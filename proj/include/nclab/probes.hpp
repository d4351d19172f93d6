#pragma once

#include "nclab/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace nclab::probes {

struct ProbeReport {
    std::string probe_name;
    long trials = 0;
    long violations = 0;
    std::map<std::string, double> bound_params;
    double empirical_rate = 0.0;         // violations / trials
    double theoretical_rate_bound = 0.0; // NaN when the bound hides an unspecified constant
    double ci = 0.0;                     // standard error of empirical_rate
    long solver_failures = 0;
    std::map<std::string, double> statistics;
    bool passed = false;                 // the probe's own falsification rule
};

// ---------------------------------------------------------------------------
// Distance from the origin to a convex hull
// ---------------------------------------------------------------------------

struct SimplexQpResult {
    Vector s;                 // weights on the simplex
    double value = 0.0;       // |Z^T s|
    double lower_bound = 0.0; // certified: min over the simplex is at least this
    double gap = 0.0;         // Frank-Wolfe gap of (1/2)|Z^T s|^2
    bool converged = false;
    int iterations = 0;
};

/// min over s >= 0, sum s = 1 of |Z^T s|, i.e. the distance from 0 to the hull of the rows of Z.
/// Accelerated projected gradient; stops once the Frank-Wolfe gap is below tol (1 + |Z^T s|^2 / 2).
SimplexQpResult simplex_min_norm(const Matrix& Z, double tol = 1e-6, int max_iterations = 50000);

/// Euclidean projection onto the probability simplex.
Vector project_to_simplex(const Vector& y);

// ---------------------------------------------------------------------------
// Probes. Each trial draws from rng.substream(trial), so reports do not depend on the thread count.
// ---------------------------------------------------------------------------

/// Random unit pair in R^d and a uniformly random m-dimensional orthonormal frame; a trial violates
/// when |cos(angle after projection) - cos(angle before)| > 4 eps / (1 - eps)^2.
ProbeReport jl_angle_probe(Index d, Index m, double epsilon, long trials, const RngStream& rng, int threads = 0);

/// Same with a fixed pair instead of a random one.
ProbeReport jl_angle_probe(const Vector& v1, const Vector& v2, Index m, double epsilon, long trials,
                           const RngStream& rng, int threads = 0);

/// Singular values of Pi Phi against sqrt((m/d)(1 + eps^2 + 2K eps)) sigma_max(Pi) from above and
/// sqrt(max(0, (m/d)(1 - eps^2 - 2K eps))) sigma_min(Pi) from below.
ProbeReport jl_singular_probe(const Matrix& Pi, Index m, double epsilon, long trials, const RngStream& rng,
                              int threads = 0);

/// Per trial the simplex minimum q of |Z^T s| for Gaussian n x d Z, checked against
/// (sqrt(d) - sqrt(n/2) - sqrt(2 log n)) / sqrt(n) using the solver's certified lower bound.
ProbeReport gordon_probe(int n, Index d, long trials, const RngStream& rng, int threads = 0);

/// Monte Carlo mean of |g_+| for g ~ N(0, I_n); never above sqrt(n/2) in expectation.
double positive_part_norm_mean(int n, long draws, const RngStream& rng);

/// Tail of |q(Z) - mean q| at each t against 2 exp(-t^2/2), q the simplex minimum of |Z^T s| (1-Lipschitz in Z).
/// One report per t; statistics also carry the l2-renormalized value |Z^T s*| / |s*|.
std::vector<ProbeReport> lipschitz_concentration_probe(int n, Index d, long trials, const RngStream& rng,
                                                       const std::vector<double>& ts = {1.0, 2.0, 3.0},
                                                       int threads = 0);

}  // namespace nclab::probes
