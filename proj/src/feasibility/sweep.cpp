#include "nclab/feasibility.hpp"
#include "nclab/parallel.hpp"

#include <cmath>
#include <limits>

namespace nclab::feasibility {

Matrix pad_means(const Matrix& base, Index d) {
    if (base.cols() > d) throw std::invalid_argument("pad_means: target dimension smaller than the means");
    Matrix out = Matrix::Zero(base.rows(), d);
    out.leftCols(base.cols()) = base;
    return out;
}

namespace {

enum class Outcome { Success, Failure, Numerical };

Outcome run_trial(const SweepGrid& grid, Index d, double sigma, RngStream rng) {
    GmmSpec spec{pad_means(grid.base_means, d), sigma, grid.n};
    const GmmSample sample = sample_gmm(spec, rng);
    const int classes = grid.all_classes ? grid.K : 1;
    for (int k = 0; k < classes; ++k) {
        const ClassCertificate c = nc_feasible(sample.data, k, grid.tol);
        if (c.status == ClassStatus::NumericalFailure) return Outcome::Numerical;
        if (c.status == ClassStatus::Infeasible) return Outcome::Failure;
    }
    return Outcome::Success;
}

}  // namespace

std::vector<SweepRow> feasibility_sweep(const SweepGrid& grid, const RngStream& rng, int threads) {
    if (grid.d_values.empty() || grid.sigma_values.empty()) throw std::invalid_argument("feasibility_sweep: empty grid");
    if (grid.trials < 1) throw std::invalid_argument("feasibility_sweep: trials must be positive");
    if (grid.base_means.rows() != grid.K) throw std::invalid_argument("feasibility_sweep: means must have K rows");

    const std::size_t cells = grid.d_values.size() * grid.sigma_values.size();
    const std::size_t trials = static_cast<std::size_t>(grid.trials);
    std::vector<Outcome> outcomes(cells * trials);
    parallel_for(outcomes.size(), [&](std::size_t idx) {
        const std::size_t cell = idx / trials, t = idx % trials;
        const Index d = grid.d_values[cell / grid.sigma_values.size()];
        const double sigma = grid.sigma_values[cell % grid.sigma_values.size()];
        outcomes[idx] = run_trial(grid, d, sigma, rng.substream(cell).substream(t));
    }, threads);

    const double epsilon = grid.epsilon > 0.0 ? grid.epsilon : default_epsilon(grid.K);
    std::vector<SweepRow> rows;
    rows.reserve(cells);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        SweepRow row;
        row.d = grid.d_values[cell / grid.sigma_values.size()];
        row.sigma = grid.sigma_values[cell % grid.sigma_values.size()];
        row.n = grid.n;
        row.K = grid.K;
        row.trials = grid.trials;
        for (std::size_t t = 0; t < trials; ++t) {
            const Outcome o = outcomes[cell * trials + t];
            row.successes += o == Outcome::Success;
            row.numerical_failures += o == Outcome::Numerical;
        }
        row.rate = row.numerical_failures > 0 ? std::numeric_limits<double>::quiet_NaN()
                                              : static_cast<double>(row.successes) / grid.trials;
        if (row.d > grid.n) {
            GmmSpec spec{pad_means(grid.base_means, row.d), row.sigma, grid.n};
            row.union_sigma_star = union_bound_threshold(spec, epsilon, grid.constant_c);
        } else {
            row.union_sigma_star = std::numeric_limits<double>::quiet_NaN();
        }
        row.gordon_min_d_over_n = gordon_threshold(grid.n, grid.K);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace nclab::feasibility
