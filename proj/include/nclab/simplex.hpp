#pragma once

#include "nclab/core.hpp"

namespace nclab::lp {

/// Find x (free) with A_eq x = b_eq and A_le x <= b_le. Either block may be empty.
struct LinearSystem {
    Matrix A_eq;
    Vector b_eq;
    Matrix A_le;
    Vector b_le;

    Index variables() const { return A_eq.rows() > 0 ? A_eq.cols() : A_le.cols(); }
};

enum class Status { Feasible, Infeasible, IterationLimit };

struct SimplexOptions {
    double pivot_tol = 1e-9;
    double feasibility_tol = 1e-9;  ///< phase-1 optimum above this is declared infeasible
    int iteration_factor = 50;      ///< cap = factor * (rows + cols)
};

struct Result {
    Status status = Status::Infeasible;
    Vector x;
    double phase1_objective = 0.0;
    int iterations = 0;
};

/// Dense phase-1 simplex with Bland's rule. Free variables are split into positive and
/// negative parts; inequality rows get slacks, and only rows that cannot start from a
/// slack receive an artificial variable.
Result find_feasible_point(const LinearSystem& system, const SimplexOptions& options = {});

}  // namespace nclab::lp
