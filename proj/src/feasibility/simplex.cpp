#include "nclab/simplex.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace nclab::lp {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr long kRefactorInterval = 50;
constexpr int kStallLimit = 30;

void check_shapes(const LinearSystem& s) {
    const Index p = s.variables();
    if (s.A_eq.rows() != s.b_eq.size() || s.A_le.rows() != s.b_le.size())
        throw std::invalid_argument("find_feasible_point: right-hand side size mismatch");
    if ((s.A_eq.rows() > 0 && s.A_eq.cols() != p) || (s.A_le.rows() > 0 && s.A_le.cols() != p))
        throw std::invalid_argument("find_feasible_point: blocks disagree on the number of variables");
}

}  // namespace

Result find_feasible_point(const LinearSystem& system, const SimplexOptions& options) {
    check_shapes(system);
    const Index p = system.variables();
    const Index m_eq = system.A_eq.rows(), m_le = system.A_le.rows();
    const Index m = m_eq + m_le;

    Result result;
    result.x = Vector::Zero(p);
    if (m == 0) {
        result.status = Status::Feasible;
        return result;
    }

    // Rows needing an artificial: every equality, and inequalities with negative right-hand side.
    std::vector<Index> artificial_rows;
    for (Index i = 0; i < m_eq; ++i) artificial_rows.push_back(i);
    for (Index i = 0; i < m_le; ++i)
        if (system.b_le(i) < 0.0) artificial_rows.push_back(m_eq + i);

    const Index n_art = static_cast<Index>(artificial_rows.size());
    const Index slack0 = 2 * p, art0 = 2 * p + m_le, cols = art0 + n_art, rhs = cols;

    RowMatrix T = RowMatrix::Zero(m + 1, cols + 1);
    if (m_eq > 0) {
        T.block(0, 0, m_eq, p) = system.A_eq;
        T.block(0, p, m_eq, p) = -system.A_eq;
        T.block(0, rhs, m_eq, 1) = system.b_eq;
    }
    if (m_le > 0) {
        T.block(m_eq, 0, m_le, p) = system.A_le;
        T.block(m_eq, p, m_le, p) = -system.A_le;
        T.block(m_eq, slack0, m_le, m_le).setIdentity();
        T.block(m_eq, rhs, m_le, 1) = system.b_le;
    }

    std::vector<Index> basis(static_cast<std::size_t>(m));
    for (Index i = 0; i < m_le; ++i) basis[static_cast<std::size_t>(m_eq + i)] = slack0 + i;
    for (Index a = 0; a < n_art; ++a) {
        const Index row = artificial_rows[static_cast<std::size_t>(a)];
        if (T(row, rhs) < 0.0) T.row(row) *= -1.0;
        T(row, art0 + a) = 1.0;
        basis[static_cast<std::size_t>(row)] = art0 + a;
        T.row(m) -= T.row(row);
    }
    // Artificial columns have zero reduced cost once their rows are subtracted.
    T.block(m, art0, 1, n_art).setZero();
    const RowMatrix original = T.topRows(m);

    const double scale = std::max(1.0, T.col(rhs).head(m).cwiseAbs().maxCoeff());
    const long cap = static_cast<long>(options.iteration_factor) * static_cast<long>(m + cols);

    // Rebuilds the tableau as B^-1 [A | b] from the original rows, discarding accumulated rounding.
    auto refactor = [&]() {
        Matrix basis_matrix(m, m);
        for (Index i = 0; i < m; ++i) basis_matrix.col(i) = original.col(basis[static_cast<std::size_t>(i)]);
        Eigen::PartialPivLU<Matrix> lu(basis_matrix);
        const Matrix rows = lu.solve(Matrix(original));
        if (!rows.allFinite()) return;
        T.topRows(m) = rows;
        for (Index i = 0; i < m; ++i)
            if (T(i, rhs) < 0.0 && T(i, rhs) > -options.feasibility_tol * scale) T(i, rhs) = 0.0;
        T.row(m).setZero();
        for (Index j = art0; j < cols; ++j) T(m, j) = 1.0;
        for (Index i = 0; i < m; ++i)
            if (basis[static_cast<std::size_t>(i)] >= art0) T.row(m) -= T.row(i);
        T.block(m, art0, 1, n_art).setZero();
    };

    Eigen::VectorXd pivot_col(m + 1);
    Eigen::Matrix<double, 1, Eigen::Dynamic> pivot_row(cols + 1);
    bool optimal = false;
    long it = 0;
    int degenerate_run = 0;
    bool fresh = true;
    for (; it < cap; ++it) {
        if (it > 0 && it % kRefactorInterval == 0) {
            refactor();
            fresh = true;
        }
        // Dantzig pricing, falling back to Bland's lowest index while pivots stall; artificials never re-enter.
        const bool bland = degenerate_run >= kStallLimit;
        Index enter = -1;
        double most_negative = -options.pivot_tol;
        for (Index j = 0; j < art0; ++j) {
            if (T(m, j) < most_negative) {
                enter = j;
                if (bland) break;
                most_negative = T(m, j);
            }
        }
        if (enter < 0) {
            // Optimality is only trusted on a freshly factorized tableau.
            if (!fresh) {
                refactor();
                fresh = true;
                continue;
            }
            optimal = true;
            break;
        }
        Index leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < m; ++i) {
            const double a = T(i, enter);
            if (a <= options.pivot_tol) continue;
            const double ratio = std::max(0.0, T(i, rhs)) / a;
            if (leave < 0 || ratio < best_ratio - 1e-15) {
                best_ratio = ratio;
                leave = i;
            } else if (ratio <= best_ratio + 1e-15 &&
                       basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]) {
                leave = i;
            }
        }
        // Phase 1 is bounded below by zero, so an unbounded ray cannot occur; a missing pivot row
        // means the entering column is numerically empty.
        if (leave < 0) {
            T(m, enter) = 0.0;
            continue;
        }
        degenerate_run = best_ratio * std::abs(T(m, enter)) <= 1e-15 * scale ? degenerate_run + 1 : 0;
        pivot_row = T.row(leave) / T(leave, enter);
        T.row(leave) = pivot_row;
        pivot_col = T.col(enter);
        pivot_col(leave) = 0.0;
        T.noalias() -= pivot_col * pivot_row;
        basis[static_cast<std::size_t>(leave)] = enter;
        fresh = false;
    }
    result.iterations = static_cast<int>(it);
    result.phase1_objective = std::max(0.0, -T(m, rhs));

    if (!optimal) {
        result.status = Status::IterationLimit;
        return result;
    }
    if (result.phase1_objective > options.feasibility_tol * scale) {
        result.status = Status::Infeasible;
        return result;
    }
    result.status = Status::Feasible;

    // Re-solve the final basis against the original rows; the tableau accumulates rounding.
    Matrix basis_matrix(m, m);
    for (Index i = 0; i < m; ++i) basis_matrix.col(i) = original.col(basis[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    Vector values = lu.solve(Vector(original.col(rhs)));
    if (!values.allFinite() || (basis_matrix * values - original.col(rhs)).cwiseAbs().maxCoeff() > 1e-9 * scale)
        values = T.col(rhs).head(m);

    for (Index i = 0; i < m; ++i) {
        const Index j = basis[static_cast<std::size_t>(i)];
        if (j < p)
            result.x(j) += values(i);
        else if (j < 2 * p)
            result.x(j - p) -= values(i);
    }
    return result;
}

}  // namespace nclab::lp
