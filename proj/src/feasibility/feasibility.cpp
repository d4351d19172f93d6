#include "nclab/feasibility.hpp"

#include <string>

namespace nclab::feasibility {

namespace {

void check_class(const LabeledDataset& data, int k) {
    if (k < 0 || k >= data.K) throw std::invalid_argument("class index " + std::to_string(k) + " out of range");
}

// Columns of every class except k, transposed into constraint rows.
Matrix other_rows(const LabeledDataset& data, int k) {
    Matrix rows(data.N() - data.n, data.d());
    Index r = 0;
    for (int j = 0; j < data.K; ++j) {
        if (j == k) continue;
        rows.middleRows(r, data.n) = data.block(j).transpose();
        r += data.n;
    }
    return rows;
}

}  // namespace

Residuals certificate_residuals(const LabeledDataset& data, int k, const Vector& beta) {
    check_class(data, k);
    if (beta.size() != data.d()) throw std::invalid_argument("certificate_residuals: beta has the wrong length");
    Residuals r;
    for (Index i = 0; i < data.N(); ++i) {
        const double value = data.X.col(i).dot(beta);
        if (i / data.n == k)
            r.eq_residual = std::max(r.eq_residual, std::abs(value - 1.0));
        else
            r.max_ineq_violation = std::max(r.max_ineq_violation, value);
    }
    return r;
}

ClassCertificate nc_feasible(const LabeledDataset& data, int k, double tol, const lp::SimplexOptions& options) {
    check_class(data, k);
    lp::LinearSystem system;
    system.A_eq = data.block(k).transpose();
    system.b_eq = Vector::Ones(data.n);
    system.A_le = other_rows(data, k);
    system.b_le = Vector::Zero(system.A_le.rows());

    const lp::Result lp = lp::find_feasible_point(system, options);
    ClassCertificate cert;
    cert.lp_iterations = lp.iterations;
    switch (lp.status) {
        case lp::Status::IterationLimit:
            cert.status = ClassStatus::NumericalFailure;
            return cert;
        case lp::Status::Infeasible:
            cert.status = ClassStatus::Infeasible;
            return cert;
        case lp::Status::Feasible:
            break;
    }
    cert.residuals = certificate_residuals(data, k, lp.x);
    // A phase-1 success that does not survive verification is a numerical failure, not a certificate.
    if (cert.residuals.eq_residual > tol || cert.residuals.max_ineq_violation > tol) {
        cert.status = ClassStatus::NumericalFailure;
        return cert;
    }
    cert.status = ClassStatus::Feasible;
    cert.beta = lp.x;
    return cert;
}

FeasibilityResult nc_feasible_all(const LabeledDataset& data, double tol) {
    FeasibilityResult result;
    result.overall = true;
    for (int k = 0; k < data.K; ++k) {
        result.per_class.push_back(nc_feasible(data, k, tol));
        result.overall = result.overall && result.per_class.back().status == ClassStatus::Feasible;
    }
    return result;
}

bool is_linearly_separable(const LabeledDataset& data, int k, double tol) {
    check_class(data, k);
    lp::LinearSystem system;
    const Matrix others = other_rows(data, k);
    system.A_le.resize(data.N(), data.d());
    system.A_le << -data.block(k).transpose(), others;
    system.b_le = Vector::Zero(data.N());
    system.b_le.head(data.n).setConstant(-1.0);
    system.A_eq.resize(0, data.d());
    system.b_eq.resize(0);

    const lp::Result lp = lp::find_feasible_point(system);
    if (lp.status == lp::Status::IterationLimit) throw NumericalError("is_linearly_separable: simplex iteration cap reached");
    if (lp.status == lp::Status::Infeasible) return false;
    const Vector margins = system.A_le * lp.x - system.b_le;
    if (margins.maxCoeff() > tol) throw NumericalError("is_linearly_separable: separating vector failed verification");
    return true;
}

}  // namespace nclab::feasibility
