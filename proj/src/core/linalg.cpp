#include "nclab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nclab {

namespace {

double effective_tol(const Matrix& A, double tol) {
    if (tol > 0.0) return tol;
    return static_cast<double>(std::max(A.rows(), A.cols())) * std::numeric_limits<double>::epsilon();
}

Index count_above(const Vector& s, double rel_tol) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cut = rel_tol * s(0);
    Index r = 0;
    while (r < s.size() && s(r) > cut) ++r;
    return r;
}

}  // namespace

Matrix null_space_basis(const Matrix& A, double tol) {
    const Index d = A.cols();
    if (A.rows() == 0 || d == 0) return Matrix::Identity(d, d);
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const Index r = count_above(svd.singularValues(), effective_tol(A, tol));
    return svd.matrixV().rightCols(d - r);
}

Index numerical_rank(const Matrix& A, double tol) {
    if (A.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(A);
    return count_above(svd.singularValues(), effective_tol(A, tol));
}

Matrix pseudo_inverse(const Matrix& A, double tol) {
    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const Index r = count_above(s, effective_tol(A, tol));
    return svd.matrixV().leftCols(r) * s.head(r).cwiseInverse().asDiagonal() * svd.matrixU().leftCols(r).transpose();
}

double min_eigenvalue(const Matrix& A) {
    Matrix sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace nclab
