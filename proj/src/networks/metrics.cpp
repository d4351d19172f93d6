#include "nclab/networks.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nclab::networks {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double distance_to_unit_target(const Matrix& G, const Matrix& target) {
    const double norm = G.norm();
    if (!(norm > 0.0)) return kNaN;
    return (G / norm - target).norm();
}

}  // namespace

NcMetrics nc_metrics(const Matrix& H, const Matrix& W, int K, int n) {
    if (K < 2 || n < 1 || H.cols() != static_cast<Index>(K) * n)
        throw std::invalid_argument("nc_metrics: H must have K*n columns");
    if (W.rows() != H.rows() || W.cols() != K) throw std::invalid_argument("nc_metrics: W must be D x K");
    const double N = static_cast<double>(H.cols());

    NcMetrics out;
    const Matrix Hbar = class_means(H, K, n);
    const Vector global = Hbar.rowwise().mean();
    const Matrix within = H - Hbar * label_matrix(K, n);

    // Sigma_B = M M^T with M = (Hbar - h_G 1^T)/sqrt(K), so Tr(Sigma_W Sigma_B^+) only needs the
    // left singular pairs of M: sum_j s_j^-2 u_j^T Sigma_W u_j.
    const Matrix M = (Hbar.colwise() - global) / std::sqrt(static_cast<double>(K));
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
    const Vector& s = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(M.rows(), M.cols())) * std::numeric_limits<double>::epsilon() *
                          (s.size() > 0 ? s(0) : 0.0);
    Index rank = 0;
    double trace = 0.0;
    // Columns of M sum to zero, so at most K - 1 singular values are structurally nonzero.
    for (Index j = 0; j < std::min<Index>(s.size(), K - 1); ++j) {
        if (!(s(j) > cutoff)) continue;
        ++rank;
        const Vector projected = within.transpose() * svd.matrixU().col(j);
        trace += projected.squaredNorm() / N / (s(j) * s(j));
    }
    out.between_class_degenerate = rank < K - 1;
    out.nc1 = out.between_class_degenerate ? kNaN : trace / K;

    const Matrix CK = centering_matrix(K) / std::sqrt(K - 1.0);
    const Matrix I = Matrix::Identity(K, K) / std::sqrt(static_cast<double>(K));
    const Matrix HtH = Hbar.transpose() * Hbar;
    out.mean_features_zero = !(HtH.norm() > 0.0);
    out.nc2_h = distance_to_unit_target(HtH, I);
    out.nc2_w = distance_to_unit_target(W.transpose() * W, CK);
    out.nc3 = distance_to_unit_target(W.transpose() * Hbar, CK);
    return out;
}

}  // namespace nclab::networks
