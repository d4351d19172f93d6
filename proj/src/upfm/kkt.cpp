#include "nclab/linalg.hpp"
#include "nclab/upfm.hpp"

#include <cmath>

namespace nclab::upfm {

KktCertificate kkt_check_ce(const UpfmSolution& sol, const RegularizationParams& reg) {
    if (sol.loss != LossKind::CrossEntropy) throw std::invalid_argument("kkt_check_ce: cross-entropy solution required");
    if (!(sol.a > 0.0)) throw std::invalid_argument("kkt_check_ce: certificate needs a > 0");
    reg.validate();

    const int K = sol.K, n = sol.n;
    const Index N = static_cast<Index>(K) * n;
    const Matrix Y = label_matrix(K, n);

    // Loss gradient with respect to the logits W^T H at the candidate.
    const Matrix Z = sol.W.transpose() * sol.H;
    Matrix P(K, N);
    for (Index j = 0; j < N; ++j) {
        const Vector e = (Z.col(j).array() - Z.col(j).maxCoeff()).exp().matrix();
        P.col(j) = e / e.sum();
    }
    const Matrix grad = (P - Y) / static_cast<double>(N);

    KktCertificate cert;
    cert.t = reg.lambda_H / (n * (K - 1.0));
    // B = t (J_K - I_K) kron J_n: constant t off the diagonal class blocks.
    cert.B = Matrix::Constant(N, N, cert.t);
    for (int k = 0; k < K; ++k) cert.B.block(static_cast<Index>(k) * n, static_cast<Index>(k) * n, n, n).setZero();

    cert.S = Matrix::Zero(K + N, K + N);
    cert.S.topLeftCorner(K, K) = reg.lambda_W * Matrix::Identity(K, K);
    cert.S.topRightCorner(K, N) = grad;
    cert.S.bottomLeftCorner(N, K) = grad.transpose();
    cert.S.bottomRightCorner(N, N) = reg.lambda_H * Matrix::Identity(N, N) - cert.B;
    cert.S *= 0.5;

    // Q = M^T M with M = [W H], so S Q is formed without the (K+N)^2 Gram.
    Matrix M(sol.W.rows(), K + N);
    M << sol.W, sol.H;
    const Matrix SQ = (cert.S * M.transpose()) * M;
    const double q_norm = (M.transpose() * M).norm();

    cert.psd_min_eig = min_eigenvalue(cert.S);
    cert.sq_norm = SQ.norm();
    cert.sq_relative = cert.sq_norm / (cert.S.norm() * q_norm);
    cert.bv_inner = cert.B.cwiseProduct(sol.H.transpose() * sol.H).sum();
    return cert;
}

double schur_complement_min_eig(int n, int K, double lambda_H) {
    const Index N = static_cast<Index>(K) * n;
    Matrix block = Matrix::Zero(N, N);
    for (int k = 0; k < K; ++k) block.block(static_cast<Index>(k) * n, static_cast<Index>(k) * n, n, n).setConstant(1.0 / n);
    return min_eigenvalue(lambda_H * (Matrix::Identity(N, N) - block));
}

}  // namespace nclab::upfm
