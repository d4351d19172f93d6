#include "nclab/core.hpp"

#include <cmath>
#include <string>

namespace nclab {

LabeledDataset::LabeledDataset(Matrix X_, int K_, int n_) : X(std::move(X_)), K(K_), n(n_) {
    if (K < 2 || n < 1 || X.rows() < 1)
        throw std::invalid_argument("LabeledDataset: need d >= 1, K >= 2, n >= 1");
    if (X.cols() != static_cast<Index>(K) * n)
        throw std::invalid_argument("LabeledDataset: X has " + std::to_string(X.cols()) +
                                    " columns, expected K*n = " + std::to_string(K * n));
}

void GmmSpec::validate() const {
    if (Pi.rows() < 2 || Pi.cols() < 1) throw std::invalid_argument("GmmSpec: Pi must be K x d with K >= 2");
    if (n < 1) throw std::invalid_argument("GmmSpec: n must be positive");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("GmmSpec: sigma must be finite and >= 0");
    if (!Pi.allFinite()) throw std::invalid_argument("GmmSpec: means must be finite");
}

GmmSample sample_gmm(const GmmSpec& spec, RngStream& rng) {
    spec.validate();
    const int K = spec.K();
    const Index d = spec.d();
    Matrix Z = rng.gaussian(d, static_cast<Index>(K) * spec.n);
    Matrix X(d, Z.cols());
    for (int k = 0; k < K; ++k) {
        auto Xk = X.middleCols(static_cast<Index>(k) * spec.n, spec.n);
        Xk = spec.Pi.row(k).transpose().replicate(1, spec.n) + spec.sigma * Z.middleCols(static_cast<Index>(k) * spec.n, spec.n);
    }
    return GmmSample{LabeledDataset(std::move(X), K, spec.n), spec, std::move(Z)};
}

Matrix label_matrix(int K, int n) {
    if (K < 2 || n < 1) throw std::invalid_argument("label_matrix: need K >= 2, n >= 1");
    Matrix Y = Matrix::Zero(K, static_cast<Index>(K) * n);
    for (int k = 0; k < K; ++k) Y.row(k).segment(static_cast<Index>(k) * n, n).setOnes();
    return Y;
}

Matrix class_means(const Matrix& H, int K, int n) {
    if (K < 1 || n < 1 || H.cols() != static_cast<Index>(K) * n)
        throw std::invalid_argument("class_means: H must have K*n columns");
    Matrix means(H.rows(), K);
    for (int k = 0; k < K; ++k) means.col(k) = H.middleCols(static_cast<Index>(k) * n, n).rowwise().mean();
    return means;
}

Matrix CenteringMatrix::materialize() const {
    if (K < 1) throw std::invalid_argument("CenteringMatrix: K must be positive");
    return Matrix::Identity(K, K) - Matrix::Constant(K, K, 1.0 / K);
}

}  // namespace nclab
