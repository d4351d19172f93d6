#include "nclab/random_features.hpp"
#include "nclab/linalg.hpp"
#include "nclab/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nclab::rf {

namespace {

constexpr long kBatch = 4096;

void check_unit_columns(const Matrix& X) {
    if (X.cols() < 1 || X.rows() < 1) throw std::invalid_argument("random features: empty input");
    for (Index i = 0; i < X.cols(); ++i)
        if (std::abs(X.col(i).norm() - 1.0) > 1e-10) throw std::invalid_argument("random features: columns must have unit norm");
}

}  // namespace

double centering_constant(Centering centering) {
    return centering == Centering::AnalyticReluMean ? 1.0 / std::sqrt(2.0 * std::numbers::pi) : std::sqrt(2.0 / std::numbers::pi);
}

double relu_product_moment(double rho) {
    rho = std::clamp(rho, -1.0, 1.0);
    return (std::sqrt(1.0 - rho * rho) + rho * (std::numbers::pi - std::acos(rho))) / (2.0 * std::numbers::pi);
}

Matrix kernel_closed_form(const Matrix& X, Centering centering) {
    check_unit_columns(X);
    const double c = centering_constant(centering);
    // E[(relu(u) - c)(relu(v) - c)] = E[relu(u) relu(v)] - 2 c E[relu(u)] + c^2.
    const double shift = -2.0 * c / std::sqrt(2.0 * std::numbers::pi) + c * c;
    const Matrix G = X.transpose() * X;
    Matrix H(G.rows(), G.cols());
    for (Index i = 0; i < G.rows(); ++i) {
        H(i, i) = relu_product_moment(1.0) + shift;
        for (Index j = 0; j < i; ++j) H(i, j) = H(j, i) = relu_product_moment(G(i, j)) + shift;
    }
    return H;
}

KernelEstimate kernel_monte_carlo(const Matrix& X, long m, const RngStream& rng, Centering centering, int threads) {
    check_unit_columns(X);
    if (m < 1) throw std::invalid_argument("kernel_monte_carlo: needs m >= 1");
    const double c = centering_constant(centering);
    const Index N = X.cols();
    const long batches = (m + kBatch - 1) / kBatch;
    std::vector<Matrix> partial(static_cast<std::size_t>(batches));
    parallel_for(static_cast<std::size_t>(batches), [&](std::size_t b) {
        RngStream stream = rng.substream(b);
        const long count = std::min<long>(kBatch, m - static_cast<long>(b) * kBatch);
        const Matrix F = ((X.transpose() * stream.gaussian(X.rows(), count)).cwiseMax(0.0).array() - c).matrix();
        partial[b] = F * F.transpose();
    }, threads);

    KernelEstimate est;
    est.H_hat = Matrix::Zero(N, N);
    for (const Matrix& P : partial) est.H_hat += P;
    est.H_hat /= static_cast<double>(m);
    est.H_hat = 0.5 * (est.H_hat + est.H_hat.transpose());
    est.samples_m = m;
    est.centering = centering;
    est.lambda_min_hat = min_eigenvalue(est.H_hat);
    return est;
}

Matrix relu_features(const Matrix& X, Index d1, RngStream& rng) {
    if (d1 < 1) throw std::invalid_argument("relu_features: needs d1 >= 1");
    const Matrix W1 = rng.gaussian(X.rows(), d1) / std::sqrt(static_cast<double>(d1));
    return (W1.transpose() * X).cwiseMax(0.0);
}

FeatureRank relu_feature_rank(const Matrix& X, Index d1, RngStream& rng, double tol) {
    const Matrix F = relu_features(X, d1, rng);
    Eigen::BDCSVD<Matrix> svd(F);
    const Vector& s = svd.singularValues();
    const double eps = tol > 0.0 ? tol : std::numeric_limits<double>::epsilon();
    FeatureRank out;
    out.sigma_max = s.size() > 0 ? s(0) : 0.0;
    const double cutoff = eps * out.sigma_max * static_cast<double>(std::max(F.rows(), F.cols()));
    for (Index j = 0; j < s.size(); ++j) out.rank += s(j) > cutoff;
    out.sigma_min = s.size() > 0 ? s(s.size() - 1) : 0.0;
    return out;
}

long width_bound(const Matrix& X, double kernel_lambda_min, Index N, double constant_c) {
    if (!(kernel_lambda_min > 0.0)) throw std::invalid_argument("width_bound: kernel lambda_min must be positive");
    if (N < 2) throw std::invalid_argument("width_bound: needs N >= 2");
    if (!(constant_c > 0.0)) throw std::invalid_argument("width_bound: constant must be positive");
    Eigen::JacobiSVD<Matrix> svd(X);
    const double op = svd.singularValues()(0);
    const double n = static_cast<double>(N);
    const double value = constant_c * std::pow(op, 4) * n * std::log(n) / (kernel_lambda_min * kernel_lambda_min);
    if (!(value < 9.0e18)) throw std::invalid_argument("width_bound: bound overflows");
    return static_cast<long>(std::ceil(value));
}

}  // namespace nclab::rf
