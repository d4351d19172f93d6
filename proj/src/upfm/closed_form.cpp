#include "nclab/upfm.hpp"

#include <cmath>
#include <string>

namespace nclab::upfm {

void RegularizationParams::validate() const {
    if (!(lambda_W > 0.0) || !(lambda_H > 0.0) || !std::isfinite(lambda_W) || !std::isfinite(lambda_H))
        throw std::invalid_argument("regularization weights must be positive and finite");
}

namespace {

void check_sizes(int n, int K, int D) {
    if (n < 1 || K < 2) throw std::invalid_argument("need n >= 1 and K >= 2");
    if (D < K) throw std::invalid_argument("feature dimension D=" + std::to_string(D) + " is smaller than K=" + std::to_string(K));
}

// D x K matrix whose first K rows are the identity: disjoint one-hot supports keep H nonnegative.
Matrix one_hot_embedding(int D, int K) {
    Matrix E = Matrix::Zero(D, K);
    E.topRows(K).setIdentity();
    return E;
}

}  // namespace

UpfmSolution ce_closed_form(int n, int K, const RegularizationParams& reg, int D) {
    check_sizes(n, K, D);
    reg.validate();
    const double N = static_cast<double>(n) * K;

    UpfmSolution sol;
    sol.loss = LossKind::CrossEntropy;
    sol.n = n;
    sol.K = K;
    const double inner = (K - 1.0) * (std::sqrt(1.0 / (n * K * (K - 1.0) * reg.lambda_H * reg.lambda_W)) - 1.0);
    sol.a = inner > 1.0 ? std::log(inner) : 0.0;
    sol.b = std::sqrt((K - 1.0) / (n * K) * reg.lambda_W / reg.lambda_H) * sol.a;

    if (sol.a == 0.0) {
        sol.W = Matrix::Zero(D, K);
        sol.H = Matrix::Zero(D, static_cast<Index>(N));
    } else {
        const Matrix E = one_hot_embedding(D, K);
        sol.H = std::sqrt(sol.b) * E * label_matrix(K, n);
        sol.W = (sol.a / std::sqrt(sol.b)) * E * centering_matrix(K);
    }
    sol.objective = objective(sol.loss, sol.W, sol.H, label_matrix(K, n), reg);
    return sol;
}

UpfmSolution l2_closed_form(int n, int K, const RegularizationParams& reg, int D) {
    check_sizes(n, K, D);
    reg.validate();

    UpfmSolution sol;
    sol.loss = LossKind::SquaredError;
    sol.n = n;
    sol.K = K;
    const double shrink = 1.0 - std::sqrt(static_cast<double>(n)) * K * reg.lambda();
    sol.a = shrink > 0.0 ? shrink : 0.0;
    const double feature_scale = std::pow(reg.lambda_W / (n * reg.lambda_H), 0.25) * std::sqrt(sol.a);
    sol.b = feature_scale * feature_scale;

    const Matrix Hbar = feature_scale * one_hot_embedding(D, K);
    sol.H = Hbar * label_matrix(K, n);
    sol.W = std::sqrt(n * reg.lambda_H / reg.lambda_W) * Hbar;
    sol.objective = objective(sol.loss, sol.W, sol.H, label_matrix(K, n), reg);
    return sol;
}

}  // namespace nclab::upfm
