#pragma once

#include "nclab/core.hpp"

namespace nclab::rf {

/// AnalyticReluMean subtracts E[relu(z)] = 1/sqrt(2 pi); PaperConstant subtracts sqrt(2/pi).
enum class Centering { AnalyticReluMean, PaperConstant };

double centering_constant(Centering centering);

/// E[relu(u) relu(v)] for standard Gaussians with correlation rho: (sqrt(1-rho^2) + rho (pi - arccos rho)) / (2 pi).
double relu_product_moment(double rho);

/// Entry (i,j) is E[(relu(<z,x_i>) - c)(relu(<z,x_j>) - c)] over z ~ N(0, I_d) with unit columns x_i.
/// For the analytic mean this is relu_product_moment(rho) - c^2, and the matrix is a covariance (PSD).
Matrix kernel_closed_form(const Matrix& X, Centering centering = Centering::AnalyticReluMean);

struct KernelEstimate {
    Matrix H_hat;
    long samples_m = 0;
    Centering centering = Centering::AnalyticReluMean;
    double lambda_min_hat = 0.0;
};

/// Averages (phi(z) - c 1)(phi(z) - c 1)^T with phi(z) = relu(X^T z) over m draws. Batches draw from
/// fixed substreams and are reduced in index order, so the estimate does not depend on the thread count.
KernelEstimate kernel_monte_carlo(const Matrix& X, long m, const RngStream& rng,
                                  Centering centering = Centering::AnalyticReluMean, int threads = 0);

struct FeatureRank {
    int rank = 0;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

/// Rank of relu(W1^T X) for W1 with i.i.d. N(0, 1/d1) entries; singular values at or below
/// tol * sigma_max * max(d1, N) count as zero.
FeatureRank relu_feature_rank(const Matrix& X, Index d1, RngStream& rng, double tol = 0.0);

/// Feature matrix relu(W1^T X) for the same W1 distribution, exposed for downstream feasibility checks.
Matrix relu_features(const Matrix& X, Index d1, RngStream& rng);

/// ceil(c |X|_op^4 N log N / lambda_min^2).
long width_bound(const Matrix& X, double kernel_lambda_min, Index N, double constant_c = 8.0);

}  // namespace nclab::rf
