#pragma once

#include "nclab/core.hpp"

namespace nclab::upfm {

enum class LossKind { CrossEntropy, SquaredError };

struct RegularizationParams {
    double lambda_W = 0.0;
    double lambda_H = 0.0;

    double lambda() const { return std::sqrt(lambda_W * lambda_H); }
    void validate() const;
};

/// Global minimizer of the positive feature model for a balanced problem.
/// For cross-entropy: W^T W = (a^2/b) C_K, H^T H = b Y^T Y, W^T H = a C_K Y.
/// For squared error: W^T H = s Y with s = (1 - sqrt(n) K lambda)_+; a holds s, b the feature scale.
struct UpfmSolution {
    LossKind loss = LossKind::CrossEntropy;
    int n = 0;
    int K = 0;
    double a = 0.0;
    double b = 0.0;
    Matrix W;  ///< D x K
    Matrix H;  ///< D x N, nonnegative, constant within each class
    double objective = 0.0;
};

UpfmSolution ce_closed_form(int n, int K, const RegularizationParams& reg, int D);
UpfmSolution l2_closed_form(int n, int K, const RegularizationParams& reg, int D);

/// Regularized empirical risk: mean loss of W^T H against Y plus both ridge terms.
double objective(LossKind loss, const Matrix& W, const Matrix& H, const Matrix& Y, const RegularizationParams& reg);

struct Gradient {
    double value = 0.0;
    Matrix dW;
    Matrix dH;
};

Gradient objective_gradient(LossKind loss, const Matrix& W, const Matrix& H, const Matrix& Y,
                            const RegularizationParams& reg);

struct NumericOptions {
    int restarts = 5;
    double initial_step = 1e-2;
    double gradient_tol = 1e-8;
};

struct NumericResult {
    Matrix W;
    Matrix H;
    double objective = 0.0;
    bool converged = false;  ///< best restart met the gradient tolerance
    int diverged_restarts = 0;
};

/// Projected gradient descent over (W, H >= 0) with random restarts.
/// Throws NumericalError when every restart diverges.
NumericResult numeric_minimize(LossKind loss, int n, int K, int D, const RegularizationParams& reg, RngStream& rng,
                               int iters, const NumericOptions& options = {});

struct KktCertificate {
    Matrix S;  ///< (K+N) x (K+N) dual matrix
    Matrix B;  ///< N x N nonnegative multiplier for the H^T H >= 0 constraint
    double t = 0.0;
    double psd_min_eig = 0.0;
    double sq_norm = 0.0;      ///< ||S Q||_F
    double sq_relative = 0.0;  ///< ||S Q||_F / (||S||_F ||Q||_F)
    double bv_inner = 0.0;     ///< <B, H^T H>
};

/// Dual certificate for a cross-entropy solution with a > 0. The off-diagonal block uses the
/// loss gradient at the candidate, which equals -K/(N(K-1+e^a)) C_K Y at the closed form.
KktCertificate kkt_check_ce(const UpfmSolution& sol, const RegularizationParams& reg);

/// Smallest eigenvalue of lambda_H (I_N - (1/n) I_K kron J_n).
double schur_complement_min_eig(int n, int K, double lambda_H);

}  // namespace nclab::upfm
