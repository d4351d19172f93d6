#pragma once

#include "nclab/core.hpp"

namespace nclab::gen {

/// f(x) = relu(beta1^T x) - relu(beta2^T x); class 1 is predicted when f > 0 and class 2 when f < 0.
struct TwoNeuronClassifier {
    Vector beta1;
    Vector beta2;

    double operator()(const Vector& x) const;
    /// Largest violation of X1^T beta1 = 1, X2^T beta1 <= 0 and the mirrored conditions for beta2.
    double membership_residual(const LabeledDataset& data) const;
};

enum class Regime { LowNoiseConstruction, MinNormLargeDimension };

struct MarginReport {
    Regime regime = Regime::LowNoiseConstruction;
    double f_star = 0.0;       // <mu_k, beta*> / |beta*| with mu_k the mean of the target class
    Vector beta_star;
    double upper_error = 0.0;  // single-neuron error term Phi(-f*/sigma) achieved by beta*; meaningful when inequalities_hold
    double lower_error = 0.0;  // single-neuron error floor for every member of the class set (NaN if unavailable)
    double cos_theta = 0.0;    // sign decides which branch of the relaxed optimum applies
    bool degraded = false;     // cos_theta >= 0: the supremum escapes to infinity and beta* only approaches it
    bool attained = true;
    bool inequalities_hold = false;
    double membership_residual = 0.0;
};

/// Maximizes <mu_k, beta>/|beta| under the equality constraints of class k through the null-space
/// parameterization, then checks whether the dropped inequality constraints hold at the optimum.
/// Expects antipodal means (mu, -mu). Target class k in {0, 1}.
MarginReport margin_low_noise(const GmmSample& sample, int k = 0, double tol = 1e-7);

/// Minimum-norm reformulation for d - 1 >= 2n. Coordinates are rotated so the target mean is |mu| e1.
class MinNormProblem {
public:
    MinNormProblem(const GmmSample& sample, int k = 0);

    /// c / |beta(c, gamma)| for the minimum-norm beta pinned by <mu_k, beta> = c and X_other^T beta = -gamma.
    double F(double c, const Vector& gamma) const;
    /// The pinned minimum-norm beta, in the original coordinates.
    Vector beta(double c, const Vector& gamma) const;
    /// |r(c, gamma) / c|^2, the Gram-free surrogate whose minimum drives the error lower bound.
    double G(double c, const Vector& gamma) const;

    /// 1/F^2 as a function of t = 1/c and g = gamma/c; convex and quadratic.
    double inverse_square_F(double t, const Vector& g) const;
    Vector inverse_square_F_gradient(double t, const Vector& g) const;

    int n() const { return n_; }
    Index d() const { return d_; }
    double mu_norm() const { return mu_norm_; }
    double sigma() const { return sigma_; }
    double gram_max_eigenvalue() const { return gram_max_eig_; }

private:
    friend struct MinNormAccess;
    Vector scaled_residual(double t, const Vector& g) const;  // r / c

    int n_ = 0;
    Index d_ = 0;
    double sigma_ = 0.0;
    double mu_norm_ = 0.0;
    Vector mu_dir_;          // unit target mean, original coordinates
    Vector noise_e1_;        // Z e1 in rotated coordinates: target block then other block (2n)
    Matrix Z_rest_;          // 2n x (d-1), the remaining rotated coordinates
    Eigen::LLT<Matrix> gram_;
    Matrix gram_inverse_factor_;  // L^-1 with Z_rest Z_rest^T = L L^T
    double gram_max_eig_ = 0.0;
    Matrix householder_;     // symmetric orthogonal H with H mu_dir = e1
};

struct MaximizeFResult {
    double f_star = 0.0;
    double c = 0.0;
    Vector gamma;
    Vector beta;
    bool attained = true;  // false when the optimum sits at c = infinity and is only approached
    // Closed-form choice: 1/c from the G-optimal quadratic and gamma = c [1 - s Z2 e1]_+.
    double f_closed_form = 0.0;
    double c_closed_form = 0.0;
    Vector gamma_closed_form;
    bool closed_form_finite = true;
    double min_G = 0.0;
    double f_upper_bound = 0.0;  // (min G / 2d + 1/|mu|^2)^{-1/2}
    bool gram_condition = false; // lambda_max(Z_rest Z_rest^T) <= 2d, which validates f_upper_bound
    double lower_error = 0.0;    // Phi(-f_upper_bound/sigma) when gram_condition holds, NaN otherwise
};

/// Exact maximization of F over c > 0, gamma >= 0, solved as a nonnegative least-squares problem in (1/c, gamma/c).
MaximizeFResult maximize_F(const GmmSample& sample, int k = 0);

/// Convenience wrapper: F(c, gamma) for target class k.
double margin_min_norm(const GmmSample& sample, double c, const Vector& gamma, int k = 0);

struct ErrorLowerFormula {
    double value = 0.0;
    bool inner_nonpositive = false;  // value is the 0.5 floor
};

/// 1 - Phi(((n/2d)(s^3 e^{-1/(2 s^2)}/sqrt(2 pi) + s^2 + 1 - (c1 s^2 + c2 s) sqrt(log n / n)) + s^2)^{-1/2}).
ErrorLowerFormula error_lower_formula(double s, int n, double d, double c1 = 1.0, double c2 = 1.0);

enum class McMethod { Projected, FullDimension };

struct McError {
    double error = 0.0;      // ties f(x) = 0 count as errors
    double ci = 0.0;         // standard error of the stratified estimate
    double tie_rate = 0.0;   // subtracting it gives the strict-inequality error
    double class1_error = 0.0;
    double class2_error = 0.0;
    long samples = 0;
};

/// Fresh test points +-mu + sigma z, half from each class. Projected draws the pair (<z,beta1>, <z,beta2>)
/// from its exact bivariate normal law; FullDimension draws z in R^d. Chunks use fixed substreams.
McError monte_carlo_error(const TwoNeuronClassifier& clf, const Vector& mu, double sigma, long samples,
                          const RngStream& rng, McMethod method = McMethod::Projected, int threads = 0);

/// (1/2)[Phi(-<mu,beta1>/(sigma |beta1|)) + Phi(<mu,beta2>/(sigma |beta2|))]. The tie-inclusive error lies in [E, 2E].
double error_sandwich_center(const TwoNeuronClassifier& clf, const Vector& mu, double sigma);

}  // namespace nclab::gen
