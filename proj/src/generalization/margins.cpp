#include "nclab/generalization.hpp"
#include "nclab/feasibility.hpp"
#include "nclab/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nclab::gen {

namespace {

// 1/c used for beta when the optimum of the min-norm problem sits at c = infinity.
constexpr double kEscapeT = 1e-8;

struct TwoClassView {
    Vector mu;     // mean of the target class
    Matrix Z_own;  // d x n noise of the target class
    Matrix Z_other;
    double sigma;
    int n;
};

TwoClassView two_class_view(const GmmSample& sample, int k) {
    const LabeledDataset& data = sample.data;
    if (data.K != 2 || sample.spec.K() != 2) throw std::invalid_argument("generalization: needs a two-cluster sample");
    if (k != 0 && k != 1) throw std::invalid_argument("generalization: class index must be 0 or 1");
    const Vector mu0 = sample.spec.Pi.row(0).transpose(), mu1 = sample.spec.Pi.row(1).transpose();
    if ((mu0 + mu1).norm() > 1e-12 * std::max(1.0, mu0.norm()))
        throw std::invalid_argument("generalization: class means must be antipodal");
    if (!(mu0.norm() > 0.0)) throw std::invalid_argument("generalization: class means must be nonzero");
    return {k == 0 ? mu0 : mu1, sample.noise_block(k), sample.noise_block(1 - k), sample.spec.sigma, sample.spec.n};
}

// Lawson-Hanson active set: argmin_{y >= 0} |A y - b|.
Vector nnls(const Matrix& A, const Vector& b) {
    const Index m = A.cols();
    Vector x = Vector::Zero(m);
    std::vector<bool> passive(static_cast<std::size_t>(m), false);
    const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() * static_cast<double>(std::max(A.rows(), m));

    auto solve_passive = [&]() {
        std::vector<Index> idx;
        for (Index j = 0; j < m; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Matrix Ap(A.rows(), static_cast<Index>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i) Ap.col(static_cast<Index>(i)) = A.col(idx[i]);
        const Vector zp = Ap.colPivHouseholderQr().solve(b);
        Vector z = Vector::Zero(m);
        for (std::size_t i = 0; i < idx.size(); ++i) z(idx[i]) = zp(static_cast<Index>(i));
        return z;
    };

    for (Index outer = 0; outer < 3 * m + 10; ++outer) {
        const Vector w = A.transpose() * (b - A * x);
        Index best = -1;
        double best_w = tol;
        for (Index j = 0; j < m; ++j)
            if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) best_w = w(j), best = j;
        if (best < 0) return x;
        passive[static_cast<std::size_t>(best)] = true;

        for (Index inner = 0; inner < 3 * m + 10; ++inner) {
            const Vector z = solve_passive();
            double alpha = 1.0;
            bool clipped = false;
            for (Index j = 0; j < m; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
                    alpha = std::min(alpha, x(j) / (x(j) - z(j)));
                    clipped = true;
                }
            }
            if (!clipped) {
                x = z;
                break;
            }
            x += alpha * (z - x);
            for (Index j = 0; j < m; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            }
        }
    }
    throw NumericalError("maximize_F: active-set iteration did not settle");
}

}  // namespace

// ---------------------------------------------------------------------------
// Low-noise construction
// ---------------------------------------------------------------------------

MarginReport margin_low_noise(const GmmSample& sample, int k, double tol) {
    const TwoClassView v = two_class_view(sample, k);
    const Index d = v.mu.size();
    if (d - v.n + 1 < 1) throw std::invalid_argument("margin_low_noise: needs d - n + 1 >= 1");

    // X_k^T beta = 1 splits into sigma C_n Z_k^T beta = 0 and <mu_hat, beta> = 1.
    Matrix Phi;
    Vector mu_hat = v.mu;
    if (v.sigma == 0.0) {
        Phi = Matrix::Identity(d, d);
    } else {
        const Matrix Zt = v.Z_own.transpose();
        const Matrix centered = Zt.rowwise() - Zt.colwise().mean();
        Phi = null_space_basis(centered);
        mu_hat += v.sigma * v.Z_own.rowwise().mean();
    }
    if (Phi.cols() == 0) throw NumericalError("margin_low_noise: degenerate null space");

    const Vector proj_hat = Phi.transpose() * mu_hat;
    if (!(proj_hat.squaredNorm() > 0.0)) throw NumericalError("margin_low_noise: shifted mean vanishes on the null space");
    const Vector v1 = proj_hat / proj_hat.squaredNorm();
    const Vector v2 = -(Phi.transpose() * v.mu);
    const feasibility::LemmaMinResult best = feasibility::lemma_min(v1, v2);

    MarginReport out;
    out.regime = Regime::LowNoiseConstruction;
    out.f_star = -best.min_value;
    out.beta_star = Phi * (v1 + best.argmin_v);
    const double denom = v1.norm() * v2.norm();
    out.cos_theta = denom > 0.0 ? v1.dot(v2) / denom : 0.0;
    out.degraded = out.cos_theta >= 0.0;
    out.attained = best.attained;

    const feasibility::Residuals r = feasibility::certificate_residuals(sample.data, k, out.beta_star);
    out.membership_residual = std::max(r.eq_residual, r.max_ineq_violation);
    out.inequalities_hold = r.eq_residual <= tol && r.max_ineq_violation <= tol;

    // The relaxed supremum bounds every member of the constrained set, so its error term is a floor.
    out.upper_error = v.sigma == 0.0 ? 0.0 : normal_sf(out.f_star / v.sigma);
    out.lower_error = out.upper_error;
    return out;
}

// ---------------------------------------------------------------------------
// Minimum-norm reformulation
// ---------------------------------------------------------------------------

MinNormProblem::MinNormProblem(const GmmSample& sample, int k) {
    const TwoClassView v = two_class_view(sample, k);
    n_ = v.n;
    d_ = v.mu.size();
    sigma_ = v.sigma;
    if (!(sigma_ > 0.0)) throw std::invalid_argument("MinNormProblem: needs sigma > 0");
    if (d_ - 1 < 2 * static_cast<Index>(n_)) throw std::invalid_argument("MinNormProblem: needs d - 1 >= 2n");

    mu_norm_ = v.mu.norm();
    mu_dir_ = v.mu / mu_norm_;
    Vector u = mu_dir_ - Vector::Unit(d_, 0);
    householder_ = Matrix::Identity(d_, d_);
    if (u.norm() > 1e-300) {
        u.normalize();
        householder_ -= 2.0 * u * u.transpose();
    }

    Matrix Zrot(2 * n_, d_);
    Zrot.topRows(n_) = v.Z_own.transpose() * householder_;
    Zrot.bottomRows(n_) = v.Z_other.transpose() * householder_;
    noise_e1_ = Zrot.col(0);
    Z_rest_ = Zrot.rightCols(d_ - 1);

    const Matrix gram = Z_rest_ * Z_rest_.transpose();
    gram_.compute(gram);
    if (gram_.info() != Eigen::Success) throw NumericalError("MinNormProblem: singular Gram");
    gram_max_eig_ = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    gram_inverse_factor_ = gram_.matrixL().solve(Matrix::Identity(2 * n_, 2 * n_));
}

Vector MinNormProblem::scaled_residual(double t, const Vector& g) const {
    if (g.size() != n_) throw std::invalid_argument("MinNormProblem: gamma must have n entries");
    Vector w(2 * n_);
    w.head(n_).setConstant((t - 1.0) / sigma_);
    w.tail(n_) = (Vector::Ones(n_) - g) / sigma_;
    return w - noise_e1_ / mu_norm_;
}

double MinNormProblem::inverse_square_F(double t, const Vector& g) const {
    return (gram_inverse_factor_ * scaled_residual(t, g)).squaredNorm() + 1.0 / (mu_norm_ * mu_norm_);
}

Vector MinNormProblem::inverse_square_F_gradient(double t, const Vector& g) const {
    const Vector Aw = gram_.solve(scaled_residual(t, g));
    Vector grad(n_ + 1);
    grad(0) = 2.0 * Aw.head(n_).sum() / sigma_;
    grad.tail(n_) = -2.0 * Aw.tail(n_) / sigma_;
    return grad;
}

double MinNormProblem::F(double c, const Vector& gamma) const {
    if (!(c > 0.0)) throw std::invalid_argument("MinNormProblem: needs c > 0");
    return 1.0 / std::sqrt(inverse_square_F(1.0 / c, gamma / c));
}

double MinNormProblem::G(double c, const Vector& gamma) const {
    if (!(c > 0.0)) throw std::invalid_argument("MinNormProblem: needs c > 0");
    return scaled_residual(1.0 / c, gamma / c).squaredNorm();
}

Vector MinNormProblem::beta(double c, const Vector& gamma) const {
    if (!(c > 0.0)) throw std::invalid_argument("MinNormProblem: needs c > 0");
    const Vector r = c * scaled_residual(1.0 / c, gamma / c);
    Vector rotated(d_);
    rotated(0) = c / mu_norm_;
    rotated.tail(d_ - 1) = Z_rest_.transpose() * gram_.solve(r);
    return householder_ * rotated;
}

double margin_min_norm(const GmmSample& sample, double c, const Vector& gamma, int k) {
    return MinNormProblem(sample, k).F(c, gamma);
}

// Reads the factored pieces of a problem; declared a friend in the header.
struct MinNormAccess {
    static const Vector& noise_e1(const MinNormProblem& p) { return p.noise_e1_; }
    static const Matrix& whitening(const MinNormProblem& p) { return p.gram_inverse_factor_; }
    static Vector residual(const MinNormProblem& p, double t, const Vector& g) { return p.scaled_residual(t, g); }
};

MaximizeFResult maximize_F(const GmmSample& sample, int k) {
    const MinNormProblem problem(sample, k);
    const int n = problem.n();
    const double sigma = problem.sigma(), mu_norm = problem.mu_norm(), s = sigma / mu_norm;
    const double d = static_cast<double>(problem.d());
    const Matrix& Linv = MinNormAccess::whitening(problem);

    // r/c = w0 + D y is affine in y = (1/c, gamma/c) >= 0, and 1/F^2 = |L^-1 (w0 + D y)|^2 + 1/|mu|^2.
    const Vector w0 = MinNormAccess::residual(problem, 0.0, Vector::Zero(n));
    Matrix D = Matrix::Zero(2 * n, n + 1);
    D.col(0).head(n).setConstant(1.0 / sigma);
    D.block(n, 1, n, n) = -Matrix::Identity(n, n) / sigma;
    const Vector y = nnls(Linv * D, -(Linv * w0));

    MaximizeFResult out;
    const Vector g = y.tail(n);
    out.f_star = 1.0 / std::sqrt(problem.inverse_square_F(y(0), g));
    out.attained = y(0) > 0.0;
    const double t = out.attained ? y(0) : kEscapeT;
    out.c = 1.0 / t;
    out.gamma = out.c * g;
    out.beta = problem.beta(out.c, out.gamma);

    // Closed-form choice from minimizing G instead: 1/c is the mean of 1 + s Z1 e1 and gamma/c = [1 - s Z2 e1]_+.
    const Vector& ze1 = MinNormAccess::noise_e1(problem);
    const Vector own = ze1.head(n), other = ze1.tail(n);
    const double t_cf = 1.0 + s * own.mean();
    const Vector g_cf = (Vector::Ones(n) - s * other).cwiseMax(0.0);
    out.closed_form_finite = t_cf > 0.0;
    const double t_used = out.closed_form_finite ? t_cf : 0.0;
    out.f_closed_form = 1.0 / std::sqrt(problem.inverse_square_F(t_used, g_cf));
    out.c_closed_form = out.closed_form_finite ? 1.0 / t_cf : std::numeric_limits<double>::infinity();
    out.gamma_closed_form = out.closed_form_finite ? Vector(out.c_closed_form * g_cf) : Vector(g_cf);

    const double tail_term = (s * other - Vector::Ones(n)).cwiseMax(0.0).squaredNorm() / (sigma * sigma);
    const double own_term = out.closed_form_finite
                                ? (own.array() - own.mean()).matrix().squaredNorm() / (mu_norm * mu_norm)
                                : (Vector::Ones(n) + s * own).squaredNorm() / (sigma * sigma);
    out.min_G = tail_term + own_term;
    out.f_upper_bound = 1.0 / std::sqrt(out.min_G / (2.0 * d) + 1.0 / (mu_norm * mu_norm));
    out.gram_condition = problem.gram_max_eigenvalue() <= 2.0 * d;
    out.lower_error = out.gram_condition ? normal_sf(out.f_upper_bound / sigma) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form lower bound
// ---------------------------------------------------------------------------

ErrorLowerFormula error_lower_formula(double s, int n, double d, double c1, double c2) {
    if (!(s > 0.0)) throw std::invalid_argument("error_lower_formula: needs s > 0");
    if (n < 2 || !(d > 0.0)) throw std::invalid_argument("error_lower_formula: needs n >= 2 and d > 0");
    const double nn = static_cast<double>(n);
    const double tail = s * s * s * std::exp(-1.0 / (2.0 * s * s)) / std::sqrt(2.0 * std::numbers::pi);
    const double bracket = tail + s * s + 1.0 - (c1 * s * s + c2 * s) * std::sqrt(std::log(nn) / nn);
    const double inner = nn / (2.0 * d) * bracket + s * s;
    if (!(inner > 0.0)) return {0.5, true};
    return {normal_sf(1.0 / std::sqrt(inner)), false};
}

}  // namespace nclab::gen
