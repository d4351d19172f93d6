#include "nclab/feasibility.hpp"
#include "nclab/linalg.hpp"

#include <cmath>

namespace nclab::feasibility {

namespace {

// Acceptable relative shortfall of F(gamma) from its supremum when the supremum is not attained.
constexpr double kSupremumGap = 1e-4;

Vector two_class_beta(const Matrix& Phi, const Vector& mu_k, const Vector& mu_other) {
    const Vector proj_k = Phi.transpose() * mu_k;
    if (!(proj_k.squaredNorm() > 0.0)) throw NumericalError("constructive_beta: mean vanishes on the null space");
    const Vector v1 = proj_k / proj_k.squaredNorm();
    const Vector v2 = Phi.transpose() * mu_other;
    const LemmaMinResult best = lemma_min(v1, v2);
    return Phi * (v1 + best.argmin_v);
}

// Empty when the projected means are linearly dependent, as when d - n < K.
std::optional<Vector> multi_class_beta(const Matrix& Phi, const Matrix& Pi, int k) {
    const int K = static_cast<int>(Pi.rows());
    const Matrix PiPhi = Pi * Phi;
    Eigen::LLT<Matrix> gram(PiPhi * PiPhi.transpose());
    if (gram.info() != Eigen::Success) return std::nullopt;

    const Vector e = Vector::Unit(K, k);
    const Vector u = Vector::Ones(K) - e;
    const Vector Ae = gram.solve(e), Au = gram.solve(u);
    const double a = e.dot(Ae), b = e.dot(Au), c = u.dot(Au);

    // F(gamma) = gamma^2 / (a - 2 b gamma + c gamma^2); in t = 1/gamma we minimize a t^2 - 2 b t + c.
    double t;
    if (b > 0.0) {
        t = b / a;
    } else {
        const double slack = c * kSupremumGap / (1.0 - kSupremumGap);
        t = (-2.0 * std::abs(b) + std::sqrt(4.0 * b * b + 4.0 * a * slack)) / (2.0 * a);
    }
    const double gamma = 1.0 / t;
    return Phi * (PiPhi.transpose() * gram.solve(e - gamma * u));
}

}  // namespace

std::optional<Vector> constructive_beta(const GmmSample& sample, int k, double tol) {
    const LabeledDataset& data = sample.data;
    if (k < 0 || k >= data.K) throw std::invalid_argument("constructive_beta: class index out of range");
    if (data.d() - data.n < 1) throw std::invalid_argument("constructive_beta: needs d - n >= 1");

    const Matrix Phi = null_space_basis(sample.noise_block(k).transpose());
    if (Phi.cols() == 0) return std::nullopt;

    Vector beta;
    if (data.K == 2) {
        beta = two_class_beta(Phi, sample.spec.Pi.row(k).transpose(), sample.spec.Pi.row(1 - k).transpose());
    } else {
        auto built = multi_class_beta(Phi, sample.spec.Pi, k);
        if (!built) return std::nullopt;
        beta = std::move(*built);
    }
    const Residuals r = certificate_residuals(data, k, beta);
    if (r.eq_residual > tol || r.max_ineq_violation > tol) return std::nullopt;
    return beta;
}

}  // namespace nclab::feasibility
