#include "nclab/probes.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>

namespace nclab::probes {

Vector project_to_simplex(const Vector& y) {
    if (y.size() == 0) throw std::invalid_argument("project_to_simplex: empty input");
    std::vector<double> sorted(y.data(), y.data() + y.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        running += sorted[i];
        const double candidate = (running - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - candidate > 0.0) theta = candidate;
    }
    return (y.array() - theta).cwiseMax(0.0).matrix();
}

SimplexQpResult simplex_min_norm(const Matrix& Z, double tol, int max_iterations) {
    const Index n = Z.rows();
    if (n < 1 || Z.cols() < 1) throw std::invalid_argument("simplex_min_norm: empty matrix");
    if (!(tol > 0.0)) throw std::invalid_argument("simplex_min_norm: needs tol > 0");

    const Matrix H = Z * Z.transpose();
    const double L = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();

    SimplexQpResult out;
    Vector s = Vector::Constant(n, 1.0 / static_cast<double>(n));
    if (!(L > 0.0)) {
        // Every row is zero, so every point of the simplex attains 0.
        out.s = s;
        out.converged = true;
        return out;
    }

    // phi(s) = (1/2) s^T H s; the Frank-Wolfe gap <grad, s> - min_i grad_i bounds phi(s) - phi*.
    auto gap_of = [&](const Vector& x, const Vector& grad) { return grad.dot(x) - grad.minCoeff(); };

    Vector y = s, prev = s;
    double momentum = 1.0;
    for (int it = 1; it <= max_iterations; ++it) {
        prev = s;
        s = project_to_simplex(y - (H * y) / L);
        // Restart momentum whenever the step opposes the extrapolation direction.
        if ((y - s).dot(s - prev) > 0.0) momentum = 1.0;
        const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = s + ((momentum - 1.0) / next) * (s - prev);
        momentum = next;
        out.iterations = it;

        if (it % 10 == 0 || it == max_iterations) {
            const Vector grad = H * s;
            const double phi = 0.5 * s.dot(grad);
            out.gap = gap_of(s, grad);
            if (out.gap <= tol * (1.0 + phi)) {
                out.converged = true;
                break;
            }
        }
    }
    const Vector grad = H * s;
    const double phi = 0.5 * s.dot(grad);
    out.gap = gap_of(s, grad);
    out.s = s;
    out.value = std::sqrt(std::max(0.0, 2.0 * phi));
    out.lower_bound = std::sqrt(std::max(0.0, 2.0 * (phi - out.gap)));
    return out;
}

}  // namespace nclab::probes
