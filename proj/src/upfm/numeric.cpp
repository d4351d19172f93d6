#include "nclab/upfm.hpp"

#include <cmath>
#include <limits>

namespace nclab::upfm {

namespace {

// Softmax probabilities per column and the mean cross-entropy, with max-subtraction.
double softmax_ce(const Matrix& Z, const Matrix& Y, Matrix* P) {
    double total = 0.0;
    if (P) P->resize(Z.rows(), Z.cols());
    for (Index j = 0; j < Z.cols(); ++j) {
        const double zmax = Z.col(j).maxCoeff();
        const Vector shifted = (Z.col(j).array() - zmax).exp().matrix();
        const double sum = shifted.sum();
        total += std::log(sum) + zmax - Y.col(j).dot(Z.col(j));
        if (P) P->col(j) = shifted / sum;
    }
    return total / static_cast<double>(Z.cols());
}

double data_term(LossKind loss, const Matrix& Z, const Matrix& Y, Matrix* dZ) {
    const double N = static_cast<double>(Z.cols());
    if (loss == LossKind::CrossEntropy) {
        Matrix P;
        const double v = softmax_ce(Z, Y, dZ ? &P : nullptr);
        if (dZ) *dZ = (P - Y) / N;
        return v;
    }
    const Matrix R = Z - Y;
    if (dZ) *dZ = R / N;
    return 0.5 * R.squaredNorm() / N;
}

}  // namespace

double objective(LossKind loss, const Matrix& W, const Matrix& H, const Matrix& Y, const RegularizationParams& reg) {
    const Matrix Z = W.transpose() * H;
    return data_term(loss, Z, Y, nullptr) + 0.5 * reg.lambda_W * W.squaredNorm() + 0.5 * reg.lambda_H * H.squaredNorm();
}

Gradient objective_gradient(LossKind loss, const Matrix& W, const Matrix& H, const Matrix& Y,
                            const RegularizationParams& reg) {
    Matrix dZ;
    const Matrix Z = W.transpose() * H;
    Gradient g;
    g.value = data_term(loss, Z, Y, &dZ) + 0.5 * reg.lambda_W * W.squaredNorm() + 0.5 * reg.lambda_H * H.squaredNorm();
    g.dW = H * dZ.transpose() + reg.lambda_W * W;
    g.dH = W * dZ + reg.lambda_H * H;
    return g;
}

namespace {

struct RestartOutcome {
    Matrix W, H;
    double value = std::numeric_limits<double>::infinity();
    bool converged = false;
    bool diverged = false;
};

RestartOutcome descend(LossKind loss, const Matrix& Y, const RegularizationParams& reg, Matrix W, Matrix H, int iters,
                       const NumericOptions& opt) {
    RestartOutcome out;
    Gradient g = objective_gradient(loss, W, H, Y, reg);
    if (!std::isfinite(g.value)) {
        out.diverged = true;
        return out;
    }
    double step = opt.initial_step;
    for (int it = 0; it < iters; ++it) {
        Matrix Wn, Hn;
        double fn = 0.0, moved = 0.0;
        bool accepted = false;
        while (step > 1e-30) {
            Wn = W - step * g.dW;
            Hn = (H - step * g.dH).cwiseMax(0.0);
            fn = objective(loss, Wn, Hn, Y, reg);
            const double linear = g.dW.cwiseProduct(Wn - W).sum() + g.dH.cwiseProduct(Hn - H).sum();
            moved = (Wn - W).squaredNorm() + (Hn - H).squaredNorm();
            if (std::isfinite(fn) && fn <= g.value + linear + moved / (2.0 * step)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        W = std::move(Wn);
        H = std::move(Hn);
        const double mapping_norm = std::sqrt(moved) / step;
        g = objective_gradient(loss, W, H, Y, reg);
        if (mapping_norm < opt.gradient_tol) {
            out.converged = true;
            break;
        }
        step *= 2.0;
    }
    out.value = g.value;
    out.W = std::move(W);
    out.H = std::move(H);
    return out;
}

}  // namespace

NumericResult numeric_minimize(LossKind loss, int n, int K, int D, const RegularizationParams& reg, RngStream& rng,
                               int iters, const NumericOptions& options) {
    if (D < K) throw std::invalid_argument("numeric_minimize: D must be at least K");
    reg.validate();
    const Matrix Y = label_matrix(K, n);
    const Index N = Y.cols();

    NumericResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < options.restarts; ++r) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(r));
        Matrix W = 0.5 * stream.gaussian(D, K);
        Matrix H = (0.5 * stream.gaussian(D, N)).cwiseAbs();
        RestartOutcome o = descend(loss, Y, reg, std::move(W), std::move(H), iters, options);
        if (o.diverged) {
            ++best.diverged_restarts;
            continue;
        }
        if (o.value < best.objective) {
            best.objective = o.value;
            best.W = std::move(o.W);
            best.H = std::move(o.H);
            best.converged = o.converged;
        }
    }
    if (!std::isfinite(best.objective)) throw NumericalError("numeric_minimize: every restart diverged");
    return best;
}

}  // namespace nclab::upfm
