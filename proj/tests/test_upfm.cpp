#include <gtest/gtest.h>

#include "nclab/upfm.hpp"

#include <cmath>

using namespace nclab;
using namespace nclab::upfm;

namespace {

// Objective at the closed form, evaluated from (a, b) alone.
double ce_objective_from_ab(double a, double b, int n, int K, const RegularizationParams& reg) {
    if (a == 0.0) return std::log(static_cast<double>(K));
    return std::log(1.0 + (K - 1) * std::exp(-a)) + 0.5 * reg.lambda_W * (a * a / b) * (K - 1) +
           0.5 * reg.lambda_H * b * n * K;
}

// Proximal map of the nuclear norm applied to Y: the squared-loss minimizer in logit space.
Matrix nuclear_prox_of_labels(int n, int K, double lambda) {
    const Matrix Y = label_matrix(K, n);
    Eigen::JacobiSVD<Matrix> svd(Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = (svd.singularValues().array() - n * K * lambda).cwiseMax(0.0).matrix();
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double gram_rel_error(const Matrix& got, const Matrix& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace

TEST(CeClosedForm, ReferenceInstance) {
    RegularizationParams reg{1e-3, 1e-3};
    UpfmSolution s = ce_closed_form(100, 2, reg, 4);
    EXPECT_NEAR(s.a, 4.244353507160859, 1e-12);
    EXPECT_NEAR(s.b, 0.30012111466663494, 1e-12);
    const double K = 2, N = 200;
    EXPECT_NEAR(s.b / (K - 1 + std::exp(s.a)), s.a * reg.lambda_W, 1e-12);
    EXPECT_NEAR(s.a / (N * (K - 1 + std::exp(s.a))), s.b * reg.lambda_H / (K - 1), 1e-12);
    EXPECT_NEAR(s.objective, 0.07426731148058624, 1e-12);
}

TEST(CeClosedForm, ZeroSolutionBelowActivation) {
    UpfmSolution s = ce_closed_form(4, 2, {1.0, 1.0}, 3);
    EXPECT_EQ(s.a, 0.0);
    EXPECT_EQ(s.W.norm(), 0.0);
    EXPECT_EQ(s.H.norm(), 0.0);
    EXPECT_NEAR(s.objective, std::log(2.0), 1e-15);
}

TEST(CeClosedForm, RejectsBadArguments) {
    EXPECT_THROW(ce_closed_form(4, 3, {1e-3, 1e-3}, 2), std::invalid_argument);
    EXPECT_THROW(ce_closed_form(4, 3, {0.0, 1e-3}, 3), std::invalid_argument);
    EXPECT_THROW(l2_closed_form(4, 3, {1e-3, -1.0}, 3), std::invalid_argument);
}

TEST(CeClosedForm, GramIdentitiesAndObjective) {
    RngStream rng(11, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(5));
        const int n = 1 + static_cast<int>(rng.below(60));
        const int D = K + static_cast<int>(rng.below(4));
        RegularizationParams reg{std::pow(10.0, -4.0 + 3.0 * rng.uniform()), std::pow(10.0, -4.0 + 3.0 * rng.uniform())};
        UpfmSolution s = ce_closed_form(n, K, reg, D);
        const Matrix C = centering_matrix(K), Y = label_matrix(K, n);
        EXPECT_GE(s.H.minCoeff(), 0.0);
        EXPECT_LE(gram_rel_error(s.W.transpose() * s.W, (s.a == 0 ? 0.0 : s.a * s.a / s.b) * C), 1e-10);
        EXPECT_LE(gram_rel_error(s.H.transpose() * s.H, s.b * Y.transpose() * Y), 1e-10);
        EXPECT_LE(gram_rel_error(s.W.transpose() * s.H, s.a * C * Y), 1e-10);
        EXPECT_NEAR(s.objective, ce_objective_from_ab(s.a, s.b, n, K, reg), 1e-10 * (1 + s.objective));
        const bool active = std::sqrt(n * (K - 1.0) / K) > K * n * reg.lambda();
        EXPECT_EQ(s.a > 0.0, active);
    }
}

TEST(CeClosedForm, ContinuousAtActivationBoundary) {
    const int n = 30, K = 3;
    const double boundary = std::sqrt(n * (K - 1.0) / K) / (K * n);
    const double below = ce_closed_form(n, K, {boundary * (1 - 1e-7), boundary * (1 - 1e-7)}, K).a;
    const double above = ce_closed_form(n, K, {boundary * (1 + 1e-7), boundary * (1 + 1e-7)}, K).a;
    EXPECT_GT(below, 0.0);
    EXPECT_LT(below, 1e-5);
    EXPECT_EQ(above, 0.0);
}

TEST(L2ClosedForm, MatchesNuclearProxOracle) {
    UpfmSolution s = l2_closed_form(4, 2, {1e-2, 1e-2}, 4);
    const Matrix Y = label_matrix(2, 4);
    EXPECT_NEAR(s.a, 0.96, 1e-15);
    EXPECT_LT((s.W.transpose() * s.H - 0.96 * Y).norm(), 1e-12);
    EXPECT_LT((s.W.transpose() * s.H - nuclear_prox_of_labels(4, 2, 1e-2)).norm(), 1e-12);

    RngStream rng(12, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 2 + static_cast<int>(rng.below(4)), n = 1 + static_cast<int>(rng.below(40));
        RegularizationParams reg{std::pow(10.0, -4.0 + 3.0 * rng.uniform()), std::pow(10.0, -4.0 + 3.0 * rng.uniform())};
        UpfmSolution l2 = l2_closed_form(n, K, reg, K + 1);
        EXPECT_LT((l2.W.transpose() * l2.H - nuclear_prox_of_labels(n, K, reg.lambda())).norm(), 1e-10);
        const Matrix Hbar = class_means(l2.H, K, n);
        const Matrix G = Hbar.transpose() * Hbar;
        EXPECT_LT((G - Matrix(G.diagonal().asDiagonal())).norm(), 1e-15);
        EXPECT_GE(l2.H.minCoeff(), 0.0);
        EXPECT_LE(gram_rel_error(l2.H.transpose() * l2.H,
                                 std::sqrt(reg.lambda_W / reg.lambda_H) * l2.a / std::sqrt(n) * label_matrix(K, n).transpose() * label_matrix(K, n)),
                  1e-10);
        EXPECT_LE(gram_rel_error(l2.W.transpose() * l2.W,
                                 std::sqrt(reg.lambda_H / reg.lambda_W) * std::sqrt(n) * l2.a * Matrix::Identity(K, K)),
                  1e-10);
    }
}

TEST(L2ClosedForm, ZeroAtThreshold) {
    const int n = 4, K = 2;
    const double lambda = 1.0 / (std::sqrt(n) * K);
    UpfmSolution s = l2_closed_form(n, K, {lambda, lambda}, 2);
    EXPECT_EQ(s.a, 0.0);
    EXPECT_EQ(s.W.norm(), 0.0);
    EXPECT_EQ(s.H.norm(), 0.0);
}

TEST(Gradient, MatchesCentralDifferences) {
    RngStream rng(13, 0);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        const LossKind loss = trial % 2 ? LossKind::CrossEntropy : LossKind::SquaredError;
        const int K = 2 + static_cast<int>(rng.below(3)), n = 1 + static_cast<int>(rng.below(4)), D = K + 1;
        RegularizationParams reg{0.1 * rng.uniform() + 1e-3, 0.1 * rng.uniform() + 1e-3};
        const Matrix Y = label_matrix(K, n);
        Matrix W = rng.gaussian(D, K), H = rng.gaussian(D, K * n).cwiseAbs();
        Gradient g = objective_gradient(loss, W, H, Y, reg);
        Matrix fdW(D, K), fdH(D, K * n);
        for (Index i = 0; i < W.size(); ++i) {
            Matrix Wp = W, Wm = W;
            Wp(i) += h;
            Wm(i) -= h;
            fdW(i) = (objective(loss, Wp, H, Y, reg) - objective(loss, Wm, H, Y, reg)) / (2 * h);
        }
        for (Index i = 0; i < H.size(); ++i) {
            Matrix Hp = H, Hm = H;
            Hp(i) += h;
            Hm(i) -= h;
            fdH(i) = (objective(loss, W, Hp, Y, reg) - objective(loss, W, Hm, Y, reg)) / (2 * h);
        }
        EXPECT_LE((fdW - g.dW).norm(), 1e-4 * std::max(1.0, g.dW.norm()));
        EXPECT_LE((fdH - g.dH).norm(), 1e-4 * std::max(1.0, g.dH.norm()));
        EXPECT_NEAR(g.value, objective(loss, W, H, Y, reg), 1e-14);
    }
}

TEST(NumericMinimize, SquaredLossReachesClosedForm) {
    RegularizationParams reg{1e-2, 1e-2};
    RngStream rng(14, 0);
    NumericResult r = numeric_minimize(LossKind::SquaredError, 4, 2, 4, reg, rng, 20000);
    const double closed = l2_closed_form(4, 2, reg, 4).objective;
    EXPECT_LE(std::abs(r.objective - closed), 1e-5 * std::abs(closed));
    EXPECT_GE(r.H.minCoeff(), 0.0);
}

TEST(NumericMinimize, CrossEntropyReachesClosedForm) {
    RegularizationParams reg{1e-3, 1e-3};
    RngStream rng(15, 0);
    NumericResult r = numeric_minimize(LossKind::CrossEntropy, 100, 2, 4, reg, rng, 20000);
    const double closed = ce_closed_form(100, 2, reg, 4).objective;
    EXPECT_LE(std::abs(r.objective - closed), 1e-4 * std::abs(closed));
}

TEST(NumericMinimize, CrossEntropyZeroRegimeBeatsOrigin) {
    RngStream rng(16, 0);
    NumericResult r = numeric_minimize(LossKind::CrossEntropy, 4, 3, 3, {1.0, 1.0}, rng, 2000);
    EXPECT_LE(r.objective, std::log(3.0) + 1e-12);
}

TEST(NumericMinimize, ClosedFormDominatesRandomConfigs) {
    RngStream rng(17, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const LossKind loss = trial % 2 ? LossKind::CrossEntropy : LossKind::SquaredError;
        const int K = 2 + static_cast<int>(rng.below(3)), n = 1 + static_cast<int>(rng.below(12));
        const int D = K + static_cast<int>(rng.below(3));
        RegularizationParams reg{std::pow(10.0, -3.0 + 2.5 * rng.uniform()), std::pow(10.0, -3.0 + 2.5 * rng.uniform())};
        RngStream stream = rng.substream(static_cast<std::uint64_t>(trial));
        NumericResult r = numeric_minimize(loss, n, K, D, reg, stream, 400, {2, 1e-2, 1e-8});
        const double closed = loss == LossKind::CrossEntropy ? ce_closed_form(n, K, reg, D).objective
                                                               : l2_closed_form(n, K, reg, D).objective;
        EXPECT_LE(closed, r.objective + 1e-5 * (1 + std::abs(r.objective)))
            << "K=" << K << " n=" << n << " lambdas=" << reg.lambda_W << "," << reg.lambda_H;
    }
}

TEST(Kkt, CertificateHoldsAtClosedForm) {
    RegularizationParams reg{1e-3, 1e-3};
    UpfmSolution s = ce_closed_form(100, 2, reg, 4);
    KktCertificate c = kkt_check_ce(s, reg);
    EXPECT_GE(c.psd_min_eig, -1e-9);
    EXPECT_LE(c.sq_relative, 1e-9);
    EXPECT_LE(c.sq_norm, 1e-9);
    EXPECT_LE(std::abs(c.bv_inner), 1e-9);
    EXPECT_GE(c.B.minCoeff(), 0.0);
    EXPECT_NEAR(c.t, 1e-3 / 100.0, 1e-18);

    // The off-diagonal block agrees with the closed expression in a.
    const double coef = 2.0 / (200.0 * (1.0 + std::exp(s.a)));
    const Matrix expected = -0.5 * coef * centering_matrix(2) * label_matrix(2, 100);
    EXPECT_LT((c.S.topRightCorner(2, 200) - expected).norm(), 1e-15);
    EXPECT_NEAR(coef, std::sqrt(2 * 1e-6 / 100.0), 1e-15);
}

TEST(Kkt, PerturbationBreaksComplementarity) {
    RegularizationParams reg{1e-3, 1e-3};
    UpfmSolution s = ce_closed_form(100, 2, reg, 4);
    s.H(0, 0) += 0.1;
    KktCertificate c = kkt_check_ce(s, reg);
    EXPECT_GT(c.sq_norm, 1e-3);
}

TEST(Kkt, RejectsZeroSolution) {
    UpfmSolution s = ce_closed_form(4, 2, {1.0, 1.0}, 2);
    EXPECT_THROW(kkt_check_ce(s, {1.0, 1.0}), std::invalid_argument);
}

TEST(Kkt, SchurComplementIsPsd) {
    EXPECT_GE(schur_complement_min_eig(100, 2, 1e-3), -1e-12);
    EXPECT_GE(schur_complement_min_eig(7, 5, 0.3), -1e-12);
}
