#include <gtest/gtest.h>

#include "nclab/feasibility.hpp"
#include "nclab/networks.hpp"

#include <Eigen/QR>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace nclab;
using namespace nclab::networks;

namespace {

// Per-sample evaluation with explicit loops, written independently of the library's matrix path.
double reference_objective(const ShallowNet& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg) {
    double loss = 0.0, act = 0.0;
    for (Index i = 0; i < X.cols(); ++i) {
        Vector h(net.W1.cols());
        for (Index j = 0; j < net.W1.cols(); ++j) {
            double s = 0.0;
            for (Index r = 0; r < X.rows(); ++r) s += net.W1(r, j) * X(r, i);
            h(j) = s > 0.0 ? s : 0.0;
        }
        if (net.depth == 3) {
            Vector h2(net.W2.cols());
            for (Index j = 0; j < net.W2.cols(); ++j) {
                double s = 0.0;
                for (Index r = 0; r < h.size(); ++r) s += net.W2(r, j) * h(r);
                h2(j) = s > 0.0 ? s : 0.0;
            }
            h = h2;
        }
        act += h.squaredNorm();
        Vector z(net.W.cols());
        for (Index k = 0; k < z.size(); ++k) z(k) = net.W.col(k).dot(h);
        if (cfg.loss == LossKind::CrossEntropy) {
            double sum = 0.0;
            for (Index k = 0; k < z.size(); ++k) sum += std::exp(z(k));
            for (Index k = 0; k < z.size(); ++k) loss -= Y(k, i) * (z(k) - std::log(sum));
        } else {
            loss += 0.5 * (z - Y.col(i)).squaredNorm();
        }
    }
    return loss / X.cols() + 0.5 * cfg.lambda_W * net.W.squaredNorm() + 0.5 * cfg.lambda_H * act;
}

Matrix reference_features(const ShallowNet& net, const Matrix& X) {
    Matrix H(net.feature_dim(), X.cols());
    for (Index i = 0; i < X.cols(); ++i) {
        Vector h = (net.W1.transpose() * X.col(i)).cwiseMax(0.0);
        if (net.depth == 3) h = (net.W2.transpose() * h).cwiseMax(0.0);
        H.col(i) = h;
    }
    return H;
}

double min_abs_preactivation(const ShallowNet& net, const Matrix& X) {
    const Matrix A1 = net.W1.transpose() * X;
    double m = A1.cwiseAbs().minCoeff();
    if (net.depth == 3) m = std::min(m, (net.W2.transpose() * A1.cwiseMax(0.0)).cwiseAbs().minCoeff());
    return m;
}

double fd_error(ShallowNet net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg) {
    const NetGradient g = loss_and_grad(net, X, Y, cfg);
    const double h = 1e-6;
    double worst = 0.0;
    auto check = [&](Matrix& M, const Matrix& grad) {
        for (Index i = 0; i < M.size(); ++i) {
            const double keep = M.data()[i];
            M.data()[i] = keep + h;
            const double up = loss_and_grad(net, X, Y, cfg).objective;
            M.data()[i] = keep - h;
            const double down = loss_and_grad(net, X, Y, cfg).objective;
            M.data()[i] = keep;
            const double fd = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(fd - grad.data()[i]) / std::max(1e-3, std::abs(fd) + std::abs(grad.data()[i])));
        }
    };
    check(net.W, g.dW);
    check(net.W1, g.dW1);
    if (net.depth == 3) check(net.W2, g.dW2);
    return worst;
}

// Direct transcription of the metric definitions with a dense pseudo-inverse.
NcMetrics reference_metrics(const Matrix& H, const Matrix& W, int K, int n) {
    const Index D = H.rows();
    const double N = static_cast<double>(H.cols());
    Matrix Hbar(D, K);
    for (int k = 0; k < K; ++k) Hbar.col(k) = H.middleCols(k * n, n).rowwise().mean();
    const Vector hG = Hbar.rowwise().mean();
    Matrix SW = Matrix::Zero(D, D), SB = Matrix::Zero(D, D);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n; ++i) SW += (H.col(k * n + i) - Hbar.col(k)) * (H.col(k * n + i) - Hbar.col(k)).transpose() / N;
    for (int k = 0; k < K; ++k) SB += (Hbar.col(k) - hG) * (Hbar.col(k) - hG).transpose() / K;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(SB);
    cod.setThreshold(1e-10);
    const Matrix CK = (Matrix::Identity(K, K) - Matrix::Constant(K, K, 1.0 / K)) / std::sqrt(K - 1.0);
    NcMetrics m;
    m.nc1 = (SW * cod.pseudoInverse()).trace() / K;
    const Matrix G = Hbar.transpose() * Hbar, U = W.transpose() * W, C = W.transpose() * Hbar;
    m.nc2_h = (G / G.norm() - Matrix::Identity(K, K) / std::sqrt(double(K))).norm();
    m.nc2_w = (U / U.norm() - CK).norm();
    m.nc3 = (C / C.norm() - CK).norm();
    return m;
}

LabeledDataset two_points(int n, Index d) {
    Matrix X(d, 2 * n);
    Vector a = Vector::Zero(d), b = Vector::Zero(d);
    a(0) = 1.0;
    a(1) = 0.5;
    b(0) = -1.0;
    b(2) = 0.5;
    for (int i = 0; i < n; ++i) {
        X.col(i) = a;
        X.col(n + i) = b;
    }
    return LabeledDataset(X, 2, n);
}

}  // namespace

TEST(Forward, IdentityLayerOnNonnegativeInput) {
    ShallowNet net;
    net.W1 = Matrix::Identity(4, 4);
    net.W = Matrix::Ones(4, 2);
    RngStream rng(51, 0);
    const Matrix X = rng.gaussian(4, 7).cwiseAbs();
    EXPECT_EQ(forward_features(net, X), X);
    EXPECT_EQ(forward_features(net, Matrix::Zero(4, 3)), Matrix::Zero(4, 3));
    EXPECT_EQ(logits(net, Matrix::Zero(4, 3)), Matrix::Zero(2, 3));
    EXPECT_THROW(forward_features(net, Matrix::Zero(5, 1)), std::invalid_argument);
}

TEST(Forward, MatchesPerSampleEvaluator) {
    RngStream rng(52, 0);
    for (int depth : {2, 3}) {
        for (int trial = 0; trial < 20; ++trial) {
            ShallowNet net = init_network(depth, 6, 9, 5, 3, rng);
            const Matrix X = rng.gaussian(6, 11);
            EXPECT_LT((forward_features(net, X) - reference_features(net, X)).cwiseAbs().maxCoeff(), 1e-12);
            EXPECT_GE(forward_features(net, X).minCoeff(), 0.0);
        }
    }
}

TEST(LossAndGrad, ObjectiveMatchesPerSampleEvaluator) {
    RngStream rng(53, 0);
    for (int depth : {2, 3})
        for (LossKind loss : {LossKind::CrossEntropy, LossKind::SquaredError}) {
            TrainConfig cfg;
            cfg.loss = loss;
            cfg.lambda_W = 0.03;
            cfg.lambda_H = 0.02;
            ShallowNet net = init_network(depth, 5, 7, 4, 3, rng);
            const Matrix X = rng.gaussian(5, 9);
            const Matrix Y = label_matrix(3, 3);
            EXPECT_NEAR(loss_and_grad(net, X, Y, cfg).objective, reference_objective(net, X, Y, cfg), 1e-12);
        }
}

TEST(LossAndGrad, FiniteDifferences) {
    RngStream rng(54, 0);
    int points = 0;
    while (points < 30) {
        const int depth = 2 + points % 2;
        TrainConfig cfg;
        cfg.loss = points % 4 < 2 ? LossKind::CrossEntropy : LossKind::SquaredError;
        cfg.lambda_W = 0.05;
        cfg.lambda_H = 0.01;
        ShallowNet net = init_network(depth, 4, 5, 3, 3, rng);
        const Matrix X = rng.gaussian(4, 6);
        if (min_abs_preactivation(net, X) < 1e-3) continue;
        EXPECT_LE(fd_error(net, X, label_matrix(3, 2), cfg), 1e-4) << "point " << points;
        ++points;
    }
}

TEST(LossAndGrad, UniformSoftmaxAtZeroWeights) {
    ShallowNet net;
    net.W1 = Matrix::Zero(3, 4);
    net.W = Matrix::Zero(4, 5);
    TrainConfig cfg;
    RngStream rng(55, 0);
    EXPECT_NEAR(loss_and_grad(net, rng.gaussian(3, 10), label_matrix(5, 2), cfg).objective, std::log(5.0), 1e-15);
}

TEST(LossAndGrad, InterpolatingNetHasZeroSquaredLoss) {
    ShallowNet net;
    net.W1 = Matrix::Identity(6, 6);
    net.W = label_matrix(3, 2).transpose();
    TrainConfig cfg;
    cfg.loss = LossKind::SquaredError;
    cfg.lambda_W = cfg.lambda_H = 0.0;
    EXPECT_EQ(loss_and_grad(net, Matrix::Identity(6, 6), label_matrix(3, 2), cfg).objective, 0.0);
}

TEST(LossAndGrad, NonFiniteAborts) {
    ShallowNet net;
    net.W1 = Matrix::Identity(2, 2);
    net.W = Matrix::Constant(2, 2, 1e300);
    Matrix X = Matrix::Constant(2, 2, 1e300);
    TrainConfig cfg;
    cfg.loss = LossKind::SquaredError;
    EXPECT_THROW(loss_and_grad(net, X, label_matrix(2, 1), cfg), NumericalError);
}

TEST(NcMetricsTest, ExactCollapseIsZero) {
    const int K = 3, n = 4;
    Matrix Hbar0 = Matrix::Zero(5, K);
    for (int k = 0; k < K; ++k) Hbar0(k + 1, k) = 2.5;
    const Matrix H = Hbar0 * label_matrix(K, n);
    const Matrix W = 0.7 * Hbar0 * centering_matrix(K);
    NcMetrics m = nc_metrics(H, W, K, n);
    EXPECT_NEAR(m.nc1, 0.0, 1e-14);
    EXPECT_NEAR(m.nc2_h, 0.0, 1e-14);
    EXPECT_NEAR(m.nc2_w, 0.0, 1e-14);
    EXPECT_NEAR(m.nc3, 0.0, 1e-14);
    EXPECT_FALSE(m.between_class_degenerate);
}

TEST(NcMetricsTest, CenteredGramGivesZeroClassifierMetric) {
    RngStream rng(56, 0);
    for (double c : {1e-3, 1.0, 40.0}) {
        const int K = 4;
        // W = sqrt(c) Q C_K with Q having orthonormal columns gives W^T W = c C_K.
        Eigen::HouseholderQR<Matrix> qr(rng.gaussian(7, K));
        const Matrix Q = Matrix(qr.householderQ()).leftCols(K);
        const Matrix W = std::sqrt(c) * Q * centering_matrix(K);
        const Matrix H = rng.gaussian(7, K * 3).cwiseAbs();
        EXPECT_NEAR(nc_metrics(H, W, K, 3).nc2_w, 0.0, 1e-12);
    }
}

TEST(NcMetricsTest, MatchesTranscription) {
    RngStream rng(57, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const int K = trial == 0 ? 2 : 2 + static_cast<int>(rng.below(3));
        const int n = trial == 0 ? 2 : 2 + static_cast<int>(rng.below(4));
        const Index D = trial == 0 ? 3 : K + rng.below(4);
        const Matrix H = rng.gaussian(D, K * n).cwiseAbs(), W = rng.gaussian(D, K);
        NcMetrics got = nc_metrics(H, W, K, n), want = reference_metrics(H, W, K, n);
        EXPECT_NEAR(got.nc1, want.nc1, 1e-12 * std::max(1.0, want.nc1));
        EXPECT_NEAR(got.nc2_h, want.nc2_h, 1e-12);
        EXPECT_NEAR(got.nc2_w, want.nc2_w, 1e-12);
        EXPECT_NEAR(got.nc3, want.nc3, 1e-12);
    }
}

TEST(NcMetricsTest, Invariances) {
    RngStream rng(58, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const int K = 3, n = 4;
        const Matrix H = rng.gaussian(6, K * n).cwiseAbs(), W = rng.gaussian(6, K);
        const NcMetrics base = nc_metrics(H, W, K, n);
        const double s = 0.01 + 10 * rng.uniform();
        const NcMetrics scaled = nc_metrics(s * H, s * W, K, n);
        EXPECT_NEAR(scaled.nc2_w, base.nc2_w, 1e-12);
        EXPECT_NEAR(scaled.nc3, base.nc3, 1e-12);
        EXPECT_NEAR(scaled.nc2_h, base.nc2_h, 1e-12);
        Eigen::HouseholderQR<Matrix> qr(rng.gaussian(6, 6));
        const Matrix Q = qr.householderQ();
        EXPECT_NEAR(nc_metrics(Q * H, Q * W, K, n).nc1, base.nc1, 1e-10 * std::max(1.0, base.nc1));
    }
}

TEST(NcMetricsTest, FlagsDegenerateInputs) {
    const Matrix H = Matrix::Zero(3, 4);
    NcMetrics m = nc_metrics(H, Matrix::Identity(3, 2), 2, 2);
    EXPECT_TRUE(m.between_class_degenerate);
    EXPECT_TRUE(std::isnan(m.nc1));
    EXPECT_TRUE(m.mean_features_zero);
    EXPECT_TRUE(std::isnan(m.nc2_h));
    EXPECT_THROW(nc_metrics(H, Matrix::Identity(3, 2), 2, 3), std::invalid_argument);
}

TEST(Training, NoiseFreeClustersCollapse) {
    const LabeledDataset data = two_points(10, 4);
    ASSERT_TRUE(feasibility::nc_feasible_all(data).overall);
    RngStream rng(59, 0);
    ShallowNet net = init_network(2, 4, 0, 6, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.lambda_W = 1e-4;
    cfg.lambda_H = 1e-6;
    TrainResult r = sgd_train(net, data, cfg);
    ASSERT_FALSE(r.aborted);
    EXPECT_LT(r.trajectory.back().metrics.nc1, 1e-3);
    for (const auto& p : r.trajectory) EXPECT_TRUE(p.features_nonnegative);
}

TEST(Training, ZeroLearningRateLeavesWeights) {
    RngStream rng(60, 0);
    GmmSample s = sample_gmm(GmmSpec{Matrix::Identity(2, 5), 0.3, 6}, rng);
    ShallowNet net = init_network(3, 5, 8, 4, 2, rng);
    TrainConfig cfg;
    cfg.lr0 = 0.0;
    cfg.epochs = 8;
    TrainResult r = sgd_train(net, s.data, cfg);
    EXPECT_EQ(r.net.W1, net.W1);
    EXPECT_EQ(r.net.W2, net.W2);
    EXPECT_EQ(r.net.W, net.W);
    for (const auto& p : r.trajectory) EXPECT_EQ(p.objective, r.trajectory.front().objective);
}

TEST(Training, ZeroEpochsRecordsOnlyTheInitialPoint) {
    RngStream rng(61, 0);
    GmmSample s = sample_gmm(GmmSpec{Matrix::Identity(2, 5), 0.3, 6}, rng);
    ShallowNet net = init_network(2, 5, 0, 4, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 0;
    TrainResult r = sgd_train(net, s.data, cfg);
    ASSERT_EQ(r.trajectory.size(), 1u);
    EXPECT_EQ(r.trajectory[0].epoch, 0);
    EXPECT_TRUE(r.epoch_objective.empty());
    EXPECT_EQ(r.net.W, net.W);
    cfg.epochs = -1;
    EXPECT_THROW(sgd_train(net, s.data, cfg), std::invalid_argument);
}

TEST(Training, DeterministicForFixedSeed) {
    RngStream rng(61, 0);
    GmmSample s = sample_gmm(GmmSpec{Matrix::Identity(2, 6), 0.5, 300}, rng);
    ShallowNet net = init_network(2, 6, 0, 8, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 9;
    TrainResult a = sgd_train(net, s.data, cfg), b = sgd_train(net, s.data, cfg);
    ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
    EXPECT_EQ(a.net.W1, b.net.W1);
    EXPECT_EQ(a.epoch_objective, b.epoch_objective);
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) EXPECT_EQ(a.trajectory[i].metrics.nc1, b.trajectory[i].metrics.nc1);
}

TEST(Training, CheckpointScheduleAndLossDecrease) {
    RngStream rng(62, 0);
    GmmSample s = sample_gmm(GmmSpec{Matrix::Identity(2, 10), 0.2, 10}, rng);
    ShallowNet net = init_network(2, 10, 0, 12, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.extra_checkpoints = {50, 1000};
    TrainResult r = sgd_train(net, s.data, cfg);
    std::vector<int> epochs;
    for (const auto& p : r.trajectory) epochs.push_back(p.epoch);
    EXPECT_EQ(epochs, (std::vector<int>{0, 1, 2, 4, 8, 16, 32, 50, 64, 100}));
    ASSERT_EQ(r.epoch_objective.size(), 100u);
    double first = 0, last = 0;
    for (int i = 0; i < 10; ++i) first += r.epoch_objective[i], last += r.epoch_objective[90 + i];
    EXPECT_LE(last, first);
    for (double o : r.epoch_objective) EXPECT_GE(o, 0.0);
}

TEST(Training, MinibatchesAndFrozenFirstLayer) {
    RngStream rng(63, 0);
    GmmSample s = sample_gmm(GmmSpec{Matrix::Identity(2, 8), 0.2, 300}, rng);
    ShallowNet net = init_network(3, 8, 20, 6, 2, rng, true);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.freeze_first_layer = true;
    EXPECT_EQ(cfg.batch_size(600), 128);
    EXPECT_EQ(cfg.batch_size(512), 512);
    TrainResult r = sgd_train(net, s.data, cfg);
    EXPECT_EQ(r.net.W1, net.W1);
    EXPECT_NE(r.net.W2, net.W2);
}

TEST(Training, DivergenceKeepsLastFiniteSnapshot) {
    RngStream rng(64, 0);
    GmmSample s = sample_gmm(GmmSpec{100.0 * Matrix::Identity(2, 4), 1.0, 5}, rng);
    ShallowNet net = init_network(2, 4, 0, 4, 2, rng);
    TrainConfig cfg;
    cfg.loss = LossKind::SquaredError;
    cfg.lr0 = 50.0;
    cfg.epochs = 200;
    TrainResult r = sgd_train(net, s.data, cfg);
    EXPECT_TRUE(r.aborted);
    EXPECT_FALSE(r.diagnostic.empty());
    EXPECT_TRUE(r.net.W.allFinite() && r.net.W1.allFinite());
}

TEST(WeightsIo, RoundTrip) {
    RngStream rng(65, 0);
    const auto dir = std::filesystem::temp_directory_path();
    for (int depth : {2, 3}) {
        ShallowNet net = init_network(depth, 5, 7, 3, 4, rng);
        const auto path = dir / ("nclab_weights_" + std::to_string(depth) + ".bin");
        write_weights(path, net);
        ShallowNet back = read_weights(path);
        EXPECT_EQ(back.depth, depth);
        EXPECT_EQ(back.W1, net.W1);
        EXPECT_EQ(back.W2, net.W2);
        EXPECT_EQ(back.W, net.W);
        const auto expected = 4 + 4 + 4 + 32 + 8 * (net.W1.size() + net.W2.size() + net.W.size());
        EXPECT_EQ(std::filesystem::file_size(path), static_cast<std::uintmax_t>(expected));
        std::filesystem::remove(path);
    }
    const auto bad = dir / "nclab_weights_bad.bin";
    std::ofstream(bad) << "XXXX";
    EXPECT_THROW(read_weights(bad), std::runtime_error);
    std::filesystem::remove(bad);
}
