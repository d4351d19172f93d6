#pragma once

#include "nclab/core.hpp"
#include "nclab/upfm.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nclab::networks {

using upfm::LossKind;

/// Bias-free ReLU network. Depth 2: H = relu(W1^T X) with W1 d x D and W2 empty.
/// Depth 3: H = relu(W2^T relu(W1^T X)) with W1 d x d1 and W2 d1 x D. Logits are W^T H with W D x K.
struct ShallowNet {
    int depth = 2;
    Matrix W1;
    Matrix W2;
    Matrix W;

    Index input_dim() const { return W1.rows(); }
    Index feature_dim() const { return W.rows(); }
    int classes() const { return static_cast<int>(W.cols()); }
    void validate() const;
};

/// He initialization N(0, 2/fan_in) for trained hidden layers and N(0, 1/D) for the classifier.
/// With frozen_first_layer the first layer is drawn N(0, 1/d1) instead. d1 is ignored at depth 2.
ShallowNet init_network(int depth, Index d, Index d1, Index D, int K, RngStream& rng, bool frozen_first_layer = false);

Matrix forward_features(const ShallowNet& net, const Matrix& X);
Matrix logits(const ShallowNet& net, const Matrix& X);

struct TrainConfig {
    LossKind loss = LossKind::CrossEntropy;
    double lambda_W = 1e-3;
    double lambda_H = 1e-6;
    double lr0 = 0.1;
    // The learning rate is divided by decay_factor each time training passes one of these fractions of all steps.
    std::array<double, 2> decay_fractions{1.0 / 3.0, 2.0 / 3.0};
    double decay_factor = 10.0;
    int epochs = 1;
    int batch = 0;  // 0 selects full batch for N <= 512 and 128 otherwise.
    bool freeze_first_layer = false;
    std::uint64_t seed = 0;
    std::vector<int> extra_checkpoints;

    void validate() const;
    int batch_size(Index N) const;
};

struct NetGradient {
    double objective = 0.0;
    double mean_loss = 0.0;
    Matrix dW1;
    Matrix dW2;
    Matrix dW;
};

/// Objective mean_loss + lambda_W/2 |W|^2 + activation_weight * lambda_H/2 |H|^2 on the columns of X.
/// A minibatch of B out of N columns passes activation_weight = N/B so the estimate is unbiased.
/// Throws NumericalError on a non-finite objective or gradient.
NetGradient loss_and_grad(const ShallowNet& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg,
                          double activation_weight = 1.0);

struct NcMetrics {
    double nc1 = 0.0;
    double nc2_h = 0.0;
    double nc2_w = 0.0;
    double nc3 = 0.0;
    bool between_class_degenerate = false;  // rank(Sigma_B) < K - 1; nc1 is NaN
    bool mean_features_zero = false;        // Hbar^T Hbar = 0; nc2_h and nc3 are NaN
};

/// Columns of H are ordered class by class, n per class.
NcMetrics nc_metrics(const Matrix& H, const Matrix& W, int K, int n);

struct TrajectoryPoint {
    int epoch = 0;
    double objective = 0.0;
    NcMetrics metrics;
    bool features_nonnegative = true;
};

struct TrainResult {
    ShallowNet net;
    std::vector<TrajectoryPoint> trajectory;
    std::vector<double> epoch_objective;  // average minibatch objective within each epoch
    bool aborted = false;                 // a non-finite value appeared; net is the last finite snapshot
    std::string diagnostic;
};

/// Plain SGD without momentum, reshuffling every epoch. Checkpoints are taken at epoch 0, powers of two,
/// the final epoch and cfg.extra_checkpoints. Deterministic for a fixed cfg.seed.
TrainResult sgd_train(ShallowNet net, const LabeledDataset& data, const TrainConfig& cfg);

/// Little-endian container: "NCLW", u32 version, u32 depth, u64 d, d1 (0 at depth 2), D, K,
/// then W1, W2 (depth 3 only), W as row-major float64.
void write_weights(const std::filesystem::path& path, const ShallowNet& net);
ShallowNet read_weights(const std::filesystem::path& path);

}  // namespace nclab::networks
