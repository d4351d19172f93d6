#include "nclab/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace nclab::networks {

void TrainConfig::validate() const {
    if (!(lr0 >= 0.0) || !std::isfinite(lr0)) throw std::invalid_argument("TrainConfig: lr0 must be finite and nonnegative");
    if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be nonnegative");
    if (batch < 0) throw std::invalid_argument("TrainConfig: batch must be nonnegative");
    if (!(lambda_W >= 0.0) || !(lambda_H >= 0.0)) throw std::invalid_argument("TrainConfig: regularization must be nonnegative");
    if (!(decay_factor > 0.0)) throw std::invalid_argument("TrainConfig: decay factor must be positive");
    for (double f : decay_fractions)
        if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("TrainConfig: decay fractions must lie in (0, 1)");
}

int TrainConfig::batch_size(Index N) const {
    if (batch > 0) return static_cast<int>(std::min<Index>(batch, N));
    return N <= 512 ? static_cast<int>(N) : 128;
}

namespace {

std::set<int> checkpoint_epochs(const TrainConfig& cfg) {
    std::set<int> epochs{0, cfg.epochs};
    for (long e = 1; e < cfg.epochs; e *= 2) epochs.insert(static_cast<int>(e));
    for (int e : cfg.extra_checkpoints)
        if (e >= 0 && e <= cfg.epochs) epochs.insert(e);
    return epochs;
}

TrajectoryPoint snapshot(const ShallowNet& net, const LabeledDataset& data, const Matrix& Y, const TrainConfig& cfg, int epoch) {
    TrajectoryPoint p;
    p.epoch = epoch;
    p.objective = loss_and_grad(net, data.X, Y, cfg).objective;
    const Matrix H = forward_features(net, data.X);
    p.features_nonnegative = H.minCoeff() >= 0.0;
    p.metrics = nc_metrics(H, net.W, data.K, data.n);
    return p;
}

}  // namespace

TrainResult sgd_train(ShallowNet net, const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    net.validate();
    if (net.input_dim() != data.d() || net.classes() != data.K)
        throw std::invalid_argument("sgd_train: network does not match the data");

    const Index N = data.N();
    const Matrix Y = label_matrix(data.K, data.n);
    const int B = cfg.batch_size(N);
    const long steps_per_epoch = (N + B - 1) / B;
    const double total_steps = static_cast<double>(steps_per_epoch) * cfg.epochs;
    const std::set<int> checkpoints = checkpoint_epochs(cfg);

    RngStream rng(cfg.seed, 0);
    std::vector<Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Index{0});

    TrainResult result;
    result.trajectory.push_back(snapshot(net, data, Y, cfg, 0));
    ShallowNet last_good = net;
    long step = 0;
    Matrix Xb, Yb;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        double objective_sum = 0.0;
        try {
            for (long b = 0; b < steps_per_epoch; ++b, ++step) {
                const Index begin = b * B, count = std::min<Index>(B, N - begin);
                Xb.resize(data.d(), count);
                Yb.resize(data.K, count);
                for (Index i = 0; i < count; ++i) {
                    const Index col = order[static_cast<std::size_t>(begin + i)];
                    Xb.col(i) = data.X.col(col);
                    Yb.col(i) = Y.col(col);
                }
                double lr = cfg.lr0;
                for (double f : cfg.decay_fractions)
                    if (static_cast<double>(step) >= f * total_steps) lr /= cfg.decay_factor;

                const NetGradient g = loss_and_grad(net, Xb, Yb, cfg, static_cast<double>(N) / static_cast<double>(count));
                objective_sum += g.objective * static_cast<double>(count);
                net.W -= lr * g.dW;
                if (!cfg.freeze_first_layer) net.W1 -= lr * g.dW1;
                if (net.depth == 3) net.W2 -= lr * g.dW2;
            }
            result.epoch_objective.push_back(objective_sum / static_cast<double>(N));
            if (checkpoints.contains(epoch)) result.trajectory.push_back(snapshot(net, data, Y, cfg, epoch));
        } catch (const NumericalError& e) {
            result.aborted = true;
            result.diagnostic = "epoch " + std::to_string(epoch) + ": " + e.what();
            result.net = std::move(last_good);
            return result;
        }
        last_good = net;
    }
    result.net = std::move(net);
    return result;
}

}  // namespace nclab::networks
