#include "nclab/networks.hpp"

#include <cmath>

namespace nclab::networks {

namespace {

Matrix relu(const Matrix& A) { return A.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& A) { return (A.array() > 0.0).cast<double>().matrix(); }

void check_input(const ShallowNet& net, const Matrix& X) {
    net.validate();
    if (X.rows() != net.input_dim()) throw std::invalid_argument("network: input dimension mismatch");
}

}  // namespace

void ShallowNet::validate() const {
    if (depth != 2 && depth != 3) throw std::invalid_argument("ShallowNet: depth must be 2 or 3");
    const Index features = depth == 2 ? W1.cols() : W2.cols();
    if (depth == 3 && W2.rows() != W1.cols()) throw std::invalid_argument("ShallowNet: W1 and W2 do not chain");
    if (depth == 2 && W2.size() != 0) throw std::invalid_argument("ShallowNet: depth-2 net has a second layer");
    if (W.rows() != features || W.cols() < 1 || W1.rows() < 1) throw std::invalid_argument("ShallowNet: classifier does not chain");
    if (!W1.allFinite() || !W2.allFinite() || !W.allFinite()) throw std::invalid_argument("ShallowNet: non-finite weights");
}

ShallowNet init_network(int depth, Index d, Index d1, Index D, int K, RngStream& rng, bool frozen_first_layer) {
    if (d < 1 || D < 1 || K < 2 || (depth == 3 && d1 < 1)) throw std::invalid_argument("init_network: bad dimensions");
    ShallowNet net;
    net.depth = depth;
    const Index first_out = depth == 2 ? D : d1;
    const double first_scale = frozen_first_layer ? 1.0 / std::sqrt(static_cast<double>(first_out))
                                                   : std::sqrt(2.0 / static_cast<double>(d));
    net.W1 = first_scale * rng.gaussian(d, first_out);
    if (depth == 3) net.W2 = std::sqrt(2.0 / static_cast<double>(d1)) * rng.gaussian(d1, D);
    net.W = (1.0 / std::sqrt(static_cast<double>(D))) * rng.gaussian(D, K);
    net.validate();
    return net;
}

Matrix forward_features(const ShallowNet& net, const Matrix& X) {
    check_input(net, X);
    Matrix H = relu(net.W1.transpose() * X);
    if (net.depth == 3) H = relu(net.W2.transpose() * H);
    return H;
}

Matrix logits(const ShallowNet& net, const Matrix& X) { return net.W.transpose() * forward_features(net, X); }

NetGradient loss_and_grad(const ShallowNet& net, const Matrix& X, const Matrix& Y, const TrainConfig& cfg,
                          double activation_weight) {
    check_input(net, X);
    if (Y.rows() != net.classes() || Y.cols() != X.cols() || X.cols() < 1)
        throw std::invalid_argument("loss_and_grad: labels do not match the batch");
    const double B = static_cast<double>(X.cols());

    const Matrix A1 = net.W1.transpose() * X;
    const Matrix H1 = relu(A1);
    Matrix A2, H;
    if (net.depth == 3) {
        A2 = net.W2.transpose() * H1;
        H = relu(A2);
    } else {
        H = H1;
    }
    const Matrix Z = net.W.transpose() * H;

    NetGradient g;
    Matrix dZ;
    if (cfg.loss == LossKind::CrossEntropy) {
        const Eigen::RowVectorXd shift = Z.colwise().maxCoeff();
        const Matrix E = (Z.rowwise() - shift).array().exp().matrix();
        const Eigen::RowVectorXd total = E.colwise().sum();
        const Eigen::RowVectorXd lse = shift.array() + total.array().log();
        g.mean_loss = (lse.sum() - Z.cwiseProduct(Y).sum()) / B;
        dZ = (E.array().rowwise() / total.array()).matrix();
        dZ = (dZ - Y) / B;
    } else {
        g.mean_loss = 0.5 * (Z - Y).squaredNorm() / B;
        dZ = (Z - Y) / B;
    }
    g.objective = g.mean_loss + 0.5 * cfg.lambda_W * net.W.squaredNorm() +
                  0.5 * activation_weight * cfg.lambda_H * H.squaredNorm();

    g.dW = H * dZ.transpose() + cfg.lambda_W * net.W;
    const Matrix dH = net.W * dZ + activation_weight * cfg.lambda_H * H;
    if (net.depth == 3) {
        const Matrix dA2 = dH.cwiseProduct(relu_mask(A2));
        g.dW2 = H1 * dA2.transpose();
        const Matrix dA1 = (net.W2 * dA2).cwiseProduct(relu_mask(A1));
        g.dW1 = X * dA1.transpose();
    } else {
        g.dW1 = X * dH.cwiseProduct(relu_mask(A1)).transpose();
        g.dW2.resize(0, 0);
    }
    if (!std::isfinite(g.objective) || !g.dW.allFinite() || !g.dW1.allFinite() || !g.dW2.allFinite())
        throw NumericalError("loss_and_grad: non-finite objective or gradient (objective " + std::to_string(g.objective) + ")");
    return g;
}

}  // namespace nclab::networks
