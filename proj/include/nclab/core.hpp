#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace nclab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Raised when an iterative routine cannot deliver a trustworthy answer.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reproducible random stream keyed by (seed, stream_id).
///
/// Child streams derived with substream() are independent of the parent and of
/// each other, so parallel trials can each own one without coordination.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    RngStream substream(std::uint64_t index) const;

    double normal();
    double uniform();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    Matrix gaussian(Index rows, Index cols);
    Vector gaussian(Index size);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    std::uniform_real_distribution<double> uniform_;
};

/// Balanced labelled data; columns of X are samples, class k owns columns [k n, (k+1) n).
struct LabeledDataset {
    Matrix X;
    int K = 0;
    int n = 0;

    LabeledDataset() = default;
    LabeledDataset(Matrix X, int K, int n);

    Index d() const { return X.rows(); }
    Index N() const { return X.cols(); }
    auto block(int k) const { return X.middleCols(static_cast<Index>(k) * n, n); }
};

struct GmmSpec {
    Matrix Pi;  ///< K x d, row k is the mean of class k
    double sigma = 0.0;
    int n = 0;

    int K() const { return static_cast<int>(Pi.rows()); }
    Index d() const { return Pi.cols(); }
    void validate() const;
};

/// A sampled mixture keeps its noise so constructions can use the per-class blocks.
struct GmmSample {
    LabeledDataset data;
    GmmSpec spec;
    Matrix Z;  ///< d x N standard normal noise, X = means + sigma Z

    auto noise_block(int k) const { return Z.middleCols(static_cast<Index>(k) * spec.n, spec.n); }
};

GmmSample sample_gmm(const GmmSpec& spec, RngStream& rng);

/// Y = I_K kron 1_n^T.
Matrix label_matrix(int K, int n);

/// Column k is the average of block k of H.
Matrix class_means(const Matrix& H, int K, int n);

struct CenteringMatrix {
    int K;
    Matrix materialize() const;
};

inline Matrix centering_matrix(int K) { return CenteringMatrix{K}.materialize(); }

}  // namespace nclab
