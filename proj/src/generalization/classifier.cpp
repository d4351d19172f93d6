#include "nclab/generalization.hpp"
#include "nclab/linalg.hpp"
#include "nclab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace nclab::gen {

namespace {

constexpr long kChunk = 1L << 16;

struct ChunkCounts {
    long errors[2] = {0, 0};
    long ties[2] = {0, 0};
};

void check_classifier(const TwoNeuronClassifier& clf, const Vector& mu, double sigma) {
    if (clf.beta1.size() != mu.size() || clf.beta2.size() != mu.size())
        throw std::invalid_argument("two-neuron classifier: dimension mismatch");
    if (!(clf.beta1.norm() > 0.0) || !(clf.beta2.norm() > 0.0))
        throw std::invalid_argument("two-neuron classifier: neurons must be nonzero");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("two-neuron classifier: needs finite sigma >= 0");
}

// Class 0 sits at +mu and must produce f > 0; class 1 sits at -mu and must produce f < 0.
void tally(ChunkCounts& c, int cls, double u1, double u2) {
    const double f = std::max(0.0, u1) - std::max(0.0, u2);
    if (f == 0.0) ++c.ties[cls];
    if (cls == 0 ? f <= 0.0 : f >= 0.0) ++c.errors[cls];
}

}  // namespace

double TwoNeuronClassifier::operator()(const Vector& x) const {
    return std::max(0.0, beta1.dot(x)) - std::max(0.0, beta2.dot(x));
}

double TwoNeuronClassifier::membership_residual(const LabeledDataset& data) const {
    if (data.K != 2) throw std::invalid_argument("membership_residual: needs two classes");
    const Vector a1 = data.block(0).transpose() * beta1, b1 = data.block(1).transpose() * beta1;
    const Vector a2 = data.block(1).transpose() * beta2, b2 = data.block(0).transpose() * beta2;
    const double eq = std::max((a1.array() - 1.0).abs().maxCoeff(), (a2.array() - 1.0).abs().maxCoeff());
    const double ineq = std::max({0.0, b1.maxCoeff(), b2.maxCoeff()});
    return std::max(eq, ineq);
}

McError monte_carlo_error(const TwoNeuronClassifier& clf, const Vector& mu, double sigma, long samples,
                          const RngStream& rng, McMethod method, int threads) {
    check_classifier(clf, mu, sigma);
    if (samples < 2) throw std::invalid_argument("monte_carlo_error: needs at least two samples");

    const long per_class[2] = {samples / 2, samples - samples / 2};
    const double m1 = mu.dot(clf.beta1), m2 = mu.dot(clf.beta2);
    // (<z,beta1>, <z,beta2>) ~ N(0, G) with G the Gram of the neurons; L is its lower Cholesky factor.
    const double g11 = clf.beta1.squaredNorm(), g12 = clf.beta1.dot(clf.beta2), g22 = clf.beta2.squaredNorm();
    const double l11 = std::sqrt(g11), l21 = g12 / l11, l22 = std::sqrt(std::max(0.0, g22 - l21 * l21));

    const long chunks_per_class[2] = {(per_class[0] + kChunk - 1) / kChunk, (per_class[1] + kChunk - 1) / kChunk};
    const std::size_t total_chunks = static_cast<std::size_t>(chunks_per_class[0] + chunks_per_class[1]);
    std::vector<ChunkCounts> counts(total_chunks);

    parallel_for(total_chunks, [&](std::size_t idx) {
        const int cls = static_cast<long>(idx) < chunks_per_class[0] ? 0 : 1;
        const long local = static_cast<long>(idx) - (cls == 0 ? 0 : chunks_per_class[0]);
        const long count = std::min(kChunk, per_class[cls] - local * kChunk);
        const double sign = cls == 0 ? 1.0 : -1.0;
        RngStream stream = rng.substream(idx);
        ChunkCounts& c = counts[idx];
        if (method == McMethod::Projected) {
            for (long i = 0; i < count; ++i) {
                const double a = stream.normal(), b = stream.normal();
                tally(c, cls, sign * m1 + sigma * l11 * a, sign * m2 + sigma * (l21 * a + l22 * b));
            }
        } else {
            for (long i = 0; i < count; ++i) {
                const Vector x = sign * mu + sigma * stream.gaussian(mu.size());
                tally(c, cls, clf.beta1.dot(x), clf.beta2.dot(x));
            }
        }
    }, threads);

    long errors[2] = {0, 0}, ties = 0;
    for (const ChunkCounts& c : counts) {
        errors[0] += c.errors[0];
        errors[1] += c.errors[1];
        ties += c.ties[0] + c.ties[1];
    }
    McError out;
    out.samples = samples;
    out.class1_error = static_cast<double>(errors[0]) / static_cast<double>(per_class[0]);
    out.class2_error = static_cast<double>(errors[1]) / static_cast<double>(per_class[1]);
    out.error = 0.5 * (out.class1_error + out.class2_error);
    out.tie_rate = static_cast<double>(ties) / static_cast<double>(samples);
    const double v1 = out.class1_error * (1.0 - out.class1_error) / static_cast<double>(per_class[0]);
    const double v2 = out.class2_error * (1.0 - out.class2_error) / static_cast<double>(per_class[1]);
    out.ci = 0.5 * std::sqrt(v1 + v2);
    return out;
}

double error_sandwich_center(const TwoNeuronClassifier& clf, const Vector& mu, double sigma) {
    check_classifier(clf, mu, sigma);
    if (!(sigma > 0.0)) throw std::invalid_argument("error_sandwich_center: needs sigma > 0");
    const double a1 = mu.dot(clf.beta1) / (sigma * clf.beta1.norm());
    const double a2 = mu.dot(clf.beta2) / (sigma * clf.beta2.norm());
    return 0.5 * (normal_sf(a1) + normal_cdf(a2));
}

}  // namespace nclab::gen
