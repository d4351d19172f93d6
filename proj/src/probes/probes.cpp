#include "nclab/probes.hpp"
#include "nclab/linalg.hpp"
#include "nclab/parallel.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace nclab::probes {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Phi^T V for Phi an orthonormal basis of a uniformly random m-dimensional subspace of R^d. Applying the
// Householder reflectors directly avoids forming the d x m basis.
Matrix project_onto_random_frame(RngStream& rng, Index m, const Matrix& V) {
    Eigen::HouseholderQR<Matrix> qr(rng.gaussian(V.rows(), m));
    return (qr.householderQ().transpose() * V).topRows(m);
}

void finish(ProbeReport& r) {
    r.empirical_rate = static_cast<double>(r.violations) / static_cast<double>(r.trials);
    r.ci = std::sqrt(r.empirical_rate * (1.0 - r.empirical_rate) / static_cast<double>(r.trials));
}

// Constant-free bounds are only falsified when violations are common.
void judge_constant_free(ProbeReport& r) { r.passed = r.empirical_rate <= std::max(0.05, 3.0 * r.ci); }

void check_trials(long trials) {
    if (trials < 1) throw std::invalid_argument("probe: needs at least one trial");
}

ProbeReport angle_probe(const std::function<std::pair<Vector, Vector>(RngStream&)>& pair, Index d, Index m,
                        double epsilon, long trials, const RngStream& rng, int threads) {
    check_trials(trials);
    if (m < 1 || m > d) throw std::invalid_argument("jl_angle_probe: needs 1 <= m <= d");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("jl_angle_probe: needs 0 < epsilon < 1");
    const double bound = 4.0 * epsilon / ((1.0 - epsilon) * (1.0 - epsilon));

    std::vector<double> deviation(static_cast<std::size_t>(trials));
    parallel_for(deviation.size(), [&](std::size_t t) {
        RngStream stream = rng.substream(t);
        const auto [v1, v2] = pair(stream);
        Matrix V(d, 2);
        V << v1, v2;
        const Matrix P = project_onto_random_frame(stream, m, V);
        const Vector a = P.col(0), b = P.col(1);
        const double before = v1.dot(v2) / (v1.norm() * v2.norm());
        const double after = a.dot(b) / (a.norm() * b.norm());
        deviation[t] = std::abs(after - before);
    }, threads);

    ProbeReport r;
    r.probe_name = "jl_angle";
    r.trials = trials;
    r.bound_params = {{"d", static_cast<double>(d)}, {"m", static_cast<double>(m)}, {"epsilon", epsilon}, {"bound", bound}};
    r.theoretical_rate_bound = kNaN;
    double worst = 0.0;
    for (double dev : deviation) {
        r.violations += dev > bound;
        worst = std::max(worst, dev);
    }
    r.statistics["max_deviation"] = worst;
    finish(r);
    judge_constant_free(r);
    return r;
}

}  // namespace

ProbeReport jl_angle_probe(Index d, Index m, double epsilon, long trials, const RngStream& rng, int threads) {
    if (d < 2) throw std::invalid_argument("jl_angle_probe: needs d >= 2");
    auto pair = [d](RngStream& s) { return std::pair<Vector, Vector>(s.gaussian(d).normalized(), s.gaussian(d).normalized()); };
    return angle_probe(pair, d, m, epsilon, trials, rng, threads);
}

ProbeReport jl_angle_probe(const Vector& v1, const Vector& v2, Index m, double epsilon, long trials,
                           const RngStream& rng, int threads) {
    if (v1.size() != v2.size() || v1.size() < 1) throw std::invalid_argument("jl_angle_probe: size mismatch");
    if (!(v1.norm() > 0.0 && v2.norm() > 0.0)) throw std::invalid_argument("jl_angle_probe: vectors must be nonzero");
    auto pair = [&](RngStream&) { return std::pair<Vector, Vector>(v1, v2); };
    return angle_probe(pair, v1.size(), m, epsilon, trials, rng, threads);
}

ProbeReport jl_singular_probe(const Matrix& Pi, Index m, double epsilon, long trials, const RngStream& rng, int threads) {
    check_trials(trials);
    const Index K = Pi.rows(), d = Pi.cols();
    if (K < 1 || m < K || m > d) throw std::invalid_argument("jl_singular_probe: needs K <= m <= d");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("jl_singular_probe: needs 0 < epsilon < 1");
    if (numerical_rank(Pi) < K) throw std::invalid_argument("jl_singular_probe: Pi must have full row rank");

    const Vector sv = Eigen::JacobiSVD<Matrix>(Pi).singularValues();
    const double ratio = static_cast<double>(m) / static_cast<double>(d), k = static_cast<double>(K);
    const double upper = std::sqrt(ratio * (1.0 + epsilon * epsilon + 2.0 * k * epsilon)) * sv(0);
    const double lower = std::sqrt(std::max(0.0, ratio * (1.0 - epsilon * epsilon - 2.0 * k * epsilon))) * sv(K - 1);

    std::vector<std::pair<double, double>> extremes(static_cast<std::size_t>(trials));
    parallel_for(extremes.size(), [&](std::size_t t) {
        RngStream stream = rng.substream(t);
        const Vector s = Eigen::JacobiSVD<Matrix>(project_onto_random_frame(stream, m, Pi.transpose())).singularValues();
        extremes[t] = {s(0), s(K - 1)};
    }, threads);

    ProbeReport r;
    r.probe_name = "jl_singular";
    r.trials = trials;
    r.bound_params = {{"K", k}, {"d", static_cast<double>(d)}, {"m", static_cast<double>(m)}, {"epsilon", epsilon},
                      {"upper", upper}, {"lower", lower}};
    r.theoretical_rate_bound = kNaN;
    double max_top = 0.0, min_bottom = std::numeric_limits<double>::infinity();
    for (const auto& [top, bottom] : extremes) {
        r.violations += top > upper * (1.0 + 1e-12) || bottom < lower * (1.0 - 1e-12);
        max_top = std::max(max_top, top);
        min_bottom = std::min(min_bottom, bottom);
    }
    r.statistics["max_sigma_max"] = max_top;
    r.statistics["min_sigma_min"] = min_bottom;
    finish(r);
    judge_constant_free(r);
    return r;
}

ProbeReport gordon_probe(int n, Index d, long trials, const RngStream& rng, int threads) {
    check_trials(trials);
    if (n < 1 || d <= n) throw std::invalid_argument("gordon_probe: needs d > n >= 1");
    const double nn = static_cast<double>(n), dd = static_cast<double>(d);
    const double bound = (std::sqrt(dd) - std::sqrt(nn / 2.0) - std::sqrt(2.0 * std::log(nn))) / std::sqrt(nn);

    std::vector<SimplexQpResult> results(static_cast<std::size_t>(trials));
    parallel_for(results.size(), [&](std::size_t t) {
        RngStream stream = rng.substream(t);
        results[t] = simplex_min_norm(stream.gaussian(n, d));
    }, threads);

    ProbeReport r;
    r.probe_name = "gordon";
    r.trials = trials;
    r.bound_params = {{"n", nn}, {"d", dd}, {"chain_bound", bound}, {"gordon_mean_bound", std::sqrt(dd) - std::sqrt(nn / 2.0)}};
    r.theoretical_rate_bound = 1.0 / nn;
    double mean_value = 0.0, mean_certified = 0.0;
    for (const SimplexQpResult& q : results) {
        r.violations += q.lower_bound < bound;
        r.solver_failures += !q.converged;
        mean_value += q.value / static_cast<double>(trials);
        mean_certified += q.lower_bound / static_cast<double>(trials);
    }
    r.statistics["mean_simplex_min"] = mean_value;
    r.statistics["mean_certified_min"] = mean_certified;
    finish(r);
    r.passed = r.empirical_rate <= 0.01;
    return r;
}

double positive_part_norm_mean(int n, long draws, const RngStream& rng) {
    if (n < 1 || draws < 1) throw std::invalid_argument("positive_part_norm_mean: needs n, draws >= 1");
    RngStream stream = rng.substream(0);
    double total = 0.0;
    for (long i = 0; i < draws; ++i) total += stream.gaussian(n).cwiseMax(0.0).norm();
    return total / static_cast<double>(draws);
}

std::vector<ProbeReport> lipschitz_concentration_probe(int n, Index d, long trials, const RngStream& rng,
                                                       const std::vector<double>& ts, int threads) {
    check_trials(trials);
    if (trials < 2) throw std::invalid_argument("lipschitz_concentration_probe: needs at least two trials");
    if (n < 1 || d <= n) throw std::invalid_argument("lipschitz_concentration_probe: needs d > n >= 1");

    std::vector<double> value(static_cast<std::size_t>(trials)), renormalized(value.size());
    std::vector<char> converged(value.size());
    parallel_for(value.size(), [&](std::size_t t) {
        RngStream stream = rng.substream(t);
        const SimplexQpResult q = simplex_min_norm(stream.gaussian(n, d));
        value[t] = q.value;
        renormalized[t] = q.value / q.s.norm();
        converged[t] = q.converged;
    }, threads);

    auto moments = [&](const std::vector<double>& x) {
        double mean = 0.0, var = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        for (double v : x) var += (v - mean) * (v - mean);
        return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(x.size() - 1)));
    };
    const auto [mean, sd] = moments(value);
    const auto [mean_l2, sd_l2] = moments(renormalized);
    const long failures = static_cast<long>(std::count(converged.begin(), converged.end(), 0));

    std::vector<ProbeReport> out;
    for (double t : ts) {
        if (!(t >= 0.0)) throw std::invalid_argument("lipschitz_concentration_probe: needs t >= 0");
        ProbeReport r;
        r.probe_name = "lipschitz";
        r.trials = trials;
        r.bound_params = {{"n", static_cast<double>(n)}, {"d", static_cast<double>(d)}, {"t", t}};
        r.theoretical_rate_bound = 2.0 * std::exp(-t * t / 2.0);
        long l2_tail = 0;
        for (std::size_t i = 0; i < value.size(); ++i) {
            r.violations += std::abs(value[i] - mean) >= t;
            l2_tail += std::abs(renormalized[i] - mean_l2) >= t;
        }
        r.solver_failures = failures;
        r.statistics = {{"mean", mean}, {"sd", sd}, {"mean_l2_renormalized", mean_l2}, {"sd_l2_renormalized", sd_l2},
                        {"tail_rate_l2_renormalized", static_cast<double>(l2_tail) / static_cast<double>(trials)}};
        finish(r);
        r.passed = r.empirical_rate <= r.theoretical_rate_bound + 3.0 * r.ci;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace nclab::probes
