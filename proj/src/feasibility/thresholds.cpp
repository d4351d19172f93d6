#include "nclab/feasibility.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace nclab::feasibility {

double default_epsilon(int K) { return std::min(0.1, 1.0 / (10.0 * K)); }

double union_bound_threshold(const GmmSpec& spec, double epsilon, double constant_c) {
    spec.validate();
    const double d = static_cast<double>(spec.d()), n = spec.n;
    if (d <= n) throw std::invalid_argument("union_bound_threshold: needs d > n");
    if (spec.n < 2) throw std::invalid_argument("union_bound_threshold: needs n >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("union_bound_threshold: epsilon must lie in (0, 1)");
    const int K = spec.K();

    if (K == 2) {
        const Vector mu1 = spec.Pi.row(0).transpose(), mu2 = spec.Pi.row(1).transpose();
        const double norm_min = std::min(mu1.norm(), mu2.norm());
        if (!(norm_min > 0.0)) throw std::invalid_argument("union_bound_threshold: means must be nonzero");
        const double cos_theta = mu1.dot(mu2) / (mu1.norm() * mu2.norm());
        const double jl = 4.0 * epsilon / ((1.0 - epsilon) * (1.0 - epsilon));
        double ratio = (d - n) / (d * std::log(n));
        if (cos_theta >= -jl) ratio *= std::max(0.0, 1.0 - std::pow(std::abs(cos_theta) + jl, 2));
        return constant_c * (1.0 - epsilon) * std::sqrt(ratio) * norm_min;
    }

    Eigen::JacobiSVD<Matrix> svd(spec.Pi);
    const Vector& s = svd.singularValues();
    const double s_min = s(s.size() - 1);
    if (!(s_min > static_cast<double>(std::max(spec.Pi.rows(), spec.Pi.cols())) * 1e-15 * s(0)))
        throw std::invalid_argument("union_bound_threshold: mean matrix must have full row rank");
    return constant_c * std::sqrt((d - n) / (d * std::log(K * n))) * s_min / std::sqrt(K - 1.0);
}

double gordon_threshold(int n, int K) {
    if (n < 2) throw std::invalid_argument("gordon_threshold: needs n >= 2");
    const double ln = std::log(static_cast<double>(n));
    return (K + 1.0) / 2.0 + 2.0 * std::sqrt((K - 1.0) * ln / n) + (K + 2.0 * ln) / n;
}

ThresholdReport threshold_report(const GmmSpec& spec, double epsilon, double constant_c) {
    ThresholdReport r;
    r.union_bound_sigma = union_bound_threshold(spec, epsilon, constant_c);
    r.gordon_min_d_over_n = gordon_threshold(spec.n, spec.K());
    r.rank_sufficient = spec.d() >= static_cast<Index>(spec.K()) * spec.n;
    return r;
}

}  // namespace nclab::feasibility
