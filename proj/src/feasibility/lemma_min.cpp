#include "nclab/feasibility.hpp"

#include <cmath>

namespace nclab::feasibility {

double lemma_objective(const Vector& v1, const Vector& v2, const Vector& v) {
    return (v1 + v).dot(v2) / std::sqrt(v1.squaredNorm() + v.squaredNorm());
}

namespace {

// Relative gap to the infimum accepted when the minimizer escapes to infinity.
constexpr double kInfimumGap = 1e-6;

// Unit vector orthogonal to v1 (v1 nonzero, dimension at least 2).
Vector orthogonal_unit(const Vector& v1) {
    Index pivot;
    v1.cwiseAbs().minCoeff(&pivot);
    Vector w = Vector::Unit(v1.size(), pivot);
    w -= (w.dot(v1) / v1.squaredNorm()) * v1;
    return w.normalized();
}

}  // namespace

LemmaMinResult lemma_min(const Vector& v1, const Vector& v2) {
    if (v1.size() != v2.size()) throw std::invalid_argument("lemma_min: size mismatch");
    const double n1sq = v1.squaredNorm();
    if (!(n1sq > 0.0)) throw std::invalid_argument("lemma_min: v1 must be nonzero");

    const double g = v1.dot(v2);
    const Vector Pv2 = v2 - (g / n1sq) * v1;
    const double p = Pv2.norm();
    LemmaMinResult out;

    // In one dimension the constraint leaves only v = 0.
    if (v1.size() == 1) {
        out.argmin_v = Vector::Zero(1);
        out.min_value = lemma_objective(v1, v2, out.argmin_v);
        return out;
    }

    if (g < 0.0) {
        out.min_value = -v2.norm();
        // v1 + v is a positive multiple of -v2; written through P v2 this stays stable as p -> 0.
        out.argmin_v = (n1sq / g) * Pv2;
        return out;
    }

    out.min_value = -std::sqrt(std::max(0.0, v2.squaredNorm() - g * g / n1sq));
    out.attained = false;
    if (p > 0.0) {
        // Along v = (c - g) P v2 / ||P v2||^2 the objective tends to -||P v2|| as c -> -inf.
        const double c = -(g + p * std::sqrt(n1sq)) / kInfimumGap;
        out.argmin_v = (c - g) / (p * p) * Pv2;
    } else {
        // v2 parallel to v1: the infimum 0 is approached by any long v orthogonal to v1.
        out.argmin_v = (std::max(g, 1.0) / kInfimumGap) * orthogonal_unit(v1);
    }
    return out;
}

}  // namespace nclab::feasibility
