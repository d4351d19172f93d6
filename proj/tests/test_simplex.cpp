#include <gtest/gtest.h>

#include "nclab/simplex.hpp"

using namespace nclab;
using namespace nclab::lp;

namespace {

double eq_residual(const LinearSystem& s, const Vector& x) {
    return s.A_eq.rows() ? (s.A_eq * x - s.b_eq).cwiseAbs().maxCoeff() : 0.0;
}

double le_violation(const LinearSystem& s, const Vector& x) {
    return s.A_le.rows() ? std::max(0.0, (s.A_le * x - s.b_le).maxCoeff()) : 0.0;
}

}  // namespace

TEST(Simplex, TinyFeasibleAndInfeasible) {
    LinearSystem s;
    s.A_eq = Matrix::Ones(1, 2);
    s.b_eq = Vector::Ones(1);
    s.A_le = Matrix::Identity(2, 2);
    s.b_le = Vector::Constant(2, 0.25);
    EXPECT_EQ(find_feasible_point(s).status, Status::Infeasible);
    s.b_le.setConstant(0.75);
    Result r = find_feasible_point(s);
    ASSERT_EQ(r.status, Status::Feasible);
    EXPECT_LT(eq_residual(s, r.x), 1e-12);
    EXPECT_LE(le_violation(s, r.x), 1e-12);
}

TEST(Simplex, EmptySystemIsFeasible) {
    LinearSystem s;
    s.A_le.resize(0, 3);
    s.A_eq.resize(0, 3);
    EXPECT_EQ(find_feasible_point(s).status, Status::Feasible);
}

TEST(Simplex, PlantedFeasiblePoints) {
    RngStream rng(21, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = 2 + rng.below(12), m_eq = rng.below(p), m_le = 1 + rng.below(20);
        LinearSystem s;
        const Vector x0 = rng.gaussian(p);
        s.A_eq = rng.gaussian(m_eq, p);
        s.b_eq = s.A_eq * x0;
        s.A_le = rng.gaussian(m_le, p);
        // Mix tight and slack rows, with both signs of right-hand side.
        s.b_le = s.A_le * x0;
        for (Index i = 0; i < m_le; ++i) s.b_le(i) += (i % 3 == 0) ? 0.0 : rng.uniform();
        Result r = find_feasible_point(s);
        ASSERT_EQ(r.status, Status::Feasible) << "trial " << trial;
        EXPECT_LT(eq_residual(s, r.x), 1e-8);
        EXPECT_LT(le_violation(s, r.x), 1e-8);
    }
}

TEST(Simplex, PlantedFarkasCertificates) {
    // y >= 0 with A^T y = 0 and <b, y> < 0 rules out A x <= b.
    RngStream rng(22, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const Index p = 1 + rng.below(10), m = 2 + rng.below(20);
        Vector y = rng.gaussian(m).cwiseAbs();
        Matrix A = rng.gaussian(m, p);
        A -= y * (y.transpose() * A) / y.squaredNorm();
        Vector b = rng.gaussian(m);
        b -= ((b.dot(y) + 1.0) / y.squaredNorm()) * y;
        ASSERT_LT(b.dot(y), -0.5);
        LinearSystem s;
        s.A_le = A;
        s.b_le = b;
        s.A_eq.resize(0, p);
        EXPECT_EQ(find_feasible_point(s).status, Status::Infeasible) << "trial " << trial;
    }
}

TEST(Simplex, InconsistentEqualities) {
    RngStream rng(23, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const Index p = 1 + rng.below(5), m = p + 1 + rng.below(5);
        LinearSystem s;
        s.A_eq = rng.gaussian(m, p);
        s.b_eq = rng.gaussian(m);
        s.A_le.resize(0, p);
        EXPECT_EQ(find_feasible_point(s).status, Status::Infeasible);
    }
}

TEST(Simplex, IterationCapReportedDistinctly) {
    RngStream rng(24, 0);
    LinearSystem s;
    s.A_eq = rng.gaussian(10, 30);
    s.b_eq = Vector::Ones(10);
    s.A_le = rng.gaussian(10, 30);
    s.b_le = Vector::Zero(10);
    SimplexOptions opt;
    opt.iteration_factor = 0;
    EXPECT_EQ(find_feasible_point(s, opt).status, Status::IterationLimit);
}
