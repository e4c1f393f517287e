#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "adjopinf/error.hpp"
#include "adjopinf/integrator.hpp"

using namespace adjopinf;

namespace {

VectorField linear(double a) {
    return [a](double, const Eigen::VectorXd& y) -> Eigen::VectorXd { return a * y; };
}

}  // namespace

TEST(Integrator, ScalarDecayMatchesClosedForm) {
    IntegratorOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-13;
    const Trajectory tr = integrate(linear(-1.3), 0.0, 2.0, Eigen::VectorXd::Constant(1, 0.7), opts);
    const double exact = 0.7 * std::exp(-1.3 * 2.0);
    EXPECT_NEAR(tr.states()(0, tr.size() - 1), exact, 10 * opts.rtol * exact);
    EXPECT_DOUBLE_EQ(tr.t_end(), 2.0);
}

TEST(Integrator, BackwardIntegrationStoresIncreasingTimes) {
    IntegratorOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-13;
    const Trajectory tr = integrate(linear(0.5), 1.0, 0.0, Eigen::VectorXd::Ones(1), opts);
    for (Eigen::Index i = 1; i < tr.size(); ++i) EXPECT_GT(tr.times()[i], tr.times()[i - 1]);
    EXPECT_DOUBLE_EQ(tr.t_start(), 0.0);
    EXPECT_DOUBLE_EQ(tr.t_end(), 1.0);
    EXPECT_NEAR(tr(0.0)[0], std::exp(-0.5), 1e-9);
    EXPECT_DOUBLE_EQ(tr(1.0)[0], 1.0);
}

TEST(Integrator, StopsAreHitExactly) {
    const std::vector<double> stops{0.1, 0.25, 0.7, 5.0};  // 5.0 lies outside and is ignored
    const Trajectory tr = integrate(linear(-1.0), 0.0, 1.0, Eigen::VectorXd::Ones(2), {}, stops);
    for (double s : {0.1, 0.25, 0.7}) {
        bool found = false;
        for (Eigen::Index i = 0; i < tr.size(); ++i) found = found || tr.times()[i] == s;
        EXPECT_TRUE(found) << s;
    }
}

TEST(Integrator, EvaluationIsExactAtNodes) {
    const Trajectory tr = integrate(linear(-2.0), 0.0, 1.0, Eigen::VectorXd::Ones(1));
    for (Eigen::Index i = 0; i < tr.size(); ++i) {
        EXPECT_EQ(tr(tr.times()[i])[0], tr.states()(0, i));
    }
}

TEST(Integrator, OutOfRangeEvaluationThrows) {
    const Trajectory tr = integrate(linear(-2.0), 0.0, 1.0, Eigen::VectorXd::Ones(1));
    EXPECT_THROW(tr(1.5), ConfigError);
    EXPECT_THROW(tr(-0.1), ConfigError);
}

TEST(Integrator, HermiteInterpolationIsFourthOrder) {
    // Nodes every h on [0, 1]; error at midpoints should fall by ~16 per halving.
    const auto max_mid_error = [](int n) {
        const double h = 1.0 / n;
        Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n + 1, 0.0, 1.0);
        Eigen::MatrixXd y(1, n + 1), f(1, n + 1);
        for (int i = 0; i <= n; ++i) {
            y(0, i) = std::exp(-t[i]);
            f(0, i) = -std::exp(-t[i]);
        }
        const Trajectory tr(t, y, f);
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double tm = (i + 0.5) * h;
            worst = std::max(worst, std::abs(tr(tm)[0] - std::exp(-tm)));
        }
        return worst;
    };
    const double ratio = max_mid_error(20) / max_mid_error(40);
    EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(Integrator, ConstantTrajectoryIsConstantEverywhere) {
    const VectorField zero = [](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(y.size());
    };
    const Eigen::VectorXd y0 = Eigen::Vector3d(1.0, -2.0, 0.5);
    const Trajectory tr = integrate(zero, 0.0, 3.0, y0);
    for (double t : {0.0, 0.3, 1.7, 3.0}) EXPECT_EQ(tr(t), y0);
}

TEST(Integrator, BlowUpRaisesDivergenceWithTime) {
    // y' = y^2 from y(0) = 1 explodes at t = 1.
    const VectorField f = [](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return y.array().square().matrix();
    };
    try {
        integrate(f, 0.0, 2.0, Eigen::VectorXd::Ones(1));
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.time(), 0.9);
        EXPECT_LE(e.time(), 1.0 + 1e-6);
    }
}

TEST(Integrator, StepBudgetExhaustionIsDivergence) {
    IntegratorOptions opts;
    opts.max_steps = 3;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    EXPECT_THROW(integrate(linear(-50.0), 0.0, 10.0, Eigen::VectorXd::Ones(1), opts),
                 DivergenceError);
}

TEST(Integrator, Deterministic) {
    const Trajectory a = integrate(linear(-0.3), 0.0, 4.0, Eigen::VectorXd::Ones(3));
    const Trajectory b = integrate(linear(-0.3), 0.0, 4.0, Eigen::VectorXd::Ones(3));
    EXPECT_EQ(a.times(), b.times());
    EXPECT_EQ(a.states(), b.states());
}
