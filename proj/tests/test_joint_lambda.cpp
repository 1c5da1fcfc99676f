#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "mg1probe/errors.hpp"
#include "mg1probe/joint_lambda.hpp"

using namespace mg1probe;

TEST_SUITE("joint_lambda") {

TEST_CASE("constant integral: one undamped step lands exactly") {
    // with the true (lambda-free) G the update is constant and omega = 1
    // reaches the fixed point in a single iteration
    auto I_const = [](double) { return 2.0; };
    FixedPointResult r = solve_lambda_fixed_point(1.0, I_const, 5.0, 1.0, 1e-6, 100, true);
    CHECK(r.converged);
    REQUIRE(r.trace.size() >= 2);
    CHECK(r.trace[1] == 0.5);  // rho / I exactly
    CHECK(r.lambda == 0.5);
    CHECK(r.iterations == 2);  // second application certifies the fixed point
}

TEST_CASE("starting at the solution is stationary") {
    auto I_fn = [](double lambda) { return 0.3 + 1.7 / lambda; };
    const double lambda0 = 0.8;
    const double rho = lambda0 * I_fn(lambda0);
    FixedPointResult r = solve_lambda_fixed_point(rho, I_fn, lambda0, 0.5, 1e-6, 100, true);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.residual <= 1e-6);
    CHECK(r.lambda == doctest::Approx(lambda0).epsilon(1e-12));
}

TEST_CASE("single-step update target is affine in rho") {
    auto I_const = [](double) { return 1.3; };
    FixedPointResult once = solve_lambda_fixed_point(0.4, I_const, 1.0, 1.0, 1e-12, 1, false);
    FixedPointResult twice = solve_lambda_fixed_point(0.8, I_const, 1.0, 1.0, 1e-12, 1, false);
    CHECK_FALSE(once.converged);
    CHECK(twice.lambda == doctest::Approx(2.0 * once.lambda).epsilon(1e-12));
}

TEST_CASE("nonpositive integral raises numeric error with a trace") {
    auto I_bad = [](double lambda) { return lambda < 0.7 ? 1.0 : -0.2; };
    try {
        solve_lambda_fixed_point(0.5, I_bad, 1.0, 0.5, 1e-6, 100, false);
        FAIL("expected numeric_error");
    } catch (const numeric_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("trace") != std::string::npos);
    }
}

TEST_CASE("divergent map exhausts max_iter without converging") {
    // U(lambda) = 2 lambda repels from the (rejected) fixed point at 0
    auto I_fn = [](double lambda) { return 0.5 / (2.0 * lambda); };
    FixedPointResult r = solve_lambda_fixed_point(0.5, I_fn, 1.0, 0.5, 1e-9, 40, false);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 40);
}

TEST_CASE("acceleration solves a slowly contracting affine map") {
    // I = a + b/lambda with a small: the plain damped iteration contracts at
    // rate 1 - omega a lambda* / rho and cannot finish in 100 steps
    const double a = 0.03, b = 0.47, rho = 0.5;  // fixed point at 1.0
    auto I_fn = [&](double lambda) { return a + b / lambda; };
    FixedPointResult plain = solve_lambda_fixed_point(rho, I_fn, 2.0, 0.5, 1e-8, 100, false);
    CHECK_FALSE(plain.converged);
    FixedPointResult fast = solve_lambda_fixed_point(rho, I_fn, 2.0, 0.5, 1e-8, 100, true);
    CHECK(fast.converged);
    CHECK(fast.lambda == doctest::Approx((rho - b) / a).epsilon(1e-4));
    CHECK(fast.iterations < 40);
}

TEST_CASE("outer truncation rule") {
    std::vector<double> obs(100, 1.0);
    obs[7] = 10.0;  // max 10, positive mean ~ 1.09 -> 1.2 * max binds
    auto sample = WorkloadSample::from_observations(std::move(obs), 1.0, 1.0);
    CHECK(choose_outer_truncation(sample) == doctest::Approx(12.0).epsilon(1e-12));

    std::vector<double> tiny(100, 0.0);
    for (std::size_t i = 0; i < tiny.size(); i += 2) tiny[i] = 0.05;
    tiny[1] = 0.1;  // max 0.1, positive mean ~ 0.051 -> floor 5 * mean binds
    auto degenerate = WorkloadSample::from_observations(std::move(tiny), 1.0, 1.0);
    double k = choose_outer_truncation(degenerate);
    CHECK(k > 0.12);
    CHECK(k == doctest::Approx(5.0 * (0.05 * 50 + 0.1) / 51.0).epsilon(1e-12));

    auto run = simulate(JobSizeModel::exponential(1.0), 0.5, 1.0, 20000, 1000, 64);
    CHECK(choose_outer_truncation(run) > std::log(1000.0));  // 0.999 quantile of G
}

TEST_CASE("joint estimation end to end") {
    auto exp1 = JobSizeModel::exponential(1.0);
    auto sample = simulate(exp1, 0.5, 1.0, 10000, 1000, 11);
    double h = choose_truncation(sample.n(), 1.0);
    JointEstimate est = estimate_joint(sample, h, 12.0);
    CHECK(est.converged);
    CHECK(est.residual <= 1e-6);
    CHECK(est.iterations <= 100);
    CHECK(est.lambda_hat > 0.3);
    CHECK(est.lambda_hat < 0.75);
    CHECK(est.k == 12.0);
    CHECK(est.cdf.clamped);
    for (double v : est.cdf.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("joint estimation rejects bad inputs") {
    auto exp1 = JobSizeModel::exponential(1.0);
    auto sample = simulate(exp1, 0.5, 1.0, 1000, 500, 4);
    CHECK_THROWS_AS(estimate_joint(sample, 0.0, 12.0), config_error);
    CHECK_THROWS_AS(estimate_joint(sample, 10.0, -1.0), config_error);

    auto all_busy = WorkloadSample::from_observations(std::vector<double>(50, 2.0), 1.0, 1.0);
    CHECK_THROWS_AS(estimate_joint(all_busy, 10.0, 12.0), config_error);
}

TEST_CASE("non-convergence is reported, never silent") {
    auto exp1 = JobSizeModel::exponential(1.0);
    auto sample = simulate(exp1, 0.5, 1.0, 4000, 500, 5);
    JointOptions options;
    options.max_iter = 3;
    options.accelerate = false;
    JointEstimate est = estimate_joint(sample, 8.0, 10.0, options);
    CHECK_FALSE(est.converged);
    CHECK(est.iterations == 3);
    CHECK(est.residual > options.tol);
}

}  // TEST_SUITE
