#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mg1probe/cdf_invert.hpp"

namespace mg1probe {

struct JointEstimate {
    double lambda_hat = 0.0;
    CdfEstimate cdf;  // G_hat(.; lambda_hat), clamped, on the x quadrature nodes
    double k = 0.0;   // outer truncation of the utilization integral
    std::size_t iterations = 0;
    bool converged = false;
    double residual = 0.0;  // last relative step |d lambda| / lambda
};

struct JointOptions {
    double omega = 0.5;        // damping of the fixed-point update
    double lambda0 = 0.0;      // initial guess; 0 means "use xi"
    double tol = 1e-6;         // relative-step stopping tolerance
    std::size_t max_iter = 100;
    double epsilon = 0.0;      // 0 means choose_epsilon(sample)
    std::size_t panels_s = 0;  // 0 means default_panels(h, k)
    std::size_t panels_x = 0;  // 0 means default_x_panels(k, h)
    bool accelerate = true;    // Aitken extrapolation of the damped iteration
    // Clamping G_hat to [0,1] inside the utilization integral rectifies the
    // tail oscillation into a positive perturbation of I that the solve
    // amplifies into a large downward bias of lambda_hat; the raw integrand
    // is nearly unbiased, so the loop uses it by default. I <= 0 still
    // raises numeric_error.
    bool clamp_in_loop = false;
};

struct FixedPointResult {
    double lambda = 0.0;
    std::size_t iterations = 0;  // map applications, i.e. evaluations of I
    bool converged = false;
    double residual = 0.0;
    std::vector<double> trace;  // iterates, starting at lambda0
};

// Solves rho_emp = lambda * I(lambda) with the damped update
//   lambda <- (1 - omega) lambda + omega rho_emp / I(lambda).
// The map's contraction rate degrades like 1 - omega/(pi h E B) for the
// estimator's I, so by default each pair of damped steps is followed by a
// guarded Aitken extrapolation, which the near-affine structure of
// lambda * I(lambda) makes land close to the root. Throws numeric_error
// (with the iterate trace) if I(lambda) <= 0 at any iterate.
FixedPointResult solve_lambda_fixed_point(double rho_emp,
                                          const std::function<double(double)>& I_of_lambda,
                                          double lambda0, double omega, double tol,
                                          std::size_t max_iter, bool accelerate);

// Simultaneous estimate of the arrival rate and job-size CDF: matches the
// empirical busy fraction (1/n) sum 1{V_j > 0} to lambda int_0^k (1 - G_hat(x;
// lambda)) dx, with G_hat clamped to [0,1] inside the loop so the integral
// stays positive.
JointEstimate estimate_joint(const WorkloadSample& sample, double h, double k,
                             const JointOptions& options = {});

// k = max(1.2 * max observation, 5 * mean of the positive observations).
double choose_outer_truncation(const WorkloadSample& sample);

// Default panel count of the outer utilization integral over [0, k].
std::size_t default_x_panels(double k, double h);

}  // namespace mg1probe
