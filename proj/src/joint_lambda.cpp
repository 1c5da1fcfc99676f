#include "mg1probe/joint_lambda.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mg1probe/errors.hpp"
#include "mg1probe/mg1_sim.hpp"

namespace mg1probe {

namespace {

std::string trace_string(const std::vector<double>& trace) {
    std::ostringstream out;
    out.precision(6);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i) out << " -> ";
        out << trace[i];
    }
    return out.str();
}

std::vector<double> x_midpoints(double k, std::size_t panels) {
    std::vector<double> xs(panels);
    const double dx = k / static_cast<double>(panels);
    for (std::size_t i = 0; i < panels; ++i) xs[i] = (static_cast<double>(i) + 0.5) * dx;
    return xs;
}

}  // namespace

FixedPointResult solve_lambda_fixed_point(double rho_emp,
                                          const std::function<double(double)>& I_of_lambda,
                                          double lambda0, double omega, double tol,
                                          std::size_t max_iter, bool accelerate) {
    if (!(rho_emp > 0.0)) throw config_error("solve_lambda: rho_emp must be positive");
    if (!(lambda0 > 0.0)) throw config_error("solve_lambda: lambda0 must be positive");
    if (!(omega > 0.0 && omega <= 1.0)) throw config_error("solve_lambda: omega must be in (0,1]");
    if (!(tol > 0.0) || max_iter == 0) throw config_error("solve_lambda: bad tol or max_iter");

    FixedPointResult res;
    res.trace.push_back(lambda0);
    double lambda = lambda0;

    auto step = [&](double current) {
        double I = I_of_lambda(current);
        if (!(I > 0.0)) {
            throw numeric_error("solve_lambda: nonpositive utilization integral I = " +
                                std::to_string(I) + " at iterate " +
                                std::to_string(res.iterations) + "; trace " +
                                trace_string(res.trace));
        }
        return (1.0 - omega) * current + omega * rho_emp / I;
    };

    auto advance = [&](double current) {
        double next = step(current);
        ++res.iterations;
        res.residual = std::abs(next - current) / current;
        res.trace.push_back(next);
        return next;
    };

    while (res.iterations < max_iter) {
        double u = advance(lambda);
        if (res.residual <= tol) {
            lambda = u;
            res.converged = true;
            break;
        }
        if (!accelerate || res.iterations >= max_iter) {
            lambda = u;
            continue;
        }
        double v = advance(u);
        if (res.residual <= tol) {
            lambda = v;
            res.converged = true;
            break;
        }
        // Aitken extrapolation of (lambda, u, v); guarded against the wild
        // jumps the formula can produce far from the root.
        double d1 = u - lambda;
        double d2 = v - u;
        double denom = d2 - d1;
        lambda = v;
        if (denom != 0.0) {
            double candidate = v - d2 * d2 / denom;
            if (std::isfinite(candidate) && candidate > 0.0 && candidate < 50.0 * v &&
                candidate > v / 50.0) {
                lambda = candidate;
                res.trace.push_back(candidate);
            }
        }
    }
    res.lambda = lambda;
    return res;
}

JointEstimate estimate_joint(const WorkloadSample& sample, double h, double k,
                             const JointOptions& options) {
    if (!(h > 0.0) || !(k > 0.0)) throw config_error("estimate_joint: h and k must be positive");
    double busy = empirical_busy_fraction(sample);
    if (!(busy > 0.0 && busy < 1.0))
        throw config_error("estimate_joint: busy fraction must lie strictly in (0,1), got " +
                           std::to_string(busy));

    const double epsilon = options.epsilon > 0.0 ? options.epsilon : choose_epsilon(sample);
    const std::size_t panels_s =
        options.panels_s ? options.panels_s : default_panels(h, k);
    const std::size_t panels_x = options.panels_x ? options.panels_x : default_x_panels(k, h);
    const double lambda0 = options.lambda0 > 0.0 ? options.lambda0 : sample.xi;

    PhiGrid phi_grid = estimate_phi_grid(sample, epsilon, h, panels_s);
    std::vector<double> xs = x_midpoints(k, panels_x);
    const double dx = k / static_cast<double>(panels_x);

    auto utilization_integral = [&](double lambda) {
        CdfEstimate g = invert_phi_grid(phi_grid, lambda, xs, h, options.clamp_in_loop);
        double acc = 0.0;
        for (double v : g.values) acc += 1.0 - v;
        return dx * acc;
    };

    FixedPointResult fp = solve_lambda_fixed_point(busy, utilization_integral, lambda0,
                                                   options.omega, options.tol, options.max_iter,
                                                   options.accelerate);

    JointEstimate est;
    est.lambda_hat = fp.lambda;
    est.k = k;
    est.iterations = fp.iterations;
    est.converged = fp.converged;
    est.residual = fp.residual;
    est.cdf = invert_phi_grid(phi_grid, fp.lambda, xs, h, /*clamp=*/true);
    return est;
}

std::size_t default_x_panels(double k, double h) {
    // ~25 nodes per 2 pi / h oscillation period of G_hat
    return static_cast<std::size_t>(std::max(512.0, std::ceil(4.0 * k * std::max(1.0, h))));
}

double choose_outer_truncation(const WorkloadSample& sample) {
    if (sample.observations.empty()) throw config_error("choose_outer_truncation: empty sample");
    double max_obs = 0.0;
    double positive_sum = 0.0;
    std::size_t positive_count = 0;
    for (double v : sample.observations) {
        max_obs = std::max(max_obs, v);
        if (v > 0.0) {
            positive_sum += v;
            ++positive_count;
        }
    }
    if (positive_count == 0)
        throw config_error("choose_outer_truncation: sample has no positive observations");
    double mean_positive = positive_sum / static_cast<double>(positive_count);
    return std::max(1.2 * max_obs, 5.0 * mean_positive);
}

}  // namespace mg1probe
