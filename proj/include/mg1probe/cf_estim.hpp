#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mg1probe/mg1_sim.hpp"

namespace mg1probe {

// Empirical workload CF (1/n) sum_{j=1..n} e^{isV_j}; V_0 enters the
// characteristic-exponent estimator only through its boundary term.
std::complex<double> empirical_cf(const WorkloadSample& sample, double s);

// Z-estimator of the net-input characteristic exponent:
//   phi_hat(s) = [ (xi/n)(e^{isV_n} - e^{isV_0}) - (is/n) sum 1{V_j=0} ]
//              / [ (1/n) sum e^{isV_j} ].
// Exactly 0 at s = 0; throws numeric_error when the denominator vanishes
// (callers needing totality use the epsilon-modified estimator).
std::complex<double> estimate_phi(const WorkloadSample& sample, double s);

struct GammaEps {
    std::complex<double> value;
    bool truncated = false;
};

// Job-size CF estimate gamma_hat(s) = (phi_hat(s) + is)/lambda + 1, replaced
// by the constant (1-eps)(1+i) when |empirical_cf| <= eps.
GammaEps estimate_gamma_eps(const WorkloadSample& sample, double lambda, double s, double epsilon);

// min(default_eps, half the empirical zero fraction over j=1..n). Warns on
// stderr and falls back to default_eps when the sample contains no zeros.
double choose_epsilon(const WorkloadSample& sample, double default_eps = 0.01);

struct CfEstimate {
    std::vector<double> grid;  // strictly increasing, nonnegative
    std::vector<std::complex<double>> values;
    double epsilon = 0.0;
    std::vector<bool> truncated_flags;
    double lambda_used = 0.0;
};

// Elementwise estimate_gamma_eps over an arbitrary grid.
CfEstimate cf_on_grid(const WorkloadSample& sample, double lambda, double epsilon,
                      std::vector<double> grid);

// CSV with header s,re,im,truncated.
void cf_estimate_to_csv(const CfEstimate& estimate, std::ostream& out);

// phi_hat and truncation flags precomputed on the composite-midpoint nodes of
// (0, h]. One rotation recurrence per observation replaces a trig call per
// (observation, node) pair; results match the scalar path to ~1e-12.
// Everything downstream of phi_hat is lambda-free, so a single PhiGrid serves
// every lambda iterate in the joint estimator.
struct PhiGrid {
    std::vector<double> s;  // midpoint nodes
    std::vector<std::complex<double>> phi_hat;
    std::vector<bool> truncated;
    double epsilon = 0.0;
    double xi = 0.0;
};

PhiGrid estimate_phi_grid(const WorkloadSample& sample, double epsilon, double h,
                          std::size_t panels);

std::vector<std::complex<double>> gamma_eps_from_phi(const PhiGrid& grid, double lambda);

}  // namespace mg1probe
