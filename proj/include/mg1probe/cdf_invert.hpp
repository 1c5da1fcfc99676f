#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mg1probe/cf_estim.hpp"

namespace mg1probe {

using CfSource = std::function<std::complex<double>(double)>;

struct CdfEstimate {
    std::vector<double> x_grid;  // increasing, nonnegative
    std::vector<double> values;  // G_hat(x)
    double h = 0.0;
    std::size_t quadrature_panels = 0;
    bool clamped = false;
};

// G_hat(x) = 1/2 - (1/pi) int_0^h (1/s) Im{cf(s) e^{-isx}} ds by a composite
// midpoint rule with `panels` equal panels. The rule never evaluates s = 0,
// where the integrand has the finite limit E B - x. h = 0 returns exactly 1/2.
// Throws numeric_error (naming the node) if cf returns a non-finite value.
double invert_cdf(const CfSource& cf_source, double x, double h, std::size_t panels);

// h_n = n^{1/(2(1+eta))}, balancing the h^2/n variance growth against the
// h^{-2eta} squared tail bias.
double choose_truncation(std::size_t n, double eta);

// Tail bound C0 h^{-eta} / eta on the CF-scale inversion remainder; divide by
// pi for the G_hat scale.
double truncation_bias_bound(double eta, double C0, double h);
double truncation_bias_bound_cdf(double eta, double C0, double h);

// Node density resolving the e^{-isx} oscillation: >= 10 nodes per period
// 2 pi / x_max, floored at 4096.
std::size_t default_panels(double h, double x_max);

// Per-point invert_cdf over an x-grid with the CF evaluated once on the
// quadrature nodes; optional projection of the values onto [0,1].
CdfEstimate invert_on_grid(const CfSource& cf_source, std::vector<double> x_grid, double h,
                           std::size_t panels, bool clamp);

// Estimator pipeline: phi_hat on the quadrature nodes, gamma_eps, inversion.
CdfEstimate invert_on_grid(const WorkloadSample& sample, double lambda, double epsilon,
                           std::vector<double> x_grid, double h, std::size_t panels, bool clamp);

// Inversion from an already-computed PhiGrid (its nodes are the quadrature
// rule); used where many inversions share one phi_hat pass.
CdfEstimate invert_phi_grid(const PhiGrid& grid, double lambda, std::vector<double> x_grid,
                            double h, bool clamp);

// CSV with header x,G_hat.
void cdf_estimate_to_csv(const CdfEstimate& estimate, std::ostream& out);

}  // namespace mg1probe
