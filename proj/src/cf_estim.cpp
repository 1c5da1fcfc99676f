#include "mg1probe/cf_estim.hpp"

#include <cmath>
#include <iostream>
#include <ostream>
#include <string>

#include "mg1probe/csv.hpp"
#include "mg1probe/errors.hpp"

namespace mg1probe {

namespace {

void check_sample(const WorkloadSample& sample) {
    if (sample.observations.size() < 2)
        throw config_error("estimator: need at least two observations");
}

std::size_t zero_count_tail(const WorkloadSample& sample) {
    std::size_t count = 0;
    for (std::size_t j = 1; j < sample.observations.size(); ++j)
        count += (sample.observations[j] == 0.0);
    return count;
}

}  // namespace

std::complex<double> empirical_cf(const WorkloadSample& sample, double s) {
    check_sample(sample);
    if (s == 0.0) return {1.0, 0.0};
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 1; j < sample.observations.size(); ++j)
        acc += std::polar(1.0, s * sample.observations[j]);
    return acc / static_cast<double>(sample.n());
}

std::complex<double> estimate_phi(const WorkloadSample& sample, double s) {
    check_sample(sample);
    if (s == 0.0) return {0.0, 0.0};
    const auto& v = sample.observations;
    // The 1/n factors of numerator and denominator cancel.
    std::complex<double> cf_sum = empirical_cf(sample, s) * static_cast<double>(sample.n());
    if (std::abs(cf_sum) == 0.0)
        throw numeric_error("estimate_phi: empirical CF vanishes at s = " + std::to_string(s));
    std::complex<double> boundary = std::polar(1.0, s * v.back()) - std::polar(1.0, s * v.front());
    std::complex<double> atom{0.0, s * static_cast<double>(zero_count_tail(sample))};
    return (sample.xi * boundary - atom) / cf_sum;
}

GammaEps estimate_gamma_eps(const WorkloadSample& sample, double lambda, double s,
                            double epsilon) {
    if (!(lambda > 0.0)) throw config_error("estimate_gamma_eps: lambda must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw config_error("estimate_gamma_eps: epsilon must lie in (0,1)");
    if (s == 0.0) return {{1.0, 0.0}, false};
    if (std::abs(empirical_cf(sample, s)) <= epsilon)
        return {{1.0 - epsilon, 1.0 - epsilon}, true};
    std::complex<double> phi = estimate_phi(sample, s);
    return {(phi + std::complex<double>(0.0, s)) / lambda + 1.0, false};
}

double choose_epsilon(const WorkloadSample& sample, double default_eps) {
    check_sample(sample);
    double zero_fraction =
        static_cast<double>(zero_count_tail(sample)) / static_cast<double>(sample.n());
    if (zero_fraction == 0.0) {
        std::cerr << "warning: sample has no zero observations; epsilon falls back to "
                  << default_eps << " without the empirical cap\n";
        return default_eps;
    }
    return std::min(default_eps, 0.5 * zero_fraction);
}

CfEstimate cf_on_grid(const WorkloadSample& sample, double lambda, double epsilon,
                      std::vector<double> grid) {
    if (grid.empty()) throw config_error("cf_on_grid: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw config_error("cf_on_grid: grid must be nonnegative");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw config_error("cf_on_grid: grid must be strictly increasing");
    }
    CfEstimate est;
    est.grid = std::move(grid);
    est.values.reserve(est.grid.size());
    est.truncated_flags.reserve(est.grid.size());
    est.epsilon = epsilon;
    est.lambda_used = lambda;
    for (double s : est.grid) {
        GammaEps g = estimate_gamma_eps(sample, lambda, s, epsilon);
        est.values.push_back(g.value);
        est.truncated_flags.push_back(g.truncated);
    }
    return est;
}

void cf_estimate_to_csv(const CfEstimate& estimate, std::ostream& out) {
    out << "s,re,im,truncated\n";
    for (std::size_t i = 0; i < estimate.grid.size(); ++i) {
        out << format_double(estimate.grid[i]) << ',' << format_double(estimate.values[i].real())
            << ',' << format_double(estimate.values[i].imag()) << ','
            << (estimate.truncated_flags[i] ? 1 : 0) << '\n';
    }
}

PhiGrid estimate_phi_grid(const WorkloadSample& sample, double epsilon, double h,
                          std::size_t panels) {
    check_sample(sample);
    if (!(h > 0.0)) throw config_error("estimate_phi_grid: h must be positive");
    if (panels < 16) throw config_error("estimate_phi_grid: need at least 16 panels");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw config_error("estimate_phi_grid: epsilon must lie in (0,1)");

    const auto& v = sample.observations;
    const double n = static_cast<double>(sample.n());
    const double ds = h / static_cast<double>(panels);
    const double s0 = 0.5 * ds;

    PhiGrid grid;
    grid.epsilon = epsilon;
    grid.xi = sample.xi;
    grid.s.resize(panels);
    for (std::size_t k = 0; k < panels; ++k) grid.s[k] = s0 + ds * static_cast<double>(k);

    // Rotation recurrence e^{i s_{k+1} v} = e^{i s_k v} e^{i ds v}, written on
    // raw doubles; std::complex operator* lowers to a libcall here and this
    // loop dominates the estimator pipeline.
    std::vector<double> sum_re(panels, 0.0), sum_im(panels, 0.0);
    for (std::size_t j = 1; j < v.size(); ++j) {
        double rr = std::cos(s0 * v[j]), ri = std::sin(s0 * v[j]);
        const double wr = std::cos(ds * v[j]), wi = std::sin(ds * v[j]);
        for (std::size_t k = 0; k < panels; ++k) {
            sum_re[k] += rr;
            sum_im[k] += ri;
            const double next = rr * wr - ri * wi;
            ri = rr * wi + ri * wr;
            rr = next;
        }
    }
    std::vector<std::complex<double>> cf_sum(panels);
    for (std::size_t k = 0; k < panels; ++k) cf_sum[k] = {sum_re[k], sum_im[k]};

    const double count0 = static_cast<double>(zero_count_tail(sample));
    std::complex<double> e_first = std::polar(1.0, s0 * v.front());
    std::complex<double> e_last = std::polar(1.0, s0 * v.back());
    const std::complex<double> w_first = std::polar(1.0, ds * v.front());
    const std::complex<double> w_last = std::polar(1.0, ds * v.back());

    grid.phi_hat.resize(panels);
    grid.truncated.assign(panels, false);
    for (std::size_t k = 0; k < panels; ++k) {
        if (std::abs(cf_sum[k]) / n <= epsilon) {
            grid.truncated[k] = true;
            grid.phi_hat[k] = {0.0, 0.0};
        } else {
            std::complex<double> boundary = e_last - e_first;
            std::complex<double> atom{0.0, grid.s[k] * count0};
            grid.phi_hat[k] = (sample.xi * boundary - atom) / cf_sum[k];
        }
        e_first *= w_first;
        e_last *= w_last;
    }
    return grid;
}

std::vector<std::complex<double>> gamma_eps_from_phi(const PhiGrid& grid, double lambda) {
    if (!(lambda > 0.0)) throw config_error("gamma_eps_from_phi: lambda must be positive");
    std::vector<std::complex<double>> gamma(grid.s.size());
    const std::complex<double> truncated_value{1.0 - grid.epsilon, 1.0 - grid.epsilon};
    for (std::size_t k = 0; k < grid.s.size(); ++k) {
        gamma[k] = grid.truncated[k]
                       ? truncated_value
                       : (grid.phi_hat[k] + std::complex<double>(0.0, grid.s[k])) / lambda + 1.0;
    }
    return gamma;
}

}  // namespace mg1probe
