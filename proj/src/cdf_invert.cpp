#include "mg1probe/cdf_invert.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mg1probe/csv.hpp"
#include "mg1probe/errors.hpp"

namespace mg1probe {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_x_grid(const std::vector<double>& x_grid) {
    if (x_grid.empty()) throw config_error("invert: empty x grid");
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
        if (x_grid[i] < 0.0) throw config_error("invert: x must be nonnegative");
        if (i > 0 && x_grid[i] <= x_grid[i - 1])
            throw config_error("invert: x grid must be strictly increasing");
    }
}

std::vector<double> midpoint_nodes(double h, std::size_t panels) {
    const double ds = h / static_cast<double>(panels);
    std::vector<double> s(panels);
    for (std::size_t k = 0; k < panels; ++k) s[k] = (static_cast<double>(k) + 0.5) * ds;
    return s;
}

std::vector<std::complex<double>> evaluate_cf(const CfSource& cf_source,
                                              const std::vector<double>& nodes) {
    std::vector<std::complex<double>> values(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        values[k] = cf_source(nodes[k]);
        if (!std::isfinite(values[k].real()) || !std::isfinite(values[k].imag()))
            throw numeric_error("invert: cf source returned a non-finite value at s = " +
                                format_double(nodes[k]));
    }
    return values;
}

// Integrand values split into weighted components so the per-x sweep is raw
// double arithmetic; e^{-isx} advances by a per-panel rotation, one complex
// multiply per node instead of a trig call.
struct InversionTable {
    std::vector<double> wre, wim;  // cf(s_k) / s_k
    double s0 = 0.0;
    double ds = 0.0;

    InversionTable(const std::vector<double>& nodes,
                   const std::vector<std::complex<double>>& cf_values, double h) {
        const std::size_t m = nodes.size();
        wre.resize(m);
        wim.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            wre[k] = cf_values[k].real() / nodes[k];
            wim[k] = cf_values[k].imag() / nodes[k];
        }
        s0 = nodes.front();
        ds = h / static_cast<double>(m);
    }

    // G_hat(x) = 1/2 - (ds/pi) sum_k Im{(cf(s_k)/s_k) e^{-i s_k x}}
    double invert_at(double x) const {
        double rr = std::cos(s0 * x), ri = -std::sin(s0 * x);
        const double wr = std::cos(ds * x), wi = -std::sin(ds * x);
        double acc = 0.0;
        for (std::size_t k = 0; k < wre.size(); ++k) {
            acc += wre[k] * ri + wim[k] * rr;
            const double next = rr * wr - ri * wi;
            ri = rr * wi + ri * wr;
            rr = next;
        }
        return 0.5 - ds * acc / kPi;
    }
};

CdfEstimate invert_values(const std::vector<double>& nodes,
                          const std::vector<std::complex<double>>& cf_values,
                          std::vector<double> x_grid, double h, bool clamp) {
    InversionTable table(nodes, cf_values, h);
    CdfEstimate est;
    est.x_grid = std::move(x_grid);
    est.values.reserve(est.x_grid.size());
    est.h = h;
    est.quadrature_panels = nodes.size();
    est.clamped = clamp;
    for (double x : est.x_grid) {
        double g = table.invert_at(x);
        if (clamp) g = std::clamp(g, 0.0, 1.0);
        est.values.push_back(g);
    }
    return est;
}

void check_h_panels(double h, std::size_t panels) {
    if (!(h > 0.0)) throw config_error("invert: h must be positive");
    if (panels < 16) throw config_error("invert: need at least 16 quadrature panels");
}

}  // namespace

double invert_cdf(const CfSource& cf_source, double x, double h, std::size_t panels) {
    if (x < 0.0) throw config_error("invert_cdf: x must be nonnegative");
    if (h < 0.0) throw config_error("invert_cdf: h must be nonnegative");
    if (h == 0.0) return 0.5;
    check_h_panels(h, panels);
    auto nodes = midpoint_nodes(h, panels);
    auto values = evaluate_cf(cf_source, nodes);
    return InversionTable(nodes, values, h).invert_at(x);
}

double choose_truncation(std::size_t n, double eta) {
    if (n < 1) throw config_error("choose_truncation: n must be at least 1");
    if (!(eta > 0.0)) throw config_error("choose_truncation: eta must be positive");
    return std::pow(static_cast<double>(n), 1.0 / (2.0 * (1.0 + eta)));
}

double truncation_bias_bound(double eta, double C0, double h) {
    if (!(eta > 0.0) || !(C0 > 0.0) || !(h > 0.0))
        throw config_error("truncation_bias_bound: eta, C0, h must be positive");
    return C0 * std::pow(h, -eta) / eta;
}

double truncation_bias_bound_cdf(double eta, double C0, double h) {
    return truncation_bias_bound(eta, C0, h) / kPi;
}

std::size_t default_panels(double h, double x_max) {
    double required = std::ceil(64.0 * h * (1.0 + x_max));
    return static_cast<std::size_t>(std::max(4096.0, required));
}

CdfEstimate invert_on_grid(const CfSource& cf_source, std::vector<double> x_grid, double h,
                           std::size_t panels, bool clamp) {
    check_x_grid(x_grid);
    check_h_panels(h, panels);
    auto nodes = midpoint_nodes(h, panels);
    auto values = evaluate_cf(cf_source, nodes);
    return invert_values(nodes, values, std::move(x_grid), h, clamp);
}

CdfEstimate invert_on_grid(const WorkloadSample& sample, double lambda, double epsilon,
                           std::vector<double> x_grid, double h, std::size_t panels, bool clamp) {
    check_x_grid(x_grid);
    check_h_panels(h, panels);
    PhiGrid grid = estimate_phi_grid(sample, epsilon, h, panels);
    return invert_phi_grid(grid, lambda, std::move(x_grid), h, clamp);
}

CdfEstimate invert_phi_grid(const PhiGrid& grid, double lambda, std::vector<double> x_grid,
                            double h, bool clamp) {
    check_x_grid(x_grid);
    auto gamma = gamma_eps_from_phi(grid, lambda);
    return invert_values(grid.s, gamma, std::move(x_grid), h, clamp);
}

void cdf_estimate_to_csv(const CdfEstimate& estimate, std::ostream& out) {
    out << "x,G_hat\n";
    for (std::size_t i = 0; i < estimate.x_grid.size(); ++i) {
        out << format_double(estimate.x_grid[i]) << ',' << format_double(estimate.values[i])
            << '\n';
    }
}

}  // namespace mg1probe
