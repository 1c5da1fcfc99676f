#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mg1probe/cdf_invert.hpp"
#include "mg1probe/stats.hpp"

namespace mg1probe {

enum class HRule { Theorem2, Fixed };
enum class EpsilonRule { Auto, Fixed };

// One Monte-Carlo experiment: model, rates, grids, replication count and the
// rules resolving h and epsilon. Serialized verbatim into the run manifest.
struct ExperimentSpec {
    std::string type;  // cf-mse | cdf-risk | figure | martingale
    JobSizeModel model;
    double lambda = 0.0;
    double xi = 0.0;
    std::vector<std::size_t> n_grid;
    std::vector<double> s_grid;  // cf-mse, martingale
    std::vector<double> x_grid;  // cdf-risk, figure
    std::vector<double> h_list;  // figure
    std::size_t replications = 2;
    std::uint64_t seed_base = 0;
    HRule h_rule = HRule::Theorem2;
    double h_eta = 0.0;    // 0 means smoothness_eta(model)
    double h_fixed = 0.0;  // HRule::Fixed value
    EpsilonRule epsilon_rule = EpsilonRule::Auto;
    double epsilon_fixed = 0.01;
    std::optional<std::size_t> burn_in;  // absent means default_burn_in(rho)
    std::size_t panels = 0;              // 0 means default_panels(h, x_max)
    std::size_t threads = 0;             // 0 means hardware concurrency

    void validate() const;
    double resolved_eta() const;
    double h_for(std::size_t n) const;
    std::size_t burn_in_for() const;

    bool operator==(const ExperimentSpec&) const = default;
};

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

struct RiskCell {
    double param = 0.0;  // s or x
    std::size_t n = 0;
    double mse = 0.0;
    double se = 0.0;  // MC standard error of the MSE estimate
    std::size_t reps = 0;
};

struct RiskReport {
    std::vector<RiskCell> cells;
    std::map<std::string, SlopeFit> fitted_slopes;
    double runtime_seconds = 0.0;
};

// MC mean of |gamma_eps(s) - gamma(s)|^2 per (s, n), with log-log slopes of
// MSE vs n at each s and of MSE vs s (restricted to s >= 2) at each n.
RiskReport mc_cf_mse(const ExperimentSpec& spec);

// MC mean of (G_hat(x) - G(x))^2 per (x, n) with h = h_rule(n) and log-log
// slopes of MSE vs n at each x. Inversion is unclamped.
RiskReport mc_cdf_risk(const ExperimentSpec& spec);

struct FigureReport {
    std::vector<double> x_grid;
    std::vector<double> g_true;
    // first replication's curve per h, as in the single-sample figures
    std::map<double, std::vector<double>> curves;
    std::map<double, std::vector<double>> sup_errors;  // per h, one entry per rep
    std::map<double, double> median_sup_error;
    double runtime_seconds = 0.0;
};

FigureReport reproduce_figure(const ExperimentSpec& spec);

struct MartingaleCell {
    double s = 0.0;
    double mean_re = 0.0, se_re = 0.0;
    double mean_im = 0.0, se_im = 0.0;
    double max_identity_residual = 0.0;  // error-representation identity per rep
};

struct MartingaleReport {
    std::vector<MartingaleCell> cells;
    std::size_t replications = 0;
    double runtime_seconds = 0.0;
};

// Per replication: Zbar(s) = (1/n) sum_j [(xi - phi(s)) e^{isV_j}
// - xi e^{isV_{j-1}} - is 1{V_j=0}] with the true phi, plus the residual of
// the identity lambda (gamma_hat - gamma) = sum Z_j / sum e^{isV_j}.
MartingaleReport martingale_diagnostic(const ExperimentSpec& spec);

// Zbar and the identity residual for a single sample; the acceptance and unit
// suites drive this directly.
struct MartingaleSample {
    std::complex<double> z_mean;
    double identity_residual = 0.0;
};
MartingaleSample martingale_sample(const WorkloadSample& sample, double s);

void risk_report_to_csv(const RiskReport& report, const std::string& param_name,
                        std::ostream& out);
void slopes_to_csv(const RiskReport& report, std::ostream& out);
void martingale_report_to_csv(const MartingaleReport& report, std::ostream& out);

}  // namespace mg1probe
