#include "mg1probe/harness.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mg1probe/csv.hpp"
#include "mg1probe/errors.hpp"
#include "mg1probe/parallel.hpp"

namespace mg1probe {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

double epsilon_for(const ExperimentSpec& spec, const WorkloadSample& sample) {
    return spec.epsilon_rule == EpsilonRule::Fixed ? spec.epsilon_fixed : choose_epsilon(sample);
}

// Replication seeds are decorrelated across both the replication index and
// the position of n in the grid.
std::uint64_t replication_seed(const ExperimentSpec& spec, std::size_t n_index, std::size_t rep) {
    return spec.seed_base + static_cast<std::uint64_t>(n_index) * spec.replications + rep;
}

std::string slope_key(const std::string& axis, const std::string& at, double value) {
    return "mse_vs_" + axis + "@" + at + "=" + format_double(value);
}

std::string slope_key_n(const std::string& axis, const std::string& at, std::size_t value) {
    return "mse_vs_" + axis + "@" + at + "=" + std::to_string(value);
}

}  // namespace

void ExperimentSpec::validate() const {
    model.validate();
    if (!(lambda > 0.0) || !(xi > 0.0))
        throw config_error("experiment: lambda and xi must be positive");
    if (replications < 2) throw config_error("experiment: need at least 2 replications");
    if (n_grid.empty()) throw config_error("experiment: empty n grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2) throw config_error("experiment: every n must be >= 2");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw config_error("experiment: n grid must be strictly increasing");
    }
    if (h_rule == HRule::Fixed && !(h_fixed > 0.0))
        throw config_error("experiment: fixed h rule needs h > 0");
    if (epsilon_rule == EpsilonRule::Fixed && !(epsilon_fixed > 0.0 && epsilon_fixed < 1.0))
        throw config_error("experiment: fixed epsilon must lie in (0,1)");
    if (!(lambda * mean(model) < 1.0)) throw config_error("experiment: unstable configuration");
    if (type == "cf-mse" || type == "martingale") {
        if (s_grid.empty()) throw config_error("experiment: " + type + " needs an s grid");
    }
    if (type == "cdf-risk" || type == "figure") {
        if (x_grid.empty()) throw config_error("experiment: " + type + " needs an x grid");
        for (std::size_t i = 0; i < x_grid.size(); ++i) {
            if (x_grid[i] < 0.0) throw config_error("experiment: x grid must be nonnegative");
            if (i > 0 && x_grid[i] <= x_grid[i - 1])
                throw config_error("experiment: x grid must be strictly increasing");
        }
    }
    if (type == "figure" && h_list.empty())
        throw config_error("experiment: figure needs a nonempty h list");
}

double ExperimentSpec::resolved_eta() const {
    return h_eta > 0.0 ? h_eta : smoothness_eta(model);
}

double ExperimentSpec::h_for(std::size_t n) const {
    return h_rule == HRule::Fixed ? h_fixed : choose_truncation(n, resolved_eta());
}

std::size_t ExperimentSpec::burn_in_for() const {
    if (burn_in) return *burn_in;
    return default_burn_in(lambda * mean(model));
}

namespace {

// Grids are given either as an explicit array or as {"min","max","step"}.
std::vector<double> grid_from_json(const nlohmann::json& j, const char* what) {
    if (j.is_array()) return j.get<std::vector<double>>();
    if (j.is_object() && j.contains("max") && j.contains("step")) {
        double lo = j.value("min", 0.0);
        double hi = j.at("max").get<double>();
        double step = j.at("step").get<double>();
        if (!(step > 0.0) || hi < lo) throw config_error(std::string(what) + ": bad grid range");
        std::vector<double> grid;
        for (std::size_t i = 0;; ++i) {
            double v = lo + step * static_cast<double>(i);
            if (v > hi + 0.5 * step) break;
            grid.push_back(v);
        }
        return grid;
    }
    throw config_error(std::string(what) + ": expected an array or {min,max,step}");
}

}  // namespace

ExperimentSpec spec_from_json(const nlohmann::json& j) {
    ExperimentSpec spec;
    spec.type = j.at("type").get<std::string>();
    spec.model = model_from_json(j.at("model"));
    spec.lambda = j.at("lambda").get<double>();
    spec.xi = j.at("xi").get<double>();
    spec.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("s_grid")) spec.s_grid = grid_from_json(j.at("s_grid"), "s_grid");
    if (j.contains("x_grid")) spec.x_grid = grid_from_json(j.at("x_grid"), "x_grid");
    if (j.contains("h_list")) spec.h_list = j.at("h_list").get<std::vector<double>>();
    spec.replications = j.at("replications").get<std::size_t>();
    spec.seed_base = j.value("seed_base", std::uint64_t{0});
    if (j.contains("h_rule")) {
        const auto& r = j.at("h_rule");
        std::string rule = r.at("rule").get<std::string>();
        if (rule == "theorem2") {
            spec.h_rule = HRule::Theorem2;
            spec.h_eta = r.value("eta", 0.0);
        } else if (rule == "fixed") {
            spec.h_rule = HRule::Fixed;
            spec.h_fixed = r.at("h").get<double>();
        } else {
            throw config_error("experiment: unknown h rule \"" + rule + "\"");
        }
    }
    if (j.contains("epsilon_rule")) {
        const auto& r = j.at("epsilon_rule");
        std::string rule = r.at("rule").get<std::string>();
        if (rule == "auto") {
            spec.epsilon_rule = EpsilonRule::Auto;
        } else if (rule == "fixed") {
            spec.epsilon_rule = EpsilonRule::Fixed;
            spec.epsilon_fixed = r.at("epsilon").get<double>();
        } else {
            throw config_error("experiment: unknown epsilon rule \"" + rule + "\"");
        }
    }
    if (j.contains("burn_in")) spec.burn_in = j.at("burn_in").get<std::size_t>();
    spec.panels = j.value("panels", std::size_t{0});
    spec.threads = j.value("threads", std::size_t{0});
    spec.validate();
    return spec;
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
    nlohmann::json j;
    j["type"] = spec.type;
    j["model"] = model_to_json(spec.model);
    j["lambda"] = spec.lambda;
    j["xi"] = spec.xi;
    j["n_grid"] = spec.n_grid;
    if (!spec.s_grid.empty()) j["s_grid"] = spec.s_grid;
    if (!spec.x_grid.empty()) j["x_grid"] = spec.x_grid;
    if (!spec.h_list.empty()) j["h_list"] = spec.h_list;
    j["replications"] = spec.replications;
    j["seed_base"] = spec.seed_base;
    if (spec.h_rule == HRule::Theorem2) {
        j["h_rule"] = {{"rule", "theorem2"}};
        if (spec.h_eta > 0.0) j["h_rule"]["eta"] = spec.h_eta;
    } else {
        j["h_rule"] = {{"rule", "fixed"}, {"h", spec.h_fixed}};
    }
    if (spec.epsilon_rule == EpsilonRule::Auto) {
        j["epsilon_rule"] = {{"rule", "auto"}};
    } else {
        j["epsilon_rule"] = {{"rule", "fixed"}, {"epsilon", spec.epsilon_fixed}};
    }
    if (spec.burn_in) j["burn_in"] = *spec.burn_in;
    if (spec.panels) j["panels"] = spec.panels;
    if (spec.threads) j["threads"] = spec.threads;
    return j;
}

RiskReport mc_cf_mse(const ExperimentSpec& spec) {
    spec.validate();
    auto start = clock_type::now();

    std::vector<std::complex<double>> gamma_true(spec.s_grid.size());
    for (std::size_t i = 0; i < spec.s_grid.size(); ++i)
        gamma_true[i] = cf(spec.model, spec.s_grid[i]);

    RiskReport report;
    // err2[n_index][rep][s_index]
    for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
        const std::size_t n = spec.n_grid[ni];
        std::vector<std::vector<double>> err2(spec.replications,
                                              std::vector<double>(spec.s_grid.size(), 0.0));
        parallel_for_index(spec.replications, spec.threads, [&](std::size_t rep) {
            WorkloadSample sample = simulate(spec.model, spec.lambda, spec.xi, n,
                                             spec.burn_in_for(), replication_seed(spec, ni, rep));
            double eps = epsilon_for(spec, sample);
            for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
                GammaEps g = estimate_gamma_eps(sample, spec.lambda, spec.s_grid[si], eps);
                err2[rep][si] = std::norm(g.value - gamma_true[si]);
            }
        });
        for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
            std::vector<double> per_rep(spec.replications);
            for (std::size_t rep = 0; rep < spec.replications; ++rep) per_rep[rep] = err2[rep][si];
            MeanSe ms = mean_se(per_rep);
            report.cells.push_back({spec.s_grid[si], n, ms.mean, ms.se, spec.replications});
        }
    }

    // log-log slope of MSE vs n at each s
    for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
        if (spec.n_grid.size() < 2) break;
        std::vector<double> log_n, log_mse;
        for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
            const RiskCell& cell = report.cells[ni * spec.s_grid.size() + si];
            log_n.push_back(std::log(static_cast<double>(cell.n)));
            log_mse.push_back(std::log(cell.mse));
        }
        report.fitted_slopes[slope_key("n", "s", spec.s_grid[si])] = fit_slope(log_n, log_mse);
    }
    // log-log slope of MSE vs s (s >= 2) at each n
    for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
        std::vector<double> log_s, log_mse;
        for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
            if (spec.s_grid[si] < 2.0) continue;
            const RiskCell& cell = report.cells[ni * spec.s_grid.size() + si];
            log_s.push_back(std::log(cell.param));
            log_mse.push_back(std::log(cell.mse));
        }
        if (log_s.size() >= 2)
            report.fitted_slopes[slope_key_n("s", "n", spec.n_grid[ni])] =
                fit_slope(log_s, log_mse);
    }

    report.runtime_seconds = seconds_since(start);
    return report;
}

RiskReport mc_cdf_risk(const ExperimentSpec& spec) {
    spec.validate();
    auto start = clock_type::now();

    std::vector<double> g_true(spec.x_grid.size());
    for (std::size_t i = 0; i < spec.x_grid.size(); ++i)
        g_true[i] = cdf(spec.model, spec.x_grid[i]);

    RiskReport report;
    for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
        const std::size_t n = spec.n_grid[ni];
        const double h = spec.h_for(n);
        const std::size_t panels =
            spec.panels ? spec.panels : default_panels(h, spec.x_grid.back());
        std::vector<std::vector<double>> err2(spec.replications,
                                              std::vector<double>(spec.x_grid.size(), 0.0));
        parallel_for_index(spec.replications, spec.threads, [&](std::size_t rep) {
            WorkloadSample sample = simulate(spec.model, spec.lambda, spec.xi, n,
                                             spec.burn_in_for(), replication_seed(spec, ni, rep));
            double eps = epsilon_for(spec, sample);
            CdfEstimate est = invert_on_grid(sample, spec.lambda, eps, spec.x_grid, h, panels,
                                             /*clamp=*/false);
            for (std::size_t xi_ = 0; xi_ < spec.x_grid.size(); ++xi_) {
                double d = est.values[xi_] - g_true[xi_];
                err2[rep][xi_] = d * d;
            }
        });
        for (std::size_t xi_ = 0; xi_ < spec.x_grid.size(); ++xi_) {
            std::vector<double> per_rep(spec.replications);
            for (std::size_t rep = 0; rep < spec.replications; ++rep)
                per_rep[rep] = err2[rep][xi_];
            MeanSe ms = mean_se(per_rep);
            report.cells.push_back({spec.x_grid[xi_], n, ms.mean, ms.se, spec.replications});
        }
    }

    for (std::size_t xi_ = 0; xi_ < spec.x_grid.size(); ++xi_) {
        if (spec.n_grid.size() < 2) break;
        std::vector<double> log_n, log_mse;
        for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
            const RiskCell& cell = report.cells[ni * spec.x_grid.size() + xi_];
            log_n.push_back(std::log(static_cast<double>(cell.n)));
            log_mse.push_back(std::log(cell.mse));
        }
        report.fitted_slopes[slope_key("n", "x", spec.x_grid[xi_])] = fit_slope(log_n, log_mse);
    }

    report.runtime_seconds = seconds_since(start);
    return report;
}

FigureReport reproduce_figure(const ExperimentSpec& spec) {
    spec.validate();
    auto start = clock_type::now();
    const std::size_t n = spec.n_grid.front();

    FigureReport report;
    report.x_grid = spec.x_grid;
    report.g_true.resize(spec.x_grid.size());
    for (std::size_t i = 0; i < spec.x_grid.size(); ++i)
        report.g_true[i] = cdf(spec.model, spec.x_grid[i]);

    // sup_err[rep][h_index]; curves of replication 0 kept for plotting
    std::vector<std::vector<double>> sup_err(spec.replications,
                                             std::vector<double>(spec.h_list.size(), 0.0));
    std::vector<std::vector<double>> first_curves(spec.h_list.size());
    parallel_for_index(spec.replications, spec.threads, [&](std::size_t rep) {
        WorkloadSample sample = simulate(spec.model, spec.lambda, spec.xi, n, spec.burn_in_for(),
                                         replication_seed(spec, 0, rep));
        double eps = epsilon_for(spec, sample);
        for (std::size_t hi = 0; hi < spec.h_list.size(); ++hi) {
            const double h = spec.h_list[hi];
            const std::size_t panels =
                spec.panels ? spec.panels : default_panels(h, spec.x_grid.back());
            CdfEstimate est = invert_on_grid(sample, spec.lambda, eps, spec.x_grid, h, panels,
                                             /*clamp=*/false);
            double sup = 0.0;
            for (std::size_t i = 0; i < spec.x_grid.size(); ++i)
                sup = std::max(sup, std::abs(est.values[i] - report.g_true[i]));
            sup_err[rep][hi] = sup;
            if (rep == 0) first_curves[hi] = est.values;
        }
    });

    for (std::size_t hi = 0; hi < spec.h_list.size(); ++hi) {
        const double h = spec.h_list[hi];
        std::vector<double> errs(spec.replications);
        for (std::size_t rep = 0; rep < spec.replications; ++rep) errs[rep] = sup_err[rep][hi];
        report.sup_errors[h] = errs;
        report.median_sup_error[h] = median(errs);
        report.curves[h] = std::move(first_curves[hi]);
    }

    report.runtime_seconds = seconds_since(start);
    return report;
}

MartingaleSample martingale_sample(const WorkloadSample& sample, double s) {
    if (!sample.model) throw config_error("martingale_sample: needs a simulated sample");
    const auto& v = sample.observations;
    const double xi = sample.xi;
    const double lambda = sample.lambda;
    const std::complex<double> phi = characteristic_exponent(*sample.model, lambda, s);

    std::complex<double> z_sum{0.0, 0.0};
    std::complex<double> cf_sum{0.0, 0.0};
    for (std::size_t j = 1; j < v.size(); ++j) {
        std::complex<double> e_j = std::polar(1.0, s * v[j]);
        std::complex<double> e_prev = std::polar(1.0, s * v[j - 1]);
        std::complex<double> z = (xi - phi) * e_j - xi * e_prev;
        if (v[j] == 0.0) z -= std::complex<double>(0.0, s);
        z_sum += z;
        cf_sum += e_j;
    }
    const double n = static_cast<double>(sample.n());

    MartingaleSample out;
    out.z_mean = z_sum / n;
    if (s == 0.0) {
        out.identity_residual = std::abs(out.z_mean);  // identically zero at s = 0
        return out;
    }
    std::complex<double> gamma_hat =
        (estimate_phi(sample, s) + std::complex<double>(0.0, s)) / lambda + 1.0;
    std::complex<double> gamma_true = cf(*sample.model, s);
    out.identity_residual = std::abs(lambda * (gamma_hat - gamma_true) - z_sum / cf_sum);
    return out;
}

MartingaleReport martingale_diagnostic(const ExperimentSpec& spec) {
    spec.validate();
    auto start = clock_type::now();
    const std::size_t n = spec.n_grid.front();

    // per s: replication values
    std::vector<std::vector<std::complex<double>>> z_means(
        spec.s_grid.size(), std::vector<std::complex<double>>(spec.replications));
    std::vector<std::vector<double>> residuals(spec.s_grid.size(),
                                               std::vector<double>(spec.replications));
    parallel_for_index(spec.replications, spec.threads, [&](std::size_t rep) {
        WorkloadSample sample = simulate(spec.model, spec.lambda, spec.xi, n, spec.burn_in_for(),
                                         replication_seed(spec, 0, rep));
        for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
            MartingaleSample ms = martingale_sample(sample, spec.s_grid[si]);
            z_means[si][rep] = ms.z_mean;
            residuals[si][rep] = ms.identity_residual;
        }
    });

    MartingaleReport report;
    report.replications = spec.replications;
    for (std::size_t si = 0; si < spec.s_grid.size(); ++si) {
        std::vector<double> re(spec.replications), im(spec.replications);
        double max_residual = 0.0;
        for (std::size_t rep = 0; rep < spec.replications; ++rep) {
            re[rep] = z_means[si][rep].real();
            im[rep] = z_means[si][rep].imag();
            max_residual = std::max(max_residual, residuals[si][rep]);
        }
        MeanSe mre = mean_se(re), mim = mean_se(im);
        report.cells.push_back(
            {spec.s_grid[si], mre.mean, mre.se, mim.mean, mim.se, max_residual});
    }
    report.runtime_seconds = seconds_since(start);
    return report;
}

void risk_report_to_csv(const RiskReport& report, const std::string& param_name,
                        std::ostream& out) {
    out << param_name << ",n,mse,se,reps\n";
    for (const RiskCell& cell : report.cells) {
        out << format_double(cell.param) << ',' << cell.n << ',' << format_double(cell.mse) << ','
            << format_double(cell.se) << ',' << cell.reps << '\n';
    }
}

void slopes_to_csv(const RiskReport& report, std::ostream& out) {
    out << "name,slope,stderr\n";
    for (const auto& [name, fit] : report.fitted_slopes) {
        out << name << ',' << format_double(fit.slope) << ',' << format_double(fit.stderr_)
            << '\n';
    }
}

void martingale_report_to_csv(const MartingaleReport& report, std::ostream& out) {
    out << "s,mean_re,se_re,mean_im,se_im,max_identity_residual\n";
    for (const MartingaleCell& cell : report.cells) {
        out << format_double(cell.s) << ',' << format_double(cell.mean_re) << ','
            << format_double(cell.se_re) << ',' << format_double(cell.mean_im) << ','
            << format_double(cell.se_im) << ',' << format_double(cell.max_identity_residual)
            << '\n';
    }
}

}  // namespace mg1probe
