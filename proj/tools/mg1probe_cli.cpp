// mg1probe command-line front end: simulate Poisson-probed M/G/1 workload
// samples, estimate the job-size CF and CDF from them, run the joint
// arrival-rate estimator, and drive the Monte-Carlo experiment harness.
// Every run writes its outputs plus a manifest (config, hash, resolved
// defaults) into a run directory; identical config and seed reproduce the
// output files byte for byte.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mg1probe/cdf_invert.hpp"
#include "mg1probe/cf_estim.hpp"
#include "mg1probe/csv.hpp"
#include "mg1probe/dist_catalog.hpp"
#include "mg1probe/errors.hpp"
#include "mg1probe/harness.hpp"
#include "mg1probe/joint_lambda.hpp"
#include "mg1probe/mg1_sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mg1probe;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path.string());
    json j;
    in >> j;
    return j;
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path.string());
    out << content;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const json& resolved, const std::vector<std::string>& outputs) {
    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["config_hash"] = fnv1a_hex(config.dump());
    manifest["resolved"] = resolved;
    manifest["outputs"] = outputs;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

std::vector<double> make_grid(double lo, double hi, double step, const char* what) {
    if (!(step > 0.0) || hi < lo) throw config_error(std::string(what) + ": bad grid range");
    std::vector<double> grid;
    for (std::size_t i = 0;; ++i) {
        double v = lo + step * static_cast<double>(i);
        if (v > hi + 0.5 * step) break;
        grid.push_back(v);
    }
    return grid;
}

// Loads a sample CSV plus (optionally) its metadata sidecar; explicit flags
// override sidecar values.
WorkloadSample load_sample(const std::string& sample_path, const std::string& meta_path,
                           double lambda_flag, double xi_flag) {
    std::ifstream in(sample_path);
    if (!in) throw config_error("cannot open sample " + sample_path);

    json meta;
    fs::path meta_file = meta_path.empty()
                             ? fs::path(sample_path).replace_extension(".meta.json")
                             : fs::path(meta_path);
    bool have_meta = fs::exists(meta_file);
    if (have_meta) meta = load_json_file(meta_file);

    double lambda = lambda_flag > 0.0 ? lambda_flag
                    : have_meta       ? meta.value("lambda", 0.0)
                                      : 0.0;
    double xi = xi_flag > 0.0 ? xi_flag : have_meta ? meta.value("xi", 0.0) : 0.0;
    if (!(lambda > 0.0))
        throw config_error("lambda unknown: pass --lambda or provide a metadata sidecar");
    if (!(xi > 0.0)) throw config_error("xi unknown: pass --xi or provide a metadata sidecar");

    WorkloadSample sample = sample_from_csv(in, lambda, xi);
    if (have_meta) {
        apply_sample_metadata(sample, meta);
        if (lambda_flag > 0.0) sample.lambda = lambda_flag;
        if (xi_flag > 0.0) sample.xi = xi_flag;
    }
    return sample;
}

struct SampleFlags {
    std::string sample_path;
    std::string meta_path;
    double lambda = 0.0;
    double xi = 0.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--sample", sample_path, "workload sample CSV (index,t,V)")->required();
        cmd->add_option("--meta", meta_path, "metadata sidecar JSON (default: <sample>.meta.json)");
        cmd->add_option("--lambda", lambda, "arrival rate (overrides sidecar)");
        cmd->add_option("--xi", xi, "probe rate (overrides sidecar)");
    }
};

int run_simulate(const std::string& config_path, std::uint64_t seed_flag, bool seed_set,
                 std::size_t n_flag, std::size_t burn_in_flag, bool burn_in_set,
                 const std::string& out) {
    json config = load_json_file(config_path);
    JobSizeModel model = model_from_json(config.at("model"));
    double lambda = config.at("lambda").get<double>();
    double xi = config.at("xi").get<double>();
    std::size_t n = n_flag ? n_flag : config.at("n").get<std::size_t>();
    std::uint64_t seed = seed_set ? seed_flag : config.value("seed", std::uint64_t{0});
    double rho = lambda * mean(model);
    std::size_t burn_in = burn_in_set          ? burn_in_flag
                          : config.contains("burn_in") ? config.at("burn_in").get<std::size_t>()
                                                       : default_burn_in(rho);

    WorkloadSample sample = simulate(model, lambda, xi, n, burn_in, seed);

    fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    sample_to_csv(sample, csv);
    write_text_file(dir / "sample.csv", csv.str());
    write_text_file(dir / "sample.meta.json", sample_metadata_to_json(sample).dump(2) + "\n");

    json materialized = config;
    materialized["n"] = n;
    materialized["seed"] = seed;
    materialized["burn_in"] = burn_in;
    json resolved;
    resolved["rho"] = rho;
    resolved["zero_fraction"] = empirical_zero_fraction(sample);
    write_manifest(dir, "simulate", materialized, resolved,
                   {"sample.csv", "sample.meta.json"});
    std::cout << "simulate: n=" << n << " rho=" << rho << " -> " << (dir / "sample.csv").string()
              << "\n";
    return 0;
}

int run_estimate_cf(const SampleFlags& sf, const std::string& epsilon_arg, double s_min,
                    double s_max, double s_step, const std::string& out) {
    WorkloadSample sample = load_sample(sf.sample_path, sf.meta_path, sf.lambda, sf.xi);
    double epsilon =
        epsilon_arg == "auto" ? choose_epsilon(sample) : parse_double(epsilon_arg);
    std::vector<double> grid = make_grid(s_min, s_max, s_step, "s grid");
    CfEstimate est = cf_on_grid(sample, sample.lambda, epsilon, grid);

    fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    cf_estimate_to_csv(est, csv);
    write_text_file(dir / "cf.csv", csv.str());

    json config = {{"sample", sf.sample_path}, {"lambda", sample.lambda}, {"xi", sample.xi},
                   {"epsilon", epsilon_arg},   {"s_min", s_min},          {"s_max", s_max},
                   {"s_step", s_step}};
    json resolved = {{"epsilon", epsilon}, {"n", sample.n()}};
    write_manifest(dir, "estimate-cf", config, resolved, {"cf.csv"});
    std::cout << "estimate-cf: n=" << sample.n() << " epsilon=" << epsilon << " -> "
              << (dir / "cf.csv").string() << "\n";
    return 0;
}

int run_estimate_cdf(const SampleFlags& sf, double h_flag, double eta_flag,
                     const std::string& epsilon_arg, std::size_t panels_flag, double x_min,
                     double x_max, double x_step, bool clamp, const std::string& out) {
    WorkloadSample sample = load_sample(sf.sample_path, sf.meta_path, sf.lambda, sf.xi);
    double h = h_flag;
    if (h <= 0.0) {
        if (!(eta_flag > 0.0)) throw config_error("estimate-cdf: pass --h or --eta");
        h = choose_truncation(sample.n(), eta_flag);
    }
    double epsilon =
        epsilon_arg == "auto" ? choose_epsilon(sample) : parse_double(epsilon_arg);
    std::size_t panels = panels_flag ? panels_flag : default_panels(h, x_max);
    std::vector<double> x_grid = make_grid(x_min, x_max, x_step, "x grid");
    CdfEstimate est = invert_on_grid(sample, sample.lambda, epsilon, x_grid, h, panels, clamp);

    fs::path dir = prepare_out_dir(out);
    std::ostringstream csv;
    cdf_estimate_to_csv(est, csv);
    write_text_file(dir / "cdf.csv", csv.str());

    json config = {{"sample", sf.sample_path}, {"lambda", sample.lambda}, {"xi", sample.xi},
                   {"h", h_flag},              {"eta", eta_flag},         {"epsilon", epsilon_arg},
                   {"panels", panels_flag},    {"x_min", x_min},          {"x_max", x_max},
                   {"x_step", x_step},         {"clamp", clamp}};
    json resolved = {{"h", h}, {"panels", panels}, {"epsilon", epsilon}, {"n", sample.n()}};
    write_manifest(dir, "estimate-cdf", config, resolved, {"cdf.csv"});
    std::cout << "estimate-cdf: n=" << sample.n() << " h=" << h << " panels=" << panels << " -> "
              << (dir / "cdf.csv").string() << "\n";
    return 0;
}

int run_joint(const SampleFlags& sf, double h_flag, double eta_flag, double k_flag, double tol,
              std::size_t max_iter, double omega, double lambda0, bool no_accelerate,
              const std::string& epsilon_arg, const std::string& out) {
    WorkloadSample sample = load_sample(sf.sample_path, sf.meta_path,
                                        sf.lambda > 0.0 ? sf.lambda : 1.0, sf.xi);
    double h = h_flag;
    if (h <= 0.0) {
        if (!(eta_flag > 0.0)) throw config_error("joint: pass --h or --eta");
        h = choose_truncation(sample.n(), eta_flag);
    }
    double k = k_flag > 0.0 ? k_flag : choose_outer_truncation(sample);

    JointOptions options;
    options.tol = tol;
    options.max_iter = max_iter;
    options.omega = omega;
    options.lambda0 = lambda0;
    options.accelerate = !no_accelerate;
    if (epsilon_arg != "auto") options.epsilon = parse_double(epsilon_arg);

    JointEstimate est = estimate_joint(sample, h, k, options);

    fs::path dir = prepare_out_dir(out);
    json result = {{"lambda_hat", est.lambda_hat},
                   {"converged", est.converged},
                   {"iterations", est.iterations},
                   {"residual", est.residual},
                   {"k", est.k},
                   {"h", h}};
    write_text_file(dir / "joint.json", result.dump(2) + "\n");
    std::ostringstream csv;
    cdf_estimate_to_csv(est.cdf, csv);
    write_text_file(dir / "cdf.csv", csv.str());

    json config = {{"sample", sf.sample_path}, {"xi", sample.xi},          {"h", h_flag},
                   {"eta", eta_flag},          {"k", k_flag},              {"tol", tol},
                   {"max_iter", max_iter},     {"omega", omega},           {"lambda0", lambda0},
                   {"accelerate", !no_accelerate}, {"epsilon", epsilon_arg}};
    json resolved = {{"h", h},
                     {"k", k},
                     {"epsilon", options.epsilon > 0.0 ? options.epsilon : choose_epsilon(sample)},
                     {"panels_s", default_panels(h, k)},
                     {"panels_x", default_x_panels(k, h)},
                     {"lambda0", options.lambda0 > 0.0 ? options.lambda0 : sample.xi},
                     {"busy_fraction", empirical_busy_fraction(sample)}};
    write_manifest(dir, "joint", config, resolved, {"joint.json", "cdf.csv"});
    std::cout << "joint: lambda_hat=" << est.lambda_hat << " converged=" << est.converged
              << " iterations=" << est.iterations << " -> " << (dir / "joint.json").string()
              << "\n";
    return 0;
}

json resolved_for_experiment(const ExperimentSpec& spec) {
    json resolved;
    resolved["burn_in"] = spec.burn_in_for();
    resolved["epsilon_rule"] =
        spec.epsilon_rule == EpsilonRule::Auto ? "auto (cap 0.01)" : "fixed";
    if (spec.type == "cdf-risk") {
        resolved["eta"] = spec.resolved_eta();
        json per_n = json::array();
        for (std::size_t n : spec.n_grid) {
            double h = spec.h_for(n);
            per_n.push_back({{"n", n},
                             {"h", h},
                             {"panels", spec.panels ? spec.panels
                                                    : default_panels(h, spec.x_grid.back())}});
        }
        resolved["per_n"] = per_n;
    }
    if (spec.type == "figure") {
        json per_h = json::array();
        for (double h : spec.h_list)
            per_h.push_back({{"h", h},
                             {"panels", spec.panels ? spec.panels
                                                    : default_panels(h, spec.x_grid.back())}});
        resolved["per_h"] = per_h;
    }
    return resolved;
}

int run_experiment(const std::string& config_path, const std::string& out, std::size_t threads,
                   std::uint64_t seed_base, bool seed_set) {
    json config = load_json_file(config_path);
    ExperimentSpec spec = spec_from_json(config);
    if (threads) spec.threads = threads;
    if (seed_set) spec.seed_base = seed_base;

    fs::path dir = prepare_out_dir(out);
    std::vector<std::string> outputs;
    double runtime = 0.0;

    if (spec.type == "cf-mse" || spec.type == "cdf-risk") {
        RiskReport report = spec.type == "cf-mse" ? mc_cf_mse(spec) : mc_cdf_risk(spec);
        std::ostringstream mse_csv, slope_csv;
        risk_report_to_csv(report, spec.type == "cf-mse" ? "s" : "x", mse_csv);
        slopes_to_csv(report, slope_csv);
        write_text_file(dir / "mse.csv", mse_csv.str());
        write_text_file(dir / "slopes.csv", slope_csv.str());
        outputs = {"mse.csv", "slopes.csv"};
        runtime = report.runtime_seconds;
        for (const auto& [name, fit] : report.fitted_slopes)
            std::cout << name << ": slope=" << fit.slope << " stderr=" << fit.stderr_ << "\n";
    } else if (spec.type == "figure") {
        FigureReport report = reproduce_figure(spec);
        std::ostringstream true_csv;
        true_csv << "x,G_true\n";
        for (std::size_t i = 0; i < report.x_grid.size(); ++i)
            true_csv << format_double(report.x_grid[i]) << ','
                     << format_double(report.g_true[i]) << '\n';
        write_text_file(dir / "g_true.csv", true_csv.str());
        outputs.push_back("g_true.csv");
        for (const auto& [h, curve] : report.curves) {
            std::ostringstream curve_csv;
            curve_csv << "x,G_hat\n";
            for (std::size_t i = 0; i < report.x_grid.size(); ++i)
                curve_csv << format_double(report.x_grid[i]) << ',' << format_double(curve[i])
                          << '\n';
            std::string name = "curve_h" + format_double(h) + ".csv";
            write_text_file(dir / name, curve_csv.str());
            outputs.push_back(name);
        }
        std::ostringstream sup_csv;
        sup_csv << "h,median_sup_error\n";
        for (const auto& [h, err] : report.median_sup_error) {
            sup_csv << format_double(h) << ',' << format_double(err) << '\n';
            std::cout << "h=" << h << ": median sup error " << err << "\n";
        }
        write_text_file(dir / "sup_errors.csv", sup_csv.str());
        outputs.push_back("sup_errors.csv");
        runtime = report.runtime_seconds;
    } else if (spec.type == "martingale") {
        MartingaleReport report = martingale_diagnostic(spec);
        std::ostringstream csv;
        martingale_report_to_csv(report, csv);
        write_text_file(dir / "martingale.csv", csv.str());
        outputs = {"martingale.csv"};
        runtime = report.runtime_seconds;
        for (const MartingaleCell& cell : report.cells)
            std::cout << "s=" << cell.s << ": mean=(" << cell.mean_re << "," << cell.mean_im
                      << ") max residual " << cell.max_identity_residual << "\n";
    } else {
        throw config_error("experiment: unknown type \"" + spec.type + "\"");
    }

    write_manifest(dir, "experiment", spec_to_json(spec), resolved_for_experiment(spec), outputs);
    std::cout << "experiment " << spec.type << " done in " << runtime << " s -> " << dir.string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Poisson-probed M/G/1 workload simulator and job-size CDF estimator"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a probed workload sample");
    std::string sim_config, sim_out = "run";
    std::uint64_t sim_seed = 0;
    std::size_t sim_n = 0, sim_burn_in = 0;
    sim->add_option("--config", sim_config, "JSON: {model, lambda, xi, n, [burn_in], [seed]}")
        ->required();
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "seed override");
    sim->add_option("--n", sim_n, "sample size override");
    auto* sim_burn_opt = sim->add_option("--burn-in", sim_burn_in, "burn-in override");
    sim->add_option("--out", sim_out, "output directory");

    // estimate-cf
    auto* ecf = app.add_subcommand("estimate-cf", "estimate the job-size CF on an s grid");
    SampleFlags ecf_sample;
    ecf_sample.attach(ecf);
    std::string ecf_eps = "auto", ecf_out = "run";
    double ecf_smin = 0.0, ecf_smax = 10.0, ecf_sstep = 0.01;
    ecf->add_option("--epsilon", ecf_eps, "truncation epsilon or 'auto'");
    ecf->add_option("--s-min", ecf_smin, "grid start");
    ecf->add_option("--s-max", ecf_smax, "grid end");
    ecf->add_option("--s-step", ecf_sstep, "grid step");
    ecf->add_option("--out", ecf_out, "output directory");

    // estimate-cdf
    auto* ecdf = app.add_subcommand("estimate-cdf", "invert the estimated CF into the CDF");
    ecdf->set_help_flag("--help", "print help");  // frees -h/--h for the truncation flag
    SampleFlags ecdf_sample;
    ecdf_sample.attach(ecdf);
    std::string ecdf_eps = "auto", ecdf_out = "run";
    double ecdf_h = 0.0, ecdf_eta = 0.0;
    std::size_t ecdf_panels = 0;
    double ecdf_xmin = 0.0, ecdf_xmax = 5.0, ecdf_xstep = 0.05;
    bool ecdf_clamp = false;
    ecdf->add_option("--h", ecdf_h, "integration truncation h");
    ecdf->add_option("--eta", ecdf_eta, "smoothness parameter; sets h = n^(1/(2(1+eta)))");
    ecdf->add_option("--epsilon", ecdf_eps, "truncation epsilon or 'auto'");
    ecdf->add_option("--panels", ecdf_panels, "quadrature panels (default: auto)");
    ecdf->add_option("--x-min", ecdf_xmin, "grid start");
    ecdf->add_option("--x-max", ecdf_xmax, "grid end");
    ecdf->add_option("--x-step", ecdf_xstep, "grid step");
    ecdf->add_flag("--clamp", ecdf_clamp, "project values onto [0,1]");
    ecdf->add_option("--out", ecdf_out, "output directory");

    // joint
    auto* jnt = app.add_subcommand("joint", "jointly estimate the arrival rate and CDF");
    jnt->set_help_flag("--help", "print help");
    SampleFlags jnt_sample;
    jnt_sample.attach(jnt);
    std::string jnt_eps = "auto", jnt_out = "run";
    double jnt_h = 0.0, jnt_eta = 0.0, jnt_k = 0.0, jnt_tol = 1e-6, jnt_omega = 0.5,
           jnt_lambda0 = 0.0;
    std::size_t jnt_max_iter = 100;
    bool jnt_no_accel = false;
    jnt->add_option("--h", jnt_h, "integration truncation h");
    jnt->add_option("--eta", jnt_eta, "smoothness parameter; sets h = n^(1/(2(1+eta)))");
    jnt->add_option("--k", jnt_k, "outer truncation (default: auto from the sample)");
    jnt->add_option("--tol", jnt_tol, "relative-step stopping tolerance");
    jnt->add_option("--max-iter", jnt_max_iter, "iteration cap");
    jnt->add_option("--omega", jnt_omega, "fixed-point damping");
    jnt->add_option("--lambda0", jnt_lambda0, "initial guess (default: xi)");
    jnt->add_flag("--no-accelerate", jnt_no_accel, "disable Aitken acceleration");
    jnt->add_option("--epsilon", jnt_eps, "truncation epsilon or 'auto'");
    jnt->add_option("--out", jnt_out, "output directory");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a Monte-Carlo experiment");
    std::string exp_config, exp_out = "run";
    std::size_t exp_threads = 0;
    std::uint64_t exp_seed = 0;
    exp->add_option("--config", exp_config, "experiment spec JSON")->required();
    exp->add_option("--out", exp_out, "output directory");
    exp->add_option("--threads", exp_threads, "worker threads (default: hardware)");
    auto* exp_seed_opt = exp->add_option("--seed-base", exp_seed, "seed base override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (sim->parsed())
            return run_simulate(sim_config, sim_seed, sim_seed_opt->count() > 0, sim_n,
                                sim_burn_in, sim_burn_opt->count() > 0, sim_out);
        if (ecf->parsed())
            return run_estimate_cf(ecf_sample, ecf_eps, ecf_smin, ecf_smax, ecf_sstep, ecf_out);
        if (ecdf->parsed())
            return run_estimate_cdf(ecdf_sample, ecdf_h, ecdf_eta, ecdf_eps, ecdf_panels,
                                    ecdf_xmin, ecdf_xmax, ecdf_xstep, ecdf_clamp, ecdf_out);
        if (jnt->parsed())
            return run_joint(jnt_sample, jnt_h, jnt_eta, jnt_k, jnt_tol, jnt_max_iter, jnt_omega,
                             jnt_lambda0, jnt_no_accel, jnt_eps, jnt_out);
        if (exp->parsed())
            return run_experiment(exp_config, exp_out, exp_threads, exp_seed,
                                  exp_seed_opt->count() > 0);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
