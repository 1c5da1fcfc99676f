#include "mg1probe/mg1_sim.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "mg1probe/csv.hpp"
#include "mg1probe/errors.hpp"

namespace mg1probe {

WorkloadSample WorkloadSample::from_observations(std::vector<double> observations, double lambda,
                                                 double xi) {
    if (observations.size() < 2)
        throw config_error("sample: need at least two observations (V_0 and V_1)");
    for (double v : observations) {
        if (!(v >= 0.0)) throw config_error("sample: observations must be nonnegative");
    }
    if (!(lambda > 0.0) || !(xi > 0.0)) throw config_error("sample: lambda and xi must be positive");
    WorkloadSample s;
    s.observations = std::move(observations);
    s.lambda = lambda;
    s.xi = xi;
    s.rho = std::numeric_limits<double>::quiet_NaN();
    return s;
}

std::size_t default_burn_in(double rho) {
    double ergodic = std::ceil(20.0 / (1.0 - rho));
    return static_cast<std::size_t>(std::max(1000.0, ergodic));
}

WorkloadSample simulate(const JobSizeModel& model, double lambda, double xi, std::size_t n,
                        std::size_t burn_in, std::uint64_t seed) {
    model.validate();
    if (!(lambda > 0.0)) throw config_error("simulate: lambda must be positive");
    if (!(xi > 0.0)) throw config_error("simulate: xi must be positive");
    if (n < 2) throw config_error("simulate: need n >= 2 probe observations past V_0");
    const double rho = lambda * mean(model);
    if (!(rho < 1.0))
        throw config_error("simulate: unstable configuration, lambda * E B = " +
                           std::to_string(rho) + " >= 1");

    RngStream arrivals = RngStream::substream(seed, 1);
    RngStream probes = RngStream::substream(seed, 2);
    RngStream jobs = RngStream::substream(seed, 3);

    WorkloadSample out;
    out.observations.reserve(n + 1);
    out.times.reserve(n + 1);
    out.lambda = lambda;
    out.xi = xi;
    out.rho = rho;
    out.seed = seed;
    out.burn_in_discarded = burn_in;
    out.model = model;

    double t_event = 0.0;  // time of the last processed event
    double v = 0.0;        // workload right after that event
    double next_arrival = arrivals.exponential(lambda);
    double next_probe = probes.exponential(xi);
    std::size_t discarded = 0;

    while (out.observations.size() < n + 1) {
        if (next_arrival <= next_probe) {
            v = advance_workload(v, next_arrival - t_event) + sample(model, jobs);
            t_event = next_arrival;
            next_arrival += arrivals.exponential(lambda);
        } else {
            v = advance_workload(v, next_probe - t_event);
            t_event = next_probe;
            if (discarded < burn_in) {
                ++discarded;
            } else {
                out.observations.push_back(v);
                out.times.push_back(t_event);
            }
            next_probe += probes.exponential(xi);
        }
    }
    return out;
}

double empirical_zero_fraction(const WorkloadSample& sample) {
    if (sample.observations.empty()) throw config_error("zero_fraction: empty sample");
    std::size_t zeros = 0;
    for (double v : sample.observations) zeros += (v == 0.0);
    return static_cast<double>(zeros) / static_cast<double>(sample.observations.size());
}

double empirical_busy_fraction(const WorkloadSample& sample) {
    return 1.0 - empirical_zero_fraction(sample);
}

double lst_exponent(const JobSizeModel& model, double lambda, double s) {
    if (s < 0.0) throw config_error("lst_exponent: s must be nonnegative");
    if (s == 0.0) return 0.0;
    return s - lambda * (1.0 - laplace(model, s));
}

double psi_inverse(const JobSizeModel& model, double lambda, double q) {
    if (!(q > 0.0)) throw config_error("psi_inverse: q must be positive");
    if (!(lambda * mean(model) < 1.0)) throw config_error("psi_inverse: requires rho < 1");
    // l(s) >= s - lambda, so [0, q + lambda] always brackets the root; l is
    // convex increasing, making plain bisection robust arbitrarily close to
    // criticality. Run to a one-ulp bracket.
    double lo = 0.0;
    double hi = q + lambda;
    if (lst_exponent(model, lambda, hi) < q)
        throw numeric_error("psi_inverse: bracket failure at q = " + std::to_string(q));
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (lst_exponent(model, lambda, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

std::complex<double> characteristic_exponent(const JobSizeModel& model, double lambda, double s) {
    return lambda * (cf(model, s) - 1.0) - std::complex<double>(0.0, s);
}

std::complex<double> gpk_workload_cf(const JobSizeModel& model, double lambda, double s) {
    if (s == 0.0) return {1.0, 0.0};
    std::complex<double> phi = characteristic_exponent(model, lambda, s);
    double rho = lambda * mean(model);
    return std::complex<double>(0.0, -s) * (1.0 - rho) / phi;
}

double conditional_atom_oracle(const JobSizeModel& model, double lambda, double xi, double v_prev) {
    if (v_prev < 0.0) throw config_error("conditional_atom_oracle: v_prev must be nonnegative");
    double psi_xi = psi_inverse(model, lambda, xi);
    return xi * std::exp(-psi_xi * v_prev) / psi_xi;
}

std::complex<double> conditional_cf_oracle(const JobSizeModel& model, double lambda, double xi,
                                           double v_prev, double s) {
    if (s == 0.0) return {1.0, 0.0};
    std::complex<double> phi = characteristic_exponent(model, lambda, s);
    double atom = conditional_atom_oracle(model, lambda, xi, v_prev);
    std::complex<double> is{0.0, s};
    return (xi / (xi - phi)) * (std::exp(is * v_prev) + is / xi * atom);
}

double one_gap_transition(const JobSizeModel& model, double lambda, double v_prev, double horizon,
                          RngStream& rng) {
    double t = 0.0;
    double v = v_prev;
    double next_arrival = rng.exponential(lambda);
    while (next_arrival <= horizon) {
        v = advance_workload(v, next_arrival - t) + sample(model, rng);
        t = next_arrival;
        next_arrival += rng.exponential(lambda);
    }
    return advance_workload(v, horizon - t);
}

void sample_to_csv(const WorkloadSample& sample, std::ostream& out) {
    const bool with_times = sample.times.size() == sample.observations.size();
    out << (with_times ? "index,t,V\n" : "index,V\n");
    for (std::size_t i = 0; i < sample.observations.size(); ++i) {
        out << i;
        if (with_times) out << ',' << format_double(sample.times[i]);
        out << ',' << format_double(sample.observations[i]) << '\n';
    }
}

WorkloadSample sample_from_csv(std::istream& in, double lambda, double xi) {
    std::string line;
    if (!std::getline(in, line)) throw config_error("sample csv: empty file");
    auto header = split_csv_line(line);
    std::size_t v_col;
    bool with_times = false;
    if (header.size() == 3 && header[0] == "index" && header[1] == "t" && header[2] == "V") {
        v_col = 2;
        with_times = true;
    } else if (header.size() == 2 && header[0] == "index" && header[1] == "V") {
        v_col = 1;
    } else {
        throw config_error("sample csv: expected header index,t,V or index,V");
    }
    std::vector<double> obs, times;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw config_error("sample csv: wrong field count at row " + std::to_string(row));
        obs.push_back(parse_double(fields[v_col]));
        if (with_times) times.push_back(parse_double(fields[1]));
        ++row;
    }
    WorkloadSample s = WorkloadSample::from_observations(std::move(obs), lambda, xi);
    s.times = std::move(times);
    return s;
}

nlohmann::json sample_metadata_to_json(const WorkloadSample& sample) {
    nlohmann::json j;
    j["lambda"] = sample.lambda;
    j["xi"] = sample.xi;
    if (std::isfinite(sample.rho)) j["rho"] = sample.rho;
    j["seed"] = sample.seed;
    j["burn_in_discarded"] = sample.burn_in_discarded;
    j["n"] = sample.n();
    if (sample.model) j["model"] = model_to_json(*sample.model);
    return j;
}

void apply_sample_metadata(WorkloadSample& sample, const nlohmann::json& j) {
    if (j.contains("lambda")) sample.lambda = j.at("lambda").get<double>();
    if (j.contains("xi")) sample.xi = j.at("xi").get<double>();
    if (j.contains("rho")) sample.rho = j.at("rho").get<double>();
    if (j.contains("seed")) sample.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("burn_in_discarded"))
        sample.burn_in_discarded = j.at("burn_in_discarded").get<std::size_t>();
    if (j.contains("model")) sample.model = model_from_json(j.at("model"));
}

}  // namespace mg1probe
