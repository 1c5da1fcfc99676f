#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mg1probe/dist_catalog.hpp"
#include "mg1probe/rng.hpp"

namespace mg1probe {

// Poisson-probed workload observations V_0,...,V_n. Zeros are exact (the
// simulator computes the level analytically between events), which the
// atom-counting estimator depends on.
struct WorkloadSample {
    std::vector<double> observations;  // V_0..V_n, all >= 0
    std::vector<double> times;         // probe epochs; empty for ingested data without them
    double lambda = 0.0;               // arrival rate
    double xi = 0.0;                   // probe rate
    double rho = 0.0;                  // lambda * E B; NaN when unknown (ingested data)
    std::uint64_t seed = 0;
    std::size_t burn_in_discarded = 0;
    std::optional<JobSizeModel> model;  // absent for externally observed data

    // Estimator index n: observations are V_0..V_n.
    std::size_t n() const { return observations.size() - 1; }

    // Wraps externally observed data; throws config_error if fewer than two
    // observations or any negative value.
    static WorkloadSample from_observations(std::vector<double> observations, double lambda,
                                            double xi);
};

// Drains the workload at unit rate over dt, clamped to an exact zero once the
// gap exceeds the level.
inline double advance_workload(double v, double dt) { return dt >= v ? 0.0 : v - dt; }

std::size_t default_burn_in(double rho);

// Event-driven simulation of the reflected compound-Poisson-minus-drift
// workload, probed by an independent Poisson(xi) clock. Starts empty and
// discards the first burn_in probe observations; returns n+1 observations.
// Arrival, probe and job-size draws come from separate substreams of `seed`,
// so each stream is reproducible in isolation.
WorkloadSample simulate(const JobSizeModel& model, double lambda, double xi, std::size_t n,
                        std::size_t burn_in, std::uint64_t seed);

double empirical_zero_fraction(const WorkloadSample& sample);
double empirical_busy_fraction(const WorkloadSample& sample);

// l(s) = s - lambda (1 - E e^{-sB}), the net-input Laplace exponent.
double lst_exponent(const JobSizeModel& model, double lambda, double s);

// psi(q) solving l(psi) = q, by bisection on [0, q + lambda] run to a
// one-ulp bracket. Requires q > 0 and a stable queue.
double psi_inverse(const JobSizeModel& model, double lambda, double q);

// phi(s) = lambda (gamma(s) - 1) - i s, the net-input characteristic exponent.
std::complex<double> characteristic_exponent(const JobSizeModel& model, double lambda, double s);

// Stationary workload CF implied by the generalized Pollaczek-Khinchine
// formula: E e^{isV} = -i s (1 - rho) / phi(s), with value 1 at s = 0.
std::complex<double> gpk_workload_cf(const JobSizeModel& model, double lambda, double s);

// Closed-form law of V_j given V_{j-1} = v_prev across one probe gap:
// conditional CF and the probability of the atom at zero.
std::complex<double> conditional_cf_oracle(const JobSizeModel& model, double lambda, double xi,
                                           double v_prev, double s);
double conditional_atom_oracle(const JobSizeModel& model, double lambda, double xi, double v_prev);

// Evolves the workload from v_prev over a fixed horizon (unit drain,
// Poisson(lambda) arrivals); MC counterpart of the conditional oracles when
// the horizon is exponential(xi).
double one_gap_transition(const JobSizeModel& model, double lambda, double v_prev, double horizon,
                          RngStream& rng);

// CSV with header index,t,V (t column omitted when times are absent).
void sample_to_csv(const WorkloadSample& sample, std::ostream& out);
WorkloadSample sample_from_csv(std::istream& in, double lambda, double xi);

nlohmann::json sample_metadata_to_json(const WorkloadSample& sample);
void apply_sample_metadata(WorkloadSample& sample, const nlohmann::json& j);

}  // namespace mg1probe
