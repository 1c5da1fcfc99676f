#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mg1probe/rng.hpp"

namespace mg1probe {

enum class JobSizeKind { GammaMixture, LogNormal, TruncatedNormal, Exponential };

// A job-size law: exact CDF, characteristic function gamma(s) = E e^{isB},
// sampler, moments and the polynomial tail-decay exponent eta of |gamma|.
//
// Conventions: gamma-mixture beta entries are rate parameters (component mean
// alpha/beta, CF term (beta/(beta-is))^alpha); the truncated normal is the
// absolute value of a N(mu, sigma^2) variable.
struct JobSizeModel {
    JobSizeKind kind = JobSizeKind::Exponential;
    std::vector<double> alpha;  // GammaMixture shapes
    std::vector<double> beta;   // GammaMixture rates (Exponential: beta[0])
    std::vector<double> p;      // GammaMixture weights, sum to 1
    double mu = 0.0;            // LogNormal / TruncatedNormal location
    double sigma = 0.0;         // LogNormal / TruncatedNormal scale
    double eta = 0.0;           // smoothness override; 0 means kind default

    static JobSizeModel gamma_mixture(std::vector<double> alpha, std::vector<double> beta,
                                      std::vector<double> p);
    static JobSizeModel exponential(double rate);
    static JobSizeModel log_normal(double mu, double sigma);
    static JobSizeModel truncated_normal(double mu, double sigma);

    // Throws config_error on invalid parameters.
    void validate() const;

    bool operator==(const JobSizeModel&) const = default;
};

// gamma(s) = E e^{isB}. Exactly 1 at s = 0; hermitian in s; |cf| <= 1.
// Closed form for gamma mixtures, adaptive quadrature against the density for
// log-normal and truncated normal (abs tol 1e-8, upper limit at the
// 1 - 1e-10 quantile).
std::complex<double> cf(const JobSizeModel& model, double s);

// G(x) = P(B <= x); throws config_error for x < 0.
double cdf(const JobSizeModel& model, double x);

// Density g(x) on x >= 0.
double pdf(const JobSizeModel& model, double x);

// Laplace transform E e^{-sB}, s >= 0. Real-valued counterpart of cf.
double laplace(const JobSizeModel& model, double s);

double mean(const JobSizeModel& model);
double moment3(const JobSizeModel& model);

// Tail-decay exponent: min alpha for gamma mixtures, 2 for log-normal,
// configured value (default 8) for the truncated normal whose CF decays
// faster than any polynomial.
double smoothness_eta(const JobSizeModel& model);

// One draw from G; always strictly positive for these continuous laws.
double sample(const JobSizeModel& model, RngStream& rng);

// Witness constant for the tail bound |cf(s)| s^eta <= C0 of gamma mixtures.
double tail_constant(const JobSizeModel& model);

std::string kind_name(JobSizeKind kind);

JobSizeModel model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const JobSizeModel& model);

}  // namespace mg1probe
