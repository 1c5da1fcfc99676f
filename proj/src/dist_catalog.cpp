#include "mg1probe/dist_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "mg1probe/errors.hpp"

namespace mg1probe {

namespace {

constexpr double kQuadTol = 1e-8;
constexpr double kTailMass = 1e-10;  // quadrature truncates at the 1 - kTailMass quantile

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

// Upper integration limit covering all but kTailMass of the law.
double quad_upper(const JobSizeModel& m) {
    boost::math::normal_distribution<double> std_normal;
    switch (m.kind) {
        case JobSizeKind::LogNormal: {
            double z = boost::math::quantile(std_normal, 1.0 - kTailMass);
            return std::exp(m.mu + m.sigma * z);
        }
        case JobSizeKind::TruncatedNormal: {
            double z = boost::math::quantile(std_normal, 1.0 - kTailMass / 2.0);
            return std::abs(m.mu) + m.sigma * z;
        }
        default:
            throw numeric_error("quad_upper: closed-form kind");
    }
}

template <typename F>
double integrate(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        std::forward<F>(f), a, b, 12, kQuadTol);
}

void require(bool ok, const char* msg) {
    if (!ok) throw config_error(msg);
}

}  // namespace

JobSizeModel JobSizeModel::gamma_mixture(std::vector<double> alpha, std::vector<double> beta,
                                         std::vector<double> p) {
    JobSizeModel m;
    m.kind = JobSizeKind::GammaMixture;
    m.alpha = std::move(alpha);
    m.beta = std::move(beta);
    m.p = std::move(p);
    m.validate();
    return m;
}

JobSizeModel JobSizeModel::exponential(double rate) {
    JobSizeModel m;
    m.kind = JobSizeKind::Exponential;
    m.beta = {rate};
    m.validate();
    return m;
}

JobSizeModel JobSizeModel::log_normal(double mu, double sigma) {
    JobSizeModel m;
    m.kind = JobSizeKind::LogNormal;
    m.mu = mu;
    m.sigma = sigma;
    m.validate();
    return m;
}

JobSizeModel JobSizeModel::truncated_normal(double mu, double sigma) {
    JobSizeModel m;
    m.kind = JobSizeKind::TruncatedNormal;
    m.mu = mu;
    m.sigma = sigma;
    m.validate();
    return m;
}

void JobSizeModel::validate() const {
    switch (kind) {
        case JobSizeKind::GammaMixture: {
            require(!alpha.empty(), "gamma mixture: empty parameter vectors");
            require(alpha.size() == beta.size() && alpha.size() == p.size(),
                    "gamma mixture: alpha, beta, p must have equal length");
            for (std::size_t j = 0; j < alpha.size(); ++j) {
                require(alpha[j] > 0.0 && beta[j] > 0.0 && p[j] > 0.0,
                        "gamma mixture: parameters must be positive");
            }
            double total = std::accumulate(p.begin(), p.end(), 0.0);
            require(std::abs(total - 1.0) <= 1e-9, "gamma mixture: weights must sum to 1");
            break;
        }
        case JobSizeKind::Exponential:
            require(beta.size() == 1 && beta[0] > 0.0, "exponential: rate must be positive");
            break;
        case JobSizeKind::LogNormal:
        case JobSizeKind::TruncatedNormal:
            require(sigma > 0.0, "sigma must be positive");
            break;
    }
    require(eta >= 0.0, "eta must be positive when set");
}

std::complex<double> cf(const JobSizeModel& model, double s) {
    if (s == 0.0) return {1.0, 0.0};
    using cd = std::complex<double>;
    switch (model.kind) {
        case JobSizeKind::Exponential: {
            double b = model.beta[0];
            return b / cd(b, -s);
        }
        case JobSizeKind::GammaMixture: {
            // Principal-branch power; beta - is stays in the right half plane
            // for beta > 0, so the branch is continuous in s.
            cd acc{0.0, 0.0};
            for (std::size_t j = 0; j < model.alpha.size(); ++j) {
                acc += model.p[j] * std::pow(model.beta[j] / cd(model.beta[j], -s), model.alpha[j]);
            }
            return acc;
        }
        case JobSizeKind::LogNormal:
        case JobSizeKind::TruncatedNormal: {
            double upper = quad_upper(model);
            double re = integrate([&](double x) { return std::cos(s * x) * pdf(model, x); }, 0.0, upper);
            double im = integrate([&](double x) { return std::sin(s * x) * pdf(model, x); }, 0.0, upper);
            return {re, im};
        }
    }
    throw config_error("cf: unknown kind");
}

double cdf(const JobSizeModel& model, double x) {
    if (x < 0.0) throw config_error("cdf: x must be nonnegative");
    if (x == 0.0) return 0.0;
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return -std::expm1(-model.beta[0] * x);
        case JobSizeKind::GammaMixture: {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.alpha.size(); ++j) {
                acc += model.p[j] * boost::math::gamma_p(model.alpha[j], model.beta[j] * x);
            }
            return acc;
        }
        case JobSizeKind::LogNormal:
            return normal_cdf((std::log(x) - model.mu) / model.sigma);
        case JobSizeKind::TruncatedNormal:
            return normal_cdf((x - model.mu) / model.sigma) - normal_cdf((-x - model.mu) / model.sigma);
    }
    throw config_error("cdf: unknown kind");
}

double pdf(const JobSizeModel& model, double x) {
    if (x < 0.0) throw config_error("pdf: x must be nonnegative");
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return model.beta[0] * std::exp(-model.beta[0] * x);
        case JobSizeKind::GammaMixture: {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.alpha.size(); ++j) {
                double a = model.alpha[j], b = model.beta[j];
                if (x == 0.0) {
                    if (a < 1.0) return std::numeric_limits<double>::infinity();
                    acc += (a == 1.0) ? model.p[j] * b : 0.0;
                    continue;
                }
                double log_term = a * std::log(b) + (a - 1.0) * std::log(x) - b * x - std::lgamma(a);
                acc += model.p[j] * std::exp(log_term);
            }
            return acc;
        }
        case JobSizeKind::LogNormal:
            if (x == 0.0) return 0.0;
            return normal_pdf((std::log(x) - model.mu) / model.sigma) / (x * model.sigma);
        case JobSizeKind::TruncatedNormal:
            return (normal_pdf((x - model.mu) / model.sigma) +
                    normal_pdf((x + model.mu) / model.sigma)) /
                   model.sigma;
    }
    throw config_error("pdf: unknown kind");
}

double laplace(const JobSizeModel& model, double s) {
    if (s < 0.0) throw config_error("laplace: s must be nonnegative");
    if (s == 0.0) return 1.0;
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return model.beta[0] / (model.beta[0] + s);
        case JobSizeKind::GammaMixture: {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.alpha.size(); ++j) {
                acc += model.p[j] * std::pow(model.beta[j] / (model.beta[j] + s), model.alpha[j]);
            }
            return acc;
        }
        case JobSizeKind::LogNormal:
        case JobSizeKind::TruncatedNormal: {
            double upper = quad_upper(model);
            return integrate([&](double x) { return std::exp(-s * x) * pdf(model, x); }, 0.0, upper);
        }
    }
    throw config_error("laplace: unknown kind");
}

double mean(const JobSizeModel& model) {
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return 1.0 / model.beta[0];
        case JobSizeKind::GammaMixture: {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.alpha.size(); ++j)
                acc += model.p[j] * model.alpha[j] / model.beta[j];
            return acc;
        }
        case JobSizeKind::LogNormal:
            return std::exp(model.mu + 0.5 * model.sigma * model.sigma);
        case JobSizeKind::TruncatedNormal: {
            double upper = quad_upper(model);
            return integrate([&](double x) { return x * pdf(model, x); }, 0.0, upper);
        }
    }
    throw config_error("mean: unknown kind");
}

double moment3(const JobSizeModel& model) {
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return 6.0 / std::pow(model.beta[0], 3);
        case JobSizeKind::GammaMixture: {
            double acc = 0.0;
            for (std::size_t j = 0; j < model.alpha.size(); ++j) {
                double a = model.alpha[j], b = model.beta[j];
                acc += model.p[j] * a * (a + 1.0) * (a + 2.0) / (b * b * b);
            }
            return acc;
        }
        case JobSizeKind::LogNormal:
            return std::exp(3.0 * model.mu + 4.5 * model.sigma * model.sigma);
        case JobSizeKind::TruncatedNormal: {
            double upper = quad_upper(model);
            return integrate([&](double x) { return x * x * x * pdf(model, x); }, 0.0, upper);
        }
    }
    throw config_error("moment3: unknown kind");
}

double smoothness_eta(const JobSizeModel& model) {
    if (model.eta > 0.0) return model.eta;
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return 1.0;
        case JobSizeKind::GammaMixture:
            return *std::min_element(model.alpha.begin(), model.alpha.end());
        case JobSizeKind::LogNormal:
            return 2.0;
        case JobSizeKind::TruncatedNormal:
            return 8.0;
    }
    throw config_error("smoothness_eta: unknown kind");
}

double sample(const JobSizeModel& model, RngStream& rng) {
    switch (model.kind) {
        case JobSizeKind::Exponential:
            return rng.exponential(model.beta[0]);
        case JobSizeKind::GammaMixture: {
            double u = rng.uniform01();
            std::size_t j = 0;
            double acc = model.p[0];
            while (j + 1 < model.p.size() && u > acc) acc += model.p[++j];
            return rng.gamma(model.alpha[j], model.beta[j]);
        }
        case JobSizeKind::LogNormal:
            return rng.lognormal(model.mu, model.sigma);
        case JobSizeKind::TruncatedNormal:
            return std::abs(rng.normal(model.mu, model.sigma));
    }
    throw config_error("sample: unknown kind");
}

double tail_constant(const JobSizeModel& model) {
    if (model.kind != JobSizeKind::GammaMixture && model.kind != JobSizeKind::Exponential)
        throw config_error("tail_constant: defined for gamma mixtures");
    if (model.kind == JobSizeKind::Exponential) return model.beta[0] + 1.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < model.alpha.size(); ++j)
        acc += model.p[j] * std::pow(model.beta[j], model.alpha[j]);
    return acc + 1.0;
}

std::string kind_name(JobSizeKind kind) {
    switch (kind) {
        case JobSizeKind::GammaMixture:
            return "gamma_mixture";
        case JobSizeKind::LogNormal:
            return "lognormal";
        case JobSizeKind::TruncatedNormal:
            return "truncated_normal";
        case JobSizeKind::Exponential:
            return "exponential";
    }
    return "unknown";
}

JobSizeModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw config_error("model: expected an object with a \"kind\" field");
    std::string kind = j.at("kind").get<std::string>();
    JobSizeModel m;
    if (kind == "gamma_mixture") {
        m = JobSizeModel::gamma_mixture(j.at("alpha").get<std::vector<double>>(),
                                        j.at("beta").get<std::vector<double>>(),
                                        j.at("p").get<std::vector<double>>());
    } else if (kind == "exponential") {
        m = JobSizeModel::exponential(j.at("beta").get<double>());
    } else if (kind == "lognormal") {
        m = JobSizeModel::log_normal(j.at("mu").get<double>(), j.at("sigma").get<double>());
    } else if (kind == "truncated_normal") {
        m = JobSizeModel::truncated_normal(j.at("mu").get<double>(), j.at("sigma").get<double>());
    } else {
        throw config_error("model: unknown kind \"" + kind + "\"");
    }
    if (j.contains("eta")) {
        m.eta = j.at("eta").get<double>();
        if (m.eta <= 0.0) throw config_error("model: eta must be positive");
    }
    return m;
}

nlohmann::json model_to_json(const JobSizeModel& model) {
    nlohmann::json j;
    j["kind"] = kind_name(model.kind);
    switch (model.kind) {
        case JobSizeKind::GammaMixture:
            j["alpha"] = model.alpha;
            j["beta"] = model.beta;
            j["p"] = model.p;
            break;
        case JobSizeKind::Exponential:
            j["beta"] = model.beta[0];
            break;
        case JobSizeKind::LogNormal:
        case JobSizeKind::TruncatedNormal:
            j["mu"] = model.mu;
            j["sigma"] = model.sigma;
            break;
    }
    if (model.eta > 0.0) j["eta"] = model.eta;
    return j;
}

}  // namespace mg1probe
