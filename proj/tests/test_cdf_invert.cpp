#include <cmath>
#include <complex>
#include <vector>

#include <doctest.h>

#include "mg1probe/cdf_invert.hpp"
#include "mg1probe/errors.hpp"

using namespace mg1probe;
using cd = std::complex<double>;

namespace {

JobSizeModel bimodal_mixture() {
    return JobSizeModel::gamma_mixture({2.0, 6.0, 1.0}, {3.5, 90.0, 0.09}, {0.6, 0.35, 0.05});
}

CfSource exact_cf(const JobSizeModel& model) {
    return [model](double s) { return cf(model, s); };
}

std::vector<double> coarse_x_grid(double max_x, double step) {
    std::vector<double> xs;
    for (double x = 0.0; x <= max_x + 1e-12; x += step) xs.push_back(x);
    return xs;
}

double sup_error(const JobSizeModel& model, const CdfEstimate& est) {
    double sup = 0.0;
    for (std::size_t i = 0; i < est.x_grid.size(); ++i)
        sup = std::max(sup, std::abs(est.values[i] - cdf(model, est.x_grid[i])));
    return sup;
}

}  // namespace

TEST_SUITE("cdf_invert") {

TEST_CASE("empty integral returns one half exactly") {
    auto src = exact_cf(JobSizeModel::exponential(1.0));
    CHECK(invert_cdf(src, 1.0, 0.0, 1024) == 0.5);
    CHECK(invert_cdf(src, 0.0, 0.0, 16) == 0.5);
}

TEST_CASE("exponential round trip at the median") {
    auto src = exact_cf(JobSizeModel::exponential(1.0));
    double g = invert_cdf(src, std::log(2.0), 200.0, 1 << 16);
    CHECK(std::abs(g - 0.5) < 5e-3);
}

TEST_CASE("unit cf reproduces the sine integral limit") {
    // cf == 1 is the point mass at 0; the integral is -Si(h x) -> -pi/2
    CfSource unit = [](double) { return cd(1.0, 0.0); };
    double g = invert_cdf(unit, 1.0, 1e4, 1 << 18);
    CHECK(std::abs(g - 1.0) < 1e-3);
}

TEST_CASE("truncation rule") {
    CHECK(choose_truncation(10000, 1.0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(choose_truncation(10000, 2.0) == doctest::Approx(4.6415888336).epsilon(1e-9));
    CHECK(choose_truncation(40000, 1.5) == doctest::Approx(8.3255320741).epsilon(1e-9));
    CHECK_THROWS_AS(choose_truncation(0, 1.0), config_error);
    CHECK_THROWS_AS(choose_truncation(100, 0.0), config_error);
}

TEST_CASE("truncation bias bound") {
    CHECK(truncation_bias_bound(1.0, 1.0, 200.0) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(truncation_bias_bound_cdf(1.0, 1.0, 200.0) ==
          doctest::Approx(0.005 / 3.14159265358979323846).epsilon(1e-12));
    CHECK(truncation_bias_bound(1.0, 1.0, 1e12) < 1e-11);
    CHECK(truncation_bias_bound(1.0, 2.0, 100.0) ==
          doctest::Approx(2.0 * truncation_bias_bound(1.0, 1.0, 100.0)).epsilon(1e-12));
    // doubling h halves the bound at eta = 1
    CHECK(truncation_bias_bound(1.0, 1.0, 50.0) ==
          doctest::Approx(2.0 * truncation_bias_bound(1.0, 1.0, 100.0)).epsilon(1e-12));
}

TEST_CASE("default panel rule") {
    CHECK(default_panels(5.0, 5.0) == 4096);
    CHECK(default_panels(200.0, 5.0) == static_cast<std::size_t>(std::ceil(64.0 * 200.0 * 6.0)));
}

TEST_CASE("exact-cf round trips within 1e-2") {
    auto xs = coarse_x_grid(5.0, 0.25);
    for (const auto& model : {JobSizeModel::exponential(1.0),
                              JobSizeModel::gamma_mixture({2.0}, {1.0}, {1.0}),
                              bimodal_mixture()}) {
        CdfEstimate est = invert_on_grid(exact_cf(model), xs, 200.0, 1 << 16, false);
        CHECK(sup_error(model, est) <= 1e-2);
    }
}

TEST_CASE("quadrature self-consistency under panel halving") {
    auto src = exact_cf(JobSizeModel::exponential(1.0));
    for (double x : {0.5, 2.0}) {
        double coarse = invert_cdf(src, x, 50.0, 1 << 13);
        double fine = invert_cdf(src, x, 50.0, 1 << 14);
        CHECK(std::abs(fine - coarse) <= 1e-4);
    }
}

TEST_CASE("bias shrinks as h grows") {
    auto xs = coarse_x_grid(5.0, 0.25);
    auto model = JobSizeModel::exponential(1.0);
    double prev = 1e9;
    for (double h : {5.0, 20.0, 80.0, 320.0}) {
        CdfEstimate est = invert_on_grid(exact_cf(model), xs, h, 1 << 16, false);
        double sup = sup_error(model, est);
        CHECK(sup <= prev + 1e-12);
        prev = sup;
    }
}

TEST_CASE("grid inversion agrees with scalar calls") {
    auto src = exact_cf(bimodal_mixture());
    std::vector<double> xs = {0.0, 0.7, 3.3};
    CdfEstimate est = invert_on_grid(src, xs, 40.0, 8192, false);
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(est.values[i] == invert_cdf(src, xs[i], 40.0, 8192));
}

TEST_CASE("clamping projects onto [0,1]") {
    // point mass at 2: raw inversion oscillates below 0 ahead of the jump
    CfSource point_mass = [](double s) { return std::polar(1.0, 2.0 * s); };
    auto xs = coarse_x_grid(1.5, 0.05);
    CdfEstimate raw = invert_on_grid(point_mass, xs, 50.0, 1 << 14, false);
    bool escapes = false;
    for (double v : raw.values) escapes = escapes || v < 0.0 || v > 1.0;
    CHECK(escapes);
    CHECK_FALSE(raw.clamped);

    CdfEstimate clamped = invert_on_grid(point_mass, xs, 50.0, 1 << 14, true);
    CHECK(clamped.clamped);
    for (double v : clamped.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("inversion near zero stays near zero") {
    CdfEstimate est =
        invert_on_grid(exact_cf(JobSizeModel::exponential(1.0)), {0.0}, 200.0, 1 << 16, false);
    CHECK(std::abs(est.values[0]) <= 5e-3);
}

TEST_CASE("pipeline inversion matches the scalar estimator path") {
    auto sample = simulate(JobSizeModel::exponential(1.0), 0.5, 1.0, 4000, 500, 6);
    const double h = 8.0, eps = 0.01;
    const std::size_t panels = 4096;
    CdfEstimate fast = invert_on_grid(sample, 0.5, eps, {0.5, 1.0, 2.0}, h, panels, false);
    CfSource scalar = [&](double s) { return estimate_gamma_eps(sample, 0.5, s, eps).value; };
    CdfEstimate slow = invert_on_grid(scalar, {0.5, 1.0, 2.0}, h, panels, false);
    for (std::size_t i = 0; i < fast.values.size(); ++i)
        CHECK(std::abs(fast.values[i] - slow.values[i]) < 1e-9);
}

TEST_CASE("errors") {
    auto src = exact_cf(JobSizeModel::exponential(1.0));
    CHECK_THROWS_AS(invert_cdf(src, -1.0, 10.0, 1024), config_error);
    CHECK_THROWS_AS(invert_cdf(src, 1.0, 10.0, 8), config_error);
    CHECK_THROWS_AS(invert_on_grid(src, {1.0, 0.5}, 10.0, 1024, false), config_error);

    CfSource broken = [](double s) {
        return s > 5.0 ? cd(std::nan(""), 0.0) : cd(1.0, 0.0);
    };
    CHECK_THROWS_AS(invert_cdf(broken, 1.0, 10.0, 1024), numeric_error);
    try {
        invert_cdf(broken, 1.0, 10.0, 1024);
    } catch (const numeric_error& e) {
        CHECK(std::string(e.what()).find("s = ") != std::string::npos);
    }
}

}  // TEST_SUITE
