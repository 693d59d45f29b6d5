#include "fbcap/synthesis.hpp"

#include "doctest.h"
#include "benchmark_values.hpp"
#include "test_helpers.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace fbcap;

namespace {

const NoiseModel& channel_b() {
    static const NoiseModel model({1.0, 0.1, 0.5});
    return model;
}

struct SolvedCase {
    FrequencyGrid grid;
    DualSolution sol;
};

const SolvedCase& channel_b_case(int h) {
    static SolvedCase cases[7];
    SolvedCase& c = cases[h];
    if (c.grid.m == 0) {
        c.grid = build_grid(40, h, channel_b());
        c.sol = solve_dual(c.grid, 10.0);
    }
    return c;
}

constexpr double kLn2 = std::numbers::ln2;

}  // namespace

TEST_CASE("recover_ab basics") {
    SUBCASE("eta = 0 makes b vanish") {
        const FrequencyGrid grid = build_grid(12, 0, channel_b());
        DualSolution sol;
        sol.point.lambda = 0.5;
        sol.point.eta.resize(0);
        sol.point.eta0 = 0.1;
        sol.point.nu.resize(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            const double r2 = r_squared(sol.point, grid.thetas(i), grid.sw(i));
            sol.point.nu(i) = 0.8 * nu_closed_form(r2, sol.point.lambda, grid.sw(i));
        }
        const SampledSpectrum spec = recover_ab(sol, grid);
        for (int i = 0; i < grid.size(); ++i) CHECK(spec.b(i) == 0.0);
        spec.check_symmetry();
    }
    SUBCASE("degenerate nu is rejected") {
        const auto& c = channel_b_case(2);
        DualSolution broken = c.sol;
        broken.point.nu(3) = 1e-15;
        CHECK_THROWS_WITH_AS(recover_ab(broken, c.grid), "degenerate dual point",
                             std::runtime_error);
    }
    SUBCASE("symmetry holds at the optimum") {
        const auto& c = channel_b_case(3);
        recover_ab(c.sol, c.grid).check_symmetry(1e-12);
    }
}

TEST_CASE("strong duality at the discretized optimum") {
    for (int h : {1, 2, 4}) {
        const auto& c = channel_b_case(h);
        const SampledSpectrum spec = recover_ab(c.sol, c.grid);
        double primal = 0.0;
        for (int i = 0; i < c.grid.size(); ++i) {
            const double re = 1.0 + spec.a(i);
            primal += std::log(re * re + spec.b(i) * spec.b(i));
        }
        primal /= 2.0 * c.grid.size();
        CHECK(std::abs(primal - (-c.sol.value_nats)) < 1e-6);

        // Complementary slackness: the power constraint is active at the optimum.
        REQUIRE(c.sol.point.lambda > 1e-6);
        CHECK(std::abs(spec.discretized_power() - 10.0) < 1e-4);
    }
}

TEST_CASE("fourier_coeffs") {
    const FrequencyGrid grid = build_grid(10, 0, channel_b());
    SampledSpectrum spec;
    spec.grid = grid;
    SUBCASE("pure first harmonic") {
        spec.a.resize(grid.size());
        spec.b.resize(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            spec.a(i) = std::cos(grid.thetas(i));
            spec.b(i) = -std::sin(grid.thetas(i));
        }
        const auto c = fourier_coeffs(spec);
        CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-13));
        for (size_t n = 1; n < c.size(); ++n) CHECK(std::abs(c[n]) < 1e-13);
    }
    SUBCASE("constant spectrum has no strictly causal content") {
        spec.a = Eigen::VectorXd::Constant(grid.size(), 0.37);
        spec.b = Eigen::VectorXd::Zero(grid.size());
        for (double cn : fourier_coeffs(spec)) CHECK(std::abs(cn) < 1e-14);
    }
    SUBCASE("matches an inverse-DFT oracle on random data") {
        test::UniformRng rng(31);
        spec.a.resize(grid.size());
        spec.b.resize(grid.size());
        // Conjugate-symmetric random samples
        spec.a(0) = rng.next(-1, 1);
        spec.b(0) = 0.0;
        spec.a(grid.m) = rng.next(-1, 1);
        spec.b(grid.m) = 0.0;
        for (int i = 1; i < grid.m; ++i) {
            spec.a(i) = rng.next(-1, 1);
            spec.b(i) = rng.next(-1, 1);
            spec.a(grid.size() - i) = spec.a(i);
            spec.b(grid.size() - i) = -spec.b(i);
        }
        const auto c = fourier_coeffs(spec);
        for (int n = 1; n <= grid.m; ++n) {
            std::complex<double> acc(0.0, 0.0);
            for (int i = 0; i < grid.size(); ++i) {
                const std::complex<double> q(spec.a(i), spec.b(i));
                acc += q * std::exp(std::complex<double>(0.0, n * grid.thetas(i)));
            }
            acc /= grid.size();
            CHECK(std::abs(acc.imag()) < 1e-12);  // real impulse response
            CHECK(c[static_cast<size_t>(n - 1)] == doctest::Approx(acc.real()).epsilon(1e-12));
        }
    }
}

TEST_CASE("power_of_filter") {
    SUBCASE("unit delay through a white channel") {
        CHECK(power_of_filter(FirFilter{{1.0}}, NoiseModel({1.0})) == doctest::Approx(1.0));
    }
    SUBCASE("scaled delay through MA(1)") {
        CHECK(power_of_filter(FirFilter{{0.5}}, NoiseModel({1.0, 0.1})) ==
              doctest::Approx(0.2525).epsilon(1e-12));
    }
    SUBCASE("matches trapezoid quadrature of |Q|^2 Sw") {
        test::UniformRng rng(17);
        const NoiseModel model({1.0, 0.3, -0.1}, {1.0, -0.4});
        for (int rep = 0; rep < 5; ++rep) {
            FirFilter fir;
            for (int k = 0; k < 12; ++k) fir.coeffs.push_back(rng.next(-0.5, 0.5));
            const double oracle = test::trapezoid_mean(
                [&](double t) { return std::norm(fir.response(t)) * eval_psd(model, t); },
                1 << 14);
            CHECK(power_of_filter(fir, model) == doctest::Approx(oracle).epsilon(1e-8));
        }
    }
}

TEST_CASE("power_scale") {
    const NoiseModel white({1.0});
    SUBCASE("already at budget") {
        const FirFilter fir = power_scale(FirFilter{{2.0}}, white, 4.0);
        CHECK(fir.coeffs[0] == doctest::Approx(2.0));
        CHECK(fir.scale == doctest::Approx(1.0));
    }
    SUBCASE("quarter budget halves the gain") {
        const FirFilter fir = power_scale(FirFilter{{2.0}}, white, 1.0);
        CHECK(fir.scale == doctest::Approx(0.5));
        CHECK(fir.coeffs[0] == doctest::Approx(1.0));
    }
    SUBCASE("post-scale power equals the budget") {
        test::UniformRng rng(3);
        FirFilter fir;
        for (int k = 0; k < 20; ++k) fir.coeffs.push_back(rng.next(-0.4, 0.4));
        const FirFilter scaled = power_scale(fir, channel_b(), 7.5);
        CHECK(std::abs(power_of_filter(scaled, channel_b()) - 7.5) < 1e-10);
    }
    SUBCASE("zero filter is rejected") {
        CHECK_THROWS_WITH_AS(power_scale(FirFilter{{0.0, 0.0}}, white, 1.0),
                             "degenerate filter, no rate", std::runtime_error);
    }
}

TEST_CASE("achievable_rate") {
    SUBCASE("zero filter") {
        CHECK(achievable_rate(FirFilter{{0.0}}) == 0.0);
    }
    SUBCASE("single NMP zero at -2 carries exactly one bit") {
        // Jensen oracle: (1/2pi) int log|1 + 2 e^{-i theta}| = log 2.
        const RateBreakdown rate = achievable_rate_detail(FirFilter{{2.0}});
        CHECK(rate.bits == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rate.quadrature_bits == doctest::Approx(1.0).epsilon(1e-8));
        REQUIRE(rate.root_route_ok);
        CHECK(*rate.nmp_root_bits == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("both routes agree on synthesized filters") {
        for (int h : {1, 2, 6}) {
            const auto& c = channel_b_case(h);
            const SynthesisResult syn = synthesize(c.sol, c.grid, channel_b(), 10.0);
            REQUIRE(syn.rate.root_route_ok);
            CHECK(std::abs(syn.rate.quadrature_bits - *syn.rate.nmp_root_bits) <= 1e-6);
        }
    }
}

TEST_CASE("synthesize reproduces the benchmark rates") {
    SUBCASE("channel A capacity") {
        const NoiseModel a({1.0, 0.1});
        const FrequencyGrid grid = build_grid(40, 6, a);
        const DualSolution sol = solve_dual(grid, 10.0);
        const SynthesisResult syn = synthesize(sol, grid, a, 10.0);
        CHECK(std::abs(syn.rate_bits - test::kChannelACapacityBits) < 5e-3);
    }
    SUBCASE("channel B lower bounds, h = 2 and h = 6") {
        {
            const auto& c = channel_b_case(2);
            const SynthesisResult syn = synthesize(c.sol, c.grid, channel_b(), 10.0);
            CHECK(std::abs(syn.rate_bits - test::kTableLower[1]) < 1e-3);
        }
        {
            const auto& c = channel_b_case(6);
            const SynthesisResult syn = synthesize(c.sol, c.grid, channel_b(), 10.0);
            const double upper = certified_upper_bound(c.sol, channel_b(), 10.0, 1e-10);
            CHECK(upper - syn.rate_bits <= 1e-4);
            CHECK(syn.rate_bits <= upper + 1e-6);
        }
    }
}

TEST_CASE("synthesized filters satisfy the power budget and the sandwich") {
    for (int h : {1, 3, 5}) {
        const auto& c = channel_b_case(h);
        const SynthesisResult syn = synthesize(c.sol, c.grid, channel_b(), 10.0);
        CHECK(power_of_filter(syn.filter, channel_b()) <= 10.0 + 1e-9);
        const double upper = certified_upper_bound(c.sol, channel_b(), 10.0, 1e-10);
        CHECK(syn.rate_bits <= upper + 1e-6);
        CHECK(static_cast<int>(syn.filter.coeffs.size()) <= c.grid.m);
    }
}
