#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "polycode/correlation.hpp"
#include "polycode/filter_design.hpp"
#include "polycode/waveforms.hpp"

using namespace polycode;

namespace {

// Random perturbation that keeps sum a_l conj(h_l) unchanged.
CVector feasible_perturbation(const PolyphaseCode& code, std::size_t n, double scale,
                              std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVector d(n);
    for (auto& v : d) v = scale * cplx{g(rng), g(rng)};
    const CVector x = center_pad(code.samples(), n);
    cplx xd{0.0, 0.0};
    double xx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        xd += std::conj(x[j]) * d[j];
        xx += std::norm(x[j]);
    }
    for (std::size_t j = 0; j < n; ++j) d[j] -= x[j] * (xd / xx);
    return d;
}

double lag_domain_isl(const PolyphaseCode& code, const CVector& h, std::size_t width) {
    return isl(cross_correlate(code.samples(), h), width);
}

}  // namespace

TEST_CASE("trivial single-sample filter") {
    const PolyphaseCode one{{0.0}, "one"};
    const auto f = min_isl_filter(one, 1, 1);
    REQUIRE(f.size() == 1);
    CHECK(std::abs(f.coefficients[0] - cplx{1.0, 0.0}) < 1e-12);
    CHECK(f.achieved_error == doctest::Approx(0.0));
}

TEST_CASE("min-ISL filter meets the constraint and beats feasible perturbations") {
    std::mt19937_64 rng(101);
    for (std::size_t width : {1u, 5u}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto code = random_unimodular(8, s);
            const auto f = min_isl_filter(code, 32, width);
            const cplx z = zero_lag_response(code, f);
            CHECK(std::abs(z - cplx{8.0, 0.0}) < 1e-9 * 8.0);
            const double e = lag_domain_isl(code, f.coefficients, width);
            CHECK(f.achieved_error == doctest::Approx(e).epsilon(1e-9));
            for (int t = 0; t < 100; ++t) {
                auto h = f.coefficients;
                const auto d = feasible_perturbation(code, 32, 1e-3, rng);
                for (std::size_t j = 0; j < 32; ++j) h[j] += d[j];
                CHECK(lag_domain_isl(code, h, width) >= e);
            }
        }
    }
}

TEST_CASE("KKT stationarity of the closed form") {
    // G h must be parallel to the constraint vector x.
    const auto code = random_unimodular(10, 4);
    const std::span<const PolyphaseCode> codes(&code, 1);
    const auto G = sidelobe_gram(codes, 0, 40, 5);
    const auto f = min_isl_filter(code, 40, 5);
    const Eigen::Map<const Eigen::VectorXcd> h(f.coefficients.data(), 40);
    const CVector xs = center_pad(code.samples(), 40);
    const Eigen::Map<const Eigen::VectorXcd> x(xs.data(), 40);
    const Eigen::VectorXcd g = G * h;
    const cplx lambda = x.dot(g) / x.squaredNorm();
    CHECK((g - lambda * x).norm() < 1e-8 * g.norm());
}

TEST_CASE("sidelobe Gram matches the convolution matrix") {
    const auto code = random_unimodular(6, 9);
    const auto cm = convolution_matrices(code, 15, 3);
    const std::span<const PolyphaseCode> codes(&code, 1);
    const Eigen::MatrixXcd ref = cm.sidelobe * cm.sidelobe.adjoint();
    CHECK((sidelobe_gram(codes, 0, 15, 3) - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("joint filter reduces to the single-code filter at M=1") {
    const auto code = random_unimodular(12, 2);
    const auto a = min_isl_filter(code, 48, 5);
    const auto b = joint_min_isl_filter(std::span<const PolyphaseCode>(&code, 1), 0, 48, 5);
    for (std::size_t j = 0; j < 48; ++j) CHECK(std::abs(a.coefficients[j] - b.coefficients[j]) < 1e-12);
}

TEST_CASE("joint filter optimality on the joint quadratic form") {
    std::mt19937_64 rng(7);
    const std::vector<PolyphaseCode> codes{random_unimodular(8, 20), random_unimodular(8, 21)};
    for (std::size_t target = 0; target < 2; ++target) {
        const auto f = joint_min_isl_filter(codes, target, 32, 5);
        const auto other = codes[1 - target];
        auto joint = [&](const CVector& h) {
            return lag_domain_isl(codes[target], h, 5) +
                   cross_correlate(other.samples(), h).energy();
        };
        const double e = joint(f.coefficients);
        CHECK(f.achieved_error == doctest::Approx(e).epsilon(1e-9));
        for (int t = 0; t < 100; ++t) {
            auto h = f.coefficients;
            const auto d = feasible_perturbation(codes[target], 32, 1e-3, rng);
            for (std::size_t j = 0; j < 32; ++j) h[j] += d[j];
            CHECK(joint(h) >= e);
        }
    }
}

TEST_CASE("joint error matches the lag-domain recomputation") {
    const std::vector<PolyphaseCode> codes{random_unimodular(6, 1), random_unimodular(6, 2)};
    const auto set = design_filter_set(codes, 10, 1);
    double ref = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        ref += lag_domain_isl(codes[i], set.filters[i].coefficients, 1);
        ref += cross_correlate(codes[1 - i].samples(), set.filters[i].coefficients).energy();
    }
    CHECK(set.joint_error == doctest::Approx(ref).epsilon(1e-9));
    CHECK(joint_error(set) == doctest::Approx(ref).epsilon(1e-9));
}

TEST_CASE("pair balance") {
    const std::vector<PolyphaseCode> codes{random_unimodular(16, 3), random_unimodular(16, 4)};
    const auto set = design_filter_set(codes, 64, 5);
    const cplx z0 = zero_lag_response(set.codes[0], set.filters[0]);
    const cplx z1 = zero_lag_response(set.codes[1], set.filters[1]);
    CHECK(std::abs(z0 - z1) < 1e-9 * std::abs(z0));
}

TEST_CASE("global phase of the code rotates the filter") {
    auto code = random_unimodular(10, 8);
    const auto f = min_isl_filter(code, 40, 5);
    const double theta = 0.73;
    for (auto& p : code.phases) p += theta;
    const auto g = min_isl_filter(code, 40, 5);
    const cplx rot = std::polar(1.0, theta);
    for (std::size_t j = 0; j < 40; ++j) CHECK(std::abs(g.coefficients[j] - rot * f.coefficients[j]) < 1e-10);
    CHECK(g.achieved_error == doctest::Approx(f.achieved_error).epsilon(1e-10));
}

TEST_CASE("longer filters never lose to the matched-length filter in PSL") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto code = random_unimodular(13, 50 + s);
        const auto a = code.samples();
        const auto short_f = min_isl_filter(code, 13, 1);
        const auto long_f = min_isl_filter(code, 130, 1);
        CHECK(psl_dbc(cross_correlate(a, long_f.coefficients), 1) <=
              psl_dbc(cross_correlate(a, short_f.coefficients), 1));
    }
}

TEST_CASE("chirp mismatched filter") {
    const auto code = chirp(2e6, 20e-6, 2e6).to_code();
    const auto f = min_isl_filter(code, 480, 5);
    const double psl = psl_dbc(cross_correlate(code.samples(), f.coefficients), 5);
    MESSAGE("chirp L=40, N_f=480 PSL = " << psl << " dBc");
    CHECK(psl <= -79.0);
}

TEST_CASE("input validation") {
    const auto code = random_unimodular(8, 1);
    CHECK_THROWS_AS(min_isl_filter(code, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(min_isl_filter(code, 16, 2), std::invalid_argument);
    const std::vector<PolyphaseCode> mixed{random_unimodular(8, 1), random_unimodular(9, 2)};
    CHECK_THROWS_AS(design_filter_set(mixed, 32, 5), std::invalid_argument);
}
