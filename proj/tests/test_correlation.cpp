#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "polycode/correlation.hpp"
#include "polycode/fft.hpp"
#include "polycode/waveforms.hpp"

using namespace polycode;

namespace {

CVector random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (auto& x : v) x = {g(rng), g(rng)};
    return v;
}

// Textbook double loop over padded operands.
CVector brute_force(const CVector& a, const CVector& b) {
    const std::size_t N = std::max(a.size(), b.size());
    const CVector pa = center_pad(a, N), pb = center_pad(b, N);
    const auto n = static_cast<std::ptrdiff_t>(N);
    CVector out;
    for (std::ptrdiff_t m = -(n - 1); m <= n - 1; ++m) {
        cplx acc{0.0, 0.0};
        for (std::ptrdiff_t i = 0; i < n; ++i)
            if (i + m >= 0 && i + m < n)
                acc += pa[static_cast<std::size_t>(i)] * std::conj(pb[static_cast<std::size_t>(i + m)]);
        out.push_back(acc);
    }
    return out;
}

double max_abs_diff(const CVector& x, const CVector& y) {
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
    return d;
}

double max_abs(const CVector& x) {
    double d = 0.0;
    for (const auto& v : x) d = std::max(d, std::abs(v));
    return d;
}

}  // namespace

TEST_CASE("hand-evaluated correlations") {
    const CVector ones(4, cplx{1.0, 0.0});
    const auto p = cross_correlate(ones, ones);
    const std::vector<double> tri{1, 2, 3, 4, 3, 2, 1};
    REQUIRE(p.values.size() == 7);
    CHECK(p.zero_lag_index == 3);
    for (std::size_t i = 0; i < 7; ++i) CHECK(std::abs(p.values[i] - cplx{tri[i], 0.0}) < 1e-12);

    const CVector a{{1.0, 0.0}, {0.0, 1.0}};
    const auto q = cross_correlate(a, a);
    CHECK(std::abs(q.at_lag(-1) - cplx{0.0, 1.0}) < 1e-12);
    CHECK(std::abs(q.at_lag(0) - cplx{2.0, 0.0}) < 1e-12);
    CHECK(std::abs(q.at_lag(1) - cplx{0.0, -1.0}) < 1e-12);

    CHECK_THROWS_AS(cross_correlate(CVector{}, a), std::invalid_argument);
}

TEST_CASE("direct and FFT paths against the brute-force oracle") {
    std::mt19937_64 rng(42);
    for (std::size_t trial = 0; trial < 20; ++trial) {
        const std::size_t la = 1 + rng() % 8, lb = 1 + rng() % 8;
        const auto a = random_complex(la, rng), b = random_complex(lb, rng);
        CHECK(max_abs_diff(cross_correlate(a, b).values, brute_force(a, b)) < 1e-12);
    }
    for (std::size_t n : {1u, 7u, 64u, 65u, 200u, 480u, 512u}) {
        const auto a = random_complex(n, rng);
        const auto b = random_complex(std::max<std::size_t>(1, n / 3), rng);
        for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}, std::pair{a, a}}) {
            const auto d = cross_correlate_direct(x, y).values;
            const auto f = cross_correlate_fft(x, y).values;
            CHECK(max_abs_diff(d, f) <= 1e-10 * max_abs(d));
        }
    }
}

TEST_CASE("conjugate symmetry and reversal identity") {
    std::mt19937_64 rng(5);
    const auto a = random_unimodular(33, 1).samples();
    const auto b = random_complex(90, rng);
    const auto aa = cross_correlate(a, a);
    const auto ab = cross_correlate(a, b), ba = cross_correlate(b, a);
    const auto n = static_cast<std::ptrdiff_t>(aa.zero_lag_index);
    for (std::ptrdiff_t m = -n; m <= n; ++m)
        CHECK(std::abs(aa.at_lag(-m) - std::conj(aa.at_lag(m))) < 1e-10);
    const auto nb = static_cast<std::ptrdiff_t>(ab.zero_lag_index);
    for (std::ptrdiff_t m = -nb; m <= nb; ++m)
        CHECK(std::abs(ab.at_lag(m) - std::conj(ba.at_lag(-m))) < 1e-10);
}

TEST_CASE("Parseval consistency with the zero-padded DFT") {
    std::mt19937_64 rng(9);
    for (std::size_t n : {5u, 40u, 300u}) {
        const auto a = random_complex(n, rng), b = random_complex(n, rng);
        const double lag_energy = cross_correlate(a, b).energy();
        const std::size_t K = 2 * n;
        const auto A = fft::forward(a, K), B = fft::forward(b, K);
        double spec = 0.0;
        for (std::size_t k = 0; k < K; ++k) spec += std::norm(A[k]) * std::norm(B[k]);
        spec /= static_cast<double>(K);
        CHECK(std::abs(lag_energy - spec) <= 1e-9 * spec);
    }
}

TEST_CASE("isl and psl") {
    const CVector two(2, cplx{1.0, 0.0});
    const auto p = cross_correlate(two, two);
    CHECK(isl(p, 1) == doctest::Approx(2.0));
    CHECK(isl(p, 3) == doctest::Approx(0.0));
    CHECK(psl_dbc(p, 1) == doctest::Approx(20.0 * std::log10(0.5)));
    CHECK_THROWS_AS(isl(p, 2), std::invalid_argument);

    CorrelationProfile impulse;
    impulse.values = CVector(9, cplx{0.0, 0.0});
    impulse.zero_lag_index = 4;
    impulse.values[4] = 5.0;
    impulse.normalization = 5.0;
    CHECK(isl(impulse, 1) == 0.0);
    CHECK(std::isinf(psl_dbc(impulse, 1)));
    CHECK(psl_dbc(impulse, 1) < 0.0);

    CorrelationProfile dead = impulse;
    dead.values[4] = 0.0;
    dead.normalization = 0.0;
    CHECK_THROWS_AS(psl_dbc(dead, 1), DegenerateInput);
}

TEST_CASE("convolution matrix reproduces correlation") {
    const auto x1 = convolution_matrices(PolyphaseCode{{0.0}, "one"}, 1, 1);
    CHECK(x1.full.rows() == 1);
    CHECK(x1.full.cols() == 1);
    CHECK(std::abs(x1.full(0, 0) - cplx{1.0, 0.0}) < 1e-15);
    CHECK(x1.sidelobe.cols() == 0);

    const auto code = random_unimodular(5, 3);
    const auto cm = convolution_matrices(code, 12, 5);
    CHECK(cm.full.rows() == 12);
    CHECK(cm.full.cols() == 23);
    CHECK(cm.sidelobe.cols() == 23 - 5);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 10; ++t) {
        const auto h = random_complex(12, rng);
        const Eigen::Map<const Eigen::VectorXcd> hv(h.data(), 12);
        const Eigen::RowVectorXcd out = hv.adjoint() * cm.full;
        const auto ref = cross_correlate(code.samples(), h);
        double err = 0.0;
        for (Eigen::Index m = 0; m < out.size(); ++m)
            err = std::max(err, std::abs(out(m) - ref.values[static_cast<std::size_t>(m)]));
        CHECK(err < 1e-12);
    }
    CHECK_THROWS_AS(convolution_matrices(code, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(convolution_matrices(code, 12, 4), std::invalid_argument);
}

TEST_CASE("profile CSV round trip") {
    std::mt19937_64 rng(23);
    const auto p = cross_correlate(random_complex(10, rng), random_complex(7, rng));
    std::stringstream ss;
    write_profile_csv(p, ss);
    const auto q = read_profile_csv(ss);
    CHECK(q.zero_lag_index == p.zero_lag_index);
    CHECK(q.values == p.values);
    CHECK(q.normalization == doctest::Approx(p.normalization).epsilon(1e-12));
}
