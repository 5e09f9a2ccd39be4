#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "polycode/can_baseline.hpp"
#include "polycode/waveforms.hpp"

using namespace polycode;

namespace {

// ||R_0 - L I||^2 + 2 sum_{n>=1} ||R_n||^2 with R_n(i,k) = sum_l x_i(l+n) conj(x_k(l)).
double criterion_oracle(const std::vector<PolyphaseCode>& codes) {
    const std::size_t M = codes.size(), L = codes.front().size();
    double total = 0.0;
    for (std::size_t n = 0; n < L; ++n) {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t k = 0; k < M; ++k) {
                cplx r{0.0, 0.0};
                for (std::size_t l = 0; l + n < L; ++l)
                    r += std::polar(1.0, codes[i].phases[l + n]) * std::polar(1.0, -codes[k].phases[l]);
                if (n == 0 && i == k) r -= static_cast<double>(L);
                total += (n == 0 ? 1.0 : 2.0) * std::norm(r);
            }
    }
    return total;
}

}  // namespace

TEST_CASE("criterion matches the covariance-matrix form") {
    const std::vector<PolyphaseCode> codes{random_unimodular(7, 1), random_unimodular(7, 2),
                                           random_unimodular(7, 3)};
    CHECK(can_criterion(codes) == doctest::Approx(criterion_oracle(codes)).epsilon(1e-12));
    const std::vector<double> ones(7, 1.0);
    CHECK(can_criterion(codes, ones) == doctest::Approx(can_criterion(codes)).epsilon(1e-14));
}

TEST_CASE("CAN criterion is nonincreasing") {
    CanConfig cfg;
    cfg.M = 1;
    cfg.L = 4;
    cfg.max_cycles = 200;
    const auto r = can_design(cfg);
    for (std::size_t i = 1; i < r.criterion_trace.size(); ++i)
        CHECK(r.criterion_trace[i] <= r.criterion_trace[i - 1]);

    cfg.M = 2;
    cfg.L = 64;
    const auto r2 = can_design(cfg);
    for (std::size_t i = 1; i < r2.criterion_trace.size(); ++i)
        CHECK(r2.criterion_trace[i] <= r2.criterion_trace[i - 1]);
    CHECK(r2.criterion_trace.back() < r2.criterion_trace.front());
    CHECK(r2.criterion_trace.back() > 0.0);  // cannot be driven to zero
}

TEST_CASE("fixed seed reproducibility") {
    CanConfig cfg;
    cfg.L = 32;
    cfg.max_cycles = 50;
    const auto a = can_design(cfg), b = can_design(cfg);
    for (std::size_t m = 0; m < 2; ++m) CHECK(a.codes[m].phases == b.codes[m].phases);
    cfg.seed = 2;
    CHECK(can_design(cfg).codes[0].phases != a.codes[0].phases);
}

TEST_CASE("uniform weights reduce WeCAN to CAN") {
    CanConfig cfg;
    cfg.L = 32;
    cfg.max_cycles = 40;
    const auto can = can_design(cfg);
    cfg.gamma.assign(32, 1.0);
    const auto wecan = wecan_design(cfg);
    CHECK(wecan.criterion_trace.back() ==
          doctest::Approx(can.criterion_trace.back()).epsilon(0.05));
}

TEST_CASE("banded WeCAN decreases the weighted criterion and concentrates the low region") {
    CanConfig cfg;
    cfg.M = 2;
    cfg.L = 64;
    cfg.max_cycles = 400;
    cfg.gamma = banded_gamma(64, 10);
    const auto r = wecan_design(cfg);
    for (std::size_t i = 1; i < r.criterion_trace.size(); ++i)
        CHECK(r.criterion_trace[i] <= r.criterion_trace[i - 1]);
    CHECK(r.criterion_trace.back() < 1e-3 * r.criterion_trace.front());
}

TEST_CASE("banded weights are positive semidefinite, indefinite ones are rejected") {
    const auto g = banded_gamma(16, 4);
    CHECK(g[0] >= 1.0);
    CHECK(g[3] == 1.0);
    CHECK(g[4] == 0.0);

    CanConfig cfg;
    cfg.L = 16;
    cfg.gamma.assign(16, 0.0);
    for (std::size_t n = 0; n < 4; ++n) cfg.gamma[n] = 1.0;
    try {
        wecan_design(cfg);
        FAIL("indefinite weights accepted");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("eigenvalue") != std::string::npos);
    }
    cfg.gamma[0] = 0.0;
    CHECK_THROWS_AS(wecan_design(cfg), std::invalid_argument);
    cfg.gamma.resize(5);
    CHECK_THROWS_AS(wecan_design(cfg), std::invalid_argument);
}

TEST_CASE("matched-filter evaluation") {
    const std::vector<PolyphaseCode> one{random_unimodular(16, 1)};
    CHECK(evaluate_set_matched(one).entries.size() == 1);

    // Halves of a length-512 Chu sequence: the cross-correlation vanishes at zero lag.
    const auto chu = chu_code(512, 1);
    std::vector<PolyphaseCode> halves(2);
    halves[0].phases.assign(chu.phases.begin(), chu.phases.begin() + 256);
    halves[1].phases.assign(chu.phases.begin() + 256, chu.phases.end());
    const auto rep = evaluate_set_matched(halves);
    REQUIRE(rep.entries.size() == 4);
    const auto& cross = rep.entries[1];
    CHECK(cross.filter_index == 0);
    CHECK(cross.code_index == 1);
    CHECK(std::abs(cross.profile.zero_lag()) < 1e-9 * 256.0);

    std::stringstream ss;
    write_report_csv(rep, ss);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "pair,isl,psl_dbc");
    std::string row;
    std::getline(ss, row);
    CHECK(row.rfind("1-1,", 0) == 0);
}
