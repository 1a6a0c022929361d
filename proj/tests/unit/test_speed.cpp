#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lvfb/speed.hpp"

using namespace lvfb;

namespace {

const ModelParams kRef{.d = 1, .r = 1, .a = 2, .b = 0.5, .mu = 1, .N = 1};
const XiGrid kGrid = XiGrid::with_spacing(60, 60, 0.05);

}  // namespace

TEST_CASE("analytic bracket")
{
    auto bounds = [](double r, double d, double b) {
        return s0_bounds(ModelParams{.d = d, .r = r, .a = 2, .b = b, .mu = 1, .N = 1});
    };
    CHECK(bounds(1, 1, 0).lower == doctest::Approx(2.0));
    CHECK(bounds(1, 1, 0).upper == doctest::Approx(2.0));
    CHECK(bounds(1, 1, 0.75).lower == doctest::Approx(1.0));
    CHECK(bounds(1, 1, 0.75).upper == doctest::Approx(2.0));
    CHECK(bounds(4, 1, 0.5).lower == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(bounds(4, 1, 0.5).upper == doctest::Approx(4.0));
}

TEST_CASE("minimal speed of the reference set sits at the pulled value")
{
    // pulled: s0 equals the linear speed 2 sqrt(r d (1 - b)) = sqrt(2), the
    // bottom of the bracket, so every probe inside the bracket collapses
    const auto est = estimate_s0(kRef, kGrid);
    CHECK(est.value >= est.bounds.lower - 1e-3);
    CHECK(est.value <= est.bounds.upper + 1e-3);
    CHECK(est.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));
    CHECK(est.hi - est.lo <= 1e-3);
    CHECK_FALSE(est.marginal);
    for (const auto& p : est.probes) {
        CHECK(p.verdict == ProbeVerdict::Degenerate);
    }
}

TEST_CASE("stronger competitor does not raise s0")
{
    ModelParams weak = kRef, strong = kRef;
    weak.b = 0.1;
    strong.b = 0.9;
    const auto e_weak = estimate_s0(weak, kGrid);
    const auto e_strong = estimate_s0(strong, kGrid);
    CHECK(e_strong.value <= e_weak.value + 1e-3);
    for (const auto* e : {&e_weak, &e_strong}) {
        CHECK(e->value >= e->bounds.lower - 1e-3);
        CHECK(e->value <= e->bounds.upper + 1e-3);
    }
}

TEST_CASE("decoupled case recovers the Fisher-KPP speed 2")
{
    ModelParams m = kRef;
    m.b = 0.0;
    S0Options o;
    o.search = S0Bounds{1.0, 3.0};
    const auto est = estimate_s0(m, kGrid, o);
    CHECK(std::abs(est.value - 2.0) < 0.04);
}

TEST_CASE("s_mu solves the selection identity and grows with mu")
{
    const auto s0 = estimate_s0(kRef, kGrid);
    double prev = 0.0;
    for (double mu : {0.5, 2.0, 8.0}) {
        const auto res = solve_s_mu(kRef, mu, kGrid, s0);
        CHECK(res.s_mu > prev);
        CHECK(res.s_mu < s0.value);
        CHECK(std::abs(mu * res.dpsi0 - res.s_mu) < 1e-4 * std::max(1.0, res.s_mu));
        CHECK(std::abs(res.eta_residual) < 1e-4 * std::max(1.0, res.s_mu));
        REQUIRE(res.profile);
        CHECK(res.profile->s == res.s_mu);
        prev = res.s_mu;

        // eta decreases along the trace (one part in 1e6 of its range)
        auto trace = res.trace;
        std::sort(trace.begin(), trace.end(), [](const EtaSample& x, const EtaSample& y) { return x.s < y.s; });
        const double range = trace.front().eta - trace.back().eta;
        CHECK(range > 0.0);
        for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
            if (trace[k + 1].s > trace[k].s) {
                CHECK(trace[k + 1].eta < trace[k].eta + 1e-6 * range);
            }
        }
    }
}

TEST_CASE("mu override and csv row")
{
    const auto res = solve_s_mu(kRef, kGrid, {}, 1.0);
    CHECK(res.mu == 1.0);
    CHECK(SpeedResult::csv_header() == "a,b,d,r,mu,s0_lower,s0_upper,s0_est,s_mu,eta_residual");
    std::istringstream row(res.csv_row(kRef));
    int fields = 0;
    for (std::string f; std::getline(row, f, ',');) {
        ++fields;
    }
    CHECK(fields == 10);
    CHECK_FALSE(res.trace.empty());
}

TEST_CASE("traveling wave exists above s0 and not below")
{
    const XiGrid g = XiGrid::with_spacing(60, 60, 0.1);
    const auto fast = solve_traveling_wave(kRef, 2.0, g);
    REQUIRE(std::holds_alternative<TravelingWaveProfile>(fast));
    const auto& w = std::get<TravelingWaveProfile>(fast);
    CHECK(w.Psi[g.zero_index()] == doctest::Approx(0.5));
    CHECK(w.residual < 1e-8);
    for (int j = 0; j + 1 < g.size(); ++j) {
        CHECK(w.Phi[j + 1] <= w.Phi[j] + 1e-14);
        CHECK(w.Psi[j + 1] >= w.Psi[j] - 1e-14);
    }
    CHECK(w.Phi.front() == doctest::Approx(1.0));
    CHECK(w.Psi.back() == doctest::Approx(1.0));

    const auto slow = solve_traveling_wave(kRef, 0.5, g);
    CHECK(std::holds_alternative<NoWave>(slow));
}
