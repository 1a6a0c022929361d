#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lvfb/fbsolver.hpp"

using namespace lvfb;

namespace {

const ModelParams kRef{.d = 1, .r = 1, .a = 2, .b = 0.5, .mu = 1, .N = 1};

// Scalar free-boundary problem u_t = d u_rr + r u (1 - u), h' = -mu u_r(h),
// one-dimensional, front-fixed, written out without the two-species code.
struct ScalarStefan {
    double d, r, mu;
    double h;
    std::vector<double> u;

    void step(double dt)
    {
        const int n = static_cast<int>(u.size()) - 1;
        const double dy = 1.0 / n;
        const double g = (3 * u[n] - 4 * u[n - 1] + u[n - 2]) / (2 * dy * h);
        const double hp = std::max(-mu * g, 0.0);
        const double hn = h + dt * hp;
        const double k = d / (hn * hn * dy * dy);
        // rows: A_i u_{i-1} + B_i u_i + C_i u_{i+1} = F_i
        std::vector<double> A(n + 1), B(n + 1), C(n + 1), F(n + 1);
        for (int i = 0; i < n; ++i) {
            const double c = i * dy * hp / hn / (2 * dy);
            if (i == 0) {
                B[0] = 1 + 2 * dt * k;
                C[0] = -2 * dt * k;
            } else if (c <= k) {
                A[i] = -dt * (k - c);
                B[i] = 1 + 2 * dt * k;
                C[i] = -dt * (k + c);
            } else {
                A[i] = -dt * k;
                B[i] = 1 + 2 * dt * k + 2 * dt * c;
                C[i] = -dt * (k + 2 * c);
            }
            F[i] = u[i] + dt * r * u[i] * (1 - u[i]);
        }
        B[n] = 1;
        F[n] = 0;
        for (int i = 1; i <= n; ++i) {
            const double w = A[i] / B[i - 1];
            B[i] -= w * C[i - 1];
            F[i] -= w * F[i - 1];
        }
        u[n] = F[n] / B[n];
        for (int i = n - 1; i >= 0; --i) {
            u[i] = (F[i] - C[i] * u[i + 1]) / B[i];
        }
        h = hn;
    }
};

Trajectory synthetic(double h0, double t_end, double dt, auto&& h_of_t, double u_min, double v_max, double u_max)
{
    Trajectory tr;
    tr.h0 = h0;
    for (double t = 0; t <= t_end + 1e-9; t += dt) {
        TrajectorySample s;
        s.t = t;
        s.h = h_of_t(t);
        s.u_min_compact = u_min;
        s.u_max = u_max;
        s.v_max_compact = v_max;
        tr.samples.push_back(s);
    }
    return tr;
}

}  // namespace

TEST_CASE("decoupled invader follows the scalar free-boundary oracle")
{
    ModelParams m = kRef;
    m.b = 0.0;
    m.mu = 2.0;
    auto init = InitialData::cosine_bump(3.0, 0.8, 0.0, 60.0, 200, 0.1);
    init.v0_floor = 0.0;
    FreeBoundaryState st = initial_state(init);
    ScalarStefan oracle{m.d, m.r, m.mu, init.h0, init.u0};
    const double dt = 0.02;
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        st = step(st, m, dt);
        oracle.step(dt);
        worst = std::max(worst, std::abs(st.h - oracle.h));
        for (std::size_t i = 0; i < st.u.size(); ++i) {
            worst = std::max(worst, std::abs(st.u[i] - oracle.u[i]));
        }
        REQUIRE(worst < 1e-10);
    }
    for (double v : st.v) {
        CHECK(v == 0.0);
    }
    CHECK(st.h > 3.0);
}

TEST_CASE("no invader: front stays, v is the logistic ODE")
{
    FreeBoundaryState st;
    st.h = 4.0;
    st.u.assign(101, 0.0);
    st.v.assign(301, 0.2);
    st.dr = 0.1;
    const double dt = 0.01;
    double euler = 0.2;
    for (int k = 0; k < 500; ++k) {
        st = step(st, kRef, dt);
        euler += dt * euler * (1 - euler);
        CHECK(st.dhdt == 0.0);
    }
    CHECK(st.h == 4.0);
    const double exact = 1.0 / (1.0 + 4.0 * std::exp(-5.0));
    for (double v : st.v) {
        CHECK(v == doctest::Approx(euler).epsilon(1e-12));
        CHECK(std::abs(v - exact) < 5e-3);
    }
}

TEST_CASE("front never retreats and bad states are refused")
{
    auto init = InitialData::cosine_bump(5.0, 1.0, 1.0, 80.0);
    FreeBoundaryState st = initial_state(init);
    for (int k = 0; k < 200; ++k) {
        const double h = st.h;
        st = step(st, kRef, 0.01);
        CHECK(st.h >= h);
    }

    FreeBoundaryState bad = initial_state(init);
    bad.u[bad.u.size() - 2] = -0.5;
    CHECK_THROWS_AS(step(bad, kRef, 0.01), InvariantViolation);

    FreeBoundaryState hot = initial_state(init);
    for (std::size_t i = 0; i + 1 < hot.u.size(); ++i) {
        hot.u[i] = 0.5;
    }
    std::fill(hot.v.begin(), hot.v.end(), 0.0);
    CHECK_THROWS_AS(step(hot, kRef, 10.0), StabilityError);
    CHECK_THROWS_AS(step(hot, kRef, 0.0), DomainError);
}

TEST_CASE("initial data validation")
{
    auto ok = InitialData::cosine_bump(5.0, 1.0, 1.0, 50.0);
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.R_max() == doctest::Approx(50.0));

    auto a = ok;
    a.u0.back() = 0.1;
    CHECK_THROWS_AS(a.validate(), DomainError);
    auto b = ok;
    b.u0[10] = 0.0;
    CHECK_THROWS_AS(b.validate(), DomainError);
    auto c = ok;
    c.u0[0] = 0.5;
    CHECK_THROWS_AS(c.validate(), DomainError);
    auto d = ok;
    std::fill(d.v0.begin(), d.v0.end(), 0.0);
    CHECK_THROWS_AS(d.validate(), DomainError);
    d.v0_floor = 0.0;
    CHECK_NOTHROW(d.validate());
    auto e = ok;
    e.v0[3] = -1e-3;
    CHECK_THROWS_AS(e.validate(), DomainError);
    auto f = ok;
    f.h0 = 0.0;
    CHECK_THROWS_AS(f.validate(), DomainError);
}

TEST_CASE("simulate refuses a v-domain the front could reach")
{
    const auto init = InitialData::cosine_bump(5.0, 1.0, 1.0, 100.0);
    CHECK_THROWS_AS(simulate(init, kRef, 100.0), DomainError);
}

TEST_CASE("first order in dt")
{
    const double T = 10.0;
    const auto init = InitialData::cosine_bump(5.0, 1.0, 1.0, 5.0 + 2.0 * T + 30.0);
    double h[3];
    for (int k = 0; k < 3; ++k) {
        SimulationOptions o;
        o.dt = 0.04 / (1 << k);
        h[k] = simulate(init, kRef, T, o).final_state->h;
    }
    const double ratio = (h[0] - h[1]) / (h[1] - h[2]);
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.5);
}

TEST_CASE("spreading and vanishing runs")
{
    SimulationOptions o;
    o.snapshot_times = {50.0};
    const auto init = InitialData::cosine_bump(5.0, 1.0, 1.0, 5.0 + 200.0 + 30.0, 200, 0.2);
    const auto tr = simulate(init, kRef, 100.0, o);
    CHECK(classify_outcome(tr) == Outcome::Spreading);
    CHECK(tr.counters.total() == 0);
    CHECK(tr.counters.steps == 10000);
    for (std::size_t k = 0; k + 1 < tr.samples.size(); ++k) {
        CHECK(tr.samples[k + 1].t > tr.samples[k].t);
        CHECK(tr.samples[k + 1].h >= tr.samples[k].h);
    }
    REQUIRE(tr.snapshots.size() == 1);
    const auto& snap = tr.snapshots[0];
    CHECK(snap.t == doctest::Approx(50.0));
    for (std::size_t j = 0; j < snap.r.size(); ++j) {
        if (snap.r[j] >= snap.h) {
            CHECK(snap.u[j] == 0.0);
        }
    }

    ModelParams inferior = kRef;
    inferior.a = 0.5;
    inferior.b = 2.0;
    const auto tv = simulate(init, inferior, 100.0);
    CHECK(classify_outcome(tv) == Outcome::Vanishing);
    CHECK(tv.samples.back().u_max < 1e-3);
    CHECK(tv.samples.back().v_min_compact > 0.95);
}

TEST_CASE("classification of constructed trajectories")
{
    auto vanish = synthetic(5.0, 100.0, 0.5, [](double) { return 5.0; }, 0.0, 1.0, 1e-6);
    CHECK(classify_outcome(vanish) == Outcome::Vanishing);

    auto spread = synthetic(5.0, 10.0, 0.1, [](double t) { return 2 * t + 5; }, 1.0, 0.0, 1.0);
    // min_duration is 20 by default
    ClassifyThresholds th;
    th.min_duration = 5.0;
    CHECK(classify_outcome(spread, th) == Outcome::Spreading);

    auto short_run = synthetic(5.0, 2.0, 0.1, [](double t) { return 5 + 0.1 * t; }, 0.5, 0.5, 0.5);
    CHECK(classify_outcome(short_run) == Outcome::Undetermined);
    auto ambiguous = synthetic(5.0, 50.0, 0.5, [](double t) { return 5 + 0.01 * t; }, 0.5, 0.5, 0.5);
    CHECK(classify_outcome(ambiguous) == Outcome::Undetermined);
    CHECK(to_string(Outcome::Spreading) == "Spreading");
}

TEST_CASE("speed fits")
{
    auto tr = synthetic(5.0, 400.0, 0.5, [](double t) { return 2 * t + 5 + std::log1p(t); }, 1, 0, 1);
    const auto fit = measure_speed(tr, 0.5);
    CHECK(fit.slope > 1.99);
    CHECK(fit.slope < 2.01);

    auto lin = synthetic(5.0, 10.0, 0.5, [](double t) { return 3 * t + 1; }, 1, 0, 1);
    const auto exact = measure_speed(lin, 0.5);
    CHECK(exact.slope == doctest::Approx(3.0));
    CHECK(exact.stderr_ < 1e-12);

    auto tiny = synthetic(5.0, 1.0, 0.5, [](double t) { return t; }, 1, 0, 1);
    CHECK_THROWS_AS(measure_speed(tiny, 0.5), DomainError);
}

TEST_CASE("state built from a semi-wave compares to zero error")
{
    SemiWaveProfile prof;
    prof.grid = XiGrid::with_spacing(30, 30, 0.05);
    const int n = prof.grid.size();
    prof.phi.resize(n);
    prof.psi.resize(n);
    for (int j = 0; j < n; ++j) {
        const double xi = prof.grid.xi(j);
        prof.phi[j] = 1.0 / (1.0 + std::exp(xi));
        prof.psi[j] = xi > 0 ? std::tanh(xi) : 0.0;
    }
    FreeBoundaryState st;
    st.h = 20.0;
    st.dr = 0.1;
    st.u.resize(401);
    st.v.resize(601);
    for (int i = 0; i <= 400; ++i) {
        st.u[i] = std::tanh(st.h - st.h * i / 400.0);
    }
    for (int j = 0; j <= 600; ++j) {
        const double xi = std::clamp(st.h - 0.1 * j, -30.0, 30.0);
        st.v[j] = 1.0 / (1.0 + std::exp(xi));
    }
    const auto err = compare_with_semiwave(st, prof);
    CHECK(err.u_error < 1e-12);
    CHECK(err.v_error < 1e-12);
    CHECK(err.R_cmp == doctest::Approx(50.0));
}

TEST_CASE("csv writers")
{
    const auto init = InitialData::cosine_bump(5.0, 1.0, 1.0, 60.0, 50, 0.5);
    SimulationOptions o;
    o.snapshot_times = {1.0};
    const auto tr = simulate(init, kRef, 2.0, o);
    const auto dir = std::filesystem::temp_directory_path();
    write_front_csv(tr, (dir / "lvfb_front.csv").string());
    write_snapshot_csv(tr.snapshots.at(0), (dir / "lvfb_snap.csv").string());
    std::ifstream f(dir / "lvfb_front.csv"), s(dir / "lvfb_snap.csv");
    std::string hf, hs;
    std::getline(f, hf);
    std::getline(s, hs);
    CHECK(hf == "t,h,dhdt,h_over_t");
    CHECK(hs == "r,u,v");
}
