// One line per acceptance criterion; exit status is nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lvfb/fbsolver.hpp"
#include "lvfb/harness.hpp"
#include "lvfb/semiwave.hpp"
#include "lvfb/speed.hpp"

using namespace lvfb;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const ModelParams kRef{.d = 1, .r = 1, .a = 2, .b = 0.5, .mu = 1, .N = 1};
const XiGrid kGrid = XiGrid::with_spacing(60, 60, 0.05);

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const char* name, Verdict& v)
{
    std::printf("criterion %d %-28s %s %s\n", id, name, v.pass ? "PASS" : "FAIL", v.detail.str().c_str());
    std::fflush(stdout);
    failures += !v.pass;
}

// Evidence for criterion 9, gathered by every run below.
struct InvariantLedger {
    long sim_steps = 0;
    long sim_violations = 0;
    long relaxations = 0;
    long relax_violations = 0;

    void add(const Trajectory& t)
    {
        sim_steps += t.counters.steps;
        sim_violations += t.counters.total();
    }
    void add(const RelaxDiagnostics& d)
    {
        ++relaxations;
        relax_violations += d.monotone_violations;
    }
    void add_report(const Report& r)
    {
        if (auto v = r.metric("invariant_violations")) {
            sim_violations += static_cast<long>(*v);
        }
        if (auto v = r.metric("relax_monotone_violations")) {
            relax_violations += static_cast<long>(*v);
        }
    }
} ledger;

std::vector<SpeedResult> roots;  // every returned s_mu, for criterion 3

void criterion1()
{
    Verdict v;
    const auto t0 = Clock::now();
    std::mt19937 gen(20261018);
    std::uniform_real_distribution<double> A(1.2, 4.0), B(0.05, 0.95), D(0.25, 2.5), R(0.25, 2.5);
    int inside = 0, marginal = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
        ModelParams m;
        m.a = A(gen);
        m.b = B(gen);
        m.d = D(gen);
        m.r = R(gen);
        const S0Bounds b = s0_bounds(m);
        const S0Options o;
        const S0Estimate est = estimate_s0(m, kGrid, o);
        worst = std::max(worst, std::max(b.lower - est.value, est.value - b.upper));
        const bool ok = est.value >= b.lower - o.tol_s && est.value <= b.upper + o.tol_s;
        inside += ok;
        marginal += est.marginal;
        if (!ok) {
            std::ostringstream w;
            w << "set " << k << " s0=" << est.value << " outside [" << b.lower << ", " << b.upper << "]";
            v.require(false, w.str());
        }
    }
    const double elapsed = seconds_since(t0);
    v.require(elapsed <= 600.0, "runtime above 10 min");
    v.detail << inside << "/20 inside, worst signed excursion " << worst << ", marginal " << marginal << ", "
             << elapsed << " s";
    report(1, "analytic bracket", v);
}

void criterion2()
{
    Verdict v;
    const auto t0 = Clock::now();
    ModelParams m = kRef;
    m.b = 0.0;
    S0Options o;
    o.search = S0Bounds{1.0, 3.0};
    const S0Estimate est = estimate_s0(m, kGrid, o);
    v.require(std::abs(est.value - 2.0) <= 0.04, "s0 not within 2% of 2");

    RelaxOptions ro;
    ro.tol = 1e-11;
    const auto out = relax_semiwave(m, 0.0, {}, kGrid.refined(4), ro);
    double dpsi0 = std::numeric_limits<double>::quiet_NaN();
    if (const auto* p = std::get_if<SemiWaveProfile>(&out)) {
        dpsi0 = p->dpsi0;
        ledger.add(p->diagnostics);
    }
    const double oracle = 1.0 / std::sqrt(3.0);
    v.require(std::abs(dpsi0 - oracle) < 1e-3, "dpsi0(0) off the first-integral value");
    const double elapsed = seconds_since(t0);
    v.require(elapsed <= 60.0, "runtime above 1 min");
    v.detail << "s0=" << est.value << " dpsi0(0)=" << dpsi0 << " (1/sqrt3=" << oracle << "), " << elapsed << " s";
    report(2, "KPP reduction", v);
}

S0Estimate ref_s0;
std::vector<SpeedResult> sweep;

void run_sweep()
{
    ref_s0 = estimate_s0(kRef, kGrid);
    for (double mu : {0.1, 1.0, 10.0, 100.0}) {
        sweep.push_back(solve_s_mu(kRef, mu, kGrid, ref_s0));
        roots.push_back(sweep.back());
        if (sweep.back().profile) {
            ledger.add(sweep.back().profile->diagnostics);
        }
    }
}

void criterion4()
{
    Verdict v;
    bool increasing = true;
    for (std::size_t k = 0; k + 1 < sweep.size(); ++k) {
        increasing = increasing && sweep[k + 1].s_mu > sweep[k].s_mu;
    }
    v.require(increasing, "s_mu not strictly increasing in mu");
    const double ratio = sweep.back().s_mu / ref_s0.value;
    v.require(ratio > 0.9, "s_mu(100) <= 0.9 s0_est");

    // (b) profiles along increasing s, each relaxed from the previous one
    const double speeds[] = {0.0, 0.3, 0.6, 0.9, 1.2, 1.35};
    std::vector<SemiWaveProfile> chain;
    for (double s : speeds) {
        const SemiWaveProfile* warm = chain.empty() ? nullptr : &chain.back();
        auto out = relax_semiwave(kRef, s, {}, kGrid, {}, warm);
        if (auto* p = std::get_if<SemiWaveProfile>(&out)) {
            ledger.add(p->diagnostics);
            chain.push_back(std::move(*p));
        } else {
            v.require(false, "no profile in the ordering chain");
            break;
        }
    }
    long order_violations = 0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
        const auto& p1 = chain[k];
        const auto& p2 = chain[k + 1];
        for (std::size_t j = 0; j < p1.psi.size(); ++j) {
            order_violations += p1.psi[j] < p2.psi[j] - eps * std::abs(p2.psi[j]);
            order_violations += p1.phi[j] > p2.phi[j] + eps * std::abs(p2.phi[j]);
        }
        order_violations += !(p1.dpsi0 > p2.dpsi0);
    }
    v.require(order_violations == 0, "profile ordering broken");
    v.detail << "s_mu(mu=0.1,1,10,100) =";
    for (const auto& r : sweep) {
        v.detail << ' ' << r.s_mu;
    }
    v.detail << "; s_mu(100)/s0_est=" << ratio << "; ordering violations " << order_violations << " over "
             << chain.size() << " profiles";
    report(4, "monotonicity", v);
}

Report headline;

void criterion5()
{
    Verdict v;
    const auto t0 = Clock::now();
    ExperimentSpec spec;
    spec.scenario = Scenario::SpreadingVerification;
    spec.model = kRef;
    spec.grid = kGrid;
    spec.h0 = 5.0;
    spec.t_end = 200.0;
    headline = run(spec);
    ledger.add_report(headline);
    const double gap = headline.metric("gap").value_or(std::numeric_limits<double>::infinity());
    v.require(headline.status == "Spreading", "outcome " + headline.status);
    v.require(gap < 0.05, "relative speed gap >= 5%");
    const double elapsed = seconds_since(t0);
    v.require(elapsed <= 900.0, "runtime above 15 min");
    v.detail << headline.status << " slope=" << headline.metric("slope").value_or(NAN)
             << " s_mu=" << headline.metric("s_mu").value_or(NAN) << " gap=" << gap << ", " << elapsed << " s";
    report(5, "headline spreading speed", v);
}

void criterion3()
{
    Verdict v;
    double worst = 0.0;
    for (const auto& r : roots) {
        const double rel = std::abs(r.mu * r.dpsi0 - r.s_mu) / std::max(1.0, r.s_mu);
        worst = std::max(worst, rel);
    }
    // the headline run solves its own root
    if (auto eta = headline.metric("eta_residual")) {
        worst = std::max(worst, std::abs(*eta) / std::max(1.0, headline.metric("s_mu").value_or(1.0)));
    }
    v.require(worst < 1e-4, "selection identity residual");
    v.detail << roots.size() + 1 << " roots, worst |mu dpsi0 - s|/max(1,s) = " << worst;
    report(3, "selection identity", v);
}

void criterion6()
{
    Verdict v;
    const double T = 200.0;
    ModelParams inferior = kRef;
    inferior.a = 0.5;
    inferior.b = 2.0;
    const auto init_small = InitialData::cosine_bump(5.0, 1.0, 1.0, 5.0 + 2.0 * T + 30.0);
    const Trajectory tv = simulate(init_small, inferior, T);
    ledger.add(tv);
    const auto& lv = tv.samples.back();
    v.require(lv.u_max < 1e-3, "max u not below 1e-3");
    v.require(std::abs(lv.v_min_compact - 1.0) < 0.05 && std::abs(lv.v_max_compact - 1.0) < 0.05,
              "v not within 0.05 of 1 on the compact");
    v.require(classify_outcome(tv) == Outcome::Vanishing, "inferior run not classified Vanishing");

    const auto init_large = InitialData::cosine_bump(10.0, 1.0, 1.0, 10.0 + 2.0 * T + 30.0);
    const Trajectory ts = simulate(init_large, kRef, T);
    ledger.add(ts);
    const Outcome os = classify_outcome(ts);
    v.require(os == Outcome::Spreading, "superior run not classified Spreading");
    v.detail << "inferior: " << to_string(classify_outcome(tv)) << " max u=" << lv.u_max << " v on [0,10] in ["
             << lv.v_min_compact << ", " << lv.v_max_compact << "]; superior h0=10: " << to_string(os)
             << " h(200)=" << ts.samples.back().h;
    report(6, "dichotomy", v);
}

void criterion7()
{
    Verdict v;
    const SpeedResult& r = sweep[1];  // mu = 1
    double rel = std::numeric_limits<double>::infinity();
    if (r.profile) {
        const ValidationReport rep = validate_profile(*r.profile, kRef);
        rel = std::abs(rep.phi_tail_slope / rep.phi_tail_expected - 1.0);
        v.detail << "fitted " << rep.phi_tail_slope << " vs gamma1 " << rep.phi_tail_expected << " on xi in ["
                 << rep.fit_from << ", " << rep.fit_to << "], rel " << rel;
    }
    v.require(rel < 0.05, "phi tail slope not within 5% of gamma1");
    report(7, "tail diagnostics", v);
}

void criterion8()
{
    Verdict v;
    ExperimentSpec spec;
    spec.scenario = Scenario::ConvergenceStudy;
    spec.model = kRef;
    spec.grid = XiGrid::with_spacing(60, 60, 0.1);
    spec.s_probe = 0.5;
    spec.dt_study = true;
    spec.dt = 0.04;
    spec.dt_study_t_end = 10.0;
    const Report rep = run(spec);
    ledger.add_report(rep);
    const double ratio = rep.metric("ratio").value_or(NAN);
    const double dt_ratio = rep.metric("dt_ratio").value_or(NAN);
    v.require(ratio >= 3.0 && ratio <= 5.0, "dpsi0 Richardson ratio outside [3,5]");
    v.require(dt_ratio >= 1.7 && dt_ratio <= 2.5, "h(t_end) dt-halving ratio outside [1.7,2.5]");
    v.detail << "dpsi0 ratio " << ratio << " (h_xi 0.1/0.05/0.025), h(10) dt ratio " << dt_ratio
             << " (dt 0.04/0.02/0.01)";
    report(8, "order of accuracy", v);
}

void criterion9()
{
    Verdict v;
    v.require(ledger.sim_violations == 0, "bounds or front monotonicity violated");
    v.require(ledger.relax_violations == 0, "relaxation iterates not monotone");
    v.detail << ledger.sim_violations << " step violations over " << ledger.sim_steps << "+ steps; "
             << ledger.relax_violations << " non-monotone relaxation steps over " << ledger.relaxations
             << "+ relaxations";
    report(9, "invariants", v);
}

}  // namespace

int main()
{
    const auto t0 = Clock::now();
    try {
        criterion1();
        criterion2();
        run_sweep();
        criterion4();
        criterion5();
        criterion3();
        criterion6();
        criterion7();
        criterion8();
        criterion9();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("acceptance: %d of 9 criteria failed, %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
