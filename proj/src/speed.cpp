#include "lvfb/speed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "field_operator.hpp"

namespace lvfb {

S0Bounds s0_bounds(const ModelParams& m)
{
    m.validate();
    return {2.0 * std::sqrt(m.r * m.d * (1.0 - m.b)), 2.0 * std::sqrt(m.r * m.d)};
}

namespace {

void require_superior(const ModelParams& m, const char* who)
{
    if (classify(m) != CompetitionRegime::SuperiorU) {
        throw DomainError(std::string(who) + ": requires the superior-invader regime a > 1 > b");
    }
}

struct Probe {
    ExistenceProbe record;
    std::optional<SemiWaveProfile> profile;
};

Probe probe_existence(const ModelParams& m, double s, const XiGrid& grid, RelaxOptions relax,
                      const SemiWaveProfile* warm)
{
    Probe out;
    out.record.s = s;
    try {
        auto outcome = relax_semiwave(m, s, {}, grid, relax, warm);
        if (auto* prof = std::get_if<SemiWaveProfile>(&outcome)) {
            out.record.verdict = ProbeVerdict::Exists;
            out.record.dpsi0 = prof->dpsi0;
            out.record.t_relax = prof->diagnostics.t_final;
            out.profile = std::move(*prof);
        } else {
            const auto& deg = std::get<Degenerate>(outcome);
            out.record.verdict = ProbeVerdict::Degenerate;
            out.record.t_relax = deg.diagnostics.t_final;
        }
    } catch (const NonConverged& e) {
        out.record.verdict = ProbeVerdict::Undecided;
        out.record.t_relax = e.time();
    }
    return out;
}

}  // namespace

S0Estimate estimate_s0(const ModelParams& m, const XiGrid& grid, const S0Options& opts)
{
    m.validate();
    grid.validate();
    require_superior(m, "estimate_s0");
    if (!(opts.tol_s > 0.0)) {
        throw DomainError("estimate_s0: tol_s must be positive");
    }

    S0Estimate est;
    est.bounds = s0_bounds(m);
    const S0Bounds search = opts.search.value_or(est.bounds);
    if (!(search.lower >= 0.0) || !(search.upper >= search.lower)) {
        throw DomainError("estimate_s0: search interval must satisfy 0 <= lower <= upper");
    }

    double lo = search.lower;
    double hi = search.upper;
    const double upper = est.bounds.upper;
    while (hi - lo > opts.tol_s) {
        const double s = 0.5 * (lo + hi);
        // Relaxation slows as the front flattens near the edge of existence.
        RelaxOptions relax = opts.relax;
        const double gap = std::max(upper - s, 1e-3 * upper);
        relax.t_max = std::min(opts.relax.t_max, opts.t_floor * std::max(1.0, upper / gap));

        const SemiWaveProfile* warm = est.lo_profile ? &*est.lo_profile : nullptr;
        Probe p = probe_existence(m, s, grid, relax, warm);
        est.probes.push_back(p.record);
        switch (p.record.verdict) {
        case ProbeVerdict::Exists:
            lo = s;
            est.lo_profile = std::move(p.profile);
            break;
        case ProbeVerdict::Degenerate:
            hi = s;
            break;
        case ProbeVerdict::Undecided:
            hi = s;
            est.marginal = true;
            break;
        }
    }
    est.lo = lo;
    est.hi = hi;
    est.value = 0.5 * (lo + hi);
    return est;
}

std::string SpeedResult::csv_header()
{
    return "a,b,d,r,mu,s0_lower,s0_upper,s0_est,s_mu,eta_residual";
}

std::string SpeedResult::csv_row(const ModelParams& m) const
{
    std::ostringstream out;
    out << std::setprecision(10) << m.a << ',' << m.b << ',' << m.d << ',' << m.r << ',' << mu << ','
        << s0_lower << ',' << s0_upper << ',' << s0_est << ',' << s_mu << ',' << eta_residual;
    return out.str();
}

namespace {

struct EtaPoint {
    double s = 0.0;
    double eta = 0.0;
    std::optional<SemiWaveProfile> profile;
};

}  // namespace

SpeedResult solve_s_mu(const ModelParams& m, const XiGrid& grid, const SpeedOptions& opts,
                       std::optional<double> mu)
{
    const double mu_value = mu.value_or(m.mu);
    const S0Estimate s0 = estimate_s0(m, grid, opts.s0);
    return solve_s_mu(m, mu_value, grid, s0, opts);
}

SpeedResult solve_s_mu(const ModelParams& m, double mu, const XiGrid& grid, const S0Estimate& s0,
                       const SpeedOptions& opts)
{
    m.validate();
    grid.validate();
    require_superior(m, "solve_s_mu");
    if (!(mu > 0.0) || !std::isfinite(mu)) {
        throw DomainError("solve_s_mu: mu must be positive and finite");
    }
    if (!(opts.tol_s > 0.0)) {
        throw DomainError("solve_s_mu: tol_s must be positive");
    }

    SpeedResult res;
    res.mu = mu;
    res.tol_s = opts.tol_s;
    res.s0_lower = s0.bounds.lower;
    res.s0_upper = s0.bounds.upper;
    res.s0_est = s0.value;
    res.s0_marginal = s0.marginal;

    // Warm starts always come from the largest speed known to lie below the root.
    const SemiWaveProfile* warm = nullptr;
    auto evaluate = [&](double s) {
        Probe p = probe_existence(m, s, grid, opts.relax, warm);
        EtaPoint pt;
        pt.s = s;
        if (p.record.verdict == ProbeVerdict::Exists) {
            pt.eta = mu * p.record.dpsi0 - s;
            pt.profile = std::move(p.profile);
        } else {
            // No semi-wave: psi_s'(0) is taken as its limit 0 at the edge of existence.
            pt.eta = -s;
        }
        res.trace.push_back({pt.s, pt.eta});
        return pt;
    };

    EtaPoint lo = evaluate(0.0);
    if (!(lo.eta > 0.0)) {
        throw SolverError("solve_s_mu: eta(0) = " + std::to_string(lo.eta)
                              + " is not positive; the s = 0 semi-wave is inconsistent",
                          {});
    }
    warm = lo.profile ? &*lo.profile : nullptr;

    EtaPoint hi = evaluate(s0.value);
    if (hi.eta > 0.0 && s0.hi > s0.value) {
        lo = std::move(hi);
        warm = &*lo.profile;
        hi = evaluate(s0.hi);
    }
    if (!(hi.eta < 0.0)) {
        throw SolverError("solve_s_mu: eta stays positive up to s = " + std::to_string(hi.s)
                              + "; the s0 bracket is inconsistent",
                          {});
    }

    int iterations = 0;
    while (hi.s - lo.s > opts.tol_s && iterations < opts.max_iterations) {
        ++iterations;
        EtaPoint mid = evaluate(0.5 * (lo.s + hi.s));
        if (mid.eta > 0.0) {
            lo = std::move(mid);
            warm = &*lo.profile;
        } else {
            hi = std::move(mid);
        }
    }

    auto target = [&](double s) { return opts.eta_rel_tol * std::max(1.0, s); };
    auto better = [](const EtaPoint& x, const EtaPoint& y) { return std::abs(x.eta) < std::abs(y.eta); };
    // Secant (Illinois) polish inside the final bracket.
    double eta_lo = lo.eta;
    double eta_hi = hi.eta;
    int side = 0;
    EtaPoint best = hi.profile && better(hi, lo) ? hi : lo;
    while (std::abs(best.eta) >= target(best.s) && iterations < opts.max_iterations) {
        ++iterations;
        const double s = (lo.s * eta_hi - hi.s * eta_lo) / (eta_hi - eta_lo);
        EtaPoint pt = evaluate(s);
        if (pt.profile && (!best.profile || better(pt, best))) {
            best = pt;
        }
        if (pt.eta > 0.0) {
            lo = std::move(pt);
            eta_lo = lo.eta;
            warm = &*lo.profile;
            if (side == +1) {
                eta_hi *= 0.5;
            }
            side = +1;
        } else {
            hi = std::move(pt);
            eta_hi = hi.eta;
            if (side == -1) {
                eta_lo *= 0.5;
            }
            side = -1;
        }
    }
    if (!best.profile) {
        throw SolverError("solve_s_mu: no semi-wave found near the root", {});
    }
    res.s_mu = best.s;
    res.eta_residual = best.eta;
    res.dpsi0 = best.profile->dpsi0;
    res.profile = std::move(best.profile);
    return res;
}

namespace {

/// Block tridiagonal solve with 2x2 diagonal blocks D_j and diagonal
/// couplings A_j (to j-1) and C_j (to j+1); overwrites rhs with the solution.
struct Block2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
};

bool solve_block2(const std::vector<std::array<double, 2>>& A, const std::vector<Block2>& D,
                  const std::vector<std::array<double, 2>>& C, std::vector<std::array<double, 2>>& rhs)
{
    const std::size_t n = D.size();
    // Forward elimination with full 2x2 pivots W_j = D_j - diag(A_j) W_{j-1}^{-1} diag(C_{j-1}).
    std::vector<std::array<double, 2>> y(n);
    auto inverse = [](const Block2& b, Block2& inv) {
        const double det = b.a11 * b.a22 - b.a12 * b.a21;
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
            return false;
        }
        inv = {b.a22 / det, -b.a12 / det, -b.a21 / det, b.a11 / det};
        return true;
    };
    std::vector<Block2> Winv(n);
    for (std::size_t j = 0; j < n; ++j) {
        Block2 w = D[j];
        std::array<double, 2> rj = rhs[j];
        if (j > 0) {
            // M = diag(A_j) Winv_{j-1}
            const Block2& v = Winv[j - 1];
            const Block2 M{A[j][0] * v.a11, A[j][0] * v.a12, A[j][1] * v.a21, A[j][1] * v.a22};
            w.a11 -= M.a11 * C[j - 1][0];
            w.a12 -= M.a12 * C[j - 1][1];
            w.a21 -= M.a21 * C[j - 1][0];
            w.a22 -= M.a22 * C[j - 1][1];
            rj[0] -= M.a11 * y[j - 1][0] + M.a12 * y[j - 1][1];
            rj[1] -= M.a21 * y[j - 1][0] + M.a22 * y[j - 1][1];
        }
        if (!inverse(w, Winv[j])) {
            return false;
        }
        y[j] = rj;
    }
    for (std::size_t k = n; k-- > 0;) {
        std::array<double, 2> rj = y[k];
        if (k + 1 < n) {
            rj[0] -= C[k][0] * rhs[k + 1][0];
            rj[1] -= C[k][1] * rhs[k + 1][1];
        }
        const Block2& v = Winv[k];
        rhs[k] = {v.a11 * rj[0] + v.a12 * rj[1], v.a21 * rj[0] + v.a22 * rj[1]};
    }
    return true;
}

}  // namespace

std::variant<TravelingWaveProfile, NoWave> solve_traveling_wave(const ModelParams& m, double s,
                                                                const XiGrid& grid,
                                                                const WaveOptions& opts)
{
    m.validate();
    grid.validate();
    require_superior(m, "solve_traveling_wave");
    if (!(s > 0.0)) {
        throw DomainError("solve_traveling_wave: speed must be positive");
    }

    using detail::FieldOperator;
    const std::size_t n = static_cast<std::size_t>(grid.size());
    const std::size_t jpin = static_cast<std::size_t>(grid.zero_index());
    const double h = grid.spacing();
    const double a = m.a, b = m.b, r = m.r;

    std::vector<double> P(n), Q(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double t = std::tanh(0.5 * grid.xi(static_cast<int>(j)));
        P[j] = 0.5 * (1.0 - t);
        Q[j] = 0.5 * (1.0 + t);
    }
    P[0] = 1.0;
    Q[0] = 0.0;
    P[n - 1] = 0.0;
    Q[n - 1] = 1.0;

    FieldOperator Lp(n), Lq(n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
        Lp.set_interior(j, 1.0, s, h);
        Lq.set_interior(j, m.d, s, h);
    }
    Lp.fixed[0] = Lp.fixed[n - 1] = 1;
    Lq.fixed[0] = Lq.fixed[n - 1] = 1;

    auto f_p = [&](std::size_t j) { return P[j] * (1.0 - P[j] - a * Q[j]); };
    auto f_q = [&](std::size_t j) { return r * Q[j] * (1.0 - Q[j] - b * P[j]); };

    // Shape the guess by a short relaxation in the moving frame, then shift
    // it so that the front (Psi = 1/2) sits on xi = 0.
    if (opts.t_shape > 0.0) {
        const double dt = std::min({0.25, 0.9 / (1.0 + a), 0.9 / (r * (1.0 + b))});
        const Tridiagonal Mp = Lp.implicit_matrix(dt);
        const Tridiagonal Mq = Lq.implicit_matrix(dt);
        std::vector<double> rp(n), rq(n);
        const long steps = static_cast<long>(std::ceil(opts.t_shape / dt));
        for (long k = 0; k < steps; ++k) {
            for (std::size_t j = 0; j < n; ++j) {
                rp[j] = Lp.fixed[j] ? P[j] : P[j] + dt * f_p(j);
                rq[j] = Lq.fixed[j] ? Q[j] : Q[j] + dt * f_q(j);
            }
            Mp.solve_factored(rp);
            Mq.solve_factored(rq);
            P.swap(rp);
            Q.swap(rq);
        }
        std::optional<double> front;
        for (std::size_t j = 0; j + 1 < n && !front; ++j) {
            if (Q[j] < 0.5 && Q[j + 1] >= 0.5) {
                front = grid.xi(static_cast<int>(j)) + h * (0.5 - Q[j]) / (Q[j + 1] - Q[j]);
            }
        }
        if (!front) {
            NoWave out;
            out.s = s;
            out.reason = "relaxation collapsed onto a constant state";
            return out;
        }
        auto shifted = [&](const std::vector<double>& x, double left, double right) {
            std::vector<double> y(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double pos = (grid.xi(static_cast<int>(j)) + *front + grid.L_left) / h;
                if (pos <= 0.0) {
                    y[j] = left;
                } else if (pos >= static_cast<double>(n - 1)) {
                    y[j] = right;
                } else {
                    const auto k = static_cast<std::size_t>(pos);
                    const double w = pos - static_cast<double>(k);
                    y[j] = (1.0 - w) * x[k] + w * x[std::min(k + 1, n - 1)];
                }
            }
            return y;
        };
        P = shifted(P, 1.0, 0.0);
        Q = shifted(Q, 0.0, 1.0);
    }
    Q[jpin] = 0.5;
    // Both Psi modes at the left state grow in xi and a wave uses both, so
    // Psi(-L) is left free; the phase condition Psi(0) = 1/2 takes its place.

    auto residuals = [&](std::vector<std::array<double, 2>>& F) {
        double norm = std::abs(Q[jpin] - 0.5);
        for (std::size_t j = 0; j < n; ++j) {
            F[j][0] = Lp.fixed[j] ? 0.0 : Lp.apply(P, j) - f_p(j);
            F[j][1] = Lq.fixed[j] ? 0.0 : Lq.apply(Q, j) - f_q(j);
            norm = std::max({norm, std::abs(F[j][0]), std::abs(F[j][1])});
        }
        return norm;
    };

    std::vector<std::array<double, 2>> F(n), A(n), C(n), dx(n), dtheta(n);
    std::vector<Block2> D(n);
    std::vector<double> P0(n), Q0(n);
    double norm = residuals(F);
    int it = 0;
    for (; it < opts.newton_max_iterations && !(norm < opts.tol); ++it) {
        for (std::size_t j = 0; j < n; ++j) {
            A[j] = {0.0, 0.0};
            C[j] = {0.0, 0.0};
            if (Lp.fixed[j]) {
                D[j].a11 = 1.0;
                D[j].a12 = 0.0;
            } else {
                A[j][0] = Lp.lo[j];
                C[j][0] = Lp.up[j];
                D[j].a11 = Lp.di[j] - (1.0 - 2.0 * P[j] - a * Q[j]);
                D[j].a12 = a * P[j];
            }
            if (Lq.fixed[j]) {
                D[j].a21 = 0.0;
                D[j].a22 = 1.0;
            } else {
                A[j][1] = Lq.lo[j];
                C[j][1] = Lq.up[j];
                D[j].a21 = r * b * Q[j];
                D[j].a22 = Lq.di[j] - r * (1.0 - 2.0 * Q[j] - b * P[j]);
            }
            dx[j] = {-F[j][0], -F[j][1]};
            dtheta[j] = {0.0, 0.0};
        }
        // Correction with dPsi(-L) = 0, plus the response to a unit change of
        // Psi(-L); their combination meets the linearized phase condition.
        dtheta[0][1] = 1.0;
        if (!solve_block2(A, D, C, dx) || !solve_block2(A, D, C, dtheta)
            || !(std::abs(dtheta[jpin][1]) > 0.0)) {
            break;
        }
        const double theta = (0.5 - Q[jpin] - dx[jpin][1]) / dtheta[jpin][1];
        P0 = P;
        Q0 = Q;
        for (std::size_t j = 0; j < n; ++j) {
            P[j] += dx[j][0] + theta * dtheta[j][0];
            Q[j] += dx[j][1] + theta * dtheta[j][1];
        }
        // Backtrack along the combined correction until the residual drops.
        std::vector<std::array<double, 2>> full(n);
        for (std::size_t j = 0; j < n; ++j) {
            full[j] = {P[j] - P0[j], Q[j] - Q0[j]};
        }
        double lambda = 1.0;
        double trial = residuals(F);
        for (int halving = 0; halving < 30 && !(trial < (1.0 - 1e-4 * lambda) * norm); ++halving) {
            lambda *= 0.5;
            for (std::size_t j = 0; j < n; ++j) {
                P[j] = P0[j] + lambda * full[j][0];
                Q[j] = Q0[j] + lambda * full[j][1];
            }
            trial = residuals(F);
        }
        if (!(trial < norm)) {
            P = P0;
            Q = Q0;
            residuals(F);
            break;
        }
        norm = trial;
    }
    if (!(norm < opts.tol)) {
        std::ostringstream msg;
        msg << "solve_traveling_wave: Newton stalled at |F| = " << norm << " for s = " << s;
        throw NonConverged(msg.str(), s, opts.t_shape, norm, Q[0]);
    }

    double q_min = 0.0, p_min = 0.0;
    long violations = 0;
    for (std::size_t j = 0; j < n; ++j) {
        q_min = std::min(q_min, Q[j]);
        p_min = std::min(p_min, P[j]);
        if (j + 1 < n && (P[j + 1] > P[j] + opts.monotone_slack || Q[j + 1] < Q[j] - opts.monotone_slack)) {
            ++violations;
        }
    }
    if (q_min < 0.0 || p_min < 0.0 || Q[0] > opts.left_tol || violations > 0) {
        NoWave out;
        out.s = s;
        std::ostringstream why;
        why << "steady state is not a monotone connection (Psi(-L) = " << Q[0] << ", min Psi = " << q_min
            << ", min Phi = " << p_min << ", monotonicity breaks = " << violations << ")";
        out.reason = why.str();
        return out;
    }

    TravelingWaveProfile wave;
    wave.grid = grid;
    wave.s = s;
    wave.residual = norm;
    wave.newton_iterations = it;
    wave.Phi = std::move(P);
    wave.Psi = std::move(Q);
    return wave;
}

}  // namespace lvfb
