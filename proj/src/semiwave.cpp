#include "lvfb/semiwave.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <span>
#include <sstream>

#include "field_operator.hpp"
#include "lvfb/tridiag.hpp"

namespace lvfb {

void XiGrid::validate() const
{
    if (!(L_left > 0.0) || !(L_right > 0.0)) {
        throw DomainError("XiGrid: truncation depths must be positive");
    }
    if (n_left < 2 || n_right < 3) {
        throw DomainError("XiGrid: need at least 2 cells left and 3 cells right of xi = 0");
    }
    const double hl = L_left / n_left;
    const double hr = L_right / n_right;
    if (std::abs(hl - hr) > 1e-12 * std::max(hl, hr)) {
        throw DomainError("XiGrid: left and right spacings differ (" + std::to_string(hl) + " vs "
                          + std::to_string(hr) + ")");
    }
}

XiGrid XiGrid::refined(int factor) const
{
    if (factor < 1) {
        throw DomainError("XiGrid::refined: factor must be >= 1");
    }
    XiGrid g = *this;
    g.n_left *= factor;
    g.n_right *= factor;
    return g;
}

XiGrid XiGrid::with_spacing(double L_left, double L_right, double h)
{
    if (!(h > 0.0)) {
        throw DomainError("XiGrid::with_spacing: spacing must be positive");
    }
    XiGrid g;
    g.L_left = L_left;
    g.L_right = L_right;
    g.n_left = static_cast<int>(std::lround(L_left / h));
    g.n_right = static_cast<int>(std::lround(L_right / h));
    g.L_left = g.n_left * h;
    g.L_right = g.n_right * h;
    g.validate();
    return g;
}

double one_sided_slope(double psi0, double psi1, double psi2, double h)
{
    return (-3.0 * psi0 + 4.0 * psi1 - psi2) / (2.0 * h);
}

namespace {

using detail::FieldOperator;

/// Positive solution of -D w'' = k w (K - w) on [0, n h], w(0) = 0, w(n h) = K,
/// by damped Newton on the centered three-point discretization.
std::vector<double> half_line_logistic(double D, double k, double K, int n, double h,
                                       const char* label, int& iterations)
{
    std::vector<double> w(n + 1);
    const double kappa = std::sqrt(k * K / D);
    for (int j = 0; j <= n; ++j) {
        w[j] = K * (1.0 - std::exp(-kappa * j * h));
    }
    w[0] = 0.0;
    w[n] = K;

    const double inv_h2 = D / (h * h);
    auto residual = [&](const std::vector<double>& x, std::vector<double>& F) {
        double norm = 0.0;
        F.assign(n + 1, 0.0);
        for (int j = 1; j < n; ++j) {
            F[j] = -inv_h2 * (x[j + 1] - 2.0 * x[j] + x[j - 1]) - k * x[j] * (K - x[j]);
            norm = std::max(norm, std::abs(F[j]));
        }
        return norm;
    };

    Tridiagonal J(n + 1);
    std::vector<double> F, trial(n + 1), step(n + 1);
    double norm = residual(w, F);
    std::vector<std::string> trace;
    // Rounding floor of the discrete operator is about eps D K / h^2.
    const double target = 1e-13 * std::max(1.0, k * K * K)
                          + 64.0 * std::numeric_limits<double>::epsilon() * inv_h2 * K;
    for (iterations = 0; iterations < 60; ++iterations) {
        trace.push_back("iter " + std::to_string(iterations) + " |F| = " + std::to_string(norm));
        if (norm < target) {
            return w;
        }
        J.diag[0] = 1.0;
        J.upper[0] = 0.0;
        J.diag[n] = 1.0;
        J.lower[n] = 0.0;
        step[0] = 0.0;
        step[n] = 0.0;
        for (int j = 1; j < n; ++j) {
            J.lower[j] = -inv_h2;
            J.upper[j] = -inv_h2;
            J.diag[j] = 2.0 * inv_h2 - k * (K - 2.0 * w[j]);
            step[j] = -F[j];
        }
        J.solve_in_place(step);

        double lambda = 1.0;
        double trial_norm = 0.0;
        std::vector<double> Ft;
        for (int halving = 0; halving < 30; ++halving) {
            for (int j = 0; j <= n; ++j) {
                trial[j] = w[j] + lambda * step[j];
            }
            trial_norm = residual(trial, Ft);
            if (trial_norm < (1.0 - 1e-4 * lambda) * norm || trial_norm < target) {
                break;
            }
            lambda *= 0.5;
        }
        if (!(trial_norm < norm) && !(trial_norm < target)) {
            break;
        }
        w.swap(trial);
        F.swap(Ft);
        norm = trial_norm;
    }
    throw SolverError(std::string("build_seeds: Newton did not converge for ") + label, trace);
}

double max_abs(std::span<const double> x)
{
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace

SeedPair build_seeds(const ModelParams& m, const XiGrid& grid, const GrowthOffsets& off)
{
    m.validate();
    grid.validate();
    off.validate();
    const double h = grid.spacing();
    const int n = grid.size();
    const int j0 = grid.zero_index();

    SeedPair seeds;
    seeds.phi_lower.assign(n, 0.0);
    seeds.psi_upper.assign(n, 0.0);

    int it_phi = 0;
    int it_psi = 0;
    // phi_lower(xi) = w(-xi) for xi <= 0
    auto w_phi = half_line_logistic(1.0, 1.0, off.v_level(), grid.n_left, h, "phi_lower", it_phi);
    for (int j = 0; j <= j0; ++j) {
        seeds.phi_lower[j] = w_phi[j0 - j];
    }
    auto w_psi = half_line_logistic(m.d, m.r, off.u_level(), grid.n_right, h, "psi_upper", it_psi);
    for (int j = j0; j < n; ++j) {
        seeds.psi_upper[j] = w_psi[j - j0];
    }
    seeds.newton_iterations = it_phi + it_psi;
    return seeds;
}

TailExponents tail_exponents(const ModelParams& m, double s, const GrowthOffsets& off)
{
    const double U = off.u_level();
    const double V = off.v_level();
    TailExponents t;
    t.s = s;
    t.d = m.d;
    t.r = m.r * U;  // effective linear rate at psi = U

    const double sg = std::sqrt(s * s + 4.0 * (m.a * U - V));
    t.gamma1 = 0.5 * (s - sg);
    t.gamma2 = 0.5 * (s + sg);

    const double sl = std::sqrt(s * s + 4.0 * m.r * m.d * U);
    t.lambda1 = (s - sl) / (2.0 * m.d);
    t.lambda2 = (s + sl) / (2.0 * m.d);

    const double disc = s * s - 4.0 * m.r * m.d * (U - m.b * V);
    if (disc >= 0.0) {
        const double sb = std::sqrt(disc);
        t.beta1 = (s + sb) / (2.0 * m.d);
        t.beta2 = (s - sb) / (2.0 * m.d);
    }
    return t;
}

RelaxOutcome relax_semiwave(const ModelParams& m, double s, const GrowthOffsets& off,
                            const XiGrid& grid, const RelaxOptions& opts,
                            const SemiWaveProfile* warm)
{
    m.validate();
    grid.validate();
    off.validate();
    if (!(s >= 0.0)) {
        throw DomainError("relax_semiwave: speed must be nonnegative");
    }
    if (classify(m) != CompetitionRegime::SuperiorU) {
        throw DomainError("relax_semiwave: requires the superior-invader regime a > 1 > b");
    }
    if (!(opts.tol > 0.0) || !(opts.t_max > 0.0) || !(opts.dt > 0.0)) {
        throw DomainError("relax_semiwave: tol, t_max and dt must be positive");
    }

    const std::size_t n = static_cast<std::size_t>(grid.size());
    const std::size_t j0 = static_cast<std::size_t>(grid.zero_index());
    const std::size_t nq = n - j0;
    const double h = grid.spacing();
    const double U = off.u_level();
    const double V = off.v_level();
    const double a = m.a;
    const double b = m.b;
    const double r = m.r;

    // Largest step for which the explicit reaction update is order preserving.
    const double dt = std::min({opts.dt, 0.9 / (V + a * U), 0.9 / (r * (U + b * V))});

    std::vector<double> p(n), q(n, 0.0);
    RelaxDiagnostics diag;
    diag.dt_used = dt;
    if (warm != nullptr) {
        if (warm->grid.size() != grid.size() || warm->grid.zero_index() != grid.zero_index()
            || std::abs(warm->grid.spacing() - h) > 1e-14 * h) {
            throw DomainError("relax_semiwave: warm start lives on a different grid");
        }
        if (warm->s > s) {
            throw DomainError("relax_semiwave: warm start must come from a speed <= s");
        }
        if (warm->offsets.eps_u != off.eps_u || warm->offsets.eps_v != off.eps_v) {
            throw DomainError("relax_semiwave: warm start uses different growth offsets");
        }
        p = warm->phi;
        q = warm->psi;
        diag.warm_started = true;
    } else {
        auto seeds = build_seeds(m, grid, off);
        p = std::move(seeds.phi_lower);
        q = std::move(seeds.psi_upper);
    }
    for (std::size_t j = 0; j < j0; ++j) {
        q[j] = 0.0;
    }

    const TailExponents tails = tail_exponents(m, s, off);

    FieldOperator Lp(n);
    Lp.fixed[0] = 1;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        Lp.set_interior(j, 1.0, s, h);
    }
    if (opts.right_bc == RightBoundary::Robin) {
        // e = phi, e' = gamma1 e  <=>  phi' = gamma1 phi ; written as x' = kappa (target - x)
        // with kappa = -gamma1, target = 0.
        Lp.set_robin_last(1.0, s, h, -tails.gamma1, 0.0);
    } else {
        Lp.fixed[n - 1] = 1;
    }

    FieldOperator Lq(nq);
    Lq.fixed[0] = 1;
    for (std::size_t k = 1; k + 1 < nq; ++k) {
        Lq.set_interior(k, m.d, s, h);
    }
    if (opts.right_bc == RightBoundary::Robin) {
        // w = U - psi, w' = kappa_w w  <=>  psi' = -kappa_w (U - psi)
        const double kappa_w = std::max(tails.gamma1, tails.lambda1);
        Lq.set_robin_last(m.d, s, h, -kappa_w, U);
    } else {
        Lq.fixed[nq - 1] = 1;
    }
    diag.upwinded = Lp.upwinded || Lq.upwinded;
    const Tridiagonal Mp = Lp.implicit_matrix(dt);
    const Tridiagonal Mq = Lq.implicit_matrix(dt);

    auto chi = [&](std::size_t j) { return j >= j0 ? 1.0 : 0.0; };
    auto f_p = [&](std::size_t j) { return p[j] * (V - p[j] - a * chi(j) * q[j]); };
    auto f_q = [&](std::size_t j) { return r * q[j] * (U - q[j] - b * p[j]); };

    // Boundary data. Dirichlet rows never move after the first step.
    p[0] = V;
    if (opts.right_bc == RightBoundary::Dirichlet) {
        p[n - 1] = 0.0;
        q[n - 1] = U;
    }
    q[j0] = 0.0;

    // First step in plain form; its increment is projected onto the monotone
    // cone, since the seed is an ordered sub/super pair only up to the
    // tolerance it was computed with.
    std::vector<double> dp(n, 0.0), dq(n, 0.0);
    {
        std::vector<double> rp(n), rq(nq);
        for (std::size_t j = 0; j < n; ++j) {
            rp[j] = Lp.fixed[j] ? p[j] : p[j] + dt * (f_p(j) - Lp.c[j]);
        }
        for (std::size_t k = 0; k < nq; ++k) {
            const std::size_t j = j0 + k;
            rq[k] = Lq.fixed[k] ? q[j] : q[j] + dt * (f_q(j) - Lq.c[k]);
        }
        Mp.solve_factored(rp);
        Mq.solve_factored(rq);
        for (std::size_t j = 0; j < n; ++j) {
            const double inc = rp[j] - p[j];
            diag.worst_monotone_violation = std::max(diag.worst_monotone_violation, -inc);
            dp[j] = std::max(inc, 0.0);
        }
        for (std::size_t k = 0; k < nq; ++k) {
            const double inc = rq[k] - q[j0 + k];
            diag.worst_monotone_violation = std::max(diag.worst_monotone_violation, inc);
            dq[j0 + k] = std::min(inc, 0.0);
        }
    }

    const std::size_t probe =
        j0 + static_cast<std::size_t>(std::clamp(opts.probe_fraction, 0.0, 1.0) * grid.n_right);
    const long max_steps = static_cast<long>(std::ceil(opts.t_max / dt));

    std::vector<double> p_prev(p), q_prev(q);
    std::vector<double> rp(n), rq(nq);
    auto advance = [&]() {
        p_prev = p;
        q_prev = q;
        // V and 0 bound the discrete steady state; clipping there keeps summed
        // rounding in the increments from carrying p past V. dp, dq record
        // the increment actually applied.
        for (std::size_t j = 0; j < n; ++j) {
            const double next = std::min(p[j] + dp[j], V);
            dp[j] = next - p[j];
            p[j] = next;
        }
        for (std::size_t j = j0; j < n; ++j) {
            const double next = std::max(q[j] + dq[j], 0.0);
            dq[j] = next - q[j];
            q[j] = next;
        }
    };
    advance();
    diag.steps = 1;
    diag.update_rate = std::max(max_abs(dp), max_abs(dq)) / dt;
    if (diag.worst_monotone_violation > 0.0) {
        diag.worst_monotone_violation = 0.0;  // absorbed by the projection above
    }

    const double eps = std::numeric_limits<double>::epsilon();
    bool collapsed = q[probe] < opts.degenerate_threshold;
    bool converged = diag.update_rate < opts.tol;

    while (!collapsed && !converged && diag.steps < max_steps) {
        // Increment recursion:
        //   (I + dt L) dp^n = dp^{n-1} + dt [f(p^n, q^n) - f(p^{n-1}, q^{n-1})]
        // with the reaction difference expanded so every term is one-signed.
        for (std::size_t j = 0; j < n; ++j) {
            if (Lp.fixed[j]) {
                rp[j] = 0.0;
                continue;
            }
            const double c = chi(j);
            rp[j] = dp[j] * (1.0 + dt * (V - p_prev[j] - p[j] - a * c * q[j]))
                    + dt * a * c * p_prev[j] * (-dq[j]);
        }
        for (std::size_t k = 0; k < nq; ++k) {
            const std::size_t j = j0 + k;
            if (Lq.fixed[k]) {
                rq[k] = 0.0;
                continue;
            }
            rq[k] = dq[j] * (1.0 + dt * r * (U - q_prev[j] - q[j] - b * p[j]))
                    - dt * r * b * q_prev[j] * dp[j];
        }
        Mp.solve_factored(rp);
        Mq.solve_factored(rq);

        const double p_scale = eps * max_abs(p);
        const double q_scale = eps * max_abs(q);
        bool violated = false;
        for (std::size_t j = 0; j < n; ++j) {
            dp[j] = rp[j];
            if (dp[j] < -p_scale) {
                violated = true;
                diag.worst_monotone_violation = std::max(diag.worst_monotone_violation, -dp[j]);
            }
        }
        for (std::size_t k = 0; k < nq; ++k) {
            dq[j0 + k] = rq[k];
            if (rq[k] > q_scale) {
                violated = true;
                diag.worst_monotone_violation = std::max(diag.worst_monotone_violation, rq[k]);
            }
        }
        if (violated) {
            ++diag.monotone_violations;
        }
        advance();
        ++diag.steps;
        diag.update_rate = std::max(max_abs(dp), max_abs(dq)) / dt;
        collapsed = q[probe] < opts.degenerate_threshold;
        converged = diag.update_rate < opts.tol;
    }
    diag.t_final = diag.steps * dt;

    if (collapsed) {
        return Degenerate{s, q[probe], diag};
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "relax_semiwave: no steady state by t = " << diag.t_final << " at s = " << s
            << " (update rate " << diag.update_rate << ", q(probe) = " << q[probe] << ")";
        throw NonConverged(msg.str(), s, diag.t_final, diag.update_rate, q[probe]);
    }

    SemiWaveProfile prof;
    prof.grid = grid;
    prof.s = s;
    prof.offsets = off;
    prof.dpsi0 = one_sided_slope(q[j0], q[j0 + 1], q[j0 + 2], h);
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!Lp.fixed[j]) {
            residual = std::max(residual, std::abs(Lp.apply(p, j) - f_p(j)));
        }
    }
    std::span<const double> qs(q.data() + j0, nq);
    for (std::size_t k = 0; k < nq; ++k) {
        if (!Lq.fixed[k]) {
            residual = std::max(residual, std::abs(Lq.apply(qs, k) - f_q(j0 + k)));
        }
    }
    prof.residual = residual;
    prof.phi = std::move(p);
    prof.psi = std::move(q);
    prof.diagnostics = diag;
    return prof;
}

namespace {

/// Least-squares slope of log(values) over the nodes [first, last].
double log_slope(const XiGrid& grid, const std::vector<double>& values, int first, int last)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int count = 0;
    for (int j = first; j <= last; ++j) {
        if (!(values[j] > 0.0)) {
            continue;
        }
        const double x = grid.xi(j);
        const double y = std::log(values[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double denom = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / denom;
}

/// Tail window: from where `dev` first drops below `hi` to where it drops
/// below `lo`, kept `margin` away from the truncation boundary.
std::pair<int, int> tail_window(const XiGrid& grid, const std::vector<double>& dev, double hi,
                                double lo, double margin)
{
    const int j0 = grid.zero_index();
    const int n = grid.size();
    const int last_allowed = n - 1 - static_cast<int>(std::ceil(margin / grid.spacing()));
    int first = -1;
    int last = -1;
    for (int j = j0 + 1; j <= last_allowed; ++j) {
        if (first < 0 && dev[j] < hi) {
            first = j;
        }
        if (first >= 0 && dev[j] >= lo) {
            last = j;
        }
    }
    return {first, last};
}

}  // namespace

ValidationReport validate_profile(const SemiWaveProfile& prof, const ModelParams& m, double slack)
{
    const XiGrid& grid = prof.grid;
    const int n = grid.size();
    const int j0 = grid.zero_index();
    const double h = grid.spacing();
    const double s = prof.s;
    const double U = prof.offsets.u_level();
    const double V = prof.offsets.v_level();
    const auto& phi = prof.phi;
    const auto& psi = prof.psi;

    ValidationReport rep;
    rep.monotone_slack = slack;
    for (int j = 1; j + 1 < n; ++j) {
        const double d1 = (phi[j + 1] - phi[j - 1]) / (2.0 * h);
        const double d2 = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (h * h);
        const double chi = j >= j0 ? 1.0 : 0.0;
        const double res = s * d1 - d2 - phi[j] * (V - phi[j] - m.a * chi * psi[j]);
        rep.phi_residual = std::max(rep.phi_residual, std::abs(res));
        if (phi[j + 1] > phi[j] + slack * V) {
            ++rep.phi_monotone_violations;
        }
    }
    for (int j = j0 + 1; j + 1 < n; ++j) {
        const double d1 = (psi[j + 1] - psi[j - 1]) / (2.0 * h);
        const double d2 = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (h * h);
        const double res = s * d1 - m.d * d2 - m.r * psi[j] * (U - psi[j] - m.b * phi[j]);
        rep.psi_residual = std::max(rep.psi_residual, std::abs(res));
    }
    for (int j = j0; j + 1 < n; ++j) {
        if (psi[j + 1] < psi[j] - slack * U) {
            ++rep.psi_monotone_violations;
        }
    }

    const TailExponents tails = tail_exponents(m, s, prof.offsets);
    rep.phi_tail_expected = tails.gamma1;
    rep.psi_tail_expected = std::max(tails.gamma1, tails.lambda1);

    std::vector<double> phi_dev(phi.begin(), phi.end());
    for (double& v : phi_dev) {
        v /= V;
    }
    auto [pf, pl] = tail_window(grid, phi_dev, 1e-3, 1e-10, 10.0);
    if (pf >= 0 && pl > pf) {
        rep.phi_tail_slope = log_slope(grid, phi, pf, pl);
        rep.fit_from = grid.xi(pf);
        rep.fit_to = grid.xi(pl);
    } else {
        rep.phi_tail_slope = std::numeric_limits<double>::quiet_NaN();
    }

    std::vector<double> w(n, 1.0);
    for (int j = j0; j < n; ++j) {
        w[j] = (U - psi[j]) / U;
    }
    auto [wf, wl] = tail_window(grid, w, 1e-3, 1e-10, 10.0);
    if (wf >= 0 && wl > wf) {
        rep.psi_tail_slope = log_slope(grid, w, wf, wl);
    } else {
        rep.psi_tail_slope = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

std::string ValidationReport::to_text() const
{
    std::ostringstream out;
    out << std::setprecision(6);
    out << "phi_residual = " << phi_residual << "\n"
        << "psi_residual = " << psi_residual << "\n"
        << "phi_monotone_violations = " << phi_monotone_violations << "\n"
        << "psi_monotone_violations = " << psi_monotone_violations << "\n"
        << "phi_tail_slope = " << phi_tail_slope << "\n"
        << "phi_tail_expected = " << phi_tail_expected << "\n"
        << "psi_tail_slope = " << psi_tail_slope << "\n"
        << "psi_tail_expected = " << psi_tail_expected << "\n"
        << "fit_window = [" << fit_from << ", " << fit_to << "]\n";
    return out.str();
}

void write_profile_csv(const SemiWaveProfile& prof, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "xi,phi,psi\n" << std::setprecision(12);
    for (int j = 0; j < prof.grid.size(); ++j) {
        out << prof.grid.xi(j) << ',' << prof.phi[j] << ',' << prof.psi[j] << '\n';
    }
}

}  // namespace lvfb
