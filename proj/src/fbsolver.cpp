#include "lvfb/fbsolver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "lvfb/tridiag.hpp"

namespace lvfb {

void InitialData::validate() const
{
    if (!(h0 > 0.0) || !std::isfinite(h0)) {
        throw DomainError("InitialData: h0 must be positive");
    }
    if (!(dr > 0.0)) {
        throw DomainError("InitialData: dr must be positive");
    }
    if (u0.size() < 3) {
        throw DomainError("InitialData: u0 needs at least 3 nodes");
    }
    if (v0.size() < 3) {
        throw DomainError("InitialData: v0 needs at least 3 nodes");
    }
    double u_max = 0.0;
    for (std::size_t i = 0; i + 1 < u0.size(); ++i) {
        if (!(u0[i] > 0.0) || !std::isfinite(u0[i])) {
            throw DomainError("InitialData: u0 must be positive on [0, h0)");
        }
        u_max = std::max(u_max, u0[i]);
    }
    if (u0.back() != 0.0) {
        throw DomainError("InitialData: u0 must vanish at r = h0");
    }
    if (std::abs(u0[0] - u0[1]) > 1e-3 * u_max) {
        throw DomainError("InitialData: u0 must be flat at r = 0 (first two nodes differ)");
    }
    bool any_v = false;
    for (double v : v0) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DomainError("InitialData: v0 must be nonnegative");
        }
        any_v = any_v || v > 0.0;
    }
    if (v0_floor > 0.0 && !any_v) {
        throw DomainError("InitialData: v0 is identically zero but v0_floor > 0");
    }
}

InitialData InitialData::cosine_bump(double h0, double amplitude, double v_const, double R_max, int Ny,
                                     double dr)
{
    if (Ny < 2 || !(dr > 0.0) || !(R_max > 0.0)) {
        throw DomainError("cosine_bump: need Ny >= 2, dr > 0, R_max > 0");
    }
    InitialData init;
    init.h0 = h0;
    init.dr = dr;
    init.u0.resize(static_cast<std::size_t>(Ny) + 1);
    for (int i = 0; i <= Ny; ++i) {
        const double y = static_cast<double>(i) / Ny;
        init.u0[static_cast<std::size_t>(i)] = amplitude * std::cos(0.5 * std::numbers::pi * y);
    }
    init.u0.back() = 0.0;
    const auto M = static_cast<std::size_t>(std::lround(R_max / dr));
    init.v0.assign(M + 1, v_const);
    init.v0_floor = v_const;
    return init;
}

double FreeBoundaryState::u_at(double r) const
{
    if (!(r < h) || r < 0.0) {
        return r < 0.0 ? u.front() : 0.0;
    }
    const double pos = r / h * Ny();
    const auto i = std::min(static_cast<std::size_t>(pos), u.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * u[i] + w * u[i + 1];
}

double FreeBoundaryState::v_at(double r) const
{
    const double pos = std::clamp(r / dr, 0.0, static_cast<double>(v.size() - 1));
    const auto j = std::min(static_cast<std::size_t>(pos), v.size() - 2);
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * v[j] + w * v[j + 1];
}

FreeBoundaryState initial_state(const InitialData& init)
{
    FreeBoundaryState s;
    s.t = 0.0;
    s.h = init.h0;
    s.u = init.u0;
    s.v = init.v0;
    s.dr = init.dr;
    return s;
}

FieldBounds field_bounds(const InitialData& init)
{
    FieldBounds b;
    for (double u : init.u0) {
        b.u_cap = std::max(b.u_cap, u);
    }
    for (double v : init.v0) {
        b.v_cap = std::max(b.v_cap, v);
    }
    return b;
}

namespace {

/// Radial finite-volume Laplacian weights on a uniform grid x_k = k dx:
/// Delta w_k ~ (east_k (w_{k+1} - w_k) - west_k (w_k - w_{k-1})) / dx^2.
/// The center cell [0, dx/2] gives Delta w_0 = 2N (w_1 - w_0) / dx^2.
struct RadialStencil {
    std::vector<double> east, west;

    RadialStencil(std::size_t nodes, int N)
        : east(nodes, 0.0), west(nodes, 0.0)
    {
        const double p = N - 1;
        const std::size_t last = nodes - 1;
        // Face areas and cell volumes in units of dx (scale-free for a uniform grid).
        auto face = [&](double x) { return std::pow(x, p); };
        auto volume = [&](double a, double b) { return (std::pow(b, N) - std::pow(a, N)) / N; };
        for (std::size_t k = 0; k <= last; ++k) {
            const double x = static_cast<double>(k);
            const double lo = k == 0 ? 0.0 : x - 0.5;
            const double hi = k == last ? x : x + 0.5;
            const double vol = volume(lo, hi);
            if (k < last) {
                east[k] = face(x + 0.5) / vol;
            }
            if (k > 0) {
                west[k] = face(x - 0.5) / vol;
            }
        }
    }
};

void check_band(const std::vector<double>& x, double cap, const char* name)
{
    for (double value : x) {
        if (!(value >= -0.1 * cap) || !(value <= 1.1 * cap)) {
            std::ostringstream msg;
            msg << "step: " << name << " = " << value << " left the band [0, " << cap
                << "] by more than 10%; reduce dt";
            throw StabilityError(msg.str());
        }
    }
}

}  // namespace

FreeBoundaryState step(const FreeBoundaryState& state, const ModelParams& m, double dt,
                       const FieldBounds& bounds)
{
    if (!(dt > 0.0)) {
        throw DomainError("step: dt must be positive");
    }
    const int Ny = state.Ny();
    if (Ny < 2 || state.v.size() < 3) {
        throw DomainError("step: state grids are too small");
    }
    const auto nu = static_cast<std::size_t>(Ny) + 1;
    const std::size_t nv = state.v.size();
    const double dy = 1.0 / Ny;
    const double h = state.h;
    const auto& u = state.u;
    const auto& v = state.v;

    // 1. Stefan law with the beginning-of-step gradient.
    const double u_r = (3.0 * u[nu - 1] - 4.0 * u[nu - 2] + u[nu - 3]) / (2.0 * dy * h);
    double dhdt = -m.mu * u_r;
    if (dhdt < 0.0) {
        if (-dhdt * dt > 64.0 * std::numeric_limits<double>::epsilon() * h) {
            std::ostringstream msg;
            msg << "step: front would retreat at t = " << state.t << " (h' = " << dhdt << ")";
            throw InvariantViolation(msg.str());
        }
        dhdt = 0.0;
    }
    const double h_new = h + dt * dhdt;

    FreeBoundaryState next;
    next.t = state.t + dt;
    next.h = h_new;
    next.dhdt = dhdt;
    next.dr = state.dr;

    // 2. u on the mapped grid: U_t = (d / h^2) Delta_y U + y (h'/h) U_y + f.
    {
        const RadialStencil st(nu, m.N);
        const double kappa = m.d / (h_new * h_new * dy * dy);
        const double vel = dhdt / h_new;
        Tridiagonal M(nu);
        std::vector<double> rhs(nu);
        for (std::size_t i = 0; i + 1 < nu; ++i) {
            const double c = static_cast<double>(i) * dy * vel;  // >= 0
            double lo = -kappa * st.west[i];
            double up = -kappa * st.east[i];
            double di = kappa * (st.west[i] + st.east[i]);
            const double adv = c / (2.0 * dy);
            if (lo + adv <= 0.0) {
                lo += adv;
                up -= adv;
            } else {
                di += 2.0 * adv;
                up -= 2.0 * adv;
            }
            M.lower[i] = dt * lo;
            M.diag[i] = 1.0 + dt * di;
            M.upper[i] = dt * up;
            const double vi = state.v_at(static_cast<double>(i) * dy * h);
            rhs[i] = u[i] + dt * m.r * u[i] * (1.0 - u[i] - m.b * vi);
        }
        M.diag[nu - 1] = 1.0;
        M.lower[nu - 1] = 0.0;
        rhs[nu - 1] = 0.0;
        M.solve_in_place(rhs);
        next.u = std::move(rhs);
    }

    // 3. v on the fixed grid, u extended by zero beyond the front.
    {
        const RadialStencil st(nv, m.N);
        const double kappa = 1.0 / (state.dr * state.dr);
        Tridiagonal M(nv);
        std::vector<double> rhs(nv);
        for (std::size_t j = 0; j < nv; ++j) {
            M.lower[j] = -dt * kappa * st.west[j];
            M.upper[j] = -dt * kappa * st.east[j];
            M.diag[j] = 1.0 + dt * kappa * (st.west[j] + st.east[j]);
            const double uj = next.u_at(static_cast<double>(j) * state.dr);
            rhs[j] = v[j] + dt * v[j] * (1.0 - v[j] - m.a * uj);
        }
        M.solve_in_place(rhs);
        next.v = std::move(rhs);
    }

    check_band(next.u, bounds.u_cap, "u");
    check_band(next.v, bounds.v_cap, "v");
    return next;
}

namespace {

TrajectorySample sample_of(const FreeBoundaryState& s, double compact_radius)
{
    TrajectorySample out;
    out.t = s.t;
    out.h = s.h;
    out.dhdt = s.dhdt;
    out.u_max = *std::max_element(s.u.begin(), s.u.end());
    out.u_min_compact = std::numeric_limits<double>::infinity();
    out.v_max_compact = 0.0;
    out.v_min_compact = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s.v.size(); ++j) {
        const double r = static_cast<double>(j) * s.dr;
        if (r > compact_radius) {
            break;
        }
        out.u_min_compact = std::min(out.u_min_compact, s.u_at(r));
        out.v_max_compact = std::max(out.v_max_compact, s.v[j]);
        out.v_min_compact = std::min(out.v_min_compact, s.v[j]);
    }
    return out;
}

Snapshot snapshot_of(const FreeBoundaryState& s)
{
    Snapshot snap;
    snap.t = s.t;
    snap.h = s.h;
    snap.r.resize(s.v.size());
    snap.u.resize(s.v.size());
    snap.v = s.v;
    for (std::size_t j = 0; j < s.v.size(); ++j) {
        snap.r[j] = static_cast<double>(j) * s.dr;
        snap.u[j] = s.u_at(snap.r[j]);
    }
    return snap;
}

void count_violations(const FreeBoundaryState& prev, const FreeBoundaryState& next, const FieldBounds& b,
                      InvariantCounters& c)
{
    ++c.steps;
    const double rel = 1e-6;
    if (next.h < prev.h) {
        ++c.front_decrease;
    }
    const double u_lim = b.u_cap * (1.0 + rel);
    const double v_lim = b.v_cap * (1.0 + rel);
    bool u_neg = false, v_neg = false, u_hi = false, v_hi = false;
    for (double u : next.u) {
        u_neg = u_neg || u < 0.0;
        u_hi = u_hi || u > u_lim;
        c.worst_u_excess = std::max(c.worst_u_excess, u - b.u_cap);
    }
    for (double v : next.v) {
        v_neg = v_neg || v < 0.0;
        v_hi = v_hi || v > v_lim;
        c.worst_v_excess = std::max(c.worst_v_excess, v - b.v_cap);
    }
    c.u_negative += u_neg;
    c.v_negative += v_neg;
    c.u_above_cap += u_hi;
    c.v_above_cap += v_hi;
}

}  // namespace

Trajectory simulate(const InitialData& init, const ModelParams& m, double t_end,
                    const SimulationOptions& opts)
{
    init.validate();
    m.validate();
    if (!(t_end > 0.0) || !(opts.dt > 0.0) || !(opts.sample_interval > 0.0)) {
        throw DomainError("simulate: t_end, dt and sample_interval must be positive");
    }
    const double s0_upper = 2.0 * std::sqrt(m.r * m.d);
    const double needed = init.h0 + s0_upper * t_end + opts.travel_margin;
    if (init.R_max() < needed) {
        std::ostringstream msg;
        msg << "simulate: R_max = " << init.R_max() << " is below h0 + s0_upper t_end + margin = " << needed;
        throw DomainError(msg.str());
    }

    const FieldBounds bounds = field_bounds(init);
    Trajectory traj;
    traj.h0 = init.h0;
    traj.compact_radius = opts.compact_radius;

    std::vector<double> snap_times = opts.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;

    FreeBoundaryState s = initial_state(init);
    traj.samples.push_back(sample_of(s, opts.compact_radius));
    while (next_snap < snap_times.size() && snap_times[next_snap] <= 0.0) {
        traj.snapshots.push_back(snapshot_of(s));
        ++next_snap;
    }

    const long n_steps = std::lround(t_end / opts.dt);
    const long sample_every = std::max(1L, std::lround(opts.sample_interval / opts.dt));
    const double eps_t = 1e-9 * opts.dt;
    for (long k = 1; k <= n_steps; ++k) {
        FreeBoundaryState next = step(s, m, opts.dt, bounds);
        next.t = static_cast<double>(k) * opts.dt;
        count_violations(s, next, bounds, traj.counters);
        s = std::move(next);
        if (s.h > 0.9 * s.R_max()) {
            std::ostringstream msg;
            msg << "simulate: front h = " << s.h << " passed 0.9 R_max at t = " << s.t;
            throw SolverError(msg.str());
        }
        if (k % sample_every == 0 || k == n_steps) {
            traj.samples.push_back(sample_of(s, opts.compact_radius));
        }
        while (next_snap < snap_times.size() && snap_times[next_snap] <= s.t + eps_t) {
            traj.snapshots.push_back(snapshot_of(s));
            ++next_snap;
        }
    }
    traj.final_state = std::move(s);
    return traj;
}

std::string to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::Spreading: return "Spreading";
    case Outcome::Vanishing: return "Vanishing";
    case Outcome::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

Outcome classify_outcome(const Trajectory& traj, const ClassifyThresholds& th)
{
    if (traj.samples.size() < 3) {
        return Outcome::Undetermined;
    }
    const auto& first = traj.samples.front();
    const auto& last = traj.samples.back();
    const double duration = last.t - first.t;
    if (!(duration >= th.min_duration)) {
        return Outcome::Undetermined;
    }
    const double t_window = last.t - th.window_fraction * duration;
    auto it = std::find_if(traj.samples.begin(), traj.samples.end(),
                           [&](const TrajectorySample& x) { return x.t >= t_window; });
    if (it == traj.samples.end() || !(last.t > it->t)) {
        return Outcome::Undetermined;
    }
    const double window_speed = (last.h - it->h) / (last.t - it->t);

    if (window_speed < th.eps_h && last.u_max < th.theta_u) {
        return Outcome::Vanishing;
    }
    if (last.h > th.growth_factor * traj.h0 && window_speed > th.eps_h
        && last.u_min_compact > 1.0 - th.theta && last.v_max_compact < th.theta) {
        return Outcome::Spreading;
    }
    return Outcome::Undetermined;
}

SpeedFit measure_speed(const Trajectory& traj, double window_fraction)
{
    if (!(window_fraction > 0.0) || window_fraction > 1.0) {
        throw DomainError("measure_speed: window_fraction must lie in (0, 1]");
    }
    const std::size_t n = traj.samples.size();
    const auto count = static_cast<std::size_t>(std::floor(window_fraction * static_cast<double>(n)));
    if (count < 3) {
        throw DomainError("measure_speed: fewer than 3 samples in the window");
    }
    const std::size_t start = n - count;
    double st = 0.0, sh = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        st += traj.samples[k].t;
        sh += traj.samples[k].h;
    }
    const double tm = st / static_cast<double>(count);
    const double hm = sh / static_cast<double>(count);
    double stt = 0.0, sth = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        const double dt = traj.samples[k].t - tm;
        stt += dt * dt;
        sth += dt * (traj.samples[k].h - hm);
    }
    if (!(stt > 0.0)) {
        throw DomainError("measure_speed: window has no time spread");
    }
    SpeedFit fit;
    fit.samples = static_cast<int>(count);
    fit.slope = sth / stt;
    fit.intercept = hm - fit.slope * tm;
    double ssr = 0.0;
    for (std::size_t k = start; k < n; ++k) {
        const double e = traj.samples[k].h - (fit.intercept + fit.slope * traj.samples[k].t);
        ssr += e * e;
    }
    fit.stderr_ = std::sqrt(ssr / static_cast<double>(count - 2) / stt);
    return fit;
}

SupErrors compare_with_semiwave(const FreeBoundaryState& state, const SemiWaveProfile& prof,
                                std::optional<double> R_cmp)
{
    const XiGrid& g = prof.grid;
    const double hx = g.spacing();
    auto lookup = [&](const std::vector<double>& f, double xi) {
        const double pos = (xi + g.L_left) / hx;
        if (pos <= 0.0) {
            return f.front();
        }
        if (pos >= static_cast<double>(f.size() - 1)) {
            return f.back();
        }
        const auto k = static_cast<std::size_t>(pos);
        const double w = pos - static_cast<double>(k);
        return (1.0 - w) * f[k] + w * f[k + 1];
    };

    SupErrors err;
    const int Ny = state.Ny();
    for (int i = 0; i <= Ny; ++i) {
        const double r = state.h * i / Ny;
        err.u_error = std::max(err.u_error, std::abs(state.u[static_cast<std::size_t>(i)] - lookup(prof.psi, state.h - r)));
    }
    err.R_cmp = R_cmp.value_or(std::min(state.R_max(), state.h + g.L_left));
    for (std::size_t j = 0; j < state.v.size(); ++j) {
        const double r = static_cast<double>(j) * state.dr;
        if (r > err.R_cmp) {
            break;
        }
        err.v_error = std::max(err.v_error, std::abs(state.v[j] - lookup(prof.phi, state.h - r)));
    }
    return err;
}

void write_front_csv(const Trajectory& traj, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "t,h,dhdt,h_over_t\n" << std::setprecision(12);
    for (const auto& s : traj.samples) {
        out << s.t << ',' << s.h << ',' << s.dhdt << ',';
        if (s.t > 0.0) {
            out << s.h / s.t;
        } else {
            out << "nan";
        }
        out << '\n';
    }
}

void write_snapshot_csv(const Snapshot& snap, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    out << "r,u,v\n" << std::setprecision(12);
    for (std::size_t j = 0; j < snap.r.size(); ++j) {
        out << snap.r[j] << ',' << snap.u[j] << ',' << snap.v[j] << '\n';
    }
}

}  // namespace lvfb
