#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lvfb/model.hpp"
#include "lvfb/semiwave.hpp"

namespace lvfb {

/// Radially symmetric initial data. u0 lives on the mapped grid y = r / h0,
/// y_i = i / (size - 1); v0 on r_j = j dr, j = 0 .. R_max / dr.
struct InitialData {
    double h0 = 5.0;
    std::vector<double> u0;
    std::vector<double> v0;
    double dr = 0.1;
    double v0_floor = 1.0;  ///< declared lim inf of v0 at infinity

    /// Throws DomainError on: h0 <= 0, fewer than 3 u nodes, u0 not positive
    /// before the last node, u0 at the last node nonzero, first two u nodes
    /// unequal, negative or identically zero v0.
    void validate() const;

    double R_max() const { return dr * static_cast<double>(v0.size() - 1); }

    /// u0(r) = amplitude cos(pi r / (2 h0)) on Ny + 1 mapped nodes and a
    /// constant v0 on [0, R_max].
    static InitialData cosine_bump(double h0, double amplitude, double v_const, double R_max,
                                   int Ny = 400, double dr = 0.1);
};

/// Snapshot of the moving-domain problem.
struct FreeBoundaryState {
    double t = 0.0;
    double h = 0.0;
    double dhdt = 0.0;
    std::vector<double> u;  ///< on y = r / h in [0, 1]; u.back() = 0
    std::vector<double> v;  ///< on r = j dr in [0, R_max]
    double dr = 0.1;

    int Ny() const { return static_cast<int>(u.size()) - 1; }
    double R_max() const { return dr * static_cast<double>(v.size() - 1); }

    /// u at physical radius r (piecewise linear in y; zero for r >= h).
    double u_at(double r) const;
    /// v at physical radius r (piecewise linear; clamped to the grid).
    double v_at(double r) const;
};

FreeBoundaryState initial_state(const InitialData& init);

/// Admissible band for a run: u <= u_cap, v <= v_cap, both >= 0.
struct FieldBounds {
    double u_cap = 1.0;
    double v_cap = 1.0;
};

/// max(1, max u0) and max(1, max v0).
FieldBounds field_bounds(const InitialData& init);

/// One step of size dt:
///  1. h' = -mu u_r(h) from the one-sided second-order gradient at y = 1;
///  2. u on the mapped grid: implicit diffusion (d / h^2) Delta_y and
///     front-fixing advection y (h'/h) u_y, explicit reaction with v read at
///     the physical nodes;
///  3. v on the fixed grid: implicit diffusion, explicit reaction with u
///     extended by 0 beyond h; zero flux at r = 0 and r = R_max.
/// Throws InvariantViolation if h' < 0 beyond rounding and StabilityError if
/// a field leaves [0, 1.1 cap].
FreeBoundaryState step(const FreeBoundaryState& state, const ModelParams& m, double dt,
                       const FieldBounds& bounds = {});

struct SimulationOptions {
    double dt = 0.01;
    double sample_interval = 0.5;
    std::vector<double> snapshot_times;
    double compact_radius = 10.0;
    /// Extra room demanded beyond h0 + s0_upper t_end.
    double travel_margin = 20.0;
};

/// Counts of steps on which an invariant failed beyond one part in 1e6.
struct InvariantCounters {
    long steps = 0;
    long front_decrease = 0;
    long u_negative = 0;
    long v_negative = 0;
    long u_above_cap = 0;
    long v_above_cap = 0;
    double worst_u_excess = 0.0;
    double worst_v_excess = 0.0;

    long total() const { return front_decrease + u_negative + v_negative + u_above_cap + v_above_cap; }
};

struct TrajectorySample {
    double t = 0.0;
    double h = 0.0;
    double dhdt = 0.0;
    double u_max = 0.0;
    double u_min_compact = 0.0;  ///< min u on [0, compact_radius] (u = 0 beyond h)
    double v_max_compact = 0.0;
    double v_min_compact = 0.0;
};

struct Snapshot {
    double t = 0.0;
    double h = 0.0;
    std::vector<double> r, u, v;  ///< on the v grid; u = 0 beyond h
};

struct Trajectory {
    double h0 = 0.0;
    double compact_radius = 10.0;
    std::vector<TrajectorySample> samples;
    std::vector<Snapshot> snapshots;
    InvariantCounters counters;
    std::optional<FreeBoundaryState> final_state;
};

/// Repeated step() from initial_state(init) to t_end. Refuses to start when
/// R_max < h0 + s0_upper t_end + travel_margin; throws SolverError if h passes
/// 0.9 R_max during the run.
Trajectory simulate(const InitialData& init, const ModelParams& m, double t_end,
                    const SimulationOptions& opts = {});

enum class Outcome { Spreading, Vanishing, Undetermined };

std::string to_string(Outcome outcome);

struct ClassifyThresholds {
    double theta = 0.1;          ///< spreading: u > 1 - theta and v < theta on the compact
    double theta_u = 1e-3;       ///< vanishing: max u below this
    double eps_h = 1e-4;         ///< vanishing: dh/dt below this over the final window
    double growth_factor = 2.0;  ///< spreading: h(t_end) > growth_factor h0
    double min_duration = 20.0;  ///< shorter trajectories are Undetermined
    double window_fraction = 0.25;
};

Outcome classify_outcome(const Trajectory& traj, const ClassifyThresholds& th = {});

struct SpeedFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    double intercept = 0.0;
    int samples = 0;
};

/// Least-squares line through (t, h) over the trailing window_fraction of
/// samples. Throws DomainError with fewer than 3 samples in the window.
SpeedFit measure_speed(const Trajectory& traj, double window_fraction = 0.5);

struct SupErrors {
    double u_error = 0.0;  ///< sup over [0, h] of |u(t, r) - psi(h - r)|
    double v_error = 0.0;  ///< sup over [0, R_cmp] of |v(t, r) - phi(h - r)|
    double R_cmp = 0.0;
};

/// Places the semi-wave with its free-boundary point at r = h(t). Outside the
/// profile grid psi and phi take their end values.
SupErrors compare_with_semiwave(const FreeBoundaryState& state, const SemiWaveProfile& prof,
                                std::optional<double> R_cmp = std::nullopt);

/// `t,h,dhdt,h_over_t`
void write_front_csv(const Trajectory& traj, const std::string& path);
/// `r,u,v`
void write_snapshot_csv(const Snapshot& snap, const std::string& path);

}  // namespace lvfb
