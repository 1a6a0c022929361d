#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lvfb/model.hpp"
#include "lvfb/semiwave.hpp"

namespace lvfb {

/// Analytic enclosure [2 sqrt(r d (1 - b)), 2 sqrt(r d)] of the minimal speed.
struct S0Bounds {
    double lower = 0.0;
    double upper = 0.0;
};

S0Bounds s0_bounds(const ModelParams& m);

enum class ProbeVerdict { Exists, Degenerate, Undecided };

struct ExistenceProbe {
    double s = 0.0;
    ProbeVerdict verdict = ProbeVerdict::Undecided;
    double dpsi0 = 0.0;
    double t_relax = 0.0;
};

struct S0Options {
    double tol_s = 1e-3;
    /// Relaxation cap per probe is t_floor * max(1, upper / (upper - s)),
    /// never above relax.t_max.
    double t_floor = 2000.0;
    RelaxOptions relax{.tol = 1e-9, .t_max = 1.2e4};
    /// Search interval; defaults to the analytic bounds.
    std::optional<S0Bounds> search;
};

struct S0Estimate {
    double value = 0.0;
    double lo = 0.0;  ///< largest speed with a semi-wave found (or the search start)
    double hi = 0.0;  ///< smallest speed shown degenerate or left undecided
    S0Bounds bounds;
    /// An undecided probe was assigned to the degenerate side.
    bool marginal = false;
    std::vector<ExistenceProbe> probes;
    /// Profile at `lo`, usable as a warm start for any s >= lo.
    std::optional<SemiWaveProfile> lo_profile;
};

/// Bisection for the edge of semi-wave existence: a converged profile at s
/// means s < s0, a collapse means s >= s0. A probe that neither converges
/// nor collapses within the relaxation cap shrinks the bracket from above.
S0Estimate estimate_s0(const ModelParams& m, const XiGrid& grid, const S0Options& opts = {});

struct EtaSample {
    double s = 0.0;
    double eta = 0.0;  ///< mu psi_s'(0) - s
};

struct SpeedResult {
    double s0_lower = 0.0;
    double s0_upper = 0.0;
    double s0_est = 0.0;
    double s_mu = 0.0;
    double mu = 0.0;
    double tol_s = 1e-4;
    double eta_residual = 0.0;  ///< eta at s_mu
    double dpsi0 = 0.0;         ///< psi_{s_mu}'(0)
    bool s0_marginal = false;
    std::vector<EtaSample> trace;
    std::optional<SemiWaveProfile> profile;  ///< semi-wave at s_mu

    /// `a,b,d,r,mu,s0_lower,s0_upper,s0_est,s_mu,eta_residual`
    static std::string csv_header();
    std::string csv_row(const ModelParams& m) const;
};

struct SpeedOptions {
    double tol_s = 1e-4;
    /// |eta(s_mu)| target, relative to max(1, s_mu).
    double eta_rel_tol = 1e-4;
    int max_iterations = 80;
    RelaxOptions relax{.tol = 1e-10, .t_max = 2.0e4};
    S0Options s0{};
};

/// Root of eta_mu(s) = mu psi_s'(0) - s on [0, s0): bisection down to tol_s,
/// then secant steps inside the bracket until |eta| meets the residual
/// target. Uses m.mu unless `mu` is given.
SpeedResult solve_s_mu(const ModelParams& m, const XiGrid& grid, const SpeedOptions& opts = {},
                       std::optional<double> mu = std::nullopt);

/// Same, reusing an existing s0 estimate (e.g. across a mu sweep).
SpeedResult solve_s_mu(const ModelParams& m, double mu, const XiGrid& grid, const S0Estimate& s0,
                       const SpeedOptions& opts = {});

/// Monotone full-line wave (Phi, Psi)(-inf) = (1, 0), (+inf) = (0, 1),
/// translated so that Psi(0) = 1/2.
struct TravelingWaveProfile {
    XiGrid grid;
    double s = 0.0;
    std::vector<double> Phi;
    std::vector<double> Psi;
    double residual = 0.0;  ///< max residual of the discrete equations
    int newton_iterations = 0;
};

struct NoWave {
    double s = 0.0;
    std::string reason;
};

struct WaveOptions {
    double t_shape = 50.0;  ///< moving-frame relaxation that shapes the initial guess
    double tol = 1e-11;     ///< Newton residual target
    int newton_max_iterations = 50;
    double monotone_slack = 1e-14;
    /// Largest Psi(-L_left) accepted as having reached the state (1, 0).
    double left_tol = 1e-3;
};

/// Solves the full-line wave equations (the semi-wave system without the
/// cut-off). A short relaxation in the moving frame shapes the guess; damped
/// Newton then fixes the phase by Psi(0) = 1/2 with Phi = 1 at -L_left and
/// (Phi, Psi) = (0, 1) at L_right. Psi(-L_left) is free, since a wave leaves
/// (1, 0) along both of its growing Psi modes. NoWave when the relaxation
/// collapses or the steady state is not a monotone connection of the two
/// states; NonConverged when Newton stalls.
std::variant<TravelingWaveProfile, NoWave> solve_traveling_wave(const ModelParams& m, double s,
                                                                const XiGrid& grid,
                                                                const WaveOptions& opts = {});

}  // namespace lvfb
