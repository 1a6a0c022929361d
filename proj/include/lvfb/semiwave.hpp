#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lvfb/model.hpp"

namespace lvfb {

/// Uniform grid on [-L_left, L_right] with a node at xi = 0.
///
/// Node j sits at xi = -L_left + j h; the free-boundary node is j = n_left.
struct XiGrid {
    double L_left = 60.0;
    double L_right = 60.0;
    int n_left = 1200;
    int n_right = 1200;

    /// Throws DomainError unless both halves are positive and share one spacing.
    void validate() const;

    double spacing() const { return L_right / n_right; }
    int size() const { return n_left + n_right + 1; }
    int zero_index() const { return n_left; }
    double xi(int j) const { return (j - n_left) * spacing(); }

    /// Same extents with every cell split into `factor` cells.
    XiGrid refined(int factor) const;

    static XiGrid with_spacing(double L_left, double L_right, double h);
};

/// Scalar half-line logistic profiles used as the monotone seeds:
/// phi_lower solves -phi'' = phi (V - phi) on xi < 0 with phi(0) = 0 and is
/// zero for xi >= 0; psi_upper solves -d psi'' = r psi (U - psi) on xi > 0
/// with psi(0) = 0 and is zero for xi <= 0. (U, V are the carrying levels.)
struct SeedPair {
    std::vector<double> phi_lower;
    std::vector<double> psi_upper;
    int newton_iterations = 0;
};

SeedPair build_seeds(const ModelParams& m, const XiGrid& grid, const GrowthOffsets& off = {});

/// Far-field condition at xi = L_right.
enum class RightBoundary {
    Dirichlet,  ///< phi = 0, psi = U
    Robin,      ///< phi' = gamma1 phi, (U - psi)' = max(gamma1, lambda1) (U - psi)
};

struct RelaxOptions {
    double tol = 1e-9;      ///< stop when max |update| / dt < tol
    double t_max = 2.0e4;   ///< relaxation-time cap
    double dt = 0.25;       ///< requested step; clamped to keep the reaction update monotone
    double degenerate_threshold = 1e-4;
    /// q is tested for collapse on [0, probe_fraction * L_right]; the rest is
    /// left to the boundary layer pinned by the far-field value.
    double probe_fraction = 0.5;
    RightBoundary right_bc = RightBoundary::Dirichlet;
};

struct RelaxDiagnostics {
    double t_final = 0.0;
    long steps = 0;
    double dt_used = 0.0;
    double update_rate = 0.0;         ///< max |update| / dt at the last step
    long monotone_violations = 0;     ///< steps where p decreased or q increased beyond rounding
    double worst_monotone_violation = 0.0;
    bool warm_started = false;
    bool upwinded = false;            ///< advection fell back to upwinding (cell Peclet > 1)
};

/// Converged semi-wave on a truncated grid.
///
/// psi is stored on every node (zero for xi <= 0) so profiles on a shared
/// grid compare index-by-index.
struct SemiWaveProfile {
    XiGrid grid;
    double s = 0.0;
    std::vector<double> phi;
    std::vector<double> psi;
    double dpsi0 = 0.0;
    double residual = 0.0;
    GrowthOffsets offsets;
    RelaxDiagnostics diagnostics;
};

/// The relaxation collapsed onto (V, 0): no semi-wave at this speed.
struct Degenerate {
    double s = 0.0;
    double probe_value = 0.0;
    RelaxDiagnostics diagnostics;
};

using RelaxOutcome = std::variant<SemiWaveProfile, Degenerate>;

/// Marches
///
///   p_t - p'' + s p' = p (V - p - a chi q),      xi in (-L_left, L_right)
///   q_t - d q'' + s q' = r q (U - q - b p),      xi in (0, L_right)
///
/// (chi = 1 on xi >= 0) to steady state. Seeds are the SeedPair, or `warm` if
/// given; a warm profile must come from a speed no larger than s on the same
/// grid so that it is again an ordered sub/super pair. The update is carried
/// in increment form, which keeps p nondecreasing and q nonincreasing in
/// relaxation time exactly.
///
/// Throws NonConverged when t_max is reached without a steady state or a
/// collapse.
RelaxOutcome relax_semiwave(const ModelParams& m, double s, const GrowthOffsets& off,
                            const XiGrid& grid, const RelaxOptions& opts = {},
                            const SemiWaveProfile* warm = nullptr);

/// Characteristic exponents of the linearizations at the limit states.
struct TailExponents {
    double gamma1 = 0.0, gamma2 = 0.0;    ///< phi at +inf
    double lambda1 = 0.0, lambda2 = 0.0;  ///< U - psi at +inf
    std::optional<double> beta1, beta2;   ///< psi-type tail at (V, 0); empty when complex
    double s = 0.0, d = 1.0, r = 1.0;

    /// g(y) = -d y^2 + s y + r
    double g(double y) const { return -d * y * y + s * y + r; }
};

TailExponents tail_exponents(const ModelParams& m, double s, const GrowthOffsets& off = {});

struct ValidationReport {
    double phi_residual = 0.0;  ///< max |s phi' - phi'' - phi(V - phi - a psi)| on interior nodes
    double psi_residual = 0.0;  ///< max over interior xi > 0
    long phi_monotone_violations = 0;  ///< increases beyond monotone_slack
    long psi_monotone_violations = 0;
    double monotone_slack = 0.0;
    double phi_tail_slope = 0.0;   ///< fitted d log(phi)/d xi on the right tail
    double phi_tail_expected = 0.0;
    double psi_tail_slope = 0.0;   ///< fitted d log(U - psi)/d xi
    double psi_tail_expected = 0.0;
    double fit_from = 0.0, fit_to = 0.0;

    std::string to_text() const;
};

/// Spatial monotonicity is counted beyond `slack` times the carrying level,
/// the size of the error left by a relaxation stopped at its tolerance.
ValidationReport validate_profile(const SemiWaveProfile& prof, const ModelParams& m, double slack = 1e-12);

/// One-sided second-order estimate of psi'(0) from the first three nodes.
double one_sided_slope(double psi0, double psi1, double psi2, double h);

/// Writes `xi,phi,psi`.
void write_profile_csv(const SemiWaveProfile& prof, const std::string& path);

}  // namespace lvfb
