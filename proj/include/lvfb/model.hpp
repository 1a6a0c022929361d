#pragma once

#include <string>

#include "lvfb/errors.hpp"

namespace lvfb {

/// Coefficients of the dimensional competition model
///
///   U_t - d1 ΔU = U (a1 - b1 U - c1 V),   H'(t) = -mu_hat U_r(t, H(t))
///   V_t - d2 ΔV = V (a2 - b2 U - c2 V)
///
/// with U the invader living on the ball r < H(t), V the native species.
struct PhysicalParams {
    double d1 = 1.0, d2 = 1.0;
    double a1 = 1.0, a2 = 1.0;
    double b1 = 1.0, c2 = 1.0;  // intraspecific
    double c1 = 1.0, b2 = 1.0;  // interspecific
    double mu_hat = 1.0;
    double H0 = 1.0;
};

/// Nondimensional coefficients:
///
///   u_t - d Δu = r u (1 - u - b v),   h'(t) = -mu u_r(t, h(t))
///   v_t -   Δv =   v (1 - v - a u)
struct ModelParams {
    double d = 1.0;
    double r = 1.0;
    double a = 2.0;
    double b = 0.5;  // b = 0 allowed
    double mu = 1.0;
    int N = 1;

    /// Throws DomainError naming the first offending field.
    void validate() const;
};

/// Result of nondimensionalize: the model plus the rescaled initial radius.
struct Nondimensionalized {
    ModelParams model;
    double h0 = 0.0;
};

enum class CompetitionRegime { SuperiorU, InferiorU, Other };

std::string to_string(CompetitionRegime regime);

/// Additive shifts of the two carrying levels, u -> 1 + eps_u, v -> 1 + eps_v.
/// Zero offsets give the unperturbed semi-wave system.
struct GrowthOffsets {
    double eps_u = 0.0;
    double eps_v = 0.0;

    double u_level() const { return 1.0 + eps_u; }
    double v_level() const { return 1.0 + eps_v; }

    void validate() const;
};

Nondimensionalized nondimensionalize(const PhysicalParams& p, int N = 1);

CompetitionRegime classify(const ModelParams& m);

}  // namespace lvfb
