#include "lvfb/model.hpp"

#include <cmath>

namespace lvfb {

namespace {

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string("parameter '") + name + "' must be positive and finite (got "
                          + std::to_string(value) + ")");
    }
}

void require_nonnegative(double value, const char* name)
{
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string("parameter '") + name + "' must be nonnegative and finite (got "
                          + std::to_string(value) + ")");
    }
}

}  // namespace

void ModelParams::validate() const
{
    require_positive(d, "d");
    require_positive(r, "r");
    require_positive(a, "a");
    // b = 0 decouples the invader from the native species (scalar limit).
    require_nonnegative(b, "b");
    require_positive(mu, "mu");
    if (N < 1) {
        throw DomainError("parameter 'N' must be a positive integer (got " + std::to_string(N) + ")");
    }
}

void GrowthOffsets::validate() const
{
    if (!(u_level() > 0.0)) {
        throw DomainError("offset 'eps_u' leaves a nonpositive carrying level");
    }
    if (!(v_level() > 0.0)) {
        throw DomainError("offset 'eps_v' leaves a nonpositive carrying level");
    }
}

std::string to_string(CompetitionRegime regime)
{
    switch (regime) {
    case CompetitionRegime::SuperiorU: return "SuperiorU";
    case CompetitionRegime::InferiorU: return "InferiorU";
    case CompetitionRegime::Other: return "Other";
    }
    return "Other";
}

Nondimensionalized nondimensionalize(const PhysicalParams& p, int N)
{
    require_positive(p.d1, "d1");
    require_positive(p.d2, "d2");
    require_positive(p.a1, "a1");
    require_positive(p.a2, "a2");
    require_positive(p.b1, "b1");
    require_positive(p.b2, "b2");
    require_positive(p.c1, "c1");
    require_positive(p.c2, "c2");
    require_positive(p.mu_hat, "mu_hat");
    require_positive(p.H0, "H0");

    Nondimensionalized out;
    out.model.d = p.d1 / p.d2;
    out.model.r = p.a1 / p.a2;
    out.model.a = p.a1 * p.b2 / (p.a2 * p.b1);
    out.model.b = p.a2 * p.c1 / (p.a1 * p.c2);
    out.model.mu = p.a1 / (p.b1 * p.d2) * p.mu_hat;
    out.model.N = N;
    out.h0 = std::sqrt(p.a2 / p.d2) * p.H0;
    out.model.validate();
    return out;
}

CompetitionRegime classify(const ModelParams& m)
{
    if (m.a > 1.0 && 1.0 > m.b) {
        return CompetitionRegime::SuperiorU;
    }
    if (m.a < 1.0 && 1.0 < m.b) {
        return CompetitionRegime::InferiorU;
    }
    return CompetitionRegime::Other;
}

}  // namespace lvfb
