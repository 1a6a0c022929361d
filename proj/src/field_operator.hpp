#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lvfb/tridiag.hpp"

namespace lvfb::detail {

/// Spatial operator L x = lo x[j-1] + di x[j] + up x[j+1] + c[j] on one field.
/// Rows flagged fixed carry Dirichlet data instead.
struct FieldOperator {
    std::vector<double> lo, di, up, c;
    std::vector<char> fixed;
    bool upwinded = false;

    explicit FieldOperator(std::size_t n) : lo(n, 0.0), di(n, 0.0), up(n, 0.0), c(n, 0.0), fixed(n, 0) {}

    /// -D x'' + s x' at interior row j (centered; upwind if the cell Peclet number exceeds one).
    void set_interior(std::size_t j, double D, double s, double h)
    {
        const double diff = D / (h * h);
        const double adv = s / (2.0 * h);
        if (diff - adv >= 0.0) {
            lo[j] = -diff - adv;
            di[j] = 2.0 * diff;
            up[j] = -diff + adv;
        } else {
            upwinded = true;
            lo[j] = -diff - 2.0 * adv;
            di[j] = 2.0 * diff + 2.0 * adv;
            up[j] = -diff;
        }
    }

    /// Ghost-node closure x' = kappa (target - x) at the last node.
    void set_robin_last(double D, double s, double h, double kappa, double target)
    {
        const std::size_t j = di.size() - 1;
        // x_{n+1} = x_{n-1} + 2 h kappa (target - x_n) substituted into
        // L x_n = -D (x_{n+1} - 2 x_n + x_{n-1}) / h^2 + s (x_{n+1} - x_{n-1}) / (2 h)
        const double diff = D / (h * h);
        lo[j] = -2.0 * diff;
        di[j] = 2.0 * diff + 2.0 * D * kappa / h - s * kappa;
        up[j] = 0.0;
        c[j] = (s * kappa - 2.0 * D * kappa / h) * target;
    }

    /// Ghost-node closure x' = kappa (target - x) at the first node.
    void set_robin_first(double D, double s, double h, double kappa, double target)
    {
        // x_{-1} = x_1 - 2 h kappa (target - x_0)
        const double diff = D / (h * h);
        lo[0] = 0.0;
        di[0] = 2.0 * diff - 2.0 * D * kappa / h - s * kappa;
        up[0] = -2.0 * diff;
        c[0] = (2.0 * D * kappa / h + s * kappa) * target;
    }

    double apply(std::span<const double> x, std::size_t j) const
    {
        double v = di[j] * x[j] + c[j];
        if (j > 0) {
            v += lo[j] * x[j - 1];
        }
        if (j + 1 < x.size()) {
            v += up[j] * x[j + 1];
        }
        return v;
    }

    Tridiagonal implicit_matrix(double dt) const
    {
        Tridiagonal M(di.size());
        for (std::size_t j = 0; j < di.size(); ++j) {
            if (fixed[j]) {
                M.diag[j] = 1.0;
                continue;
            }
            M.lower[j] = dt * lo[j];
            M.diag[j] = 1.0 + dt * di[j];
            M.upper[j] = dt * up[j];
        }
        M.factorize();
        return M;
    }
};

}  // namespace lvfb::detail
