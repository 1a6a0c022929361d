#include "lvfb/tridiag.hpp"

#include <cmath>
#include <stdexcept>

namespace lvfb {

void Tridiagonal::factorize()
{
    const std::size_t n = diag.size();
    if (n == 0) {
        factored_ = true;
        return;
    }
    denom_[0] = diag[0];
    scratch_[0] = (n > 1) ? upper[0] / denom_[0] : 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        denom_[i] = diag[i] - lower[i] * scratch_[i - 1];
        scratch_[i] = (i + 1 < n) ? upper[i] / denom_[i] : 0.0;
    }
    factored_ = true;
}

void Tridiagonal::solve_factored(std::span<double> rhs) const
{
    const std::size_t n = diag.size();
    if (rhs.size() != n) {
        throw std::invalid_argument("Tridiagonal::solve_factored: size mismatch");
    }
    if (!factored_) {
        throw std::logic_error("Tridiagonal::solve_factored: matrix not factorized");
    }
    if (n == 0) {
        return;
    }
    rhs[0] = rhs[0] / denom_[0];
    for (std::size_t i = 1; i < n; ++i) {
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        rhs[i] -= scratch_[i] * rhs[i + 1];
    }
}

void Tridiagonal::solve_in_place(std::span<double> rhs)
{
    factorize();
    solve_factored(rhs);
}

bool Tridiagonal::is_m_matrix() const
{
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        if (i > 0) {
            if (lower[i] > 0.0) {
                return false;
            }
            off += -lower[i];
        }
        if (i + 1 < n) {
            if (upper[i] > 0.0) {
                return false;
            }
            off += -upper[i];
        }
        if (!(diag[i] > 0.0) || diag[i] < off * (1.0 - 1e-14)) {
            return false;
        }
    }
    return true;
}

}  // namespace lvfb
