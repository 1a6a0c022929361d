#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lvfb {

/// Tridiagonal system A x = f stored by diagonals.
///
/// Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = f[i];
/// lower[0] and upper[n-1] are ignored.
class Tridiagonal {
public:
    explicit Tridiagonal(std::size_t n = 0) { resize(n); }

    void resize(std::size_t n)
    {
        lower.assign(n, 0.0);
        diag.assign(n, 0.0);
        upper.assign(n, 0.0);
        scratch_.assign(n, 0.0);
        denom_.assign(n, 0.0);
        factored_ = false;
    }

    std::size_t size() const { return diag.size(); }

    /// Overwrites rhs with the solution (Thomas algorithm, no pivoting).
    ///
    /// For an M-matrix (positive diagonal, nonpositive off-diagonals, weak
    /// diagonal dominance) every elimination step keeps the sign of a
    /// one-signed right-hand side, so the solution inherits that sign
    /// exactly in floating point.
    void solve_in_place(std::span<double> rhs);

    /// Splits solve_in_place into a one-off elimination and repeated
    /// substitutions for a fixed matrix. Call factorize() again after
    /// editing the diagonals.
    void factorize();
    void solve_factored(std::span<double> rhs) const;

    /// True when the matrix is an M-matrix in the sense above.
    bool is_m_matrix() const;

    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

private:
    std::vector<double> scratch_;
    std::vector<double> denom_;
    bool factored_ = false;
};

}  // namespace lvfb
