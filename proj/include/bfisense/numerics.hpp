#pragma once

// Small dense complex linear algebra: one-sided Jacobi SVD, unitarity checks
// and Haar-random unitaries. Sized for the <= 8x8 matrices that show up in
// Wi-Fi MIMO, so everything favors robustness over asymptotic speed.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bfisense/errors.hpp"

namespace bfisense {

template <typename Real>
using ComplexMatrixX = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using ComplexMatrix = ComplexMatrixX<double>;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

template <typename Real>
struct SvdResult {
    ComplexMatrixX<Real> u;                              // rows x rows
    Eigen::Matrix<Real, Eigen::Dynamic, 1> singular_values; // min(rows, cols), descending
    ComplexMatrixX<Real> v;                              // cols x cols
};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a)
{
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            const auto z = a(i, j);
            if (!std::isfinite(std::real(z)) || !std::isfinite(std::imag(z)))
                return false;
        }
    return true;
}

/// Largest entry of |Q* Q - I| (spectral-free, cheap).
template <typename Derived>
typename Derived::RealScalar unitarity_error(const Eigen::MatrixBase<Derived>& q)
{
    using Plain = typename Derived::PlainObject;
    const Plain gram = q.adjoint() * q;
    return (gram - Plain::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& q, typename Derived::RealScalar tol)
{
    return q.rows() == q.cols() && unitarity_error(q) <= tol;
}

namespace detail {

// Extends the orthonormal columns u.leftCols(rank) to a full unitary basis by
// Gram-Schmidt against the canonical basis vectors, in index order.
template <typename Real>
void complete_basis(ComplexMatrixX<Real>& u, Eigen::Index rank)
{
    using Complex = std::complex<Real>;
    const Eigen::Index n = u.rows();
    Eigen::Index filled = rank;
    for (Eigen::Index e = 0; e < n && filled < n; ++e) {
        Eigen::Matrix<Complex, Eigen::Dynamic, 1> cand = Eigen::Matrix<Complex, Eigen::Dynamic, 1>::Unit(n, e);
        // Two passes of classical Gram-Schmidt are enough for n <= 8.
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < filled; ++k)
                cand -= u.col(k) * u.col(k).dot(cand);
        const Real norm = cand.norm();
        if (norm > Real(1e-6)) {
            u.col(filled) = cand / norm;
            ++filled;
        }
    }
}

} // namespace detail

/**
 * Full SVD  A = U diag(s) V*  by one-sided (Hestenes) Jacobi.
 *
 * Convention, so identical input gives identical output:
 *  - singular values descending, ties keep Jacobi column order (stable sort);
 *  - every column of V is scaled by a unit phase so that its largest-modulus
 *    entry (first one on ties) is real and positive;
 *  - columns of U belonging to nonzero singular values are A v_j / s_j, the
 *    rest complete the basis by Gram-Schmidt on e_1, e_2, ...
 *
 * Throws InvalidInput on empty or non-finite input.
 */
template <typename Derived>
SvdResult<typename Derived::RealScalar> svd(const Eigen::MatrixBase<Derived>& a)
{
    using Real = typename Derived::RealScalar;
    using Complex = std::complex<Real>;
    using Matrix = ComplexMatrixX<Real>;

    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    if (rows < 1 || cols < 1)
        throw InvalidInput("svd: matrix must have at least one row and one column");
    if (!all_finite(a))
        throw InvalidInput("svd: matrix contains NaN or Inf");

    Matrix w = a.template cast<Complex>();
    Matrix v = Matrix::Identity(cols, cols);

    const Real eps = std::numeric_limits<Real>::epsilon();
    // Pairs whose coupling is below eps * ||A||_F^2 are already orthogonal to
    // working precision; without this floor, columns driven to zero in a wide
    // or rank-deficient matrix keep rotating on rounding noise.
    const Real floor = eps * w.squaredNorm();
    const int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < cols; ++p) {
            for (Eigen::Index q = p + 1; q < cols; ++q) {
                const Real alpha = w.col(p).squaredNorm();
                const Real beta = w.col(q).squaredNorm();
                const Complex gamma = w.col(p).dot(w.col(q)); // w_p^* w_q
                const Real g = std::abs(gamma);
                if (g <= floor || g <= eps * std::sqrt(alpha * beta))
                    continue;
                rotated = true;

                // Rotate the phase of column q so the 2x2 Gram block is real,
                // then apply the classical symmetric Schur rotation.
                const Complex phase = std::conj(gamma) / g;
                const Real zeta = (beta - alpha) / (Real(2) * g);
                const Real t = (zeta >= 0 ? Real(1) : Real(-1)) / (std::abs(zeta) + std::sqrt(Real(1) + zeta * zeta));
                const Real c = Real(1) / std::sqrt(Real(1) + t * t);
                const Real s = c * t;

                for (Matrix* m : {&w, &v}) {
                    auto colp = m->col(p);
                    auto colq = m->col(q);
                    for (Eigen::Index r = 0; r < m->rows(); ++r) {
                        const Complex xp = colp(r);
                        const Complex xq = colq(r) * phase;
                        colp(r) = c * xp - s * xq;
                        colq(r) = s * xp + c * xq;
                    }
                }
            }
        }
        if (!rotated)
            break;
    }

    std::vector<Real> norms(static_cast<std::size_t>(cols));
    for (Eigen::Index j = 0; j < cols; ++j)
        norms[static_cast<std::size_t>(j)] = w.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
        return norms[static_cast<std::size_t>(x)] > norms[static_cast<std::size_t>(y)];
    });

    SvdResult<Real> out;
    const Eigen::Index k = std::min(rows, cols);
    out.v.resize(cols, cols);
    out.singular_values.resize(k);
    for (Eigen::Index j = 0; j < cols; ++j) {
        auto col = v.col(order[static_cast<std::size_t>(j)]);
        Eigen::Index imax = 0;
        Real best = Real(-1);
        for (Eigen::Index i = 0; i < cols; ++i) {
            const Real mag = std::abs(col(i));
            if (mag > best) {
                best = mag;
                imax = i;
            }
        }
        const Complex unit = col(imax) / std::abs(col(imax));
        out.v.col(j) = col * std::conj(unit);
        if (j < k)
            out.singular_values(j) = norms[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])];
    }

    out.u = Matrix::Zero(rows, rows);
    const Real smax = k > 0 ? out.singular_values(0) : Real(0);
    const Real rank_tol = smax * eps * Real(std::max(rows, cols)) * Real(4);
    Eigen::Index rank = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        if (out.singular_values(j) <= rank_tol || out.singular_values(j) == Real(0))
            break;
        // Re-orthogonalize: A v_j / s_j loses orthogonality as s_j -> 0.
        Eigen::Matrix<Complex, Eigen::Dynamic, 1> cand = (a.template cast<Complex>() * out.v.col(j)) / out.singular_values(j);
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index prev = 0; prev < rank; ++prev)
                cand -= out.u.col(prev) * out.u.col(prev).dot(cand);
        const Real norm = cand.norm();
        if (norm < Real(0.5))
            break;
        out.u.col(j) = cand / norm;
        ++rank;
    }
    detail::complete_basis(out.u, rank);
    return out;
}

/// U diag(s) V*, with the rectangular diagonal implied by U and V shapes.
template <typename Real>
ComplexMatrixX<Real> svd_reconstruct(const SvdResult<Real>& f)
{
    using Complex = std::complex<Real>;
    ComplexMatrixX<Real> sigma = ComplexMatrixX<Real>::Zero(f.u.rows(), f.v.rows());
    for (Eigen::Index j = 0; j < f.singular_values.size(); ++j)
        sigma(j, j) = Complex(f.singular_values(j), Real(0));
    return f.u * sigma * f.v.adjoint();
}

/**
 * Haar-distributed dim x dim unitary: QR of an i.i.d. complex Gaussian matrix
 * with the phases of diag(R) folded back into Q. Same seed, same matrix.
 */
template <typename Real = double>
ComplexMatrixX<Real> random_unitary(int dim, std::uint64_t seed)
{
    using Complex = std::complex<Real>;
    if (dim < 1)
        throw InvalidInput("random_unitary: dimension must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> normal(Real(0), Real(1));
    ComplexMatrixX<Real> z(dim, dim);
    for (int j = 0; j < dim; ++j)
        for (int i = 0; i < dim; ++i) {
            const Real re = normal(rng);
            const Real im = normal(rng);
            z(i, j) = Complex(re, im);
        }
    Eigen::HouseholderQR<ComplexMatrixX<Real>> qr(z);
    ComplexMatrixX<Real> q = qr.householderQ() * ComplexMatrixX<Real>::Identity(dim, dim);
    const ComplexMatrixX<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        const Real mag = std::abs(r(j, j));
        if (mag > Real(0))
            q.col(j) *= r(j, j) / mag;
    }
    return q;
}

/// Stateless 64-bit mixer used to derive per-task seeds: mix(seed ^ index).
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(seed ^ splitmix64(index));
}

} // namespace bfisense
