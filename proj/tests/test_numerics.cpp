#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "bfisense/numerics.hpp"

using namespace bfisense;
using cd = std::complex<double>;

namespace {

ComplexMatrix random_matrix(int rows, int cols, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix a(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = n(rng);
            a(i, j) = cd(re, n(rng));
        }
    return a;
}

// Eigenvalues of the Hermitian 2x2 [[p, b], [conj b, q]] from its
// characteristic polynomial.
std::pair<double, double> hermitian2_eigs(double p, double q, cd b)
{
    const double mid = 0.5 * (p + q);
    const double rad = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(b));
    return {mid + rad, mid - rad};
}

void check_phase_convention(const ComplexMatrix& v)
{
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        for (Eigen::Index i = 1; i < v.rows(); ++i)
            if (std::abs(v(i, j)) > std::abs(v(imax, j)) + 1e-12)
                imax = i;
        CHECK(std::abs(v(imax, j).imag()) < 1e-12);
        CHECK(v(imax, j).real() > 0.0);
    }
}

} // namespace

TEST_CASE("svd of diag(2,1) is the identity factorization")
{
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 1.0;
    const auto f = svd(a);
    CHECK(f.singular_values(0) == doctest::Approx(2.0));
    CHECK(f.singular_values(1) == doctest::Approx(1.0));
    CHECK((f.v - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
    CHECK((f.u - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("svd of the identity has unit singular values")
{
    const auto f = svd(ComplexMatrix::Identity(3, 3));
    for (int i = 0; i < 3; ++i)
        CHECK(f.singular_values(i) == doctest::Approx(1.0));
}

TEST_CASE("svd reconstructs random matrices of every small shape")
{
    std::uint64_t seed = 1;
    for (int rows = 1; rows <= 8; ++rows)
        for (int cols = 1; cols <= 8; ++cols)
            for (int rep = 0; rep < 5; ++rep) {
                const ComplexMatrix a = random_matrix(rows, cols, seed++);
                const auto f = svd(a);
                CHECK(f.u.rows() == rows);
                CHECK(f.v.rows() == cols);
                CHECK((svd_reconstruct(f) - a).norm() <= 1e-10 * std::max(1.0, a.norm()));
                CHECK(unitarity_error(f.u) < 1e-10);
                CHECK(unitarity_error(f.v) < 1e-10);
                for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
                    CHECK(f.singular_values(i) >= 0.0);
                    if (i > 0)
                        CHECK(f.singular_values(i) <= f.singular_values(i - 1));
                }
                check_phase_convention(f.v);
            }
}

TEST_CASE("svd handles rank-deficient input")
{
    // Outer product: rank 1.
    const ComplexMatrix x = random_matrix(4, 1, 11);
    const ComplexMatrix y = random_matrix(1, 3, 12);
    const ComplexMatrix a = x * y;
    const auto f = svd(a);
    CHECK(f.singular_values(0) == doctest::Approx(x.norm() * y.norm()));
    CHECK(f.singular_values(1) < 1e-12);
    CHECK((svd_reconstruct(f) - a).norm() < 1e-12 * a.norm());
    CHECK(unitarity_error(f.u) < 1e-10);
    CHECK(unitarity_error(f.v) < 1e-10);

    const auto z = svd(ComplexMatrix::Zero(2, 3));
    CHECK(z.singular_values.norm() == 0.0);
    CHECK(unitarity_error(z.u) < 1e-12);
    CHECK(unitarity_error(z.v) < 1e-12);
}

TEST_CASE("2x2 singular values match the characteristic polynomial of A*A")
{
    for (std::uint64_t s = 0; s < 200; ++s) {
        const ComplexMatrix a = random_matrix(2, 2, 1000 + s);
        const ComplexMatrix g = a.adjoint() * a;
        const auto [l1, l2] = hermitian2_eigs(g(0, 0).real(), g(1, 1).real(), g(0, 1));
        const auto f = svd(a);
        CHECK(f.singular_values(0) == doctest::Approx(std::sqrt(l1)).epsilon(1e-12));
        CHECK(f.singular_values(1) == doctest::Approx(std::sqrt(std::max(l2, 0.0))).epsilon(1e-9));
    }
}

TEST_CASE("svd is scale-equivariant with identical V")
{
    for (std::uint64_t s = 0; s < 50; ++s) {
        const ComplexMatrix a = random_matrix(3, 4, 77 + s);
        const auto f = svd(a);
        const auto g = svd((3.5 * a).eval());
        CHECK((g.singular_values - 3.5 * f.singular_values).norm() < 1e-12 * g.singular_values.norm());
        // Columns with a nonzero singular value are unique under the convention.
        CHECK((g.v.leftCols(3) - f.v.leftCols(3)).norm() < 1e-10);
    }
}

TEST_CASE("svd is deterministic")
{
    const ComplexMatrix a = random_matrix(4, 4, 5);
    const auto f = svd(a);
    const auto g = svd(a);
    CHECK(f.v == g.v);
    CHECK(f.u == g.u);
    CHECK(f.singular_values == g.singular_values);
}

TEST_CASE("svd rejects empty and non-finite input")
{
    CHECK_THROWS_AS(svd(ComplexMatrix(0, 2)), InvalidInput);
    ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    a(1, 0) = cd(std::nan(""), 0.0);
    CHECK_THROWS_AS(svd(a), InvalidInput);
    a(1, 0) = cd(0.0, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(svd(a), InvalidInput);
}

TEST_CASE("single precision svd also reconstructs")
{
    const Eigen::MatrixXcf a = random_matrix(3, 3, 9).cast<std::complex<float>>();
    const auto f = svd(a);
    CHECK((svd_reconstruct(f) - a).norm() < 1e-4f * a.norm());
}

TEST_CASE("random_unitary")
{
    SUBCASE("dim 1 has unit modulus")
    {
        for (std::uint64_t s = 0; s < 10; ++s)
            CHECK(std::abs(random_unitary(1, s)(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("unitary to 1e-12")
    {
        CHECK(unitarity_error(random_unitary(4, 7)) < 1e-12);
        for (int d = 1; d <= 8; ++d)
            CHECK(is_unitary(random_unitary(d, 100 + d), 1e-12));
    }
    SUBCASE("same seed gives bitwise-identical output")
    {
        CHECK(random_unitary(3, 7) == random_unitary(3, 7));
        CHECK(random_unitary(3, 7) != random_unitary(3, 8));
    }
    SUBCASE("dim 0 is rejected")
    {
        CHECK_THROWS_AS(random_unitary(0, 1), InvalidInput);
    }
    SUBCASE("first-row moments match the Haar measure")
    {
        // Under Haar, |U_11|^2 ~ Beta(1, n-1): mean 1/n, E|U_11|^4 = 2/(n(n+1)),
        // and E[U_11] = 0.
        const int n = 4;
        const int reps = 4000;
        double m2 = 0.0, m4 = 0.0;
        cd m1 = 0.0;
        for (int r = 0; r < reps; ++r) {
            const cd u = random_unitary(n, derive_seed(42, r))(0, 0);
            m1 += u;
            m2 += std::norm(u);
            m4 += std::norm(u) * std::norm(u);
        }
        m1 /= reps;
        m2 /= reps;
        m4 /= reps;
        CHECK(std::abs(m1) < 0.03);
        CHECK(m2 == doctest::Approx(1.0 / n).epsilon(0.05));
        CHECK(m4 == doctest::Approx(2.0 / (n * (n + 1.0))).epsilon(0.08));
    }
}

TEST_CASE("derived seeds are distinct and reproducible")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i)
        seen.insert(derive_seed(1, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(3, 4) == derive_seed(3, 4));
    CHECK(derive_seed(3, 4) != derive_seed(4, 3));
}
