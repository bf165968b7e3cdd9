#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bfisense/channel.hpp"

using namespace bfisense;
using cd = std::complex<double>;
using std::numbers::pi;

namespace {

ArrayGeometry geom(int n, int m) { return ArrayGeometry::half_wavelength(n, m); }

} // namespace

TEST_CASE("los_path copies its fields and validates distance")
{
    const Path p = los_path(0.0, 0.0, 5.0, 1.0);
    CHECK(p.gain == cd(1.0, 0.0));
    CHECK(p.distance == 5.0);
    CHECK(p.aoa == 0.0);
    CHECK(p.aod == 0.0);

    const Path q = los_path(pi / 6, -pi / 6, 7.5, 0.5);
    CHECK(q.aod == pi / 6);
    CHECK(q.aoa == -pi / 6);
    CHECK(q.distance == 7.5);
    CHECK(q.gain == cd(0.5, 0.0));

    CHECK_THROWS_AS(los_path(0.0, 0.0, 0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(los_path(0.0, 0.0, -1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(los_path(2.0, 0.0, 1.0, 1.0), InvalidInput);
}

TEST_CASE("geometry and grid validation")
{
    CHECK_THROWS_AS((ArrayGeometry{1, 1, 0.01, 0.01}.validate()), InvalidInput);
    CHECK_THROWS_AS((ArrayGeometry{0, 2, 0.01, 0.01}.validate()), InvalidInput);
    CHECK_THROWS_AS((ArrayGeometry{1, 2, 0.0, 0.01}.validate()), InvalidInput);
    CHECK_THROWS_AS((SubcarrierGrid{5e9, 1e5, 0}.validate()), InvalidInput);
    const SubcarrierGrid g{5e9, 1e6, 4};
    CHECK(g.frequency(1) == doctest::Approx(5e9 - 1.5e6));
    CHECK(g.frequency(4) == doctest::Approx(5e9 + 1.5e6));
    CHECK_THROWS_AS(g.frequency(0), IndexError);
    CHECK_THROWS_AS(g.frequency(5), IndexError);
}

TEST_CASE("csi_mean entry (1,1) is gain times distance phase")
{
    const SubcarrierGrid grid;
    const Path p = los_path(0.3, -0.2, 6.1, cd(0.7, 0.2));
    const std::vector<Path> paths{p};
    const ComplexMatrix h = csi_mean(paths, geom(3, 4), grid, 1);
    const cd expected = p.gain * std::polar(1.0, -2.0 * pi * p.distance * grid.frequency(1) / kSpeedOfLight);
    CHECK(std::abs(h(0, 0) - expected) < 1e-12);
}

TEST_CASE("csi_mean is all ones for an integer number of wavelengths at broadside")
{
    const SubcarrierGrid grid;
    const double d = 40.0 * kSpeedOfLight / grid.frequency(1);
    const std::vector<Path> paths{los_path(0.0, 0.0, d, 1.0)};
    const ComplexMatrix h = csi_mean(paths, geom(3, 4), grid, 1);
    CHECK((h - ComplexMatrix::Ones(3, 4)).norm() < 1e-9);
}

TEST_CASE("csi_mean of no paths is zero and bad k is an index error")
{
    const SubcarrierGrid grid;
    const ComplexMatrix h = csi_mean({}, geom(2, 3), grid, 1);
    CHECK(h.rows() == 2);
    CHECK(h.cols() == 3);
    CHECK(h.norm() == 0.0);
    CHECK_THROWS_AS(csi_mean({}, geom(2, 3), grid, 2), IndexError);
}

TEST_CASE("csi_mean is linear in path gains")
{
    MultipathClusterSpec spec{5, 0.0, 2.0, 15.0, 3};
    std::vector<Path> paths = make_multipath_cluster(spec, 5.0);
    const SubcarrierGrid grid{5.825e9, 312.5e3, 3};
    const ComplexMatrix h = csi_mean(paths, geom(3, 4), grid, 2);
    const cd c(0.3, -1.7);
    for (auto& p : paths)
        p.gain *= c;
    CHECK((csi_mean(paths, geom(3, 4), grid, 2) - c * h).norm() < 1e-12 * h.norm());
}

TEST_CASE("adjacent Rx rows differ by the ULA phase step")
{
    const SubcarrierGrid grid;
    const ArrayGeometry g = geom(4, 2);
    const double lambda = grid.wavelength(1);
    for (int i = 0; i <= 30; ++i) {
        const double aoa = -pi / 2 + i * pi / 30;
        const std::vector<Path> paths{los_path(0.2, aoa, 5.0, 1.0)};
        const ComplexMatrix h = csi_mean(paths, g, grid, 1);
        const cd step = std::polar(1.0, -2.0 * pi * std::sin(aoa) * g.rx_spacing / lambda);
        for (int n = 0; n + 1 < 4; ++n)
            CHECK(std::abs(h(n + 1, 0) - h(n, 0) * step) < 1e-12);
    }
}

TEST_CASE("csi_sample")
{
    const ComplexMatrix mean = ComplexMatrix::Constant(2, 2, cd(1.0, -0.5));
    SUBCASE("zero variance returns the mean exactly")
    {
        CHECK(csi_sample(mean, NoiseSpec{0.0, 3}) == mean);
    }
    SUBCASE("same seed, same draw")
    {
        CHECK(csi_sample(mean, NoiseSpec{0.1, 3}) == csi_sample(mean, NoiseSpec{0.1, 3}));
        CHECK(csi_sample(mean, NoiseSpec{0.1, 3}) != csi_sample(mean, NoiseSpec{0.1, 4}));
    }
    SUBCASE("negative variance is rejected")
    {
        CHECK_THROWS_AS(csi_sample(mean, NoiseSpec{-1e-3, 3}), InvalidInput);
    }
    SUBCASE("empirical variance of one entry")
    {
        std::mt19937_64 rng(11);
        const ComplexMatrix zero = ComplexMatrix::Zero(1, 2);
        double acc = 0.0;
        const int n = 100000;
        for (int t = 0; t < n; ++t)
            acc += std::norm(csi_sample(zero, 0.01, rng)(0, 0));
        const double var = acc / n;
        CHECK(var >= 0.009);
        CHECK(var <= 0.011);
    }
    SUBCASE("sample mean converges within 5 standard errors")
    {
        std::mt19937_64 rng(12);
        const int n = 10000;
        const double var = 0.5;
        ComplexMatrix acc = ComplexMatrix::Zero(2, 2);
        for (int t = 0; t < n; ++t)
            acc += csi_sample(mean, var, rng);
        acc /= double(n);
        const double se = std::sqrt(var / 2.0 / n);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::abs(acc(i).real() - mean(i).real()) < 5 * se);
            CHECK(std::abs(acc(i).imag() - mean(i).imag()) < 5 * se);
        }
    }
}

TEST_CASE("noise_var_for_snr")
{
    const ComplexMatrix unit = ComplexMatrix::Constant(2, 3, cd(0.6, 0.8));
    CHECK(noise_var_for_snr(unit, 0.0) == doctest::Approx(1.0));
    CHECK(noise_var_for_snr(unit, 20.0) == doctest::Approx(0.01));
    CHECK(noise_var_for_snr(unit, std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(noise_var_for_snr(ComplexMatrix::Zero(2, 2), 20.0), InvalidInput);
}

TEST_CASE("pose geometry")
{
    const Pose p{pi / 6, 0.0, 8.0};
    CHECK(p.x() == doctest::Approx(4.0));
    CHECK(p.y() == doctest::Approx(8.0 * std::cos(pi / 6)));
    const Pose q = pose_from_xy(p.x(), p.y());
    CHECK(q.aod == doctest::Approx(pi / 6));
    CHECK(q.distance == doctest::Approx(8.0));
    CHECK(q.aoa == 0.0);
    CHECK_THROWS_AS(pose_from_xy(0.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(pose_from_xy(1.0, -1.0), InvalidInput);
}

TEST_CASE("multipath cluster power follows the K-factor")
{
    const MultipathClusterSpec spec{6, 3.0, 2.0, 15.0, 9};
    const auto paths = make_multipath_cluster(spec, 5.0);
    REQUIRE(paths.size() == 6);
    double power = 0.0;
    for (const auto& p : paths) {
        power += std::norm(p.gain);
        CHECK(p.distance >= 7.0);
        CHECK(p.distance <= 20.0);
        CHECK(std::abs(p.aod) <= pi / 2);
        CHECK(std::abs(p.aoa) <= pi / 2);
    }
    CHECK(power == doctest::Approx(std::pow(10.0, -0.3)));
    CHECK(make_multipath_cluster(spec, 5.0)[2].aod == paths[2].aod);
    CHECK(make_multipath_cluster({0, 3.0, 2.0, 15.0, 9}, 5.0).empty());
}

TEST_CASE("scenario puts the LoS path first with reference-distance gain")
{
    const Scenario s = default_scenario(4, 4);
    const Pose pose{0.2, 0.0, 7.0};
    const auto paths = s.paths(pose);
    REQUIRE(paths.size() == s.nlos.size() + 1);
    CHECK(std::abs(paths[0].gain) == doctest::Approx(5.0 / 7.0));
    CHECK(paths[0].aod == 0.2);
    CHECK(paths[0].distance == 7.0);
    CHECK((s.mean_csi(pose, 1) - csi_mean(paths, s.geometry, s.grid, 1)).norm() == 0.0);
}
