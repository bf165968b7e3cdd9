#include "bfisense/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace bfisense {

namespace {

constexpr double kPi = std::numbers::pi;

void check_visible(double angle, const char* what)
{
    if (!(angle >= -kPi / 2 - 1e-12 && angle <= kPi / 2 + 1e-12))
        throw InvalidInput(std::string(what) + " must lie in [-pi/2, pi/2]");
}

} // namespace

void ArrayGeometry::validate() const
{
    if (n_rx < 1)
        throw InvalidInput("geometry: n_rx must be >= 1");
    if (n_tx < 2)
        throw InvalidInput("geometry: n_tx must be >= 2 for beamforming");
    if (!(rx_spacing > 0.0) || !(tx_spacing > 0.0))
        throw InvalidInput("geometry: antenna spacings must be positive");
}

ArrayGeometry ArrayGeometry::half_wavelength(int n_rx, int n_tx, double frequency)
{
    const double half = 0.5 * kSpeedOfLight / frequency;
    ArrayGeometry g{n_rx, n_tx, half, half};
    g.validate();
    return g;
}

void SubcarrierGrid::validate() const
{
    if (n_subcarriers < 1)
        throw InvalidInput("grid: n_subcarriers must be >= 1");
    if (!(spacing >= 0.0))
        throw InvalidInput("grid: subcarrier spacing must be nonnegative");
    if (!(frequency(1) > 0.0))
        throw InvalidInput("grid: all subcarrier frequencies must be positive");
}

double SubcarrierGrid::frequency(int k) const
{
    if (k < 1 || k > n_subcarriers)
        throw IndexError("subcarrier index " + std::to_string(k) + " outside 1.." + std::to_string(n_subcarriers));
    return center_frequency + (double(k) - 0.5 * double(n_subcarriers + 1)) * spacing;
}

Path los_path(double aod, double aoa, double distance, std::complex<double> gain)
{
    if (!(distance > 0.0))
        throw InvalidInput("los_path: distance must be positive");
    check_visible(aod, "los_path: aod");
    check_visible(aoa, "los_path: aoa");
    return Path{gain, distance, aoa, aod};
}

ComplexMatrix csi_mean(std::span<const Path> paths, const ArrayGeometry& geom, const SubcarrierGrid& grid, int k)
{
    geom.validate();
    const double f = grid.frequency(k);
    const double lambda = kSpeedOfLight / f;
    ComplexMatrix h = ComplexMatrix::Zero(geom.n_rx, geom.n_tx);
    for (const Path& p : paths) {
        const double rx_step = -2.0 * kPi / lambda * std::sin(p.aoa) * geom.rx_spacing;
        const double tx_step = -2.0 * kPi / lambda * std::sin(p.aod) * geom.tx_spacing;
        const std::complex<double> common = p.gain * std::polar(1.0, -2.0 * kPi * p.distance * f / kSpeedOfLight);
        for (int n = 0; n < geom.n_rx; ++n)
            for (int m = 0; m < geom.n_tx; ++m)
                h(n, m) += common * std::polar(1.0, rx_step * n + tx_step * m);
    }
    return h;
}

ComplexMatrix csi_sample(const ComplexMatrix& mean, double variance, std::mt19937_64& rng)
{
    if (!(variance >= 0.0))
        throw InvalidInput("csi_sample: noise variance must be nonnegative");
    if (variance == 0.0)
        return mean;
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
    ComplexMatrix out = mean;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            out(i, j) += std::complex<double>(re, im);
        }
    return out;
}

ComplexMatrix csi_sample(const ComplexMatrix& mean, const NoiseSpec& noise)
{
    std::mt19937_64 rng(noise.seed);
    return csi_sample(mean, noise.variance, rng);
}

double noise_var_for_snr(const ComplexMatrix& mean, double snr_db)
{
    const double power = mean.squaredNorm() / double(mean.size());
    if (!(power > 0.0))
        throw InvalidInput("noise_var_for_snr: all-zero CSI, SNR is undefined");
    if (std::isinf(snr_db) && snr_db > 0)
        return 0.0;
    return power / std::pow(10.0, snr_db / 10.0);
}

double Pose::x() const { return distance * std::sin(aod); }
double Pose::y() const { return distance * std::cos(aod); }

Pose pose_from_xy(double x, double y)
{
    const double d = std::hypot(x, y);
    if (!(d > 0.0))
        throw InvalidInput("pose_from_xy: UD cannot sit on the AP");
    if (y < 0.0)
        throw InvalidInput("pose_from_xy: UD must be in front of the AP array (y >= 0)");
    return Pose{std::atan2(x, y), 0.0, d};
}

std::vector<Path> make_multipath_cluster(const MultipathClusterSpec& spec, double reference_distance)
{
    if (spec.count < 0)
        throw InvalidInput("multipath cluster: count must be >= 0");
    if (!(spec.excess_max >= spec.excess_min) || spec.excess_min < 0.0)
        throw InvalidInput("multipath cluster: need 0 <= excess_min <= excess_max");
    std::vector<Path> out;
    if (spec.count == 0)
        return out;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> angle(-kPi / 2, kPi / 2);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> excess(spec.excess_min, spec.excess_max);
    // LoS gain is 1 at the reference distance.
    const double per_path = std::sqrt(std::pow(10.0, -spec.k_factor_db / 10.0) / spec.count);
    for (int l = 0; l < spec.count; ++l) {
        Path p;
        p.aod = angle(rng);
        p.aoa = angle(rng);
        p.distance = reference_distance + excess(rng);
        p.gain = std::polar(per_path, phase(rng));
        out.push_back(p);
    }
    return out;
}

std::vector<Path> Scenario::paths(const Pose& pose) const
{
    std::vector<Path> out;
    out.reserve(nlos.size() + 1);
    out.push_back(los_path(pose.aod, pose.aoa, pose.distance, {reference_distance / pose.distance, 0.0}));
    out.insert(out.end(), nlos.begin(), nlos.end());
    return out;
}

ComplexMatrix Scenario::mean_csi(const Pose& pose, int k) const
{
    const std::vector<Path> p = paths(pose);
    return csi_mean(p, geometry, grid, k);
}

Scenario default_scenario(int n_rx, int n_tx)
{
    Scenario s;
    s.geometry = ArrayGeometry::half_wavelength(n_rx, n_tx);
    s.grid = SubcarrierGrid{};
    s.reference_distance = 5.0;
    s.snr_db = 20.0;
    s.nominal = Pose{0.0, 0.0, 5.0};
    MultipathClusterSpec cluster;
    cluster.count = 4;
    cluster.k_factor_db = 3.0;
    cluster.seed = 1;
    s.nlos = make_multipath_cluster(cluster, s.reference_distance);
    return s;
}

} // namespace bfisense
