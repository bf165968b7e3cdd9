#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "bfisense/numerics.hpp"

namespace bfisense {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kDefaultCenterFrequency = 5.825e9;
inline constexpr double kDefaultSubcarrierSpacing = 312.5e3;

/// Two uniform linear arrays: N receive antennas at the UD, M transmit
/// antennas at the AP.
struct ArrayGeometry {
    int n_rx = 1;
    int n_tx = 2;
    double rx_spacing = 0.0; // m
    double tx_spacing = 0.0; // m

    void validate() const;

    static ArrayGeometry half_wavelength(int n_rx, int n_tx, double frequency = kDefaultCenterFrequency);
};

/// One propagation path. Angles are measured from array broadside and live
/// in the visible region [-pi/2, pi/2].
struct Path {
    std::complex<double> gain{1.0, 0.0};
    double distance = 1.0; // m
    double aoa = 0.0;      // rad
    double aod = 0.0;      // rad
};

/// Subcarriers are 1-based and placed symmetrically around the center:
/// f_k = f_c + (k - (N_sc + 1) / 2) * spacing.
struct SubcarrierGrid {
    double center_frequency = kDefaultCenterFrequency;
    double spacing = kDefaultSubcarrierSpacing;
    int n_subcarriers = 1;

    void validate() const;
    double frequency(int k) const;
    double wavelength(int k) const { return kSpeedOfLight / frequency(k); }
};

struct NoiseSpec {
    double variance = 0.0;
    std::uint64_t seed = 0;
};

Path los_path(double aod, double aoa, double distance, std::complex<double> gain);

/// Noise-free CSI of one subcarrier: the multipath sum without the thermal
/// term. Returns the N x M zero matrix for an empty path list.
ComplexMatrix csi_mean(std::span<const Path> paths, const ArrayGeometry& geom, const SubcarrierGrid& grid, int k);

/// mean + i.i.d. CN(0, variance) per entry, drawn from `noise.seed`.
ComplexMatrix csi_sample(const ComplexMatrix& mean, const NoiseSpec& noise);

/// Same as csi_sample but draws from a caller-owned generator, for loops
/// that take many samples from one stream.
ComplexMatrix csi_sample(const ComplexMatrix& mean, double variance, std::mt19937_64& rng);

/// Per-entry noise variance giving `snr_db` relative to the mean entry power
/// ||mean||_F^2 / (N M). +inf dB gives zero noise.
double noise_var_for_snr(const ComplexMatrix& mean, double snr_db);

// ---------------------------------------------------------------------------
// Scenario: a UD pose plus the static multipath environment.
// ---------------------------------------------------------------------------

/// UD pose relative to the AP. The AP sits at the origin with its array on
/// the x axis and broadside along +y; the UD is at distance * (sin aod, cos aod).
/// aoa is the LoS arrival angle at the UD array, i.e. its orientation.
struct Pose {
    double aod = 0.0;
    double aoa = 0.0;
    double distance = 5.0;

    double x() const;
    double y() const;
};

/// UD at (x, y) with broadside facing the AP, so the LoS arrives at aoa = 0.
Pose pose_from_xy(double x, double y);

/// Uniform-random NLoS cluster: `count` paths with uniform AoD/AoA over the
/// visible region, uniform phase, equal power summing to LoS power / K, and
/// path lengths reference + U(excess_min, excess_max).
struct MultipathClusterSpec {
    int count = 0;
    double k_factor_db = 0.0;
    double excess_min = 2.0;
    double excess_max = 15.0;
    std::uint64_t seed = 0;
};

std::vector<Path> make_multipath_cluster(const MultipathClusterSpec& spec, double reference_distance);

struct Scenario {
    ArrayGeometry geometry;
    SubcarrierGrid grid;
    std::vector<Path> nlos;            // static paths, independent of the pose
    double reference_distance = 5.0;   // LoS gain is reference_distance / d
    double snr_db = 20.0;
    Pose nominal;                      // pose used for coordinates not being varied

    /// LoS path for `pose` followed by the static NLoS paths.
    std::vector<Path> paths(const Pose& pose) const;
    ComplexMatrix mean_csi(const Pose& pose, int k) const;
};

/// Half-wavelength ULAs at 5.825 GHz, one center subcarrier, UD at
/// (0 deg, 0 deg, 5 m) and a 4-path NLoS cluster at K = 3 dB.
Scenario default_scenario(int n_rx, int n_tx);

} // namespace bfisense
