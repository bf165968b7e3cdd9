#pragma once

// Validation harness: Gaussianity of BFI noise, MUSIC AoD Monte Carlo against
// the CRB, dataset generation and MLP positioning.

#include <cstdint>
#include <span>
#include <vector>

#include "bfisense/mlp.hpp"
#include "bfisense/select.hpp"

namespace bfisense {

// ---- KS ----

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Q_KS(lambda) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2), clamped to [0, 1].
double kolmogorov_survival(double lambda);

/// One-sample KS against N(mean, sd) fitted to the samples (asymptotic p).
KsResult ks_gaussian_pvalue(std::span<const double> samples);

// ---- MUSIC ----

/// 0.5 degree spacing over [-90, 90] degrees.
std::vector<double> aod_grid(double step_deg = 0.5);

/// Conjugated Tx steering vector, unit norm: exp(+i 2pi/lambda sin(rho) m dt).
ComplexVector tx_steering(double aod, const ArrayGeometry& geom, double wavelength);

/// 1 / ||(I - Vs Vs^*) a(rho)||^2 per grid point; Vs = leading n_paths columns.
std::vector<double> music_spectrum(const ComplexMatrix& v, std::span<const double> grid, const ArrayGeometry& geom,
                                   double wavelength, int n_paths = 1);

struct MusicOptions {
    int n_paths = 1;
    bool refine = false; // golden-section polish around the grid argmax
};

double music_estimate_aod(const Bfi& theta, std::span<const double> grid, const ArrayGeometry& geom, double wavelength,
                          const MusicOptions& opts = {});

struct McPoint {
    double snr_db = 0.0;
    double mc_variance = 0.0;
    double mc_mean = 0.0;
    double crb = 0.0;
};

struct McConfig {
    std::vector<double> snr_db{10, 15, 20, 25, 30};
    int trials = 500;
    std::uint64_t seed = 1;
    double grid_step_deg = 0.5;
    MusicOptions music{1, true};
    int k = 1;
};

/// Sample variance of MUSIC AoD over noisy BFI draws at `pose`, paired with
/// the CRB of aod alone at the same SNR. Trials run on `workers` threads.
std::vector<McPoint> mc_estimator_variance(const Scenario& scenario, const Pose& pose, const McConfig& mc,
                                           const CrbConfig& crb_cfg, int workers = 0);

// ---- datasets ----

enum class FeatureEncoding { raw, sincos };

const char* to_string(FeatureEncoding e);
FeatureEncoding feature_encoding_from_string(const std::string& s);

struct FeatureTag {
    int k = 1;       // subcarrier, 1-based
    int element = 0; // canonical BFI index, 0-based
    int component = 0; // raw: 0; sincos: 0 = sin, 1 = cos
    bool operator==(const FeatureTag&) const = default;
};

/// Selected elements per subcarrier (0-based, any order; emitted sorted).
using FeatureSubset = std::vector<std::vector<int>>;

FeatureSubset all_features(int n_bfi, int n_subcarriers);
FeatureSubset subset_from_selection(const SelectionResult& sel);

struct Dataset {
    RealMatrix features;              // samples x features
    RealMatrix positions;             // samples x 2 (x, y)
    std::vector<int> position_index;  // ROI index per sample
    std::vector<FeatureTag> feature_map;
    std::uint64_t seed = 0;

    Eigen::Index n_samples() const { return features.rows(); }
};

/// For every ROI position and sample: noisy CSI on each subcarrier, BFI, then
/// the chosen elements in (k, element) order.
Dataset gen_dataset(const RoiGrid& roi, const Scenario& scenario, const FeatureSubset& subset, int samples_per_pos,
                    double snr_db, std::uint64_t seed, FeatureEncoding encoding = FeatureEncoding::raw,
                    int workers = 0);

/// Partitions positions (not samples) so train and test never share one.
std::pair<Dataset, Dataset> split_by_position(const Dataset& data, double train_fraction, std::uint64_t seed);

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

/// Keeps only the columns whose (k, element) is in `subset`. Restricting an
/// all-features dataset equals generating the subset with the same seed.
Dataset restrict_features(const Dataset& data, const FeatureSubset& subset);

// ---- positioning ----

struct ErrorQuantiles {
    double p10 = 0, q1 = 0, median = 0, q3 = 0, p90 = 0, mean = 0;
};

/// Linear-interpolated sample quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);
ErrorQuantiles error_quantiles(const std::vector<double>& errors);

struct PositionerResult {
    ErrorQuantiles quantiles;
    std::vector<double> errors; // test sample order
};

/// Standardizes inputs and targets on train statistics, fits the MLP and
/// reports Euclidean test errors in meters.
PositionerResult train_eval_positioner(const Dataset& train, const Dataset& test, MlpSpec spec);

/// Largest mean chi over the ROI, per subcarrier: a ranking baseline with no
/// coverage term.
FeatureSubset min_crb_subset(const SelectionResult& sel);
/// Uniformly random n_sel elements per subcarrier.
FeatureSubset random_subset(int n_bfi, int n_subcarriers, int n_sel, std::uint64_t seed);

} // namespace bfisense
