#pragma once

// CRB-driven BFI feature selection over a discretized region of interest.
// Element indices are 0-based here; file formats write them 1-based.

#include <cstdint>
#include <string>
#include <vector>

#include "bfisense/crb.hpp"

namespace bfisense {

/// information: an element is best where its chi (Fisher information) is
/// largest. literal_min: best where chi is smallest, reproducing the literal
/// minimum-update rule for comparison.
enum class SelectionMode { information, literal_min };

const char* to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& s);

enum class Target { location, aod, aoa, distance };

const char* to_string(Target t);
Target target_from_string(const std::string& s);

/// Parameters sensed for a target, evaluated at `pose`.
PositionParams target_params(Target t, const Pose& pose);

struct RoiGrid {
    std::vector<Pose> positions;
    Target target = Target::location;

    std::size_t size() const { return positions.size(); }
};

struct RoiSpec {
    int n_positions = 1000;
    double r_min = 5.0;
    double r_max = 10.0;
    double angle_min = -1.4835298641951802; // -85 deg, AoD from AP broadside
    double angle_max = 1.4835298641951802;
    std::uint64_t seed = 1;
};

/// Positions drawn uniformly by area over the annular sector; UD broadside
/// faces the AP.
RoiGrid make_roi(const RoiSpec& spec, Target target);

/// eta_r = best element at position r; ties go to the lowest index.
std::vector<int> best_element_map(const RealMatrix& scores, SelectionMode mode);

/// counts[l] = #{r : eta_r = l}.
std::vector<int> coverage_counts(const std::vector<int>& eta, int n_bfi);

/// Greedy max-coverage with position removal; returns indices in pick order.
std::vector<int> greedy_select(const std::vector<int>& eta, int n_sel, int n_bfi);

enum class BruteForceObjective {
    summed_min_crb, // minimize sum_r min_{j in B} crb_{r,j}
    coverage        // maximize #{r : argmin_j crb_{r,j} in B}
};

/// Exhaustive search over all C(n_bfi, n_sel) subsets of a CRB-like table
/// (lower is better). Ties go to the lexicographically first subset.
std::vector<int> brute_force_select(const RealMatrix& crb, int n_sel,
                                    BruteForceObjective objective = BruteForceObjective::summed_min_crb,
                                    std::uint64_t budget = 1'000'000);

double summed_min_crb(const RealMatrix& crb, const std::vector<int>& subset);
int subset_coverage(const std::vector<int>& eta, const std::vector<int>& subset);

struct SubcarrierSelection {
    int k = 1;
    RealMatrix scores;      // R x N_BFI chi values
    std::vector<int> eta;
    std::vector<int> coverage;
    std::vector<int> selected; // pick order
};

struct SelectionResult {
    SelectionMode mode = SelectionMode::information;
    int n_sel = 0;
    int n_bfi = 0;
    std::vector<SubcarrierSelection> per_subcarrier;
};

/// chi for every ROI position on subcarrier k (R x N_BFI). Positions run in
/// parallel on up to `workers` threads; the result does not depend on it.
RealMatrix score_table(const RoiGrid& roi, const Scenario& scenario, const CrbConfig& cfg, int k, int workers = 0);

SelectionResult select_features(const RoiGrid& roi, const Scenario& scenario, const CrbConfig& cfg, int n_sel,
                                SelectionMode mode = SelectionMode::information, int workers = 0);

/// Per-position CRB seed: the base seed mixed with the position index.
CrbConfig position_config(const CrbConfig& cfg, std::size_t position);

} // namespace bfisense
