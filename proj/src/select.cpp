#include "bfisense/select.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "bfisense/parallel.hpp"

namespace bfisense {

const char* to_string(SelectionMode mode) { return mode == SelectionMode::information ? "information" : "literal_min"; }

SelectionMode selection_mode_from_string(const std::string& s)
{
    if (s == "information")
        return SelectionMode::information;
    if (s == "literal_min")
        return SelectionMode::literal_min;
    throw InvalidInput("unknown selection mode '" + s + "' (expected information or literal_min)");
}

const char* to_string(Target t)
{
    switch (t) {
    case Target::location: return "location";
    case Target::aod: return "aod";
    case Target::aoa: return "aoa";
    case Target::distance: return "distance";
    }
    return "?";
}

Target target_from_string(const std::string& s)
{
    if (s == "location")
        return Target::location;
    if (s == "aod")
        return Target::aod;
    if (s == "aoa")
        return Target::aoa;
    if (s == "distance")
        return Target::distance;
    throw InvalidInput("unknown target '" + s + "' (expected location, aod, aoa or distance)");
}

PositionParams target_params(Target t, const Pose& pose)
{
    PositionParams p;
    switch (t) {
    case Target::location:
        p.names = {"x", "y"};
        p.values = RealVector(2);
        p.values << pose.x(), pose.y();
        break;
    case Target::aod:
        p.names = {"aod"};
        p.values = RealVector::Constant(1, pose.aod);
        break;
    case Target::aoa:
        p.names = {"aoa"};
        p.values = RealVector::Constant(1, pose.aoa);
        break;
    case Target::distance:
        p.names = {"distance"};
        p.values = RealVector::Constant(1, pose.distance);
        break;
    }
    return p;
}

RoiGrid make_roi(const RoiSpec& spec, Target target)
{
    if (spec.n_positions < 1)
        throw InvalidInput("roi: need at least one position");
    if (!(spec.r_min > 0.0) || !(spec.r_max >= spec.r_min))
        throw InvalidInput("roi: need 0 < r_min <= r_max");
    if (!(spec.angle_min >= -1.5707963267948966 && spec.angle_max <= 1.5707963267948966 && spec.angle_min <= spec.angle_max))
        throw InvalidInput("roi: angles must satisfy -pi/2 <= angle_min <= angle_max <= pi/2");
    RoiGrid roi;
    roi.target = target;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> r2(spec.r_min * spec.r_min, spec.r_max * spec.r_max);
    std::uniform_real_distribution<double> angle(spec.angle_min, spec.angle_max);
    for (int i = 0; i < spec.n_positions; ++i) {
        const double r = std::sqrt(r2(rng));
        const double a = angle(rng);
        roi.positions.push_back(Pose{a, 0.0, r});
    }
    return roi;
}

std::vector<int> best_element_map(const RealMatrix& scores, SelectionMode mode)
{
    if (scores.rows() < 1 || scores.cols() < 1)
        throw InvalidInput("best_element_map: empty score matrix");
    std::vector<int> eta(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < scores.cols(); ++j) {
            const double v = scores(r, j);
            const double b = scores(r, best);
            const bool better = mode == SelectionMode::information ? v > b : v < b;
            if (better)
                best = j;
        }
        eta[static_cast<std::size_t>(r)] = static_cast<int>(best);
    }
    return eta;
}

std::vector<int> coverage_counts(const std::vector<int>& eta, int n_bfi)
{
    std::vector<int> counts(static_cast<std::size_t>(n_bfi), 0);
    for (int e : eta) {
        if (e < 0 || e >= n_bfi)
            throw InvalidInput("coverage: element index out of range");
        ++counts[static_cast<std::size_t>(e)];
    }
    return counts;
}

std::vector<int> greedy_select(const std::vector<int>& eta, int n_sel, int n_bfi)
{
    if (n_bfi < 1 || n_sel < 1 || n_sel > n_bfi)
        throw InvalidInput("greedy_select: need 1 <= n_sel <= n_bfi");
    for (int e : eta)
        if (e < 0 || e >= n_bfi)
            throw InvalidInput("greedy_select: element index out of range");

    std::vector<bool> alive(eta.size(), true);
    std::vector<bool> taken(static_cast<std::size_t>(n_bfi), false);
    std::vector<int> picked;
    for (int it = 0; it < n_sel; ++it) {
        std::vector<int> counts(static_cast<std::size_t>(n_bfi), 0);
        for (std::size_t r = 0; r < eta.size(); ++r)
            if (alive[r])
                ++counts[static_cast<std::size_t>(eta[r])];
        int best = -1;
        for (int l = 0; l < n_bfi; ++l) {
            if (taken[static_cast<std::size_t>(l)])
                continue;
            if (best < 0 || counts[static_cast<std::size_t>(l)] > counts[static_cast<std::size_t>(best)])
                best = l;
        }
        // With every count at zero the loop above already yields the lowest
        // free index, which is the fill rule.
        taken[static_cast<std::size_t>(best)] = true;
        picked.push_back(best);
        for (std::size_t r = 0; r < eta.size(); ++r)
            if (eta[r] == best)
                alive[r] = false;
    }
    return picked;
}

double summed_min_crb(const RealMatrix& crb, const std::vector<int>& subset)
{
    double total = 0.0;
    for (Eigen::Index r = 0; r < crb.rows(); ++r) {
        double best = std::numeric_limits<double>::infinity();
        for (int j : subset)
            best = std::min(best, crb(r, j));
        total += best;
    }
    return total;
}

int subset_coverage(const std::vector<int>& eta, const std::vector<int>& subset)
{
    int covered = 0;
    for (int e : eta)
        for (int j : subset)
            if (e == j) {
                ++covered;
                break;
            }
    return covered;
}

std::vector<int> brute_force_select(const RealMatrix& crb, int n_sel, BruteForceObjective objective, std::uint64_t budget)
{
    const int n = static_cast<int>(crb.cols());
    if (crb.rows() < 1 || n < 1)
        throw InvalidInput("brute_force_select: empty table");
    if (n_sel < 1 || n_sel > n)
        throw InvalidInput("brute_force_select: need 1 <= n_sel <= n_bfi");

    // C(n, k) with early exit once it passes the budget.
    std::uint64_t combos = 1;
    for (int i = 1; i <= n_sel; ++i) {
        combos = combos * static_cast<std::uint64_t>(n - n_sel + i) / static_cast<std::uint64_t>(i);
        if (combos > budget)
            throw BudgetError("brute_force_select: C(" + std::to_string(n) + ", " + std::to_string(n_sel) +
                              ") exceeds the budget of " + std::to_string(budget));
    }

    const std::vector<int> eta = best_element_map(crb, SelectionMode::literal_min);
    std::vector<int> subset(static_cast<std::size_t>(n_sel));
    for (int i = 0; i < n_sel; ++i)
        subset[static_cast<std::size_t>(i)] = i;

    std::vector<int> best_subset = subset;
    double best_value = std::numeric_limits<double>::infinity();
    while (true) {
        const double value = objective == BruteForceObjective::summed_min_crb ? summed_min_crb(crb, subset)
                                                                               : -double(subset_coverage(eta, subset));
        if (value < best_value) {
            best_value = value;
            best_subset = subset;
        }
        // Next combination in lexicographic order.
        int i = n_sel - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - n_sel + i)
            --i;
        if (i < 0)
            break;
        ++subset[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n_sel; ++j)
            subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
    }
    return best_subset;
}

CrbConfig position_config(const CrbConfig& cfg, std::size_t position)
{
    CrbConfig out = cfg;
    out.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(position));
    return out;
}

RealMatrix score_table(const RoiGrid& roi, const Scenario& scenario, const CrbConfig& cfg, int k, int workers)
{
    if (roi.positions.empty())
        throw InvalidInput("score_table: empty ROI");
    const int n_bfi = bfi_element_count(scenario.geometry.n_rx, scenario.geometry.n_tx);
    RealMatrix table(static_cast<Eigen::Index>(roi.size()), n_bfi);
    parallel_for(roi.size(), workers, [&](std::size_t r) {
        Scenario local = scenario;
        local.nominal = roi.positions[r];
        const PositionParams x = target_params(roi.target, roi.positions[r]);
        table.row(static_cast<Eigen::Index>(r)) = element_scores(x, local, position_config(cfg, r), k).transpose();
    });
    return table;
}

SelectionResult select_features(const RoiGrid& roi, const Scenario& scenario, const CrbConfig& cfg, int n_sel,
                                SelectionMode mode, int workers)
{
    SelectionResult out;
    out.mode = mode;
    out.n_sel = n_sel;
    out.n_bfi = bfi_element_count(scenario.geometry.n_rx, scenario.geometry.n_tx);
    if (n_sel < 1 || n_sel > out.n_bfi)
        throw InvalidInput("select_features: need 1 <= n_sel <= N_BFI = " + std::to_string(out.n_bfi));
    for (int k = 1; k <= scenario.grid.n_subcarriers; ++k) {
        SubcarrierSelection sc;
        sc.k = k;
        sc.scores = score_table(roi, scenario, cfg, k, workers);
        sc.eta = best_element_map(sc.scores, mode);
        sc.coverage = coverage_counts(sc.eta, out.n_bfi);
        sc.selected = greedy_select(sc.eta, n_sel, out.n_bfi);
        out.per_subcarrier.push_back(std::move(sc));
    }
    return out;
}

} // namespace bfisense
