#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bfisense/eval.hpp"
#include "bfisense/parallel.hpp"

namespace bfisense {

const char* to_string(FeatureEncoding e) { return e == FeatureEncoding::raw ? "raw" : "sincos"; }

FeatureEncoding feature_encoding_from_string(const std::string& s)
{
    if (s == "raw")
        return FeatureEncoding::raw;
    if (s == "sincos")
        return FeatureEncoding::sincos;
    throw InvalidInput("unknown feature encoding '" + s + "' (expected raw or sincos)");
}

FeatureSubset all_features(int n_bfi, int n_subcarriers)
{
    if (n_bfi < 1 || n_subcarriers < 1)
        throw InvalidInput("all_features: need n_bfi >= 1 and n_subcarriers >= 1");
    std::vector<int> idx(static_cast<std::size_t>(n_bfi));
    std::iota(idx.begin(), idx.end(), 0);
    return FeatureSubset(static_cast<std::size_t>(n_subcarriers), idx);
}

FeatureSubset subset_from_selection(const SelectionResult& sel)
{
    FeatureSubset out;
    for (const auto& sc : sel.per_subcarrier)
        out.push_back(sc.selected);
    return out;
}

FeatureSubset min_crb_subset(const SelectionResult& sel)
{
    FeatureSubset out;
    for (const auto& sc : sel.per_subcarrier) {
        const RealVector mean_chi = sc.scores.colwise().mean().transpose();
        std::vector<int> order(static_cast<std::size_t>(mean_chi.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean_chi(a) > mean_chi(b); });
        order.resize(static_cast<std::size_t>(sel.n_sel));
        std::sort(order.begin(), order.end());
        out.push_back(order);
    }
    return out;
}

FeatureSubset random_subset(int n_bfi, int n_subcarriers, int n_sel, std::uint64_t seed)
{
    if (n_sel < 1 || n_sel > n_bfi)
        throw InvalidInput("random_subset: need 1 <= n_sel <= n_bfi");
    FeatureSubset out = all_features(n_bfi, n_subcarriers);
    for (std::size_t k = 0; k < out.size(); ++k) {
        std::mt19937_64 rng(derive_seed(seed, k));
        std::shuffle(out[k].begin(), out[k].end(), rng);
        out[k].resize(static_cast<std::size_t>(n_sel));
        std::sort(out[k].begin(), out[k].end());
    }
    return out;
}

Dataset gen_dataset(const RoiGrid& roi, const Scenario& scenario, const FeatureSubset& subset, int samples_per_pos,
                    double snr_db, std::uint64_t seed, FeatureEncoding encoding, int workers)
{
    if (roi.positions.empty())
        throw InvalidInput("gen_dataset: empty ROI");
    if (samples_per_pos < 1)
        throw InvalidInput("gen_dataset: samples_per_pos must be >= 1");
    const int n_sc = scenario.grid.n_subcarriers;
    if (static_cast<int>(subset.size()) != n_sc)
        throw InvalidInput("gen_dataset: selection covers " + std::to_string(subset.size()) + " subcarriers, grid has " +
                           std::to_string(n_sc));
    const int n_bfi = bfi_element_count(scenario.geometry.n_rx, scenario.geometry.n_tx);

    Dataset data;
    data.seed = seed;
    std::vector<std::vector<int>> sorted(subset);
    for (int k = 1; k <= n_sc; ++k) {
        auto& s = sorted[static_cast<std::size_t>(k - 1)];
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) != s.end())
            throw InvalidInput("gen_dataset: duplicate element on subcarrier " + std::to_string(k));
        for (int e : s) {
            if (e < 0 || e >= n_bfi)
                throw IndexError("gen_dataset: element " + std::to_string(e) + " outside [0, " + std::to_string(n_bfi) +
                                 ")");
            if (encoding == FeatureEncoding::raw) {
                data.feature_map.push_back({k, e, 0});
            } else {
                data.feature_map.push_back({k, e, 0});
                data.feature_map.push_back({k, e, 1});
            }
        }
    }
    const auto n_feat = static_cast<Eigen::Index>(data.feature_map.size());
    if (n_feat == 0)
        throw InvalidInput("gen_dataset: no features selected");

    const auto n_rows = static_cast<Eigen::Index>(roi.size()) * samples_per_pos;
    data.features.resize(n_rows, n_feat);
    data.positions.resize(n_rows, 2);
    data.position_index.resize(static_cast<std::size_t>(n_rows));

    parallel_for(roi.size(), workers, [&](std::size_t r) {
        const Pose& pose = roi.positions[r];
        const std::vector<Path> paths = scenario.paths(pose);
        std::vector<ComplexMatrix> means;
        std::vector<double> vars;
        for (int k = 1; k <= n_sc; ++k) {
            means.push_back(csi_mean(paths, scenario.geometry, scenario.grid, k));
            vars.push_back(noise_var_for_snr(means.back(), snr_db));
        }
        std::mt19937_64 rng(derive_seed(seed, r));
        for (int s = 0; s < samples_per_pos; ++s) {
            const Eigen::Index row = static_cast<Eigen::Index>(r) * samples_per_pos + s;
            Eigen::Index col = 0;
            for (int k = 1; k <= n_sc; ++k) {
                const auto ki = static_cast<std::size_t>(k - 1);
                const Bfi theta = csi_to_bfi(csi_sample(means[ki], vars[ki], rng));
                for (int e : sorted[ki]) {
                    const double v = theta.elements[static_cast<std::size_t>(e)].value;
                    if (encoding == FeatureEncoding::raw) {
                        data.features(row, col++) = v;
                    } else {
                        // psi lives on a quarter turn; scale so one period maps to one circle.
                        const double w = theta.elements[static_cast<std::size_t>(e)].label.kind == AngleKind::phi ? v : 4.0 * v;
                        data.features(row, col++) = std::sin(w);
                        data.features(row, col++) = std::cos(w);
                    }
                }
            }
            data.positions(row, 0) = pose.x();
            data.positions(row, 1) = pose.y();
            data.position_index[static_cast<std::size_t>(row)] = static_cast<int>(r);
        }
    });
    return data;
}

Dataset take_rows(const Dataset& data, const std::vector<Eigen::Index>& rows)
{
    Dataset out;
    out.seed = data.seed;
    out.feature_map = data.feature_map;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
    out.positions.resize(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
        out.positions.row(static_cast<Eigen::Index>(i)) = data.positions.row(rows[i]);
        out.position_index.push_back(data.position_index[static_cast<std::size_t>(rows[i])]);
    }
    return out;
}

Dataset restrict_features(const Dataset& data, const FeatureSubset& subset)
{
    std::vector<Eigen::Index> cols;
    Dataset out;
    out.seed = data.seed;
    out.positions = data.positions;
    out.position_index = data.position_index;
    for (std::size_t c = 0; c < data.feature_map.size(); ++c) {
        const FeatureTag& tag = data.feature_map[c];
        const auto ki = static_cast<std::size_t>(tag.k - 1);
        if (ki < subset.size() && std::find(subset[ki].begin(), subset[ki].end(), tag.element) != subset[ki].end()) {
            cols.push_back(static_cast<Eigen::Index>(c));
            out.feature_map.push_back(tag);
        }
    }
    std::set<std::pair<int, int>> kept;
    for (const auto& tag : out.feature_map)
        kept.insert({tag.k, tag.element});
    std::size_t wanted = 0;
    for (const auto& s : subset)
        wanted += std::set<int>(s.begin(), s.end()).size();
    if (kept.size() != wanted)
        throw InvalidInput("restrict_features: subset names elements the dataset does not contain");
    out.features = data.features(Eigen::all, cols);
    return out;
}

std::pair<Dataset, Dataset> split_by_position(const Dataset& data, double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidInput("split: train_fraction must lie in (0, 1)");
    const std::set<int> unique(data.position_index.begin(), data.position_index.end());
    std::vector<int> ids(unique.begin(), unique.end());
    if (ids.size() < 2)
        throw InvalidInput("split: need at least two distinct positions");
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * double(ids.size())));
    n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
    const std::set<int> train_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));

    std::vector<Eigen::Index> train_rows, test_rows;
    for (std::size_t i = 0; i < data.position_index.size(); ++i)
        (train_ids.count(data.position_index[i]) ? train_rows : test_rows).push_back(static_cast<Eigen::Index>(i));
    return {take_rows(data, train_rows), take_rows(data, test_rows)};
}

double quantile(std::vector<double> values, double q)
{
    if (values.empty())
        throw InvalidInput("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0))
        throw InvalidInput("quantile: q must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = q * double(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - double(lo)) * (values[hi] - values[lo]);
}

ErrorQuantiles error_quantiles(const std::vector<double>& errors)
{
    ErrorQuantiles q;
    q.p10 = quantile(errors, 0.10);
    q.q1 = quantile(errors, 0.25);
    q.median = quantile(errors, 0.50);
    q.q3 = quantile(errors, 0.75);
    q.p90 = quantile(errors, 0.90);
    q.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / double(errors.size());
    return q;
}

namespace {

struct Standardizer {
    RealVector mean, scale;

    explicit Standardizer(const RealMatrix& m)
    {
        mean = m.colwise().mean().transpose();
        scale = ((m.rowwise() - mean.transpose()).array().square().colwise().sum() / double(std::max<Eigen::Index>(m.rows(), 1)))
                    .sqrt()
                    .transpose();
        for (Eigen::Index j = 0; j < scale.size(); ++j)
            if (!(scale(j) > 1e-12))
                scale(j) = 1.0;
    }
    RealMatrix apply(const RealMatrix& m) const
    {
        return ((m.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array()).matrix();
    }
    RealMatrix invert(const RealMatrix& m) const
    {
        return ((m.array().rowwise() * scale.transpose().array()).rowwise() + mean.transpose().array()).matrix();
    }
};

} // namespace

PositionerResult train_eval_positioner(const Dataset& train, const Dataset& test, MlpSpec spec)
{
    if (train.feature_map != test.feature_map)
        throw InvalidInput("positioner: train and test feature maps differ");
    if (train.n_samples() == 0 || test.n_samples() == 0)
        throw InvalidInput("positioner: empty train or test set");
    const std::set<int> train_ids(train.position_index.begin(), train.position_index.end());
    for (int id : test.position_index)
        if (train_ids.count(id))
            throw InvalidInput("positioner: position " + std::to_string(id) + " appears in both train and test");

    spec.n_in = static_cast<int>(train.features.cols());
    spec.n_out = 2;
    const Standardizer fx(train.features);
    const Standardizer fy(train.positions);
    Mlp net(spec);
    net.train(fx.apply(train.features), fy.apply(train.positions));
    const RealMatrix pred = fy.invert(net.predict(fx.apply(test.features)));

    PositionerResult out;
    out.errors.resize(static_cast<std::size_t>(test.n_samples()));
    for (Eigen::Index i = 0; i < test.n_samples(); ++i)
        out.errors[static_cast<std::size_t>(i)] = (pred.row(i) - test.positions.row(i)).norm();
    out.quantiles = error_quantiles(out.errors);
    return out;
}

} // namespace bfisense
