#include "bfisense/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "bfisense/io.hpp"
#include "bfisense/parallel.hpp"

namespace bfisense::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string join_path(const std::string& prefix, const std::string& key)
{
    return prefix.empty() ? key : prefix + "." + key;
}

bool same_kind(const json& a, const json& b)
{
    if (a.is_number() && b.is_number())
        return !(a.is_number_integer() && !b.is_number_integer() && std::floor(b.get<double>()) != b.get<double>());
    return a.type() == b.type();
}

void merge_into(json& base, const json& user, const std::string& prefix)
{
    if (!user.is_object())
        throw InvalidInput("config " + (prefix.empty() ? std::string("document") : "'" + prefix + "'") +
                           " must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = join_path(prefix, it.key());
        if (!base.contains(it.key()))
            throw InvalidInput("unknown config key '" + path + "'");
        json& slot = base[it.key()];
        if (slot.is_object()) {
            merge_into(slot, it.value(), path);
        } else if (!same_kind(slot, it.value())) {
            throw InvalidInput("config key '" + path + "' expects " + std::string(slot.type_name()) + ", got " +
                               it.value().type_name());
        } else if (slot.is_number_integer() && !it.value().is_number_integer()) {
            slot = static_cast<std::int64_t>(it.value().get<double>());
        } else {
            slot = it.value();
        }
    }
}

// Typed lookup of a dotted path in a merged config.
template <typename T>
T cfg(const json& c, const std::string& path)
{
    const json* node = &c;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(key))
            throw InvalidInput("missing config key '" + path + "'");
        node = &(*node)[key];
        if (dot == std::string::npos)
            break;
        start = dot + 1;
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw InvalidInput("config key '" + path + "' has the wrong type");
    }
}

void collect_seeds(const json& c, const std::string& prefix, json& out)
{
    for (auto it = c.begin(); it != c.end(); ++it) {
        const std::string path = join_path(prefix, it.key());
        if (it.value().is_object())
            collect_seeds(it.value(), path, out);
        else if (it.key() == "seed" || it.key() == "seeds")
            out[path] = it.value();
    }
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream ss;
    ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return ss.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

CrbConfig crb_from_config(const json& c)
{
    CrbConfig out;
    out.n_mc = cfg<int>(c, "crb.n_mc");
    out.fd_step_angle = cfg<double>(c, "crb.fd_step_angle");
    out.fd_step_distance = cfg<double>(c, "crb.fd_step_distance");
    out.ridge = cfg<double>(c, "crb.ridge");
    out.seed = cfg<std::uint64_t>(c, "crb.seed");
    out.validate();
    return out;
}

RoiGrid roi_from_config(const json& c)
{
    RoiSpec spec;
    spec.n_positions = cfg<int>(c, "roi.n_positions");
    spec.r_min = cfg<double>(c, "roi.r_min");
    spec.r_max = cfg<double>(c, "roi.r_max");
    spec.angle_min = cfg<double>(c, "roi.angle_min_deg") * kDeg;
    spec.angle_max = cfg<double>(c, "roi.angle_max_deg") * kDeg;
    spec.seed = cfg<std::uint64_t>(c, "roi.seed");
    return make_roi(spec, target_from_string(cfg<std::string>(c, "roi.target")));
}

int subcarrier(const json& c, const Scenario& s)
{
    const int k = cfg<int>(c, "scenario.k");
    if (k < 1 || k > s.grid.n_subcarriers)
        throw InvalidInput("scenario.k must lie in [1, " + std::to_string(s.grid.n_subcarriers) + "]");
    return k;
}

fs::path input_path(const json& c)
{
    const std::string p = cfg<std::string>(c, "input");
    if (p.empty())
        throw InvalidInput("this command needs an input file (config key 'input' or --input)");
    return p;
}

json parse_json_file(const fs::path& p)
{
    try {
        return json::parse(io::read_text_file(p));
    } catch (const json::parse_error& e) {
        throw InvalidInput("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

// Every command returns the list of files it wrote.
using Outputs = std::vector<std::string>;

Outputs cmd_simulate(const json& c, const fs::path& out)
{
    const Scenario s = scenario_from_config(c);
    const int k = subcarrier(c, s);
    io::CsiRecord rec{s.geometry, s.grid, k, s.mean_csi(s.nominal, k)};
    if (cfg<bool>(c, "simulate.noisy")) {
        const NoiseSpec noise{noise_var_for_snr(rec.matrix, s.snr_db), cfg<std::uint64_t>(c, "simulate.seed")};
        rec.matrix = csi_sample(rec.matrix, noise);
    }
    io::write_text_file(out / "csi.json", dump(io::csi_to_json(rec)));
    return {"csi.json"};
}

Outputs cmd_csi2bfi(const json& c, const fs::path& out)
{
    const io::CsiRecord rec = io::csi_from_json(parse_json_file(input_path(c)));
    io::write_text_file(out / "bfi.json", dump(io::bfi_to_json(csi_to_bfi(rec.matrix))));
    return {"bfi.json"};
}

Outputs cmd_bfi2v(const json& c, const fs::path& out)
{
    const ComplexMatrix v = givens_reconstruct(io::bfi_from_json(parse_json_file(input_path(c))));
    const json j = {{"rows", v.rows()}, {"cols", v.cols()}, {"matrix", io::complex_matrix_to_json(v)}};
    io::write_text_file(out / "v.json", dump(j));
    return {"v.json"};
}

Outputs cmd_quantize(const json& c, const fs::path& out)
{
    const QuantizedBfi q = quantize(io::bfi_from_json(parse_json_file(input_path(c))), cfg<int>(c, "quantize.b_psi"));
    io::write_text_file(out / "quantized.json", dump(io::quantized_to_json(q)));
    io::write_binary_file(out / "bfi.bin", pack(q));
    return {"quantized.json", "bfi.bin"};
}

Outputs cmd_crb_map(const json& c, const fs::path& out, int workers)
{
    const Scenario s = scenario_from_config(c);
    const int k = subcarrier(c, s);
    const CrbConfig base = crb_from_config(c);
    const RoiGrid roi = roi_from_config(c);
    const int n_bfi = bfi_element_count(s.geometry.n_rx, s.geometry.n_tx);
    const std::vector<std::string> target_names = target_params(roi.target, roi.positions[0]).names;

    std::vector<std::string> rows(roi.size());
    parallel_for(roi.size(), workers, [&](std::size_t r) {
        const Pose& pose = roi.positions[r];
        Scenario local = s;
        local.nominal = pose;
        const CrbConfig pc = position_config(base, r);
        const PositionParams x = target_params(roi.target, pose);
        const GaussianModel model = estimate_moments(x, local, pc, k);
        const RealVector chi = element_scores(bfi_jacobian(x, local, pc, k), model.covariance, pc.ridge);
        PositionParams polar{{"aod", "aoa", "distance"}, RealVector(3)};
        polar.values << pose.aod, pose.aoa, pose.distance;
        const FisherResult fr = fisher_crb(bfi_jacobian(polar, local, pc, k), model.covariance);

        std::ostringstream line;
        for (Eigen::Index i = 0; i < x.dim(); ++i)
            line << io::format_double(x.values(i)) << ',';
        for (int i = 0; i < 3; ++i)
            line << io::format_double(fr.crb_diag(i)) << ',';
        for (int i = 0; i < 3; ++i)
            line << io::format_double(nl_crb(fr.crb_diag(i))) << ',';
        for (Eigen::Index j = 0; j < chi.size(); ++j)
            line << io::format_double(chi(j)) << (j + 1 < chi.size() ? "," : "\n");
        rows[r] = line.str();
    });

    std::ostringstream csv;
    for (const auto& n : target_names)
        csv << n << ',';
    csv << "crb_aod,crb_aoa,crb_dist,nl_crb_aod,nl_crb_aoa,nl_crb_dist";
    for (int j = 1; j <= n_bfi; ++j)
        csv << ",chi_" << j;
    csv << '\n';
    for (const auto& row : rows)
        csv << row;
    io::write_text_file(out / "crb_map.csv", csv.str());
    return {"crb_map.csv"};
}

Outputs cmd_select(const json& c, const fs::path& out, int workers)
{
    const Scenario s = scenario_from_config(c);
    const RoiGrid roi = roi_from_config(c);
    const SelectionResult sel = select_features(roi, s, crb_from_config(c), cfg<int>(c, "select.n_sel"),
                                                selection_mode_from_string(cfg<std::string>(c, "select.mode")), workers);
    json j = io::selection_to_json(sel);
    j["config_digest"] = config_digest(c);
    io::write_text_file(out / "selection.json", dump(j));

    std::ostringstream csv;
    csv << "k,position";
    for (int e = 1; e <= sel.n_bfi; ++e)
        csv << ",chi_" << e;
    csv << ",eta\n";
    for (const auto& sc : sel.per_subcarrier)
        for (Eigen::Index r = 0; r < sc.scores.rows(); ++r) {
            csv << sc.k << ',' << r;
            for (Eigen::Index e = 0; e < sc.scores.cols(); ++e)
                csv << ',' << io::format_double(sc.scores(r, e));
            csv << ',' << sc.eta[static_cast<std::size_t>(r)] + 1 << '\n';
        }
    io::write_text_file(out / "selection_scores.csv", csv.str());
    return {"selection.json", "selection_scores.csv"};
}

Outputs cmd_ks(const json& c, const fs::path& out)
{
    Scenario s = scenario_from_config(c);
    const int k = subcarrier(c, s);
    const int n = cfg<int>(c, "ks.samples");
    const double alpha = cfg<double>(c, "ks.alpha");
    if (n < 30)
        throw InvalidInput("ks.samples must be >= 30");
    const Bfi mean = mean_bfi(PositionParams{{"aod"}, RealVector::Constant(1, s.nominal.aod)}, s, k);
    const ComplexMatrix h_bar = s.mean_csi(s.nominal, k);
    const double var = noise_var_for_snr(h_bar, s.snr_db);
    std::mt19937_64 rng(cfg<std::uint64_t>(c, "ks.seed"));
    RealMatrix dev(n, static_cast<Eigen::Index>(mean.size()));
    for (int t = 0; t < n; ++t)
        dev.row(t) = periodic_diff(csi_to_bfi(csi_sample(h_bar, var, rng)), mean).transpose();

    std::ostringstream summary, samples;
    summary << "element,kind,row,col,mean,sd,statistic,p_value,gaussian\n";
    for (std::size_t j = 0; j < mean.size(); ++j) {
        const auto& e = mean.elements[j];
        const RealVector col = dev.col(static_cast<Eigen::Index>(j));
        const KsResult ks = ks_gaussian_pvalue(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())));
        const double mu = col.mean();
        const double sd = std::sqrt((col.array() - mu).square().sum() / double(n - 1));
        summary << j + 1 << ',' << to_string(e.label.kind) << ',' << e.label.row << ',' << e.label.col << ','
                << io::format_double(mu) << ',' << io::format_double(sd) << ',' << io::format_double(ks.statistic)
                << ',' << io::format_double(ks.p_value) << ',' << (ks.p_value >= alpha ? 1 : 0) << '\n';
        samples << to_string(e.label) << (j + 1 < mean.size() ? "," : "\n");
    }
    for (int t = 0; t < n; ++t)
        for (Eigen::Index j = 0; j < dev.cols(); ++j)
            samples << io::format_double(dev(t, j)) << (j + 1 < dev.cols() ? "," : "\n");
    io::write_text_file(out / "ks.csv", summary.str());
    io::write_text_file(out / "ks_deviations.csv", samples.str());
    return {"ks.csv", "ks_deviations.csv"};
}

Outputs cmd_music(const json& c, const fs::path& out, int workers)
{
    const Scenario s = scenario_from_config(c);
    McConfig mc;
    mc.snr_db = cfg<std::vector<double>>(c, "music.snr_db");
    mc.trials = cfg<int>(c, "music.trials");
    mc.seed = cfg<std::uint64_t>(c, "music.seed");
    mc.grid_step_deg = cfg<double>(c, "music.grid_step_deg");
    mc.music.refine = cfg<bool>(c, "music.refine");
    mc.music.n_paths = cfg<int>(c, "music.n_paths");
    mc.k = subcarrier(c, s);
    const std::vector<McPoint> pts = mc_estimator_variance(s, s.nominal, mc, crb_from_config(c), workers);
    std::ostringstream csv;
    csv << "snr_db,mc_variance,crb,ratio,mc_mean,true_aod\n";
    for (const auto& p : pts)
        csv << io::format_double(p.snr_db) << ',' << io::format_double(p.mc_variance) << ','
            << io::format_double(p.crb) << ',' << io::format_double(p.mc_variance / p.crb) << ','
            << io::format_double(p.mc_mean) << ',' << io::format_double(s.nominal.aod) << '\n';
    io::write_text_file(out / "music_mc.csv", csv.str());
    return {"music_mc.csv"};
}

json subset_to_json(const FeatureSubset& f)
{
    json j = json::array();
    for (auto s : f) {
        std::sort(s.begin(), s.end());
        json row = json::array();
        for (int e : s)
            row.push_back(e + 1);
        j.push_back(row);
    }
    return j;
}

json quantiles_to_json(const ErrorQuantiles& q)
{
    return {{"p10", q.p10}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"p90", q.p90}, {"mean", q.mean}};
}

Outputs cmd_evaluate(const json& c, const fs::path& out, int workers, std::ostream& log)
{
    const Scenario s = scenario_from_config(c);
    const RoiGrid roi = roi_from_config(c);
    const int n_sel = cfg<int>(c, "evaluate.n_sel");
    const int n_bfi = bfi_element_count(s.geometry.n_rx, s.geometry.n_tx);
    const int n_sc = s.grid.n_subcarriers;
    const auto seeds = cfg<std::vector<std::uint64_t>>(c, "evaluate.seeds");
    const auto methods = cfg<std::vector<std::string>>(c, "evaluate.methods");
    const FeatureEncoding enc = feature_encoding_from_string(cfg<std::string>(c, "evaluate.encoding"));
    const int spp = cfg<int>(c, "evaluate.samples_per_pos");
    const double train_fraction = cfg<double>(c, "evaluate.train_fraction");
    const bool write_datasets = cfg<bool>(c, "evaluate.write_datasets");
    if (seeds.empty() || methods.empty())
        throw InvalidInput("evaluate.seeds and evaluate.methods must be non-empty");
    for (const auto& m : methods)
        if (m != "all" && m != "prop" && m != "rand" && m != "min")
            throw InvalidInput("unknown evaluate method '" + m + "' (expected all, prop, rand or min)");

    MlpSpec mlp;
    mlp.hidden = cfg<int>(c, "evaluate.mlp.hidden");
    mlp.activation = activation_from_string(cfg<std::string>(c, "evaluate.mlp.activation"));
    mlp.epochs = cfg<int>(c, "evaluate.mlp.epochs");
    mlp.learning_rate = cfg<double>(c, "evaluate.mlp.learning_rate");
    mlp.momentum = cfg<double>(c, "evaluate.mlp.momentum");
    mlp.batch_size = cfg<int>(c, "evaluate.mlp.batch_size");
    mlp.validate();

    const SelectionResult sel = select_features(roi, s, crb_from_config(c), n_sel,
                                                selection_mode_from_string(cfg<std::string>(c, "evaluate.mode")), workers);
    const FeatureSubset all = all_features(n_bfi, n_sc);
    const FeatureSubset prop = subset_from_selection(sel);
    const FeatureSubset min = min_crb_subset(sel);

    json results = {{"config_digest", config_digest(c)}, {"selection", io::selection_to_json(sel)}};
    json per_method = json::object();
    std::ostringstream errors_csv;
    errors_csv << "method,seed,position,error\n";
    Outputs outputs;
    for (const auto& m : methods)
        per_method[m] = {{"per_seed", json::array()}};

    for (std::uint64_t seed : seeds) {
        const Dataset full = gen_dataset(roi, s, all, spp, s.snr_db, derive_seed(seed, 1), enc, workers);
        if (write_datasets) {
            const std::string name = "dataset_seed" + std::to_string(seed) + ".csv";
            io::write_text_file(out / name, io::dataset_csv(full, s.geometry.n_rx, s.geometry.n_tx));
            outputs.push_back(name);
        }
        const auto [train, test] = split_by_position(full, train_fraction, derive_seed(seed, 2));
        for (const auto& m : methods) {
            const FeatureSubset subset = m == "all"    ? all
                                         : m == "prop" ? prop
                                         : m == "min"  ? min
                                                       : random_subset(n_bfi, n_sc, n_sel, derive_seed(seed, 99));
            MlpSpec spec = mlp;
            spec.seed = seed;
            const PositionerResult res =
                train_eval_positioner(restrict_features(train, subset), restrict_features(test, subset), spec);
            per_method[m]["per_seed"].push_back(
                {{"seed", seed}, {"features", subset_to_json(subset)}, {"quantiles", quantiles_to_json(res.quantiles)}});
            for (std::size_t i = 0; i < res.errors.size(); ++i)
                errors_csv << m << ',' << seed << ',' << test.position_index[i] << ',' << io::format_double(res.errors[i])
                           << '\n';
            log << "evaluate: seed " << seed << ' ' << m << " median " << res.quantiles.median << " m\n";
        }
    }
    for (auto& [name, entry] : per_method.items()) {
        std::vector<double> medians;
        for (const auto& p : entry["per_seed"])
            medians.push_back(p["quantiles"]["median"].get<double>());
        entry["median_of_medians"] = quantile(medians, 0.5);
    }
    results["methods"] = per_method;
    io::write_text_file(out / "results.json", dump(results));
    io::write_text_file(out / "errors.csv", errors_csv.str());
    outputs.insert(outputs.begin(), {"results.json", "errors.csv"});
    return outputs;
}

void write_error(const fs::path& out_dir, const std::string& command, int code, const char* cls,
                 const std::string& message, std::ostream& log)
{
    const json err = {{"status", "error"}, {"command", command}, {"exit_code", code}, {"error", cls}, {"message", message}};
    log << err.dump() << '\n';
    std::error_code ec;
    if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
        try {
            io::write_text_file(out_dir / "error.json", dump(err));
        } catch (...) {
            // stderr already carries the report
        }
    }
}

} // namespace

const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"simulate-csi", "csi2bfi", "bfi2v",   "quantize", "crb-map",
                                                "select",       "ks-test", "music-mc", "evaluate"};
    return names;
}

json default_config()
{
    return json::parse(R"({
  "input": "",
  "scenario": {
    "n_rx": 4, "n_tx": 4,
    "rx_spacing": 0.0, "tx_spacing": 0.0,
    "center_frequency": 5.825e9, "subcarrier_spacing": 312500.0, "n_subcarriers": 1, "k": 1,
    "reference_distance": 5.0, "snr_db": 20.0,
    "pose": {"aod_deg": 0.0, "aoa_deg": 0.0, "distance": 5.0},
    "cluster": {"count": 4, "k_factor_db": 3.0, "excess_min": 2.0, "excess_max": 15.0, "seed": 1}
  },
  "roi": {"n_positions": 1000, "r_min": 5.0, "r_max": 10.0, "angle_min_deg": -85.0, "angle_max_deg": 85.0,
          "seed": 1, "target": "location"},
  "crb": {"n_mc": 1000, "fd_step_angle": 1e-3, "fd_step_distance": 1e-4, "ridge": 1e-10, "seed": 1},
  "simulate": {"noisy": true, "seed": 1},
  "quantize": {"b_psi": 7},
  "select": {"n_sel": 5, "mode": "information"},
  "ks": {"samples": 10000, "alpha": 0.05, "seed": 1},
  "music": {"snr_db": [10.0, 15.0, 20.0, 25.0, 30.0], "trials": 500, "seed": 1, "grid_step_deg": 0.5,
            "refine": true, "n_paths": 1},
  "evaluate": {"n_sel": 5, "mode": "information", "samples_per_pos": 10, "train_fraction": 0.8,
               "seeds": [1, 2, 3, 4, 5, 6, 7, 8, 9, 10], "methods": ["all", "prop", "rand", "min"],
               "encoding": "raw", "write_datasets": false,
               "mlp": {"hidden": 128, "activation": "relu", "epochs": 200, "learning_rate": 1e-3,
                       "momentum": 0.9, "batch_size": 64}}
})");
}

json merge_config(const json& base, const json& user)
{
    json out = base;
    if (!user.is_null())
        merge_into(out, user, "");
    return out;
}

void apply_override(json& config, const std::string& assignment)
{
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw InvalidInput("override '" + assignment + "' is not of the form key.path=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded())
        value = text;
    json overlay = value;
    std::size_t end = path.size();
    while (true) {
        const std::size_t dot = path.rfind('.', end - 1);
        const std::size_t start = dot == std::string::npos ? 0 : dot + 1;
        overlay = json{{path.substr(start, end - start), overlay}};
        if (dot == std::string::npos)
            break;
        end = dot;
    }
    config = merge_config(config, overlay);
}

std::string config_digest(const json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << h;
    return ss.str();
}

Scenario scenario_from_config(const json& c)
{
    Scenario s;
    s.grid.center_frequency = cfg<double>(c, "scenario.center_frequency");
    s.grid.spacing = cfg<double>(c, "scenario.subcarrier_spacing");
    s.grid.n_subcarriers = cfg<int>(c, "scenario.n_subcarriers");
    s.grid.validate();
    s.geometry = ArrayGeometry::half_wavelength(cfg<int>(c, "scenario.n_rx"), cfg<int>(c, "scenario.n_tx"),
                                                s.grid.center_frequency);
    // Zero spacing means half a wavelength at the center frequency.
    if (const double d = cfg<double>(c, "scenario.rx_spacing"); d != 0.0)
        s.geometry.rx_spacing = d;
    if (const double d = cfg<double>(c, "scenario.tx_spacing"); d != 0.0)
        s.geometry.tx_spacing = d;
    s.geometry.validate();
    s.reference_distance = cfg<double>(c, "scenario.reference_distance");
    if (!(s.reference_distance > 0.0))
        throw InvalidInput("scenario.reference_distance must be > 0");
    s.snr_db = cfg<double>(c, "scenario.snr_db");
    s.nominal = Pose{cfg<double>(c, "scenario.pose.aod_deg") * kDeg, cfg<double>(c, "scenario.pose.aoa_deg") * kDeg,
                     cfg<double>(c, "scenario.pose.distance")};
    los_path(s.nominal.aod, s.nominal.aoa, s.nominal.distance, 1.0); // validates the pose
    MultipathClusterSpec cluster;
    cluster.count = cfg<int>(c, "scenario.cluster.count");
    cluster.k_factor_db = cfg<double>(c, "scenario.cluster.k_factor_db");
    cluster.excess_min = cfg<double>(c, "scenario.cluster.excess_min");
    cluster.excess_max = cfg<double>(c, "scenario.cluster.excess_max");
    cluster.seed = cfg<std::uint64_t>(c, "scenario.cluster.seed");
    s.nlos = make_multipath_cluster(cluster, s.reference_distance);
    return s;
}

int run(const std::string& command, const json& config, const RunOptions& opts, std::ostream& log)
{
    try {
        if (std::find(commands().begin(), commands().end(), command) == commands().end())
            throw InvalidInput("unknown command '" + command + "'");
        fs::create_directories(opts.out_dir);
        const json c = merge_config(default_config(), config);

        Outputs outputs;
        if (command == "simulate-csi")
            outputs = cmd_simulate(c, opts.out_dir);
        else if (command == "csi2bfi")
            outputs = cmd_csi2bfi(c, opts.out_dir);
        else if (command == "bfi2v")
            outputs = cmd_bfi2v(c, opts.out_dir);
        else if (command == "quantize")
            outputs = cmd_quantize(c, opts.out_dir);
        else if (command == "crb-map")
            outputs = cmd_crb_map(c, opts.out_dir, opts.workers);
        else if (command == "select")
            outputs = cmd_select(c, opts.out_dir, opts.workers);
        else if (command == "ks-test")
            outputs = cmd_ks(c, opts.out_dir);
        else if (command == "music-mc")
            outputs = cmd_music(c, opts.out_dir, opts.workers);
        else
            outputs = cmd_evaluate(c, opts.out_dir, opts.workers, log);

        json seeds = json::object();
        collect_seeds(c, "", seeds);
        const json manifest = {
            {"command", command},
            {"config_digest", config_digest(c)},
            {"config", c},
            {"seeds", seeds},
            {"outputs", outputs},
            {"versions",
             {{"bfisense", kVersion},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
            {"workers", resolve_workers(opts.workers)},
            {"timestamp", utc_timestamp()},
        };
        io::write_text_file(opts.out_dir / "manifest.json", dump(manifest));
        return kOk;
    } catch (const DegenerateInput& e) {
        write_error(opts.out_dir, command, kDegenerate, "degenerate", e.what(), log);
        return kDegenerate;
    } catch (const InvalidInput& e) {
        write_error(opts.out_dir, command, kSchema, "schema", e.what(), log);
        return kSchema;
    } catch (const IndexError& e) {
        write_error(opts.out_dir, command, kSchema, "schema", e.what(), log);
        return kSchema;
    } catch (const json::exception& e) {
        write_error(opts.out_dir, command, kSchema, "schema", e.what(), log);
        return kSchema;
    } catch (const std::exception& e) {
        write_error(opts.out_dir, command, kFailure, "failure", e.what(), log);
        return kFailure;
    }
}

} // namespace bfisense::cli
