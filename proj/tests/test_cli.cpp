#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bfisense/cli.hpp"
#include "bfisense/io.hpp"

using namespace bfisense;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("bfisense_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args, const fs::path& out)
{
    const std::string cmd = std::string(BFISENSE_CLI_PATH) + " " + args + " -o '" + out.string() + "' -w 1 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json read_json(const fs::path& p) { return json::parse(io::read_text_file(p)); }

int count_lines(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line))
        ++n;
    return n;
}

const std::string kSmallRoi = " --set roi.n_positions=5 --set crb.n_mc=200 --set scenario.n_rx=2 ";

} // namespace

TEST_CASE("config merging")
{
    const json base = cli::default_config();
    CHECK(cli::merge_config(base, json::object()) == base);

    const json m = cli::merge_config(base, json::parse(R"({"scenario": {"snr_db": 30, "pose": {"distance": 7}}})"));
    CHECK(m["scenario"]["snr_db"] == 30.0);
    CHECK(m["scenario"]["pose"]["distance"] == 7.0);
    CHECK(m["scenario"]["n_rx"] == 4);

    CHECK_THROWS_AS(cli::merge_config(base, json::parse(R"({"scenari": {}})")), InvalidInput);
    CHECK_THROWS_AS(cli::merge_config(base, json::parse(R"({"scenario": {"n_rx": "four"}})")), InvalidInput);
    CHECK_THROWS_AS(cli::merge_config(base, json::parse(R"({"scenario": {"n_rx": 2.5}})")), InvalidInput);
    CHECK_THROWS_AS(cli::merge_config(base, json::parse(R"({"scenario": 3})")), InvalidInput);
}

TEST_CASE("overrides")
{
    json c = cli::default_config();
    cli::apply_override(c, "select.n_sel=3");
    cli::apply_override(c, "select.mode=literal_min");
    cli::apply_override(c, "music.snr_db=[5, 10]");
    CHECK(c["select"]["n_sel"] == 3);
    CHECK(c["select"]["mode"] == "literal_min");
    CHECK(c["music"]["snr_db"].size() == 2);
    CHECK_THROWS_AS(cli::apply_override(c, "select.nsel=3"), InvalidInput);
    CHECK_THROWS_AS(cli::apply_override(c, "no_equals_sign"), InvalidInput);
}

TEST_CASE("config digest")
{
    const json a = cli::default_config();
    json b = a;
    CHECK(cli::config_digest(a) == cli::config_digest(b));
    CHECK(cli::config_digest(a).size() == 16);
    b["quantize"]["b_psi"] = 5;
    CHECK(cli::config_digest(a) != cli::config_digest(b));
    // FNV-1a 64 of the empty object "{}".
    CHECK(cli::config_digest(json::object()) == "08f44b07b5901a25");
}

TEST_CASE("scenario from config")
{
    json c = cli::default_config();
    const Scenario s = cli::scenario_from_config(c);
    CHECK(s.geometry.n_rx == 4);
    CHECK(s.geometry.tx_spacing == doctest::Approx(kSpeedOfLight / 5.825e9 / 2));
    CHECK(s.nlos.size() == 4);
    c["scenario"]["pose"]["distance"] = -1.0;
    CHECK_THROWS_AS(cli::scenario_from_config(c), InvalidInput);
}

TEST_CASE("csi2bfi on a diagonal CSI record gives zero angles")
{
    const fs::path out = scratch("csi2bfi");
    REQUIRE(run_cli("csi2bfi -i " BFISENSE_TEST_DATA "/csi_diag21.json", out) == 0);
    const json bfi = read_json(out / "bfi.json");
    REQUIRE(bfi["elements"].size() == 2);
    CHECK(bfi["elements"][0]["kind"] == "phi");
    CHECK(bfi["elements"][0]["value"].get<double>() == doctest::Approx(0.0));
    CHECK(bfi["elements"][1]["kind"] == "psi");
    CHECK(bfi["elements"][1]["value"].get<double>() == doctest::Approx(0.0));
    const json manifest = read_json(out / "manifest.json");
    CHECK(manifest["command"] == "csi2bfi");
    CHECK(manifest["outputs"] == json::array({"bfi.json"}));
}

TEST_CASE("simulate, decompose, reconstruct and quantize chain")
{
    const fs::path out = scratch("chain");
    REQUIRE(run_cli("simulate-csi --set scenario.n_rx=2", out) == 0);
    REQUIRE(run_cli("csi2bfi -i '" + (out / "csi.json").string() + "'", out) == 0);
    REQUIRE(run_cli("bfi2v -i '" + (out / "bfi.json").string() + "'", out) == 0);
    REQUIRE(run_cli("quantize --set quantize.b_psi=5 -i '" + (out / "bfi.json").string() + "'", out) == 0);

    const json v = read_json(out / "v.json");
    CHECK(v["rows"] == 4);
    CHECK(v["cols"] == 2);
    const json q = read_json(out / "quantized.json");
    CHECK(q["b_psi"] == 5);
    CHECK(q["b_phi"] == 7);
    // 10 elements: 6 phi codes of 7 bits and 4 psi codes of 5 bits, plus a 2-byte header.
    CHECK(fs::file_size(out / "bfi.bin") == 2 + (6 * 7 + 4 * 5 + 7) / 8);
}

TEST_CASE("select with every element picks the identity")
{
    const fs::path out = scratch("select_all");
    REQUIRE(run_cli("select --n-sel 10" + kSmallRoi, out) == 0);
    const json sel = read_json(out / "selection.json");
    CHECK(sel["per_subcarrier"][0] == json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}));
    CHECK(sel["n_bfi"] == 10);
    CHECK(count_lines(out / "selection_scores.csv") == 6);
}

TEST_CASE("crb-map writes one row per ROI position")
{
    const fs::path out = scratch("crb_map");
    REQUIRE(run_cli("crb-map" + kSmallRoi, out) == 0);
    CHECK(count_lines(out / "crb_map.csv") == 6);
    std::ifstream in(out / "crb_map.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("x,y,crb_aod", 0) == 0);
    CHECK(header.find("chi_10") != std::string::npos);
}

TEST_CASE("exit codes")
{
    const fs::path out = scratch("exit");
    CHECK(run_cli("select --set select.bogus=1", out) == 2);
    CHECK(run_cli("no-such-command", out) == 2);
    CHECK(run_cli("csi2bfi", out) == 2);
    CHECK(read_json(out / "error.json")["error"] == "schema");

    const fs::path cfg = out / "bad.json";
    io::write_text_file(cfg, R"({"roi": {"n_positons": 5}})");
    CHECK(run_cli("crb-map -c '" + cfg.string() + "'", out) == 2);

    // A zero CSI matrix has no steering direction.
    json rec = read_json(BFISENSE_TEST_DATA "/csi_diag21.json");
    rec["matrix"][0][0] = json::array({0.0, 0.0});
    rec["matrix"][1][1] = json::array({0.0, 0.0});
    const fs::path zero = out / "zero.json";
    io::write_text_file(zero, rec.dump());
    CHECK(run_cli("csi2bfi -i '" + zero.string() + "'", out) == 3);
    CHECK(read_json(out / "error.json")["error"] == "degenerate");
}

TEST_CASE("reruns are byte-identical")
{
    const fs::path a = scratch("rerun_a");
    const fs::path b = scratch("rerun_b");
    REQUIRE(run_cli("select" + kSmallRoi, a) == 0);
    REQUIRE(run_cli("select" + kSmallRoi, b) == 0);
    CHECK(io::read_text_file(a / "selection.json") == io::read_text_file(b / "selection.json"));
    CHECK(io::read_text_file(a / "selection_scores.csv") == io::read_text_file(b / "selection_scores.csv"));
    CHECK(read_json(a / "manifest.json")["config_digest"] == read_json(b / "manifest.json")["config_digest"]);
}
