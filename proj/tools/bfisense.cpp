// bfisense command-line front end.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "bfisense/cli.hpp"
#include "bfisense/io.hpp"

int main(int argc, char** argv)
{
    using namespace bfisense;
    CLI::App app{"Beamforming feedback sensing toolkit"};
    app.set_version_flag("--version", cli::kVersion);

    std::string command, config_path, out_dir, input;
    std::vector<std::string> overrides;
    int workers = 0;
    double snr = std::numeric_limits<double>::quiet_NaN();
    int n_sel = 0;
    bool print_config = false;

    std::string command_help = "one of:";
    for (const auto& c : cli::commands())
        command_help += " " + c;
    app.add_option("command", command, command_help);
    app.add_option("-c,--config", config_path, "JSON config document");
    app.add_option("-o,--out", out_dir, "output directory (default $BFISENSE_OUT or ./bfisense_out)");
    app.add_option("-i,--input", input, "input file for csi2bfi, bfi2v and quantize");
    app.add_option("-w,--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--snr", snr, "scenario SNR in dB");
    app.add_option("--n-sel", n_sel, "number of selected elements (select and evaluate)");
    app.add_option("-s,--set", overrides, "config override key.path=value (repeatable)");
    app.add_flag("--print-config", print_config, "print the merged config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kSchema;
    }

    nlohmann::json config = cli::default_config();
    try {
        if (!config_path.empty())
            config = cli::merge_config(config, nlohmann::json::parse(io::read_text_file(config_path)));
        for (const auto& o : overrides)
            cli::apply_override(config, o);
        // Dedicated flags take precedence over --set.
        if (!input.empty())
            config["input"] = input;
        if (!std::isnan(snr))
            config["scenario"]["snr_db"] = snr;
        if (n_sel > 0) {
            config["select"]["n_sel"] = n_sel;
            config["evaluate"]["n_sel"] = n_sel;
        }
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"status", "error"}, {"exit_code", 2}, {"error", "schema"}, {"message", e.what()}}.dump()
                  << '\n';
        return cli::kSchema;
    }

    if (print_config) {
        std::cout << config.dump(2) << '\n';
        return 0;
    }
    if (command.empty()) {
        std::cerr << app.help();
        return cli::kSchema;
    }
    if (out_dir.empty()) {
        const char* env = std::getenv("BFISENSE_OUT");
        out_dir = env && *env ? env : "bfisense_out";
    }
    return cli::run(command, config, {out_dir, workers}, std::cerr);
}
