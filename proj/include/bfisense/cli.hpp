#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bfisense/channel.hpp"

namespace bfisense::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kSchema = 2, kDegenerate = 3 };

const std::vector<std::string>& commands();

/// Every recognized key with its default value.
json default_config();

/// Overlays `user` on `base`. Keys absent from `base` and type changes are
/// schema errors (InvalidInput) naming the dotted key path.
json merge_config(const json& base, const json& user);

/// "a.b.c=value": value parsed as JSON, else taken as a string.
void apply_override(json& config, const std::string& assignment);

/// FNV-1a 64 of the compact serialization, as 16 hex digits.
std::string config_digest(const json& config);

Scenario scenario_from_config(const json& config);

struct RunOptions {
    std::filesystem::path out_dir;
    int workers = 0;
};

/// Executes `command` with a fully merged config. Writes artifacts plus
/// manifest.json into out_dir; on failure writes error.json and returns the
/// exit code for the error class.
int run(const std::string& command, const json& config, const RunOptions& opts, std::ostream& log);

} // namespace bfisense::cli
