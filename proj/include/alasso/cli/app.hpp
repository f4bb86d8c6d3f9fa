#pragma once

#include "alasso/core/error.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace alasso::cli {

/// Every resolved setting of one invocation. Unset optionals fall back to the
/// command's documented default, and the manifest stores what was used.
struct Config
{
    std::string command;

    std::string input;
    std::string response = "y";
    std::vector<std::string> drop;
    std::string delimiter = "auto";
    std::string standardize = "unitnorm";

    std::optional<double> lambda;
    std::optional<double> lambda1;
    double gamma = 1.0;
    bool cv = false;
    std::size_t folds = 5;
    std::size_t cv_grid = 20;

    std::optional<std::size_t> B;
    std::optional<std::uint64_t> seed;
    double level = 0.9;
    std::string side = "two-sided";
    std::string method = "student-R";
    std::string coordinate;
    std::size_t workers = 1;
    std::string out = ".";

    double threshold = 0.5;

    std::string preset;
    std::string scenario_file;
    std::optional<std::size_t> mc_reps;

    std::string support = "estimated";
    double a = 0.0;
    double b = 0.0;
    double delta = 0.1;

    std::size_t rep = 0;
    double x_min = -4.0;
    double x_max = 4.0;
    std::size_t grid = 81;
    bool halve_penalty = true;

    /// Settings only; `out` and `workers` are omitted since neither changes a result.
    nlohmann::ordered_json to_json() const;
    static Config from_json(const nlohmann::ordered_json& j);
};

struct RunResult
{
    std::vector<std::string> outputs; ///< file names written under `out`
    std::string summary;              ///< human-readable text also printed by the tool
};

/// Runs one command, writes its outputs and manifest.json under config.out.
RunResult run(const Config& config);

/// Re-executes a manifest; `out` replaces the recorded output directory when
/// nonempty. Input files must still match their recorded checksums.
RunResult rerun(const std::string& manifest_path, const std::string& out = "");

/// 2 for input errors, 3 for numerical failures, 4 when a replicate failure
/// budget is exceeded.
int exit_code(ErrorCode code);

std::string library_version();

int main_entry(int argc, char** argv);

} // namespace alasso::cli
