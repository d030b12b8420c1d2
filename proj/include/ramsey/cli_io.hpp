/*
   Copyright 2026 The ramsey-sync Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ramsey/params.hpp"
#include "ramsey/protocol.hpp"
#include "ramsey/validation.hpp"

/// Configuration files, data files and run manifests behind the command line.
namespace ramsey::cli {

namespace fs = std::filesystem;

std::string_view version();

enum ExitCode : int {
    ok = 0,
    validation_failed = 1,
    config_error = 2,
    solver_failure = 3,
    fit_failure = 4,
};

/// The "run" section of a config file. Unset fields fall back to per-command
/// defaults documented in docs/config.md.
struct RunSection {
    std::optional<double> t_max;
    std::optional<int> n_samples;
    double tol = 1e-10;
    protocol::Readout readout = protocol::Readout::shortcut;
    std::optional<double> transient_cut;
    // trajectories
    std::optional<double> dt;
    int n_trials = 200;
    std::uint64_t base_seed = 1;
    double hysteresis = 0.05;
    int record_stride = 1;
    std::optional<int> dump_trials;
    int crossing_stride = 1;
    // sweeps
    double efolds = 6.0;
    double max_window = 30.0;
    double periods = 8.0;
    int samples_per_period = 32;
    int threads = 0;
};

struct Config {
    ModelParams params;
    RunSection run;
    nlohmann::json raw;  ///< the document as read
};

/// Strict: unknown keys, wrong types and invalid values throw ConfigError.
Config parse_config(const nlohmann::json& doc);
Config load_config(const fs::path& path);

/// 17 significant digits; "nan" and "inf" for non-finite values.
std::string format_double(double value);

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header);
    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(std::optional<double> value);
    CsvWriter& operator<<(long long value);
    CsvWriter& operator<<(const std::string& value);
    void end_row();
    void close();

private:
    void separator();
    fs::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t column_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t file_checksum(const fs::path& path);

/// Collects output files and writes manifest.json next to them.
class Manifest {
public:
    Manifest(std::string command, const fs::path& output_dir);
    void set_config(const Config& config);
    void set(const std::string& key, nlohmann::json value);
    void add_file(const std::string& name);
    /// Writes manifest.json with wall time, exit status and file checksums.
    void write(int exit_code, const std::string& message = {});

private:
    std::string command_;
    fs::path dir_;
    nlohmann::json doc_;
    std::vector<std::string> files_;
    double start_;
};

int cmd_ramsey(const fs::path& config_path, const std::string& backend, const fs::path& output_dir,
               std::ostream& log);
/// Comma separated numbers; an empty list or a malformed entry throws ConfigError.
std::vector<double> parse_values(const std::string& text);

int cmd_sweep(const fs::path& config_path, const std::string& axis, const std::string& values,
              const std::string& backend, const fs::path& output_dir, std::ostream& log);
int cmd_trajectories(const fs::path& config_path, std::optional<int> n_trials,
                     std::optional<std::uint64_t> base_seed, const fs::path& output_dir,
                     std::ostream& log);
int cmd_validate(const fs::path& output_dir, std::ostream& log,
                 const validation::SuiteOptions& options = {});

}  // namespace ramsey::cli
