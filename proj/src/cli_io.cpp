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

#include "ramsey/cli_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <iterator>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "ramsey/semiclassical.hpp"
#include "ramsey/trajectories.hpp"

#ifndef RAMSEY_VERSION
#define RAMSEY_VERSION "0.0.0"
#endif

namespace ramsey::cli {

namespace {

using nlohmann::json;

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

double number(const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
    return v.get<double>();
}

long long integer(const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError("'" + key + "' must be an integer");
}

int bounded_int(const json& obj, const std::string& key, long long lo) {
    const long long v = integer(obj, key);
    if (v < lo || v > std::numeric_limits<int>::max())
        throw ConfigError("'" + key + "' must be >= " + std::to_string(lo));
    return int(v);
}

double positive(const json& obj, const std::string& key) {
    const double v = number(obj, key);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("'" + key + "' must be finite and > 0");
    return v;
}

double time_value(const json& obj, const std::string& key) {
    const json& v = obj.at(key);
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
        if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw ConfigError("'" + key + "' must be a number or \"inf\"");
    }
    return number(obj, key);
}

RunSection parse_run(const json& run) {
    if (!run.is_object()) throw ConfigError("'run' must be an object");
    require_keys(run,
                 {"t_max", "n_samples", "tol", "readout", "transient_cut", "dt", "n_trials", "base_seed",
                  "hysteresis", "record_stride", "dump_trials", "crossing_stride", "efolds", "max_window",
                  "periods", "samples_per_period", "threads"},
                 "run");
    RunSection r;
    if (run.contains("t_max")) r.t_max = positive(run, "t_max");
    if (run.contains("n_samples")) r.n_samples = bounded_int(run, "n_samples", 8);
    if (run.contains("tol")) r.tol = positive(run, "tol");
    if (run.contains("readout")) {
        const json& v = run.at("readout");
        if (v == "shortcut")
            r.readout = protocol::Readout::shortcut;
        else if (v == "second_pulse")
            r.readout = protocol::Readout::second_pulse;
        else
            throw ConfigError("'readout' must be \"shortcut\" or \"second_pulse\"");
    }
    if (run.contains("transient_cut")) {
        const double c = number(run, "transient_cut");
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("'transient_cut' must be >= 0");
        r.transient_cut = c;
    }
    if (run.contains("dt")) r.dt = positive(run, "dt");
    if (run.contains("n_trials")) r.n_trials = bounded_int(run, "n_trials", 1);
    if (run.contains("base_seed")) {
        const json& v = run.at("base_seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("'base_seed' must be a non-negative integer");
        r.base_seed = v.get<std::uint64_t>();
    }
    if (run.contains("hysteresis")) {
        r.hysteresis = number(run, "hysteresis");
        if (!(r.hysteresis >= 0.0 && r.hysteresis < 1.0)) throw ConfigError("'hysteresis' must be in [0, 1)");
    }
    if (run.contains("record_stride")) r.record_stride = bounded_int(run, "record_stride", 1);
    if (run.contains("dump_trials")) r.dump_trials = bounded_int(run, "dump_trials", 0);
    if (run.contains("crossing_stride")) r.crossing_stride = bounded_int(run, "crossing_stride", 1);
    if (run.contains("efolds")) r.efolds = positive(run, "efolds");
    if (run.contains("max_window")) r.max_window = positive(run, "max_window");
    if (run.contains("periods")) r.periods = positive(run, "periods");
    if (run.contains("samples_per_period")) r.samples_per_period = bounded_int(run, "samples_per_period", 4);
    if (run.contains("threads")) r.threads = bounded_int(run, "threads", 0);
    return r;
}

fs::path prepare_output(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    return dir;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string utc_timestamp() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json rates_json(const ModelParams& p) {
    const Rates r = derive_rates(p);
    return {{"gamma_c", r.gamma_c}, {"gamma_s", r.gamma_s}, {"gamma_t", r.gamma_t}};
}

json params_json(const ModelParams& p) {
    json j = {{"n_atoms", p.n_atoms}, {"delta_nu", p.delta_nu}, {"t1", p.t1},
              {"t2", std::isinf(p.t2) ? json("inf") : json(p.t2)}, {"w", p.w},
              {"cooperativity", p.cooperativity}};
    if (p.g) j["g"] = *p.g;
    if (p.kappa) j["kappa"] = *p.kappa;
    if (p.n_photon_max) j["n_photon_max"] = *p.n_photon_max;
    return j;
}

int report_error(std::ostream& log, const char* kind, const std::exception& e, int code) {
    log << "error (" << kind << "): " << e.what() << "\n";
    return code;
}

protocol::SweepOptions sweep_options(const RunSection& run, protocol::Backend backend) {
    protocol::SweepOptions o;
    o.backend = backend;
    o.tol = run.tol;
    o.transient_cut = run.transient_cut;
    o.efolds = run.efolds;
    o.max_window = run.max_window;
    o.periods = run.periods;
    o.samples_per_period = run.samples_per_period;
    o.threads = run.threads;
    return o;
}

json fit_json(const protocol::FitResult& f) {
    return {{"amplitude", f.amplitude},       {"lambda", f.lambda},
            {"lambda_stderr", f.lambda_stderr}, {"delta_nu_fit", f.delta_nu_fit},
            {"phase", f.phase},               {"rms_residual", f.rms_residual},
            {"transient_cut", f.transient_cut}, {"extrema_used", f.extrema_used},
            {"converged", f.converged}};
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string_view version() { return RAMSEY_VERSION; }

Config parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(doc,
                 {"n_atoms", "delta_nu", "t1", "t2", "w", "cooperativity", "g", "kappa", "n_photon_max", "run"},
                 "config");
    Config c;
    c.raw = doc;
    ModelParams& p = c.params;
    if (!doc.contains("n_atoms")) throw ConfigError("'n_atoms' is required");
    p.n_atoms = bounded_int(doc, "n_atoms", 1);
    if (doc.contains("delta_nu")) p.delta_nu = number(doc, "delta_nu");
    if (doc.contains("t1")) p.t1 = time_value(doc, "t1");
    if (doc.contains("t2")) p.t2 = time_value(doc, "t2");
    if (doc.contains("w")) p.w = number(doc, "w");
    if (doc.contains("cooperativity")) p.cooperativity = number(doc, "cooperativity");
    if (doc.contains("g")) p.g = number(doc, "g");
    if (doc.contains("kappa")) p.kappa = number(doc, "kappa");
    if (doc.contains("n_photon_max")) p.n_photon_max = bounded_int(doc, "n_photon_max", 1);
    p.validate();
    if (doc.contains("run")) c.run = parse_run(doc.at("run"));
    return c;
}

Config load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return parse_config(doc);
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

CsvWriter::CsvWriter(const fs::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    for (const auto& h : header) *this << h;
    end_row();
}

void CsvWriter::separator() {
    if (column_ > 0) out_ << ',';
    ++column_;
}

CsvWriter& CsvWriter::operator<<(double value) {
    separator();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::optional<double> value) {
    separator();
    if (value) out_ << format_double(*value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value) {
    separator();
    if (value.find_first_of(",\"\n") == std::string::npos) {
        out_ << value;
    } else {
        out_ << '"';
        for (char ch : value) {
            if (ch == '"') out_ << '"';
            out_ << (ch == '\n' ? ' ' : ch);
        }
        out_ << '"';
    }
    return *this;
}

void CsvWriter::end_row() {
    if (column_ != columns_) throw std::logic_error("CSV row width mismatch in " + path_.string());
    out_ << '\n';
    column_ = 0;
}

void CsvWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("cannot write " + path_.string());
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

Manifest::Manifest(std::string command, const fs::path& output_dir)
    : command_(std::move(command)), dir_(output_dir), start_(now_seconds()) {
    doc_["command"] = command_;
    doc_["version"] = std::string(version());
    doc_["started_utc"] = utc_timestamp();
}

void Manifest::set_config(const Config& config) {
    doc_["config"] = config.raw;
    doc_["params"] = params_json(config.params);
    doc_["rates"] = rates_json(config.params);
}

void Manifest::set(const std::string& key, json value) { doc_[key] = std::move(value); }

void Manifest::add_file(const std::string& name) { files_.push_back(name); }

void Manifest::write(int exit_code, const std::string& message) {
    doc_["wall_seconds"] = now_seconds() - start_;
    doc_["exit_code"] = exit_code;
    if (!message.empty()) doc_["message"] = message;
    json files = json::array();
    for (const auto& name : files_) {
        const fs::path p = dir_ / name;
        files.push_back({{"name", name},
                         {"bytes", fs::file_size(p)},
                         {"fnv1a64", hex64(file_checksum(p))}});
    }
    doc_["files"] = files;
    write_json(dir_ / "manifest.json", doc_);
}

int cmd_ramsey(const fs::path& config_path, const std::string& backend_name, const fs::path& output_dir,
               std::ostream& log) {
    Manifest m("ramsey", output_dir);
    Config cfg;
    protocol::Backend backend;
    try {
        cfg = load_config(config_path);
        backend = protocol::parse_backend(backend_name);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    const ModelParams& p = cfg.params;
    const RunSection& run = cfg.run;

    protocol::FringeSeries series;
    double cut = 0.0;
    double t_max = 0.0;
    int n_samples = 0;
    try {
        const protocol::RunPlan plan = protocol::plan_run(p, sweep_options(run, backend));
        cut = plan.transient_cut;
        t_max = run.t_max.value_or(plan.t_max);
        const double cycles = t_max * std::abs(p.delta_nu) / (2.0 * M_PI);
        n_samples =
            run.n_samples.value_or(std::max(200, int(std::ceil(cycles * run.samples_per_period))));
        protocol::RunOptions ro;
        ro.readout = run.readout;
        ro.tol = run.tol;
        ro.dt = run.dt.value_or(0.0);
        ro.n_trials = run.n_trials;
        ro.base_seed = run.base_seed;
        ro.record_expectations = true;
        series = protocol::run_ramsey(p, backend, t_max, n_samples, ro);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    } catch (const std::exception& e) {
        try {
            prepare_output(output_dir);
            m.set_config(cfg);
            m.set("backend", protocol::to_string(backend));
            m.write(solver_failure, e.what());
        } catch (const std::exception&) {
        }
        return report_error(log, "solver", e, solver_failure);
    }

    std::optional<protocol::FitResult> fit;
    std::string fit_error;
    try {
        fit = protocol::fit_fringe(series, cut);
        if (!fit->converged) fit_error = "fit did not converge";
    } catch (const protocol::FitError& e) {
        fit_error = e.what();
    }

    try {
        prepare_output(output_dir);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    m.set_config(cfg);
    m.set("backend", protocol::to_string(backend));
    m.set("base_seed", run.base_seed);
    m.set("t_max", t_max);
    m.set("n_samples", n_samples);
    {
        CsvWriter csv(output_dir / "fringe.csv", {"t", "signal"});
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            csv << series.times[i] << series.signal[i];
            csv.end_row();
        }
        csv.close();
        m.add_file("fringe.csv");
    }
    {
        CsvWriter csv(output_dir / "expectations.csv", {"t", "sigma_z", "sigma_plus_sigma_minus_cross", "alpha_abs"});
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            csv << series.times[i] << series.sz[i] << series.spsm[i] << series.alpha_abs[i];
            csv.end_row();
        }
        csv.close();
        m.add_file("expectations.csv");
    }
    if (fit) {
        json doc = fit_json(*fit);
        doc["backend"] = protocol::to_string(backend);
        doc["rates"] = rates_json(p);
        doc["lambda_over_gamma_s"] = fit->lambda / derive_rates(p).gamma_s;
        if (p.n_atoms >= 2) {
            try {
                doc["lambda_semiclassical"] = semiclassical::lambda_semiclassical(p);
            } catch (const std::exception&) {
                doc["lambda_semiclassical"] = nullptr;
            }
        }
        const RegimeReport reg = validate_regime(p);
        doc["regime"] = {{"bad_cavity", reg.bad_cavity},
                         {"synchronizing", reg.synchronizing},
                         {"w_over_gamma_s", reg.w_over_gamma_s},
                         {"gamma_s_over_gamma_c", reg.gamma_s_over_gamma_c}};
        write_json(output_dir / "fit.json", doc);
        m.add_file("fit.json");
    }
    const int code = fit_error.empty() ? ok : fit_failure;
    m.write(code, fit_error);
    if (code == fit_failure) {
        log << "error (fit): " << fit_error << "\n";
        return code;
    }
    log << "lambda " << format_double(fit->lambda) << " +- " << format_double(fit->lambda_stderr)
        << " (gamma_s " << format_double(derive_rates(p).gamma_s) << ")\n";
    return ok;
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty entry in value list '" + text + "'");
        item = item.substr(b, e - b + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || !std::isfinite(v)) throw ConfigError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("sweep needs at least one value");
    return out;
}

int cmd_sweep(const fs::path& config_path, const std::string& axis_name, const std::string& value_list,
              const std::string& backend_name, const fs::path& output_dir, std::ostream& log) {
    Manifest m("sweep", output_dir);
    Config cfg;
    protocol::Backend backend;
    protocol::SweepAxis axis;
    std::vector<double> values;
    try {
        cfg = load_config(config_path);
        backend = protocol::parse_backend(backend_name);
        axis = protocol::parse_sweep_axis(axis_name);
        values = parse_values(value_list);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }

    std::vector<protocol::SweepRow> rows;
    try {
        rows = protocol::sweep_lambda(cfg.params, axis, values, sweep_options(cfg.run, backend));
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    for (const auto& row : rows)
        if (row.failure == protocol::FailureKind::config) {
            log << "error (config): value " << format_double(row.value) << ": " << row.error << "\n";
            return config_error;
        }
    try {
        prepare_output(output_dir);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }

    m.set_config(cfg);
    m.set("backend", protocol::to_string(backend));
    m.set("axis", axis == protocol::SweepAxis::repump ? "w" : "n_atoms");
    m.set("values", values);
    {
        CsvWriter csv(output_dir / "sweep.csv",
                      {"value", "ok", "lambda_master", "lambda_stderr", "lambda_semiclassical", "gamma_s",
                       "gamma_c", "lambda_over_gamma_s", "delta_nu_used", "t_max_used", "transient_cut",
                       "amplitude", "rms_residual", "extrema_used", "error"});
        for (const auto& r : rows) {
            csv << r.value << (long long)(r.ok ? 1 : 0);
            if (r.ok) {
                csv << r.lambda_master << r.lambda_stderr;
            } else {
                csv << std::optional<double>{} << std::optional<double>{};
            }
            csv << r.lambda_semiclassical << r.gamma_s << r.gamma_c;
            csv << (r.ok ? std::optional<double>(r.lambda_master / r.gamma_s) : std::nullopt);
            csv << r.delta_nu_used << r.t_max_used << r.fit.transient_cut << r.fit.amplitude
                << r.fit.rms_residual << (long long)r.fit.extrema_used << r.error;
            csv.end_row();
        }
        csv.close();
        m.add_file("sweep.csv");
    }
    {
        CsvWriter csv(output_dir / "semiclassical.csv",
                      {"value", "lambda_semiclassical", "sz_ss", "spsm_ss", "gamma_t"});
        for (const auto& r : rows) {
            ModelParams p = cfg.params;
            if (axis == protocol::SweepAxis::repump)
                p.w = r.value;
            else
                p.n_atoms = int(r.value);
            csv << r.value << r.lambda_semiclassical << r.sz_ss << r.spsm_ss << derive_rates(p).gamma_t;
            csv.end_row();
        }
        csv.close();
        m.add_file("semiclassical.csv");
    }
    int code = ok;
    std::string message;
    for (const auto& r : rows) {
        if (r.failure == protocol::FailureKind::solver) {
            code = solver_failure;
            message = r.error;
            break;
        }
        if (r.failure == protocol::FailureKind::fit && code == ok) {
            code = fit_failure;
            message = r.error;
        }
    }
    m.write(code, message);
    for (const auto& r : rows) {
        log << format_double(r.value) << ": ";
        if (r.ok)
            log << "lambda " << format_double(r.lambda_master) << "\n";
        else
            log << "failed: " << r.error << "\n";
    }
    return code;
}

int cmd_trajectories(const fs::path& config_path, std::optional<int> n_trials,
                     std::optional<std::uint64_t> base_seed, const fs::path& output_dir, std::ostream& log) {
    Manifest m("trajectories", output_dir);
    Config cfg;
    try {
        cfg = load_config(config_path);
        if (n_trials && *n_trials < 1) throw ConfigError("n_trials must be >= 1");
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    const ModelParams& p = cfg.params;
    const RunSection& run = cfg.run;
    const int trials = n_trials.value_or(run.n_trials);
    const std::uint64_t seed = base_seed.value_or(run.base_seed);
    const double t_max = run.t_max.value_or(10.0 * p.t1);

    std::vector<trajectories::TrajectoryRecord> records;
    double dt = 0.0;
    try {
        dt = run.dt.value_or(trajectories::max_dt(p));
        trajectories::TrajectoryOptions topt;
        topt.record_stride = run.record_stride;
        topt.hysteresis = run.hysteresis;
        records = trajectories::ensemble_run(p, t_max, dt, trials, seed, topt, run.threads);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    } catch (const std::exception& e) {
        try {
            prepare_output(output_dir);
            m.set_config(cfg);
            m.set("base_seed", seed);
            m.set("n_trials", trials);
            m.set("dt", dt);
            m.write(solver_failure, e.what());
        } catch (const std::exception&) {
        }
        return report_error(log, "solver", e, solver_failure);
    }

    int succeeded = 0;
    for (const auto& r : records) succeeded += r.failed ? 0 : 1;
    const auto indices = trajectories::common_crossing_indices(records, 0.9, run.crossing_stride);
    const auto report = trajectories::crossing_statistics(records, indices, p.delta_nu);
    const auto mean = trajectories::ensemble_mean(records);

    try {
        prepare_output(output_dir);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    m.set_config(cfg);
    m.set("base_seed", seed);
    m.set("n_trials", trials);
    m.set("dt", dt);
    m.set("t_max", t_max);

    const int dump = std::min(trials, run.dump_trials.value_or(trials));
    fs::create_directories(output_dir / "trials");
    for (int i = 0; i < dump; ++i) {
        const auto& r = records[std::size_t(i)];
        if (r.failed) continue;
        const std::string name = "trials/trial_" + std::to_string(r.seed) + ".csv";
        CsvWriter csv(output_dir / name, {"t", "conditional_signal"});
        for (std::size_t k = 0; k < r.times.size(); ++k) {
            csv << r.times[k] << r.conditional_signal[k];
            csv.end_row();
        }
        csv.close();
        m.add_file(name);
    }
    {
        CsvWriter csv(output_dir / "crossings.csv",
                      {"crossing_index", "mean_time", "variance", "count", "phase_variance", "skewness",
                       "excess_kurtosis", "gaussian_at_1pct", "low_confidence"});
        for (const auto& s : report.rows) {
            csv << (long long)s.crossing_index << s.mean_time << s.variance << (long long)s.trial_count
                << p.delta_nu * p.delta_nu * s.variance << s.skewness << s.excess_kurtosis
                << (long long)(s.gaussian_at_1pct ? 1 : 0) << (long long)(s.low_confidence ? 1 : 0);
            csv.end_row();
        }
        csv.close();
        m.add_file("crossings.csv");
    }
    {
        CsvWriter csv(output_dir / "ensemble.csv", {"t", "signal", "signal_stderr", "sigma_z", "sigma_z_stderr"});
        for (std::size_t k = 0; k < mean.times.size(); ++k) {
            csv << mean.times[k] << mean.signal[k] << mean.signal_stderr[k] << mean.sz[k] << mean.sz_stderr[k];
            csv.end_row();
        }
        csv.close();
        m.add_file("ensemble.csv");
    }
    {
        const Rates rates = derive_rates(p);
        long total_jumps = 0;
        for (const auto& r : records) total_jumps += r.jumps;
        const auto& d = report.diffusion;
        json doc = {{"slope", d.slope},
                    {"slope_stderr", d.slope_stderr},
                    {"intercept", d.intercept},
                    {"points", d.points},
                    {"gamma_c", rates.gamma_c},
                    {"slope_over_gamma_c", rates.gamma_c > 0.0 ? json(d.slope / rates.gamma_c) : json(nullptr)},
                    {"excluded_trials", report.excluded},
                    {"failed_trials", trials - succeeded},
                    {"total_jumps", total_jumps},
                    {"units", "variance of delta_nu * crossing time, against mean crossing time"}};
        write_json(output_dir / "diffusion.json", doc);
        m.add_file("diffusion.json");
    }
    m.write(ok);
    log << succeeded << " trajectories, " << report.rows.size() << " crossings analysed, slope "
        << format_double(report.diffusion.slope) << " +- " << format_double(report.diffusion.slope_stderr)
        << "\n";
    return ok;
}

int cmd_validate(const fs::path& output_dir, std::ostream& log, const validation::SuiteOptions& options) {
    try {
        prepare_output(output_dir);
    } catch (const ConfigError& e) {
        return report_error(log, "config", e, config_error);
    }
    Manifest m("validate", output_dir);
    const validation::Report report = validation::run_suite(options);
    json checks = json::array();
    {
        CsvWriter csv(output_dir / "validation.csv",
                      {"check", "passed", "max_deviation", "tolerance", "detail"});
        for (const auto& c : report.checks) {
            csv << c.name << (long long)(c.passed ? 1 : 0) << c.max_deviation << c.tolerance << c.detail;
            csv.end_row();
            checks.push_back({{"name", c.name},
                              {"passed", c.passed},
                              {"max_deviation", c.max_deviation},
                              {"tolerance", c.tolerance},
                              {"detail", c.detail},
                              {"seconds", c.seconds}});
            log << (c.passed ? "PASS " : "FAIL ") << c.name << "  max deviation "
                << format_double(c.max_deviation) << " (tolerance " << format_double(c.tolerance) << ")  "
                << c.detail << "\n";
        }
        csv.close();
        m.add_file("validation.csv");
    }
    write_json(output_dir / "validation.json", {{"passed", report.passed()}, {"checks", checks}});
    m.add_file("validation.json");
    const int code = report.passed() ? ok : validation_failed;
    m.write(code);
    return code;
}

}  // namespace ramsey::cli
