#pragma once

// Configuration loading, CSV and plot-script emission, and the run manifest.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seli/calibration.hpp"
#include "seli/errors.hpp"
#include "seli/model.hpp"
#include "seli/solver.hpp"

namespace seli {

inline constexpr const char* kToolVersion = "0.1.0";

struct LoadedConfig {
  ScenarioConfig config;
  std::vector<std::string> defaults_applied;  ///< omitted keys filled by defaults
};

namespace io_detail {

using json = nlohmann::json;

inline int line_of_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline int line_of_key(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

inline void reject_unknown_keys(const json& object,
                                const std::vector<std::string>& allowed,
                                const std::string& where,
                                const std::string& text) {
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParseError(line_of_key(text, key),
                       "unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T require(const json& object, const std::string& key, const std::string& where,
          const std::string& text) {
  if (!object.contains(key))
    throw ParseError(line_of_key(text, where),
                     "missing required key '" + key + "' in " + where);
  return object.at(key).get<T>();
}

// 64-bit FNV-1a over the file content, hex-encoded.
inline std::string fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

inline std::string fmt9(double v) {
  if (v == 0.0) v = 0.0;  // normalize -0
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

}  // namespace io_detail

/// One emitted artifact with its content digest.
struct EmittedFile {
  std::string path;    ///< relative to the output directory
  std::string digest;  ///< fnv1a64 of the bytes
};

inline EmittedFile write_text_file(const std::filesystem::path& out_dir,
                                   const std::string& name,
                                   const std::string& content) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path full = out_dir / name;
  std::ofstream os(full, std::ios::binary);
  if (!os) throw Error("cannot open " + full.string() + " for writing");
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw Error("failed writing " + full.string());
  return {name, io_detail::fnv1a64(content)};
}

inline nlohmann::json config_to_json(const ScenarioConfig& config) {
  nlohmann::json doc;
  doc["horizon"] = config.grid.horizon;
  doc["n_steps"] = config.grid.n_steps;
  doc["tolerance"] = config.tolerance;
  doc["max_iterations"] = config.max_iterations;
  doc["damping"] = config.damping;
  doc["initial_policy"] = config.initial_policy;
  doc["seed"] = config.seed;
  doc["output_dir"] = config.output_dir;
  doc["weights"] = config.network.weights;
  doc["classes"] = nlohmann::json::array();
  for (const NodeClassParams& c : config.network.classes) {
    nlohmann::json row;
    row["degree"] = c.degree;
    row["type_id"] = c.type_id;
    row["lambda"] = c.lambda;
    row["delta"] = c.delta;
    row["beta_E"] = c.beta_E;
    row["gamma_E"] = c.gamma_E;
    row["beta_L"] = c.beta_L;
    row["gamma_L"] = c.gamma_L;
    row["nu"] = c.nu;
    row["infection_cost"] = c.infection_cost;
    row["target_qoi"] = c.target_qoi;
    row["kappa"] = c.kappa;
    row["scaling_enabled"] = c.scaling_enabled;
    row["shift_target"] = c.shift_target;
    doc["classes"].push_back(row);
  }
  return doc;
}

namespace io_detail {

inline LoadedConfig extract_config(const json& doc, const std::string& text) {
  static const std::vector<std::string> top_keys = {
      "classes",        "weights",       "horizon",        "n_steps",
      "tolerance",      "max_iterations", "damping",       "initial_policy",
      "seed",           "output_dir"};
  static const std::vector<std::string> class_keys = {
      "degree",     "type_id", "lambda",         "delta",
      "beta_E",     "gamma_E", "beta_L",         "gamma_L",
      "nu",         "kappa",   "infection_cost", "target_qoi",
      "scaling_enabled", "shift_target"};

  reject_unknown_keys(doc, top_keys, "top level", text);

  LoadedConfig loaded;
  ScenarioConfig& config = loaded.config;
  auto note_default = [&](const std::string& key) {
    loaded.defaults_applied.push_back(key);
  };

  config.grid.horizon = require<double>(doc, "horizon", "top level", text);
  if (doc.contains("n_steps")) config.grid.n_steps = doc["n_steps"].get<int>();
  else note_default("n_steps");
  if (doc.contains("tolerance")) config.tolerance = doc["tolerance"].get<double>();
  else note_default("tolerance");
  if (doc.contains("max_iterations"))
    config.max_iterations = doc["max_iterations"].get<int>();
  else note_default("max_iterations");
  if (doc.contains("damping")) config.damping = doc["damping"].get<double>();
  else note_default("damping");
  if (doc.contains("initial_policy"))
    config.initial_policy = doc["initial_policy"].get<double>();
  else note_default("initial_policy");
  if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
  else note_default("seed");
  if (doc.contains("output_dir"))
    config.output_dir = doc["output_dir"].get<std::string>();
  else note_default("output_dir");

  config.network.weights =
      require<std::vector<double>>(doc, "weights", "top level", text);

  if (!doc.contains("classes") || !doc["classes"].is_array())
    throw ParseError(line_of_key(text, "classes"),
                     "missing or non-array 'classes'");
  int index = 0;
  for (const auto& row : doc["classes"]) {
    const std::string where = "classes[" + std::to_string(index) + "]";
    if (!row.is_object())
      throw ParseError(line_of_key(text, "classes"), where + " is not an object");
    reject_unknown_keys(row, class_keys, where, text);
    NodeClassParams c;
    c.degree = require<int>(row, "degree", where, text);
    if (row.contains("type_id")) c.type_id = row["type_id"].get<int>();
    c.lambda = require<double>(row, "lambda", where, text);
    c.delta = require<double>(row, "delta", where, text);
    c.beta_E = require<double>(row, "beta_E", where, text);
    c.gamma_E = row.contains("gamma_E") ? row["gamma_E"].get<double>()
                                        : 1.0 - c.beta_E;
    if (!row.contains("gamma_E")) note_default(where + ".gamma_E");
    c.beta_L = require<double>(row, "beta_L", where, text);
    c.gamma_L = row.contains("gamma_L") ? row["gamma_L"].get<double>()
                                        : 1.0 - c.beta_L;
    if (!row.contains("gamma_L")) note_default(where + ".gamma_L");
    if (row.contains("nu")) c.nu = row["nu"].get<double>();
    else note_default(where + ".nu");
    if (row.contains("kappa")) c.kappa = row["kappa"].get<double>();
    else note_default(where + ".kappa");
    c.infection_cost = require<double>(row, "infection_cost", where, text);
    c.target_qoi = require<double>(row, "target_qoi", where, text);
    if (row.contains("scaling_enabled"))
      c.scaling_enabled = row["scaling_enabled"].get<bool>();
    else note_default(where + ".scaling_enabled");
    if (row.contains("shift_target"))
      c.shift_target = row["shift_target"].get<bool>();
    else note_default(where + ".shift_target");
    config.network.classes.push_back(c);
    ++index;
  }

  config = validate(config);
  return loaded;
}

}  // namespace io_detail

/// Parses and validates a scenario file. Unknown keys are rejected; omitted
/// optional keys take defaults, which are recorded for the manifest.
inline LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::string text = buffer.str();

  io_detail::json doc;
  try {
    doc = io_detail::json::parse(text);
  } catch (const io_detail::json::parse_error& e) {
    throw ParseError(io_detail::line_of_offset(text, e.byte), e.what());
  }

  try {
    return io_detail::extract_config(doc, text);
  } catch (const io_detail::json::exception& e) {
    throw ParseError(0, e.what());  // wrong value type somewhere in the document
  }
}

namespace io_detail {

inline std::string mean_field_csv(const MeanFieldTrajectory& trajectory,
                                  const ControlPolicy& policy,
                                  const NetworkModel& net) {
  std::string out = "t,degree,type,m_S,m_E,m_L,m_I,alpha\n";
  for (int j = 0; j < trajectory.grid.n_points(); ++j) {
    const std::string t = fmt9(trajectory.grid.time_at(j));
    for (std::size_t c = 0; c < net.n_classes(); ++c) {
      const Occupancy& m = trajectory.states[j][c];
      out += t + ',' + std::to_string(net.classes[c].degree) + ',' +
             std::to_string(net.classes[c].type_id) + ',' + fmt9(m[0]) + ',' +
             fmt9(m[1]) + ',' + fmt9(m[2]) + ',' + fmt9(m[3]) + ',' +
             fmt9(policy.alpha[j][c]) + '\n';
    }
  }
  return out;
}

inline std::string aggregates_csv(const TimeGrid& grid,
                                  const AggregatePath& mfe,
                                  const AggregatePath& baseline) {
  std::string out = "t,variant,theta,eta\n";
  for (int j = 0; j < grid.n_points(); ++j) {
    const std::string t = fmt9(grid.time_at(j));
    out += t + ",mfe," + fmt9(mfe.theta[j]) + ',' + fmt9(mfe.eta[j]) + '\n';
    out += t + ",baseline," + fmt9(baseline.theta[j]) + ',' +
           fmt9(baseline.eta[j]) + '\n';
  }
  return out;
}

inline std::string qoi_csv(const TimeGrid& grid, const NetworkModel& net,
                           const std::vector<std::vector<double>>& qoi_mfe,
                           const std::vector<std::vector<double>>& qoi_base) {
  std::string out = "t,degree,type,qoi_mfe,qoi_baseline\n";
  for (int j = 0; j < grid.n_points(); ++j) {
    const std::string t = fmt9(grid.time_at(j));
    for (std::size_t c = 0; c < net.n_classes(); ++c)
      out += t + ',' + std::to_string(net.classes[c].degree) + ',' +
             std::to_string(net.classes[c].type_id) + ',' +
             fmt9(qoi_mfe[j][c]) + ',' + fmt9(qoi_base[j][c]) + '\n';
  }
  return out;
}

inline std::string optional_field(const std::optional<double>& v) {
  return v ? fmt9(*v) : std::string();
}

inline std::string summary_csv(const SummaryMetrics& summary) {
  std::string out =
      "scope,degree,type,infected_baseline,infected_mfe,"
      "infection_reduction_pct,qoi_baseline,qoi_mfe,qoi_ratio,qoi_gain,"
      "theta_baseline,theta_mfe,theta_reduction_pct\n";
  for (const ClassComparison& row : summary.per_class) {
    out += "class," + std::to_string(row.degree) + ',' +
           std::to_string(row.type_id) + ',' + fmt9(row.infected_baseline) +
           ',' + fmt9(row.infected_mfe) + ',' +
           optional_field(row.infection_reduction_pct) + ',' +
           fmt9(row.qoi_baseline) + ',' + fmt9(row.qoi_mfe) + ',' +
           optional_field(row.qoi_ratio) + ',' + optional_field(row.qoi_gain) +
           ",,,\n";
  }
  out += "network,,,,,,,,,," + fmt9(summary.theta_baseline) + ',' +
         fmt9(summary.theta_mfe) + ',' +
         optional_field(summary.theta_reduction_pct) + '\n';
  return out;
}

inline std::string gnuplot_script() {
  return R"(# Regenerates the figures from the CSV outputs in this directory.
set datafile separator ','
set key autotitle columnhead
set terminal pngcairo size 900,530
set grid

set output 'fig_acceptance.png'
set xlabel 't (s)'
set ylabel 'acceptance probability'
plot 'mean_field.csv' using (column(2)==1 ?column(1):1/0):8 with lines title 'k=1', \
     '' using (column(2)==10?column(1):1/0):8 with lines title 'k=10', \
     '' using (column(2)==15?column(1):1/0):8 with lines title 'k=15', \
     '' using (column(2)==20?column(1):1/0):8 with lines title 'k=20'

set output 'fig_infected.png'
set ylabel 'infected proportion'
plot 'mean_field.csv' using (column(2)==1 ?column(1):1/0):7 with lines title 'MFE k=1', \
     '' using (column(2)==10?column(1):1/0):7 with lines title 'MFE k=10', \
     '' using (column(2)==15?column(1):1/0):7 with lines title 'MFE k=15', \
     '' using (column(2)==20?column(1):1/0):7 with lines title 'MFE k=20', \
     'baseline_mean_field.csv' using (column(2)==1 ?column(1):1/0):7 with lines dashtype 2 title 'baseline k=1', \
     '' using (column(2)==10?column(1):1/0):7 with lines dashtype 2 title 'baseline k=10', \
     '' using (column(2)==15?column(1):1/0):7 with lines dashtype 2 title 'baseline k=15', \
     '' using (column(2)==20?column(1):1/0):7 with lines dashtype 2 title 'baseline k=20'

set output 'fig_theta.png'
set ylabel 'infected-link probability'
plot 'aggregates.csv' using (strcol(2) eq 'mfe'     ?column(1):1/0):3 with lines title 'MFE', \
     '' using (strcol(2) eq 'baseline'?column(1):1/0):3 with lines dashtype 2 title 'baseline'

set output 'fig_qoi.png'
set ylabel 'QoI'
plot 'qoi.csv' using (column(2)==15?column(1):1/0):4 with lines title 'MFE k=15', \
     '' using (column(2)==20?column(1):1/0):4 with lines title 'MFE k=20', \
     '' using (column(2)==15?column(1):1/0):5 with lines dashtype 2 title 'baseline k=15', \
     '' using (column(2)==20?column(1):1/0):5 with lines dashtype 2 title 'baseline k=20'
)";
}

}  // namespace io_detail

/// Serializes the solved equilibrium and the baseline into the CSV set plus
/// the gnuplot script that regenerates the figures.
inline std::vector<EmittedFile> emit_trajectories(
    const EquilibriumSolution& solution, const BaselineResult& baseline,
    const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  const NetworkModel& net = config.network;
  const ControlPolicy ones =
      ControlPolicy::constant(config.grid, net.n_classes(), 1.0);
  const auto qoi_mfe =
      expected_qoi_path(solution.aggregates, solution.policy, net);
  const SummaryMetrics summary = summary_metrics(solution, baseline, config);

  std::vector<EmittedFile> files;
  files.push_back(write_text_file(
      out_dir, "mean_field.csv",
      io_detail::mean_field_csv(solution.trajectory, solution.policy, net)));
  files.push_back(write_text_file(
      out_dir, "baseline_mean_field.csv",
      io_detail::mean_field_csv(baseline.trajectory, ones, net)));
  files.push_back(write_text_file(
      out_dir, "aggregates.csv",
      io_detail::aggregates_csv(config.grid, solution.aggregates,
                                baseline.aggregates)));
  files.push_back(write_text_file(
      out_dir, "qoi.csv",
      io_detail::qoi_csv(config.grid, net, qoi_mfe, baseline.qoi)));
  files.push_back(
      write_text_file(out_dir, "summary.csv", io_detail::summary_csv(summary)));
  files.push_back(
      write_text_file(out_dir, "plots.gp", io_detail::gnuplot_script()));
  return files;
}

/// Run manifest: resolved configuration, provenance, and emitted-file
/// digests. Re-running with an identical manifest reproduces byte-identical
/// CSV outputs.
struct RunManifest {
  ScenarioConfig config;
  std::vector<std::string> defaults_applied;
  std::vector<EmittedFile> files;
  std::optional<CalibrationResult> calibration;
  std::vector<std::string> notes;
};

inline EmittedFile write_manifest(const RunManifest& manifest,
                                  const std::filesystem::path& out_dir) {
  nlohmann::json doc;
  doc["tool_version"] = kToolVersion;
  doc["seed"] = manifest.config.seed;
  {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    doc["timestamp"] = buf;
  }
  doc["config"] = config_to_json(manifest.config);
  doc["defaults_applied"] = manifest.defaults_applied;
  doc["files"] = nlohmann::json::array();
  for (const EmittedFile& f : manifest.files)
    doc["files"].push_back({{"path", f.path}, {"digest", f.digest}});
  if (manifest.calibration) {
    doc["calibration"] = {
        {"nu", manifest.calibration->nu},
        {"per_class_error", manifest.calibration->per_class_error},
        {"sse", manifest.calibration->sse}};
  }
  doc["notes"] = manifest.notes;
  return write_text_file(out_dir, "manifest.json", doc.dump(2) + "\n");
}

}  // namespace seli
