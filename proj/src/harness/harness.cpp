#include "rbf/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "experiments.hpp"
#include "rbf/common.hpp"
#include "rbf/format.hpp"

#ifndef RBF_BUILD_ID
#define RBF_BUILD_ID "unknown"
#endif

namespace rbf::harness {

using detail::definition;

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = {
      Experiment::fpr_estimate,      Experiment::privacy_audit,   Experiment::bp_attack,     Experiment::ab_game,
      Experiment::filic_distinguish, Experiment::saturation_scan, Experiment::error_analysis,
  };
  return all;
}

std::string to_string(Experiment e) { return definition(e).name; }

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : all_experiments()) {
    if (definition(e).name == name) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

const std::vector<ParamSpec>& parameter_specs(Experiment e) { return definition(e).params; }
std::uint64_t default_trials(Experiment e) { return definition(e).default_trials; }
const std::vector<std::string>& metric_names(Experiment e) { return definition(e).metrics; }

std::string build_id() { return RBF_BUILD_ID; }

std::vector<std::string> split_grid(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    std::string item = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("empty item in grid '" + text + "'");
    out.push_back(item.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(what + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

std::string normalize(const ParamSpec& spec, const std::string& raw) {
  switch (spec.type) {
    case ParamType::integer:
      return std::to_string(parse_u64(raw, spec.name));
    case ParamType::real: {
      double v = 0.0;
      const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (raw.empty() || res.ec != std::errc() || res.ptr != raw.data() + raw.size() || !std::isfinite(v)) {
        throw ConfigError(spec.name + ": expected a finite number, got '" + raw + "'");
      }
      char buf[64];
      const auto out = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, out.ptr);
    }
    case ParamType::choice:
      for (const auto& c : spec.choices) {
        if (c == raw) return raw;
      }
      throw ConfigError(spec.name + ": '" + raw + "' is not one of the allowed values");
  }
  return raw;
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ConfigError(key + ": expected a string or number");
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& experiment) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::string name = experiment;
  if (j.contains("experiment")) {
    const std::string in_file = json_scalar(j.at("experiment"), "experiment");
    if (!name.empty() && name != in_file) {
      throw ConfigError("config is for '" + in_file + "', not '" + name + "'");
    }
    name = in_file;
  }
  if (name.empty()) throw ConfigError("config does not name an experiment");
  ExperimentConfig cfg;
  cfg.experiment = parse_experiment(name);
  const auto& specs = parameter_specs(cfg.experiment);
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") continue;
    if (key == "trials") {
      cfg.trials = parse_u64(json_scalar(value, key), key);
    } else if (key == "seed") {
      cfg.master_seed = parse_u64(json_scalar(value, key), key);
    } else if (key == "output") {
      cfg.output = json_scalar(value, key);
    } else if (key == "format") {
      const std::string f = json_scalar(value, key);
      if (f != "csv" && f != "json") throw ConfigError("format must be csv or json");
      cfg.format = f == "csv" ? OutputFormat::csv : OutputFormat::json;
    } else if (key == "timing") {
      if (!value.is_boolean()) throw ConfigError("timing must be a boolean");
      cfg.timing = value.get<bool>();
    } else {
      const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == key; });
      if (!known) throw ConfigError("unknown key '" + key + "' for " + name);
      std::vector<std::string> grid;
      if (value.is_array()) {
        for (const auto& item : value) grid.push_back(json_scalar(item, key));
      } else if (value.is_string()) {
        grid = split_grid(value.get<std::string>());
      } else {
        grid.push_back(json_scalar(value, key));
      }
      cfg.parameters[key] = std::move(grid);
    }
  }
  return cfg;
}

void validate(ExperimentConfig& cfg) {
  const auto& specs = parameter_specs(cfg.experiment);
  for (const auto& [key, values] : cfg.parameters) {
    const auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == key; });
    if (it == specs.end()) throw ConfigError("unknown parameter '" + key + "' for " + to_string(cfg.experiment));
    for (auto& v : cfg.parameters[key]) v = normalize(*it, v);
  }
  if (!cfg.trials) cfg.trials = default_trials(cfg.experiment);
  if (*cfg.trials == 0) throw ConfigError("trials must be >= 1");
}

std::vector<std::string> columns(const ExperimentConfig& cfg) {
  std::vector<std::string> cols = {"experiment"};
  for (const auto& spec : parameter_specs(cfg.experiment)) cols.push_back(spec.name);
  cols.push_back("trials");
  cols.push_back("seed");
  for (const auto& m : metric_names(cfg.experiment)) cols.push_back(m);
  cols.push_back("failed");
  cols.push_back("error");
  cols.push_back("build");
  if (cfg.timing) cols.push_back("elapsed_ms");
  return cols;
}

std::vector<Record> run_scan(const ExperimentConfig& cfg) {
  const auto& def = definition(cfg.experiment);
  std::vector<std::vector<std::string>> axes;
  for (const auto& spec : def.params) {
    const auto it = cfg.parameters.find(spec.name);
    axes.push_back(it == cfg.parameters.end() ? std::vector<std::string>{normalize(spec, spec.default_value)}
                                              : it->second);
  }
  std::uint64_t total = 1;
  for (const auto& axis : axes) total *= axis.size();

  const std::uint64_t trials = cfg.trials.value_or(def.default_trials);
  std::vector<Record> records;
  records.reserve(total);
  for (std::uint64_t index = 0; index < total; ++index) {
    // Mixed-radix decode, first parameter outermost.
    std::map<std::string, std::string> values;
    std::uint64_t rest = index;
    for (std::size_t a = axes.size(); a-- > 0;) {
      values[def.params[a].name] = axes[a][rest % axes[a].size()];
      rest /= axes[a].size();
    }
    Record rec;
    rec.fields.emplace_back("experiment", def.name);
    for (const auto& spec : def.params) rec.fields.emplace_back(spec.name, values.at(spec.name));
    rec.fields.emplace_back("trials", static_cast<std::int64_t>(trials));
    rec.fields.emplace_back("seed", std::to_string(cfg.master_seed));

    const auto start = std::chrono::steady_clock::now();
    std::string error;
    std::vector<Value> metrics;
    try {
      metrics = def.runner(detail::Point(values), trials, derive_seed(cfg.master_seed, tag_of(def.name), index));
    } catch (const std::exception& e) {
      error = e.what();
    }
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    rec.failed = !error.empty();
    for (std::size_t i = 0; i < def.metrics.size(); ++i) {
      rec.fields.emplace_back(def.metrics[i], rec.failed ? Value{std::string()} : metrics.at(i));
    }
    rec.fields.emplace_back("failed", static_cast<std::int64_t>(rec.failed));
    rec.fields.emplace_back("error", error);
    rec.fields.emplace_back("build", build_id());
    if (cfg.timing) rec.fields.emplace_back("elapsed_ms", elapsed.count());
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

std::string csv_cell(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  const auto& s = std::get<std::string>(v);
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_cell(const Value& v, bool numeric_column_failed) {
  if (numeric_column_failed) return "null";
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return nlohmann::json(std::get<std::string>(v)).dump();
}

}  // namespace

void write_records(const ExperimentConfig& cfg, const std::vector<Record>& records, std::ostream& out) {
  const auto& metrics = metric_names(cfg.experiment);
  const auto is_metric = [&](const std::string& name) {
    return std::find(metrics.begin(), metrics.end(), name) != metrics.end();
  };
  if (cfg.format == OutputFormat::csv) {
    const auto cols = columns(cfg);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& rec : records) {
      for (std::size_t i = 0; i < rec.fields.size(); ++i) out << (i ? "," : "") << csv_cell(rec.fields[i].second);
      out << '\n';
    }
    return;
  }
  for (const auto& rec : records) {
    out << '{';
    for (std::size_t i = 0; i < rec.fields.size(); ++i) {
      const auto& [name, value] = rec.fields[i];
      out << (i ? "," : "") << nlohmann::json(name).dump() << ':'
          << json_cell(value, rec.failed && is_metric(name));
    }
    out << "}\n";
  }
}

int run(ExperimentConfig cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 1;
  }
  const auto records = run_scan(cfg);
  bool failed = false;
  for (const auto& rec : records) {
    if (rec.failed) {
      failed = true;
      for (const auto& [name, value] : rec.fields) {
        if (name == "error") err << "record failed: " << std::get<std::string>(value) << '\n';
      }
    }
  }
  if (cfg.output.empty()) {
    write_records(cfg, records, out);
    out.flush();
    if (!out) {
      err << "failed to write output\n";
      return 2;
    }
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    if (!file) {
      err << "cannot open output file " << cfg.output << '\n';
      return 2;
    }
    write_records(cfg, records, file);
    if (!file.flush()) {
      err << "failed to write " << cfg.output << '\n';
      return 2;
    }
  }
  return failed ? 2 : 0;
}

}  // namespace rbf::harness
