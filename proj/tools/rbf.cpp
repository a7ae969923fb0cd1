#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "rbf/harness.hpp"

namespace h = rbf::harness;

namespace {

struct Flags {
  std::map<std::string, std::string> params;
  std::string trials;
  std::string seed;
  std::string format;
  std::string output;
  std::string config;
  bool timing = false;
};

std::uint64_t parse_count(const std::string& text, const char* what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw h::ConfigError(std::string(what) + ": expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

std::string describe(const h::ParamSpec& spec) {
  std::string text = spec.help + " [default " + spec.default_value + "]";
  if (spec.type == h::ParamType::choice) {
    text += " {";
    for (std::size_t i = 0; i < spec.choices.size(); ++i) text += (i ? "," : "") + spec.choices[i];
    text += "}";
  }
  return text + "; comma-separated values scan a grid";
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--trials", f.trials, "number of trials per grid point");
  sub->add_option("--seed", f.seed, "master seed [default 0]");
  sub->add_option("--format", f.format, "csv or json (JSON lines) [default csv]");
  sub->add_option("--output,-o", f.output, "output file [default stdout]");
  sub->add_option("--config", f.config, "JSON config file with the same keys as the flags");
  sub->add_flag("--timing", f.timing, "add an elapsed_ms column (output is then not reproducible)");
}

h::ExperimentConfig build_config(const std::string& name, CLI::App* sub, const Flags& f) {
  h::ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw h::ConfigError("cannot read config file " + f.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw h::ConfigError("config file " + f.config + ": " + e.what());
    }
    cfg = h::config_from_json(j, name == "run" ? std::string() : name);
  } else if (name == "run") {
    throw h::ConfigError("run needs --config");
  } else {
    cfg.experiment = h::parse_experiment(name);
  }
  for (const auto& [key, value] : f.params) {
    if (sub->count("--" + key) > 0) cfg.parameters[key] = h::split_grid(value);
  }
  if (sub->count("--trials") > 0) cfg.trials = parse_count(f.trials, "trials");
  if (sub->count("--seed") > 0) cfg.master_seed = parse_count(f.seed, "seed");
  if (sub->count("--format") > 0) {
    if (f.format != "csv" && f.format != "json") throw h::ConfigError("format must be csv or json");
    cfg.format = f.format == "csv" ? h::OutputFormat::csv : h::OutputFormat::json;
  }
  if (sub->count("--output") > 0) cfg.output = f.output;
  if (f.timing) cfg.timing = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloom filter security and privacy experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", h::build_id());

  std::map<std::string, Flags> flags;
  std::map<std::string, CLI::App*> subs;
  for (h::Experiment e : h::all_experiments()) {
    const std::string name = h::to_string(e);
    Flags& f = flags[name];
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    for (const auto& spec : h::parameter_specs(e)) {
      sub->add_option("--" + spec.name, f.params[spec.name], describe(spec));
    }
    add_common(sub, f);
    subs[name] = sub;
  }
  {
    Flags& f = flags["run"];
    CLI::App* sub = app.add_subcommand("run", "run the experiment named in a JSON config file");
    add_common(sub, f);
    sub->get_option("--config")->required();
    subs["run"] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    h::ExperimentConfig cfg;
    try {
      cfg = build_config(name, sub, flags[name]);
    } catch (const h::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 1;
    }
    return h::run(std::move(cfg), std::cout, std::cerr);
  }
  return 1;
}
