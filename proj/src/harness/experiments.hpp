#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rbf/harness.hpp"

namespace rbf::harness::detail {

/// One grid point: every parameter of the experiment with a normalized value.
class Point {
 public:
  explicit Point(std::map<std::string, std::string> values) : values_(std::move(values)) {}

  const std::string& text(const std::string& name) const { return values_.at(name); }
  std::uint64_t u64(const std::string& name) const;
  std::uint32_t u32(const std::string& name) const;
  double real(const std::string& name) const;

 private:
  std::map<std::string, std::string> values_;
};

using Runner = std::vector<Value> (*)(const Point& point, std::uint64_t trials, std::uint64_t seed);

struct ExperimentDef {
  Experiment id;
  std::string name;
  std::vector<ParamSpec> params;
  std::uint64_t default_trials;
  std::vector<std::string> metrics;
  Runner runner;
};

const ExperimentDef& definition(Experiment e);

}  // namespace rbf::harness::detail
