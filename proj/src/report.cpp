#include <cmath>

#include "json.hpp"
#include "rieszlab/experiments.hpp"

namespace rieszlab {

using json = nlohmann::ordered_json;

namespace {

// Non-finite values have no JSON literal; they are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

bool ExperimentReport::pass() const {
  for (const Check& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::vector<std::string> ExperimentReport::failing() const {
  std::vector<std::string> out;
  for (const Check& c : checks) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

Check& ExperimentReport::add(std::string name, std::string anchor, double value, double bound, bool ok) {
  checks.push_back({std::move(name), std::move(anchor), value, bound, ok});
  return checks.back();
}

Check& ExperimentReport::add_le(std::string name, std::string anchor, double value, double bound) {
  return add(std::move(name), std::move(anchor), value, bound, std::isfinite(value) && value <= bound);
}

Check& ExperimentReport::add_ge(std::string name, std::string anchor, double value, double bound) {
  return add(std::move(name), std::move(anchor), value, bound, std::isfinite(value) && value >= bound);
}

void ExperimentReport::merge(const ExperimentReport& other, const std::string& prefix) {
  for (const auto& [k, v] : other.numbers) numbers[prefix + k] = v;
  for (const auto& [k, v] : other.labels) labels[prefix + k] = v;
  for (Check c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
  for (const auto& [k, v] : other.curves) curves.emplace_back(prefix + k, v);
  runtime_seconds += other.runtime_seconds;
}

std::string ExperimentReport::to_json() const {
  std::map<std::string, json> sorted;
  for (const auto& [k, v] : numbers) sorted[k] = number(v);
  for (const auto& [k, v] : labels) sorted[k] = v;
  json params = json::object();
  for (auto& [k, v] : sorted) params[k] = std::move(v);
  json cs = json::array();
  for (const Check& c : checks) {
    cs.push_back(json{{"name", c.name},
                      {"paper_anchor", c.anchor},
                      {"value", number(c.value)},
                      {"bound", number(c.bound)},
                      {"pass", c.pass}});
  }
  json j{{"id", id}, {"params", params}, {"checks", cs}, {"seed", seed}};
  return j.dump(2) + "\n";
}

}  // namespace rieszlab
