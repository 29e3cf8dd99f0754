#include "vrdqn/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace vrdqn {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(s);
  while (std::getline(iss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& want) {
  throw std::invalid_argument("config key '" + key + "': expected " + want +
                              ", got '" + value + "'");
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) bad_value(key, value, "an integer");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "an integer");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "an integer in range");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad_value(key, value, "a number");
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value, "a number");
  } catch (const std::out_of_range&) {
    bad_value(key, value, "a number in range");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  bad_value(key, value, "true/false");
}

// Seed lists accept single values and inclusive a..b ranges, e.g. "0,4..7".
std::vector<std::uint64_t> parse_seeds(const std::string& key,
                                       const std::string& value) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : split_list(value)) {
    const std::size_t dots = item.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(static_cast<std::uint64_t>(parse_long(key, item)));
    } else {
      const long lo = parse_long(key, item.substr(0, dots));
      const long hi = parse_long(key, item.substr(dots + 2));
      if (hi < lo) bad_value(key, item, "a nondecreasing range");
      for (long s = lo; s <= hi; ++s)
        seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (seeds.empty()) bad_value(key, value, "at least one seed");
  return seeds;
}

void apply_key(ExperimentSpec& spec, const std::string& key,
               const std::string& value) {
  TaskConfig& cfg = spec.base;
  if (key == "task") {
    return;  // consumed in the first pass
  } else if (key == "algos" || key == "algo") {
    spec.algos.clear();
    for (const std::string& a : split_list(value))
      spec.algos.push_back(algo_from_string(a));
    if (spec.algos.empty()) bad_value(key, value, "at least one optimizer id");
  } else if (key == "seeds" || key == "seed") {
    spec.seeds = parse_seeds(key, value);
  } else if (key == "out") {
    spec.out_dir = value;
  } else if (key == "jobs") {
    spec.jobs = static_cast<int>(parse_long(key, value));
  } else if (key == "quiet") {
    spec.quiet = parse_bool(key, value);
  } else if (key == "hidden_nodes") {
    cfg.hidden_nodes = static_cast<int>(parse_long(key, value));
  } else if (key == "hidden_layers") {
    cfg.hidden_layers = static_cast<int>(parse_long(key, value));
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "eta") {
    cfg.eta = parse_double(key, value);
  } else if (key == "beta1") {
    cfg.beta1 = parse_double(key, value);
  } else if (key == "beta2") {
    cfg.beta2 = parse_double(key, value);
  } else if (key == "batch_size") {
    cfg.batch_size = static_cast<int>(parse_long(key, value));
  } else if (key == "inner_iters") {
    cfg.inner_iters = static_cast<int>(parse_long(key, value));
  } else if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "budget") {
    cfg.budget = parse_long(key, value);
  } else if (key == "budget_unit") {
    if (value == "steps")
      cfg.budget_unit = TaskConfig::BudgetUnit::Steps;
    else if (value == "episodes")
      cfg.budget_unit = TaskConfig::BudgetUnit::Episodes;
    else
      bad_value(key, value, "steps|episodes");
  } else if (key == "learn_freq") {
    cfg.learn_freq = static_cast<int>(parse_long(key, value));
  } else if (key == "eps_start") {
    cfg.eps_start = parse_double(key, value);
  } else if (key == "eps_end") {
    cfg.eps_end = parse_double(key, value);
  } else if (key == "replay_capacity") {
    cfg.replay_capacity = static_cast<int>(parse_long(key, value));
  } else if (key == "adam_eps") {
    cfg.adam_eps = parse_double(key, value);
  } else if (key == "adam_denominator") {
    if (value == "scalar_norm")
      cfg.adam_denominator = AdamState::Denominator::ScalarNorm;
    else if (value == "elementwise")
      cfg.adam_denominator = AdamState::Denominator::Elementwise;
    else
      bad_value(key, value, "scalar_norm|elementwise");
  } else if (key == "adam_gradient") {
    if (value == "last_grad")
      cfg.adam_gradient = TaskConfig::AdamGradient::LastGrad;
    else if (value == "last_delta")
      cfg.adam_gradient = TaskConfig::AdamGradient::LastDelta;
    else
      bad_value(key, value, "last_grad|last_delta");
  } else if (key == "reward") {
    if (value == "shaped")
      cfg.shaped_rewards = true;
    else if (value == "raw")
      cfg.shaped_rewards = false;
    else
      bad_value(key, value, "shaped|raw");
  } else if (key == "diagnostics") {
    cfg.diagnostics = parse_bool(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

}  // namespace

ConfigEntries parse_config_text(const std::string& text) {
  ConfigEntries entries;
  std::istringstream iss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(iss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    entries.emplace_back(key, value);
  }
  return entries;
}

ConfigEntries parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentSpec make_spec(const ConfigEntries& file_entries,
                         const ConfigEntries& overrides) {
  // task first: defaults depend on it
  std::optional<TaskId> task;
  for (const auto& [key, value] : file_entries)
    if (key == "task") task = task_from_string(value);
  for (const auto& [key, value] : overrides)
    if (key == "task") task = task_from_string(value);
  if (!task)
    throw std::invalid_argument("config: missing required key 'task'");

  ExperimentSpec spec;
  spec.task = *task;
  spec.base = TaskConfig::defaults(*task);
  for (const auto& [key, value] : file_entries) apply_key(spec, key, value);
  for (const auto& [key, value] : overrides) apply_key(spec, key, value);

  if (spec.algos.empty())
    spec.algos = {Algo::Sgd, Algo::Svrg, Algo::Sarah, Algo::SarahAdam};
  if (spec.seeds.empty()) spec.seeds = {0};
  if (spec.jobs < 1)
    throw std::invalid_argument("config key 'jobs': must be >= 1");
  validate(spec.base);
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  return make_spec(parse_config_file(path), {});
}

}  // namespace vrdqn
