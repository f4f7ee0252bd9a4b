// Copyright 2026 The cmbi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "config.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>

namespace cmbi::cli {

using nlohmann::json;

double parse_angle(const std::string& text) {
  static const std::regex kAngle(
      R"(^\s*([+-])?\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*(\*?\s*pi)?\s*(?:/\s*((?:\d+\.?\d*|\.\d+)))?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, kAngle) || (!m[2].matched && !m[3].matched)) {
    throw ConfigError("malformed angle '" + text + "'");
  }
  if (m[3].matched && m[3].str().find('*') != std::string::npos && !m[2].matched) {
    throw ConfigError("malformed angle '" + text + "'");
  }
  double value = m[2].matched ? std::stod(m[2].str()) : 1.0;
  if (m[3].matched) value *= std::numbers::pi;
  if (m[4].matched) {
    const double denom = std::stod(m[4].str());
    if (denom == 0.0) throw ConfigError("angle '" + text + "' divides by zero");
    value /= denom;
  }
  if (m[1].matched && m[1].str() == "-") value = -value;
  if (!std::isfinite(value)) throw ConfigError("angle '" + text + "' is not finite");
  return value;
}

double parse_angle(const json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) return parse_angle(value.get<std::string>());
  throw ConfigError("angle must be a number or a string");
}

namespace {

// Typed access to one JSON object; every key must be consumed or it is
// reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + " is required");
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(path_ + "." + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path_ + "." + key + " must be finite");
    return d;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(path_ + "." + key + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(path_ + "." + key + " must be a boolean");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(path_ + "." + key + " must be a string");
    return v.get<std::string>();
  }

  double angle(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    try {
      return parse_angle(raw(key));
    } catch (const ConfigError& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  std::vector<double> numbers(const std::string& key, std::size_t expected) {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != expected) {
      throw ConfigError(path_ + "." + key + " must be an array of " + std::to_string(expected) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(path_ + "." + key + " must contain numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) { return Section(raw(key), path_ + "." + key); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + path_ + "." + key);
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SourceBlock parse_source(Section s) {
  SourceBlock block;
  if (s.has("gamma")) block.gamma = s.number("gamma");
  if (s.has("tau")) block.tau = s.number("tau");
  if (s.has("power")) block.power = s.number("power");
  s.finish();
  const bool interaction = block.tau || block.power;
  if (block.gamma.has_value() == interaction || (interaction && !(block.tau && block.power))) {
    throw ConfigError("each source needs exactly one of gamma or (tau, power)");
  }
  return block;
}

json source_to_json(const SourceBlock& b) {
  if (b.gamma) return {{"gamma", *b.gamma}};
  return {{"tau", *b.tau}, {"power", *b.power}};
}

std::vector<double> parse_grid(const json& v) {
  if (v.is_array()) {
    std::vector<double> grid;
    for (const auto& e : v) grid.push_back(parse_angle(e));
    return grid;
  }
  Section s(v, "scan.varphi");
  const double start = s.angle("start", -std::numbers::pi / 2);
  const double stop = s.angle("stop", 3 * std::numbers::pi / 2);
  const std::uint64_t points = s.count("points", 31);
  s.finish();
  if (points < 2) throw ConfigError("scan.varphi.points must be >= 2");
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = start + (stop - start) * double(i) / double(points - 1);
  return grid;
}

template <typename F>
auto rethrow_as_config(const char* what, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

SpdcSource SourceBlock::build(double rep_rate) const {
  return rethrow_as_config("sources", [&] {
    return gamma ? SpdcSource::from_gamma(*gamma, rep_rate) : SpdcSource::from_interaction(*tau, *power, rep_rate);
  });
}

SourceModel RunConfig::sources() const {
  SourceModel model{source1.build(rep_rate), source2.build(rep_rate), truncation, rate_floor};
  return model;
}

CalibrationModel RunConfig::calibration_model() const {
  CalibrationModel model;
  model.sources = sources();
  model.setting = PhaseSetting{scan.chi, scan.varphi_grid.front(), scan.theta};
  model.multiplex = network.multiplex;
  model.rejection_threshold = network.rejection_threshold;
  return model;
}

RunConfig config_from_json(const json& doc) {
  RunConfig config;
  Section root(doc, "config");

  Section src = root.child("sources");
  config.source1 = parse_source(src.child("source1"));
  config.source2 = parse_source(src.child("source2"));
  config.rep_rate = src.number("rep_rate", config.rep_rate);
  config.truncation = static_cast<unsigned>(src.count("truncation", config.truncation));
  config.rate_floor = src.number("rate_floor", config.rate_floor);
  src.finish();

  Section net = root.child("network");
  if (net.has("splitting_ratios")) config.network.splitting_ratios = net.numbers("splitting_ratios", 2);
  if (net.has("transmissions")) {
    if (net.raw("transmissions").is_null()) {
      config.network.transmissions.reset();
    } else {
      config.network.transmissions = net.numbers("transmissions", 8);
    }
  }
  config.network.multiplex = net.flag("multiplex", config.network.multiplex);
  config.network.rejection_threshold = net.count("rejection_threshold", config.network.rejection_threshold);
  net.finish();

  Section scan = root.child("scan");
  config.scan.chi = scan.angle("chi", 0.0);
  config.scan.theta = scan.angle("theta", 0.0);
  if (scan.has("varphi")) {
    try {
      config.scan.varphi_grid = parse_grid(scan.raw("varphi"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("scan.varphi: ") + e.what());
    }
  }
  config.scan.integration_time = scan.number("integration_time", config.scan.integration_time);
  config.scan.repetitions = static_cast<unsigned>(scan.count("repetitions", config.scan.repetitions));
  scan.finish();

  Section mode = root.child("mode");
  const std::string type = mode.text("type", "expectation");
  if (type == "expectation") {
    config.mode = SamplingMode::expectation();
  } else if (type == "sampled") {
    config.mode = SamplingMode::poisson(mode.count("seed", 0));
  } else {
    throw ConfigError("mode.type must be 'expectation' or 'sampled'");
  }
  mode.finish();

  Section out = root.child("outputs");
  config.output_directory = out.text("directory", config.output_directory.string());
  config.write_svg = out.flag("svg", config.write_svg);
  out.finish();

  if (root.has("calibration")) {
    Section cal = root.child("calibration");
    auto& c = config.calibration;
    if (cal.has("initial_eta")) c.initial_guess.eta = cal.numbers("initial_eta", 8);
    if (cal.has("initial_ratios")) c.initial_guess.splitting_ratios = cal.numbers("initial_ratios", 2);
    if (cal.has("lower")) c.bounds.lower = cal.numbers("lower", CalibrationParameters::kSize);
    if (cal.has("upper")) c.bounds.upper = cal.numbers("upper", CalibrationParameters::kSize);
    c.options.n_starts = static_cast<unsigned>(cal.count("starts", c.options.n_starts));
    c.options.seed = cal.count("seed", c.options.seed);
    c.options.max_iterations = static_cast<unsigned>(cal.count("max_iterations", c.options.max_iterations));
    cal.finish();
  }
  root.finish();

  rethrow_as_config("config", [&] {
    config.sources();
    config.scan.validate();
    build_experiment_network(config.network);
    config.calibration.bounds.validate();
    if (config.calibration.options.n_starts == 0) throw std::invalid_argument("calibration.starts must be >= 1");
    return 0;
  });
  return config;
}

json config_to_json(const RunConfig& config) {
  json doc;
  doc["sources"] = {{"source1", source_to_json(config.source1)},
                    {"source2", source_to_json(config.source2)},
                    {"rep_rate", config.rep_rate},
                    {"truncation", config.truncation},
                    {"rate_floor", config.rate_floor}};
  json net = {{"splitting_ratios", config.network.splitting_ratios},
              {"multiplex", config.network.multiplex},
              {"rejection_threshold", config.network.rejection_threshold}};
  net["transmissions"] = config.network.transmissions ? json(*config.network.transmissions) : json(nullptr);
  doc["network"] = net;
  doc["scan"] = {{"chi", config.scan.chi},
                 {"theta", config.scan.theta},
                 {"varphi", config.scan.varphi_grid},
                 {"integration_time", config.scan.integration_time},
                 {"repetitions", config.scan.repetitions}};
  doc["mode"] = config.mode.sampled ? json{{"type", "sampled"}, {"seed", config.mode.seed}}
                                    : json{{"type", "expectation"}};
  doc["outputs"] = {{"directory", config.output_directory.string()}, {"svg", config.write_svg}};
  const auto& c = config.calibration;
  doc["calibration"] = {{"initial_eta", c.initial_guess.eta},
                        {"initial_ratios", c.initial_guess.splitting_ratios},
                        {"lower", c.bounds.lower},
                        {"upper", c.bounds.upper},
                        {"starts", c.options.n_starts},
                        {"seed", c.options.seed},
                        {"max_iterations", c.options.max_iterations}};
  return doc;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

namespace {

CountsRecord record_from_json(const json& j, const std::string& path) {
  Section s(j, path);
  CountsRecord record;
  for (const auto& name : counter_names({"A", "B", "C", "D"})) {
    const double v = s.number(name);
    if (v < 0) throw ConfigError(path + "." + name + " must be non-negative");
    record.values.push_back(v);
  }
  s.finish();
  return record;
}

json record_to_json(const CountsRecord& record) {
  json j = json::object();
  const auto names = counter_names({"A", "B", "C", "D"});
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = record.values.at(i);
  return j;
}

}  // namespace

CalibrationTargets targets_from_json(const json& doc) {
  Section root(doc, "targets");
  CalibrationTargets targets{record_from_json(root.raw("source1_only"), "targets.source1_only"),
                             record_from_json(root.raw("source2_only"), "targets.source2_only")};
  root.finish();
  return targets;
}

json targets_to_json(const CalibrationTargets& targets) {
  return {{"source1_only", record_to_json(targets.source1_only)},
          {"source2_only", record_to_json(targets.source2_only)}};
}

}  // namespace cmbi::cli
