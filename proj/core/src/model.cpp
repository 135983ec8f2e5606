#include "lerkit/model.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lerkit/error.hpp"

namespace lerkit {

ScenarioParams validate_params(const ScenarioParams& params) {
  if (!(params.p >= 0.0 && params.p < 1.0)) {
    throw InvalidParam("p", "must satisfy 0 <= p < 1");
  }
  if (!(params.E >= 1.0) || !std::isfinite(params.E)) {
    throw InvalidParam("E", "must be a finite value >= 1");
  }
  if (params.T < 1) {
    throw InvalidParam("T", "must be >= 1");
  }
  if (params.T > kMaxWindow) {
    throw InvalidParam("T", "windows larger than " + std::to_string(kMaxWindow) +
                                " are not supported");
  }
  if (params.N < 1) {
    throw InvalidParam("N", "must be >= 1");
  }
  return params;
}

WeightFunction::WeightFunction(std::vector<double> weights) : weights_(std::move(weights)) {
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidParam("weights", "entries must be finite and non-negative");
    }
  }
}

WeightFunction WeightFunction::uniform(std::size_t size, double value) {
  return WeightFunction(std::vector<double>(size, value));
}

double WeightFunction::total() const noexcept {
  double sum = 0.0;
  for (double w : weights_) sum += w;
  return sum;
}

bool WeightFunction::is_non_increasing() const noexcept {
  return std::is_sorted(weights_.rbegin(), weights_.rend());
}

WeightFunction WeightFunction::with(std::size_t index, double value) const {
  std::vector<double> copy = weights_;
  copy.at(index - 1) = value;
  return WeightFunction(std::move(copy));
}

void validate_config(const RecoveryConfig& config) {
  if (config.weights.size() == 0) throw InvalidParam("weights", "must not be empty");
  if (config.weights.size() != config.provenance.T) {
    throw InvalidParam("T", "does not match the number of weights");
  }
  if (!(config.threshold >= 0.0) || !std::isfinite(config.threshold)) {
    throw InvalidParam("threshold", "must be finite and >= 0");
  }
  if (!(config.qual >= 0.0 && config.qual <= 1.0)) {
    throw InvalidParam("qual", "must lie in [0, 1]");
  }
}

std::string to_json(const RecoveryConfig& config) {
  nlohmann::ordered_json doc;
  doc["T"] = config.weights.size();
  doc["weights"] = std::vector<double>(config.weights.values().begin(),
                                       config.weights.values().end());
  doc["threshold"] = config.threshold;
  doc["p"] = config.provenance.p;
  doc["E"] = config.provenance.E;
  doc["N"] = config.provenance.N;
  doc["qual"] = config.qual;
  return doc.dump(2) + "\n";
}

RecoveryConfig config_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParam("config", e.what());
  }
  for (const char* key : {"T", "weights", "threshold", "p", "E", "N", "qual"}) {
    if (!doc.contains(key)) throw InvalidParam(key, "missing from config document");
  }
  RecoveryConfig config;
  try {
    config.weights = WeightFunction(doc.at("weights").get<std::vector<double>>());
    config.threshold = doc.at("threshold").get<double>();
    config.provenance.p = doc.at("p").get<double>();
    config.provenance.E = doc.at("E").get<double>();
    config.provenance.T = doc.at("T").get<std::size_t>();
    config.provenance.N = doc.at("N").get<std::size_t>();
    config.qual = doc.at("qual").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidParam("config", e.what());
  }
  validate_config(config);
  return config;
}

void save_config(const RecoveryConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParam("path", "cannot write " + path);
  out << to_json(config);
}

RecoveryConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParam("path", "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json(buffer.str());
}

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

}  // namespace lerkit
