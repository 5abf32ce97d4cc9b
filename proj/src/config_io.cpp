#include "rnnt/config_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

namespace rnnt {

namespace {

LayerSpec layer_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object())
    throw Error(ErrorCode::DIMENSION_MISMATCH, where + ": expected an object");
  LayerSpec l;
  l.kind = kind_from_string(j.at("kind").get<std::string>());
  l.hidden = j.at("hidden").get<i64>();
  if (j.contains("vec")) l.vec = j.at("vec").get<i64>();
  if (j.contains("input_dim")) l.input_dim = j.at("input_dim").get<i64>();
  if (j.contains("residual")) l.residual = j.at("residual").get<bool>();
  if (j.contains("internally_stacked"))
    l.internally_stacked = j.at("internally_stacked").get<bool>();
  if (j.contains("layernorm"))
    l.layernorm = ln_mode_from_string(j.at("layernorm").get<std::string>());
  if (j.contains("ln_eps")) l.ln_eps = j.at("ln_eps").get<double>();
  return l;
}

nlohmann::json layer_to_json(const LayerSpec& l) {
  nlohmann::json j;
  j["kind"] = to_string(l.kind);
  j["hidden"] = l.hidden;
  if (l.vec != 1) j["vec"] = l.vec;
  if (l.input_dim != 0) j["input_dim"] = l.input_dim;
  if (l.residual) j["residual"] = true;
  if (l.internally_stacked) j["internally_stacked"] = true;
  if (l.layernorm != LayerNormMode::NONE)
    j["layernorm"] = to_string(l.layernorm);
  return j;
}

}  // namespace

TransducerSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "config root must be an object");
  TransducerSpec s;
  if (j.contains("feature_dim")) s.feature_dim = j.at("feature_dim").get<i64>();
  if (j.contains("encoder")) {
    std::size_t i = 0;
    for (const auto& lj : j.at("encoder"))
      s.encoder.push_back(
          layer_from_json(lj, "encoder[" + std::to_string(i++) + "]"));
  }
  if (j.contains("reductions")) {
    for (const auto& rj : j.at("reductions")) {
      TimeReductionSpec r;
      r.mode = reduction_mode_from_string(rj.at("mode").get<std::string>());
      r.factor = rj.at("factor").get<i64>();
      r.position = rj.at("position").get<i64>();
      s.reductions.push_back(r);
    }
  }
  if (j.contains("prediction")) {
    std::size_t i = 0;
    for (const auto& lj : j.at("prediction"))
      s.prediction.push_back(
          layer_from_json(lj, "prediction[" + std::to_string(i++) + "]"));
  }
  if (j.contains("embed_dim")) s.embed_dim = j.at("embed_dim").get<i64>();
  if (j.contains("joint_dim")) s.joint_dim = j.at("joint_dim").get<i64>();
  if (j.contains("vocab")) s.vocab = j.at("vocab").get<i64>();
  if (j.contains("_name")) s.meta.name = j.at("_name").get<std::string>();
  if (j.contains("_assumptions"))
    for (const auto& a : j.at("_assumptions"))
      s.meta.assumptions.push_back(a.get<std::string>());
  if (j.contains("_published")) {
    const auto& p = j.at("_published");
    if (p.contains("network_m"))
      s.meta.published_network_m = p.at("network_m").get<double>();
    if (p.contains("encoder_m"))
      s.meta.published_encoder_m = p.at("encoder_m").get<double>();
  }
  return s;
}

TransducerSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::EMPTY_INPUT, "cannot open config: " + path);
  nlohmann::json j;
  in >> j;
  TransducerSpec s = spec_from_json(j);
  if (s.meta.name.empty()) {
    // Derive a name from the file stem.
    std::string stem = path;
    const auto slash = stem.find_last_of('/');
    if (slash != std::string::npos) stem = stem.substr(slash + 1);
    const auto dot = stem.find_last_of('.');
    if (dot != std::string::npos) stem = stem.substr(0, dot);
    s.meta.name = stem;
  }
  return s;
}

nlohmann::json spec_to_json(const TransducerSpec& s) {
  nlohmann::json j;
  j["feature_dim"] = s.feature_dim;
  j["encoder"] = nlohmann::json::array();
  for (const LayerSpec& l : s.encoder) j["encoder"].push_back(layer_to_json(l));
  if (!s.reductions.empty()) {
    j["reductions"] = nlohmann::json::array();
    for (const TimeReductionSpec& r : s.reductions)
      j["reductions"].push_back({{"mode", to_string(r.mode)},
                                 {"factor", r.factor},
                                 {"position", r.position}});
  }
  if (!s.prediction.empty()) {
    j["prediction"] = nlohmann::json::array();
    for (const LayerSpec& l : s.prediction)
      j["prediction"].push_back(layer_to_json(l));
  }
  if (s.embed_dim > 0) j["embed_dim"] = s.embed_dim;
  if (s.joint_dim > 0) j["joint_dim"] = s.joint_dim;
  if (s.vocab > 0) j["vocab"] = s.vocab;
  if (!s.meta.name.empty()) j["_name"] = s.meta.name;
  if (!s.meta.assumptions.empty()) j["_assumptions"] = s.meta.assumptions;
  if (s.meta.published_network_m || s.meta.published_encoder_m) {
    nlohmann::json p;
    if (s.meta.published_network_m)
      p["network_m"] = *s.meta.published_network_m;
    if (s.meta.published_encoder_m)
      p["encoder_m"] = *s.meta.published_encoder_m;
    j["_published"] = p;
  }
  return j;
}

i64 parse_buffer_size(const std::string& text, double bytes_per_param) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t.empty())
    throw Error(ErrorCode::EMPTY_INPUT, "empty buffer size");

  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "cannot parse buffer size: " + text);
  }
  std::string unit = t.substr(pos);
  if (value < 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "buffer size must be >= 0: " + text);

  double scale = 1.0;
  bool params = false;
  if (unit.size() >= 6 && unit.substr(unit.size() - 6) == "params") {
    params = true;
    unit = unit.substr(0, unit.size() - 6);
  }
  if (unit.empty())
    scale = 1.0;
  else if (params && unit == "k")
    scale = 1e3;
  else if (params && unit == "m")
    scale = 1e6;
  else if (!params && (unit == "b" || unit == "bytes"))
    scale = 1.0;
  else if (!params && unit == "kib")
    scale = 1024.0;
  else if (!params && unit == "mib")
    scale = 1024.0 * 1024.0;
  else
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "unknown buffer size unit: " + text);

  const double raw = value * scale;
  if (params) return block_bytes(static_cast<i64>(std::llround(raw)),
                                 bytes_per_param);
  return static_cast<i64>(std::llround(raw));
}

}  // namespace rnnt
