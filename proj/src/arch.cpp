#include "rnnt/arch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rnnt {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DIMENSION_MISMATCH: return "DIMENSION_MISMATCH";
    case ErrorCode::ILLEGAL_VARIANT: return "ILLEGAL_VARIANT";
    case ErrorCode::RESIDUAL_DIM: return "RESIDUAL_DIM";
    case ErrorCode::LENGTH_MISMATCH: return "LENGTH_MISMATCH";
    case ErrorCode::DEGENERATE_INPUT: return "DEGENERATE_INPUT";
    case ErrorCode::SHAPE_MISMATCH: return "SHAPE_MISMATCH";
    case ErrorCode::NONFINITE_INPUT: return "NONFINITE_INPUT";
    case ErrorCode::MISSING_WCH: return "MISSING_WCH";
    case ErrorCode::EMPTY_INPUT: return "EMPTY_INPUT";
    case ErrorCode::WEIGHT_SHAPE_MISMATCH: return "WEIGHT_SHAPE_MISMATCH";
  }
  return "UNKNOWN";
}

const char* to_string(Kind k) {
  switch (k) {
    case Kind::LSTM: return "LSTM";
    case Kind::LSTM_R: return "LSTM_R";
    case Kind::CIFG_R: return "CIFG_R";
    case Kind::IS_CIFG_R: return "IS_CIFG_R";
    case Kind::IS_2D_CIFG_R: return "IS_2D_CIFG_R";
    case Kind::SRU: return "SRU";
  }
  return "?";
}

const char* to_string(LayerNormMode m) {
  switch (m) {
    case LayerNormMode::NONE: return "NONE";
    case LayerNormMode::FULL: return "FULL";
    case LayerNormMode::CELL_ONLY: return "CELL_ONLY";
  }
  return "?";
}

const char* to_string(ReductionMode m) {
  return m == ReductionMode::CONCAT ? "CONCAT" : "MEAN";
}

Kind kind_from_string(const std::string& s) {
  if (s == "LSTM") return Kind::LSTM;
  if (s == "LSTM_R") return Kind::LSTM_R;
  if (s == "CIFG_R") return Kind::CIFG_R;
  if (s == "IS_CIFG_R") return Kind::IS_CIFG_R;
  if (s == "IS_2D_CIFG_R") return Kind::IS_2D_CIFG_R;
  if (s == "SRU") return Kind::SRU;
  throw Error(ErrorCode::ILLEGAL_VARIANT, "unknown cell kind '" + s + "'");
}

LayerNormMode ln_mode_from_string(const std::string& s) {
  if (s == "NONE") return LayerNormMode::NONE;
  if (s == "FULL") return LayerNormMode::FULL;
  if (s == "CELL_ONLY") return LayerNormMode::CELL_ONLY;
  throw Error(ErrorCode::ILLEGAL_VARIANT, "unknown layernorm mode '" + s + "'");
}

ReductionMode reduction_mode_from_string(const std::string& s) {
  if (s == "CONCAT") return ReductionMode::CONCAT;
  if (s == "MEAN") return ReductionMode::MEAN;
  throw Error(ErrorCode::ILLEGAL_VARIANT, "unknown reduction mode '" + s + "'");
}

i64 gate_count(Kind k) {
  switch (k) {
    case Kind::LSTM:
    case Kind::LSTM_R:
      return 4;
    case Kind::CIFG_R:
    case Kind::IS_CIFG_R:
    case Kind::IS_2D_CIFG_R:
    case Kind::SRU:
      return 3;
  }
  return 0;
}

std::string format_violations(const std::vector<Violation>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << "; ";
    os << to_string(v[i].code) << " at " << v[i].where << ": " << v[i].detail;
  }
  return os.str();
}

namespace {

bool is_internally_stacked_kind(Kind k) {
  return k == Kind::IS_CIFG_R || k == Kind::IS_2D_CIFG_R;
}

void check_layer(const LayerSpec& l, const std::string& where,
                 std::vector<Violation>& out) {
  if (l.hidden < 1)
    out.push_back({ErrorCode::DIMENSION_MISMATCH, where, "hidden must be >= 1"});
  if (l.vec < 1)
    out.push_back({ErrorCode::DIMENSION_MISMATCH, where, "vec must be >= 1"});
  if (l.vec > 1 && l.kind != Kind::IS_2D_CIFG_R)
    out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                   "vec > 1 is only legal for IS_2D_CIFG_R"});
  if (is_internally_stacked_kind(l.kind) && !l.internally_stacked)
    out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                   "IS_* kinds require internally_stacked"});
  if (!is_internally_stacked_kind(l.kind) && l.internally_stacked)
    out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                   "internally_stacked is only legal for IS_* kinds"});
  if (l.kind == Kind::SRU) {
    if (l.layernorm == LayerNormMode::FULL)
      out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                     "SRU permits layernorm NONE or CELL_ONLY only"});
    if (l.vec != 1)
      out.push_back({ErrorCode::ILLEGAL_VARIANT, where, "SRU requires vec = 1"});
  }
  if (l.has_wch() && l.layernorm == LayerNormMode::FULL)
    out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                   "FULL layernorm is not defined for internally stacked cells"});
  if (!(l.ln_eps >= 0.0))
    out.push_back({ErrorCode::DEGENERATE_INPUT, where, "ln_eps must be >= 0"});
}

// Walks the encoder chain, filling derived dims into `layers` and recording
// the cumulative reduction factor per layer. `reductions` must be sorted.
void resolve_encoder(i64 feature_dim,
                     const std::vector<TimeReductionSpec>& reductions,
                     std::vector<LayerSpec>& layers, std::vector<i64>& cum,
                     std::vector<Violation>& out) {
  i64 cur_dim = feature_dim;
  i64 factor = 1;
  std::size_t r = 0;
  cum.clear();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (; r < reductions.size() &&
           reductions[r].position == static_cast<i64>(i);
         ++r) {
      factor *= reductions[r].factor;
      if (reductions[r].mode == ReductionMode::CONCAT)
        cur_dim *= reductions[r].factor;
    }
    LayerSpec& l = layers[i];
    const std::string where = "encoder[" + std::to_string(i) + "]";
    if (l.input_dim != 0 && l.input_dim != cur_dim)
      out.push_back({ErrorCode::DIMENSION_MISMATCH, where,
                     "declared input_dim " + std::to_string(l.input_dim) +
                         " does not match derived " + std::to_string(cur_dim)});
    l.input_dim = cur_dim;
    if (l.kind == Kind::SRU && l.input_dim != l.hidden)
      out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                     "SRU requires input_dim = hidden (got " +
                         std::to_string(l.input_dim) + " vs " +
                         std::to_string(l.hidden) + ")"});
    if (l.residual && l.input_dim != l.out_dim())
      out.push_back({ErrorCode::RESIDUAL_DIM, where,
                     "residual needs input_dim = hidden*vec (" +
                         std::to_string(l.input_dim) + " vs " +
                         std::to_string(l.out_dim()) + ")"});
    cum.push_back(factor);
    cur_dim = l.out_dim();
  }
}

void resolve_prediction(i64 embed_dim, std::vector<LayerSpec>& layers,
                        std::vector<Violation>& out) {
  i64 cur_dim = embed_dim;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    LayerSpec& l = layers[i];
    const std::string where = "prediction[" + std::to_string(i) + "]";
    if (l.input_dim != 0 && l.input_dim != cur_dim)
      out.push_back({ErrorCode::DIMENSION_MISMATCH, where,
                     "declared input_dim " + std::to_string(l.input_dim) +
                         " does not match derived " + std::to_string(cur_dim)});
    l.input_dim = cur_dim;
    if (l.kind == Kind::SRU && l.input_dim != l.hidden)
      out.push_back({ErrorCode::ILLEGAL_VARIANT, where,
                     "SRU requires input_dim = hidden"});
    if (l.residual && l.input_dim != l.out_dim())
      out.push_back({ErrorCode::RESIDUAL_DIM, where,
                     "residual needs input_dim = hidden*vec"});
    cur_dim = l.out_dim();
  }
}

std::vector<TimeReductionSpec> sorted_reductions(const TransducerSpec& spec) {
  std::vector<TimeReductionSpec> r = spec.reductions;
  std::stable_sort(r.begin(), r.end(),
                   [](const TimeReductionSpec& a, const TimeReductionSpec& b) {
                     return a.position < b.position;
                   });
  return r;
}

std::vector<Violation> check_impl(const TransducerSpec& spec,
                                  std::vector<LayerSpec>* enc_out,
                                  std::vector<LayerSpec>* pred_out,
                                  std::vector<i64>* cum_out) {
  std::vector<Violation> v;
  if (spec.feature_dim < 1)
    v.push_back({ErrorCode::DIMENSION_MISMATCH, "feature_dim", "must be >= 1"});
  if (spec.encoder.empty())
    v.push_back({ErrorCode::EMPTY_INPUT, "encoder", "encoder stack is empty"});

  for (std::size_t i = 0; i < spec.encoder.size(); ++i)
    check_layer(spec.encoder[i], "encoder[" + std::to_string(i) + "]", v);
  for (std::size_t i = 0; i < spec.prediction.size(); ++i)
    check_layer(spec.prediction[i], "prediction[" + std::to_string(i) + "]", v);

  for (std::size_t i = 0; i < spec.reductions.size(); ++i) {
    const TimeReductionSpec& r = spec.reductions[i];
    const std::string where = "reductions[" + std::to_string(i) + "]";
    if (r.factor < 2)
      v.push_back({ErrorCode::DIMENSION_MISMATCH, where, "factor must be >= 2"});
    if (r.position < 0 || r.position >= static_cast<i64>(spec.encoder.size()))
      v.push_back({ErrorCode::DIMENSION_MISMATCH, where,
                   "position outside the encoder stack"});
  }

  const bool has_decoder =
      spec.vocab > 0 || spec.embed_dim > 0 || spec.joint_dim > 0 ||
      !spec.prediction.empty();
  if (has_decoder) {
    if (spec.vocab < 1)
      v.push_back({ErrorCode::DIMENSION_MISMATCH, "vocab", "must be >= 1"});
    if (spec.embed_dim < 1)
      v.push_back({ErrorCode::DIMENSION_MISMATCH, "embed_dim", "must be >= 1"});
    if (spec.joint_dim < 1)
      v.push_back({ErrorCode::DIMENSION_MISMATCH, "joint_dim", "must be >= 1"});
  }

  if (!v.empty()) return v;

  std::vector<LayerSpec> enc = spec.encoder;
  std::vector<LayerSpec> pred = spec.prediction;
  std::vector<i64> cum;
  resolve_encoder(spec.feature_dim, sorted_reductions(spec), enc, cum, v);
  resolve_prediction(spec.embed_dim, pred, v);
  if (enc_out) *enc_out = std::move(enc);
  if (pred_out) *pred_out = std::move(pred);
  if (cum_out) *cum_out = std::move(cum);
  return v;
}

}  // namespace

std::vector<Violation> check_spec(const TransducerSpec& spec) {
  return check_impl(spec, nullptr, nullptr, nullptr);
}

ValidatedSpec validate_spec(const TransducerSpec& spec) {
  std::vector<LayerSpec> enc, pred;
  std::vector<i64> cum;
  std::vector<Violation> v = check_impl(spec, &enc, &pred, &cum);
  if (!v.empty()) throw Error(v.front().code, format_violations(v));

  ValidatedSpec out;
  out.spec_ = spec;
  out.spec_.reductions = sorted_reductions(spec);
  out.spec_.encoder = std::move(enc);
  out.spec_.prediction = std::move(pred);
  out.cum_factor_ = std::move(cum);
  out.total_reduction_ = 1;
  for (const TimeReductionSpec& r : out.spec_.reductions)
    out.total_reduction_ *= r.factor;
  out.encoder_out_ = out.spec_.encoder.back().out_dim();
  out.prediction_out_ = out.spec_.prediction.empty()
                            ? out.spec_.embed_dim
                            : out.spec_.prediction.back().out_dim();
  return out;
}

std::vector<i64> layernorm_instance_lengths(const LayerSpec& l) {
  if (l.kind == Kind::SRU) return {};
  const i64 cell_len = l.hidden * l.vec;
  switch (l.layernorm) {
    case LayerNormMode::NONE:
      return {};
    case LayerNormMode::FULL:
      return {gate_count(l.kind) * l.hidden, cell_len};
    case LayerNormMode::CELL_ONLY:
      return {l.has_wch() ? cell_len : l.hidden, cell_len};
  }
  return {};
}

BlockCounts layer_param_count(const LayerSpec& l) {
  if (l.input_dim <= 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "layer_param_count needs a resolved input_dim");
  BlockCounts c;
  if (l.kind == Kind::SRU) {
    c.w_ih = 3 * l.hidden * l.input_dim;
    c.bias = 2 * l.hidden;
    return c;
  }
  const i64 g = gate_count(l.kind);
  c.w_ih = g * l.hidden * l.input_dim;
  c.w_hh = g * l.hidden * (l.hidden * l.vec);
  c.w_ch = l.has_wch() ? (l.hidden * l.vec) * l.hidden : 0;
  c.bias = g * l.hidden;
  for (i64 len : layernorm_instance_lengths(l)) c.layernorm += 2 * len;
  return c;
}

ParamReport model_param_count(const ValidatedSpec& vs) {
  const TransducerSpec& s = vs.spec();
  ParamReport r;
  for (std::size_t i = 0; i < s.encoder.size(); ++i) {
    const LayerSpec& l = s.encoder[i];
    ParamReport::Row row{"encoder", static_cast<i64>(i), to_string(l.kind),
                         l.input_dim, l.hidden, l.vec, layer_param_count(l)};
    r.encoder_total += row.blocks.total();
    r.rows.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < s.prediction.size(); ++i) {
    const LayerSpec& l = s.prediction[i];
    ParamReport::Row row{"prediction", static_cast<i64>(i), to_string(l.kind),
                         l.input_dim, l.hidden, l.vec, layer_param_count(l)};
    r.prediction_total += row.blocks.total();
    r.rows.push_back(std::move(row));
  }
  if (s.vocab > 0) {
    r.embedding_total = s.vocab * s.embed_dim;
    const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
    r.joint_total = joint_in * s.joint_dim + s.joint_dim * s.vocab +
                    s.joint_dim + s.vocab;
  }
  return r;
}

std::vector<double> frame_rate_profile(const ValidatedSpec& vs) {
  std::vector<double> rates;
  rates.reserve(vs.cumulative_factors().size());
  for (i64 f : vs.cumulative_factors())
    rates.push_back(1.0 / static_cast<double>(f));
  return rates;
}

i64 block_bytes(i64 params, double bytes_per_param) {
  return static_cast<i64>(std::llround(static_cast<double>(params) *
                                       bytes_per_param));
}

i64 working_set(const LayerSpec& l, double bytes_per_param) {
  if (l.kind == Kind::SRU) return 0;
  i64 params = gate_count(l.kind) * l.hidden * (l.hidden * l.vec);
  if (l.has_wch()) params += (l.hidden * l.vec) * l.hidden;
  return block_bytes(params, bytes_per_param);
}

}  // namespace rnnt
