#pragma once

// Architecture descriptions for streaming recurrent transducers: encoder
// stacks of recurrent cell variants with optional time reductions, a
// prediction network over tokens, and a joint projection. This module owns
// validation, parameter counting, frame-rate profiles and per-layer
// recurrent working sets; it performs no numeric work.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rnnt/error.hpp"

namespace rnnt {

using i64 = std::int64_t;

enum class Kind {
  LSTM,           // 4-gate cell
  LSTM_R,         // 4-gate cell, residual taxonomy
  CIFG_R,         // 3-gate cell, input gate coupled to forget (i = 1 - f)
  IS_CIFG_R,      // CIFG with an internal candidate stacking matrix W_ch
  IS_2D_CIFG_R,   // CIFG with W_ch and a two-dimensional cell state (H x V)
  SRU,            // simple recurrent unit, highway form, no recurrent matrix
};

enum class LayerNormMode {
  NONE,
  FULL,       // one LN over the stacked gate pre-activation, plus cell-update LN
  CELL_ONLY,  // LN on the candidate path and on the cell update only
};

enum class ReductionMode { CONCAT, MEAN };

const char* to_string(Kind k);
const char* to_string(LayerNormMode m);
const char* to_string(ReductionMode m);
Kind kind_from_string(const std::string& s);
LayerNormMode ln_mode_from_string(const std::string& s);
ReductionMode reduction_mode_from_string(const std::string& s);

struct LayerSpec {
  Kind kind = Kind::LSTM;
  i64 hidden = 0;               // H: gate length
  i64 vec = 1;                  // V: cell-state columns, > 1 only for 2D kinds
  i64 input_dim = 0;            // 0 means derived during validation
  bool residual = false;        // adds layer input to layer output
  bool internally_stacked = false;
  LayerNormMode layernorm = LayerNormMode::NONE;
  double ln_eps = 1e-5;

  i64 out_dim() const { return hidden * vec; }
  bool has_wch() const { return internally_stacked || vec > 1; }
};

// Number of distinct gate weight blocks in W_ih / W_hh.
i64 gate_count(Kind k);

struct TimeReductionSpec {
  ReductionMode mode = ReductionMode::CONCAT;
  i64 factor = 2;    // >= 2
  i64 position = 0;  // applied before encoder layer `position`
};

struct SpecMeta {
  std::vector<std::string> assumptions;  // echoed into reports
  std::optional<double> published_network_m; // published totals, if recorded
  std::optional<double> published_encoder_m;
  std::string name;
};

struct TransducerSpec {
  i64 feature_dim = 80;
  std::vector<LayerSpec> encoder;
  std::vector<TimeReductionSpec> reductions;
  std::vector<LayerSpec> prediction;
  i64 embed_dim = 0;
  i64 joint_dim = 0;
  i64 vocab = 0;
  SpecMeta meta;
};

struct Violation {
  ErrorCode code;
  std::string where;
  std::string detail;
};

std::string format_violations(const std::vector<Violation>& v);

// A spec whose dimensional chain has been resolved and checked. Layer
// input_dim fields are filled in, reductions are sorted by position, and
// cumulative reduction factors are recorded per encoder layer.
class ValidatedSpec {
 public:
  const TransducerSpec& spec() const { return spec_; }
  const std::vector<i64>& cumulative_factors() const { return cum_factor_; }
  i64 total_reduction() const { return total_reduction_; }
  i64 encoder_out_dim() const { return encoder_out_; }
  i64 prediction_out_dim() const { return prediction_out_; }

 private:
  friend ValidatedSpec validate_spec(const TransducerSpec&);
  TransducerSpec spec_;
  std::vector<i64> cum_factor_;  // R_l for each encoder layer
  i64 total_reduction_ = 1;
  i64 encoder_out_ = 0;
  i64 prediction_out_ = 0;
};

// Empty when the spec is well formed.
std::vector<Violation> check_spec(const TransducerSpec& spec);

// Resolves derived dimensions or throws Error with the first violation's
// code and all violations in the message. Idempotent: re-validating the
// contained spec of a ValidatedSpec yields the same resolution.
ValidatedSpec validate_spec(const TransducerSpec& spec);

struct BlockCounts {
  i64 w_ih = 0;
  i64 w_hh = 0;
  i64 w_ch = 0;
  i64 bias = 0;
  i64 layernorm = 0;

  i64 total() const { return w_ih + w_hh + w_ch + bias + layernorm; }
  // Multiply-accumulates of one cell step equal the weight matrix entries.
  i64 step_macs() const { return w_ih + w_hh + w_ch; }
};

// Layer must have input_dim resolved.
BlockCounts layer_param_count(const LayerSpec& layer);

// Lengths of the layer norm parameter vectors a layer carries, in order
// [pre-activation], [candidate], [cell update] as applicable to its mode.
std::vector<i64> layernorm_instance_lengths(const LayerSpec& layer);

struct ParamReport {
  struct Row {
    std::string component;  // "encoder" or "prediction"
    i64 index = 0;
    std::string kind;
    i64 input_dim = 0;
    i64 hidden = 0;
    i64 vec = 1;
    BlockCounts blocks;
  };
  std::vector<Row> rows;
  i64 encoder_total = 0;
  i64 prediction_total = 0;
  i64 embedding_total = 0;
  i64 joint_total = 0;
  i64 network_total() const {
    return encoder_total + prediction_total + embedding_total + joint_total;
  }
  // prediction + embedding + joint; the part fetched per emitted symbol
  i64 decoder_total() const {
    return prediction_total + embedding_total + joint_total;
  }
};

ParamReport model_param_count(const ValidatedSpec& vs);

// Fraction of input frames each encoder layer processes: 1 / (product of
// reduction factors at positions <= layer).
std::vector<double> frame_rate_profile(const ValidatedSpec& vs);

// Bytes of the recurrent block (W_hh + W_ch) a layer needs resident to be
// reused across a batch. Biases and LN parameters ride the input path and
// are excluded. SRU has no recurrent block.
i64 working_set(const LayerSpec& layer, double bytes_per_param);

// Rounded byte size of a parameter block.
i64 block_bytes(i64 params, double bytes_per_param);

}  // namespace rnnt
