#pragma once

// Analytical off-chip access, compute and energy model for a validated
// transducer under a batching schedule.
//
// Schedule semantics: each layer processes its own time steps in batches of
// B. Per batch, the input-path blocks (W_ih plus bias and LN parameters)
// stream from off-chip once and are reused across the B steps. The
// recurrent block (W_hh + W_ch) is fetched once per batch when it fits the
// on-chip buffer, otherwise once per step. A layer past a time reduction of
// cumulative factor R runs on 1/R of the input frames, discounting both
// paths. The decoder group (prediction + embedding + joint) is fetched once
// per symbol, or once per C_d symbols when the whole group fits on chip.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rnnt/arch.hpp"

namespace rnnt {

struct Schedule {
  i64 batch_factor = 1;        // B, frames accumulated before running
  i64 buffer_bytes = 0;        // on-chip weight buffer capacity
  double bytes_per_param = 1.0;
  i64 decoder_reuse = 1;       // C_d, symbols sharing one decoder fetch
};

// Throws on malformed values (B < 1, negative buffer, bpp <= 0, C_d < 1).
void check_schedule(const Schedule& s);

struct EnergyModel {
  double mac_pj = 1.0;
  double onchip_byte_pj = 1.0;
  double offchip_byte_pj = 100.0;
};

enum class BlockPart {
  ENC_W_IH,
  ENC_RECURRENT,  // W_hh + W_ch
  ENC_RIDER,      // bias + layer norm parameters
  PRED_W_IH,
  PRED_RECURRENT,
  PRED_RIDER,
  EMBEDDING,
  JOINT,
};

const char* to_string(BlockPart p);

struct BlockId {
  BlockPart part = BlockPart::ENC_W_IH;
  i64 layer = 0;  // encoder or prediction index; 0 for EMBEDDING / JOINT

  friend bool operator<(const BlockId& a, const BlockId& b) {
    if (a.part != b.part) return a.part < b.part;
    return a.layer < b.layer;
  }
  friend bool operator==(const BlockId& a, const BlockId& b) {
    return a.part == b.part && a.layer == b.layer;
  }
};

std::string to_string(const BlockId& id);

struct LayerCost {
  i64 layer = 0;
  std::string kind;
  i64 reduction_factor = 1;  // cumulative R at this layer
  double rate = 1.0;         // 1 / R
  bool pinned = false;
  i64 w_ih_bytes = 0;
  i64 rider_bytes = 0;
  i64 working_set_bytes = 0;
  double input_bytes_per_frame = 0.0;
  double recurrent_bytes_per_frame = 0.0;
};

struct EncoderAccess {
  std::vector<LayerCost> layers;
  double input_bytes_per_frame = 0.0;
  double recurrent_bytes_per_frame = 0.0;
  double total_bytes_per_frame = 0.0;
};

EncoderAccess encoder_access(const ValidatedSpec& vs, const Schedule& sched);

struct DecoderAccess {
  i64 prediction_bytes = 0;
  i64 embedding_bytes = 0;
  i64 joint_bytes = 0;
  i64 group_bytes = 0;  // sum of the above
  bool fits = false;
  double bytes_per_symbol = 0.0;
};

DecoderAccess decoder_access(const ValidatedSpec& vs, const Schedule& sched);

// Byte size of each decoder block for a single fetch.
struct DecoderBlockBytes {
  struct Layer {
    i64 w_ih = 0, recurrent = 0, rider = 0;
  };
  std::vector<Layer> layers;  // one per prediction layer
  i64 embedding = 0;
  i64 joint = 0;
  i64 group() const;
};

DecoderBlockBytes decoder_block_bytes(const ValidatedSpec& vs, double bpp);

struct ComputeCount {
  std::vector<double> per_layer_macs_per_frame;
  double encoder_macs_per_frame = 0.0;
  i64 decoder_macs_per_symbol = 0;
};

// Multiply-accumulates, invariant under the schedule.
ComputeCount compute_count(const ValidatedSpec& vs);

struct EnergyBreakdown {
  double compute_pj = 0.0;
  double onchip_pj = 0.0;
  double offchip_pj = 0.0;
  double total_pj() const { return compute_pj + onchip_pj + offchip_pj; }
  double offchip_fraction() const {
    const double t = total_pj();
    return t > 0.0 ? offchip_pj / t : 0.0;
  }
};

struct CostReport {
  std::string config_name;
  Schedule schedule;
  EnergyModel energy_model;
  EncoderAccess encoder;
  DecoderAccess decoder;
  ComputeCount compute;
  i64 frames = 0;
  i64 symbols = 0;
  // Utterance totals; linear in frames and symbols.
  double offchip_bytes = 0.0;
  double onchip_bytes = 0.0;
  double macs = 0.0;
  EnergyBreakdown energy;
};

CostReport cost_report(const ValidatedSpec& vs, const Schedule& sched,
                       i64 frames, i64 symbols,
                       const EnergyModel& energy = EnergyModel{});

// Exact integer utterance totals per parameter block. Requires frames to be
// a multiple of B * R for every layer's cumulative factor R, and symbols a
// multiple of C_d; throws DIMENSION_MISMATCH otherwise. Zero-size blocks
// are omitted.
std::map<BlockId, i64> utterance_block_bytes(const ValidatedSpec& vs,
                                             const Schedule& sched, i64 frames,
                                             i64 symbols);

std::string report_table(const CostReport& r, bool with_layers = true);
std::string report_csv(const CostReport& r);
nlohmann::json report_json(const CostReport& r);

}  // namespace rnnt
