#pragma once

// Reference numerics for the recurrent cell variants. Everything is scalar
// double precision with a fixed evaluation order, so repeated runs are
// bitwise identical and a simulator wrapping these steps can reconcile its
// counters against closed-form costs.
//
// Gate weight blocks are stacked row-wise in a fixed order:
//   4-gate cells   [forget; input; candidate; output]
//   3-gate cells   [forget; candidate; output]      (input gate i = 1 - f)
//   SRU            [transform W; forget W_f; reset W_r], bias [b_f; b_r]
//
// Layer norm placement per mode:
//   FULL        z = ln(W_ih x + W_hh h + b) over the whole stacked
//               pre-activation, then one ln on the cell update
//   CELL_ONLY   raw pre-activations; ln on the candidate path (after W_ch
//               when present), and one ln on the cell update
//   NONE        no normalization anywhere
//
// Two-dimensional cell states (H x V) are stored flat in column-major
// order: element (i, j) lives at j*H + i. Gates have length H and act on
// row i across all V columns.

#include <cstdint>
#include <optional>
#include <vector>

#include "rnnt/arch.hpp"
#include "rnnt/linalg.hpp"

namespace rnnt {

struct LnParams {
  Vec gain;
  Vec bias;
};

struct CellWeights {
  Mat w_ih;                             // (G*H) x input_dim
  Mat w_hh;                             // (G*H) x (H*V); empty for SRU
  std::optional<Mat> w_ch;              // (H*V) x H
  Vec bias;                             // G*H, or 2*H for SRU
  std::optional<LnParams> ln_preact;    // FULL only, length G*H
  std::optional<LnParams> ln_candidate; // CELL_ONLY only, candidate length
  std::optional<LnParams> ln_cell;      // FULL and CELL_ONLY, length H*V
  double ln_eps = 1e-5;
};

struct CellState {
  Vec h;  // H*V (H for SRU)
  Vec c;  // H*V column-major (H for SRU)
};

// Optional view into gate activations, for tests and diagnostics.
struct StepDebug {
  Vec f, i, o, r;
  Vec candidate;
};

CellState zero_state(const LayerSpec& layer);

// y_i = gain_i * (x_i - mean) / sqrt(var + eps) + bias_i, population var.
Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps);

// 4-gate cell, joint LN over the stacked 4H pre-activation plus cell LN.
Vec lstm_step_full_ln(const CellWeights& w, CellState& s, const Vec& x,
                      StepDebug* dbg = nullptr, MacCounter* macs = nullptr);

// 4-gate cell, raw pre-activations, candidate and cell-update LN.
Vec lstm_step_cell_ln(const CellWeights& w, CellState& s, const Vec& x,
                      StepDebug* dbg = nullptr, MacCounter* macs = nullptr);

// As lstm_step_cell_ln, but the candidate pre-activation passes through the
// internal stacking matrix W_ch before its LN.
Vec is_step(const CellWeights& w, CellState& s, const Vec& x,
            StepDebug* dbg = nullptr, MacCounter* macs = nullptr);

// 3-gate CIFG cell with W_ch and an H x V cell state. H-length gates
// broadcast across the V columns; both cell LNs run over all H*V elements.
Vec cell2d_step(const CellWeights& w, CellState& s, const Vec& x,
                StepDebug* dbg = nullptr, MacCounter* macs = nullptr);

// Highway-form simple recurrent unit (input size must equal H):
//   xt = W x;  f = sig(W_f x + b_f);  r = sig(W_r x + b_r)
//   c' = f.c + (1-f).xt;  h = r.tanh(c') + (1-r).x
Vec sru_step(const CellWeights& w, CellState& s, const Vec& x,
             StepDebug* dbg = nullptr, MacCounter* macs = nullptr);

// Dispatches on layer.kind and layer.layernorm.
Vec cell_step(const LayerSpec& layer, const CellWeights& w, CellState& s,
              const Vec& x, StepDebug* dbg = nullptr,
              MacCounter* macs = nullptr);

// Column-major reshape helpers for the H x V cell state.
Mat cell_to_mat(const Vec& flat, i64 h, i64 v);
Vec cell_from_mat(const Mat& m);

// Groups `factor` consecutive frames. CONCAT stacks them (tail groups are
// zero padded); MEAN averages them elementwise (tail groups average only
// the frames present).
std::vector<Vec> time_reduce(const std::vector<Vec>& frames, i64 factor,
                             ReductionMode mode);

// Runs the encoder stack over an utterance, applying each time reduction
// before the layer at its position. Residual layers add their input to
// their output. Weight shapes are checked against the spec up front.
std::vector<Vec> encoder_forward(const ValidatedSpec& vs,
                                 const std::vector<CellWeights>& weights,
                                 const std::vector<Vec>& frames,
                                 MacCounter* macs = nullptr);

// Throws DIMENSION_MISMATCH when `w` cannot implement `layer`.
void check_cell_weights(const LayerSpec& layer, const CellWeights& w);

struct ModelWeights {
  std::vector<CellWeights> encoder;
  Mat embedding;  // vocab x embed_dim
  std::vector<CellWeights> prediction;
  Mat joint_w1;   // joint_dim x (enc_out + pred_out)
  Vec joint_b1;
  Mat joint_w2;   // vocab x joint_dim
  Vec joint_b2;
};

// Deterministic stream of doubles in [0, 1), stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next_u64();
  double uniform();                   // [0, 1)
  double uniform(double lo, double hi);

 private:
  std::uint64_t state_;
};

CellWeights make_cell_weights(const LayerSpec& layer, Rng& rng);
ModelWeights make_model_weights(const ValidatedSpec& vs, std::uint64_t seed);

}  // namespace rnnt
