#pragma once

// Instrumented execution of a validated transducer under a batching
// schedule. The simulator advances layer by layer, processing each layer's
// own time steps in batches of B: per batch it streams the input-path
// blocks once, fetches the recurrent block once when it fits the buffer
// (otherwise once per step), and counts every off-chip byte it moves. The
// numeric mode runs the real cell steps in the same order as
// encoder_forward, so outputs are bitwise identical to an uninstrumented
// run; the counting mode walks the identical loop without touching values.

#include <cstdint>
#include <map>
#include <vector>

#include "rnnt/cells.hpp"
#include "rnnt/costmodel.hpp"

namespace rnnt {

struct PhaseEntry {
  i64 batch = 0;
  BlockId block;
  i64 bytes = 0;
  bool pinned = false;
};

struct AccessTrace {
  std::map<BlockId, i64> block_bytes;
  i64 offchip_total = 0;
  std::uint64_t macs = 0;
  i64 peak_resident_bytes = 0;
  std::vector<PhaseEntry> log;  // populated when record_log is set
};

struct SimOptions {
  bool record_log = false;
};

struct SimResult {
  std::vector<Vec> encoder_outputs;
  AccessTrace trace;
};

// Numeric simulation over real frames; emits `symbols` decoder steps on a
// fixed dummy token sequence (token identity does not change byte counts).
SimResult simulate(const ValidatedSpec& vs, const ModelWeights& weights,
                   const Schedule& sched, const std::vector<Vec>& frames,
                   i64 symbols, const SimOptions& opts = {});

// Structural walk of the same schedule loop: identical byte accounting, no
// numeric work. MACs are accumulated from the per-step closed form.
AccessTrace simulate_counts(const ValidatedSpec& vs, const Schedule& sched,
                            i64 frames, i64 symbols,
                            const SimOptions& opts = {});

struct BlockDiff {
  BlockId block;
  double analytical = 0.0;
  i64 traced = 0;
  double diff = 0.0;   // traced - analytical
  double bound = 0.0;  // allowed slack (one batch fetch); 0 in exact mode
};

struct ReconcileResult {
  bool pass = false;
  bool partial_batch = false;  // frames or symbols not batch aligned
  std::vector<BlockDiff> diffs;
  double analytical_total = 0.0;
  i64 traced_total = 0;
};

// Compares a trace against the analytical model. When frames is a multiple
// of B * R for every layer and symbols a multiple of C_d, every per-block
// difference must be exactly zero; otherwise each difference is allowed at
// most one batch's worth of bytes for that block.
ReconcileResult reconcile(const ValidatedSpec& vs, const Schedule& sched,
                          const AccessTrace& trace, i64 frames, i64 symbols);

}  // namespace rnnt
