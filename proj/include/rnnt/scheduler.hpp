#pragma once

// Design-space helpers: named schedule presets, per-layer pinnability under
// a buffer budget, and a small search for the cheapest batch factor within a
// latency budget.

#include <optional>
#include <string>
#include <vector>

#include "rnnt/costmodel.hpp"

namespace rnnt {

struct DesignPoint {
  std::string name;
  std::optional<i64> batch;          // input-batching factor
  std::optional<i64> buffer_params;  // on-chip buffer, in parameters
};

// IB_s/IB_l batch presets and WS_s/WS_l buffer presets.
std::vector<DesignPoint> presets();

// The four batch x buffer combinations of the presets.
std::vector<DesignPoint> cross();

Schedule to_schedule(const DesignPoint& p, double bytes_per_param);

struct PinStatus {
  i64 layer = 0;
  i64 working_set_bytes = 0;
  bool pinned = false;
};

std::vector<PinStatus> pinnability(const ValidatedSpec& vs,
                                   const DesignPoint& p,
                                   double bytes_per_param);

struct ScheduleChoice {
  Schedule schedule;
  CostReport report;
  std::vector<double> candidates;  // encoder bytes/frame for B=1..budget
};

// Picks the batch factor in [1, latency_budget_frames] minimizing encoder
// off-chip bytes per frame at the given buffer budget; ties go to the
// smaller batch (lower latency).
ScheduleChoice best_schedule(const ValidatedSpec& vs,
                             i64 latency_budget_frames, i64 buffer_params,
                             double bytes_per_param);

}  // namespace rnnt
