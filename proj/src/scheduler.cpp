#include "rnnt/scheduler.hpp"

#include <cmath>

namespace rnnt {

std::vector<DesignPoint> presets() {
  return {
      {"IB_s", 8, std::nullopt},
      {"IB_l", 32, std::nullopt},
      {"WS_s", std::nullopt, 500000},
      {"WS_l", std::nullopt, 2000000},
  };
}

std::vector<DesignPoint> cross() {
  std::vector<DesignPoint> out;
  const auto p = presets();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 2; j < 4; ++j)
      out.push_back({p[i].name + "+" + p[j].name, p[i].batch,
                     p[j].buffer_params});
  return out;
}

Schedule to_schedule(const DesignPoint& p, double bytes_per_param) {
  Schedule s;
  s.batch_factor = p.batch.value_or(1);
  s.buffer_bytes =
      p.buffer_params
          ? block_bytes(*p.buffer_params, bytes_per_param)
          : 0;
  s.bytes_per_param = bytes_per_param;
  return s;
}

std::vector<PinStatus> pinnability(const ValidatedSpec& vs,
                                   const DesignPoint& p,
                                   double bytes_per_param) {
  const Schedule s = to_schedule(p, bytes_per_param);
  std::vector<PinStatus> out;
  const auto& enc = vs.spec().encoder;
  for (std::size_t i = 0; i < enc.size(); ++i) {
    PinStatus ps;
    ps.layer = static_cast<i64>(i);
    ps.working_set_bytes = working_set(enc[i], bytes_per_param);
    ps.pinned = ps.working_set_bytes <= s.buffer_bytes;
    out.push_back(ps);
  }
  return out;
}

ScheduleChoice best_schedule(const ValidatedSpec& vs,
                             i64 latency_budget_frames, i64 buffer_params,
                             double bytes_per_param) {
  if (latency_budget_frames < 1)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "latency budget must be >= 1 frame");
  if (buffer_params < 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH, "buffer budget must be >= 0");

  Schedule s;
  s.buffer_bytes = block_bytes(buffer_params, bytes_per_param);
  s.bytes_per_param = bytes_per_param;

  ScheduleChoice choice;
  i64 best_b = 1;
  double best_cost = 0.0;
  for (i64 b = 1; b <= latency_budget_frames; ++b) {
    s.batch_factor = b;
    const double cost = encoder_access(vs, s).total_bytes_per_frame;
    choice.candidates.push_back(cost);
    if (b == 1 || cost < best_cost) {
      best_cost = cost;
      best_b = b;
    }
  }
  s.batch_factor = best_b;
  choice.schedule = s;
  choice.report = cost_report(vs, s, 0, 0);
  return choice;
}

}  // namespace rnnt
