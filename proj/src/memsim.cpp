#include "rnnt/memsim.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace rnnt {

namespace {

struct Tracer {
  AccessTrace trace;
  bool record_log = false;
  i64 resident = 0;

  void fetch(i64 batch, BlockId block, i64 bytes, bool pinned) {
    if (bytes <= 0) return;
    trace.block_bytes[block] += bytes;
    trace.offchip_total += bytes;
    if (record_log) trace.log.push_back({batch, block, bytes, pinned});
  }

  void set_resident(i64 bytes) {
    resident = bytes;
    trace.peak_resident_bytes = std::max(trace.peak_resident_bytes, resident);
  }
};

i64 ceil_div(i64 a, i64 b) { return (a + b - 1) / b; }

// One walk of the schedule, shared by both modes so byte accounting cannot
// diverge. Numeric mode additionally runs the cell steps in the exact order
// an uninstrumented forward pass would.
template <bool kNumeric>
SimResult run_sim(const ValidatedSpec& vs, const ModelWeights* mw,
                  const Schedule& sched, const std::vector<Vec>* frames,
                  i64 frame_count, i64 symbols, const SimOptions& opts) {
  check_schedule(sched);
  if (frame_count < 0 || symbols < 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "frames and symbols must be >= 0");
  const TransducerSpec& spec = vs.spec();
  if constexpr (kNumeric) {
    if (frames->empty())
      throw Error(ErrorCode::EMPTY_INPUT, "simulate needs at least one frame");
    if (mw->encoder.size() != spec.encoder.size())
      throw Error(ErrorCode::DIMENSION_MISMATCH,
                  "weight count does not match encoder depth");
  }

  Tracer tr;
  tr.record_log = opts.record_log;
  MacCounter mac;
  const i64 b = sched.batch_factor;
  const double bpp = sched.bytes_per_param;

  SimResult res;
  std::vector<Vec> seq;
  if constexpr (kNumeric) {
    for (const Vec& f : *frames)
      if (static_cast<i64>(f.size()) != spec.feature_dim)
        throw Error(ErrorCode::DIMENSION_MISMATCH,
                    "frame width does not match feature_dim");
    seq = *frames;
  }

  i64 steps = frame_count;
  std::size_t red = 0;
  const auto& reductions = spec.reductions;  // sorted by validate_spec
  for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
    const LayerSpec& l = spec.encoder[i];
    while (red < reductions.size() &&
           reductions[red].position == static_cast<i64>(i)) {
      if constexpr (kNumeric) {
        seq = time_reduce(seq, reductions[red].factor, reductions[red].mode);
        steps = static_cast<i64>(seq.size());
      } else {
        steps = ceil_div(steps, reductions[red].factor);
      }
      ++red;
    }

    const BlockCounts c = layer_param_count(l);
    const i64 w_ih_b = block_bytes(c.w_ih, bpp);
    const i64 rider_b = block_bytes(c.bias + c.layernorm, bpp);
    const i64 ws = working_set(l, bpp);
    const bool pinned = ws <= sched.buffer_bytes;
    const i64 li = static_cast<i64>(i);

    CellState st;
    std::vector<Vec> out;
    if constexpr (kNumeric) {
      check_cell_weights(l, mw->encoder[i]);
      st = zero_state(l);
      out.reserve(static_cast<std::size_t>(steps));
    }

    for (i64 base = 0, batch = 0; base < steps; base += b, ++batch) {
      const i64 bsteps = std::min(b, steps - base);
      tr.fetch(batch, {BlockPart::ENC_W_IH, li}, w_ih_b, false);
      tr.fetch(batch, {BlockPart::ENC_RIDER, li}, rider_b, false);
      if (ws > 0 && pinned) {
        tr.set_resident(ws);
        tr.fetch(batch, {BlockPart::ENC_RECURRENT, li}, ws, true);
      }
      for (i64 t = 0; t < bsteps; ++t) {
        if (ws > 0 && !pinned)
          tr.fetch(batch, {BlockPart::ENC_RECURRENT, li}, ws, false);
        if constexpr (kNumeric) {
          const Vec& x = seq[static_cast<std::size_t>(base + t)];
          Vec h = cell_step(l, mw->encoder[i], st, x, nullptr, &mac);
          if (l.residual) h = add(h, x);
          out.push_back(std::move(h));
        }
      }
      tr.set_resident(0);
    }
    if constexpr (!kNumeric) {
      tr.trace.macs +=
          static_cast<std::uint64_t>(steps) *
          static_cast<std::uint64_t>(c.step_macs());
    } else {
      seq = std::move(out);
    }
  }

  if (symbols > 0) {
    if (spec.vocab <= 0)
      throw Error(ErrorCode::DIMENSION_MISMATCH,
                  "symbols requested but the model has no decoder");
    const DecoderBlockBytes d = decoder_block_bytes(vs, bpp);
    const bool fits = d.group() <= sched.buffer_bytes;
    const i64 reuse = sched.decoder_reuse;

    std::vector<CellState> pred_state;
    Vec enc_last;
    if constexpr (kNumeric) {
      if (mw->prediction.size() != spec.prediction.size())
        throw Error(ErrorCode::DIMENSION_MISMATCH,
                    "weight count does not match prediction depth");
      for (std::size_t i = 0; i < spec.prediction.size(); ++i) {
        check_cell_weights(spec.prediction[i], mw->prediction[i]);
        pred_state.push_back(zero_state(spec.prediction[i]));
      }
      enc_last = seq.back();
    }

    auto fetch_group = [&](i64 batch) {
      for (std::size_t i = 0; i < d.layers.size(); ++i) {
        const i64 li = static_cast<i64>(i);
        tr.fetch(batch, {BlockPart::PRED_W_IH, li}, d.layers[i].w_ih, fits);
        tr.fetch(batch, {BlockPart::PRED_RECURRENT, li},
                 d.layers[i].recurrent, fits);
        tr.fetch(batch, {BlockPart::PRED_RIDER, li}, d.layers[i].rider, fits);
      }
      tr.fetch(batch, {BlockPart::EMBEDDING, 0}, d.embedding, fits);
      tr.fetch(batch, {BlockPart::JOINT, 0}, d.joint, fits);
      if (fits) tr.set_resident(d.group());
    };

    std::uint64_t pred_macs = 0;
    if constexpr (!kNumeric) {
      for (const LayerSpec& l : spec.prediction)
        pred_macs += static_cast<std::uint64_t>(
            layer_param_count(l).step_macs());
      const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
      pred_macs += static_cast<std::uint64_t>(joint_in * spec.joint_dim +
                                              spec.joint_dim * spec.vocab);
    }

    for (i64 s = 0; s < symbols; ++s) {
      if (fits) {
        if (s % reuse == 0) fetch_group(s / reuse);
      } else {
        fetch_group(s);
      }
      if constexpr (kNumeric) {
        const i64 token = s % spec.vocab;
        Vec x(static_cast<std::size_t>(spec.embed_dim));
        for (i64 j = 0; j < spec.embed_dim; ++j)
          x[static_cast<std::size_t>(j)] = mw->embedding(token, j);
        for (std::size_t i = 0; i < spec.prediction.size(); ++i) {
          const LayerSpec& l = spec.prediction[i];
          Vec h = cell_step(l, mw->prediction[i], pred_state[i], x, nullptr,
                            &mac);
          if (l.residual) h = add(h, x);
          x = std::move(h);
        }
        Vec joined = enc_last;
        joined.insert(joined.end(), x.begin(), x.end());
        Vec y1 = matvec(mw->joint_w1, joined, &mac);
        y1 = add(y1, mw->joint_b1);
        for (double& v : y1) v = std::tanh(v);
        Vec y2 = matvec(mw->joint_w2, y1, &mac);
        y2 = add(y2, mw->joint_b2);
      } else {
        tr.trace.macs += pred_macs;
      }
    }
    tr.set_resident(0);
  }

  if constexpr (kNumeric) tr.trace.macs = mac.macs;
  res.trace = std::move(tr.trace);
  if constexpr (kNumeric) res.encoder_outputs = std::move(seq);
  return res;
}

}  // namespace

SimResult simulate(const ValidatedSpec& vs, const ModelWeights& weights,
                   const Schedule& sched, const std::vector<Vec>& frames,
                   i64 symbols, const SimOptions& opts) {
  return run_sim<true>(vs, &weights, sched, &frames,
                       static_cast<i64>(frames.size()), symbols, opts);
}

AccessTrace simulate_counts(const ValidatedSpec& vs, const Schedule& sched,
                            i64 frames, i64 symbols, const SimOptions& opts) {
  return run_sim<false>(vs, nullptr, sched, nullptr, frames, symbols, opts)
      .trace;
}

ReconcileResult reconcile(const ValidatedSpec& vs, const Schedule& sched,
                          const AccessTrace& trace, i64 frames, i64 symbols) {
  check_schedule(sched);
  const TransducerSpec& spec = vs.spec();
  const i64 b = sched.batch_factor;
  const double bpp = sched.bytes_per_param;

  ReconcileResult out;
  for (std::size_t i = 0; i < spec.encoder.size(); ++i)
    if (frames % (b * vs.cumulative_factors()[i]) != 0)
      out.partial_batch = true;
  if (symbols % sched.decoder_reuse != 0) out.partial_batch = true;

  // Analytical expectation and per-block slack.
  std::map<BlockId, std::pair<double, double>> expect;  // value, bound
  if (!out.partial_batch) {
    for (const auto& [block, bytes] :
         utterance_block_bytes(vs, sched, frames, symbols))
      expect[block] = {static_cast<double>(bytes), 0.0};
  } else {
    const double t = static_cast<double>(frames);
    for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
      const LayerSpec& l = spec.encoder[i];
      const BlockCounts c = layer_param_count(l);
      const double rate = 1.0 / static_cast<double>(vs.cumulative_factors()[i]);
      const double w_ih = static_cast<double>(block_bytes(c.w_ih, bpp));
      const double rider =
          static_cast<double>(block_bytes(c.bias + c.layernorm, bpp));
      const i64 ws = working_set(l, bpp);
      const bool pinned = ws <= sched.buffer_bytes;
      const double wsd = static_cast<double>(ws);
      const double bd = static_cast<double>(b);
      const i64 li = static_cast<i64>(i);
      if (w_ih > 0)
        expect[{BlockPart::ENC_W_IH, li}] = {rate * w_ih / bd * t, w_ih};
      if (rider > 0)
        expect[{BlockPart::ENC_RIDER, li}] = {rate * rider / bd * t, rider};
      if (ws > 0) {
        const double per_frame = pinned ? rate * wsd / bd : rate * wsd;
        const double bound = pinned ? wsd : bd * wsd;
        expect[{BlockPart::ENC_RECURRENT, li}] = {per_frame * t, bound};
      }
    }
    if (symbols > 0 && spec.vocab > 0) {
      const DecoderBlockBytes d = decoder_block_bytes(vs, bpp);
      const bool fits = d.group() <= sched.buffer_bytes;
      const double per_fetch =
          fits ? static_cast<double>(symbols) /
                     static_cast<double>(sched.decoder_reuse)
               : static_cast<double>(symbols);
      auto put = [&](BlockPart part, i64 layer, i64 bytes) {
        if (bytes > 0)
          expect[{part, layer}] = {per_fetch * static_cast<double>(bytes),
                                   static_cast<double>(bytes)};
      };
      for (std::size_t i = 0; i < d.layers.size(); ++i) {
        const i64 li = static_cast<i64>(i);
        put(BlockPart::PRED_W_IH, li, d.layers[i].w_ih);
        put(BlockPart::PRED_RECURRENT, li, d.layers[i].recurrent);
        put(BlockPart::PRED_RIDER, li, d.layers[i].rider);
      }
      put(BlockPart::EMBEDDING, 0, d.embedding);
      put(BlockPart::JOINT, 0, d.joint);
    }
  }

  // Union of analytical and traced block ids.
  std::map<BlockId, i64> traced = trace.block_bytes;
  for (const auto& [block, ev] : expect)
    if (!traced.count(block)) traced[block] = 0;

  out.pass = true;
  for (const auto& [block, bytes] : traced) {
    BlockDiff bd;
    bd.block = block;
    bd.traced = bytes;
    auto it = expect.find(block);
    if (it != expect.end()) {
      bd.analytical = it->second.first;
      bd.bound = it->second.second;
    }
    bd.diff = static_cast<double>(bd.traced) - bd.analytical;
    out.analytical_total += bd.analytical;
    if (std::abs(bd.diff) > bd.bound + 1e-6) out.pass = false;
    out.diffs.push_back(bd);
  }
  out.traced_total = trace.offchip_total;
  return out;
}

}  // namespace rnnt
