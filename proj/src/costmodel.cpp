#include "rnnt/costmodel.hpp"

#include <iomanip>
#include <sstream>

namespace rnnt {

void check_schedule(const Schedule& s) {
  if (s.batch_factor < 1)
    throw Error(ErrorCode::DIMENSION_MISMATCH, "batch factor must be >= 1");
  if (s.buffer_bytes < 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH, "buffer size must be >= 0");
  if (!(s.bytes_per_param > 0.0))
    throw Error(ErrorCode::DIMENSION_MISMATCH, "bytes per param must be > 0");
  if (s.decoder_reuse < 1)
    throw Error(ErrorCode::DIMENSION_MISMATCH, "decoder reuse must be >= 1");
}

const char* to_string(BlockPart p) {
  switch (p) {
    case BlockPart::ENC_W_IH: return "enc.w_ih";
    case BlockPart::ENC_RECURRENT: return "enc.recurrent";
    case BlockPart::ENC_RIDER: return "enc.rider";
    case BlockPart::PRED_W_IH: return "pred.w_ih";
    case BlockPart::PRED_RECURRENT: return "pred.recurrent";
    case BlockPart::PRED_RIDER: return "pred.rider";
    case BlockPart::EMBEDDING: return "embedding";
    case BlockPart::JOINT: return "joint";
  }
  return "?";
}

std::string to_string(const BlockId& id) {
  std::string s = to_string(id.part);
  if (id.part != BlockPart::EMBEDDING && id.part != BlockPart::JOINT)
    s += "[" + std::to_string(id.layer) + "]";
  return s;
}

EncoderAccess encoder_access(const ValidatedSpec& vs, const Schedule& sched) {
  check_schedule(sched);
  const TransducerSpec& spec = vs.spec();
  const double b = static_cast<double>(sched.batch_factor);
  EncoderAccess out;
  for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
    const LayerSpec& l = spec.encoder[i];
    const BlockCounts c = layer_param_count(l);
    LayerCost lc;
    lc.layer = static_cast<i64>(i);
    lc.kind = to_string(l.kind);
    lc.reduction_factor = vs.cumulative_factors()[i];
    lc.rate = 1.0 / static_cast<double>(lc.reduction_factor);
    lc.w_ih_bytes = block_bytes(c.w_ih, sched.bytes_per_param);
    lc.rider_bytes = block_bytes(c.bias + c.layernorm, sched.bytes_per_param);
    lc.working_set_bytes = working_set(l, sched.bytes_per_param);
    lc.pinned = lc.working_set_bytes <= sched.buffer_bytes;
    lc.input_bytes_per_frame =
        lc.rate * static_cast<double>(lc.w_ih_bytes + lc.rider_bytes) / b;
    const double ws = static_cast<double>(lc.working_set_bytes);
    lc.recurrent_bytes_per_frame =
        lc.pinned ? lc.rate * ws / b : lc.rate * ws;
    out.input_bytes_per_frame += lc.input_bytes_per_frame;
    out.recurrent_bytes_per_frame += lc.recurrent_bytes_per_frame;
    out.layers.push_back(std::move(lc));
  }
  out.total_bytes_per_frame =
      out.input_bytes_per_frame + out.recurrent_bytes_per_frame;
  return out;
}

i64 DecoderBlockBytes::group() const {
  i64 g = embedding + joint;
  for (const Layer& l : layers) g += l.w_ih + l.recurrent + l.rider;
  return g;
}

DecoderBlockBytes decoder_block_bytes(const ValidatedSpec& vs, double bpp) {
  const TransducerSpec& s = vs.spec();
  DecoderBlockBytes d;
  for (const LayerSpec& l : s.prediction) {
    const BlockCounts c = layer_param_count(l);
    DecoderBlockBytes::Layer dl;
    dl.w_ih = block_bytes(c.w_ih, bpp);
    dl.recurrent = block_bytes(c.w_hh + c.w_ch, bpp);
    dl.rider = block_bytes(c.bias + c.layernorm, bpp);
    d.layers.push_back(dl);
  }
  if (s.vocab > 0) {
    d.embedding = block_bytes(s.vocab * s.embed_dim, bpp);
    const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
    d.joint = block_bytes(joint_in * s.joint_dim + s.joint_dim * s.vocab +
                              s.joint_dim + s.vocab,
                          bpp);
  }
  return d;
}

DecoderAccess decoder_access(const ValidatedSpec& vs, const Schedule& sched) {
  check_schedule(sched);
  const DecoderBlockBytes d = decoder_block_bytes(vs, sched.bytes_per_param);
  DecoderAccess out;
  for (const auto& dl : d.layers)
    out.prediction_bytes += dl.w_ih + dl.recurrent + dl.rider;
  out.embedding_bytes = d.embedding;
  out.joint_bytes = d.joint;
  out.group_bytes = out.prediction_bytes + out.embedding_bytes + out.joint_bytes;
  out.fits = out.group_bytes <= sched.buffer_bytes;
  const double g = static_cast<double>(out.group_bytes);
  out.bytes_per_symbol =
      out.fits ? g / static_cast<double>(sched.decoder_reuse) : g;
  return out;
}

ComputeCount compute_count(const ValidatedSpec& vs) {
  const TransducerSpec& s = vs.spec();
  ComputeCount out;
  for (std::size_t i = 0; i < s.encoder.size(); ++i) {
    const BlockCounts c = layer_param_count(s.encoder[i]);
    const double rate = 1.0 / static_cast<double>(vs.cumulative_factors()[i]);
    const double macs = rate * static_cast<double>(c.step_macs());
    out.per_layer_macs_per_frame.push_back(macs);
    out.encoder_macs_per_frame += macs;
  }
  for (const LayerSpec& l : s.prediction)
    out.decoder_macs_per_symbol += layer_param_count(l).step_macs();
  if (s.vocab > 0) {
    const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
    out.decoder_macs_per_symbol +=
        joint_in * s.joint_dim + s.joint_dim * s.vocab;
  }
  return out;
}

CostReport cost_report(const ValidatedSpec& vs, const Schedule& sched,
                       i64 frames, i64 symbols, const EnergyModel& energy) {
  check_schedule(sched);
  if (frames < 0 || symbols < 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "frames and symbols must be >= 0");
  CostReport r;
  r.config_name = vs.spec().meta.name;
  r.schedule = sched;
  r.energy_model = energy;
  r.encoder = encoder_access(vs, sched);
  r.decoder = decoder_access(vs, sched);
  r.compute = compute_count(vs);
  r.frames = frames;
  r.symbols = symbols;

  const double t = static_cast<double>(frames);
  const double sy = static_cast<double>(symbols);
  r.offchip_bytes = r.encoder.total_bytes_per_frame * t +
                    r.decoder.bytes_per_symbol * sy;

  // On-chip traffic: every parameter byte a step touches, counted once per
  // step of its layer.
  double onchip_frame = 0.0;
  for (const LayerCost& lc : r.encoder.layers)
    onchip_frame += lc.rate * static_cast<double>(lc.w_ih_bytes +
                                                  lc.rider_bytes +
                                                  lc.working_set_bytes);
  r.onchip_bytes = onchip_frame * t +
                   static_cast<double>(r.decoder.group_bytes) * sy;

  r.macs = r.compute.encoder_macs_per_frame * t +
           static_cast<double>(r.compute.decoder_macs_per_symbol) * sy;

  r.energy.compute_pj = r.macs * energy.mac_pj;
  r.energy.onchip_pj = r.onchip_bytes * energy.onchip_byte_pj;
  r.energy.offchip_pj = r.offchip_bytes * energy.offchip_byte_pj;
  return r;
}

std::map<BlockId, i64> utterance_block_bytes(const ValidatedSpec& vs,
                                             const Schedule& sched, i64 frames,
                                             i64 symbols) {
  check_schedule(sched);
  const TransducerSpec& spec = vs.spec();
  std::map<BlockId, i64> out;
  const i64 b = sched.batch_factor;
  for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
    const LayerSpec& l = spec.encoder[i];
    const i64 r = vs.cumulative_factors()[i];
    if (frames % (b * r) != 0)
      throw Error(ErrorCode::DIMENSION_MISMATCH,
                  "frames must be a multiple of B * R for exact totals");
    const i64 steps = frames / r;
    const i64 batches = steps / b;
    const BlockCounts c = layer_param_count(l);
    const i64 w_ih = block_bytes(c.w_ih, sched.bytes_per_param);
    const i64 rider = block_bytes(c.bias + c.layernorm, sched.bytes_per_param);
    const i64 ws = working_set(l, sched.bytes_per_param);
    const bool pinned = ws <= sched.buffer_bytes;
    const i64 li = static_cast<i64>(i);
    if (w_ih > 0) out[{BlockPart::ENC_W_IH, li}] = batches * w_ih;
    if (rider > 0) out[{BlockPart::ENC_RIDER, li}] = batches * rider;
    if (ws > 0)
      out[{BlockPart::ENC_RECURRENT, li}] = (pinned ? batches : steps) * ws;
  }
  if (symbols > 0) {
    if (symbols % sched.decoder_reuse != 0)
      throw Error(ErrorCode::DIMENSION_MISMATCH,
                  "symbols must be a multiple of C_d for exact totals");
    const DecoderBlockBytes d = decoder_block_bytes(vs, sched.bytes_per_param);
    const bool fits = d.group() <= sched.buffer_bytes;
    const i64 fetches = fits ? symbols / sched.decoder_reuse : symbols;
    for (std::size_t i = 0; i < d.layers.size(); ++i) {
      const i64 li = static_cast<i64>(i);
      if (d.layers[i].w_ih > 0)
        out[{BlockPart::PRED_W_IH, li}] = fetches * d.layers[i].w_ih;
      if (d.layers[i].recurrent > 0)
        out[{BlockPart::PRED_RECURRENT, li}] = fetches * d.layers[i].recurrent;
      if (d.layers[i].rider > 0)
        out[{BlockPart::PRED_RIDER, li}] = fetches * d.layers[i].rider;
    }
    if (d.embedding > 0) out[{BlockPart::EMBEDDING, 0}] = fetches * d.embedding;
    if (d.joint > 0) out[{BlockPart::JOINT, 0}] = fetches * d.joint;
  }
  return out;
}

namespace {

std::string fmt_double(double v, int precision = 1) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string fmt_rate(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

std::string report_table(const CostReport& r, bool with_layers) {
  std::ostringstream os;
  if (!r.config_name.empty()) os << "config: " << r.config_name << "\n";
  os << "schedule: B=" << r.schedule.batch_factor
     << " buffer=" << r.schedule.buffer_bytes << "B"
     << " bpp=" << fmt_rate(r.schedule.bytes_per_param)
     << " C_d=" << r.schedule.decoder_reuse << "\n";
  os << "energy model: mac=" << fmt_rate(r.energy_model.mac_pj)
     << "pJ onchip_byte=" << fmt_rate(r.energy_model.onchip_byte_pj)
     << "pJ offchip_byte=" << fmt_rate(r.energy_model.offchip_byte_pj)
     << "pJ\n";
  if (with_layers) {
    os << "\n";
    os << std::left << std::setw(6) << "layer" << std::setw(14) << "kind"
       << std::setw(10) << "rate" << std::setw(11) << "block" << std::right
       << std::setw(16) << "bytes/frame" << "  " << std::left << "pinned"
       << "\n";
    for (const LayerCost& lc : r.encoder.layers) {
      os << std::left << std::setw(6) << lc.layer << std::setw(14) << lc.kind
         << std::setw(10) << fmt_rate(lc.rate) << std::setw(11) << "input"
         << std::right << std::setw(16) << fmt_double(lc.input_bytes_per_frame)
         << "  " << std::left << "-" << "\n";
      os << std::left << std::setw(6) << "" << std::setw(14) << ""
         << std::setw(10) << "" << std::setw(11) << "recurrent" << std::right
         << std::setw(16) << fmt_double(lc.recurrent_bytes_per_frame) << "  "
         << std::left << (lc.pinned ? "yes" : "no") << "\n";
    }
  }
  os << "\n";
  os << "encoder input path bytes/frame:     "
     << fmt_double(r.encoder.input_bytes_per_frame) << "\n";
  os << "encoder recurrent path bytes/frame: "
     << fmt_double(r.encoder.recurrent_bytes_per_frame) << "\n";
  os << "encoder off-chip bytes/frame:       "
     << fmt_double(r.encoder.total_bytes_per_frame) << "\n";
  os << "decoder group bytes: " << r.decoder.group_bytes
     << (r.decoder.fits ? " (fits on chip)" : " (streamed)") << "\n";
  os << "decoder off-chip bytes/symbol:      "
     << fmt_double(r.decoder.bytes_per_symbol) << "\n";
  os << "encoder MACs/frame:                 "
     << fmt_double(r.compute.encoder_macs_per_frame) << "\n";
  os << "decoder MACs/symbol:                "
     << r.compute.decoder_macs_per_symbol << "\n";
  os << "\n";
  os << "utterance: frames=" << r.frames << " symbols=" << r.symbols << "\n";
  os << "  off-chip bytes: " << fmt_double(r.offchip_bytes) << "\n";
  os << "  on-chip bytes:  " << fmt_double(r.onchip_bytes) << "\n";
  os << "  MACs:           " << fmt_double(r.macs) << "\n";
  os << "  energy pJ: compute=" << fmt_double(r.energy.compute_pj)
     << " onchip=" << fmt_double(r.energy.onchip_pj)
     << " offchip=" << fmt_double(r.energy.offchip_pj)
     << " total=" << fmt_double(r.energy.total_pj()) << "\n";
  os << "  off-chip energy fraction: " << fmt_double(r.energy.offchip_fraction(), 4)
     << "\n";
  return os.str();
}

std::string report_csv(const CostReport& r) {
  std::ostringstream os;
  os << "layer,kind,rate,block,bytes_per_frame,pinned\n";
  for (const LayerCost& lc : r.encoder.layers) {
    os << lc.layer << "," << lc.kind << "," << fmt_rate(lc.rate) << ",input,"
       << fmt_double(lc.input_bytes_per_frame, 6) << ",\n";
    os << lc.layer << "," << lc.kind << "," << fmt_rate(lc.rate)
       << ",recurrent," << fmt_double(lc.recurrent_bytes_per_frame, 6) << ","
       << (lc.pinned ? "yes" : "no") << "\n";
  }
  return os.str();
}

nlohmann::json report_json(const CostReport& r) {
  nlohmann::json j;
  j["config"] = r.config_name;
  j["schedule"] = {{"batch_factor", r.schedule.batch_factor},
                   {"buffer_bytes", r.schedule.buffer_bytes},
                   {"bytes_per_param", r.schedule.bytes_per_param},
                   {"decoder_reuse", r.schedule.decoder_reuse}};
  j["energy_model"] = {{"mac_pj", r.energy_model.mac_pj},
                       {"onchip_byte_pj", r.energy_model.onchip_byte_pj},
                       {"offchip_byte_pj", r.energy_model.offchip_byte_pj}};
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerCost& lc : r.encoder.layers) {
    layers.push_back({{"layer", lc.layer},
                      {"kind", lc.kind},
                      {"rate", lc.rate},
                      {"pinned", lc.pinned},
                      {"working_set_bytes", lc.working_set_bytes},
                      {"input_bytes_per_frame", lc.input_bytes_per_frame},
                      {"recurrent_bytes_per_frame", lc.recurrent_bytes_per_frame}});
  }
  j["encoder"] = {{"layers", layers},
                  {"input_bytes_per_frame", r.encoder.input_bytes_per_frame},
                  {"recurrent_bytes_per_frame", r.encoder.recurrent_bytes_per_frame},
                  {"total_bytes_per_frame", r.encoder.total_bytes_per_frame}};
  j["decoder"] = {{"prediction_bytes", r.decoder.prediction_bytes},
                  {"embedding_bytes", r.decoder.embedding_bytes},
                  {"joint_bytes", r.decoder.joint_bytes},
                  {"group_bytes", r.decoder.group_bytes},
                  {"fits", r.decoder.fits},
                  {"bytes_per_symbol", r.decoder.bytes_per_symbol}};
  j["compute"] = {{"encoder_macs_per_frame", r.compute.encoder_macs_per_frame},
                  {"decoder_macs_per_symbol", r.compute.decoder_macs_per_symbol}};
  j["utterance"] = {{"frames", r.frames},
                    {"symbols", r.symbols},
                    {"offchip_bytes", r.offchip_bytes},
                    {"onchip_bytes", r.onchip_bytes},
                    {"macs", r.macs},
                    {"energy_pj",
                     {{"compute", r.energy.compute_pj},
                      {"onchip", r.energy.onchip_pj},
                      {"offchip", r.energy.offchip_pj},
                      {"total", r.energy.total_pj()},
                      {"offchip_fraction", r.energy.offchip_fraction()}}}};
  return j;
}

}  // namespace rnnt
