// Command-line front end: parameter audits, off-chip cost analysis, config
// comparison, schedule sweeps, simulator-vs-model validation, and time
// reduction what-ifs for streaming transducer models.

#include <cmath>
#include <cstdio>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnnt/config_io.hpp"
#include "rnnt/costmodel.hpp"
#include "rnnt/memsim.hpp"
#include "rnnt/scheduler.hpp"

namespace {

using nlohmann::json;
using namespace rnnt;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct ScheduleFlags {
  i64 batch = 1;
  std::string buffer = "0";
  double bpp = 1.0;
  i64 reuse = 1;

  Schedule resolve() const {
    Schedule s;
    s.batch_factor = batch;
    s.buffer_bytes = parse_buffer_size(buffer, bpp);
    s.bytes_per_param = bpp;
    s.decoder_reuse = reuse;
    return s;
  }
};

void add_schedule_flags(CLI::App* cmd, ScheduleFlags& f) {
  cmd->add_option("--batch,-B", f.batch, "input batching factor (steps)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--buffer", f.buffer,
                  "on-chip buffer (e.g. 512KiB, 2MiB, 500Kparams, bytes)");
  cmd->add_option("--bpp", f.bpp, "bytes per parameter")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--reuse", f.reuse,
                  "symbols served per decoder fetch when it fits on chip")
      ->check(CLI::PositiveNumber);
}

void print_header(bool no_header, const std::string& what) {
  if (no_header) return;
  std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  std::cout << "# rnntcost " << what << " " << buf << "\n";
}

std::string fmt_m(i64 params) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2)
     << static_cast<double>(params) / 1e6 << "M";
  return os.str();
}

std::string fmt2(double v, int prec = 1) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

ValidatedSpec load_validated(const std::string& path) {
  return validate_spec(load_spec(path));
}

// ---------------------------------------------------------------- params --

json params_json(const ValidatedSpec& vs, const ParamReport& rep) {
  json j;
  j["config"] = vs.spec().meta.name;
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"component", r.component},
                    {"index", r.index},
                    {"kind", r.kind},
                    {"input_dim", r.input_dim},
                    {"hidden", r.hidden},
                    {"vec", r.vec},
                    {"w_ih", r.blocks.w_ih},
                    {"w_hh", r.blocks.w_hh},
                    {"w_ch", r.blocks.w_ch},
                    {"bias", r.blocks.bias},
                    {"layernorm", r.blocks.layernorm},
                    {"total", r.blocks.total()}});
  j["layers"] = rows;
  j["encoder_total"] = rep.encoder_total;
  j["prediction_total"] = rep.prediction_total;
  j["embedding_total"] = rep.embedding_total;
  j["joint_total"] = rep.joint_total;
  j["decoder_total"] = rep.decoder_total();
  j["network_total"] = rep.network_total();
  const SpecMeta& meta = vs.spec().meta;
  if (!meta.assumptions.empty()) j["assumptions"] = meta.assumptions;
  if (meta.published_network_m) {
    j["published_network_total"] =
        static_cast<i64>(std::llround(*meta.published_network_m * 1e6));
    j["unattributed_network_params"] =
        static_cast<i64>(std::llround(*meta.published_network_m * 1e6)) - rep.network_total();
  }
  if (meta.published_encoder_m) {
    j["published_encoder_total"] =
        static_cast<i64>(std::llround(*meta.published_encoder_m * 1e6));
    j["unattributed_encoder_params"] =
        static_cast<i64>(std::llround(*meta.published_encoder_m * 1e6)) - rep.encoder_total;
  }
  return j;
}

int run_params(const std::string& config, bool as_json, bool no_header) {
  const ValidatedSpec vs = load_validated(config);
  const ParamReport rep = model_param_count(vs);
  if (as_json) {
    std::cout << params_json(vs, rep).dump(2) << "\n";
    return kExitOk;
  }
  print_header(no_header, "params");
  std::cout << "config: " << vs.spec().meta.name << "\n\n";
  std::cout << std::left << std::setw(12) << "component" << std::setw(5)
            << "idx" << std::setw(14) << "kind" << std::right << std::setw(7)
            << "in" << std::setw(7) << "hidden" << std::setw(4) << "v"
            << std::setw(12) << "w_ih" << std::setw(12) << "w_hh"
            << std::setw(10) << "w_ch" << std::setw(8) << "bias"
            << std::setw(8) << "ln" << std::setw(13) << "total" << "\n";
  for (const auto& r : rep.rows) {
    std::cout << std::left << std::setw(12) << r.component << std::setw(5)
              << r.index << std::setw(14) << r.kind << std::right
              << std::setw(7) << r.input_dim << std::setw(7) << r.hidden
              << std::setw(4) << r.vec << std::setw(12) << r.blocks.w_ih
              << std::setw(12) << r.blocks.w_hh << std::setw(10)
              << r.blocks.w_ch << std::setw(8) << r.blocks.bias << std::setw(8)
              << r.blocks.layernorm << std::setw(13) << r.blocks.total()
              << "\n";
  }
  std::cout << "\n";
  std::cout << "encoder params:    " << rep.encoder_total << " ("
            << fmt_m(rep.encoder_total) << ")\n";
  std::cout << "prediction params: " << rep.prediction_total << " ("
            << fmt_m(rep.prediction_total) << ")\n";
  std::cout << "embedding params:  " << rep.embedding_total << " ("
            << fmt_m(rep.embedding_total) << ")\n";
  std::cout << "joint params:      " << rep.joint_total << " ("
            << fmt_m(rep.joint_total) << ")\n";
  std::cout << "decoder params:    " << rep.decoder_total() << " ("
            << fmt_m(rep.decoder_total()) << ")\n";
  std::cout << "network params:    " << rep.network_total() << " ("
            << fmt_m(rep.network_total()) << ")\n";

  const SpecMeta& meta = vs.spec().meta;
  if (!meta.assumptions.empty()) {
    std::cout << "\nassumptions:\n";
    for (const std::string& a : meta.assumptions)
      std::cout << "  - " << a << "\n";
  }
  if (meta.published_network_m || meta.published_encoder_m) {
    std::cout << "\n";
    if (meta.published_encoder_m) {
      const i64 pub = static_cast<i64>(std::llround(*meta.published_encoder_m * 1e6));
      std::cout << "published encoder total: " << pub << " ("
                << fmt_m(pub) << "); modeled covers "
                << fmt2(100.0 * static_cast<double>(rep.encoder_total) /
                            static_cast<double>(pub),
                        1)
                << "%, unattributed " << pub - rep.encoder_total << "\n";
    }
    if (meta.published_network_m) {
      const i64 pub = static_cast<i64>(std::llround(*meta.published_network_m * 1e6));
      std::cout << "published network total: " << pub << " ("
                << fmt_m(pub) << "); modeled covers "
                << fmt2(100.0 * static_cast<double>(rep.network_total()) /
                            static_cast<double>(pub),
                        1)
                << "%, unattributed " << pub - rep.network_total() << "\n";
    }
  }
  return kExitOk;
}

// --------------------------------------------------------------- analyze --

int run_analyze(const std::string& config, const ScheduleFlags& sf,
                i64 frames, i64 symbols, bool symbols_set,
                const std::string& normalize, bool as_json, bool as_csv,
                bool no_header) {
  const ValidatedSpec vs = load_validated(config);
  const Schedule sched = sf.resolve();
  const i64 sym = symbols_set ? symbols : frames / vs.total_reduction();
  const CostReport rep = cost_report(vs, sched, frames, sym);

  json extra;
  std::string norm_text;
  if (!normalize.empty()) {
    const ValidatedSpec base = load_validated(normalize);
    const i64 bsym = symbols_set ? symbols : frames / base.total_reduction();
    const CostReport brep = cost_report(base, sched, frames, bsym);
    const double enc_ratio = rep.encoder.total_bytes_per_frame /
                             brep.encoder.total_bytes_per_frame;
    const double off_ratio = rep.offchip_bytes / brep.offchip_bytes;
    const double energy_ratio =
        rep.energy.total_pj() / brep.energy.total_pj();
    extra = {{"baseline", base.spec().meta.name},
             {"encoder_bytes_per_frame_ratio", enc_ratio},
             {"offchip_bytes_ratio", off_ratio},
             {"energy_ratio", energy_ratio}};
    std::ostringstream os;
    os << "normalized to " << base.spec().meta.name << ":\n"
       << "  encoder bytes/frame ratio: " << fmt2(enc_ratio, 5) << "\n"
       << "  utterance off-chip ratio:  " << fmt2(off_ratio, 5) << "\n"
       << "  utterance energy ratio:    " << fmt2(energy_ratio, 5) << "\n";
    norm_text = os.str();
  }

  if (as_json) {
    json j = report_json(rep);
    if (!extra.is_null()) j["normalized"] = extra;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  if (as_csv) {
    std::cout << report_csv(rep);
    return kExitOk;
  }
  print_header(no_header, "analyze");
  std::cout << report_table(rep);
  if (!norm_text.empty()) std::cout << "\n" << norm_text;
  return kExitOk;
}

// --------------------------------------------------------------- compare --

int run_compare(const std::string& config_a, const std::string& config_b,
                const ScheduleFlags& sf, i64 frames, i64 symbols,
                bool symbols_set, bool as_json, bool no_header) {
  const ValidatedSpec va = load_validated(config_a);
  const ValidatedSpec vb = load_validated(config_b);
  const Schedule sched = sf.resolve();
  const i64 sym_a = symbols_set ? symbols : frames / va.total_reduction();
  const i64 sym_b = symbols_set ? symbols : frames / vb.total_reduction();
  const CostReport ra = cost_report(va, sched, frames, sym_a);
  const CostReport rb = cost_report(vb, sched, frames, sym_b);
  const ParamReport pa = model_param_count(va);
  const ParamReport pb = model_param_count(vb);

  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  struct Line {
    const char* metric;
    double a, b;
    int prec;
  };
  const Line lines[] = {
      {"encoder params", static_cast<double>(pa.encoder_total),
       static_cast<double>(pb.encoder_total), 0},
      {"prediction params", static_cast<double>(pa.prediction_total),
       static_cast<double>(pb.prediction_total), 0},
      {"decoder params", static_cast<double>(pa.decoder_total()),
       static_cast<double>(pb.decoder_total()), 0},
      {"network params", static_cast<double>(pa.network_total()),
       static_cast<double>(pb.network_total()), 0},
      {"enc bytes/frame", ra.encoder.total_bytes_per_frame,
       rb.encoder.total_bytes_per_frame, 1},
      {"dec bytes/symbol", ra.decoder.bytes_per_symbol,
       rb.decoder.bytes_per_symbol, 1},
      {"utterance off-chip bytes", ra.offchip_bytes, rb.offchip_bytes, 1},
      {"utterance energy pJ", ra.energy.total_pj(), rb.energy.total_pj(), 1},
  };

  if (as_json) {
    json j;
    j["a"] = va.spec().meta.name;
    j["b"] = vb.spec().meta.name;
    json rows = json::array();
    for (const Line& l : lines)
      rows.push_back({{"metric", l.metric},
                      {"a", l.a},
                      {"b", l.b},
                      {"a_over_b", ratio(l.a, l.b)}});
    j["rows"] = rows;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  print_header(no_header, "compare");
  std::cout << "a: " << va.spec().meta.name << "  b: " << vb.spec().meta.name
            << "  (frames=" << frames << ")\n\n";
  std::cout << std::left << std::setw(26) << "metric" << std::right
            << std::setw(18) << "a" << std::setw(18) << "b" << std::setw(10)
            << "a/b" << "\n";
  for (const Line& l : lines)
    std::cout << std::left << std::setw(26) << l.metric << std::right
              << std::setw(18) << fmt2(l.a, l.prec) << std::setw(18)
              << fmt2(l.b, l.prec) << std::setw(10)
              << fmt2(ratio(l.a, l.b), 5) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- validate --

int run_validate(const std::string& config, const ScheduleFlags& sf,
                 i64 frames, i64 symbols, bool symbols_set,
                 i64 inject_mismatch, bool as_json, bool no_header) {
  const TransducerSpec spec = load_spec(config);
  const std::vector<Violation> violations = check_spec(spec);
  if (!violations.empty()) {
    if (as_json) {
      json j;
      j["config"] = spec.meta.name;
      j["valid"] = false;
      json v = json::array();
      for (const Violation& x : violations)
        v.push_back({{"code", to_string(x.code)},
                     {"where", x.where},
                     {"detail", x.detail}});
      j["violations"] = v;
      std::cout << j.dump(2) << "\n";
    } else {
      print_header(no_header, "validate");
      std::cout << "config: " << spec.meta.name << "\n";
      std::cout << format_violations(violations) << "\n";
      std::cout << "RESULT: FAIL (invalid model)\n";
    }
    return kExitFail;
  }

  const ValidatedSpec vs = validate_spec(spec);
  const Schedule sched = sf.resolve();
  const i64 sym = symbols_set ? symbols : frames / vs.total_reduction();
  AccessTrace trace = simulate_counts(vs, sched, frames, sym);
  if (inject_mismatch != 0 && !trace.block_bytes.empty()) {
    trace.block_bytes.begin()->second += inject_mismatch;
    trace.offchip_total += inject_mismatch;
  }
  const ReconcileResult rec = reconcile(vs, sched, trace, frames, sym);

  if (as_json) {
    json j;
    j["config"] = vs.spec().meta.name;
    j["valid"] = true;
    j["frames"] = frames;
    j["symbols"] = sym;
    j["partial_batch"] = rec.partial_batch;
    json blocks = json::array();
    for (const BlockDiff& d : rec.diffs)
      blocks.push_back({{"block", to_string(d.block)},
                        {"analytical", d.analytical},
                        {"traced", d.traced},
                        {"diff", d.diff},
                        {"bound", d.bound}});
    j["blocks"] = blocks;
    j["analytical_total"] = rec.analytical_total;
    j["traced_total"] = rec.traced_total;
    j["pass"] = rec.pass;
    std::cout << j.dump(2) << "\n";
    return rec.pass ? kExitOk : kExitFail;
  }

  print_header(no_header, "validate");
  std::cout << "config: " << vs.spec().meta.name << " frames=" << frames
            << " symbols=" << sym
            << (rec.partial_batch ? " (partial batches)" : " (batch aligned)")
            << "\n\n";
  std::cout << std::left << std::setw(20) << "block" << std::right
            << std::setw(18) << "analytical" << std::setw(18) << "traced"
            << std::setw(14) << "diff" << "\n";
  for (const BlockDiff& d : rec.diffs)
    std::cout << std::left << std::setw(20) << to_string(d.block) << std::right
              << std::setw(18) << fmt2(d.analytical, 1) << std::setw(18)
              << d.traced << std::setw(14) << fmt2(d.diff, 1) << "\n";
  std::cout << "\ntotal: analytical=" << fmt2(rec.analytical_total, 1)
            << " traced=" << rec.traced_total << "\n";
  std::cout << "RESULT: " << (rec.pass ? "PASS" : "FAIL")
            << " (simulator vs analytical model"
            << (rec.partial_batch ? ", partial-batch tolerance" : ", exact")
            << ")\n";
  return rec.pass ? kExitOk : kExitFail;
}

// ----------------------------------------------------------------- sweep --

int run_sweep(const std::string& config, const std::string& points,
              double bpp, bool as_json, bool no_header) {
  const ValidatedSpec vs = load_validated(config);
  std::vector<DesignPoint> pts;
  if (points == "preset") {
    pts = cross();
  } else if (points == "grid") {
    const i64 batches[] = {1, 8, 32};
    const i64 buffers[] = {0, 500000, 2000000};
    for (i64 b : batches)
      for (i64 w : buffers) {
        std::ostringstream name;
        name << "B" << b << "+" << w / 1000 << "Kp";
        pts.push_back({name.str(), b, w});
      }
  } else {
    std::cerr << "unknown --points value: " << points
              << " (expected preset or grid)\n";
    return kExitUsage;
  }

  struct Row {
    std::string name;
    i64 batch, buffer_bytes;
    double offchip_frame, dec_symbol;
    i64 pinned, layers;
  };
  std::vector<Row> rows;
  for (const DesignPoint& p : pts) {
    const Schedule s = to_schedule(p, bpp);
    const EncoderAccess enc = encoder_access(vs, s);
    const DecoderAccess dec = decoder_access(vs, s);
    Row r;
    r.name = p.name;
    r.batch = s.batch_factor;
    r.buffer_bytes = s.buffer_bytes;
    r.offchip_frame = enc.total_bytes_per_frame;
    r.dec_symbol = dec.bytes_per_symbol;
    r.layers = static_cast<i64>(enc.layers.size());
    r.pinned = 0;
    for (const LayerCost& lc : enc.layers)
      if (lc.pinned && lc.working_set_bytes > 0) ++r.pinned;
    rows.push_back(std::move(r));
  }

  if (as_json) {
    json j = json::array();
    for (const Row& r : rows)
      j.push_back({{"point", r.name},
                   {"batch", r.batch},
                   {"buffer_bytes", r.buffer_bytes},
                   {"offchip_bytes_per_frame", r.offchip_frame},
                   {"decoder_bytes_per_symbol", r.dec_symbol},
                   {"pinned_layers", r.pinned},
                   {"total_layers", r.layers}});
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  print_header(no_header, "sweep");
  std::cout << "point,batch,buffer_bytes,offchip_bytes_per_frame,"
               "decoder_bytes_per_symbol,pinned_layers,total_layers\n";
  for (const Row& r : rows)
    std::cout << r.name << "," << r.batch << "," << r.buffer_bytes << ","
              << fmt2(r.offchip_frame, 6) << "," << fmt2(r.dec_symbol, 6)
              << "," << r.pinned << "," << r.layers << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- whatif-tr --

int run_whatif(const std::string& config, i64 factor, const ScheduleFlags& sf,
               bool as_json, bool no_header) {
  TransducerSpec spec = load_spec(config);
  if (spec.reductions.empty()) {
    std::cerr << "config has no time reductions to change\n";
    return kExitUsage;
  }
  for (const TimeReductionSpec& r : spec.reductions)
    if (r.mode != ReductionMode::MEAN) {
      std::cerr << "whatif-tr only applies to MEAN reductions; "
                   "this config uses "
                << to_string(r.mode) << "\n";
      return kExitUsage;
    }

  const ValidatedSpec before = validate_spec(spec);
  TransducerSpec changed = spec;
  for (TimeReductionSpec& r : changed.reductions) r.factor = factor;
  const ValidatedSpec after = validate_spec(changed);

  const Schedule sched = sf.resolve();
  const double b0 = encoder_access(before, sched).total_bytes_per_frame;
  const double b1 = encoder_access(after, sched).total_bytes_per_frame;
  const double drop = 100.0 * (b0 - b1) / b0;

  if (as_json) {
    json j;
    j["config"] = spec.meta.name;
    j["factor_before"] = json::array();
    for (const TimeReductionSpec& r : spec.reductions)
      j["factor_before"].push_back(r.factor);
    j["factor_after"] = factor;
    j["encoder_bytes_per_frame_before"] = b0;
    j["encoder_bytes_per_frame_after"] = b1;
    j["reduction_percent"] = drop;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }

  print_header(no_header, "whatif-tr");
  std::cout << "config: " << spec.meta.name << "\n";
  std::cout << "schedule: B=" << sched.batch_factor
            << " buffer=" << sched.buffer_bytes << "B bpp=" << sf.bpp << "\n";
  std::cout << "encoder bytes/frame before: " << fmt2(b0, 1) << "\n";
  std::cout << "encoder bytes/frame after:  " << fmt2(b1, 1) << " (factor "
            << factor << ")\n";
  std::cout << "off-chip reduction: " << fmt2(drop, 1) << "%\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"off-chip weight traffic model for streaming transducers"};
  app.require_subcommand(1);

  bool no_header = false;
  app.add_flag("--no-header", no_header,
               "omit the timestamped header line from text output");

  // params
  auto* params = app.add_subcommand(
      "params", "per-layer parameter blocks and model totals");

  std::string params_config;
  bool params_json_flag = false;
  params->add_option("config", params_config, "model config JSON")->required();
  params->add_flag("--json", params_json_flag, "JSON output");

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "off-chip bytes, compute, and energy under a schedule");

  std::string analyze_config, analyze_normalize;
  ScheduleFlags analyze_sf;
  i64 analyze_frames = 1000, analyze_symbols = 0;
  bool analyze_json = false, analyze_csv = false;
  analyze->add_option("config", analyze_config, "model config JSON")
      ->required();
  add_schedule_flags(analyze, analyze_sf);
  analyze->add_option("--frames", analyze_frames, "utterance frames")
      ->check(CLI::NonNegativeNumber);
  auto* sym_opt = analyze->add_option(
      "--symbols", analyze_symbols,
      "decoded symbols (default frames / total reduction)");
  analyze->add_option("--normalize", analyze_normalize,
                      "baseline config for ratio lines");
  analyze->add_flag("--json", analyze_json, "JSON output");
  analyze->add_flag("--csv", analyze_csv, "per-layer CSV output");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "side-by-side costs for two configs on one schedule");

  std::string cmp_a, cmp_b;
  ScheduleFlags cmp_sf;
  i64 cmp_frames = 1000, cmp_symbols = 0;
  bool cmp_json = false;
  compare->add_option("config_a", cmp_a, "first model config")->required();
  compare->add_option("config_b", cmp_b, "second model config")->required();
  add_schedule_flags(compare, cmp_sf);
  compare->add_option("--frames", cmp_frames, "utterance frames")
      ->check(CLI::NonNegativeNumber);
  auto* cmp_sym_opt =
      compare->add_option("--symbols", cmp_symbols, "decoded symbols");
  compare->add_flag("--json", cmp_json, "JSON output");

  // validate
  auto* validate = app.add_subcommand(
      "validate",
      "check the config and reconcile the simulator with the model");

  std::string val_config;
  ScheduleFlags val_sf;
  i64 val_frames = 1024, val_symbols = 0, val_inject = 0;
  bool val_json = false;
  validate->add_option("config", val_config, "model config JSON")->required();
  add_schedule_flags(validate, val_sf);
  validate->add_option("--frames", val_frames, "utterance frames")
      ->check(CLI::NonNegativeNumber);
  auto* val_sym_opt =
      validate->add_option("--symbols", val_symbols, "decoded symbols");
  validate
      ->add_option("--inject-mismatch", val_inject,
                   "perturb the trace by N bytes (reconciliation test)")
      ->group("");  // hidden
  validate->add_flag("--json", val_json, "JSON output");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "evaluate batching/buffer design points (CSV)");

  std::string sweep_config, sweep_points = "preset";
  double sweep_bpp = 1.0;
  bool sweep_json = false;
  sweep->add_option("config", sweep_config, "model config JSON")->required();
  sweep->add_option("--points", sweep_points, "preset | grid");
  sweep->add_option("--bpp", sweep_bpp, "bytes per parameter")
      ->check(CLI::PositiveNumber);
  sweep->add_flag("--json", sweep_json, "JSON output");

  // whatif-tr
  auto* whatif = app.add_subcommand(
      "whatif-tr", "change every MEAN time reduction factor and recost");

  std::string whatif_config;
  i64 whatif_factor = 4;
  ScheduleFlags whatif_sf;
  whatif_sf.batch = 8;
  whatif_sf.buffer = "512KiB";
  bool whatif_json = false;
  whatif->add_option("config", whatif_config, "model config JSON")->required();
  whatif->add_option("--factor", whatif_factor, "new reduction factor")
      ->check(CLI::Range(static_cast<i64>(2), static_cast<i64>(64)));
  add_schedule_flags(whatif, whatif_sf);
  whatif->add_flag("--json", whatif_json, "JSON output");

  // lets the global --no-header flag appear after a subcommand name
  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (params->parsed())
      return run_params(params_config, params_json_flag, no_header);
    if (analyze->parsed())
      return run_analyze(analyze_config, analyze_sf, analyze_frames,
                         analyze_symbols, sym_opt->count() > 0,
                         analyze_normalize, analyze_json, analyze_csv,
                         no_header);
    if (compare->parsed())
      return run_compare(cmp_a, cmp_b, cmp_sf, cmp_frames, cmp_symbols,
                         cmp_sym_opt->count() > 0, cmp_json, no_header);
    if (validate->parsed())
      return run_validate(val_config, val_sf, val_frames, val_symbols,
                          val_sym_opt->count() > 0, val_inject, val_json,
                          no_header);
    if (sweep->parsed())
      return run_sweep(sweep_config, sweep_points, sweep_bpp, sweep_json,
                       no_header);
    if (whatif->parsed())
      return run_whatif(whatif_config, whatif_factor, whatif_sf, whatif_json,
                        no_header);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
