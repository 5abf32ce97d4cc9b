// Acceptance gate: eight numbered checks, one verdict line each, exit code
// equal to the number of failed checks. Supplementary measurements print
// indented under their verdict so the log doubles as a results table.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rnnt/cells.hpp"
#include "rnnt/config_io.hpp"
#include "rnnt/memsim.hpp"
#include "rnnt/scheduler.hpp"

#ifndef RNNTCOST_CONFIG_DIR
#error "RNNTCOST_CONFIG_DIR must point at the fixture directory"
#endif

using namespace rnnt;

namespace {

int failures = 0;

void verdict(int n, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %d — %s\n", ok ? "PASS" : "FAIL", n,
              detail.c_str());
  if (!ok) ++failures;
}

void note(const std::string& line) { std::printf("       %s\n", line.c_str()); }

std::string fixture(const char* name) {
  return std::string(RNNTCOST_CONFIG_DIR) + "/" + name;
}

ValidatedSpec load_fixture(const char* name) {
  return validate_spec(load_spec(fixture(name)));
}

std::string fmt(double v, int prec = 5) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

// ------------------------------------------------- random legal model specs

struct RandomCase {
  TransducerSpec spec;
  Schedule sched;
  i64 frames = 0;
  i64 symbols = 0;
};

LayerSpec random_layer(Rng& rng, i64 width_in) {
  static const Kind kinds[] = {Kind::LSTM,      Kind::LSTM_R, Kind::CIFG_R,
                               Kind::IS_CIFG_R, Kind::SRU,    Kind::IS_2D_CIFG_R};
  LayerSpec l;
  l.kind = kinds[rng.next_u64() % 6];
  l.hidden = 16 + static_cast<i64>(rng.next_u64() % 1009);  // 16..1024
  if (l.kind == Kind::SRU) l.hidden = width_in;
  if (l.kind == Kind::IS_2D_CIFG_R) l.vec = 2 + static_cast<i64>(rng.next_u64() % 2);
  if (l.kind == Kind::IS_CIFG_R || l.kind == Kind::IS_2D_CIFG_R)
    l.internally_stacked = true;

  const bool wch = l.has_wch();
  const bool no_full = wch || l.kind == Kind::SRU;
  switch (rng.next_u64() % 3) {
    case 0: l.layernorm = LayerNormMode::NONE; break;
    case 1: l.layernorm = LayerNormMode::CELL_ONLY; break;
    default:
      l.layernorm = no_full ? LayerNormMode::CELL_ONLY : LayerNormMode::FULL;
  }
  if (width_in == l.out_dim() && rng.next_u64() % 2) l.residual = true;
  return l;
}

RandomCase random_case(Rng& rng) {
  RandomCase rc;
  TransducerSpec& s = rc.spec;
  s.feature_dim = 16 + static_cast<i64>(rng.next_u64() % 113);
  const i64 depth = 1 + static_cast<i64>(rng.next_u64() % 12);

  const i64 n_red = static_cast<i64>(rng.next_u64() % 3);
  std::vector<TimeReductionSpec> reds;
  for (i64 k = 0; k < n_red; ++k) {
    TimeReductionSpec r;
    r.mode = rng.next_u64() % 2 ? ReductionMode::CONCAT : ReductionMode::MEAN;
    r.factor = 2 + static_cast<i64>(rng.next_u64() % 3);
    r.position = static_cast<i64>(rng.next_u64() % static_cast<std::uint64_t>(depth));
    bool dup = false;
    for (const auto& prev : reds) dup |= prev.position == r.position;
    if (!dup) reds.push_back(r);
  }
  s.reductions = reds;

  i64 width = s.feature_dim;
  i64 total_r = 1;
  for (i64 i = 0; i < depth; ++i) {
    for (const auto& r : reds)
      if (r.position == i) {
        total_r *= r.factor;
        if (r.mode == ReductionMode::CONCAT) width *= r.factor;
      }
    LayerSpec l = random_layer(rng, width);
    width = l.out_dim();
    s.encoder.push_back(l);
  }

  if (rng.next_u64() % 2) {
    const i64 pred_depth = 1 + static_cast<i64>(rng.next_u64() % 2);
    for (i64 i = 0; i < pred_depth; ++i) {
      LayerSpec p;
      p.kind = rng.next_u64() % 2 ? Kind::LSTM : Kind::CIFG_R;
      p.hidden = 8 + static_cast<i64>(rng.next_u64() % 57);
      s.prediction.push_back(p);
    }
    s.embed_dim = 8 + static_cast<i64>(rng.next_u64() % 57);
    s.joint_dim = 8 + static_cast<i64>(rng.next_u64() % 57);
    s.vocab = 16 + static_cast<i64>(rng.next_u64() % 241);
    rc.symbols = static_cast<i64>(rng.next_u64() % 65);
  }

  static const i64 batches[] = {1, 8, 32};
  static const i64 buffers[] = {0, 500'000, 2'000'000};
  rc.sched.batch_factor = batches[rng.next_u64() % 3];
  rc.sched.bytes_per_param = rng.next_u64() % 2 ? 1.0 : 4.0;
  rc.sched.buffer_bytes =
      block_bytes(buffers[rng.next_u64() % 3], rc.sched.bytes_per_param);
  rc.sched.decoder_reuse = 1;  // streaming
  rc.frames = rc.sched.batch_factor * total_r *
              (1 + static_cast<i64>(rng.next_u64() % 3));
  return rc;
}

// ---------------------------------------- scalar oracle for cell semantics

namespace oracle {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> norm(const std::vector<double>& x,
                         const std::vector<double>& gain,
                         const std::vector<double>& bias, double eps) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (std::size_t k = x.size(); k-- > 0;) mean += x[k];
  mean /= n;
  double var = 0.0;
  for (std::size_t k = x.size(); k-- > 0;) var += (x[k] - mean) * (x[k] - mean);
  var /= n;
  std::vector<double> y(x.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    y[k] = gain[k] * (x[k] - mean) / std::sqrt(var + eps) + bias[k];
  return y;
}

std::vector<double> step(const LayerSpec& l, const CellWeights& w,
                         std::vector<double>& hs, std::vector<double>& cs,
                         const std::vector<double>& x) {
  const int H = static_cast<int>(l.hidden);
  const int V = static_cast<int>(l.vec);
  if (l.kind == Kind::SRU) {
    std::vector<double> z(static_cast<std::size_t>(3 * H), 0.0);
    for (int r = 0; r < 3 * H; ++r) {
      double acc = 0.0;
      for (int k = H; k-- > 0;) acc += w.w_ih(r, k) * x[k];
      z[r] = acc;
    }
    std::vector<double> h(H);
    for (int i = 0; i < H; ++i) {
      const double f = sig(z[H + i] + w.bias[i]);
      const double r = sig(z[2 * H + i] + w.bias[H + i]);
      cs[i] = f * cs[i] + (1.0 - f) * z[i];
      h[i] = r * std::tanh(cs[i]) + (1.0 - r) * x[i];
    }
    hs = h;
    return h;
  }

  const int G = static_cast<int>(gate_count(l.kind));
  const bool coupled = G == 3;
  const bool wch = l.has_wch();
  const int cell_len = H * V;

  std::vector<double> z(static_cast<std::size_t>(G * H), 0.0);
  for (int r = 0; r < G * H; ++r) {
    double acc = w.bias[r];
    for (int k = static_cast<int>(x.size()); k-- > 0;)
      acc += w.w_ih(r, k) * x[k];
    for (int k = cell_len; k-- > 0;) acc += w.w_hh(r, k) * hs[k];
    z[r] = acc;
  }
  if (l.layernorm == LayerNormMode::FULL)
    z = norm(z, w.ln_preact->gain, w.ln_preact->bias, w.ln_eps);

  std::vector<double> f(H), ig(H), o(H), cpre(H);
  for (int i = 0; i < H; ++i) {
    f[i] = sig(z[i]);
    if (coupled) {
      ig[i] = 1.0 - f[i];
      cpre[i] = z[H + i];
      o[i] = sig(z[2 * H + i]);
    } else {
      ig[i] = sig(z[H + i]);
      cpre[i] = z[2 * H + i];
      o[i] = sig(z[3 * H + i]);
    }
  }

  std::vector<double> q;
  if (wch) {
    q.assign(cell_len, 0.0);
    for (int r = 0; r < cell_len; ++r) {
      double acc = 0.0;
      for (int k = H; k-- > 0;) acc += (*w.w_ch)(r, k) * cpre[k];
      q[r] = acc;
    }
  } else {
    q = cpre;
  }
  if (l.layernorm == LayerNormMode::CELL_ONLY)
    q = norm(q, w.ln_candidate->gain, w.ln_candidate->bias, w.ln_eps);

  std::vector<double> u(cell_len);
  for (int j = 0; j < V; ++j)
    for (int i = 0; i < H; ++i)
      u[j * H + i] = f[i] * cs[j * H + i] + ig[i] * std::tanh(q[j * H + i]);
  if (l.layernorm != LayerNormMode::NONE)
    u = norm(u, w.ln_cell->gain, w.ln_cell->bias, w.ln_eps);

  std::vector<double> h(cell_len);
  for (int j = 0; j < V; ++j)
    for (int i = 0; i < H; ++i) h[j * H + i] = o[i] * std::tanh(u[j * H + i]);
  cs = u;
  hs = h;
  return h;
}

}  // namespace oracle

bool close_1e12(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = 1.0 + std::max(std::abs(a[k]), std::abs(b[k]));
    if (std::abs(a[k] - b[k]) > 1e-12 * scale) return false;
  }
  return true;
}

bool bitwise(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Vec random_vec(i64 n, Rng& rng) {
  Vec x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform(-1.5, 1.5);
  return x;
}

Mat identity(i64 n) {
  Mat m(n, n);
  for (i64 i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

// ----------------------------------------------------------- the criteria

// Traced off-chip bytes must equal the analytical closed form with integer
// exactness, per parameter block, across a randomized model family.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(20260818);
  int checked = 0, mismatched = 0;
  i64 blocks = 0;
  for (int n = 0; n < 200; ++n) {
    const RandomCase rc = random_case(rng);
    const ValidatedSpec vs = validate_spec(rc.spec);
    const auto expected =
        utterance_block_bytes(vs, rc.sched, rc.frames, rc.symbols);
    const auto traced =
        simulate_counts(vs, rc.sched, rc.frames, rc.symbols).block_bytes;
    if (expected != traced) ++mismatched;
    blocks += static_cast<i64>(expected.size());
    ++checked;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const bool ok = checked == 200 && mismatched == 0 && blocks > 1000 &&
                  secs < 60.0;
  std::ostringstream d;
  d << checked << " random models, " << blocks
    << " parameter blocks reconciled byte-exactly in " << fmt(secs, 2) << "s";
  if (mismatched) d << "; " << mismatched << " mismatched";
  verdict(1, ok, d.str());
}

// Batching 8 steps against a pinned recurrent block must divide off-chip
// traffic by exactly 8 on that block, and 8x overall for a single cell.
void criterion_2() {
  TransducerSpec s;
  s.feature_dim = 640;
  LayerSpec l;
  l.kind = Kind::LSTM;
  l.hidden = 640;
  s.encoder = {l};
  const ValidatedSpec vs = validate_spec(s);
  const i64 ws = working_set(l, 1.0);

  Schedule b1;  // stream everything one step at a time
  Schedule b8;
  b8.batch_factor = 8;
  b8.buffer_bytes = ws;

  const i64 frames = 64;  // aligned for both schedules
  const auto m1 = utterance_block_bytes(vs, b1, frames, 0);
  const auto m8 = utterance_block_bytes(vs, b8, frames, 0);
  const i64 rec1 = m1.at({BlockPart::ENC_RECURRENT, 0});
  const i64 rec8 = m8.at({BlockPart::ENC_RECURRENT, 0});
  i64 tot1 = 0, tot8 = 0;
  for (const auto& [id, b] : m1) tot1 += b;
  for (const auto& [id, b] : m8) tot8 += b;

  const bool exact = rec1 == 8 * rec8;
  const double overall = static_cast<double>(tot1) / static_cast<double>(tot8);
  const bool ok = exact && overall > 7.99 && overall < 8.01;
  verdict(2, ok,
          "recurrent block " + std::to_string(rec1) + " -> " +
              std::to_string(rec8) + " bytes (exactly 8x: " +
              (exact ? "yes" : "NO") + "), overall " + fmt(overall, 3) + "x");
}

// Derived parameter counts, compared as encoder ratios against the
// published-total windows carried in the fixtures.
void criterion_3() {
  struct Row {
    const char* file;
    i64 encoder = 0, network = 0;
    i64 pub_encoder = 0, pub_network = 0;
  };
  std::map<std::string, Row> rows;
  for (const char* f :
       {"B.json", "E1.json", "E3.json", "E4.json", "E7.json"}) {
    const ValidatedSpec vs = load_fixture(f);
    Row r;
    r.file = f;
    const ParamReport pr = model_param_count(vs);
    r.encoder = pr.encoder_total;
    r.network = pr.network_total();
    r.pub_encoder =
        std::llround(*vs.spec().meta.published_encoder_m * 1e6);
    r.pub_network =
        std::llround(*vs.spec().meta.published_network_m * 1e6);
    rows[vs.spec().meta.name] = r;
  }

  struct Window {
    const char* label;
    double measured, published, lo, hi;
    bool ok() const { return measured >= lo && measured <= hi; }
  };
  auto enc_ratio = [&](const char* a, const char* b) {
    return static_cast<double>(rows[a].encoder) /
           static_cast<double>(rows[b].encoder);
  };
  auto pub_ratio = [&](const char* a, const char* b) {
    return static_cast<double>(rows[a].pub_encoder) /
           static_cast<double>(rows[b].pub_encoder);
  };
  const Window windows[] = {
      {"E1/B", enc_ratio("E1", "B"), pub_ratio("E1", "B"), 0.85, 0.95},
      {"E4/E3", enc_ratio("E4", "E3"), pub_ratio("E4", "E3"), 0.78, 0.88},
      {"E7/B", enc_ratio("E7", "B"), pub_ratio("E7", "B"), 0.35, 0.45},
  };

  bool ok = true;
  std::ostringstream d;
  for (const Window& w : windows) {
    ok = ok && w.ok();
    if (d.tellp() > 0) d << "; ";
    d << w.label << " " << fmt(w.measured, 4) << (w.ok() ? " in [" : " OUTSIDE [")
      << fmt(w.lo, 2) << "," << fmt(w.hi, 2) << "]";
  }
  verdict(3, ok, "encoder parameter ratios: " + d.str());
  for (const auto& [name, r] : rows)
    note("params " + name + ": encoder " + std::to_string(r.encoder) +
         " (published " + std::to_string(r.pub_encoder) + ", unattributed " +
         std::to_string(r.pub_encoder - r.encoder) + "), network " +
         std::to_string(r.network) + " (published " +
         std::to_string(r.pub_network) + ", unattributed " +
         std::to_string(r.pub_network - r.network) + ")");
  for (const Window& w : windows)
    note("encoder ratio " + std::string(w.label) + ": measured " +
         fmt(w.measured, 4) + ", published " + fmt(w.published, 4) +
         ", window [" + fmt(w.lo, 2) + "," + fmt(w.hi, 2) + "]");
  auto net_ratio = [&](const char* a, const char* b) {
    return static_cast<double>(rows[a].network) /
           static_cast<double>(rows[b].network);
  };
  note("network ratios (informative, not asserted): E1/B " +
       fmt(net_ratio("E1", "B"), 4) + ", E4/E3 " +
       fmt(net_ratio("E4", "E3"), 4) + ", E7/B " +
       fmt(net_ratio("E7", "B"), 4));
  note("reading: the modeled blocks track the published deltas at network");
  note("scale, but the published encoder totals embed components outside");
  note("the declared breakdown, which shifts encoder-only ratios downward.");
}

// Utterance off-chip cost ratios under the shared deployment schedule.
void criterion_4() {
  Schedule sc;
  sc.batch_factor = 8;
  sc.buffer_bytes = 512 * 1024;
  const i64 frames = 1000;

  auto offchip = [&](const char* f) {
    const ValidatedSpec vs = load_fixture(f);
    const i64 symbols = frames / vs.total_reduction();
    return cost_report(vs, sc, frames, symbols).offchip_bytes;
  };
  const double b = offchip("B.json");
  const double e3 = offchip("E3.json") / b;
  const double e7 = offchip("E7.json") / b;
  const bool ok = e3 >= 0.45 && e3 <= 0.70 && e7 >= 0.15 && e7 <= 0.35;
  verdict(4, ok,
          "off-chip byte ratios at B=8, 512KiB: E3/B " + fmt(e3, 5) +
              " (published 0.57, window [0.45,0.70]); E7/B " + fmt(e7, 5) +
              " (published 0.22, window [0.15,0.35])");
}

// Retuning the averaging reductions from factor 2 to 4 after weights are
// fixed must cut encoder traffic by more than a fifth, with the same
// weights accepted at both settings.
void criterion_5() {
  const TransducerSpec base = load_spec(fixture("E1.json"));
  TransducerSpec retuned = base;
  for (auto& r : retuned.reductions) {
    if (r.mode != ReductionMode::MEAN) {
      verdict(5, false, "fixture unexpectedly uses non-averaging reductions");
      return;
    }
    r.factor = 4;
  }
  const ValidatedSpec v2 = validate_spec(base);
  const ValidatedSpec v4 = validate_spec(retuned);

  Schedule sc;
  sc.batch_factor = 8;
  sc.buffer_bytes = 512 * 1024;
  const double before = encoder_access(v2, sc).total_bytes_per_frame;
  const double after = encoder_access(v4, sc).total_bytes_per_frame;
  const double cut = 1.0 - after / before;

  // The averaging keeps every layer width, so one set of weights must run
  // under both reduction settings.
  bool shapes_ok = true;
  try {
    const ModelWeights w = make_model_weights(v2, 17);
    std::vector<Vec> frames;
    Rng rng(71);
    for (int t = 0; t < 16; ++t)
      frames.push_back(random_vec(base.feature_dim, rng));
    const auto out2 = encoder_forward(v2, w.encoder, frames);
    const auto out4 = encoder_forward(v4, w.encoder, frames);
    shapes_ok = !out2.empty() && !out4.empty() &&
                out4.size() < out2.size();  // deeper reduction, fewer frames
  } catch (const std::exception&) {
    shapes_ok = false;
  }

  const bool ok = cut > 0.20 && shapes_ok;
  verdict(5, ok,
          "factor 2->4 cuts encoder bytes/frame " + fmt(before, 1) + " -> " +
              fmt(after, 1) + " (" + fmt(cut * 100.0, 1) +
              "%); shared weights accepted at both factors: " +
              (shapes_ok ? "yes" : "NO"));
}

// Condensed numerics: oracle agreement, gate algebra, normalization
// moments, collapse identities, flatten round trip, determinism.
void criterion_6() {
  Rng rng(0xace5);
  std::string fail;

  // scalar oracle, 50 instances per cell kind, a few steps each
  struct VariantPick {
    Kind kind;
    LayerNormMode ln;
    i64 vec;
  };
  const VariantPick picks[] = {
      {Kind::LSTM, LayerNormMode::FULL, 1},
      {Kind::LSTM_R, LayerNormMode::CELL_ONLY, 1},
      {Kind::CIFG_R, LayerNormMode::FULL, 1},
      {Kind::IS_CIFG_R, LayerNormMode::CELL_ONLY, 1},
      {Kind::IS_2D_CIFG_R, LayerNormMode::CELL_ONLY, 2},
      {Kind::SRU, LayerNormMode::NONE, 1},
  };
  for (const VariantPick& p : picks) {
    for (int inst = 0; inst < 50 && fail.empty(); ++inst) {
      const i64 h = 1 + static_cast<i64>(rng.next_u64() % 6);
      const i64 d = 1 + static_cast<i64>(rng.next_u64() % 8);
      LayerSpec l;
      l.kind = p.kind;
      l.hidden = h;
      l.vec = p.vec;
      l.input_dim = p.kind == Kind::SRU ? h : d;
      l.layernorm = p.ln;
      if (p.kind == Kind::IS_CIFG_R || p.kind == Kind::IS_2D_CIFG_R)
        l.internally_stacked = true;
      CellWeights w = make_cell_weights(l, rng);
      CellState st = zero_state(l);
      std::vector<double> oh(st.h.begin(), st.h.end());
      std::vector<double> oc(st.c.begin(), st.c.end());
      for (int t = 0; t < 3; ++t) {
        const Vec x = random_vec(l.input_dim, rng);
        const Vec got = cell_step(l, w, st, x);
        if (!close_1e12(got, oracle::step(l, w, oh, oc, x)) ||
            !close_1e12(st.c, oc))
          fail = std::string("oracle disagreement on ") + to_string(p.kind);
      }
    }
  }

  // gate range and exact gate coupling
  if (fail.empty()) {
    LayerSpec l;
    l.kind = Kind::CIFG_R;
    l.hidden = 6;
    l.input_dim = 5;
    const CellWeights w = make_cell_weights(l, rng);
    CellState st = zero_state(l);
    StepDebug dbg;
    for (int t = 0; t < 6 && fail.empty(); ++t) {
      cell_step(l, w, st, random_vec(5, rng), &dbg);
      for (std::size_t i = 0; i < dbg.f.size(); ++i) {
        if (!(dbg.f[i] > 0.0 && dbg.f[i] < 1.0 && dbg.o[i] > 0.0 &&
              dbg.o[i] < 1.0))
          fail = "gate left the open unit interval";
        if (dbg.f[i] + dbg.i[i] != 1.0) fail = "coupled gates do not sum to 1";
      }
    }
  }

  // normalization moments
  if (fail.empty()) {
    const Vec y = layer_norm(random_vec(64, rng), Vec(64, 1.0), Vec(64, 0.0), 0.0);
    double mean = 0.0, var = 0.0;
    for (double v : y) mean += v;
    mean /= 64.0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= 64.0;
    if (std::abs(mean) > 1e-9 || std::abs(var - 1.0) > 1e-9)
      fail = "normalization moments off";
  }

  // collapse identities at W_ch = I and V = 1
  if (fail.empty()) {
    LayerSpec l;
    l.kind = Kind::LSTM;
    l.hidden = 5;
    l.input_dim = 7;
    l.layernorm = LayerNormMode::CELL_ONLY;
    CellWeights w = make_cell_weights(l, rng);
    CellWeights wid = w;
    wid.w_ch = identity(5);
    CellState sa = zero_state(l), sb = zero_state(l);
    const Vec x = random_vec(7, rng);
    if (!close_1e12(is_step(wid, sa, x), lstm_step_cell_ln(w, sb, x)))
      fail = "stacking-matrix identity collapse broke";

    LayerSpec c;
    c.kind = Kind::CIFG_R;
    c.hidden = 4;
    c.input_dim = 6;
    c.layernorm = LayerNormMode::CELL_ONLY;
    CellWeights cw = make_cell_weights(c, rng);
    CellWeights cwid = cw;
    cwid.w_ch = identity(4);
    CellState sc1 = zero_state(c), sc2 = zero_state(c);
    const Vec cx = random_vec(6, rng);
    if (!close_1e12(cell2d_step(cwid, sc1, cx), cell_step(c, cw, sc2, cx)))
      fail = "single-column collapse broke";
  }

  // flatten round trip, bitwise
  if (fail.empty()) {
    const Vec flat = random_vec(15, rng);
    if (!bitwise(cell_from_mat(cell_to_mat(flat, 5, 3)), flat))
      fail = "state flatten round trip not bitwise";
  }

  // determinism of a full encoder run
  if (fail.empty()) {
    TransducerSpec s;
    s.feature_dim = 8;
    LayerSpec l;
    l.kind = Kind::LSTM;
    l.hidden = 8;
    l.layernorm = LayerNormMode::FULL;
    s.encoder = {l, l};
    const ValidatedSpec vs = validate_spec(s);
    const ModelWeights w = make_model_weights(vs, 4242);
    std::vector<Vec> frames;
    Rng frng(4243);
    for (int t = 0; t < 12; ++t) frames.push_back(random_vec(8, frng));
    const auto a = encoder_forward(vs, w.encoder, frames);
    const auto b = encoder_forward(vs, w.encoder, frames);
    for (std::size_t t = 0; t < a.size(); ++t)
      if (!bitwise(a[t], b[t])) fail = "repeated runs not bitwise identical";
  }

  verdict(6, fail.empty(),
          fail.empty()
              ? "oracle x6 kinds, gate algebra, normalization, collapses, "
                "round trip, determinism"
              : fail);
}

// More batching or more buffer never costs more, and each working-set
// threshold is exactly where pinning starts to pay.
void criterion_7() {
  Rng rng(777201);
  std::string fail;
  for (int n = 0; n < 25 && fail.empty(); ++n) {
    const RandomCase rc = random_case(rng);
    const ValidatedSpec vs = validate_spec(rc.spec);
    const double bpp = rc.sched.bytes_per_param;

    Schedule sc;
    sc.bytes_per_param = bpp;
    sc.buffer_bytes = rc.sched.buffer_bytes;
    double prev = -1.0;
    for (i64 b : {1, 2, 4, 8, 16, 32, 64}) {
      sc.batch_factor = b;
      const double cur = encoder_access(vs, sc).total_bytes_per_frame;
      if (prev >= 0.0 && cur > prev + 1e-9) fail = "cost rose with batch";
      prev = cur;
    }

    sc.batch_factor = 8;
    prev = -1.0;
    for (i64 buf : {0, 1'000, 10'000, 100'000, 1'000'000, 10'000'000,
                    100'000'000}) {
      sc.buffer_bytes = buf;
      const double cur = encoder_access(vs, sc).total_bytes_per_frame;
      if (prev >= 0.0 && cur > prev + 1e-9) fail = "cost rose with buffer";
      prev = cur;
    }

    // pinning thresholds: strictly cheaper at each distinct working set,
    // flat in between
    std::vector<i64> ws;
    for (const LayerSpec& l : vs.spec().encoder) {
      const i64 w = working_set(l, bpp);
      if (w > 0) ws.push_back(w);
    }
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    for (std::size_t k = 0; k < ws.size() && fail.empty(); ++k) {
      sc.buffer_bytes = ws[k];
      const double at = encoder_access(vs, sc).total_bytes_per_frame;
      sc.buffer_bytes = ws[k] - 1;
      const double under = encoder_access(vs, sc).total_bytes_per_frame;
      if (!(at < under)) fail = "no drop at a working-set threshold";
      if (k + 1 < ws.size()) {
        sc.buffer_bytes = ws[k + 1] - 1;
        const double plateau = encoder_access(vs, sc).total_bytes_per_frame;
        if (plateau != at) fail = "cost moved between thresholds";
      }
    }
  }
  verdict(7, fail.empty(),
          fail.empty() ? "25 random models: non-increasing in batch and "
                         "buffer; pinning steps exactly at working sets"
                       : fail);
}

// Under the default energy constants the baseline's execution must be
// dominated by off-chip access.
void criterion_8() {
  const ValidatedSpec vs = load_fixture("B.json");
  Schedule sc;
  sc.batch_factor = 8;
  sc.buffer_bytes = 512 * 1024;
  const CostReport r = cost_report(vs, sc, 1000, 250);
  const double frac = r.energy.offchip_fraction();
  verdict(8, frac > 0.5,
          "baseline off-chip energy fraction " + fmt(frac, 4) +
              " (> 0.5 required)");
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures;
}
