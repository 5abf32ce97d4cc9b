#include "rnnt/cells.hpp"

#include <cmath>
#include <string>

namespace rnnt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void require_ln(const std::optional<LnParams>& p, const char* which) {
  if (!p)
    throw Error(ErrorCode::SHAPE_MISMATCH,
                std::string("missing ") + which + " layer norm parameters");
}

struct CoreCfg {
  i64 gates;     // 4 or 3
  bool cifg;     // 3-gate coupling i = 1 - f
  bool use_wch;
  i64 h;
  i64 v;
  LayerNormMode ln;
};

Vec recurrent_core(const CoreCfg& cfg, const CellWeights& w, CellState& s,
                   const Vec& x, StepDebug* dbg, MacCounter* macs) {
  const i64 H = cfg.h, V = cfg.v, G = cfg.gates;
  const i64 cell_len = H * V;
  if (x.empty()) throw Error(ErrorCode::EMPTY_INPUT, "cell step input is empty");
  if (H < 1 || V < 1)
    throw Error(ErrorCode::SHAPE_MISMATCH, "cell dimensions must be positive");
  if (!cfg.use_wch && V != 1)
    throw Error(ErrorCode::SHAPE_MISMATCH, "V > 1 requires a W_ch matrix");
  if (w.w_ih.rows() != G * H)
    throw Error(ErrorCode::SHAPE_MISMATCH, "W_ih rows != G*H");
  if (w.w_ih.cols() != static_cast<i64>(x.size()))
    throw Error(ErrorCode::SHAPE_MISMATCH,
                "input length " + std::to_string(x.size()) +
                    " vs W_ih cols " + std::to_string(w.w_ih.cols()));
  if (w.w_hh.rows() != G * H || w.w_hh.cols() != cell_len)
    throw Error(ErrorCode::SHAPE_MISMATCH, "W_hh shape mismatch");
  if (w.bias.size() != static_cast<std::size_t>(G * H))
    throw Error(ErrorCode::SHAPE_MISMATCH, "bias length != G*H");
  if (s.h.size() != static_cast<std::size_t>(cell_len) ||
      s.c.size() != static_cast<std::size_t>(cell_len))
    throw Error(ErrorCode::SHAPE_MISMATCH, "state length != H*V");
  if (cfg.use_wch) {
    if (!w.w_ch) throw Error(ErrorCode::MISSING_WCH, "cell requires W_ch");
    if (w.w_ch->rows() != cell_len || w.w_ch->cols() != H)
      throw Error(ErrorCode::SHAPE_MISMATCH, "W_ch must be (H*V) x H");
  }
  require_finite(x, "cell step input");

  Vec z = matvec(w.w_ih, x, macs);
  matvec_add(w.w_hh, s.h, z, macs);
  for (i64 i = 0; i < G * H; ++i) z[static_cast<std::size_t>(i)] += w.bias[static_cast<std::size_t>(i)];

  if (cfg.ln == LayerNormMode::FULL) {
    require_ln(w.ln_preact, "pre-activation");
    z = layer_norm(z, w.ln_preact->gain, w.ln_preact->bias, w.ln_eps);
  }

  // Gate slices in stacking order.
  Vec f(static_cast<std::size_t>(H)), ig(static_cast<std::size_t>(H)),
      o(static_cast<std::size_t>(H));
  Vec cp(static_cast<std::size_t>(H));
  if (G == 4) {
    for (i64 i = 0; i < H; ++i) {
      f[i] = sigmoid(z[i]);
      ig[i] = sigmoid(z[H + i]);
      cp[i] = z[2 * H + i];
      o[i] = sigmoid(z[3 * H + i]);
    }
  } else {
    // 3-gate stacking couples the input gate to the forget gate.
    for (i64 i = 0; i < H; ++i) {
      f[i] = sigmoid(z[i]);
      cp[i] = z[H + i];
      o[i] = sigmoid(z[2 * H + i]);
      ig[i] = 1.0 - f[i];
    }
  }

  Vec q = cfg.use_wch ? matvec(*w.w_ch, cp, macs) : cp;
  if (cfg.ln == LayerNormMode::CELL_ONLY) {
    require_ln(w.ln_candidate, "candidate");
    q = layer_norm(q, w.ln_candidate->gain, w.ln_candidate->bias, w.ln_eps);
  }
  Vec cand(static_cast<std::size_t>(cell_len));
  for (i64 k = 0; k < cell_len; ++k) cand[k] = std::tanh(q[k]);

  Vec u(static_cast<std::size_t>(cell_len));
  for (i64 j = 0; j < V; ++j)
    for (i64 i = 0; i < H; ++i) {
      const i64 k = j * H + i;
      u[k] = f[i] * s.c[k] + ig[i] * cand[k];
    }
  if (cfg.ln != LayerNormMode::NONE) {
    require_ln(w.ln_cell, "cell update");
    u = layer_norm(u, w.ln_cell->gain, w.ln_cell->bias, w.ln_eps);
  }

  Vec h(static_cast<std::size_t>(cell_len));
  for (i64 j = 0; j < V; ++j)
    for (i64 i = 0; i < H; ++i) {
      const i64 k = j * H + i;
      h[k] = o[i] * std::tanh(u[k]);
    }

  s.c = u;
  s.h = h;
  if (dbg) {
    dbg->f = f;
    dbg->i = ig;
    dbg->o = o;
    dbg->candidate = cand;
    dbg->r.clear();
  }
  return h;
}

i64 derive_h(const CellWeights& w, i64 gates, const char* op) {
  if (w.w_ih.rows() <= 0 || w.w_ih.rows() % gates != 0)
    throw Error(ErrorCode::SHAPE_MISMATCH,
                std::string(op) + ": W_ih rows not divisible by gate count");
  return w.w_ih.rows() / gates;
}

}  // namespace

CellState zero_state(const LayerSpec& layer) {
  const i64 n = layer.kind == Kind::SRU ? layer.hidden : layer.out_dim();
  return CellState{Vec(static_cast<std::size_t>(n), 0.0),
                   Vec(static_cast<std::size_t>(n), 0.0)};
}

Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps) {
  if (x.empty()) throw Error(ErrorCode::EMPTY_INPUT, "layer_norm input is empty");
  if (gain.size() != x.size() || bias.size() != x.size())
    throw Error(ErrorCode::LENGTH_MISMATCH,
                "layer_norm parameter length does not match input");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  const double denom = std::sqrt(var + eps);
  if (denom == 0.0)
    throw Error(ErrorCode::DEGENERATE_INPUT,
                "layer_norm: zero variance with eps = 0");
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = gain[i] * (x[i] - mean) / denom + bias[i];
  return y;
}

Vec lstm_step_full_ln(const CellWeights& w, CellState& s, const Vec& x,
                      StepDebug* dbg, MacCounter* macs) {
  const i64 h = derive_h(w, 4, "lstm_step_full_ln");
  return recurrent_core({4, false, false, h, 1, LayerNormMode::FULL}, w, s, x,
                        dbg, macs);
}

Vec lstm_step_cell_ln(const CellWeights& w, CellState& s, const Vec& x,
                      StepDebug* dbg, MacCounter* macs) {
  const i64 h = derive_h(w, 4, "lstm_step_cell_ln");
  return recurrent_core({4, false, false, h, 1, LayerNormMode::CELL_ONLY}, w,
                        s, x, dbg, macs);
}

Vec is_step(const CellWeights& w, CellState& s, const Vec& x, StepDebug* dbg,
            MacCounter* macs) {
  const i64 h = derive_h(w, 4, "is_step");
  return recurrent_core({4, false, true, h, 1, LayerNormMode::CELL_ONLY}, w, s,
                        x, dbg, macs);
}

Vec cell2d_step(const CellWeights& w, CellState& s, const Vec& x,
                StepDebug* dbg, MacCounter* macs) {
  const i64 h = derive_h(w, 3, "cell2d_step");
  if (!w.w_ch) throw Error(ErrorCode::MISSING_WCH, "cell2d_step requires W_ch");
  if (w.w_ch->cols() != h || w.w_ch->rows() % h != 0)
    throw Error(ErrorCode::SHAPE_MISMATCH, "cell2d_step: W_ch must be (H*V) x H");
  const i64 v = w.w_ch->rows() / h;
  return recurrent_core({3, true, true, h, v, LayerNormMode::CELL_ONLY}, w, s,
                        x, dbg, macs);
}

Vec sru_step(const CellWeights& w, CellState& s, const Vec& x, StepDebug* dbg,
             MacCounter* macs) {
  const i64 h = derive_h(w, 3, "sru_step");
  if (x.empty()) throw Error(ErrorCode::EMPTY_INPUT, "sru_step input is empty");
  if (w.w_ih.cols() != h || static_cast<i64>(x.size()) != h)
    throw Error(ErrorCode::SHAPE_MISMATCH, "sru_step requires input_dim = H");
  if (!w.w_hh.empty())
    throw Error(ErrorCode::SHAPE_MISMATCH, "SRU carries no recurrent matrix");
  if (w.bias.size() != static_cast<std::size_t>(2 * h))
    throw Error(ErrorCode::SHAPE_MISMATCH, "SRU bias must have length 2*H");
  if (s.h.size() != static_cast<std::size_t>(h) ||
      s.c.size() != static_cast<std::size_t>(h))
    throw Error(ErrorCode::SHAPE_MISMATCH, "SRU state length != H");
  require_finite(x, "sru_step input");

  Vec z = matvec(w.w_ih, x, macs);
  Vec f(static_cast<std::size_t>(h)), r(static_cast<std::size_t>(h));
  for (i64 i = 0; i < h; ++i) {
    f[i] = sigmoid(z[h + i] + w.bias[i]);
    r[i] = sigmoid(z[2 * h + i] + w.bias[h + i]);
  }
  Vec c(static_cast<std::size_t>(h)), out(static_cast<std::size_t>(h));
  for (i64 i = 0; i < h; ++i) {
    c[i] = f[i] * s.c[i] + (1.0 - f[i]) * z[i];
    out[i] = r[i] * std::tanh(c[i]) + (1.0 - r[i]) * x[i];
  }
  s.c = c;
  s.h = out;
  if (dbg) {
    dbg->f = f;
    dbg->r = r;
    dbg->i.clear();
    dbg->o.clear();
    dbg->candidate = z;
    dbg->candidate.resize(static_cast<std::size_t>(h));
  }
  return out;
}

Vec cell_step(const LayerSpec& layer, const CellWeights& w, CellState& s,
              const Vec& x, StepDebug* dbg, MacCounter* macs) {
  switch (layer.kind) {
    case Kind::SRU:
      return sru_step(w, s, x, dbg, macs);
    case Kind::LSTM:
    case Kind::LSTM_R:
      return recurrent_core({4, false, false, layer.hidden, 1, layer.layernorm},
                            w, s, x, dbg, macs);
    case Kind::CIFG_R:
      return recurrent_core({3, true, false, layer.hidden, 1, layer.layernorm},
                            w, s, x, dbg, macs);
    case Kind::IS_CIFG_R:
      return recurrent_core({3, true, true, layer.hidden, 1, layer.layernorm},
                            w, s, x, dbg, macs);
    case Kind::IS_2D_CIFG_R:
      return recurrent_core(
          {3, true, true, layer.hidden, layer.vec, layer.layernorm}, w, s, x,
          dbg, macs);
  }
  throw Error(ErrorCode::ILLEGAL_VARIANT, "unknown cell kind");
}

Mat cell_to_mat(const Vec& flat, i64 h, i64 v) {
  if (flat.size() != static_cast<std::size_t>(h * v))
    throw Error(ErrorCode::SHAPE_MISMATCH, "cell_to_mat: length != H*V");
  Mat m(h, v);
  for (i64 j = 0; j < v; ++j)
    for (i64 i = 0; i < h; ++i) m(i, j) = flat[static_cast<std::size_t>(j * h + i)];
  return m;
}

Vec cell_from_mat(const Mat& m) {
  Vec flat(static_cast<std::size_t>(m.rows() * m.cols()));
  for (i64 j = 0; j < m.cols(); ++j)
    for (i64 i = 0; i < m.rows(); ++i)
      flat[static_cast<std::size_t>(j * m.rows() + i)] = m(i, j);
  return flat;
}

std::vector<Vec> time_reduce(const std::vector<Vec>& frames, i64 factor,
                             ReductionMode mode) {
  if (factor < 2)
    throw Error(ErrorCode::DIMENSION_MISMATCH, "reduction factor must be >= 2");
  if (frames.empty()) return {};
  const std::size_t d = frames[0].size();
  for (const Vec& f : frames)
    if (f.size() != d)
      throw Error(ErrorCode::LENGTH_MISMATCH,
                  "time_reduce: frames have unequal dimensions");
  const std::size_t n = frames.size();
  const std::size_t groups = (n + static_cast<std::size_t>(factor) - 1) /
                             static_cast<std::size_t>(factor);
  std::vector<Vec> out;
  out.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * static_cast<std::size_t>(factor);
    const std::size_t end = std::min(n, begin + static_cast<std::size_t>(factor));
    if (mode == ReductionMode::CONCAT) {
      Vec v(static_cast<std::size_t>(factor) * d, 0.0);
      for (std::size_t t = begin; t < end; ++t)
        for (std::size_t j = 0; j < d; ++j) v[(t - begin) * d + j] = frames[t][j];
      out.push_back(std::move(v));
    } else {
      Vec v(d, 0.0);
      const double count = static_cast<double>(end - begin);
      for (std::size_t t = begin; t < end; ++t)
        for (std::size_t j = 0; j < d; ++j) v[j] += frames[t][j];
      for (std::size_t j = 0; j < d; ++j) v[j] /= count;
      out.push_back(std::move(v));
    }
  }
  return out;
}

void check_cell_weights(const LayerSpec& l, const CellWeights& w) {
  const i64 h = l.hidden, v = l.vec;
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                std::string(to_string(l.kind)) + " layer: " + msg);
  };
  if (l.kind == Kind::SRU) {
    if (w.w_ih.rows() != 3 * h || w.w_ih.cols() != l.input_dim)
      fail("W_ih must be 3H x input_dim");
    if (!w.w_hh.empty()) fail("SRU carries no recurrent matrix");
    if (w.bias.size() != static_cast<std::size_t>(2 * h))
      fail("bias must have length 2H");
    return;
  }
  const i64 g = gate_count(l.kind);
  if (w.w_ih.rows() != g * h || w.w_ih.cols() != l.input_dim)
    fail("W_ih must be GH x input_dim, got " + std::to_string(w.w_ih.rows()) +
         "x" + std::to_string(w.w_ih.cols()) + " for input_dim " +
         std::to_string(l.input_dim));
  if (w.w_hh.rows() != g * h || w.w_hh.cols() != h * v)
    fail("W_hh must be GH x HV");
  if (w.bias.size() != static_cast<std::size_t>(g * h))
    fail("bias must have length GH");
  if (l.has_wch()) {
    if (!w.w_ch) fail("W_ch is required");
    if (w.w_ch->rows() != h * v || w.w_ch->cols() != h)
      fail("W_ch must be HV x H");
  } else if (w.w_ch) {
    fail("unexpected W_ch");
  }
  const std::vector<i64> lens = layernorm_instance_lengths(l);
  auto check_ln = [&](const std::optional<LnParams>& p, i64 len,
                      const char* which) {
    if (!p) fail(std::string("missing ") + which + " layer norm");
    if (p->gain.size() != static_cast<std::size_t>(len) ||
        p->bias.size() != static_cast<std::size_t>(len))
      fail(std::string(which) + " layer norm length mismatch");
  };
  if (l.layernorm == LayerNormMode::FULL) {
    check_ln(w.ln_preact, lens[0], "pre-activation");
    check_ln(w.ln_cell, lens[1], "cell-update");
  } else if (l.layernorm == LayerNormMode::CELL_ONLY) {
    check_ln(w.ln_candidate, lens[0], "candidate");
    check_ln(w.ln_cell, lens[1], "cell-update");
  }
}

std::vector<Vec> encoder_forward(const ValidatedSpec& vs,
                                 const std::vector<CellWeights>& weights,
                                 const std::vector<Vec>& frames,
                                 MacCounter* macs) {
  const TransducerSpec& spec = vs.spec();
  if (frames.empty())
    throw Error(ErrorCode::EMPTY_INPUT, "encoder_forward: no input frames");
  for (const Vec& f : frames)
    if (f.size() != static_cast<std::size_t>(spec.feature_dim))
      throw Error(ErrorCode::DIMENSION_MISMATCH,
                  "input frame dimension " + std::to_string(f.size()) +
                      " does not match feature_dim " +
                      std::to_string(spec.feature_dim));
  if (weights.size() != spec.encoder.size())
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "weight stack depth does not match encoder depth");
  for (std::size_t i = 0; i < weights.size(); ++i)
    check_cell_weights(spec.encoder[i], weights[i]);

  std::vector<Vec> seq = frames;
  std::size_t r = 0;
  for (std::size_t i = 0; i < spec.encoder.size(); ++i) {
    for (; r < spec.reductions.size() &&
           spec.reductions[r].position == static_cast<i64>(i);
         ++r)
      seq = time_reduce(seq, spec.reductions[r].factor, spec.reductions[r].mode);
    const LayerSpec& l = spec.encoder[i];
    CellState state = zero_state(l);
    std::vector<Vec> out;
    out.reserve(seq.size());
    for (const Vec& x : seq) {
      Vec h = cell_step(l, weights[i], state, x, nullptr, macs);
      if (l.residual) h = add(h, x);
      out.push_back(std::move(h));
    }
    seq = std::move(out);
  }
  return seq;
}

std::uint64_t Rng::next_u64() {
  // splitmix64; fixed across platforms.
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

namespace {

Mat random_mat(i64 rows, i64 cols, Rng& rng) {
  Mat m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols > 0 ? cols : 1));
  for (double& v : m.data()) v = rng.uniform(-scale, scale);
  return m;
}

Vec random_vec(i64 n, double lo, double hi, Rng& rng) {
  Vec v(static_cast<std::size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

LnParams unit_ln(i64 n) {
  return LnParams{Vec(static_cast<std::size_t>(n), 1.0),
                  Vec(static_cast<std::size_t>(n), 0.0)};
}

}  // namespace

CellWeights make_cell_weights(const LayerSpec& l, Rng& rng) {
  if (l.input_dim <= 0)
    throw Error(ErrorCode::DIMENSION_MISMATCH,
                "make_cell_weights needs a resolved input_dim");
  CellWeights w;
  w.ln_eps = l.ln_eps;
  if (l.kind == Kind::SRU) {
    w.w_ih = random_mat(3 * l.hidden, l.input_dim, rng);
    w.bias = random_vec(2 * l.hidden, -0.1, 0.1, rng);
    return w;
  }
  const i64 g = gate_count(l.kind);
  w.w_ih = random_mat(g * l.hidden, l.input_dim, rng);
  w.w_hh = random_mat(g * l.hidden, l.hidden * l.vec, rng);
  if (l.has_wch()) w.w_ch = random_mat(l.hidden * l.vec, l.hidden, rng);
  w.bias = random_vec(g * l.hidden, -0.1, 0.1, rng);
  const std::vector<i64> lens = layernorm_instance_lengths(l);
  if (l.layernorm == LayerNormMode::FULL) {
    w.ln_preact = unit_ln(lens[0]);
    w.ln_cell = unit_ln(lens[1]);
  } else if (l.layernorm == LayerNormMode::CELL_ONLY) {
    w.ln_candidate = unit_ln(lens[0]);
    w.ln_cell = unit_ln(lens[1]);
  }
  return w;
}

ModelWeights make_model_weights(const ValidatedSpec& vs, std::uint64_t seed) {
  Rng rng(seed);
  const TransducerSpec& s = vs.spec();
  ModelWeights mw;
  mw.encoder.reserve(s.encoder.size());
  for (const LayerSpec& l : s.encoder) mw.encoder.push_back(make_cell_weights(l, rng));
  if (s.vocab > 0) {
    mw.embedding = random_mat(s.vocab, s.embed_dim, rng);
    for (const LayerSpec& l : s.prediction)
      mw.prediction.push_back(make_cell_weights(l, rng));
    const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
    mw.joint_w1 = random_mat(s.joint_dim, joint_in, rng);
    mw.joint_b1 = random_vec(s.joint_dim, -0.1, 0.1, rng);
    mw.joint_w2 = random_mat(s.vocab, s.joint_dim, rng);
    mw.joint_b2 = random_vec(s.vocab, -0.1, 0.1, rng);
  }
  return mw;
}

}  // namespace rnnt
