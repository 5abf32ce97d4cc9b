#include "rnnt/weights_io.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace rnnt {

namespace {

constexpr char kMagic[8] = {'R', 'N', 'N', 'T', 'W', 'T', 'S', '1'};

void append_doubles(std::vector<double>& payload, const Vec& v) {
  payload.insert(payload.end(), v.begin(), v.end());
}

void append_mat(std::vector<double>& payload, const Mat& m) {
  append_doubles(payload, m.data());
}

nlohmann::json cell_manifest(const CellWeights& w,
                             std::vector<double>& payload) {
  nlohmann::json j;
  j["w_ih"] = {w.w_ih.rows(), w.w_ih.cols()};
  append_mat(payload, w.w_ih);
  j["w_hh"] = {w.w_hh.rows(), w.w_hh.cols()};
  append_mat(payload, w.w_hh);
  if (w.w_ch) {
    j["w_ch"] = {w.w_ch->rows(), w.w_ch->cols()};
    append_mat(payload, *w.w_ch);
  }
  j["bias"] = static_cast<i64>(w.bias.size());
  append_doubles(payload, w.bias);
  auto put_ln = [&](const char* key, const std::optional<LnParams>& ln) {
    if (!ln) return;
    j[key] = static_cast<i64>(ln->gain.size());
    append_doubles(payload, ln->gain);
    append_doubles(payload, ln->bias);
  };
  put_ln("ln_preact", w.ln_preact);
  put_ln("ln_candidate", w.ln_candidate);
  put_ln("ln_cell", w.ln_cell);
  j["ln_eps"] = w.ln_eps;
  return j;
}

class PayloadReader {
 public:
  PayloadReader(const double* data, std::size_t count)
      : data_(data), count_(count) {}

  Vec take(i64 n) {
    if (n < 0 || pos_ + static_cast<std::size_t>(n) > count_)
      throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                  "weight payload is shorter than its manifest");
    Vec v(data_ + pos_, data_ + pos_ + n);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  bool exhausted() const { return pos_ == count_; }

 private:
  const double* data_;
  std::size_t count_;
  std::size_t pos_ = 0;
};

std::pair<i64, i64> shape_of(const nlohmann::json& j, const char* key) {
  const auto& s = j.at(key);
  if (!s.is_array() || s.size() != 2)
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                std::string("bad shape for ") + key);
  return {s[0].get<i64>(), s[1].get<i64>()};
}

CellWeights cell_from_manifest(const nlohmann::json& j, PayloadReader& r) {
  CellWeights w;
  auto [ir, ic] = shape_of(j, "w_ih");
  w.w_ih = Mat(ir, ic, r.take(ir * ic));
  auto [hr, hc] = shape_of(j, "w_hh");
  w.w_hh = Mat(hr, hc, r.take(hr * hc));
  if (j.contains("w_ch")) {
    auto [cr, cc] = shape_of(j, "w_ch");
    w.w_ch = Mat(cr, cc, r.take(cr * cc));
  }
  w.bias = r.take(j.at("bias").get<i64>());
  auto get_ln = [&](const char* key) -> std::optional<LnParams> {
    if (!j.contains(key)) return std::nullopt;
    const i64 n = j.at(key).get<i64>();
    LnParams ln;
    ln.gain = r.take(n);
    ln.bias = r.take(n);
    return ln;
  };
  w.ln_preact = get_ln("ln_preact");
  w.ln_candidate = get_ln("ln_candidate");
  w.ln_cell = get_ln("ln_cell");
  if (j.contains("ln_eps")) w.ln_eps = j.at("ln_eps").get<double>();
  return w;
}

}  // namespace

void save_weights(const std::string& path, const ModelWeights& mw,
                  std::uint64_t seed) {
  std::vector<double> payload;
  nlohmann::json manifest;
  manifest["seed"] = seed;
  manifest["encoder"] = nlohmann::json::array();
  for (const CellWeights& w : mw.encoder)
    manifest["encoder"].push_back(cell_manifest(w, payload));
  const bool has_decoder = !mw.embedding.empty();
  manifest["has_decoder"] = has_decoder;
  if (has_decoder) {
    manifest["embedding"] = {mw.embedding.rows(), mw.embedding.cols()};
    append_mat(payload, mw.embedding);
    manifest["prediction"] = nlohmann::json::array();
    for (const CellWeights& w : mw.prediction)
      manifest["prediction"].push_back(cell_manifest(w, payload));
    manifest["joint_w1"] = {mw.joint_w1.rows(), mw.joint_w1.cols()};
    append_mat(payload, mw.joint_w1);
    manifest["joint_b1"] = static_cast<i64>(mw.joint_b1.size());
    append_doubles(payload, mw.joint_b1);
    manifest["joint_w2"] = {mw.joint_w2.rows(), mw.joint_w2.cols()};
    append_mat(payload, mw.joint_w2);
    manifest["joint_b2"] = static_cast<i64>(mw.joint_b2.size());
    append_doubles(payload, mw.joint_b2);
  }

  const std::string mtext = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::EMPTY_INPUT, "cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t mlen = mtext.size();
  out.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
  out.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(double)));
  if (!out)
    throw Error(ErrorCode::EMPTY_INPUT, "failed writing weights: " + path);
}

WeightsFile load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::EMPTY_INPUT, "cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                "not a weights file: " + path);
  std::uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
  if (!in || mlen > (1ull << 30))
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                "corrupt manifest length in " + path);
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), static_cast<std::streamsize>(mlen));
  if (!in)
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                "truncated manifest in " + path);

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(mtext);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                std::string("bad manifest: ") + e.what());
  }

  std::vector<double> payload;
  {
    std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
    if (raw.size() % sizeof(double) != 0)
      throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                  "payload is not a whole number of float64s");
    payload.resize(raw.size() / sizeof(double));
    std::memcpy(payload.data(), raw.data(), raw.size());
  }

  WeightsFile f;
  try {
    f.seed = manifest.at("seed").get<std::uint64_t>();
    PayloadReader r(payload.data(), payload.size());
    for (const auto& cj : manifest.at("encoder"))
      f.weights.encoder.push_back(cell_from_manifest(cj, r));
    if (manifest.value("has_decoder", false)) {
      auto [er, ec] = shape_of(manifest, "embedding");
      f.weights.embedding = Mat(er, ec, r.take(er * ec));
      for (const auto& cj : manifest.at("prediction"))
        f.weights.prediction.push_back(cell_from_manifest(cj, r));
      auto [w1r, w1c] = shape_of(manifest, "joint_w1");
      f.weights.joint_w1 = Mat(w1r, w1c, r.take(w1r * w1c));
      f.weights.joint_b1 = r.take(manifest.at("joint_b1").get<i64>());
      auto [w2r, w2c] = shape_of(manifest, "joint_w2");
      f.weights.joint_w2 = Mat(w2r, w2c, r.take(w2r * w2c));
      f.weights.joint_b2 = r.take(manifest.at("joint_b2").get<i64>());
    }
    if (!r.exhausted())
      throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                  "weight payload has trailing data");
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                std::string("bad manifest: ") + e.what());
  }
  return f;
}

void check_model_weights(const ValidatedSpec& vs, const ModelWeights& mw) {
  const TransducerSpec& s = vs.spec();
  try {
    if (mw.encoder.size() != s.encoder.size())
      throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                  "encoder weight count does not match depth");
    for (std::size_t i = 0; i < s.encoder.size(); ++i)
      check_cell_weights(s.encoder[i], mw.encoder[i]);
    if (s.vocab > 0) {
      if (mw.embedding.rows() != s.vocab || mw.embedding.cols() != s.embed_dim)
        throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH, "embedding shape");
      if (mw.prediction.size() != s.prediction.size())
        throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                    "prediction weight count does not match depth");
      for (std::size_t i = 0; i < s.prediction.size(); ++i)
        check_cell_weights(s.prediction[i], mw.prediction[i]);
      const i64 joint_in = vs.encoder_out_dim() + vs.prediction_out_dim();
      if (mw.joint_w1.rows() != s.joint_dim || mw.joint_w1.cols() != joint_in ||
          static_cast<i64>(mw.joint_b1.size()) != s.joint_dim)
        throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH, "joint first stage");
      if (mw.joint_w2.rows() != s.vocab || mw.joint_w2.cols() != s.joint_dim ||
          static_cast<i64>(mw.joint_b2.size()) != s.vocab)
        throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH, "joint second stage");
    } else if (!mw.embedding.empty()) {
      throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH,
                  "weights carry a decoder the model does not declare");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::WEIGHT_SHAPE_MISMATCH) throw;
    throw Error(ErrorCode::WEIGHT_SHAPE_MISMATCH, e.what());
  }
}

}  // namespace rnnt
