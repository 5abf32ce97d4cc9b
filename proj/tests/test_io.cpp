#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rnnt/config_io.hpp"
#include "rnnt/weights_io.hpp"

using namespace rnnt;

#ifndef RNNTCOST_CONFIG_DIR
#error "RNNTCOST_CONFIG_DIR must point at the fixture directory"
#endif

namespace {

std::string fixture(const char* name) {
  return std::string(RNNTCOST_CONFIG_DIR) + "/" + name;
}

void check_bitwise(const Vec& a, const Vec& b) {
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

ValidatedSpec tiny_spec() {
  TransducerSpec s;
  s.feature_dim = 6;
  LayerSpec l0;
  l0.kind = Kind::LSTM;
  l0.hidden = 5;
  l0.layernorm = LayerNormMode::FULL;
  LayerSpec l1;
  l1.kind = Kind::IS_2D_CIFG_R;
  l1.hidden = 3;
  l1.vec = 2;
  l1.internally_stacked = true;
  l1.layernorm = LayerNormMode::CELL_ONLY;
  s.encoder = {l0, l1};
  LayerSpec p;
  p.kind = Kind::CIFG_R;
  p.hidden = 4;
  s.prediction = {p};
  s.embed_dim = 3;
  s.joint_dim = 5;
  s.vocab = 7;
  return validate_spec(s);
}

}  // namespace

// ----------------------------------------------------------- model configs

TEST_CASE("the baseline fixture loads and resolves") {
  const TransducerSpec s = load_spec(fixture("B.json"));
  CHECK(s.meta.name == "B");
  CHECK(s.feature_dim == 80);
  REQUIRE(s.encoder.size() == 8);
  for (const LayerSpec& l : s.encoder) {
    CHECK(l.kind == Kind::LSTM);
    CHECK(l.hidden == 640);
    CHECK(l.layernorm == LayerNormMode::FULL);
  }
  REQUIRE(s.reductions.size() == 2);
  CHECK(s.reductions[0].mode == ReductionMode::CONCAT);
  REQUIRE(s.prediction.size() == 2);
  CHECK(s.vocab == 1024);
  REQUIRE(s.meta.published_network_m.has_value());
  CHECK(*s.meta.published_network_m == 37.0);

  const ValidatedSpec vs = validate_spec(s);
  CHECK(vs.total_reduction() == 4);
  CHECK(model_param_count(vs).encoder_total == 28'129'280);
}

TEST_CASE("every shipped fixture is a legal model") {
  for (const char* name :
       {"B.json", "E1.json", "E2.json", "E3.json", "E4.json", "E5.json",
        "E6.json", "E7.json"}) {
    CAPTURE(name);
    const TransducerSpec s = load_spec(fixture(name));
    CHECK_NOTHROW(validate_spec(s));
    CHECK(s.meta.published_network_m.has_value());
    CHECK(s.meta.published_encoder_m.has_value());
    CHECK_FALSE(s.meta.assumptions.empty());
  }
}

TEST_CASE("configs default the optional fields") {
  const nlohmann::json j = {
      {"feature_dim", 4},
      {"encoder", {{{"kind", "LSTM"}, {"hidden", 3}}}},
  };
  const TransducerSpec s = spec_from_json(j);
  REQUIRE(s.encoder.size() == 1);
  CHECK(s.encoder[0].vec == 1);
  CHECK(s.encoder[0].input_dim == 0);
  CHECK_FALSE(s.encoder[0].residual);
  CHECK_FALSE(s.encoder[0].internally_stacked);
  CHECK(s.encoder[0].layernorm == LayerNormMode::NONE);
  CHECK(s.encoder[0].ln_eps == 1e-5);
  CHECK(s.vocab == 0);
  CHECK(s.reductions.empty());
  CHECK(s.prediction.empty());
}

TEST_CASE("config serialization round-trips") {
  const TransducerSpec a = load_spec(fixture("E7.json"));
  const TransducerSpec b = spec_from_json(spec_to_json(a));
  CHECK(b.meta.name == a.meta.name);
  CHECK(b.meta.assumptions == a.meta.assumptions);
  CHECK(b.meta.published_network_m == a.meta.published_network_m);
  CHECK(b.meta.published_encoder_m == a.meta.published_encoder_m);
  CHECK(b.encoder.size() == a.encoder.size());
  CHECK(b.reductions.size() == a.reductions.size());
  const ParamReport ra = model_param_count(validate_spec(a));
  const ParamReport rb = model_param_count(validate_spec(b));
  CHECK(ra.network_total() == rb.network_total());
  CHECK(ra.encoder_total == rb.encoder_total);
  CHECK(spec_to_json(a) == spec_to_json(b));
}

TEST_CASE("config errors carry a code") {
  CHECK_THROWS_AS(load_spec(fixture("nope.json")), Error);
  CHECK_THROWS_AS(spec_from_json(nlohmann::json::array()), Error);
  const nlohmann::json bad_kind = {
      {"feature_dim", 4},
      {"encoder", {{{"kind", "GRU"}, {"hidden", 3}}}},
  };
  CHECK_THROWS_AS(spec_from_json(bad_kind), Error);
}

// ------------------------------------------------------------ size strings

TEST_CASE("buffer sizes parse in bytes, binary units, and parameters") {
  CHECK(parse_buffer_size("1000", 1.0) == 1000);
  CHECK(parse_buffer_size("512KiB", 1.0) == 524'288);
  CHECK(parse_buffer_size("2MiB", 1.0) == 2'097'152);
  CHECK(parse_buffer_size("64b", 1.0) == 64);
  CHECK(parse_buffer_size("64 bytes", 1.0) == 64);
  CHECK(parse_buffer_size("500Kparams", 1.0) == 500'000);
  CHECK(parse_buffer_size("500Kparams", 4.0) == 2'000'000);
  CHECK(parse_buffer_size("2Mparams", 0.5) == 1'000'000);
  CHECK(parse_buffer_size("320000params", 1.0) == 320'000);
  CHECK(parse_buffer_size(" 512 kib ", 1.0) == 524'288);
  CHECK(parse_buffer_size("512KIB", 1.0) == 524'288);
  CHECK(parse_buffer_size("0", 1.0) == 0);
  CHECK_THROWS_AS(parse_buffer_size("", 1.0), Error);
  CHECK_THROWS_AS(parse_buffer_size("12 furlongs", 1.0), Error);
  CHECK_THROWS_AS(parse_buffer_size("KiB", 1.0), Error);
  CHECK_THROWS_AS(parse_buffer_size("-1", 1.0), Error);
}

// --------------------------------------------------------------- weights

TEST_CASE("weights survive a save/load round trip bit for bit") {
  const ValidatedSpec vs = tiny_spec();
  const ModelWeights w = make_model_weights(vs, 777);
  const std::string path = "io_roundtrip.wts";
  save_weights(path, w, 777);

  const WeightsFile f = load_weights(path);
  CHECK(f.seed == 777);
  REQUIRE(f.weights.encoder.size() == 2);
  check_bitwise(f.weights.encoder[0].w_ih.data(), w.encoder[0].w_ih.data());
  check_bitwise(f.weights.encoder[0].ln_preact->gain,
                w.encoder[0].ln_preact->gain);
  check_bitwise(f.weights.encoder[1].w_ch->data(), w.encoder[1].w_ch->data());
  check_bitwise(f.weights.encoder[1].ln_cell->bias,
                w.encoder[1].ln_cell->bias);
  check_bitwise(f.weights.embedding.data(), w.embedding.data());
  check_bitwise(f.weights.prediction[0].bias, w.prediction[0].bias);
  check_bitwise(f.weights.joint_w1.data(), w.joint_w1.data());
  check_bitwise(f.weights.joint_b2, w.joint_b2);
  CHECK(f.weights.encoder[0].ln_eps == w.encoder[0].ln_eps);
  CHECK_NOTHROW(check_model_weights(vs, f.weights));
  std::remove(path.c_str());
}

TEST_CASE("weight loading rejects damaged files") {
  const ValidatedSpec vs = tiny_spec();
  save_weights("io_damage.wts", make_model_weights(vs, 3), 3);
  std::ifstream in("io_damage.wts", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  in.close();
  REQUIRE(bytes.size() > 64);

  auto write_variant = [&](const std::string& data) {
    std::ofstream out("io_damage.wts", std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  };

  // truncated payload
  write_variant(bytes.substr(0, bytes.size() - 9));
  try {
    load_weights("io_damage.wts");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WEIGHT_SHAPE_MISMATCH);
  }

  // trailing garbage
  write_variant(bytes + "extra");
  CHECK_THROWS_AS(load_weights("io_damage.wts"), Error);

  // wrong magic
  std::string flipped = bytes;
  flipped[0] = 'X';
  write_variant(flipped);
  CHECK_THROWS_AS(load_weights("io_damage.wts"), Error);

  // missing file reads as an open failure, not a shape problem
  std::remove("io_damage.wts");
  try {
    load_weights("io_damage.wts");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EMPTY_INPUT);
  }
}

TEST_CASE("shape checking catches weights from another model") {
  const ValidatedSpec vs = tiny_spec();
  ModelWeights w = make_model_weights(vs, 9);
  CHECK_NOTHROW(check_model_weights(vs, w));

  ModelWeights wrong_rows = w;
  wrong_rows.encoder[0].w_ih = Mat(3, 6);
  CHECK_THROWS_AS(check_model_weights(vs, wrong_rows), Error);

  ModelWeights wrong_joint = w;
  wrong_joint.joint_w2 = Mat(1, 1);
  CHECK_THROWS_AS(check_model_weights(vs, wrong_joint), Error);

  ModelWeights missing_ln = w;
  missing_ln.encoder[0].ln_preact.reset();
  CHECK_THROWS_AS(check_model_weights(vs, missing_ln), Error);

  ModelWeights short_pred = w;
  short_pred.prediction.clear();
  CHECK_THROWS_AS(check_model_weights(vs, short_pred), Error);
}
