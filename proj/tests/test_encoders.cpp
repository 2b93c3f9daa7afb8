#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "textnet/encoders.hpp"
#include "textnet/rng.hpp"

using namespace textnet;

namespace {

ModelParams random_params(int d, EncoderKind kind, std::uint64_t seed, std::size_t vocab = 12) {
  return init_params(2, vocab, d, kind, seed);
}

Sentence random_sentence(Rng& rng, std::size_t vocab, std::size_t len) {
  Sentence s(len);
  for (auto& w : s) {
    w = static_cast<WordId>(2 + rng.below(vocab - 2));  // skip pad/unk
  }
  return s;
}

std::vector<oracle::Vec> gather_inputs(const Sentence& s, const Eigen::MatrixXd& words) {
  std::vector<oracle::Vec> out;
  for (WordId w : s) out.push_back(oracle::to_vec(words.col(w)));
  return out;
}

}  // namespace

TEST_CASE("wavg of a single word is that word's vector") {
  auto p = random_params(6, EncoderKind::kWavg, 1);
  const Sentence s = {3};
  REQUIRE(encode_wavg(s, p.words) == p.words.col(3));
}

TEST_CASE("wavg of opposite vectors is zero") {
  auto p = random_params(4, EncoderKind::kWavg, 2);
  p.words.col(2) << 1.0, -2.0, 0.5, 3.0;
  p.words.col(3) = -p.words.col(2);
  const Eigen::VectorXd f = encode_wavg({2, 3}, p.words);
  REQUIRE(f.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("wavg matches direct arithmetic") {
  auto p = random_params(4, EncoderKind::kWavg, 3);
  p.words.col(2) << 1.0, 0.0, 0.0, 0.0;  // word a
  p.words.col(3) << 0.0, 3.0, 0.0, 0.0;  // word b
  const Eigen::VectorXd f = encode_wavg({2, 2, 3}, p.words);
  REQUIRE(f[0] == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
  REQUIRE(f[1] == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(f[2] == 0.0);
  REQUIRE(f[3] == 0.0);
}

TEST_CASE("wavg rejects empty sentences") {
  auto p = random_params(4, EncoderKind::kWavg, 4);
  REQUIRE_THROWS_AS(encode_wavg({}, p.words), std::invalid_argument);
}

TEST_CASE("gru_cell with zero weights returns zero") {
  GruWeights w;
  w.resize(3, 3);
  w.set_zero();
  const Eigen::VectorXd h = gru_cell(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Zero(3), w);
  // z = r = 0.5 and hbar = 0, so the state stays zero
  REQUIRE(h.isZero());
}

TEST_CASE("gru_cell saturated update gate keeps the previous state") {
  Rng rng(5);
  GruWeights w;
  w.resize(3, 3);
  w.set_zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      w.w_z(i, j) = rng.uniform(-0.2, 0.2);
      w.u_h(i, j) = rng.uniform(-0.2, 0.2);
    }
  }
  w.b_z.setConstant(-50.0);  // z ~ 0
  Eigen::VectorXd h_prev(3);
  h_prev << 0.3, -0.4, 0.1;
  const Eigen::VectorXd h = gru_cell(Eigen::VectorXd::Ones(3), h_prev, w);
  REQUIRE((h - h_prev).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gru_cell matches the scalar oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto p = random_params(6, EncoderKind::kGru, 100 + seed);
    Rng rng(seed);
    Eigen::VectorXd x(6), h_prev(6);
    for (int i = 0; i < 6; ++i) {
      x[i] = rng.uniform(-1, 1);
      h_prev[i] = rng.uniform(-1, 1);
    }
    const Eigen::VectorXd got = gru_cell(x, h_prev, p.gru_fwd);
    const auto expect =
        oracle::ScalarGru::from(p.gru_fwd).step(oracle::to_vec(x), oracle::to_vec(h_prev));
    for (int i = 0; i < 6; ++i) REQUIRE(got[i] == Catch::Approx(expect[i]).margin(1e-12));
  }
}

TEST_CASE("encode_gru pools a single state directly") {
  const auto p = random_params(6, EncoderKind::kGru, 21);
  const Sentence s = {4};
  const Eigen::VectorXd f = encode_gru(s, p.words, p.gru_fwd);
  const Eigen::VectorXd h1 =
      gru_cell(p.words.col(4), Eigen::VectorXd::Zero(6), p.gru_fwd);
  REQUIRE((f - h1).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("encode_gru with zero weights is the zero vector") {
  auto p = random_params(6, EncoderKind::kGru, 22);
  p.gru_fwd.set_zero();
  const Eigen::VectorXd f = encode_gru({2, 3, 4}, p.words, p.gru_fwd);
  REQUIRE(f.isZero());
}

TEST_CASE("encode_gru matches the unrolled oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto p = random_params(8, EncoderKind::kGru, 200 + seed);
    Rng rng(seed);
    const Sentence s = random_sentence(rng, p.vocab_size(), 3);
    const Eigen::VectorXd got = encode_gru(s, p.words, p.gru_fwd);
    const auto expect = oracle::unrolled_gru_encode(oracle::ScalarGru::from(p.gru_fwd),
                                                    gather_inputs(s, p.words));
    for (int i = 0; i < 8; ++i) REQUIRE(got[i] == Catch::Approx(expect[i]).margin(1e-12));
  }
}

TEST_CASE("encode_bigru matches the unrolled oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto p = random_params(8, EncoderKind::kBigru, 300 + seed);
    Rng rng(seed);
    const Sentence s = random_sentence(rng, p.vocab_size(), 4);
    const Eigen::VectorXd got = encode_bigru(s, p.words, p.gru_fwd, p.gru_bwd);
    const auto expect = oracle::unrolled_bigru_encode(oracle::ScalarGru::from(p.gru_fwd),
                                                      oracle::ScalarGru::from(p.gru_bwd),
                                                      gather_inputs(s, p.words));
    REQUIRE(got.size() == 8);
    for (int i = 0; i < 8; ++i) REQUIRE(got[i] == Catch::Approx(expect[i]).margin(1e-12));
  }
}

TEST_CASE("bigru halves agree on palindromes with tied weights") {
  auto p = random_params(8, EncoderKind::kBigru, 33);
  p.gru_bwd = p.gru_fwd;
  const Sentence s = {2, 5, 7, 5, 2};
  const Eigen::VectorXd f = encode_bigru(s, p.words, p.gru_fwd, p.gru_bwd);
  REQUIRE((f.head(4) - f.tail(4)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("bigru length-1 output is the concatenation of both single states") {
  const auto p = random_params(8, EncoderKind::kBigru, 34);
  const Sentence s = {6};
  const Eigen::VectorXd f = encode_bigru(s, p.words, p.gru_fwd, p.gru_bwd);
  const Eigen::VectorXd hf = gru_cell(p.words.col(6), Eigen::VectorXd::Zero(4), p.gru_fwd);
  const Eigen::VectorXd hb = gru_cell(p.words.col(6), Eigen::VectorXd::Zero(4), p.gru_bwd);
  REQUIRE((f.head(4) - hf).cwiseAbs().maxCoeff() < 1e-15);
  REQUIRE((f.tail(4) - hb).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("forward pass is identical with and without a trace") {
  for (auto kind : {EncoderKind::kWavg, EncoderKind::kGru, EncoderKind::kBigru}) {
    const auto p = random_params(8, kind, 55);
    Rng rng(7);
    for (int len : {1, 2, 5}) {
      const Sentence s = random_sentence(rng, p.vocab_size(), static_cast<std::size_t>(len));
      EncodeTrace trace;
      const Eigen::VectorXd with = encode_sentence(p, s, &trace);
      const Eigen::VectorXd without = encode_sentence(p, s, nullptr);
      REQUIRE(with == without);
      REQUIRE(trace.pooled == with);
      REQUIRE(trace.length() == s.size());
      REQUIRE(with.size() == p.dim);
    }
  }
}

TEST_CASE("gru states never leave the unit/previous-state envelope") {
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_params(8, EncoderKind::kGru, 400 + static_cast<std::uint64_t>(trial));
    const Sentence s = random_sentence(rng, p.vocab_size(), 1 + rng.below(8));
    EncodeTrace trace;
    encode_gru(s, p.words, p.gru_fwd, &trace);
    double prev_max = 0.0;
    for (const auto& h : trace.fwd.h) {
      const double cur_max = h.cwiseAbs().maxCoeff();
      REQUIRE(cur_max <= std::max(prev_max, 1.0) + 1e-12);
      prev_max = cur_max;
    }
  }
}

TEST_CASE("wavg backward accumulates per occurrence") {
  auto p = random_params(4, EncoderKind::kWavg, 66);
  const Sentence s = {3, 3};
  EncodeTrace trace;
  encode_sentence(p, s, &trace);
  EncodeGrad grad;
  grad.init(p);
  Eigen::VectorXd upstream(4);
  upstream << 1.0, -2.0, 0.5, 4.0;
  encode_backward(p, trace, upstream, grad);
  REQUIRE(grad.input.size() == 2);
  // two contributions of upstream/2 sum back to upstream for word 3
  const Eigen::VectorXd total = grad.input[0] + grad.input[1];
  REQUIRE((total - upstream).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("zero upstream gradient yields all-zero gradients") {
  for (auto kind : {EncoderKind::kGru, EncoderKind::kBigru}) {
    const auto p = random_params(8, kind, 77);
    Rng rng(8);
    const Sentence s = random_sentence(rng, p.vocab_size(), 4);
    EncodeTrace trace;
    encode_sentence(p, s, &trace);
    EncodeGrad grad;
    grad.init(p);
    encode_backward(p, trace, Eigen::VectorXd::Zero(8), grad);
    REQUIRE(grad.fwd.squared_norm() == 0.0);
    if (kind == EncoderKind::kBigru) REQUIRE(grad.bwd.squared_norm() == 0.0);
    for (const auto& g : grad.input) REQUIRE(g.isZero());
  }
}

namespace {

// Checks analytic encoder gradients of loss = g . f_e(c) against central
// finite differences for every weight tensor and input word vector.
void check_encoder_gradients(EncoderKind kind, std::uint64_t seed, std::size_t len) {
  auto p = random_params(8, kind, seed);
  Rng rng(seed);
  const Sentence s = random_sentence(rng, p.vocab_size(), len);
  Eigen::VectorXd g(p.dim);
  for (int i = 0; i < p.dim; ++i) g[i] = rng.uniform(-1, 1);

  EncodeTrace trace;
  encode_sentence(p, s, &trace);
  EncodeGrad grad;
  grad.init(p);
  encode_backward(p, trace, g, grad);

  auto loss = [&] { return g.dot(encode_sentence(p, s, nullptr)); };

  auto check_matrix = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& analytic) {
    for (Eigen::Index r = 0; r < param.rows(); ++r) {
      for (Eigen::Index c = 0; c < param.cols(); ++c) {
        const double fd = oracle::central_diff(param(r, c), loss);
        REQUIRE(oracle::rel_err(analytic(r, c), fd) < 1e-4);
      }
    }
  };
  auto check_vector = [&](Eigen::VectorXd& param, const Eigen::VectorXd& analytic) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double fd = oracle::central_diff(param[i], loss);
      REQUIRE(oracle::rel_err(analytic[i], fd) < 1e-4);
    }
  };

  if (kind != EncoderKind::kWavg) {
    check_matrix(p.gru_fwd.w_z, grad.fwd.w_z);
    check_matrix(p.gru_fwd.u_z, grad.fwd.u_z);
    check_vector(p.gru_fwd.b_z, grad.fwd.b_z);
    check_matrix(p.gru_fwd.w_r, grad.fwd.w_r);
    check_matrix(p.gru_fwd.u_r, grad.fwd.u_r);
    check_vector(p.gru_fwd.b_r, grad.fwd.b_r);
    check_matrix(p.gru_fwd.w_h, grad.fwd.w_h);
    check_matrix(p.gru_fwd.u_h, grad.fwd.u_h);
    check_vector(p.gru_fwd.b_h, grad.fwd.b_h);
  }
  if (kind == EncoderKind::kBigru) {
    check_matrix(p.gru_bwd.w_z, grad.bwd.w_z);
    check_matrix(p.gru_bwd.u_z, grad.bwd.u_z);
    check_vector(p.gru_bwd.b_z, grad.bwd.b_z);
    check_matrix(p.gru_bwd.w_r, grad.bwd.w_r);
    check_matrix(p.gru_bwd.u_r, grad.bwd.u_r);
    check_vector(p.gru_bwd.b_r, grad.bwd.b_r);
    check_matrix(p.gru_bwd.w_h, grad.bwd.w_h);
    check_matrix(p.gru_bwd.u_h, grad.bwd.u_h);
    check_vector(p.gru_bwd.b_h, grad.bwd.b_h);
  }

  // word-vector gradients, accumulated over repeated occurrences
  std::unordered_map<WordId, Eigen::VectorXd> word_grad;
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    auto [it, inserted] = word_grad.emplace(s[pos], grad.input[pos]);
    if (!inserted) it->second += grad.input[pos];
  }
  for (const auto& [w, analytic] : word_grad) {
    for (int i = 0; i < p.dim; ++i) {
      const double fd = oracle::central_diff(p.words(i, w), loss);
      REQUIRE(oracle::rel_err(analytic[i], fd) < 1e-4);
    }
  }
}

}  // namespace

TEST_CASE("encoder gradients match finite differences") {
  Rng lens(123);
  for (auto kind : {EncoderKind::kWavg, EncoderKind::kGru, EncoderKind::kBigru}) {
    for (std::uint64_t seed = 0; seed < 7; ++seed) {
      check_encoder_gradients(kind, 1000 + seed, 1 + lens.below(8));
    }
  }
}
