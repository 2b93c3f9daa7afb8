#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "textnet/params.hpp"

using namespace textnet;

TEST_CASE("init_params splits vectors into equal halves") {
  const auto p = init_params(3, 5, 200, EncoderKind::kWavg, 7);
  REQUIRE(p.half() == 100);
  REQUIRE(p.in_half(0).size() == 100);
  REQUIRE(p.out_half(0).size() == 100);
  REQUIRE(p.nodes.cols() == 3);
  REQUIRE(p.words.cols() == 5);
}

TEST_CASE("init_params rejects odd dimensions") {
  REQUIRE_THROWS_AS(init_params(2, 2, 3, EncoderKind::kWavg, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(init_params(2, 2, 0, EncoderKind::kWavg, 1), std::invalid_argument);
}

TEST_CASE("init_params is a pure function of the seed") {
  const auto a = init_params(4, 6, 16, EncoderKind::kBigru, 42);
  const auto b = init_params(4, 6, 16, EncoderKind::kBigru, 42);
  REQUIRE(a.nodes == b.nodes);
  REQUIRE(a.words == b.words);
  REQUIRE(a.gru_fwd.w_h == b.gru_fwd.w_h);
  REQUIRE(a.gru_bwd.u_r == b.gru_bwd.u_r);

  const auto c = init_params(4, 6, 16, EncoderKind::kBigru, 43);
  REQUIRE(a.nodes != c.nodes);
}

TEST_CASE("init_params ranges and zero biases") {
  const int d = 16;
  const auto p = init_params(10, 10, d, EncoderKind::kGru, 3);
  REQUIRE(p.nodes.cwiseAbs().maxCoeff() <= 0.5 / d);
  REQUIRE(p.words.cwiseAbs().maxCoeff() <= 0.5 / d);
  REQUIRE(p.gru_fwd.b_z.isZero());
  REQUIRE(p.gru_fwd.b_r.isZero());
  REQUIRE(p.gru_fwd.b_h.isZero());
  const double bound = std::sqrt(6.0 / (d + d));
  REQUIRE(p.gru_fwd.w_z.cwiseAbs().maxCoeff() <= bound);
  // BiGru halves the per-direction hidden size
  const auto q = init_params(2, 2, d, EncoderKind::kBigru, 3);
  REQUIRE(q.gru_fwd.hidden() == d / 2);
  REQUIRE(q.gru_bwd.hidden() == d / 2);
  REQUIRE(q.gru_fwd.w_z.cols() == d);
}

TEST_CASE("export and re-import round-trips to printed precision") {
  oracle::TempDir dir;
  const auto p = init_params(5, 2, 8, EncoderKind::kWavg, 11);
  const std::vector<std::string> keys = {"n0", "n1", "n2", "n3", "n4"};
  const auto path = dir.file("emb.txt");
  export_embeddings(p, keys, path, ExportPart::kFull);

  const auto file = read_embedding_file(path);
  REQUIRE(file.dim == 8);
  REQUIRE(file.rows.size() == 5);  // isolated nodes are exported too
  for (std::size_t u = 0; u < 5; ++u) {
    REQUIRE(file.rows[u].first == keys[u]);
    const Eigen::VectorXd expect = p.node_concat(static_cast<NodeId>(u));
    for (int i = 0; i < 8; ++i) {
      REQUIRE(std::abs(file.rows[u].second[i] - expect[i]) < 1e-6);
    }
  }
}

TEST_CASE("export full writes out-half before in-half") {
  oracle::TempDir dir;
  auto p = init_params(1, 1, 4, EncoderKind::kWavg, 1);
  p.nodes.col(0) << 1.0, 2.0, 3.0, 4.0;  // in = (1,2), out = (3,4)
  const auto path = dir.file("emb.txt");
  export_embeddings(p, {"n"}, path, ExportPart::kFull);
  const auto file = read_embedding_file(path);
  REQUIRE(file.rows[0].second[0] == 3.0);
  REQUIRE(file.rows[0].second[1] == 4.0);
  REQUIRE(file.rows[0].second[2] == 1.0);
  REQUIRE(file.rows[0].second[3] == 2.0);
}

TEST_CASE("export halves have width d/2") {
  oracle::TempDir dir;
  const auto p = init_params(2, 1, 200, EncoderKind::kWavg, 5);
  const auto in_path = dir.file("in.txt");
  export_embeddings(p, {"a", "b"}, in_path, ExportPart::kIn);
  REQUIRE(read_embedding_file(in_path).dim == 100);
  const auto out_path = dir.file("out.txt");
  export_embeddings(p, {"a", "b"}, out_path, ExportPart::kOut);
  const auto file = read_embedding_file(out_path);
  REQUIRE(file.dim == 100);
  for (int i = 0; i < 100; ++i) {
    REQUIRE(std::abs(file.rows[0].second[i] - p.out_half(0)[i]) < 1e-6);
  }
}

TEST_CASE("load_word_vectors intersects with the vocabulary") {
  oracle::TempDir dir;
  Vocabulary vocab;
  vocab.add("apple", 3);
  vocab.add("pear", 2);
  auto p = init_params(1, vocab.size(), 4, EncoderKind::kWavg, 9);
  const Eigen::VectorXd before_pear = p.words.col(*vocab.find("pear"));

  const auto path = oracle::write_file(
      dir.file("wv.txt"), "2 4\napple 1.0 2.0 3.0 4.0\nbanana 9.0 9.0 9.0 9.0\n");
  const auto report = load_word_vectors(p, vocab, path);
  REQUIRE(report.loaded == 1);
  REQUIRE(report.not_in_vocab == 1);
  REQUIRE(p.words.col(*vocab.find("apple"))[2] == 3.0);
  REQUIRE(p.words.col(*vocab.find("pear")) == before_pear);
}

TEST_CASE("load_word_vectors rejects dimension mismatch and bad floats") {
  oracle::TempDir dir;
  Vocabulary vocab;
  vocab.add("w", 1);
  auto p = init_params(1, vocab.size(), 4, EncoderKind::kWavg, 1);
  REQUIRE_THROWS_WITH(
      load_word_vectors(p, vocab, oracle::write_file(dir.file("a.txt"), "1 2\nw 0.5 0.5\n")),
      Catch::Matchers::ContainsSubstring("dimension"));
  REQUIRE_THROWS_WITH(
      load_word_vectors(p, vocab,
                        oracle::write_file(dir.file("b.txt"), "1 4\nw 0.5 oops 0.5 0.5\n")),
      Catch::Matchers::ContainsSubstring(":2:"));
  REQUIRE_THROWS(
      load_word_vectors(p, vocab, oracle::write_file(dir.file("c.txt"), "3 4\nw 1 2 3 4\n")));
}
