#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "textnet/eval.hpp"
#include "textnet/graph.hpp"
#include "textnet/params.hpp"
#include "textnet/synth.hpp"
#include "textnet/trainer.hpp"
#include "textnet/word_pretrain.hpp"

namespace {

std::vector<double> parse_ratio_list(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    const std::string tok = s.substr(start, comma - start);
    if (!tok.empty()) {
      double v = 0;
      try {
        v = std::stod(tok);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed ratio '" + tok + "'");
      }
      if (v <= 0 || v >= 1) throw std::runtime_error("ratio must lie in (0,1): " + tok);
      out.push_back(v);
    }
    start = comma + 1;
  }
  if (out.empty()) throw std::runtime_error("empty ratio list");
  return out;
}

struct GenSynthArgs {
  textnet::SynthConfig cfg;
  std::string out_prefix = "synth";
};

int run_gen_synth(const GenSynthArgs& args) {
  const std::string edges = args.out_prefix + ".edges";
  const std::string contents = args.out_prefix + ".contents";
  const std::string labels = args.out_prefix + ".labels";
  const auto counts = textnet::generate(args.cfg, edges, contents, labels);
  std::cout << "kind,path,count\n";
  std::cout << "edges," << edges << ',' << counts.edges << '\n';
  std::cout << "contents," << contents << ',' << counts.documents << '\n';
  std::cout << "labels," << labels << ',' << counts.labels << '\n';
  return 0;
}

struct TrainArgs {
  std::string edges_path;
  std::string contents_path;
  std::string word_vectors_path;
  std::string out_path = "embeddings.txt";
  std::string loss_path = "loss.csv";
  std::string export_part = "full";
  std::string encoder = "wavg";
  bool directed = true;
  bool symmetric_score = false;
  int min_count = 1;
  textnet::TrainConfig cfg;
};

int run_train(const TrainArgs& args) {
  textnet::TrainConfig cfg = args.cfg;
  cfg.encoder = textnet::parse_encoder_kind(args.encoder);
  cfg.directed_score = !args.symmetric_score;
  if (cfg.alpha < 1.0 && args.contents_path.empty()) {
    throw std::runtime_error("a content file is required when alpha < 1 (got alpha = " +
                             std::to_string(cfg.alpha) + ")");
  }

  textnet::NodeInterner interner;
  auto edges = textnet::load_edges(args.edges_path, args.directed, interner);
  textnet::ContentLoad contents;
  if (!args.contents_path.empty()) {
    contents = textnet::load_contents(args.contents_path, args.min_count, interner);
    if (contents.empty_documents > 0) {
      std::cerr << "textnet: warning: skipped " << contents.empty_documents
                << " empty document(s)\n";
    }
  }
  const auto net =
      textnet::build_augmented(interner.size(), std::move(edges), contents.sentences);

  auto params = textnet::init_params(net.node_count, contents.vocab.size(), cfg.dim, cfg.encoder,
                                     cfg.seed);
  if (!args.word_vectors_path.empty()) {
    const auto report = textnet::load_word_vectors(params, contents.vocab, args.word_vectors_path);
    if (report.not_in_vocab > 0) {
      std::cerr << "textnet: warning: " << report.not_in_vocab
                << " pretrained word(s) not in the corpus vocabulary\n";
    }
  }

  const auto result = textnet::train(net, params, cfg);

  textnet::export_embeddings(params, interner.keys, args.out_path,
                             textnet::parse_export_part(args.export_part));
  {
    std::ofstream loss_out(args.loss_path);
    if (!loss_out) throw std::runtime_error("cannot write loss file: " + args.loss_path);
    textnet::write_loss_csv(loss_out, result);
  }
  std::cout << "steps,nn_steps,nc_steps\n";
  std::cout << result.total_steps << ',' << result.nn_steps << ',' << result.nc_steps << '\n';
  return 0;
}

struct EvalArgs {
  std::string embeddings_path;
  std::string labels_path;
  std::string out_path;
  std::string ratios = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
  int trials = 40;
  double lambda = 1.0;
  int iters = 500;
  std::uint64_t seed = 1;
};

int run_eval(const EvalArgs& args) {
  const auto embeddings = textnet::read_embedding_file(args.embeddings_path);
  const auto labeled = textnet::load_labels(args.labels_path);
  const auto features = textnet::build_feature_matrix(embeddings, labeled);
  const auto ratios = parse_ratio_list(args.ratios);
  const auto report = textnet::evaluate(features, labeled.labels, labeled.num_classes(), ratios,
                                        args.trials, args.seed, args.lambda, args.iters);
  textnet::write_eval_csv(std::cout, report);
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot write report file: " + args.out_path);
    textnet::write_eval_csv(out, report);
  }
  return 0;
}

struct PretrainArgs {
  std::string contents_path;
  std::string out_path = "word_vectors.txt";
  int min_count = 1;
  textnet::PretrainConfig cfg;
};

int run_pretrain(const PretrainArgs& args) {
  textnet::NodeInterner interner;
  const auto contents = textnet::load_contents(args.contents_path, args.min_count, interner);
  if (contents.empty_documents > 0) {
    std::cerr << "textnet: warning: skipped " << contents.empty_documents
              << " empty document(s)\n";
  }
  std::vector<textnet::Sentence> sentences;
  sentences.reserve(contents.sentences.size());
  for (const auto& [node, sent] : contents.sentences) sentences.push_back(sent);
  const auto table = textnet::pretrain_words(sentences, contents.vocab.size(), args.cfg);
  textnet::write_word_vectors(args.out_path, contents.vocab, table);
  std::cout << "words,dim,path\n";
  std::cout << contents.vocab.size() << ',' << args.cfg.dim << ',' << args.out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint node-embedding trainer for networks with text content"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Plain key = value configuration file; sections are named "
                                 "after subcommands and command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenSynthArgs gen;
  auto* cmd_gen = app.add_subcommand("gen-synth", "Generate a labeled synthetic network");
  cmd_gen->add_option("--nodes", gen.cfg.nodes, "Number of nodes")->capture_default_str();
  cmd_gen->add_option("--communities", gen.cfg.communities, "Number of communities")
      ->capture_default_str();
  cmd_gen->add_option("--p-in", gen.cfg.p_in, "Within-community edge probability")
      ->capture_default_str();
  cmd_gen->add_option("--p-out", gen.cfg.p_out, "Cross-community edge probability")
      ->capture_default_str();
  cmd_gen->add_option("--docs-per-node", gen.cfg.docs_per_node, "Documents per node")
      ->capture_default_str();
  cmd_gen->add_option("--sent-len-min", gen.cfg.sent_len_min, "Minimum sentence length")
      ->capture_default_str();
  cmd_gen->add_option("--sent-len-max", gen.cfg.sent_len_max, "Maximum sentence length")
      ->capture_default_str();
  cmd_gen->add_option("--vocab-per-community", gen.cfg.vocab_per_community,
                      "Community vocabulary size")
      ->capture_default_str();
  cmd_gen->add_option("--vocab-shared", gen.cfg.vocab_shared, "Shared vocabulary size")
      ->capture_default_str();
  cmd_gen->add_option("--content-signal", gen.cfg.content_signal,
                      "Probability a word is community-specific")
      ->capture_default_str();
  cmd_gen->add_option("--seed", gen.cfg.seed, "RNG seed")->capture_default_str();
  cmd_gen->add_option("--out-prefix", gen.out_prefix,
                      "Prefix for the .edges/.contents/.labels files")
      ->capture_default_str();

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Jointly train node embeddings");
  cmd_train->add_option("--edges", tr.edges_path, "Edge file (src<TAB>dst per line)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--contents", tr.contents_path,
                        "Content file (node_key<TAB>document per line)")
      ->check(CLI::ExistingFile);
  cmd_train->add_option("--alpha", tr.cfg.alpha, "Probability of a structural step")
      ->capture_default_str();
  cmd_train->add_option("--encoder", tr.encoder, "Sentence encoder: wavg, gru, or bigru")
      ->check(CLI::IsMember({"wavg", "gru", "bigru"}))
      ->capture_default_str();
  cmd_train->add_option("--dim", tr.cfg.dim, "Embedding dimension (even)")->capture_default_str();
  cmd_train->add_option("--epochs", tr.cfg.epochs, "Passes over |E_nn| + |E_nc| instances")
      ->capture_default_str();
  cmd_train->add_option("--max-steps", tr.cfg.max_steps,
                        "Explicit step count (overrides --epochs when > 0)")
      ->capture_default_str();
  cmd_train->add_option("--eta0", tr.cfg.eta0,
                        "Initial learning rate (0 = 0.025 for wavg, 0.01 for gru/bigru)")
      ->capture_default_str();
  cmd_train->add_option("--neg-nn", tr.cfg.neg_nn, "Negative samples per structural step")
      ->capture_default_str();
  cmd_train->add_option("--neg-nc", tr.cfg.neg_nc, "Negative samples per content step")
      ->capture_default_str();
  cmd_train->add_option("--word-vectors", tr.word_vectors_path,
                        "Pretrained word vectors (embedding text format)")
      ->check(CLI::ExistingFile);
  cmd_train->add_flag("--freeze-words", tr.cfg.freeze_words,
                      "Do not update word vectors during training");
  cmd_train->add_option("--directed", tr.directed,
                        "Treat the edge file as directed; false duplicates each edge both ways")
      ->capture_default_str();
  cmd_train->add_flag("--symmetric-score", tr.symmetric_score,
                      "Score edges with the symmetric full-vector form instead of the "
                      "in/out split");
  cmd_train->add_option("--workers", tr.cfg.workers, "Trainer threads (1 = deterministic)")
      ->capture_default_str();
  cmd_train->add_option("--seed", tr.cfg.seed, "RNG seed")->capture_default_str();
  cmd_train->add_option("--min-count", tr.min_count, "Vocabulary min count; rarer words map to <unk>")
      ->capture_default_str();
  cmd_train->add_option("--grad-clip", tr.cfg.grad_clip,
                        "Max L2 norm of one step's gradient (off when unset)");
  cmd_train->add_flag("--uniform-negatives", tr.cfg.uniform_negatives,
                      "Sample negatives uniformly instead of by the 0.75-power distribution");
  cmd_train->add_option("--out", tr.out_path, "Output embedding file")->capture_default_str();
  cmd_train->add_option("--loss-out", tr.loss_path, "Output loss trace CSV")
      ->capture_default_str();
  cmd_train->add_option("--export", tr.export_part, "Which node vector to export")
      ->check(CLI::IsMember({"full", "in", "out"}))
      ->capture_default_str();

  EvalArgs ev;
  auto* cmd_eval = app.add_subcommand("eval", "Node-classification evaluation of embeddings");
  cmd_eval->add_option("--embeddings", ev.embeddings_path, "Embedding file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--labels", ev.labels_path, "Labels file (node_key<TAB>label per line)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_eval->add_option("--ratios", ev.ratios, "Comma-separated training ratios")
      ->capture_default_str();
  cmd_eval->add_option("--trials", ev.trials, "Independent trials per ratio")
      ->capture_default_str();
  cmd_eval->add_option("--lambda", ev.lambda, "L2 strength of the classifier")
      ->capture_default_str();
  cmd_eval->add_option("--iters", ev.iters, "Classifier iteration cap")->capture_default_str();
  cmd_eval->add_option("--seed", ev.seed, "RNG seed")->capture_default_str();
  cmd_eval->add_option("--out", ev.out_path, "Also write the report CSV here");

  PretrainArgs pre;
  auto* cmd_pre = app.add_subcommand("pretrain-words", "Pretrain word vectors on the contents");
  cmd_pre->add_option("--contents", pre.contents_path, "Content file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_pre->add_option("--out", pre.out_path, "Output word-vector file")->capture_default_str();
  cmd_pre->add_option("--dim", pre.cfg.dim, "Word vector dimension")->capture_default_str();
  cmd_pre->add_option("--window", pre.cfg.window, "Context window size")->capture_default_str();
  cmd_pre->add_option("--neg", pre.cfg.neg, "Negative samples per pair")->capture_default_str();
  cmd_pre->add_option("--epochs", pre.cfg.epochs, "Corpus passes")->capture_default_str();
  cmd_pre->add_option("--eta0", pre.cfg.eta0, "Initial learning rate")->capture_default_str();
  cmd_pre->add_option("--min-count", pre.min_count,
                      "Vocabulary min count; rarer words map to <unk>")
      ->capture_default_str();
  cmd_pre->add_option("--subsample", pre.cfg.subsample,
                      "Frequent-word subsampling threshold (0 = off)")
      ->capture_default_str();
  cmd_pre->add_option("--workers", pre.cfg.workers, "Threads (1 = deterministic)")
      ->capture_default_str();
  cmd_pre->add_option("--seed", pre.cfg.seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_gen->parsed()) return run_gen_synth(gen);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_eval->parsed()) return run_eval(ev);
    if (cmd_pre->parsed()) return run_pretrain(pre);
  } catch (const std::exception& e) {
    std::cerr << "textnet: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
