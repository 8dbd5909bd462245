#include "tbparse/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tbparse/align.hpp"
#include "tbparse/checkpoint.hpp"
#include "tbparse/cluster.hpp"
#include "tbparse/decoder.hpp"
#include "tbparse/eval.hpp"
#include "tbparse/manifest.hpp"
#include "tbparse/segment.hpp"
#include "tbparse/trainer.hpp"
#include "tbparse/unicode.hpp"

namespace tbparse::cli {

namespace {

// Errors in user-supplied data or files (exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad flag combinations detected after parsing (exit code 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool quiet() {
  const char* v = std::getenv("TBPARSE_LOG");
  return v != nullptr && std::string(v) == "quiet";
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("cannot write '" + path + "'");
}

Treebank read_treebank(const std::string& path, const std::string& id = {}) {
  const std::string text = read_text(path);
  try {
    return parse_conllu(text, id);
  } catch (const ConlluError& e) {
    throw DataError(path + ": " + e.what());
  }
}

struct TrainArgs {
  std::string manifest, model, checkpoint_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  Manifest m;
  try {
    m = parse_manifest(read_text(a.manifest), std::filesystem::path(a.manifest).parent_path().string());
  } catch (const ManifestError& e) {
    throw DataError(a.manifest + ": " + e.what());
  }
  Hyperparams hyper;
  for (const auto& [k, v] : m.hyper) set_hyperparameter(hyper, k, v);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    try {
      set_hyperparameter(hyper, kv.substr(0, eq), kv.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  try {
    hyper.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::uint64_t seed = a.seed.value_or(m.seed.value_or(kDefaultSeed));

  std::vector<TrainingTreebank> data;
  PretrainedTable pretrained;
  bool any_pretrained = false;
  for (const auto& t : m.treebanks) {
    TrainingTreebank tb{t.id, read_treebank(t.train, t.id).sentences, {}};
    if (!t.dev.empty()) tb.dev = read_treebank(t.dev, t.id).sentences;
    data.push_back(std::move(tb));
    if (!t.pretrained.empty()) {
      PretrainedLoad load;
      try {
        load = load_pretrained(t.pretrained);
      } catch (const std::runtime_error& e) {
        throw DataError(e.what());
      }
      if (load.skipped_rows > 0 && !quiet()) {
        err << "warning: " << t.pretrained << ": skipped " << load.skipped_rows << " rows of the wrong dimension\n";
      }
      load.table.frozen = t.frozen;
      pretrained.merge(load.table);
      any_pretrained = true;
    }
  }
  TrainOptions opts;
  opts.hyper = hyper;
  opts.seed = seed;
  opts.pretrained = any_pretrained ? &pretrained : nullptr;
  opts.proxies = m.proxies;
  if (!m.translit.empty()) {
    try {
      opts.translit = parse_transliteration(read_text(m.translit));
    } catch (const DataError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw DataError(m.translit + ": " + e.what());
    }
  }
  opts.log = quiet() ? nullptr : &err;

  if (!quiet()) {
    err << "command = train\nmanifest = " << a.manifest << "\nmodel = " << a.model << "\nseed = " << seed << '\n';
    if (!a.checkpoint_dir.empty()) err << "checkpoint_dir = " << a.checkpoint_dir << '\n';
    err << "translit = " << m.translit << '\n';
    for (const auto& [k, v] : m.proxies) err << "proxy = " << k << " -> " << v << '\n';
    err << describe(hyper);
    for (const auto& t : m.treebanks) {
      err << "treebank = " << t.id << "\n  train = " << t.train << "\n  dev = " << t.dev
          << "\n  pretrained = " << t.pretrained << "\n  frozen = " << (t.frozen ? "true" : "false") << '\n';
    }
  }
  EpochCallback on_epoch;
  if (!a.checkpoint_dir.empty()) {
    std::filesystem::create_directories(a.checkpoint_dir);
    on_epoch = [&](const EpochReport& r, const ParserModel& model) {
      save_model(model, (std::filesystem::path(a.checkpoint_dir) / ("epoch" + std::to_string(r.epoch) + ".model")).string());
    };
  }
  TrainResult result;
  try {
    result = train_multi(data, opts, on_epoch);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  save_model(result.model, a.model);
  out << "selected epoch " << result.selected_epoch << '\n';
  return kExitOk;
}

struct ParseArgs {
  std::string model, input, output, treebank, translit;
  std::vector<std::string> proxies;
  int threads = 1;
};

int cmd_parse(const ParseArgs& a, std::ostream& out, std::ostream& err) {
  ParserModel model;
  try {
    model = load_model(a.model);
  } catch (const CheckpointError& e) {
    throw DataError(e.what());
  }
  for (const auto& p : a.proxies) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw UsageError("--proxy expects test=train, got '" + p + "'");
    model.proxies[p.substr(0, eq)] = p.substr(eq + 1);
  }
  if (!a.translit.empty()) {
    try {
      model.translit = parse_transliteration(read_text(a.translit));
    } catch (const DataError&) {
      throw;
    } catch (const std::runtime_error& e) {
      throw DataError(a.translit + ": " + e.what());
    }
  }
  std::string tb = a.treebank;
  if (tb.empty()) {
    if (model.uses_treebank) throw UsageError("this model has treebank embeddings; pass --treebank");
    tb = model.vocab.treebanks.size() > 0 ? model.vocab.treebanks.key(0) : "";
  }
  if (!quiet()) {
    err << "command = parse\nmodel = " << a.model << "\ninput = " << a.input << "\noutput = " << a.output
        << "\ntreebank = " << tb << "\nthreads = " << a.threads << "\ntranslit = " << a.translit << '\n';
    for (const auto& [k, v] : model.proxies) err << "proxy = " << k << " -> " << v << '\n';
  }
  const Treebank input = read_treebank(a.input);
  Treebank parsed;
  try {
    parsed = parse_treebank(model, input, tb, a.threads);
  } catch (const UnknownTreebank& e) {
    throw DataError(e.what());
  }
  const std::string text = write_conllu(parsed);
  if (a.output.empty() || a.output == "-") {
    out << text;
  } else {
    write_text(a.output, text);
  }
  return kExitOk;
}

int cmd_segment(const std::string& lexicon, const std::string& input, const std::string& output, std::ostream& out,
                std::ostream& err) {
  if (!quiet()) err << "command = segment\nlexicon = " << lexicon << "\ninput = " << input << "\noutput = " << output << '\n';
  const std::vector<std::string> words = read_word_list(lexicon);
  const TrieLexicon lex = build_trie(words);
  if (lex.skipped_empty() > 0 && !quiet()) err << "warning: skipped " << lex.skipped_empty() << " empty lexicon lines\n";
  std::istringstream text(read_text(input));
  std::ostringstream result;
  for (std::string line; std::getline(text, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    for (const auto& tok : max_match(line, lex)) result << tok << '\n';
    result << '\n';
  }
  if (output.empty() || output == "-") {
    out << result.str();
  } else {
    write_text(output, result.str());
  }
  return kExitOk;
}

int cmd_align(const std::string& source, const std::vector<std::string>& targets, int threshold,
              const std::string& beads, std::ostream& out, std::ostream& err) {
  GaleChurchParams params;
  if (!beads.empty()) {
    params.enabled.fill(false);
    std::istringstream list(beads);
    for (std::string k; std::getline(list, k, ',');) {
      bool found = false;
      for (BeadKind b : kAllBeads) {
        if (k == bead_name(b)) params.enabled[static_cast<std::size_t>(b)] = found = true;
      }
      if (!found) throw UsageError("unknown bead kind '" + k + "'");
    }
  }
  if (threshold < 0 || threshold > static_cast<int>(targets.size())) {
    throw UsageError("--threshold must be between 0 and the number of targets");
  }
  if (!quiet()) {
    err << "command = align\nsource = " << source << "\nthreshold = " << threshold << "\nbeads = " << beads << '\n';
    for (const auto& t : targets) err << "target = " << t << '\n';
  }
  const auto src = line_lengths(source);
  std::vector<std::vector<AlignmentBead>> alignments;
  for (const auto& t : targets) {
    try {
      alignments.push_back(gale_church_align(src, line_lengths(t), params));
    } catch (const std::invalid_argument& e) {
      throw DataError(t + ": " + e.what());
    }
    out << "# target " << t << '\n' << format_beads(alignments.back());
  }
  std::vector<int> candidates;
  for (int i = 1; i < static_cast<int>(src.size()); ++i) candidates.push_back(i);
  out << "# accepted boundaries\n";
  for (int b : vote_boundaries(candidates, alignments, threshold)) out << b << '\n';
  return kExitOk;
}

int cmd_cluster(const std::string& model_path, int groups, std::ostream& out, std::ostream& err) {
  if (!quiet()) err << "command = cluster\nmodel = " << model_path << "\ngroups = " << groups << '\n';
  ParserModel model;
  try {
    model = load_model(model_path);
  } catch (const CheckpointError& e) {
    throw DataError(e.what());
  }
  std::map<std::string, Eigen::VectorXd> vecs;
  try {
    vecs = treebank_vectors(model);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  if (vecs.size() < 2) throw DataError("clustering needs at least two treebanks");
  std::vector<std::string> labels;
  Eigen::MatrixXd points(static_cast<Eigen::Index>(vecs.size()), vecs.begin()->second.size());
  for (const auto& [id, v] : vecs) {
    points.row(static_cast<Eigen::Index>(labels.size())) = v.transpose();
    labels.push_back(id);
  }
  const Dendrogram d = ward_cluster(labels, points);
  out << format_dendrogram(d);
  if (groups > 0) {
    if (groups > static_cast<int>(labels.size())) throw UsageError("--groups exceeds the number of treebanks");
    out << "# groups\n" << format_groups(cut_groups(d, groups));
  }
  return kExitOk;
}

int cmd_eval(const std::string& system, const std::string& gold, const std::string& format, std::ostream& out,
             std::ostream& err) {
  if (!quiet()) err << "command = eval\nsystem = " << system << "\ngold = " << gold << "\nformat = " << format << '\n';
  const eval::EvalReport r = eval::evaluate(read_treebank(system), read_treebank(gold));
  out << (format == "kv" ? eval::format_report_kv(r) : eval::format_report(r));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-treebank dependency parser toolkit", "tbparse"};
  app.require_subcommand(1);

  TrainArgs train;
  std::uint64_t seed_value = 0;
  auto* train_cmd = app.add_subcommand("train", "train a parser from a manifest");
  train_cmd->add_option("--manifest", train.manifest, "training manifest")->required();
  train_cmd->add_option("--model", train.model, "output model file")->required();
  auto* seed_opt = train_cmd->add_option("--seed", seed_value, "random seed (overrides the manifest)");
  train_cmd->add_option("--checkpoint-dir", train.checkpoint_dir, "write a model after every epoch");
  train_cmd->add_option("--set", train.overrides, "hyperparameter override key=value");

  ParseArgs parse;
  auto* parse_cmd = app.add_subcommand("parse", "parse a CoNLL-U file");
  parse_cmd->add_option("--model", parse.model, "model file")->required();
  parse_cmd->add_option("--input", parse.input, "input CoNLL-U")->required();
  parse_cmd->add_option("--output", parse.output, "output CoNLL-U (default stdout)");
  parse_cmd->add_option("--treebank", parse.treebank, "treebank id or proxied test id");
  parse_cmd->add_option("--proxy", parse.proxies, "extra proxy mapping test=train");
  parse_cmd->add_option("--translit", parse.translit, "transliteration map replacing the model's");
  parse_cmd->add_option("--threads", parse.threads, "worker threads")->check(CLI::PositiveNumber);

  std::string lexicon, seg_input, seg_output;
  auto* seg_cmd = app.add_subcommand("segment", "maximum-matching word segmentation");
  seg_cmd->add_option("--lexicon", lexicon, "word list, one per line")->required();
  seg_cmd->add_option("--input", seg_input, "raw text")->required();
  seg_cmd->add_option("--output", seg_output, "one token per line, blank line per input line");

  std::string source, beads;
  std::vector<std::string> targets;
  int threshold = 3;
  auto* align_cmd = app.add_subcommand("align", "Gale-Church alignment with boundary voting");
  align_cmd->add_option("--source", source, "source chunks, one per line")->required();
  align_cmd->add_option("--target", targets, "segmented target sentences, one per line")->required();
  align_cmd->add_option("--threshold", threshold, "votes needed to accept a boundary");
  align_cmd->add_option("--beads", beads, "enabled bead kinds, e.g. 1-1,2-1");

  std::string cluster_model;
  int groups = 0;
  auto* cluster_cmd = app.add_subcommand("cluster", "Ward clustering of treebank embeddings");
  cluster_cmd->add_option("--model", cluster_model, "model file")->required();
  cluster_cmd->add_option("--groups", groups, "also print a cut into this many groups");

  std::string system, gold, format = "text";
  auto* eval_cmd = app.add_subcommand("eval", "score a system file against gold");
  eval_cmd->add_option("--system", system, "system CoNLL-U")->required();
  eval_cmd->add_option("--gold", gold, "gold CoNLL-U")->required();
  eval_cmd->add_option("--format", format, "text or kv")->check(CLI::IsMember({"text", "kv"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run with --help for usage)\n";
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) {
      if (*seed_opt) train.seed = seed_value;
      return cmd_train(train, out, err);
    }
    if (parse_cmd->parsed()) return cmd_parse(parse, out, err);
    if (seg_cmd->parsed()) return cmd_segment(lexicon, seg_input, seg_output, out, err);
    if (align_cmd->parsed()) return cmd_align(source, targets, threshold, beads, out, err);
    if (cluster_cmd->parsed()) return cmd_cluster(cluster_model, groups, out, err);
    if (eval_cmd->parsed()) return cmd_eval(system, gold, format, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace tbparse::cli
