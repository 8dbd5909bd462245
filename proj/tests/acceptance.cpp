// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is 1 when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <sys/wait.h>
#include <string>
#include <unistd.h>
#include <unordered_set>
#include <vector>

#include "oracles/fixtures.hpp"
#include "oracles/gale_church_oracle.hpp"
#include "oracles/parser_harness.hpp"
#include "oracles/transition_oracle.hpp"
#include "oracles/ward_oracle.hpp"
#include "tbparse/align.hpp"
#include "tbparse/cli.hpp"
#include "tbparse/cluster.hpp"
#include "tbparse/conllu.hpp"
#include "tbparse/decoder.hpp"
#include "tbparse/eval.hpp"
#include "tbparse/segment.hpp"
#include "tbparse/synth.hpp"
#include "tbparse/trainer.hpp"
#include "tbparse/transitions.hpp"

using namespace tbparse;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome check(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("tbparse_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// 1. Gradient soundness over the composed parser.

Outcome gradients() {
  const int seeds = 20;
  double worst4 = 0.0, worst2 = 0.0;
  std::string where;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const auto a = harness::grammar_sentences(100 + seed, 3, 6);
    const auto b = harness::grammar_sentences(200 + seed, 3, 6);
    auto m = harness::model_for({a, b}, harness::tiny_hyper(), seed);
    harness::perturb_zero_parameters(m, seed);
    const Sentence& s = a[seed % a.size()];
    const auto gold = *gold_tree(s, m.vocab.labels);
    const int tb_row = static_cast<int>(seed % 2);
    auto loss = [&](nn::Graph& g) { return harness::oracle_path_loss(g, m, s, gold, tb_row, seed); };
    nn::GradCheckOptions five;
    five.order = 4;
    five.eps = 1e-2;
    const auto r = nn::grad_check(m.params, loss, five);
    if (r.max_relative_error > worst4) {
      worst4 = r.max_relative_error;
      where = r.worst_parameter;
    }
    nn::GradCheckOptions two;
    two.eps = 1e-5;
    worst2 = std::max(worst2, nn::grad_check(m.params, loss, two).max_relative_error);
  }
  return check(worst4 < 1e-4, fmt("%d seeds, five-point eps=1e-2 max rel err %.2e (%s); two-point eps=1e-5 %.2e "
                                  "(round-off bound, informational)",
                                  seeds, worst4, where.c_str(), worst2));
}

// 2 and 3. Transition system oracles.

transitions::GoldTree random_gold(int n, Rng& rng) {
  auto heads = uniform01(rng) < 0.5 ? synth::random_tree(n, rng) : synth::random_projective_tree(n, rng);
  std::vector<int> labels(heads.size(), 0);
  for (std::size_t i = 1; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  return transitions::make_gold(std::move(heads), std::move(labels));
}

Outcome oracle_replay() {
  Rng rng(2);
  int exact = 0, nonprojective = 0;
  const int trees = 500;
  for (int t = 0; t < trees; ++t) {
    const auto g = random_gold(1 + static_cast<int>(uniform_index(rng, 6)), rng);
    nonprojective += transitions::is_projective(g.head) ? 0 : 1;
    const auto c = oracle::replay(g);
    exact += (c.head == g.head && std::equal(g.label.begin() + 1, g.label.end(), c.label.begin() + 1)) ? 1 : 0;
  }
  return check(exact == trees, fmt("%d/%d trees reconstructed (%d non-projective)", exact, trees, nonprojective));
}

Outcome dynamic_costs() {
  Rng rng(3);
  long checked = 0, mismatches = 0;
  for (int t = 0; t < 100; ++t) {
    const auto g = random_gold(1 + static_cast<int>(uniform_index(rng, 5)), rng);
    oracle::CompletionSearch search(g);
    for (const auto& c : oracle::reachable_configs(g)) {
      for (auto m : transitions::legal_moves(c, g).moves()) {
        const int expected = search.loss(transitions::apply(c, oracle::unlabeled(m))) - search.loss(c);
        mismatches += transitions::dynamic_cost(c, m, g) == expected ? 0 : 1;
        ++checked;
      }
    }
  }
  return check(mismatches == 0 && checked > 0,
               fmt("%ld mismatches over %ld (configuration, move) pairs", mismatches, checked));
}

// 4. Overfitting a small treebank with the default hyperparameters.

Outcome overfit() {
  synth::GrammarOptions go;
  go.max_length = 12;
  const auto grammar = synth::make_grammar(4, go);
  Rng rng(5);
  const auto data = synth::sample_treebank(grammar, 50, rng, "of").sentences;
  TrainOptions opts;
  opts.seed = 4;
  std::vector<double> las;
  const auto r = train_multi({{"of", data, {}}}, opts, [&](const EpochReport&, const ParserModel& m) {
    std::vector<Sentence> parsed;
    for (const auto& s : data) parsed.push_back(parse_sentence(m, s, 0));
    las.push_back(attachment_las(data, parsed));
  });
  const auto best = std::max_element(las.begin(), las.end());
  const int epoch = static_cast<int>(best - las.begin()) + 1;
  return check(*best >= 99.0, fmt("best training LAS %.2f at epoch %d of %d, final %.2f", *best, epoch,
                                  opts.hyper.epochs, las.back()));
}

// 5. Multi-treebank training helps a low-resource treebank.

Hyperparams reduced_hyper() {
  Hyperparams h;
  h.char_emb_dim = 24;
  h.char_bilstm_out = 24;
  h.word_emb_dim = 32;
  h.pos_emb_dim = 8;
  h.tb_emb_dim = 4;
  h.word_bilstm_hidden = 32;
  h.mlp_hidden = 32;
  return h;
}

Outcome multi_treebank() {
  const int seeds = 5;
  double mono_sum = 0.0, multi_sum = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    synth::GrammarOptions go;
    go.max_length = 15;
    const auto grammar = synth::make_grammar(seed, go);
    Rng rng(seed * 17);
    const auto low = synth::sample_treebank(grammar, 10, rng, "low").sentences;
    const auto donor = synth::sample_treebank(grammar, 200, rng, "donor").sentences;
    const auto held_out = synth::sample_treebank(grammar, 200, rng, "low").sentences;
    TrainOptions opts;
    opts.hyper = reduced_hyper();
    opts.seed = seed;
    auto las_of = [&](const ParserModel& m) {
      std::vector<Sentence> parsed;
      for (const auto& s : held_out) parsed.push_back(parse_sentence(m, s, "low"));
      return attachment_las(held_out, parsed);
    };
    const double mono = las_of(train_multi({{"low", low, {}}}, opts).model);
    const double multi = las_of(train_multi({{"low", low, {}}, {"donor", donor, {}}}, opts).model);
    mono_sum += mono;
    multi_sum += multi;
    per_seed += fmt(" %.1f/%.1f", mono, multi);
  }
  const double mono = mono_sum / seeds, multi = multi_sum / seeds;
  return check(multi >= mono, fmt("mean held-out LAS mono %.2f, multi %.2f; per seed mono/multi:%s", mono, multi,
                                  per_seed.c_str()));
}

// 6. Word dropout.

Outcome word_dropout() {
  Sentence s;
  for (const char* form : {"once", "twice", "twice"}) {
    Token t;
    t.id = static_cast<int>(s.size()) + 1;
    t.form = form;
    t.upos = "NOUN";
    t.head = t.id == 1 ? 0 : 1;
    t.deprel = t.id == 1 ? "root" : "dep";
    s.tokens.push_back(t);
  }
  const auto m = harness::model_for({{s}}, harness::tiny_hyper(), 6);
  Rng rng(6);
  Token t;
  t.form = "once";
  t.upos = "NOUN";
  const int draws = 10000;
  int replaced = 0;
  for (int i = 0; i < draws; ++i) {
    nn::Graph g;
    InputTrace trace;
    compose_input(g, m, t, -1, Mode::Train, &rng, &trace);
    replaced += trace.word_oov ? 1 : 0;
  }
  const double rate = static_cast<double>(replaced) / draws;
  const double expected = m.hyper.alpha_oov / (m.hyper.alpha_oov + 1.0);
  return check(std::abs(rate - expected) <= 0.02, fmt("rate %.4f over %d draws, expected %.4f", rate, draws, expected));
}

// 7. Evaluation.

Outcome evaluation() {
  Rng rng(7);
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    const auto tb = synth::random_treebank(rng);
    const auto r = eval::evaluate(tb, tb);
    bool all = true;
    for (const auto& [name, score] : r.metrics) {
      all = all && std::abs(score.precision() - 100.0) < 1e-9 && std::abs(score.recall() - 100.0) < 1e-9 &&
            std::abs(score.f1() - 100.0) < 1e-9;
    }
    identical += all ? 1 : 0;
  }
  const auto r = eval::evaluate(fixtures::three_system(), fixtures::three_gold());
  struct Expect {
    const char* metric;
    double p, r, f;
  };
  const std::vector<Expect> expected{{"Words", 100.0 * 8 / 9, 80.0, 100.0 * 16 / 19},
                                     {"Sentences", 100.0, 100.0, 100.0},
                                     {"LAS", 100.0 * 7 / 9, 70.0, 100.0 * 14 / 19},
                                     {"MLAS", 100.0 * 5 / 7, 100.0 * 5 / 7, 100.0 * 5 / 7}};
  int hand = 0;
  for (const auto& e : expected) {
    const auto& s = r.at(e.metric);
    hand += (std::abs(s.precision() - e.p) < 0.01 && std::abs(s.recall() - e.r) < 0.01 && std::abs(s.f1() - e.f) < 0.01)
                ? 1
                : 0;
  }
  return check(identical == 100 && hand == static_cast<int>(expected.size()),
               fmt("%d/100 self-evaluations perfect; hand example %d/%zu metrics match (LAS F1 %.2f, MLAS F1 %.2f, "
                   "Words F1 %.2f)",
                   identical, hand, expected.size(), r.at("LAS").f1(), r.at("MLAS").f1(), r.at("Words").f1()));
}

// 8. Gale-Church alignment and boundary voting.

Outcome gale_church() {
  Rng rng(8);
  int optimal = 0;
  const int instances = 1000;
  for (int i = 0; i < instances; ++i) {
    std::vector<int> src(uniform_index(rng, 9)), tgt(uniform_index(rng, 9));
    for (auto& x : src) x = 1 + static_cast<int>(uniform_index(rng, 60));
    for (auto& x : tgt) x = 1 + static_cast<int>(uniform_index(rng, 60));
    const double dp = total_cost(gale_church_align(src, tgt));
    const double brute = oracle::ExhaustiveAligner(src, tgt).best();
    optimal += std::abs(dp - brute) <= 1e-9 * std::max(1.0, std::abs(brute)) ? 1 : 0;
  }
  const auto four = fixtures::four_corpora();
  const std::vector<int> candidates{1, 2, 3, 4};
  const bool voting = vote_boundaries(candidates, four, 3) == std::vector<int>{1, 2} &&
                      vote_boundaries(candidates, four, 4) == std::vector<int>{1} &&
                      vote_boundaries(candidates, four, 2) == std::vector<int>{1, 2, 3};
  return check(optimal == instances && voting, fmt("%d/%d instances optimal; voting fixtures %s", optimal, instances,
                                                   voting ? "accepted {1,2} at 3 of 4" : "wrong"));
}

// 9. Maximum matching.

Outcome maximum_matching() {
  using Tokens = std::vector<std::string>;
  Rng rng(9);
  const int strings = 10000;
  int lossless = 0, valid = 0, greedy = 0;
  for (int i = 0; i < strings; ++i) {
    std::vector<std::string> words;
    const std::size_t k = uniform_index(rng, 12);
    for (std::size_t w = 0; w < k; ++w) words.push_back(fixtures::random_text(rng, 4, false));
    // Every third string carries stray bytes; the reference matcher only reads valid UTF-8.
    const bool invalid = i % 3 == 0;
    const std::string text = fixtures::random_text(rng, 40, invalid);
    const auto out = max_match(text, build_trie(words));
    lossless += std::accumulate(out.begin(), out.end(), std::string()) == text ? 1 : 0;
    if (!invalid) {
      const std::unordered_set<std::string> set(words.begin(), words.end());
      ++valid;
      greedy += out == fixtures::oracle_max_match(text, set) ? 1 : 0;
    }
  }
  const bool examples = max_match("abcd", build_trie({"ab", "abc", "d"})) == Tokens{"abc", "d"} &&
                        max_match("abxcd", build_trie({"ab", "cd"})) == Tokens{"ab", "x", "cd"} &&
                        max_match("", build_trie({"a"})).empty();
  return check(lossless == strings && greedy == valid && examples,
               fmt("%d/%d lossless, %d/%d valid UTF-8 strings equal to the reference matcher, examples %s", lossless,
                   strings, greedy, valid, examples ? "exact" : "wrong"));
}

// 10. Determinism of train and parse.

int run_cli(const std::vector<std::string>& args) {
  if (const char* exe = std::getenv("TBPARSE_CLI")) {
    std::string cmd = exe;
    for (const auto& a : args) cmd += " '" + a + "'";
    cmd += " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::ostringstream out, err;
  return cli::run(args, out, err);
}

Outcome determinism() {
  TempDir dir;
  const auto a = harness::grammar_sentences(10, 20);
  const auto b = harness::grammar_sentences(11, 20);
  std::ofstream(dir / "a.conllu") << write_conllu(Treebank{"a", a});
  std::ofstream(dir / "b.conllu") << write_conllu(Treebank{"b", b});
  std::ofstream(dir / "m.txt") << "hyper.char_emb_dim = 16\nhyper.char_bilstm_out = 16\nhyper.word_emb_dim = 16\n"
                                  "hyper.word_bilstm_hidden = 16\nhyper.mlp_hidden = 16\nepochs = 3\n"
                                  "treebank = a\ntrain = a.conllu\ndev = a.conllu\ntreebank = b\ntrain = b.conllu\n";
  int failures = 0;
  for (const char* model : {"1.model", "2.model"}) {
    failures += run_cli({"train", "--manifest", dir / "m.txt", "--model", dir / model, "--seed", "3"}) != 0;
  }
  for (const char* out : {"1.conllu", "2.conllu"}) {
    failures += run_cli({"parse", "--model", dir / "1.model", "--input", dir / "b.conllu", "--treebank", "b",
                         "--output", dir / out}) != 0;
  }
  const auto m1 = slurp(dir / "1.model"), m2 = slurp(dir / "2.model");
  const auto p1 = slurp(dir / "1.conllu"), p2 = slurp(dir / "2.conllu");
  const bool ok = failures == 0 && !m1.empty() && m1 == m2 && !p1.empty() && p1 == p2;
  return check(ok, fmt("%s; models %zu bytes %s, parses %zu bytes %s", std::getenv("TBPARSE_CLI") ? "subprocess" : "in-process",
                       m1.size(), m1 == m2 ? "identical" : "differ", p1.size(), p1 == p2 ? "identical" : "differ"));
}

// 11. Ward clustering.

Outcome ward() {
  Rng rng(11);
  const int sets = 1000;
  int agree = 0;
  for (int t = 0; t < sets; ++t) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 5));
    const int dim = 1 + static_cast<int>(uniform_index(rng, 4));
    Eigen::MatrixXd p(n, dim);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < dim; ++j) p(i, j) = 4.0 * uniform01(rng) - 2.0;
    }
    std::vector<std::string> labels;
    for (int i = 0; i < n; ++i) labels.push_back("tb" + std::to_string(i));
    const auto d = ward_cluster(labels, p);
    const auto brute = oracle::brute_ward(p);
    std::vector<std::vector<int>> members;
    for (int i = 0; i < n; ++i) members.push_back({i});
    bool same = d.merges.size() == brute.size();
    std::vector<oracle::WardStep> ours;
    for (std::size_t k = 0; same && k < brute.size(); ++k) {
      auto u = members.at(static_cast<std::size_t>(d.merges[k].a));
      const auto& v = members.at(static_cast<std::size_t>(d.merges[k].b));
      u.insert(u.end(), v.begin(), v.end());
      std::sort(u.begin(), u.end());
      members.push_back(u);
      same = u == brute[k].merged && std::abs(d.merges[k].distance - brute[k].cost) < 1e-9;
      ours.push_back({u, d.merges[k].distance});
    }
    same = same && (oracle::cophenetic(n, ours) - oracle::cophenetic(n, brute)).cwiseAbs().maxCoeff() < 1e-9;
    agree += same ? 1 : 0;
  }
  return check(agree == sets, fmt("%d/%d random sets with n <= 6 agree (merges, distances within 1e-9)", agree, sets));
}

// 12. English smoke benchmark on external data.

Outcome english_smoke() {
  const char* dir = std::getenv("TBPARSE_EWT_DIR");
  if (!dir) return {Status::Skip, "set TBPARSE_EWT_DIR to a directory with en_ewt-ud-{train,dev}.conllu"};
  const fs::path root(dir);
  const auto train_path = root / "en_ewt-ud-train.conllu", dev_path = root / "en_ewt-ud-dev.conllu";
  if (!fs::exists(train_path) || !fs::exists(dev_path)) {
    return {Status::Skip, "en_ewt-ud-train.conllu or en_ewt-ud-dev.conllu missing in " + root.string()};
  }
  auto train = read_conllu_file(train_path.string(), "en_ewt").sentences;
  const auto dev = read_conllu_file(dev_path.string(), "en_ewt").sentences;
  Rng rng(12);
  deterministic_shuffle(train.begin(), train.end(), rng);
  if (train.size() > 2000) train.resize(2000);
  TrainOptions opts;
  opts.seed = 12;
  const auto r = train_multi({{"en_ewt", train, dev}}, opts);
  std::vector<Sentence> parsed;
  for (const auto& s : dev) parsed.push_back(parse_sentence(r.model, s, "en_ewt"));
  const double las = attachment_las(dev, parsed);
  return check(las >= 60.0, fmt("dev LAS %.2f (epoch %d, %zu training sentences)", las, r.selected_epoch, train.size()));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient soundness", gradients},      {"oracle completeness", oracle_replay},
      {"dynamic-cost exactness", dynamic_costs}, {"overfit", overfit},
      {"multi-treebank trend", multi_treebank}, {"word-dropout rate", word_dropout},
      {"evaluation identity", evaluation},    {"gale-church optimality", gale_church},
      {"max-match losslessness", maximum_matching}, {"determinism", determinism},
      {"ward agreement", ward},               {"english smoke benchmark", english_smoke}};
  // Optional arguments select criteria by number.
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k >= 1 && k <= static_cast<int>(criteria.size())) selected[static_cast<std::size_t>(k - 1)] = true;
  }
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    failed += o.status == Status::Fail ? 1 : 0;
    std::printf("%s %2zu %s: %s [%.1fs]\n", tag, i + 1, criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
