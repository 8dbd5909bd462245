#include "tbparse/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "tbparse/decoder.hpp"

namespace tbparse {

using namespace transitions;
using nn::Expr;

Vocabulary build_vocabulary(const std::vector<TrainingTreebank>& treebanks, const TransliterationMap& translit) {
  Vocabulary v;
  for (const auto& tb : treebanks) {
    v.treebanks.add(tb.id);
    add_to_vocabulary(v, tb.train, translit);
  }
  return v;
}

std::vector<SampleItem> epoch_sample(const std::vector<std::size_t>& sizes, int cap, std::uint64_t seed, int epoch) {
  if (cap < 1) throw std::invalid_argument("sentence cap must be at least 1");
  Rng rng = derive_rng(seed, 0x5a3u, static_cast<std::uint32_t>(epoch));
  std::vector<SampleItem> out;
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    std::vector<std::size_t> idx(sizes[t]);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t take = idx.size();
    if (idx.size() > static_cast<std::size_t>(cap)) {
      take = static_cast<std::size_t>(cap);
      // Partial Fisher-Yates: the first `take` entries are a uniform sample.
      for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + uniform_index(rng, idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
    }
    for (std::size_t i = 0; i < take; ++i) out.push_back({static_cast<int>(t), idx[i]});
  }
  deterministic_shuffle(out.begin(), out.end(), rng);
  return out;
}

std::optional<GoldTree> gold_tree(const Sentence& s, const Lexicon& labels) {
  if (s.size() == 0 || !is_tree(s)) return std::nullopt;
  std::vector<int> head(s.size() + 1, -1), label(s.size() + 1, kNoLabel);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Token& t = s.tokens[i];
    if (!t.deprel) return std::nullopt;
    const auto l = labels.find(*t.deprel);
    if (!l) return std::nullopt;
    head[i + 1] = *t.head;
    label[i + 1] = *l;
  }
  return make_gold(std::move(head), std::move(label));
}

Trainer::Trainer(ParserModel& model, nn::AdamConfig adam) : model_(model), optimizer_(adam) {}

namespace {

struct Candidate {
  Transition t;
  double score;
  int cost;
};

Expr candidate_expr(const ConfigScores& s, const Transition& t, int labels) {
  Expr e = nn::pick(s.transitions, static_cast<int>(t.move));
  if (is_arc(t.move)) e = e + nn::pick(s.labels, label_slot(t.move, t.label, labels));
  return e;
}

}  // namespace

double Trainer::train_sentence(const Sentence& view, const GoldTree& gold, int tb_row, Rng& rng) {
  const int n = gold.n();
  const int labels = model_.label_count();
  nn::Graph g;
  const auto ctx = encode_sentence(g, model_, view, tb_row, Mode::Train, &rng);
  std::vector<Expr> losses;
  Configuration c = initial_config(n);
  std::vector<Candidate> cands;
  const Expr margin = g.constant(nn::Vector::Ones(1));
  const long limit = max_transitions(n);
  for (long step = 0; !is_terminal(c); ++step) {
    if (step > limit) throw OracleError("training sequence exceeded the transition bound");
    const ConfigScores s = score_config(g, model_, c, ctx);
    const nn::Vector& tv = s.transitions.value();
    const nn::Vector& lv = s.labels.value();
    const MoveSet legal = legal_moves(c);
    const bool mandated = swap_mandated(c, gold);
    if (mandated && !legal.contains(Move::Swap)) throw OracleError("mandated SWAP is not legal");

    cands.clear();
    for (Move m : kAllMoves) {
      if (!legal.contains(m)) continue;
      const double base = tv(static_cast<int>(m));
      if (m == Move::Swap) {
        cands.push_back({{m, kNoLabel}, base, mandated ? 0 : kInfiniteCost});
      } else if (!is_arc(m)) {
        cands.push_back({{m, kNoLabel}, base, mandated ? 1 : dynamic_cost(c, m, gold)});
      } else {
        const int d = c.s(0);
        const int h = m == Move::LeftArc ? c.b(0) : c.s(1);
        const int cost = mandated ? 1 : dynamic_cost(c, m, gold);
        const bool gold_arc = gold.head[static_cast<std::size_t>(d)] == h;
        for (int l = 0; l < labels; ++l) {
          const int lc = (cost < kInfiniteCost && gold_arc && gold.label[static_cast<std::size_t>(d)] != l) ? cost + 1 : cost;
          cands.push_back({{m, l}, base + lv(label_slot(m, l, labels)), lc});
        }
      }
    }
    int min_cost = kInfiniteCost;
    for (const auto& k : cands) min_cost = std::min(min_cost, k.cost);
    const Candidate* good = nullptr;
    const Candidate* bad = nullptr;
    const Candidate* explore = nullptr;
    for (const auto& k : cands) {
      if (k.cost == min_cost) {
        if (!good || k.score > good->score) good = &k;
      } else {
        if (!bad || k.score > bad->score) bad = &k;
        if (k.t.move != Move::Swap && (!explore || k.score > explore->score)) explore = &k;
      }
    }
    if (bad && bad->score > good->score - 1.0) {
      losses.push_back(candidate_expr(s, bad->t, labels) - candidate_expr(s, good->t, labels) + margin);
    }
    Transition next = good->t;
    if (!mandated && explore && explore->score > good->score && uniform01(rng) < model_.hyper.p_agg) next = explore->t;
    apply_in_place(c, next);
  }
  if (losses.empty()) return 0.0;
  const Expr loss = nn::sum(losses);
  const double value = loss.scalar();
  nn::backward(loss, model_.params);
  optimizer_.step(model_.params);
  return value;
}

namespace {

struct Prepared {
  Sentence view;
  GoldTree gold;
};

std::vector<double> dev_scores(const ParserModel& model, const std::vector<TrainingTreebank>& tbs,
                               std::vector<std::string>& ids) {
  std::vector<double> out;
  ids.clear();
  for (const auto& tb : tbs) {
    if (tb.dev.empty()) continue;
    const int row = resolve_treebank(model, tb.id);
    std::vector<Sentence> pred;
    pred.reserve(tb.dev.size());
    for (const auto& s : tb.dev) pred.push_back(parse_sentence(model, s, row));
    out.push_back(attachment_las(tb.dev, pred));
    ids.push_back(tb.id);
  }
  return out;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TrainResult train_multi(const std::vector<TrainingTreebank>& treebanks, const TrainOptions& options,
                        const EpochCallback& on_epoch) {
  if (treebanks.empty()) throw std::invalid_argument("no training treebanks");
  options.hyper.validate();
  for (const auto& tb : treebanks) {
    if (tb.train.empty()) throw std::invalid_argument("treebank '" + tb.id + "' has no training sentences");
  }
  TrainResult result{create_model(options.hyper, build_vocabulary(treebanks, options.translit), options.pretrained,
                                  options.seed),
                     0,
                     {},
                     0};
  ParserModel& model = result.model;
  model.proxies = options.proxies;
  model.translit = options.translit;
  for (const auto& [test, donor] : model.proxies) {
    if (model.uses_treebank && !model.vocab.treebanks.find(donor)) {
      throw std::invalid_argument("proxy for '" + test + "' names unknown treebank '" + donor + "'");
    }
  }

  std::vector<std::vector<Prepared>> data(treebanks.size());
  std::vector<int> rows(treebanks.size(), -1);
  for (std::size_t t = 0; t < treebanks.size(); ++t) {
    rows[t] = model.uses_treebank ? *model.vocab.treebanks.find(treebanks[t].id) : -1;
    for (const auto& s : treebanks[t].train) {
      auto gold = gold_tree(s, model.vocab.labels);
      if (!gold) {
        ++result.skipped_sentences;
        continue;
      }
      data[t].push_back({transliterate(s, model.translit), std::move(*gold)});
    }
    if (data[t].empty()) throw std::invalid_argument("treebank '" + treebanks[t].id + "' has no valid trees");
  }
  if (options.log && result.skipped_sentences > 0) {
    *options.log << "skipped " << result.skipped_sentences << " training sentences that are not trees\n";
  }
  std::vector<std::size_t> sizes;
  for (const auto& d : data) sizes.push_back(d.size());

  Trainer trainer(model, options.hyper.adam);
  nn::ParameterSet best = model.params;
  double best_mean = -1.0;
  for (int epoch = 1; epoch <= options.hyper.epochs; ++epoch) {
    Rng rng = derive_rng(options.seed, 0xd7u, static_cast<std::uint32_t>(epoch));
    EpochReport report;
    report.epoch = epoch;
    for (const SampleItem& item : epoch_sample(sizes, options.hyper.sentence_cap, options.seed, epoch)) {
      const Prepared& p = data[static_cast<std::size_t>(item.treebank)][item.sentence];
      report.loss += trainer.train_sentence(p.view, p.gold, rows[static_cast<std::size_t>(item.treebank)], rng);
      ++report.sentences;
    }
    report.dev_las = dev_scores(model, treebanks, report.dev_ids);
    report.mean_dev_las = mean(report.dev_las);
    if (options.log) {
      *options.log << "epoch " << epoch << " sentences " << report.sentences << " loss " << report.loss;
      if (!report.dev_ids.empty()) *options.log << " dev_las " << report.mean_dev_las;
      *options.log << '\n';
    }
    if (report.dev_ids.empty() || report.mean_dev_las > best_mean) {
      best_mean = report.mean_dev_las;
      best = model.params;
      result.selected_epoch = epoch;
    }
    if (on_epoch) on_epoch(report, model);
    result.epochs.push_back(std::move(report));
  }
  model.params = std::move(best);
  for (auto& p : model.params.items()) p.grad.setZero();
  return result;
}

int select_epoch(const std::vector<std::vector<double>>& las) {
  if (las.empty()) throw std::invalid_argument("select_epoch: no checkpoints");
  int best = static_cast<int>(las.size());
  double best_mean = 0.0;
  bool any = false;
  for (std::size_t e = 0; e < las.size(); ++e) {
    if (las[e].empty()) continue;
    const double m = mean(las[e]);
    if (!any || m > best_mean) {
      best_mean = m;
      best = static_cast<int>(e) + 1;
      any = true;
    }
  }
  return best;
}

std::size_t select_epoch(const std::vector<ParserModel>& checkpoints, const std::vector<DevSet>& dev_sets) {
  if (checkpoints.empty()) throw std::invalid_argument("select_epoch: no checkpoints");
  std::vector<std::vector<double>> las;
  for (const auto& model : checkpoints) {
    std::vector<double> row;
    for (const auto& dev : dev_sets) {
      const int tb = resolve_treebank(model, dev.treebank);
      std::vector<Sentence> pred;
      for (const auto& s : dev.sentences) pred.push_back(parse_sentence(model, s, tb));
      row.push_back(attachment_las(dev.sentences, pred));
    }
    las.push_back(std::move(row));
  }
  return static_cast<std::size_t>(select_epoch(las) - 1);
}

}  // namespace tbparse
