#include "tbparse/decoder.hpp"

#include <algorithm>
#include <thread>

namespace tbparse {

using namespace transitions;

Transition best_transition(const MoveSet& legal, const nn::Vector& trans, const nn::Vector& labels, int label_count) {
  Transition best;
  double best_score = 0.0;
  bool found = false;
  for (Move m : kAllMoves) {
    if (!legal.contains(m)) continue;
    const double base = trans(static_cast<int>(m));
    if (!is_arc(m)) {
      if (!found || base > best_score) best = {m, kNoLabel}, best_score = base, found = true;
      continue;
    }
    for (int l = 0; l < label_count; ++l) {
      const double s = base + labels(label_slot(m, l, label_count));
      if (!found || s > best_score) best = {m, l}, best_score = s, found = true;
    }
  }
  if (!found) throw IllegalTransition("no legal transition");
  return best;
}

Sentence parse_sentence(const ParserModel& model, const Sentence& sentence, int tb_row) {
  Sentence out = sentence;
  const int n = static_cast<int>(sentence.size());
  if (n == 0) return out;
  const Sentence view = transliterate(sentence, model.translit);
  nn::Graph g;
  const auto ctx = encode_sentence(g, model, view, tb_row, Mode::Test, nullptr);
  const int labels = model.label_count();
  Configuration c = initial_config(n);
  while (!is_terminal(c)) {
    const ConfigScores s = score_config(g, model, c, ctx);
    apply_in_place(c, best_transition(legal_moves(c), s.transitions.value(), s.labels.value(), labels));
  }
  std::vector<int> head = c.head, label = c.label;
  const auto root = model.vocab.labels.find("root");
  const auto dep = model.vocab.labels.find("dep");
  repair_tree(head, label, root.value_or(0), dep.value_or(0));
  for (int i = 1; i <= n; ++i) {
    Token& t = out.tokens[static_cast<std::size_t>(i - 1)];
    t.head = head[static_cast<std::size_t>(i)];
    t.deprel = model.vocab.labels.key(label[static_cast<std::size_t>(i)]);
  }
  return out;
}

Sentence parse_sentence(const ParserModel& model, const Sentence& sentence, const std::string& treebank) {
  return parse_sentence(model, sentence, resolve_treebank(model, treebank));
}

Treebank parse_treebank(const ParserModel& model, const Treebank& input, const std::string& treebank, int threads) {
  const int tb_row = resolve_treebank(model, treebank);
  Treebank out;
  out.id = input.id;
  out.sentences.resize(input.sentences.size());
  const std::size_t count = input.sentences.size();
  const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1,
                                                      std::max<std::size_t>(count, 1));
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < count; i += workers) out.sentences[i] = parse_sentence(model, input.sentences[i], tb_row);
  };
  if (workers == 1) {
    work(0);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

double attachment_las(const std::vector<Sentence>& gold, const std::vector<Sentence>& predicted) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("attachment_las: sentence count mismatch");
  std::size_t total = 0, correct = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != predicted[s].size()) throw std::invalid_argument("attachment_las: token count mismatch");
    for (std::size_t i = 0; i < gold[s].size(); ++i) {
      const Token& a = gold[s].tokens[i];
      const Token& b = predicted[s].tokens[i];
      ++total;
      if (a.head && b.head && *a.head == *b.head && a.deprel && b.deprel &&
          universal_relation(*a.deprel) == universal_relation(*b.deprel)) {
        ++correct;
      }
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace tbparse
