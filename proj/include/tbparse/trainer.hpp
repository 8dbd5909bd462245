#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tbparse/model.hpp"

namespace tbparse {

struct TrainingTreebank {
  std::string id;
  std::vector<Sentence> train;
  std::vector<Sentence> dev;  // may be empty
};

struct TrainOptions {
  Hyperparams hyper;
  std::uint64_t seed = 1;
  const PretrainedTable* pretrained = nullptr;
  ProxyMap proxies;
  TransliterationMap translit;
  std::ostream* log = nullptr;
};

/// Vocabulary over the union of all training sets, with treebank ids in input order.
Vocabulary build_vocabulary(const std::vector<TrainingTreebank>& treebanks, const TransliterationMap& translit);

struct SampleItem {
  int treebank = 0;
  std::size_t sentence = 0;
  bool operator==(const SampleItem&) const = default;
};

/// Sentences used in one epoch: each treebank is subsampled to at most cap
/// sentences (a fresh sample per epoch) and the union is shuffled.
std::vector<SampleItem> epoch_sample(const std::vector<std::size_t>& sizes, int cap, std::uint64_t seed, int epoch);

/// Training step on one sentence: hinge loss (margin 1) between the best
/// zero-cost and best positive-cost candidate at every step, followed by one
/// Adam update. Returns the summed loss.
class Trainer {
 public:
  Trainer(ParserModel& model, nn::AdamConfig adam = {});
  double train_sentence(const Sentence& lookup_view, const transitions::GoldTree& gold, int tb_row, Rng& rng);
  long updates() const noexcept { return optimizer_.steps(); }

 private:
  ParserModel& model_;
  nn::Adam optimizer_;
};

/// Gold tree of a training sentence with labels indexed in vocab; nullopt when
/// the sentence is not a single-rooted tree or uses unknown labels.
std::optional<transitions::GoldTree> gold_tree(const Sentence& s, const Lexicon& labels);

struct EpochReport {
  int epoch = 0;
  std::size_t sentences = 0;
  double loss = 0.0;
  std::vector<std::string> dev_ids;
  std::vector<double> dev_las;
  double mean_dev_las = 0.0;  // meaningful only when dev_ids is non-empty
};

using EpochCallback = std::function<void(const EpochReport&, const ParserModel&)>;

struct TrainResult {
  ParserModel model;  // selected epoch
  int selected_epoch = 0;
  std::vector<EpochReport> epochs;
  std::size_t skipped_sentences = 0;
};

/// Trains for hyper.epochs epochs, calling on_epoch after each one, and keeps
/// the epoch with the best mean dev LAS (earliest on ties; last epoch without dev data).
TrainResult train_multi(const std::vector<TrainingTreebank>& treebanks, const TrainOptions& options,
                        const EpochCallback& on_epoch = {});

/// las[e][d]: LAS of epoch e+1 on dev set d. Returns the 1-based epoch with the
/// highest unweighted mean, the earliest on ties, or the last when there are no dev sets.
int select_epoch(const std::vector<std::vector<double>>& las);

struct DevSet {
  std::string treebank;
  std::vector<Sentence> sentences;
};

/// Index of the checkpoint with the best mean dev LAS (gold tokenization and UPOS).
std::size_t select_epoch(const std::vector<ParserModel>& checkpoints, const std::vector<DevSet>& dev_sets);

}  // namespace tbparse
