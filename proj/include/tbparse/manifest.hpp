#pragma once
// Training manifests: `key = value` lines, '#' comments, and one stanza per
// treebank opened by `treebank = <id>`.
//
//   seed = 7
//   hyper.epochs = 10
//   proxy = fo_oft -> no_nynorsk
//   translit = faroese.map
//   treebank = no_nynorsk
//   train = no_nynorsk-train.conllu
//   dev = no_nynorsk-dev.conllu
//   pretrained = no.vec
//   frozen = false

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbparse/model.hpp"

namespace tbparse {

inline constexpr std::uint64_t kDefaultSeed = 1;

class ManifestError : public std::runtime_error {
 public:
  ManifestError(int line, const std::string& what);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct TreebankEntry {
  std::string id;
  std::string train;
  std::string dev;
  std::string pretrained;
  bool frozen = false;
};

struct Manifest {
  std::optional<std::uint64_t> seed;
  std::string translit;
  ProxyMap proxies;
  std::vector<std::pair<std::string, std::string>> hyper;  // overrides in file order
  std::vector<TreebankEntry> treebanks;
};

/// Relative paths are resolved against base_dir.
Manifest parse_manifest(const std::string& text, const std::string& base_dir = "");
Manifest load_manifest(const std::string& path);

/// Sets one hyperparameter by name ("word_emb_dim", "epochs", "cap", ...).
/// Throws std::invalid_argument for unknown names or bad values.
void set_hyperparameter(Hyperparams& h, const std::string& key, const std::string& value);

/// key = value dump of every hyperparameter.
std::string describe(const Hyperparams& h);

}  // namespace tbparse
