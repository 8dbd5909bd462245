#pragma once
// Model files: a "TBPARSE-MODEL 1" line, the byte length of a JSON header on
// its own line, the JSON header (hyperparameters, vocabularies, proxy and
// transliteration maps, parameter table), then every parameter as
// little-endian float64 in row-major order.

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "tbparse/model.hpp"

namespace tbparse {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_model(const ParserModel& model, std::ostream& out);
void save_model(const ParserModel& model, const std::string& path);
ParserModel load_model(std::istream& in);
ParserModel load_model(const std::string& path);

}  // namespace tbparse
