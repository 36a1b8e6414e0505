#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "wlsa/errors.hpp"
#include "wlsa/model.hpp"

namespace wlsa::model {

namespace {
constexpr std::string_view kMagic = "WLSA-v1";
}

void save_checkpoint(std::ostream& out, const WorldlineModel& model) {
  out << kMagic << '\n';
  out << "mode " << to_string(model.mode()) << '\n';
  out << "params " << model.parameters().size() << '\n';
  char buf[32];
  for (const auto& p : model.parameters()) {
    out << "param " << p.name << ' ' << p.value.rank();
    for (std::size_t d : p.value.shape()) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", p.value[i]);
      out << buf << (i + 1 == p.value.size() ? '\n' : ' ');
    }
  }
}

void load_checkpoint(std::istream& in, WorldlineModel& model) {
  std::string word;
  if (!(in >> word) || word != kMagic) throw IngestionError("checkpoint: missing WLSA-v1 header");
  std::string mode;
  if (!(in >> word >> mode) || word != "mode") throw IngestionError("checkpoint: missing mode line");
  if (mode != to_string(model.mode())) {
    throw IngestionError("checkpoint: mode '" + mode + "' does not match model mode '" +
                         std::string(to_string(model.mode())) + "'");
  }
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "params" || count != model.parameters().size()) {
    throw IngestionError("checkpoint: parameter count mismatch");
  }
  for (auto& p : model.parameters()) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> word >> name >> rank) || word != "param") throw IngestionError("checkpoint: malformed param line");
    if (name != p.name) throw IngestionError("checkpoint: expected parameter '" + p.name + "', found '" + name + "'");
    Shape shape(rank);
    for (auto& d : shape) in >> d;
    if (!in || shape != p.value.shape()) {
      throw IngestionError("checkpoint: shape mismatch for '" + name + "'");
    }
    Tensor value(shape);
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!(in >> word)) throw IngestionError("checkpoint: truncated values for '" + name + "'");
      try {
        value[i] = std::stod(word);
      } catch (const std::exception&) {
        throw IngestionError("checkpoint: bad value '" + word + "' in '" + name + "'");
      }
    }
    p.value = std::move(value);
  }
}

}  // namespace wlsa::model
