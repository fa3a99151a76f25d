#include "sqlgate/vocabulary.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sqlgate {
namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

int parse_id(std::string_view text, std::size_t line) {
  int id = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc() || ptr != text.data() + text.size() || id < 0) {
    throw VocabularyError("vocabulary line " + std::to_string(line) + ": bad token id '" +
                          std::string(text) + "'");
  }
  return id;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::optional<std::string>> pieces, int eos_id, std::string marker)
    : pieces_(std::move(pieces)), eos_id_(eos_id), marker_(std::move(marker)) {
  if (eos_id_ < 0 || eos_id_ >= size()) throw VocabularyError("eos id is outside the vocabulary");
  if (!pieces_[eos_id_]) pieces_[eos_id_] = std::string();
  texts_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (static_cast<int>(i) == eos_id_ || !pieces_[i]) {
      texts_.emplace_back();
    } else {
      texts_.push_back(marker_.empty() ? *pieces_[i] : replace_all(*pieces_[i], marker_, " "));
    }
  }
}

bool Vocabulary::contains(int id) const {
  return id >= 0 && id < size() && pieces_[id].has_value();
}

std::size_t Vocabulary::check(int id) const {
  if (!contains(id)) throw std::out_of_range("token id " + std::to_string(id) + " is not in the vocabulary");
  return static_cast<std::size_t>(id);
}

const std::string& Vocabulary::piece(int id) const { return *pieces_[check(id)]; }

std::string Vocabulary::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) out += text(id);
  return out;
}

std::optional<int> Vocabulary::find_piece(std::string_view piece) const {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i] && *pieces_[i] == piece && static_cast<int>(i) != eos_id_) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string Vocabulary::serialize() const {
  std::ostringstream out;
  out << "#eos " << eos_id_ << "\n";
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i]) out << i << "\t" << *pieces_[i] << "\n";
  }
  return out.str();
}

Vocabulary load_vocabulary(std::istream& in) {
  std::map<int, std::string> entries;
  std::optional<int> eos;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("#eos", 0) == 0) {
      std::string_view rest = std::string_view(line).substr(4);
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      eos = parse_id(rest, number);
      continue;
    }
    if (line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw VocabularyError("vocabulary line " + std::to_string(number) + ": expected '<id>\\t<piece>'");
    }
    int id = parse_id(std::string_view(line).substr(0, tab), number);
    std::string piece = replace_all(line.substr(tab + 1), "\\u2581", Vocabulary::kDefaultMarker);
    if (!entries.emplace(id, std::move(piece)).second) {
      throw VocabularyError("vocabulary line " + std::to_string(number) + ": duplicate id " +
                            std::to_string(id));
    }
  }
  if (!eos) throw VocabularyError("vocabulary has no '#eos <id>' header");
  if (!entries.count(*eos)) throw VocabularyError("eos id " + std::to_string(*eos) + " has no entry");
  int size = std::max(*eos + 1, entries.empty() ? 0 : entries.rbegin()->first + 1);
  std::vector<std::optional<std::string>> pieces(static_cast<std::size_t>(size));
  for (auto& [id, piece] : entries) pieces[static_cast<std::size_t>(id)] = std::move(piece);
  return Vocabulary(std::move(pieces), *eos);
}

Vocabulary load_vocabulary_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_vocabulary(in);
}

Vocabulary load_vocabulary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary file '" + path + "'");
  return load_vocabulary(in);
}

}  // namespace sqlgate
