#pragma once

#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sqlgate {

class VocabularyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Token id -> piece table. Pieces beginning with the boundary marker stand
// for a leading space.
class Vocabulary {
 public:
  static constexpr std::string_view kDefaultMarker = "▁";

  // pieces[id]; nullopt leaves a hole in the id space.
  Vocabulary(std::vector<std::optional<std::string>> pieces, int eos_id,
             std::string marker = std::string(kDefaultMarker));

  int size() const { return static_cast<int>(pieces_.size()); }
  int eos_id() const { return eos_id_; }
  const std::string& marker() const { return marker_; }
  bool contains(int id) const;

  const std::string& piece(int id) const;
  // Surface text of one token; empty for eos.
  const std::string& text(int id) const { return texts_.at(check(id)); }
  std::string detokenize(std::span<const int> ids) const;

  // Id of the token whose piece is exactly `piece`, if any.
  std::optional<int> find_piece(std::string_view piece) const;

  std::string serialize() const;

 private:
  std::size_t check(int id) const;

  std::vector<std::optional<std::string>> pieces_;
  std::vector<std::string> texts_;
  int eos_id_;
  std::string marker_;
};

// File format: header line `#eos <id>`, then one `<id>\t<piece>` per line.
// The six-character escape \u2581 inside a piece is read as the marker.
Vocabulary load_vocabulary(std::istream& in);
Vocabulary load_vocabulary_string(std::string_view text);
Vocabulary load_vocabulary_file(const std::string& path);

}  // namespace sqlgate
