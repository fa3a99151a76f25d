#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sqlgate/decoder.hpp"

namespace sqlgate {

// Line-delimited JSON sessions over one validator configuration per session.
// Checkpoints are immutable; a handle stays usable until dropped.
class SessionServer {
 public:
  SessionServer(std::shared_ptr<const SqlSchema> schema, std::shared_ptr<const Vocabulary> vocabulary,
                Mode default_mode = Mode::ParsingWithGuards, Timing default_timing = Timing::Incremental);

  // One request line in, one response line out (without newline).
  std::string handle(std::string_view line);

  // Processes lines until end of input. Blank lines are skipped.
  void serve(std::istream& in, std::ostream& out);

  std::size_t session_count() const { return sessions_.size(); }

 private:
  struct Session {
    std::unique_ptr<Validator> validator;
    std::map<std::string, Checkpoint, std::less<>> states;
  };

  nlohmann::json dispatch(const nlohmann::json& request);
  nlohmann::json feed(Session& session, const nlohmann::json& item);

  std::shared_ptr<const SqlSchema> schema_;
  std::shared_ptr<const Vocabulary> vocab_;
  Mode default_mode_;
  Timing default_timing_;
  std::map<std::string, Session, std::less<>> sessions_;
  std::uint64_t next_handle_ = 1;
};

}  // namespace sqlgate
