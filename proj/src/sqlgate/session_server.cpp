#include "sqlgate/session_server.hpp"

#include <istream>
#include <ostream>

namespace sqlgate {
namespace {

using nlohmann::json;

struct BadRequest {};
struct UnknownHandle {};

std::string session_key(const json& request) {
  auto it = request.find("session");
  if (it == request.end()) throw BadRequest{};
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  throw BadRequest{};
}

}  // namespace

SessionServer::SessionServer(std::shared_ptr<const SqlSchema> schema, std::shared_ptr<const Vocabulary> vocabulary,
                             Mode default_mode, Timing default_timing)
    : schema_(std::move(schema)), vocab_(std::move(vocabulary)), default_mode_(default_mode),
      default_timing_(default_timing) {}

json SessionServer::feed(Session& session, const json& item) {
  if (!item.is_object()) throw BadRequest{};
  auto tok = item.find("token_id");
  if (tok == item.end() || !tok->is_number_integer()) throw BadRequest{};
  const std::int64_t id = tok->get<std::int64_t>();
  if (id < 0 || id >= vocab_->size() || !vocab_->contains(static_cast<int>(id))) throw BadRequest{};

  const Checkpoint* parent = nullptr;
  Checkpoint root;
  auto p = item.find("parent");
  if (p == item.end() || p->is_null() || (p->is_string() && p->get_ref<const std::string&>().empty())) {
    root = session.validator->initial();
    parent = &root;
  } else {
    if (!p->is_string()) throw BadRequest{};
    auto found = session.states.find(p->get_ref<const std::string&>());
    if (found == session.states.end()) throw UnknownHandle{};
    parent = &found->second;
  }

  FeedResult r = session.validator->feed_token(*parent, static_cast<int>(id));
  json out;
  switch (r.kind) {
    case FeedResult::Kind::Accepted: out["result"] = "accepted"; break;
    case FeedResult::Kind::Finished: out["result"] = "finished"; break;
    case FeedResult::Kind::Rejected: out["result"] = "rejected"; break;
  }
  if (r.ok()) {
    std::string handle = "h" + std::to_string(next_handle_++);
    session.states.emplace(handle, std::move(r.checkpoint));
    out["state"] = handle;
    out["reason"] = nullptr;
  } else {
    out["state"] = nullptr;
    out["reason"] = reason_name(r.rejection->reason);
  }
  return out;
}

json SessionServer::dispatch(const json& request) {
  if (!request.is_object()) throw BadRequest{};
  auto op_it = request.find("op");
  if (op_it == request.end() || !op_it->is_string()) throw BadRequest{};
  const std::string& op = op_it->get_ref<const std::string&>();
  const std::string key = session_key(request);

  if (op == "init") {
    Mode mode = default_mode_;
    Timing timing = default_timing_;
    if (auto m = request.find("mode"); m != request.end()) {
      if (!m->is_string()) throw BadRequest{};
      auto parsed = mode_from_name(m->get_ref<const std::string&>());
      if (!parsed) throw BadRequest{};
      mode = *parsed;
    }
    if (auto t = request.find("timing"); t != request.end()) {
      if (!t->is_string()) throw BadRequest{};
      auto parsed = timing_from_name(t->get_ref<const std::string&>());
      if (!parsed) throw BadRequest{};
      timing = *parsed;
    }
    Session s;
    s.validator = std::make_unique<Validator>(*schema_, *vocab_, mode, timing);
    sessions_.insert_or_assign(key, std::move(s));
    return json{{"ok", true}};
  }

  auto it = sessions_.find(key);
  if (it == sessions_.end()) throw UnknownHandle{};
  Session& session = it->second;

  if (op == "feed") return feed(session, request);
  if (op == "batch_feed") {
    auto items = request.find("items");
    if (items == request.end() || !items->is_array()) throw BadRequest{};
    json results = json::array();
    for (const json& item : *items) results.push_back(feed(session, item));
    return json{{"results", std::move(results)}};
  }
  if (op == "drop") {
    if (auto st = request.find("state"); st != request.end() && !st->is_null()) {
      if (!st->is_string()) throw BadRequest{};
      if (session.states.erase(st->get_ref<const std::string&>()) == 0) throw UnknownHandle{};
    } else {
      sessions_.erase(it);
    }
    return json{{"ok", true}};
  }
  throw BadRequest{};
}

std::string SessionServer::handle(std::string_view line) {
  json request = json::parse(line.begin(), line.end(), nullptr, false);
  if (request.is_discarded()) return json{{"error", "bad-request"}}.dump();
  try {
    return dispatch(request).dump();
  } catch (const BadRequest&) {
    return json{{"error", "bad-request"}}.dump();
  } catch (const UnknownHandle&) {
    return json{{"error", "unknown-handle"}}.dump();
  }
}

void SessionServer::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << handle(line) << '\n' << std::flush;
  }
}

}  // namespace sqlgate
