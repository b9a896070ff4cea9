#include "srn/transcript.hpp"

#include <algorithm>
#include <sstream>

namespace srn::net {

void NodeTranscript::append(uint64_t time, std::string kind, Bytes data,
                            std::string peer, char dir) {
  records_.push_back({time, std::move(kind), std::move(peer), dir, std::move(data)});
}

bool NodeTranscript::contains_bytes(const Bytes& needle) const {
  if (needle.empty()) return true;
  for (const auto& rec : records_) {
    if (rec.data.size() < needle.size()) continue;
    auto it = std::search(rec.data.begin(), rec.data.end(), needle.begin(), needle.end());
    if (it != rec.data.end()) return true;
  }
  return false;
}

std::vector<const TranscriptRecord*> NodeTranscript::find_kind(const std::string& kind) const {
  std::vector<const TranscriptRecord*> out;
  for (const auto& rec : records_)
    if (rec.kind == kind) out.push_back(&rec);
  return out;
}

Bytes NodeTranscript::concat_all() const {
  Bytes out;
  for (const auto& rec : records_) out.insert(out.end(), rec.data.begin(), rec.data.end());
  return out;
}

Bytes NodeTranscript::concat_kind(const std::string& kind) const {
  Bytes out;
  for (const auto& rec : records_)
    if (rec.kind == kind) out.insert(out.end(), rec.data.begin(), rec.data.end());
  return out;
}

std::string NodeTranscript::render() const {
  std::ostringstream os;
  for (const auto& rec : records_) {
    os << "t=" << rec.time << ' ' << rec.dir << ' ' << rec.kind;
    if (!rec.peer.empty()) os << " peer=" << rec.peer;
    os << ' ' << to_hex(rec.data) << '\n';
  }
  return os.str();
}

void ClassicalBus::register_node(const std::string& id) {
  if (id.empty()) throw ContractError("register_node: empty id");
  transcripts_.emplace(id, NodeTranscript(id));
}

NodeTranscript& ClassicalBus::transcript(const std::string& id) {
  auto it = transcripts_.find(id);
  if (it == transcripts_.end()) throw ContractError("transcript: unknown node " + id);
  return it->second;
}

const NodeTranscript& ClassicalBus::transcript(const std::string& id) const {
  auto it = transcripts_.find(id);
  if (it == transcripts_.end()) throw ContractError("transcript: unknown node " + id);
  return it->second;
}

const Bytes& ClassicalBus::send(const std::string& from, const std::string& to,
                                const std::string& kind, Bytes payload) {
  if (!knows(from)) throw ContractError("classical_send: unknown node " + from);
  if (!knows(to)) throw ContractError("classical_send: unknown node " + to);
  if (from == to) throw ContractError("classical_send: sender equals receiver");
  uint64_t t = clock_.tick();
  transcripts_.at(from).append(t, kind, payload, to, 'S');
  transcripts_.at(to).append(t, kind, payload, from, 'R');
  last_delivered_ = std::move(payload);
  return last_delivered_;
}

void ClassicalBus::log_local(const std::string& node, const std::string& kind, Bytes data) {
  if (!knows(node)) throw ContractError("log_local: unknown node " + node);
  transcripts_.at(node).append(clock_.tick(), kind, std::move(data));
}

}  // namespace srn::net
