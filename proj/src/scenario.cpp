#include "srn/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <string_view>

#include "json.hpp"
#include "srn/rng.hpp"

namespace srn::scenario {
namespace {

using nlohmann::json;

struct Ctx {
  std::vector<std::string> errors;
  void err(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }
};

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

const json* find(const json& obj, const std::string& parent, const char* key, Ctx& c,
                 bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) c.err(join(parent, key), "missing required field");
    return nullptr;
  }
  return &*it;
}

void reject_unknown(const json& obj, const std::string& parent,
                    std::initializer_list<std::string_view> known, Ctx& c) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto k : known)
      if (it.key() == k) ok = true;
    if (!ok) c.err(join(parent, it.key()), "unknown field");
  }
}

std::optional<std::string> as_string(const json& v, const std::string& path, Ctx& c) {
  if (!v.is_string()) {
    c.err(path, "expected a string");
    return std::nullopt;
  }
  return v.get<std::string>();
}

std::optional<uint64_t> as_u64(const json& v, const std::string& path, Ctx& c) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0)
    return static_cast<uint64_t>(v.get<int64_t>());
  c.err(path, "expected a non-negative integer");
  return std::nullopt;
}

std::optional<int> as_int(const json& v, const std::string& path, Ctx& c, int lo, int hi) {
  if (!v.is_number_integer()) {
    c.err(path, "expected an integer");
    return std::nullopt;
  }
  int64_t x = v.get<int64_t>();
  if (x < lo || x > hi) {
    c.err(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::nullopt;
  }
  return static_cast<int>(x);
}

std::optional<double> as_number(const json& v, const std::string& path, Ctx& c, double lo,
                                double hi) {
  if (!v.is_number()) {
    c.err(path, "expected a number");
    return std::nullopt;
  }
  double x = v.get<double>();
  if (!(x >= lo && x <= hi)) {
    c.err(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return std::nullopt;
  }
  return x;
}

void parse_nodes(const json& arr, Ctx& c, network::Topology& topo) {
  if (!arr.is_array() || arr.empty()) {
    c.err("topology.nodes", "expected a non-empty array");
    return;
  }
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "topology.nodes[" + std::to_string(i) + "]";
    const json& nj = arr[i];
    if (!nj.is_object()) {
      c.err(p, "expected an object");
      continue;
    }
    reject_unknown(nj, p, {"id", "role"}, c);
    network::Node n;
    if (const json* v = find(nj, p, "id", c, true))
      if (auto x = as_string(*v, p + ".id", c)) n.id = *x;
    if (const json* v = find(nj, p, "role", c, false)) {
      if (auto x = as_string(*v, p + ".role", c)) {
        if (*x == "endpoint")
          n.role = network::NodeRole::Endpoint;
        else if (*x == "repeater")
          n.role = network::NodeRole::Repeater;
        else
          c.err(p + ".role", "must be \"endpoint\" or \"repeater\"");
      }
    }
    topo.nodes.push_back(std::move(n));
  }
}

void parse_links(const json& arr, Ctx& c, network::Topology& topo) {
  if (!arr.is_array() || arr.empty()) {
    c.err("topology.links", "expected a non-empty array");
    return;
  }
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "topology.links[" + std::to_string(i) + "]";
    const json& lj = arr[i];
    if (!lj.is_object()) {
      c.err(p, "expected an object");
      continue;
    }
    reject_unknown(lj, p,
                   {"a", "b", "medium", "length_km", "attenuation_db_per_km", "fixed_loss_db",
                    "qber_target", "depolarizing_prob", "label"},
                   c);
    network::Link l;
    if (const json* v = find(lj, p, "a", c, true))
      if (auto x = as_string(*v, p + ".a", c)) l.a = *x;
    if (const json* v = find(lj, p, "b", c, true))
      if (auto x = as_string(*v, p + ".b", c)) l.b = *x;

    l.channel.medium = channel::Medium::Fiber;
    if (const json* v = find(lj, p, "medium", c, false)) {
      if (auto x = as_string(*v, p + ".medium", c)) {
        if (*x == "fiber")
          l.channel.medium = channel::Medium::Fiber;
        else if (*x == "free_space")
          l.channel.medium = channel::Medium::FreeSpace;
        else
          c.err(p + ".medium", "must be \"fiber\" or \"free_space\"");
      }
    }
    const bool fiber = l.channel.medium == channel::Medium::Fiber;

    l.channel.length_km = 0;
    if (const json* v = find(lj, p, "length_km", c, false))
      if (auto x = as_number(*v, p + ".length_km", c, 0, 50000)) l.channel.length_km = *x;

    l.channel.attenuation_db_per_km = fiber ? 0.2 : 0.0;
    if (const json* v = find(lj, p, "attenuation_db_per_km", c, false))
      if (auto x = as_number(*v, p + ".attenuation_db_per_km", c, 0, 1000))
        l.channel.attenuation_db_per_km = *x;

    l.channel.fixed_loss_db = 0;
    if (const json* v = find(lj, p, "fixed_loss_db", c, false))
      if (auto x = as_number(*v, p + ".fixed_loss_db", c, 0, 1000)) l.channel.fixed_loss_db = *x;

    const json* qt = find(lj, p, "qber_target", c, false);
    const json* dp = find(lj, p, "depolarizing_prob", c, false);
    if (qt && dp) {
      c.err(p, "give at most one of qber_target and depolarizing_prob");
    } else if (qt) {
      // Uniform {X,Y,Z} depolarization: same-basis error rate is 2/3 of
      // the Pauli probability, so target * 1.5 is the knob value.
      if (auto x = as_number(*qt, p + ".qber_target", c, 0, 2.0 / 3.0))
        l.channel.depolarizing_prob = 1.5 * *x;
    } else if (dp) {
      if (auto x = as_number(*dp, p + ".depolarizing_prob", c, 0, 1))
        l.channel.depolarizing_prob = *x;
    } else {
      l.channel.depolarizing_prob =
          fiber ? 0.005 + 0.004 * l.channel.length_km : 0.005;
      if (l.channel.depolarizing_prob > 1) l.channel.depolarizing_prob = 1;
    }

    l.channel.label = l.a + "-" + l.b;
    if (const json* v = find(lj, p, "label", c, false))
      if (auto x = as_string(*v, p + ".label", c)) l.channel.label = *x;

    topo.links.push_back(std::move(l));
  }
}

void parse_protocol(const json& pj, Ctx& c, qsdc::ProtocolParams& pp) {
  if (!pj.is_object()) {
    c.err("protocol", "expected an object");
    return;
  }
  reject_unknown(pj, "protocol",
                 {"kind", "check_fraction", "n_check", "dl04_forward_check_fraction",
                  "dl04_return_check_fraction", "dl04_batch_slack", "qber_threshold",
                  "max_retries", "label_bits"},
                 c);
  if (const json* v = find(pj, "protocol", "kind", c, false)) {
    if (auto x = as_string(*v, "protocol.kind", c)) {
      if (*x == "eqsdc")
        pp.kind = qsdc::ProtocolKind::Eqsdc;
      else if (*x == "dl04")
        pp.kind = qsdc::ProtocolKind::Dl04;
      else
        c.err("protocol.kind", "must be \"eqsdc\" or \"dl04\"");
    }
  }
  if (const json* v = find(pj, "protocol", "check_fraction", c, false))
    if (auto x = as_number(*v, "protocol.check_fraction", c, 0, 0.9)) pp.check_fraction = *x;
  if (const json* v = find(pj, "protocol", "n_check", c, false))
    if (auto x = as_int(*v, "protocol.n_check", c, 2, 1 << 20)) pp.n_check = *x;
  if (const json* v = find(pj, "protocol", "dl04_forward_check_fraction", c, false))
    if (auto x = as_number(*v, "protocol.dl04_forward_check_fraction", c, 0, 0.5))
      pp.dl04_forward_check_fraction = *x;
  if (const json* v = find(pj, "protocol", "dl04_return_check_fraction", c, false))
    if (auto x = as_number(*v, "protocol.dl04_return_check_fraction", c, 0, 0.5))
      pp.dl04_return_check_fraction = *x;
  if (const json* v = find(pj, "protocol", "dl04_batch_slack", c, false))
    if (auto x = as_number(*v, "protocol.dl04_batch_slack", c, 0, 4)) pp.dl04_batch_slack = *x;
  if (const json* v = find(pj, "protocol", "qber_threshold", c, false))
    if (auto x = as_number(*v, "protocol.qber_threshold", c, 1e-9, 0.999999))
      pp.qber_threshold = *x;
  if (const json* v = find(pj, "protocol", "max_retries", c, false))
    if (auto x = as_int(*v, "protocol.max_retries", c, 0, 1000)) pp.max_retries = *x;
  if (const json* v = find(pj, "protocol", "label_bits", c, false))
    if (auto x = as_int(*v, "protocol.label_bits", c, 0, 1 << 20)) pp.label_bits = *x;
}

void parse_fec(const json& fj, Ctx& c, fec::LdpcParams& fp) {
  if (!fj.is_object()) {
    c.err("fec", "expected an object");
    return;
  }
  reject_unknown(fj, "fec", {"n", "k", "seed", "max_iterations"}, c);
  if (const json* v = find(fj, "fec", "n", c, false))
    if (auto x = as_int(*v, "fec.n", c, 16, 1 << 16)) fp.n = *x;
  if (const json* v = find(fj, "fec", "k", c, false))
    if (auto x = as_int(*v, "fec.k", c, 8, 1 << 15)) fp.k = *x;
  if (const json* v = find(fj, "fec", "seed", c, false))
    if (auto x = as_u64(*v, "fec.seed", c)) fp.seed = *x;
  if (const json* v = find(fj, "fec", "max_iterations", c, false))
    if (auto x = as_int(*v, "fec.max_iterations", c, 1, 10000)) fp.max_iterations = *x;
  if (fp.k * 2 != fp.n) c.err("fec.k", "rate-1/2 (3,6)-regular code requires k = n/2");
}

void parse_payload(const json& pj, const std::string& base_dir, Ctx& c, PayloadSpec& ps) {
  if (!pj.is_object()) {
    c.err("payload", "expected an object");
    return;
  }
  reject_unknown(pj, "payload", {"random_bytes", "hex", "text", "file"}, c);
  int forms = 0;
  for (const char* k : {"random_bytes", "hex", "text", "file"})
    if (pj.contains(k)) forms++;
  if (forms != 1) {
    c.err("payload", "give exactly one of random_bytes, hex, text, file");
    return;
  }
  if (const json* v = find(pj, "payload", "random_bytes", c, false)) {
    if (auto x = as_u64(*v, "payload.random_bytes", c)) {
      if (*x > (16u << 20))
        c.err("payload.random_bytes", "must be at most 16777216");
      else {
        ps.source = PayloadSource::Random;
        ps.random_bytes = static_cast<size_t>(*x);
      }
    }
  } else if (const json* v2 = find(pj, "payload", "hex", c, false)) {
    if (auto x = as_string(*v2, "payload.hex", c)) {
      try {
        ps.inline_bytes = from_hex(*x);
        ps.source = PayloadSource::Inline;
      } catch (const ContractError& e) {
        c.err("payload.hex", e.what());
      }
    }
  } else if (const json* v3 = find(pj, "payload", "text", c, false)) {
    if (auto x = as_string(*v3, "payload.text", c)) {
      ps.inline_bytes.assign(x->begin(), x->end());
      ps.source = PayloadSource::Inline;
    }
  } else if (const json* v4 = find(pj, "payload", "file", c, false)) {
    if (auto x = as_string(*v4, "payload.file", c)) {
      if (x->empty()) {
        c.err("payload.file", "must be non-empty");
      } else {
        std::filesystem::path fp(*x);
        if (fp.is_relative() && !base_dir.empty()) fp = std::filesystem::path(base_dir) / fp;
        ps.source = PayloadSource::File;
        ps.file = fp.string();
      }
    }
  }
}

void parse_eves(const json& arr, Ctx& c, std::vector<channel::EveStrategy>& eves) {
  if (!arr.is_array()) {
    c.err("eve", "expected an array");
    return;
  }
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "eve[" + std::to_string(i) + "]";
    const json& ej = arr[i];
    if (!ej.is_object()) {
      c.err(p, "expected an object");
      continue;
    }
    reject_unknown(ej, p, {"kind", "hop", "first_frame", "last_frame"}, c);
    channel::EveStrategy e;
    if (const json* v = find(ej, p, "kind", c, true)) {
      if (auto x = as_string(*v, p + ".kind", c)) {
        if (*x == "intercept_resend_z")
          e.kind = channel::EveKind::InterceptResendZ;
        else if (*x == "intercept_resend_x")
          e.kind = channel::EveKind::InterceptResendX;
        else if (*x == "intercept_resend_random")
          e.kind = channel::EveKind::InterceptResendRandom;
        else
          c.err(p + ".kind",
                "must be one of intercept_resend_z, intercept_resend_x, "
                "intercept_resend_random");
      }
    }
    if (const json* v = find(ej, p, "hop", c, true))
      if (auto x = as_string(*v, p + ".hop", c)) e.target_hop = *x;
    if (const json* v = find(ej, p, "first_frame", c, false))
      if (auto x = as_u64(*v, p + ".first_frame", c)) e.first_frame = *x;
    if (const json* v = find(ej, p, "last_frame", c, false))
      if (auto x = as_u64(*v, p + ".last_frame", c)) e.last_frame = *x;
    if (e.last_frame && *e.last_frame < e.first_frame)
      c.err(p + ".last_frame", "must be >= first_frame");
    eves.push_back(std::move(e));
  }
}

}  // namespace

ValidationResult validate_scenario(const std::string& json_text, const std::string& base_dir) {
  ValidationResult out;
  Ctx c;

  json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    out.errors = {"document: not valid JSON"};
    return out;
  }
  if (!doc.is_object()) {
    out.errors = {"document: expected a JSON object"};
    return out;
  }

  Scenario s;
  reject_unknown(doc, "",
                 {"name", "seed", "eve_seed", "mode", "src", "dst", "topology", "protocol",
                  "fec", "pqc", "payload", "eve", "localization_min_bits"},
                 c);

  if (const json* v = find(doc, "", "name", c, true)) {
    if (auto x = as_string(*v, "name", c)) {
      s.name = *x;
      if (s.name.empty()) c.err("name", "must be non-empty");
    }
  }
  if (const json* v = find(doc, "", "seed", c, true))
    if (auto x = as_u64(*v, "seed", c)) s.seed = *x;
  if (const json* v = find(doc, "", "eve_seed", c, false))
    if (auto x = as_u64(*v, "eve_seed", c)) s.eve_seed = *x;
  if (const json* v = find(doc, "", "mode", c, false)) {
    if (auto x = as_string(*v, "mode", c)) {
      if (*x == "srn")
        s.mode = Mode::Srn;
      else if (*x == "trn")
        s.mode = Mode::Trn;
      else
        c.err("mode", "must be \"srn\" or \"trn\"");
    }
  }
  if (const json* v = find(doc, "", "src", c, true))
    if (auto x = as_string(*v, "src", c)) s.src = *x;
  if (const json* v = find(doc, "", "dst", c, true))
    if (auto x = as_string(*v, "dst", c)) s.dst = *x;

  if (const json* topo = find(doc, "", "topology", c, true)) {
    if (!topo->is_object()) {
      c.err("topology", "expected an object");
    } else {
      reject_unknown(*topo, "topology", {"nodes", "links"}, c);
      if (const json* v = find(*topo, "topology", "nodes", c, true))
        parse_nodes(*v, c, s.topology);
      if (const json* v = find(*topo, "topology", "links", c, true))
        parse_links(*v, c, s.topology);
    }
  }

  if (const json* v = find(doc, "", "protocol", c, false)) parse_protocol(*v, c, s.protocol);
  if (const json* v = find(doc, "", "fec", c, false)) parse_fec(*v, c, s.fec);
  if (const json* v = find(doc, "", "pqc", c, false)) {
    if (!v->is_object()) {
      c.err("pqc", "expected an object");
    } else {
      reject_unknown(*v, "pqc", {"key_seed"}, c);
      if (const json* ks = find(*v, "pqc", "key_seed", c, false))
        if (auto x = as_u64(*ks, "pqc.key_seed", c)) s.pqc_key_seed = *x;
    }
  }
  if (const json* v = find(doc, "", "payload", c, true)) parse_payload(*v, base_dir, c, s.payload);
  if (const json* v = find(doc, "", "eve", c, false)) parse_eves(*v, c, s.eves);
  if (const json* v = find(doc, "", "localization_min_bits", c, false))
    if (auto x = as_int(*v, "localization_min_bits", c, 1, 1 << 30)) s.localization_min_bits = *x;

  // Semantic pass only once the document shape is sound.
  if (c.errors.empty()) {
    try {
      s.topology.validate();
    } catch (const ContractError& e) {
      c.err("topology", e.what());
    }
    try {
      s.protocol.validate();
    } catch (const ContractError& e) {
      c.err("protocol", e.what());
    }
    if (!s.topology.has_node(s.src)) c.err("src", "unknown node " + s.src);
    if (!s.topology.has_node(s.dst)) c.err("dst", "unknown node " + s.dst);
    if (s.src == s.dst) c.err("dst", "src and dst must differ");
    if (c.errors.empty()) {
      try {
        network::find_route(s.topology, s.src, s.dst);
      } catch (const ContractError& e) {
        c.err("topology", e.what());
      }
    }
    std::set<std::string> eve_hops;
    for (size_t i = 0; i < s.eves.size(); ++i) {
      const std::string p = "eve[" + std::to_string(i) + "].hop";
      if (!s.topology.link_by_label(s.eves[i].target_hop))
        c.err(p, "no link labeled " + s.eves[i].target_hop);
      else if (!eve_hops.insert(s.eves[i].target_hop).second)
        c.err(p, "duplicate eavesdropper on " + s.eves[i].target_hop);
    }
  }

  out.errors = std::move(c.errors);
  if (out.errors.empty()) out.scenario = std::move(s);
  return out;
}

ValidationResult load_scenario_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    ValidationResult out;
    out.errors = {"config: cannot read " + path};
    return out;
  }
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return validate_scenario(text, std::filesystem::path(path).parent_path().string());
}

Scenario load_scenario_file_or_throw(const std::string& path) {
  ValidationResult r = load_scenario_file(path);
  if (!r.ok()) throw ContractError("scenario: " + r.errors.front());
  return std::move(*r.scenario);
}

Bytes materialize_payload(const PayloadSpec& spec, uint64_t master_seed) {
  switch (spec.source) {
    case PayloadSource::Random: {
      rng::RandomStream r(rng::derive_seed(master_seed, "payload"));
      return r.next_bytes(spec.random_bytes);
    }
    case PayloadSource::Inline:
      return spec.inline_bytes;
    case PayloadSource::File: {
      std::ifstream f(spec.file, std::ios::binary);
      if (!f) throw ContractError("payload: cannot read file " + spec.file);
      return Bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    }
  }
  throw ContractError("payload: bad source");
}

}  // namespace srn::scenario
