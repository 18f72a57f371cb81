#include "verbspace/taxonomy.hpp"

#include <algorithm>

#include <json.hpp>

#include "verbspace/rng.hpp"

namespace verbspace {

using nlohmann::json;

const VerbNode& Taxonomy::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNode("unknown node: " + id);
  return it->second;
}

int Taxonomy::index_of(const std::string& id) const {
  auto it = std::lower_bound(order_.begin(), order_.end(), id);
  if (it == order_.end() || *it != id) throw UnknownNode("unknown node: " + id);
  return static_cast<int>(it - order_.begin());
}

const std::vector<std::string>& Taxonomy::children(const std::string& id) const {
  node(id);  // existence check
  static const std::vector<std::string> kEmpty;
  auto it = children_.find(id);
  return it == children_.end() ? kEmpty : it->second;
}

std::vector<std::string> Taxonomy::ancestors(const std::string& id) const {
  std::vector<std::string> chain;
  const VerbNode* cur = &node(id);
  while (!cur->parent_id.empty()) {
    chain.push_back(cur->parent_id);
    cur = &node(cur->parent_id);
  }
  return chain;
}

std::set<std::string> Taxonomy::descendants(const std::string& id) const {
  std::set<std::string> out;
  std::vector<std::string> stack{id};
  node(id);
  while (!stack.empty()) {
    std::string cur = stack.back();
    stack.pop_back();
    auto it = children_.find(cur);
    if (it == children_.end()) continue;
    for (const auto& child : it->second) {
      out.insert(child);
      stack.push_back(child);
    }
  }
  return out;
}

int Taxonomy::depth(const std::string& id) const {
  return static_cast<int>(ancestors(id).size());
}

namespace {

json member_to_json(const VerbMember& m) {
  if (m.wordnet.empty() && m.framenet.empty()) return m.lemma;
  json j;
  j["lemma"] = m.lemma;
  if (!m.wordnet.empty()) j["wordnet"] = m.wordnet;
  if (!m.framenet.empty()) j["framenet"] = m.framenet;
  return j;
}

VerbMember member_from_json(const json& j) {
  VerbMember m;
  if (j.is_string()) {
    m.lemma = j.get<std::string>();
    return m;
  }
  if (!j.is_object() || !j.contains("lemma") || !j["lemma"].is_string()) {
    throw MalformedDocument("taxonomy: member must be a string or an object with a 'lemma'");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "lemma") {
      m.lemma = value.get<std::string>();
    } else if (key == "wordnet" || key == "framenet") {
      if (!value.is_array()) throw MalformedDocument("taxonomy: member." + key + " must be an array");
      auto& dst = key == "wordnet" ? m.wordnet : m.framenet;
      for (const auto& s : value) {
        if (!s.is_string()) throw MalformedDocument("taxonomy: member." + key + " entries must be strings");
        dst.push_back(s.get<std::string>());
      }
    } else {
      throw MalformedDocument("taxonomy: unknown member field '" + key + "'");
    }
  }
  return m;
}

std::vector<std::string> string_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw MalformedDocument("taxonomy: " + what + " must be an array");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) throw MalformedDocument("taxonomy: " + what + " entries must be strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

std::string Taxonomy::serialize() const {
  json nodes = json::array();
  for (const auto& id : order_) {
    if (id == kRootId) continue;
    const VerbNode& n = nodes_.at(id);
    json jn;
    jn["id"] = n.id;
    jn["parent"] = n.parent_id;
    if (!n.gloss.empty()) jn["gloss"] = n.gloss;
    if (!n.members.empty()) {
      json ms = json::array();
      for (const auto& m : n.members) ms.push_back(member_to_json(m));
      jn["members"] = ms;
    }
    if (!n.examples.empty()) jn["examples"] = n.examples;
    if (!n.definitions.empty()) jn["definitions"] = n.definitions;
    nodes.push_back(jn);
  }
  json doc;
  doc["format_version"] = 1;
  doc["nodes"] = nodes;
  return doc.dump(2) + "\n";
}

std::uint64_t Taxonomy::fingerprint() const { return fnv1a64(serialize()); }

Taxonomy parse_taxonomy(const std::string& doc) {
  json j;
  try {
    j = json::parse(doc);
  } catch (const json::parse_error& e) {
    throw MalformedDocument(std::string("taxonomy: ") + e.what());
  }
  if (!j.is_object()) throw MalformedDocument("taxonomy: document must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "format_version" && key != "nodes") {
      throw MalformedDocument("taxonomy: unknown field '" + key + "'");
    }
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != 1) {
    throw MalformedDocument("taxonomy: format_version must be the integer 1");
  }
  if (!j.contains("nodes") || !j["nodes"].is_array()) {
    throw MalformedDocument("taxonomy: missing 'nodes' array");
  }

  Taxonomy tax;
  VerbNode root;
  root.id = Taxonomy::kRootId;
  tax.nodes_[root.id] = root;

  for (const auto& jn : j["nodes"]) {
    if (!jn.is_object()) throw MalformedDocument("taxonomy: node entries must be objects");
    VerbNode n;
    n.parent_id = Taxonomy::kRootId;
    for (const auto& [key, value] : jn.items()) {
      if (key == "id") {
        if (!value.is_string()) throw MalformedDocument("taxonomy: id must be a string");
        n.id = value.get<std::string>();
      } else if (key == "parent") {
        if (!value.is_string()) throw MalformedDocument("taxonomy: parent must be a string");
        n.parent_id = value.get<std::string>();
      } else if (key == "gloss") {
        if (!value.is_string()) throw MalformedDocument("taxonomy: gloss must be a string");
        n.gloss = value.get<std::string>();
      } else if (key == "members") {
        if (!value.is_array()) throw MalformedDocument("taxonomy: members must be an array");
        for (const auto& m : value) n.members.push_back(member_from_json(m));
      } else if (key == "examples") {
        n.examples = string_array(value, "examples");
      } else if (key == "definitions") {
        n.definitions = string_array(value, "definitions");
      } else {
        throw MalformedDocument("taxonomy: unknown node field '" + key + "'");
      }
    }
    if (n.id.empty()) throw MalformedDocument("taxonomy: node without id");
    if (n.parent_id.empty()) throw MalformedDocument("taxonomy: empty parent id");
    if (n.id == Taxonomy::kRootId) {
      throw DuplicateId("taxonomy: 'root' is implicit and may not be redefined");
    }
    if (tax.nodes_.count(n.id)) throw DuplicateId("taxonomy: duplicate id " + n.id);
    tax.nodes_[n.id] = std::move(n);
  }

  for (const auto& [id, n] : tax.nodes_) {
    if (id == Taxonomy::kRootId) continue;
    if (!tax.nodes_.count(n.parent_id)) {
      throw DanglingParent("taxonomy: node " + id + " has unknown parent " + n.parent_id);
    }
    tax.children_[n.parent_id].push_back(id);
  }

  // Cycle check: walk each parent chain, marking nodes on the current path.
  std::map<std::string, int> state;  // 0 unvisited, 1 on path, 2 done
  for (const auto& [id, n] : tax.nodes_) {
    (void)n;
    std::vector<std::string> path;
    std::string cur = id;
    while (state[cur] == 0 && cur != Taxonomy::kRootId) {
      state[cur] = 1;
      path.push_back(cur);
      cur = tax.nodes_.at(cur).parent_id;
    }
    if (state[cur] == 1 && cur != Taxonomy::kRootId) {
      throw CyclicTaxonomy("taxonomy: parent chain loops at " + cur);
    }
    for (const auto& p : path) state[p] = 2;
  }

  for (const auto& [id, n] : tax.nodes_) {
    (void)n;
    tax.order_.push_back(id);
    if (!tax.children_.count(id)) tax.leaves_.insert(id);
  }
  // std::map iteration is already lexicographic; keep children sorted too.
  for (auto& [id, kids] : tax.children_) {
    (void)id;
    std::sort(kids.begin(), kids.end());
  }
  return tax;
}

std::pair<std::set<std::string>, std::set<std::string>> split_rare(
    const std::set<std::string>& leaf_ids,
    const std::map<std::string, std::int64_t>& sample_counts,
    std::int64_t threshold) {
  std::set<std::string> rare, non_rare;
  for (const auto& id : leaf_ids) {
    auto it = sample_counts.find(id);
    if (it == sample_counts.end()) throw MissingCount("split_rare: no count for leaf " + id);
    (it->second < threshold ? rare : non_rare).insert(id);
  }
  return {rare, non_rare};
}

}  // namespace verbspace
