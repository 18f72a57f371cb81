#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "verbspace/errors.hpp"

namespace verbspace {

struct VerbMember {
  std::string lemma;
  std::vector<std::string> wordnet;   // sense keys
  std::vector<std::string> framenet;  // frame names

  bool operator==(const VerbMember&) const = default;
};

struct VerbNode {
  std::string id;
  std::string parent_id;  // empty only on the root itself
  std::string gloss;
  std::vector<VerbMember> members;
  std::vector<std::string> examples;
  std::vector<std::string> definitions;
};

/// Immutable verb tree. A synthetic root node named "root" is always
/// present and owns every top-level class; hierarchy comes solely from
/// parent links. Node ids are case-sensitive exact strings.
class Taxonomy {
 public:
  static constexpr const char* kRootId = "root";

  /// Total node count, including the root.
  int size() const { return static_cast<int>(order_.size()); }

  bool contains(const std::string& id) const { return nodes_.count(id) > 0; }

  const VerbNode& node(const std::string& id) const;

  /// Canonical index of a node: its rank among all ids in lexicographic
  /// order. Label and score vectors are laid out in this order.
  int index_of(const std::string& id) const;

  /// All node ids in canonical (lexicographic) order.
  const std::vector<std::string>& ordered_ids() const { return order_; }

  /// Children of a node, sorted by id.
  const std::vector<std::string>& children(const std::string& id) const;

  /// Parent chain from id (exclusive) up to the root (inclusive).
  /// Empty for the root itself.
  std::vector<std::string> ancestors(const std::string& id) const;

  /// Transitive closure of children; disjoint from ancestors(id).
  std::set<std::string> descendants(const std::string& id) const;

  int depth(const std::string& id) const;

  const std::set<std::string>& leaf_ids() const { return leaves_; }

  /// Canonical document: nodes sorted by id, empty fields omitted,
  /// byte-stable. parse(serialize(t)) reproduces t exactly.
  std::string serialize() const;

  /// FNV-1a hash of the canonical serialization.
  std::uint64_t fingerprint() const;

  friend Taxonomy parse_taxonomy(const std::string& doc);

 private:
  std::map<std::string, VerbNode> nodes_;
  std::map<std::string, std::vector<std::string>> children_;
  std::vector<std::string> order_;
  std::set<std::string> leaves_;
};

/// Parse and validate a taxonomy document.
/// Throws MalformedDocument, DuplicateId, DanglingParent, CyclicTaxonomy.
Taxonomy parse_taxonomy(const std::string& doc);

/// Partition leaves into (rare, non-rare) by training sample count:
/// rare = leaves with count < threshold. Throws MissingCount if a leaf
/// has no entry in counts.
std::pair<std::set<std::string>, std::set<std::string>> split_rare(
    const std::set<std::string>& leaf_ids,
    const std::map<std::string, std::int64_t>& sample_counts,
    std::int64_t threshold);

}  // namespace verbspace
