#pragma once

#include <Eigen/Core>

#include <string>
#include <unordered_map>
#include <vector>

#include "verbspace/taxonomy.hpp"

namespace verbspace {

/// Lowercase, split on non-alphanumeric, drop tokens shorter than 2 chars.
std::vector<std::string> tokenize(const std::string& text);

/// Fixed-template tree-position prompt for a node:
/// "The node is {id}. Its ancestors are {list or none}. Its descendants
/// are {list or none}." Ancestors run leaf-to-root; descendants are listed
/// in lexicographic order; glosses render as "{id}: {gloss}".
std::string geometric_prompt(const Taxonomy& tax, const std::string& id);

/// "Verbs: {lemmas}. Examples: {sentences}. Definitions: {sentences}."
/// with empty sections omitted; a node with no text fields yields
/// "Verbs: none."
std::string semantic_description(const VerbNode& node);

struct RankedToken {
  std::string token;
  double score;
};

/// TextRank keyword scores: damped (0.85) power iteration on the
/// undirected token co-occurrence graph (tokens at distance < window
/// co-occur). Returns the top k unique tokens by score, ties broken by
/// first occurrence. Throws EmptyInput.
std::vector<RankedToken> textrank_keywords(const std::vector<std::string>& tokens,
                                           int window, int k);

/// Keep the text unchanged when it fits the token budget; otherwise select
/// sentences by summed TextRank keyword score (reassembled in original
/// order) until the budget would be exceeded. Output never exceeds the
/// budget; empty text maps to empty text.
std::string summarize(const std::string& text, int budget_tokens = 77);

struct NodeText {
  std::string node_id;
  std::string semantic_text;
  std::string geometric_text;
  std::string summarized_text;
};

/// Semantic description + geometric prompt, concatenated then summarized,
/// for every node in canonical order.
std::vector<NodeText> build_node_texts(const Taxonomy& tax, int budget_tokens = 77);

/// Deterministic text embedding: hashed term frequencies weighted by
/// inverse document frequency over the node corpus, L2-normalized.
/// Identical text always yields the identical vector.
class TextFeaturizer {
 public:
  TextFeaturizer(const std::vector<std::string>& corpus, int d_text);

  /// Throws EmptyText when the text has no tokens.
  Eigen::VectorXd featurize(const std::string& text) const;

  int dim() const { return d_text_; }
  double idf(const std::string& token) const;
  static std::size_t slot(const std::string& token, int d_text);

 private:
  int d_text_;
  int corpus_size_;
  std::unordered_map<std::string, int> doc_freq_;
};

struct NodeFeatures {
  std::vector<NodeText> texts;   // canonical node order
  Eigen::MatrixXd features;      // d_text x N, column per node
  TextFeaturizer featurizer;     // IDF table shared with class-text queries
};

NodeFeatures build_node_features(const Taxonomy& tax, int d_text,
                                 int budget_tokens = 77);

}  // namespace verbspace
