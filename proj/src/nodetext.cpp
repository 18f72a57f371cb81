#include "verbspace/nodetext.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "verbspace/errors.hpp"
#include "verbspace/rng.hpp"

namespace verbspace {

namespace {

constexpr double kDamping = 0.85;
constexpr int kTextRankWindow = 4;
constexpr int kMaxTextRankIterations = 250;
constexpr double kTextRankTolerance = 1e-12;

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      if (cur.size() >= 2) tokens.push_back(cur);
      cur.clear();
    }
  }
  if (cur.size() >= 2) tokens.push_back(cur);
  return tokens;
}

namespace {

std::string render_item(const Taxonomy& tax, const std::string& id) {
  const VerbNode& n = tax.node(id);
  if (n.gloss.empty()) return id;
  return id + ": " + n.gloss;
}

/// "none" / "a" / "a and b" / "a, b, and c".
std::string render_list(const Taxonomy& tax, const std::vector<std::string>& ids) {
  if (ids.empty()) return "none";
  if (ids.size() == 1) return render_item(tax, ids[0]);
  if (ids.size() == 2) {
    return render_item(tax, ids[0]) + " and " + render_item(tax, ids[1]);
  }
  std::string out;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    out += render_item(tax, ids[i]) + ", ";
  }
  out += "and " + render_item(tax, ids.back());
  return out;
}

bool ends_with_sentence_punct(const std::string& s) {
  if (s.empty()) return false;
  char c = s.back();
  return c == '.' || c == '!' || c == '?';
}

std::string join_sentences(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += " ";
    out += p;
  }
  if (!ends_with_sentence_punct(out)) out += ".";
  return out;
}

}  // namespace

std::string geometric_prompt(const Taxonomy& tax, const std::string& id) {
  std::vector<std::string> up = tax.ancestors(id);
  std::set<std::string> down_set = tax.descendants(id);
  std::vector<std::string> down(down_set.begin(), down_set.end());
  return "The node is " + id + ". Its ancestors are " + render_list(tax, up) +
         ". Its descendants are " + render_list(tax, down) + ".";
}

std::string semantic_description(const VerbNode& node) {
  std::vector<std::string> sections;
  if (!node.members.empty()) {
    std::string lemmas;
    for (std::size_t i = 0; i < node.members.size(); ++i) {
      if (i) lemmas += ", ";
      lemmas += node.members[i].lemma;
    }
    sections.push_back("Verbs: " + lemmas + ".");
  }
  if (!node.examples.empty()) {
    sections.push_back("Examples: " + join_sentences(node.examples));
  }
  if (!node.definitions.empty()) {
    sections.push_back("Definitions: " + join_sentences(node.definitions));
  }
  if (sections.empty()) return "Verbs: none.";
  std::string out;
  for (const auto& s : sections) {
    if (!out.empty()) out += " ";
    out += s;
  }
  return out;
}

std::vector<RankedToken> textrank_keywords(const std::vector<std::string>& tokens,
                                           int window, int k) {
  if (tokens.empty()) throw EmptyInput("textrank: empty token list");
  if (window < 1) throw Error("textrank: window must be >= 1");

  // Unique vertices in first-occurrence order.
  std::unordered_map<std::string, int> index;
  std::vector<std::string> vocab;
  std::vector<int> seq(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto [it, inserted] = index.emplace(tokens[i], static_cast<int>(vocab.size()));
    if (inserted) vocab.push_back(tokens[i]);
    seq[i] = it->second;
  }
  const int m = static_cast<int>(vocab.size());

  // Weighted co-occurrence within the window, no self loops.
  std::vector<std::map<int, double>> adj(m);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size() && j - i < static_cast<std::size_t>(window); ++j) {
      if (seq[i] == seq[j]) continue;
      adj[seq[i]][seq[j]] += 1.0;
      adj[seq[j]][seq[i]] += 1.0;
    }
  }
  std::vector<double> degree(m, 0.0);
  for (int v = 0; v < m; ++v) {
    for (const auto& [u, w] : adj[v]) {
      (void)u;
      degree[v] += w;
    }
  }

  std::vector<double> score(m, 1.0), next(m, 0.0);
  for (int iter = 0; iter < kMaxTextRankIterations; ++iter) {
    double delta = 0.0;
    for (int v = 0; v < m; ++v) {
      double acc = 0.0;
      for (const auto& [u, w] : adj[v]) acc += w / degree[u] * score[u];
      next[v] = (1.0 - kDamping) + kDamping * acc;
      delta = std::max(delta, std::abs(next[v] - score[v]));
    }
    score.swap(next);
    if (delta < kTextRankTolerance) break;
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;  // vertex index == first-occurrence rank
  });

  std::vector<RankedToken> out;
  const int take = std::min(k, m);
  out.reserve(std::max(take, 0));
  for (int i = 0; i < take; ++i) out.push_back({vocab[order[i]], score[order[i]]});
  return out;
}

namespace {

struct Sentence {
  std::string text;
  std::vector<std::string> tokens;
};

std::vector<Sentence> split_sentences(const std::string& text) {
  std::vector<Sentence> out;
  std::string cur;
  auto flush = [&]() {
    std::size_t begin = cur.find_first_not_of(" \t\n\r");
    if (begin == std::string::npos) {
      cur.clear();
      return;
    }
    std::size_t end = cur.find_last_not_of(" \t\n\r");
    Sentence s;
    s.text = cur.substr(begin, end - begin + 1);
    s.tokens = tokenize(s.text);
    if (!s.tokens.empty()) out.push_back(std::move(s));
    cur.clear();
  };
  for (char ch : text) {
    cur.push_back(ch);
    if (ch == '.' || ch == '!' || ch == '?') flush();
  }
  flush();
  return out;
}

/// Prefix of the raw sentence covering its first `budget` tokens.
std::string truncate_to_tokens(const std::string& text, int budget) {
  int seen = 0;
  std::string cur;
  std::size_t cut = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char ch = static_cast<unsigned char>(text[i]);
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(ch));
    } else {
      if (cur.size() >= 2) {
        ++seen;
        if (seen == budget) {
          cut = i;
          break;
        }
      }
      cur.clear();
    }
    if (i + 1 == text.size() && cur.size() >= 2) {
      ++seen;
      if (seen == budget) cut = text.size();
    }
  }
  return text.substr(0, cut);
}

}  // namespace

std::string summarize(const std::string& text, int budget_tokens) {
  std::vector<std::string> all_tokens = tokenize(text);
  if (static_cast<int>(all_tokens.size()) <= budget_tokens) return text;

  auto ranked = textrank_keywords(all_tokens, kTextRankWindow,
                                  static_cast<int>(all_tokens.size()));
  std::unordered_map<std::string, double> token_score;
  for (const auto& rt : ranked) token_score[rt.token] = rt.score;

  std::vector<Sentence> sentences = split_sentences(text);
  std::vector<double> sent_score(sentences.size(), 0.0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    for (const auto& tok : sentences[i].tokens) sent_score[i] += token_score[tok];
  }
  std::vector<std::size_t> rank(sentences.size());
  std::iota(rank.begin(), rank.end(), 0);
  std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
    if (sent_score[a] != sent_score[b]) return sent_score[a] > sent_score[b];
    return a < b;
  });

  std::vector<bool> selected(sentences.size(), false);
  int used = 0;
  for (std::size_t r : rank) {
    const int cost = static_cast<int>(sentences[r].tokens.size());
    if (used + cost > budget_tokens) break;
    selected[r] = true;
    used += cost;
  }
  if (used == 0 && !sentences.empty()) {
    // The top-ranked sentence alone overflows the budget; keep its prefix.
    return truncate_to_tokens(sentences[rank[0]].text, budget_tokens);
  }

  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!selected[i]) continue;
    if (!out.empty()) out += " ";
    out += sentences[i].text;
  }
  return out;
}

std::vector<NodeText> build_node_texts(const Taxonomy& tax, int budget_tokens) {
  std::vector<NodeText> out;
  out.reserve(tax.ordered_ids().size());
  for (const auto& id : tax.ordered_ids()) {
    NodeText nt;
    nt.node_id = id;
    nt.semantic_text = semantic_description(tax.node(id));
    nt.geometric_text = geometric_prompt(tax, id);
    nt.summarized_text = summarize(nt.semantic_text + " " + nt.geometric_text,
                                   budget_tokens);
    out.push_back(std::move(nt));
  }
  return out;
}

TextFeaturizer::TextFeaturizer(const std::vector<std::string>& corpus, int d_text)
    : d_text_(d_text), corpus_size_(static_cast<int>(corpus.size())) {
  if (d_text < 1) throw Error("featurizer: d_text must be >= 1");
  for (const auto& doc : corpus) {
    std::vector<std::string> toks = tokenize(doc);
    std::sort(toks.begin(), toks.end());
    toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
    for (const auto& t : toks) ++doc_freq_[t];
  }
}

double TextFeaturizer::idf(const std::string& token) const {
  auto it = doc_freq_.find(token);
  const int df = it == doc_freq_.end() ? 0 : it->second;
  return std::log(static_cast<double>(1 + corpus_size_) / (1 + df)) + 1.0;
}

std::size_t TextFeaturizer::slot(const std::string& token, int d_text) {
  return static_cast<std::size_t>(fnv1a64(token) % static_cast<std::uint64_t>(d_text));
}

Eigen::VectorXd TextFeaturizer::featurize(const std::string& text) const {
  std::vector<std::string> toks = tokenize(text);
  if (toks.empty()) throw EmptyText("featurize: text has no tokens");
  std::unordered_map<std::string, int> tf;
  for (const auto& t : toks) ++tf[t];
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d_text_);
  for (const auto& [t, count] : tf) {
    v[static_cast<Eigen::Index>(slot(t, d_text_))] += count * idf(t);
  }
  v /= v.norm();
  return v;
}

NodeFeatures build_node_features(const Taxonomy& tax, int d_text, int budget_tokens) {
  std::vector<NodeText> texts = build_node_texts(tax, budget_tokens);
  std::vector<std::string> corpus;
  corpus.reserve(texts.size());
  for (const auto& t : texts) corpus.push_back(t.summarized_text);
  TextFeaturizer featurizer(corpus, d_text);
  Eigen::MatrixXd feats(d_text, static_cast<Eigen::Index>(texts.size()));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    feats.col(static_cast<Eigen::Index>(i)) = featurizer.featurize(texts[i].summarized_text);
  }
  return {std::move(texts), std::move(feats), std::move(featurizer)};
}

}  // namespace verbspace
