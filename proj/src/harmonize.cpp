#include "verbspace/harmonize.hpp"

#include <algorithm>
#include <cmath>

#include "verbspace/errors.hpp"

namespace verbspace {

std::vector<MappingCandidate> rank_candidates(const Eigen::VectorXd& query,
                                              const Eigen::MatrixXd& node_features,
                                              const std::vector<std::string>& node_ids,
                                              int top_k, double min_sim) {
  if (node_features.cols() != static_cast<Eigen::Index>(node_ids.size())) {
    throw ShapeMismatch("rank_candidates: feature/id count mismatch");
  }
  std::vector<MappingCandidate> all;
  all.reserve(node_ids.size());
  for (Eigen::Index i = 0; i < node_features.cols(); ++i) {
    const double denom = query.norm() * node_features.col(i).norm();
    const double sim = denom == 0.0 ? 0.0 : query.dot(node_features.col(i)) / denom;
    if (sim >= min_sim) all.push_back({node_ids[static_cast<std::size_t>(i)], sim});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const MappingCandidate& a, const MappingCandidate& b) {
                     return a.similarity > b.similarity;
                   });
  if (top_k < static_cast<int>(all.size())) {
    all.resize(static_cast<std::size_t>(std::max(top_k, 0)));
  }
  return all;
}

std::vector<MappingCandidate> candidate_nodes(const std::string& class_text,
                                              const TextFeaturizer& featurizer,
                                              const Eigen::MatrixXd& node_features,
                                              const std::vector<std::string>& node_ids,
                                              int top_k, double min_sim) {
  return rank_candidates(featurizer.featurize(class_text), node_features, node_ids, top_k,
                         min_sim);
}

MappingStatus finalize_mapping(ClassNodeMapping& mapping) {
  mapping.accepted_nodes.clear();
  for (const auto& cand : mapping.candidates) {
    int accepts = 0, total = 0;
    for (const auto& v : mapping.verdicts) {
      if (v.node_id != cand.node_id) continue;
      ++total;
      if (v.verdict == Verdict::Accept) ++accepts;
    }
    if (total != 3) {
      mapping.status = MappingStatus::Pending;
      throw PendingVerdicts("finalize_mapping: candidate " + cand.node_id + " of class '" +
                            mapping.class_label + "' has " + std::to_string(total) +
                            " verdicts, need exactly 3");
    }
    if (accepts >= 2) mapping.accepted_nodes.push_back(cand.node_id);
  }
  mapping.status = mapping.accepted_nodes.empty() ? MappingStatus::Rejected
                                                  : MappingStatus::Accepted;
  return mapping.status;
}

std::map<std::string, AcceptedMapping> accepted_by_dataset(
    const std::vector<ClassNodeMapping>& mappings) {
  std::map<std::string, AcceptedMapping> out;
  for (const auto& m : mappings) {
    // Rejected classes stay in the table with zero nodes: their samples
    // contribute negatives over the node range only.
    if (m.status != MappingStatus::Accepted && m.status != MappingStatus::Rejected) continue;
    AcceptedMapping& am = out[m.dataset];
    auto& nodes = am.class_to_nodes[m.class_label];
    for (const auto& id : m.accepted_nodes) {
      nodes.push_back(id);
      am.node_range.insert(id);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  }
  return out;
}

PartialLabel translate_labels(const std::string& sample_id,
                              const std::set<std::string>& classes,
                              const AcceptedMapping& mapping,
                              const Taxonomy& tax, bool allow_unmapped) {
  PartialLabel label;
  label.sample_id = sample_id;
  label.values.assign(static_cast<std::size_t>(tax.size()), Label::Unknown);
  for (const auto& cls : classes) {
    auto it = mapping.class_to_nodes.find(cls);
    if (it == mapping.class_to_nodes.end()) {
      if (allow_unmapped) continue;
      throw UnmappedClass("translate_labels: class '" + cls + "' has no finalized mapping");
    }
    for (const auto& node_id : it->second) {
      label.values[static_cast<std::size_t>(tax.index_of(node_id))] = Label::Pos;
    }
  }
  for (const auto& node_id : mapping.node_range) {
    auto& v = label.values[static_cast<std::size_t>(tax.index_of(node_id))];
    if (v == Label::Unknown) v = Label::Neg;
  }
  return label;
}

PartialLabel ancestor_closure(const PartialLabel& label, const Taxonomy& tax) {
  PartialLabel out = label;
  const auto& ids = tax.ordered_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (label.values[i] != Label::Pos) continue;
    for (const auto& anc : tax.ancestors(ids[i])) {
      auto& v = out.values[static_cast<std::size_t>(tax.index_of(anc))];
      if (v == Label::Neg) {
        throw ClosureConflict("ancestor_closure: " + anc + " is negative but descendant " +
                              ids[i] + " is positive");
      }
      v = Label::Pos;
    }
  }
  return out;
}

std::vector<FrameRecord> expand_clip_labels(const std::string& clip_id,
                                            double duration_seconds,
                                            const std::set<std::string>& classes,
                                            double fps) {
  if (!(duration_seconds > 0.0)) {
    throw NonPositiveDuration("expand_clip_labels: duration must be > 0, got " +
                              std::to_string(duration_seconds));
  }
  const long count = std::max(1L, std::lround(std::floor(duration_seconds * fps + 0.5)));
  std::vector<FrameRecord> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) {
    FrameRecord fr;
    fr.frame_id = clip_id + "#f" + std::to_string(k);
    fr.timestamp = static_cast<double>(k) / fps;
    fr.classes = classes;
    out.push_back(std::move(fr));
  }
  return out;
}

std::set<std::string> merge_instance_labels(
    const std::vector<std::set<std::string>>& instances) {
  if (instances.empty()) throw NoInstances("merge_instance_labels: no instances");
  std::set<std::string> out;
  for (const auto& inst : instances) out.insert(inst.begin(), inst.end());
  return out;
}

std::string modality_name(Modality m) {
  switch (m) {
    case Modality::Image: return "image";
    case Modality::VideoClip: return "video-clip";
    case Modality::Frame: return "frame";
    case Modality::Mocap: return "mocap";
  }
  return "image";
}

Modality modality_from_name(const std::string& name) {
  if (name == "image") return Modality::Image;
  if (name == "video-clip") return Modality::VideoClip;
  if (name == "frame") return Modality::Frame;
  if (name == "mocap") return Modality::Mocap;
  throw MalformedManifest("unknown modality '" + name + "'");
}

std::map<std::string, DatasetManifest> group_manifest(
    const std::vector<ManifestSample>& samples,
    const std::map<std::string, AcceptedMapping>& accepted) {
  std::map<std::string, DatasetManifest> out;
  for (const auto& s : samples) {
    auto [it, fresh] = out.try_emplace(s.dataset);
    DatasetManifest& dm = it->second;
    if (fresh) {
      dm.dataset = s.dataset;
      dm.modality = s.modality;
      auto am = accepted.find(s.dataset);
      if (am != accepted.end()) dm.node_range = am->second.node_range;
    } else if (dm.modality != s.modality) {
      throw MalformedManifest("dataset " + s.dataset + " mixes modalities " +
                              modality_name(dm.modality) + " and " + modality_name(s.modality));
    }
    if (s.modality == Modality::VideoClip &&
        (!s.duration_seconds || !(*s.duration_seconds > 0.0))) {
      throw NonPositiveDuration("clip sample " + s.sample_id +
                                " needs a positive duration");
    }
    dm.classes.insert(s.classes.begin(), s.classes.end());
    if (s.instances) {
      for (const auto& inst : *s.instances) dm.classes.insert(inst.begin(), inst.end());
    }
    dm.samples.push_back(s);
  }
  return out;
}

}  // namespace verbspace
