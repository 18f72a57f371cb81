#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verbspace/nodetext.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace {

// ---------------------------------------------------------------------------
// Class-to-node mapping curation
// ---------------------------------------------------------------------------

struct MappingCandidate {
  std::string node_id;
  double similarity = 0.0;
};

enum class Verdict { Accept, Reject };

struct MappingVerdict {
  std::string annotator;
  std::string node_id;
  Verdict verdict = Verdict::Reject;
};

enum class MappingStatus { Suggested, Pending, Accepted, Rejected };

struct ClassNodeMapping {
  std::string dataset;
  std::string class_label;
  std::vector<MappingCandidate> candidates;  // similarity-descending
  std::vector<MappingVerdict> verdicts;
  MappingStatus status = MappingStatus::Suggested;
  std::vector<std::string> accepted_nodes;  // filled by finalize_mapping
};

/// Rank nodes by cosine similarity of a query vector against the node
/// feature columns; keep at most top_k with similarity >= min_sim. Ties
/// break toward the lower node index.
std::vector<MappingCandidate> rank_candidates(const Eigen::VectorXd& query,
                                              const Eigen::MatrixXd& node_features,
                                              const std::vector<std::string>& node_ids,
                                              int top_k, double min_sim);

/// rank_candidates over the featurized class text. Throws EmptyText.
std::vector<MappingCandidate> candidate_nodes(const std::string& class_text,
                                              const TextFeaturizer& featurizer,
                                              const Eigen::MatrixXd& node_features,
                                              const std::vector<std::string>& node_ids,
                                              int top_k, double min_sim);

/// Majority rule over exactly three verdicts per candidate: a candidate is
/// accepted with >= 2 accepts. The mapping is Accepted when at least one
/// candidate survives, otherwise Rejected. Throws PendingVerdicts when any
/// candidate has fewer (or more) than three verdicts.
MappingStatus finalize_mapping(ClassNodeMapping& mapping);

// ---------------------------------------------------------------------------
// Partial labels
// ---------------------------------------------------------------------------

enum class Label : std::int8_t { Neg = 0, Pos = 1, Unknown = 2 };

/// Per-sample annotation over all N nodes in canonical order. Soft values
/// are meaningful only where values[i] == Unknown.
struct PartialLabel {
  std::string sample_id;
  std::vector<Label> values;
  bool has_soft = false;
  Eigen::VectorXd soft;  // length N when has_soft
};

/// Accepted mappings of one dataset: class -> accepted node ids, and the
/// union of accepted nodes over all classes (the dataset's node range).
struct AcceptedMapping {
  std::map<std::string, std::vector<std::string>> class_to_nodes;
  std::set<std::string> node_range;
};

/// Collect accepted mappings per dataset from finalized records.
std::map<std::string, AcceptedMapping> accepted_by_dataset(
    const std::vector<ClassNodeMapping>& mappings);

/// Nodes mapped from the sample's classes become Pos; nodes in the
/// dataset's node range but not Pos become Neg; everything else stays
/// Unknown. A class without an accepted (or rejected) mapping record
/// throws UnmappedClass unless allow_unmapped, in which case it is skipped.
PartialLabel translate_labels(const std::string& sample_id,
                              const std::set<std::string>& classes,
                              const AcceptedMapping& mapping,
                              const Taxonomy& tax, bool allow_unmapped = false);

/// Every ancestor of a Pos node becomes Pos; an explicitly Neg ancestor
/// throws ClosureConflict.
PartialLabel ancestor_closure(const PartialLabel& label, const Taxonomy& tax);

struct FrameRecord {
  std::string frame_id;
  double timestamp = 0.0;  // seconds from clip start
  std::set<std::string> classes;
};

/// Sample a clip at fps (default 3): max(1, round-half-up(duration * fps))
/// frames, each carrying the clip's classes. Frame ids are
/// "{clip_id}#f{index}". Throws NonPositiveDuration.
std::vector<FrameRecord> expand_clip_labels(const std::string& clip_id,
                                            double duration_seconds,
                                            const std::set<std::string>& classes,
                                            double fps = 3.0);

/// Union of per-instance label sets. Throws NoInstances on an empty list.
std::set<std::string> merge_instance_labels(
    const std::vector<std::set<std::string>>& instances);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

enum class Modality { Image, VideoClip, Frame, Mocap };

std::string modality_name(Modality m);
Modality modality_from_name(const std::string& name);  // MalformedManifest

struct ManifestSample {
  std::string sample_id;
  std::string dataset;
  Modality modality = Modality::Image;
  std::set<std::string> classes;
  std::optional<double> duration_seconds;
  std::optional<std::vector<std::set<std::string>>> instances;
};

/// Registry view of one dataset: its observed class vocabulary, the union
/// of accepted nodes over all classes, and the samples themselves.
struct DatasetManifest {
  std::string dataset;
  Modality modality = Modality::Image;
  std::set<std::string> classes;
  std::set<std::string> node_range;
  std::vector<ManifestSample> samples;
};

/// Group samples per dataset and validate manifest invariants: one
/// modality per dataset (MalformedManifest otherwise) and positive clip
/// durations (NonPositiveDuration). node_range comes from the accepted
/// mappings; datasets without mappings get an empty range.
std::map<std::string, DatasetManifest> group_manifest(
    const std::vector<ManifestSample>& samples,
    const std::map<std::string, AcceptedMapping>& accepted);

}  // namespace verbspace
