#pragma once

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

#include "verbspace/eval.hpp"
#include "verbspace/harmonize.hpp"
#include "verbspace/model.hpp"
#include "verbspace/taxonomy.hpp"

namespace verbspace {

/// Write bytes atomically (temp file + rename). Throws IoError.
void atomic_write(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);  // IoError

// ---------------------------------------------------------------------------
// Feature files: magic "PGEA", u32 version = 1, u32 count, u32 dim, all
// little-endian, then count x dim float32 row-major. A sidecar text file at
// "<path>.ids" lists sample ids in row order, one per line.
// ---------------------------------------------------------------------------

struct FeatureFile {
  std::vector<std::string> ids;
  Eigen::MatrixXd x;  // dim x count, column per sample
};

void write_features(const std::string& path, const std::vector<std::string>& ids,
                    const Eigen::MatrixXd& x);
FeatureFile read_features(const std::string& path);

/// Per-sample records over a feature file, tagged with a modality
/// ("2d" | "3d"). Throws ConfigMismatch on non-finite entries.
std::vector<FeatureVector> feature_vectors(const FeatureFile& file,
                                           const std::string& modality = "2d");

// ---------------------------------------------------------------------------
// Partial labels: one JSON object per line,
// {"sample_id": ..., "pos": [...], "neg": [...]} with unknown implicit;
// augmented records add "soft": {node-id: value} over unknown entries.
// ---------------------------------------------------------------------------

std::string labels_to_jsonl(const std::vector<PartialLabel>& labels, const Taxonomy& tax);
std::vector<PartialLabel> labels_from_jsonl(const std::string& text, const Taxonomy& tax);

// ---------------------------------------------------------------------------
// Class-node mappings: one JSON object per line with explicit status.
// ---------------------------------------------------------------------------

std::string mappings_to_jsonl(const std::vector<ClassNodeMapping>& mappings);
std::vector<ClassNodeMapping> mappings_from_jsonl(const std::string& text);

// ---------------------------------------------------------------------------
// Manifests: one JSON object per line,
// {"sample_id", "dataset", "modality", "classes": [...],
//  "duration"?: seconds, "instances"?: [[...], ...]}.
// ---------------------------------------------------------------------------

std::vector<ManifestSample> manifest_from_jsonl(const std::string& text);

// ---------------------------------------------------------------------------
// Checkpoints: versioned little-endian binary container; write-then-read is
// bit-exact.
// ---------------------------------------------------------------------------

std::string checkpoint_to_bytes(const Checkpoint& ckpt);
Checkpoint checkpoint_from_bytes(const std::string& bytes);
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Evaluation reports.
// ---------------------------------------------------------------------------

std::string report_to_json(const EvalReport& report);

}  // namespace verbspace
