#include "verbspace/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "verbspace/errors.hpp"

namespace verbspace {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read error on " + path);
  return ss.str();
}

// ---------------------------------------------------------------------------
// little-endian primitives
// ---------------------------------------------------------------------------

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Cursor {
  const std::string& bytes;
  std::size_t at = 0;

  void need(std::size_t n) const {
    if (at + n > bytes.size()) throw IoError("truncated binary file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    }
    at += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[at + i])) << (8 * i);
    }
    at += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t len = u32();
    need(len);
    std::string s = bytes.substr(at, len);
    at += len;
    return s;
  }
};

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

void put_mat(std::string& out, const Eigen::MatrixXd& m) {
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) put_f64(out, m(i, j));
  }
}

Eigen::MatrixXd get_mat(Cursor& c) {
  const std::uint32_t rows = c.u32();
  const std::uint32_t cols = c.u32();
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = c.f64();
  }
  return m;
}

void put_vec(std::string& out, const Eigen::VectorXd& v) {
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

Eigen::VectorXd get_vec(Cursor& c) {
  const std::uint32_t n = c.u32();
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = c.f64();
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Feature files
// ---------------------------------------------------------------------------

static constexpr char kFeatureMagic[4] = {'P', 'G', 'E', 'A'};

void write_features(const std::string& path, const std::vector<std::string>& ids,
                    const Eigen::MatrixXd& x) {
  if (static_cast<Eigen::Index>(ids.size()) != x.cols()) {
    throw IoError("write_features: id/sample count mismatch");
  }
  std::string out;
  out.append(kFeatureMagic, 4);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(x.cols()));
  put_u32(out, static_cast<std::uint32_t>(x.rows()));
  for (Eigen::Index s = 0; s < x.cols(); ++s) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      put_f32(out, static_cast<float>(x(i, s)));
    }
  }
  atomic_write(path, out);

  std::string sidecar;
  for (const auto& id : ids) {
    sidecar += id;
    sidecar += '\n';
  }
  atomic_write(path + ".ids", sidecar);
}

FeatureFile read_features(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw IoError("feature file " + path + " has bad magic");
  }
  Cursor c{bytes, 4};
  const std::uint32_t version = c.u32();
  if (version != 1) throw IoError("feature file " + path + " has unsupported version");
  const std::uint32_t count = c.u32();
  const std::uint32_t dim = c.u32();
  FeatureFile ff;
  ff.x.resize(dim, count);
  for (std::uint32_t s = 0; s < count; ++s) {
    for (std::uint32_t i = 0; i < dim; ++i) {
      ff.x(i, s) = static_cast<double>(c.f32());
    }
  }
  const std::string sidecar = read_file(path + ".ids");
  std::istringstream lines(sidecar);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) ff.ids.push_back(line);
  }
  if (ff.ids.size() != count) {
    throw IoError("feature file " + path + ": sidecar lists " + std::to_string(ff.ids.size()) +
                  " ids for " + std::to_string(count) + " rows");
  }
  return ff;
}

std::vector<FeatureVector> feature_vectors(const FeatureFile& file,
                                           const std::string& modality) {
  if (modality != "2d" && modality != "3d") {
    throw ConfigMismatch("feature_vectors: modality must be '2d' or '3d'");
  }
  std::vector<FeatureVector> out;
  out.reserve(file.ids.size());
  for (std::size_t i = 0; i < file.ids.size(); ++i) {
    FeatureVector fv;
    fv.sample_id = file.ids[i];
    fv.modality = modality;
    fv.vector = file.x.col(static_cast<Eigen::Index>(i));
    if (!fv.vector.allFinite()) {
      throw ConfigMismatch("feature_vectors: non-finite entries in sample " + fv.sample_id);
    }
    out.push_back(std::move(fv));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partial labels
// ---------------------------------------------------------------------------

std::string labels_to_jsonl(const std::vector<PartialLabel>& labels, const Taxonomy& tax) {
  const auto& ids = tax.ordered_ids();
  std::string out;
  for (const auto& y : labels) {
    if (y.values.size() != ids.size()) {
      throw ShapeMismatch("labels_to_jsonl: label " + y.sample_id + " has wrong node count");
    }
    json rec;
    rec["sample_id"] = y.sample_id;
    json pos = json::array(), neg = json::array();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (y.values[i] == Label::Pos) pos.push_back(ids[i]);
      if (y.values[i] == Label::Neg) neg.push_back(ids[i]);
    }
    rec["pos"] = pos;
    rec["neg"] = neg;
    if (y.has_soft) {
      json soft = json::object();
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (y.values[i] == Label::Unknown) soft[ids[i]] = y.soft[static_cast<Eigen::Index>(i)];
      }
      rec["soft"] = soft;
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<PartialLabel> labels_from_jsonl(const std::string& text, const Taxonomy& tax) {
  std::vector<PartialLabel> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("labels line " + std::to_string(line_no) + ": " + e.what());
    }
    PartialLabel y;
    try {
      y.sample_id = rec.value("sample_id", "");
      if (y.sample_id.empty()) {
        throw IoError("labels line " + std::to_string(line_no) + ": missing sample_id");
      }
      y.values.assign(static_cast<std::size_t>(tax.size()), Label::Unknown);
      for (const auto& id : rec.value("pos", json::array())) {
        y.values[static_cast<std::size_t>(tax.index_of(id.get<std::string>()))] = Label::Pos;
      }
      for (const auto& id : rec.value("neg", json::array())) {
        const int idx = tax.index_of(id.get<std::string>());
        if (y.values[static_cast<std::size_t>(idx)] == Label::Pos) {
          throw IoError("labels line " + std::to_string(line_no) + ": node " +
                        id.get<std::string>() + " is both pos and neg");
        }
        y.values[static_cast<std::size_t>(idx)] = Label::Neg;
      }
      if (rec.contains("soft")) {
        y.has_soft = true;
        y.soft = Eigen::VectorXd::Zero(tax.size());
        for (const auto& [node_id, value] : rec["soft"].items()) {
          const int idx = tax.index_of(node_id);
          if (y.values[static_cast<std::size_t>(idx)] != Label::Unknown) {
            throw IoError("labels line " + std::to_string(line_no) +
                          ": soft value on known node " + node_id);
          }
          y.soft[idx] = value.get<double>();
        }
      }
    } catch (const json::exception& e) {
      throw IoError("labels line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(y));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mappings
// ---------------------------------------------------------------------------

namespace {

std::string status_name(MappingStatus s) {
  switch (s) {
    case MappingStatus::Suggested: return "suggested";
    case MappingStatus::Pending: return "pending";
    case MappingStatus::Accepted: return "accepted";
    case MappingStatus::Rejected: return "rejected";
  }
  return "suggested";
}

MappingStatus status_from_name(const std::string& s) {
  if (s == "suggested") return MappingStatus::Suggested;
  if (s == "pending") return MappingStatus::Pending;
  if (s == "accepted") return MappingStatus::Accepted;
  if (s == "rejected") return MappingStatus::Rejected;
  throw IoError("unknown mapping status '" + s + "'");
}

}  // namespace

std::string mappings_to_jsonl(const std::vector<ClassNodeMapping>& mappings) {
  std::string out;
  for (const auto& m : mappings) {
    json rec;
    rec["dataset"] = m.dataset;
    rec["class"] = m.class_label;
    rec["status"] = status_name(m.status);
    json cands = json::array();
    for (const auto& c : m.candidates) {
      cands.push_back(json{{"node", c.node_id}, {"sim", c.similarity}});
    }
    rec["candidates"] = cands;
    json verdicts = json::array();
    for (const auto& v : m.verdicts) {
      verdicts.push_back(json{{"annotator", v.annotator},
                              {"node", v.node_id},
                              {"verdict", v.verdict == Verdict::Accept ? "accept" : "reject"}});
    }
    rec["verdicts"] = verdicts;
    rec["accepted_nodes"] = m.accepted_nodes;
    out += rec.dump();
    out += '\n';
  }
  return out;
}

std::vector<ClassNodeMapping> mappings_from_jsonl(const std::string& text) {
  std::vector<ClassNodeMapping> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IoError("mapping line " + std::to_string(line_no) + ": " + e.what());
    }
    ClassNodeMapping m;
    try {
      m.dataset = rec.value("dataset", "");
      m.class_label = rec.value("class", "");
      if (m.dataset.empty() || m.class_label.empty()) {
        throw IoError("mapping line " + std::to_string(line_no) + ": missing dataset or class");
      }
      m.status = status_from_name(rec.value("status", "suggested"));
      for (const auto& c : rec.value("candidates", json::array())) {
        m.candidates.push_back({c.at("node").get<std::string>(), c.value("sim", 0.0)});
      }
      for (const auto& v : rec.value("verdicts", json::array())) {
        const std::string verdict = v.at("verdict").get<std::string>();
        if (verdict != "accept" && verdict != "reject") {
          throw IoError("mapping line " + std::to_string(line_no) + ": bad verdict '" + verdict +
                        "'");
        }
        m.verdicts.push_back({v.value("annotator", ""), v.at("node").get<std::string>(),
                              verdict == "accept" ? Verdict::Accept : Verdict::Reject});
      }
      for (const auto& id : rec.value("accepted_nodes", json::array())) {
        m.accepted_nodes.push_back(id.get<std::string>());
      }
    } catch (const json::exception& e) {
      throw IoError("mapping line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

std::vector<ManifestSample> manifest_from_jsonl(const std::string& text) {
  std::vector<ManifestSample> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedManifest("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    ManifestSample s;
    try {
      s.sample_id = rec.at("sample_id").get<std::string>();
      s.dataset = rec.at("dataset").get<std::string>();
      s.modality = modality_from_name(rec.at("modality").get<std::string>());
      for (const auto& c : rec.value("classes", json::array())) {
        s.classes.insert(c.get<std::string>());
      }
      if (rec.contains("duration")) s.duration_seconds = rec["duration"].get<double>();
      if (rec.contains("instances")) {
        std::vector<std::set<std::string>> instances;
        for (const auto& inst : rec["instances"]) {
          std::set<std::string> labels;
          for (const auto& c : inst) labels.insert(c.get<std::string>());
          instances.push_back(std::move(labels));
        }
        s.instances = std::move(instances);
      }
    } catch (const json::exception& e) {
      throw MalformedManifest("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

static constexpr char kCheckpointMagic[4] = {'V', 'S', 'C', 'P'};

std::string checkpoint_to_bytes(const Checkpoint& ckpt) {
  std::string out;
  out.append(kCheckpointMagic, 4);
  put_u32(out, ckpt.version);
  put_u64(out, ckpt.taxonomy_fingerprint);
  put_str(out, ckpt.config_echo);

  const HyperParams& h = ckpt.hyper;
  put_f64(out, h.c);
  put_f64(out, h.K);
  put_f64(out, h.gamma);
  put_f64(out, h.omega);
  put_f64(out, h.lr);
  put_u32(out, static_cast<std::uint32_t>(h.warmup_epochs));
  put_u32(out, static_cast<std::uint32_t>(h.epochs_phase1));
  put_u32(out, static_cast<std::uint32_t>(h.epochs_phase2));
  put_u32(out, static_cast<std::uint32_t>(h.batch_size));
  put_u32(out, static_cast<std::uint32_t>(h.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(h.head_hidden));
  out.push_back(h.disentangle ? 1 : 0);
  out.push_back(h.hard_pseudo ? 1 : 0);
  put_f64(out, h.hard_pseudo_threshold);
  put_u64(out, h.seed);

  const ModelParams& p = ckpt.params;
  put_u32(out, static_cast<std::uint32_t>(p.num_nodes));
  put_u32(out, static_cast<std::uint32_t>(p.feat_dim));
  put_u32(out, static_cast<std::uint32_t>(p.embed_dim));
  put_u32(out, static_cast<std::uint32_t>(p.text_dim));
  put_u32(out, static_cast<std::uint32_t>(p.hidden));
  out.push_back(p.disentangle ? 1 : 0);
  put_f64(out, p.rho_img);
  put_f64(out, p.rho_txt);
  put_mat(out, p.head_w);
  put_vec(out, p.head_b);
  put_mat(out, p.head_w2);
  put_vec(out, p.head_b2);
  put_mat(out, p.proj);
  return out;
}

Checkpoint checkpoint_from_bytes(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw IoError("checkpoint has bad magic");
  }
  Cursor c{bytes, 4};
  Checkpoint ckpt;
  ckpt.version = c.u32();
  if (ckpt.version != 1) throw IoError("checkpoint has unsupported version");
  ckpt.taxonomy_fingerprint = c.u64();
  ckpt.config_echo = c.str();

  HyperParams& h = ckpt.hyper;
  h.c = c.f64();
  h.K = c.f64();
  h.gamma = c.f64();
  h.omega = c.f64();
  h.lr = c.f64();
  h.warmup_epochs = static_cast<int>(c.u32());
  h.epochs_phase1 = static_cast<int>(c.u32());
  h.epochs_phase2 = static_cast<int>(c.u32());
  h.batch_size = static_cast<int>(c.u32());
  h.embed_dim = static_cast<int>(c.u32());
  h.head_hidden = static_cast<int>(c.u32());
  c.need(2);
  h.disentangle = bytes[c.at++] != 0;
  h.hard_pseudo = bytes[c.at++] != 0;
  h.hard_pseudo_threshold = c.f64();
  h.seed = c.u64();

  ModelParams& p = ckpt.params;
  p.num_nodes = static_cast<int>(c.u32());
  p.feat_dim = static_cast<int>(c.u32());
  p.embed_dim = static_cast<int>(c.u32());
  p.text_dim = static_cast<int>(c.u32());
  p.hidden = static_cast<int>(c.u32());
  c.need(1);
  p.disentangle = bytes[c.at++] != 0;
  p.rho_img = c.f64();
  p.rho_txt = c.f64();
  p.head_w = get_mat(c);
  p.head_b = get_vec(c);
  p.head_w2 = get_mat(c);
  p.head_b2 = get_vec(c);
  p.proj = get_mat(c);
  if (c.at != bytes.size()) throw IoError("checkpoint has trailing bytes");
  return ckpt;
}

void write_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  atomic_write(path, checkpoint_to_bytes(ckpt));
}

Checkpoint read_checkpoint(const std::string& path) {
  return checkpoint_from_bytes(read_file(path));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

std::string report_to_json(const EvalReport& report) {
  json j;
  j["map_full"] = report.map_full;
  j["map_rare"] = report.map_rare;
  j["map_nonrare"] = report.map_nonrare;
  json per_node = json::object();
  for (const auto& [id, ap] : report.per_node_ap) per_node[id] = ap;
  j["per_node"] = per_node;
  j["skipped_nodes"] = report.skipped_nodes;
  return j.dump(2) + "\n";
}

}  // namespace verbspace
