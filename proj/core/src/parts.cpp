#include "canonmap/parts.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <string>

#include "canonmap/error.hpp"

namespace canonmap {

PartDefinition grow_part(const CanonicalMesh& mesh, const EdgeGraph& graph, int seed, double threshold,
                         std::string name) {
  const std::size_t m = mesh.vertex_count();
  if (seed < 0 || static_cast<std::size_t>(seed) >= m)
    throw Error(ErrorCode::InvalidSeed, "seed " + std::to_string(seed) + " outside [0, " + std::to_string(m) + ")");
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw Error(ErrorCode::InvalidSeed, "threshold must be a finite value >= 0");
  const auto dist = geodesic_from_seed(graph, seed);
  PartDefinition part;
  part.name = std::move(name);
  part.seed = seed;
  part.threshold = threshold;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < m; ++i) {
    if (dist[i] <= threshold) {
      part.members.push_back(static_cast<int>(i));
      sum += mesh.vertices[i];
    }
  }
  part.centroid = sum / static_cast<double>(part.members.size());
  return part;
}

RigidPose part_frame(const PartDefinition& part) { return RigidPose::translation_only(part.centroid); }

nlohmann::json parts_to_json(const PartsFile& file) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : file.parts) {
    nlohmann::json entry = {
        {"name", p.name}, {"seed", p.seed}, {"threshold_m", p.threshold}, {"members", p.members}};
    if (!p.meta.is_null()) entry["meta"] = p.meta;
    parts.push_back(std::move(entry));
  }
  return {{"mesh_checksum", file.mesh_checksum}, {"parts", std::move(parts)}};
}

LoadedParts parts_from_json(const nlohmann::json& doc, const CanonicalMesh& mesh, const EdgeGraph& graph) {
  LoadedParts out;
  try {
    out.file.mesh_checksum = doc.at("mesh_checksum").get<std::string>();
    const std::string expected = checksum_hex(mesh_checksum(mesh));
    if (out.file.mesh_checksum != expected)
      throw Error(ErrorCode::StaleDefinition, "parts were authored for mesh " + out.file.mesh_checksum +
                                                  ", loaded mesh is " + expected);
    std::set<std::string> names;
    for (const auto& entry : doc.at("parts")) {
      const auto name = entry.at("name").get<std::string>();
      if (!names.insert(name).second) throw Error(ErrorCode::SchemaError, "duplicate part name '" + name + "'");
      const int seed = entry.at("seed").get<int>();
      if (seed < 0 || static_cast<std::size_t>(seed) >= mesh.vertex_count())
        throw Error(ErrorCode::StaleDefinition, "part '" + name + "' seed " + std::to_string(seed) +
                                                    " does not exist on the loaded mesh");
      PartDefinition part = grow_part(mesh, graph, seed, entry.at("threshold_m").get<double>(), name);
      if (entry.contains("meta")) part.meta = entry.at("meta");
      const auto cached = entry.value("members", std::vector<int>{});
      if (cached != part.members) out.members_rewritten = true;
      out.file.parts.push_back(std::move(part));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("parts document: ") + e.what());
  }
  return out;
}

LoadedParts load_parts(const std::filesystem::path& path, const CanonicalMesh& mesh, const EdgeGraph& graph) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open parts file '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "parts file '" + path.string() + "': " + e.what());
  }
  return parts_from_json(doc, mesh, graph);
}

void save_parts(const std::filesystem::path& path, const PartsFile& file) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp.string() + "'");
    out << parts_to_json(file).dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace '" + path.string() + "': " + ec.message());
}

PartRegistry::PartRegistry(std::vector<PartDefinition> parts) {
  for (auto& p : parts) parts_.insert_or_assign(p.name, std::move(p));
}

bool PartRegistry::add(PartDefinition part) {
  std::unique_lock lock(mutex_);
  return parts_.try_emplace(part.name, std::move(part)).second;
}

void PartRegistry::put(PartDefinition part) {
  std::unique_lock lock(mutex_);
  parts_.insert_or_assign(part.name, std::move(part));
}

bool PartRegistry::remove(const std::string& name) {
  std::unique_lock lock(mutex_);
  return parts_.erase(name) > 0;
}

std::optional<PartDefinition> PartRegistry::find(const std::string& name) const {
  std::shared_lock lock(mutex_);
  if (auto it = parts_.find(name); it != parts_.end()) return it->second;
  return std::nullopt;
}

std::vector<PartDefinition> PartRegistry::snapshot() const {
  std::shared_lock lock(mutex_);
  std::vector<PartDefinition> out;
  out.reserve(parts_.size());
  for (const auto& [_, p] : parts_) out.push_back(p);
  return out;
}

std::size_t PartRegistry::size() const {
  std::shared_lock lock(mutex_);
  return parts_.size();
}

}  // namespace canonmap
