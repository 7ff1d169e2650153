#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "canonmap/annotations.hpp"
#include "canonmap/grasp.hpp"
#include "canonmap/observation.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/rigid_pose.hpp"
#include "canonmap/spectral.hpp"
#include "canonmap/synth.hpp"

// JSON codecs for every on-disk and on-wire format. Readers throw SchemaError
// on shape problems and let domain validation report the rest.
namespace canonmap::io {

using nlohmann::json;

json matrix4_to_json(const Eigen::Matrix4d& m);  // 4x4 nested, row-major
Eigen::Matrix4d matrix4_from_json(const json& j);
json pose_to_json(const RigidPose& pose);
RigidPose pose_from_json(const json& j);

json intrinsics_to_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from_json(const json& j);

/// {"dims": [rows, cols], "data": [row-major values]}
json matrix_to_json(const EmbeddingMatrix& m);
EmbeddingMatrix matrix_from_json(const json& j);

/// {"provenance", "dims", "data"}
json embedding_table_to_json(const VertexEmbeddingTable& t);
VertexEmbeddingTable embedding_table_from_json(const json& j);

json observation_to_json(const Observation& obs);
Observation observation_from_json(const json& j);

json pose_result_to_json(const PoseResult& result);
json grasp_to_json(const GraspPose& grasp);

json scenario_to_json(const ScenarioConfig& cfg);
/// Missing fields take default_scenario() values; "object_pose_world" is
/// accepted in place of "object_pose" when extrinsics are given.
ScenarioConfig scenario_from_json(const json& j);

json truth_to_json(const SyntheticObservation& synth);

json annotations_to_json(const Annotations& a);
Annotations annotations_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with two-space indent and a trailing newline; writes via a
/// temporary file and rename.
void write_json_file(const std::filesystem::path& path, const json& doc);

}  // namespace canonmap::io
