#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "canonmap/mesh.hpp"
#include "canonmap/parts.hpp"
#include "canonmap/pose_solver.hpp"
#include "canonmap/spectral.hpp"
#include "canonmap/synth.hpp"

namespace canonmap {

/// Per-trial perturbation of the base object pose, applied in the world
/// frame (or the camera frame when the base scenario has no extrinsics).
struct PoseSampling {
  double yaw_range_rad = 2.0 * 3.14159265358979323846;
  double max_tilt_rad = 0.15;
  double xy_radius_m = 0.05;
};

struct EvaluationConfig {
  ScenarioConfig base = default_scenario();
  PoseSampling sampling;
  int trials = 25;
  std::uint64_t master_seed = 1;
  double rot_thresh_rad = 5.0 * 3.14159265358979323846 / 180.0;
  double trans_thresh_m = 0.01;
  PoseConfig pose;
  // When set, embedding noise = this factor * median vertex-embedding NN distance.
  std::optional<double> embedding_noise_rel;
};

/// Reads {"scenario", "sampling", "trials", "seed", "rot_thresh_deg",
/// "trans_thresh_m", "embedding_noise_rel", "pose": {"k", "theta0", "theta1",
/// "depth_mode", "min_part_pixels", "robust"}}; every key is optional.
EvaluationConfig evaluation_config_from_json(const nlohmann::json& j);
nlohmann::json evaluation_config_to_json(const EvaluationConfig& cfg);

/// Scenario of trial `index`; depends only on (cfg, nn_median, index).
ScenarioConfig sample_scenario(const EvaluationConfig& cfg, double nn_median, int index);

struct PartErrorRow {
  std::string name;
  std::string mode;
  int pixels = 0;
  double rotation_rad = 0.0;
  double translation_m = 0.0;
};

struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;  // error code name when !ok
  double rotation_rad = 0.0;
  double translation_m = 0.0;
  double residual_rms = 0.0;
  int pixels = 0;
  int kept_pixels = 0;
  int inliers = 0;
  std::vector<PartErrorRow> parts;
  double elapsed_ms = 0.0;  // JSON report only
};

struct ErrorStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
};

struct EvaluationSummary {
  int trials = 0;
  int failures = 0;
  int successes = 0;
  double success_rate = 0.0;
  ErrorStats rotation_rad;
  ErrorStats translation_m;
};

struct EvaluationReport {
  std::vector<TrialRow> rows;
  EvaluationSummary summary;
  double rot_thresh_rad = 0.0;
  double trans_thresh_m = 0.0;
};

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values; 0 when empty.
double percentile(std::vector<double> values, double q);

/// Aggregates over rows. A trial succeeds when it ran and both errors are
/// strictly below the thresholds; failed rows count against the rate and are
/// left out of the error statistics.
EvaluationSummary summarize(std::span<const TrialRow> rows, double rot_thresh_rad, double trans_thresh_m);

/// Runs every trial (in parallel; rows ordered by trial). Solver errors
/// become failure rows instead of aborting the batch.
EvaluationReport run_evaluation(const CanonicalMesh& mesh, const VertexEmbeddingTable& table, double nn_median,
                                std::span<const PartDefinition> parts, const EvaluationConfig& cfg);

/// Versioned CSV without timing, so identical seeds give identical bytes.
std::string report_csv(const EvaluationReport& report);
nlohmann::json report_json(const EvaluationReport& report);

inline constexpr const char* kReportCsvVersion = "canonmap-eval-csv/1";

}  // namespace canonmap
