#pragma once

#include <map>
#include <string>
#include <vector>

#include "dve/correction.hpp"
#include "dve/eval.hpp"
#include "dve/gmm.hpp"
#include "dve/mlp.hpp"
#include "dve/sampler.hpp"

namespace dve {

/// Shortest round-trip decimal for a double (used in every text artifact).
std::string format_double(double v);

std::string read_file(const std::string& path);           // ConfigError when unreadable
void write_file(const std::string& path, const std::string& content);
std::string file_hash_hex(const std::string& path);       // fnv1a64 of the bytes

// --- scenario-v1 ---------------------------------------------------------
// {format, dim, components:[{mean, diag_cov, weight, tags}], concepts,
//  bindings:{user|erasure|anchor|source|target}, defaults:{gamma, tau,
//  n_star, steps, guidance}}. Unknown fields are rejected.
std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);

// --- mlpfield-v1 ---------------------------------------------------------
std::string checkpoint_to_json(const MlpField& field, const TrainConfig& cfg);
struct Checkpoint {
    MlpField field;
    TrainConfig config;
};
Checkpoint checkpoint_from_json(const std::string& text);

// --- deltatable-v1 -------------------------------------------------------
std::string delta_table_to_json(const DeltaTable& table);
DeltaTable delta_table_from_json(const std::string& text);

// --- erasure-report-v1 / subspace-diagnostic-v1 --------------------------
std::string report_to_json(const ErasureReport& report);
std::string diagnostic_to_json(const SubspaceDiagnostic& diag);

// --- trajectory CSV ------------------------------------------------------
// Header: run_id,step,t,z_0..z_{d-1},score_min,applied,corr_norm
// (plus a trailing `phase` column when with_phase). One row per step and a
// terminal row with step = 0.
std::string trajectory_to_csv(const std::string& run_id, const Trajectory& trajectory,
                              bool with_phase = false);

// Samples CSV: prompt,index,z_0..z_{d-1}
std::string samples_to_csv(const std::vector<std::pair<ConceptId, Vec>>& samples);

// pca.csv: run_label,step,pc1,pc2,dpc1,dpc2 (d-columns empty when inactive)
std::string study_to_pca_csv(const TrajectoryStudy& study);

// --- manifest-v1 ---------------------------------------------------------
struct RunManifest {
    std::string command;
    std::map<std::string, std::string> resolved_config;  // every default expanded
    std::map<std::string, std::string> input_hashes;     // path -> hash
    uint64_t seed = 0;
    std::string version;
    std::vector<std::string> outputs;
};
std::string manifest_to_json(const RunManifest& m);

}  // namespace dve
