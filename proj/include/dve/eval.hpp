#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dve/field.hpp"
#include "dve/gmm.hpp"
#include "dve/numerics.hpp"
#include "dve/sampler.hpp"

namespace dve {

struct ErasureReport {
    std::map<ConceptId, double> ua;   // per erased prompt: fraction still classified as itself
    std::map<ConceptId, double> ira;  // per retained prompt: fraction classified as itself
    double ua_mean = 0.0;
    double ira_mean = 0.0;
    std::map<ConceptId, double> activation_rate;  // applied / attempted, per prompt
    int n_per_prompt = 0;
    std::string mode;
    uint64_t seed = 0;
};

/// Generates n_per_prompt samples per prompt under cfg and classifies each
/// with the exact Bayes classifier over all world concepts. Prompt lists must
/// be nonempty and disjoint.
ErasureReport ua_ira(const ConceptWorld& world, const VelocityField& field,
                     const SampleConfig& cfg, const std::vector<ConceptId>& erased_prompts,
                     const std::vector<ConceptId>& retained_prompts, int n_per_prompt,
                     uint64_t seed);

struct CaseStats {
    std::vector<double> mean_score_per_step;  // index 0 is step n = T
    std::vector<int> scored_counts;           // events with a valid score per step
    double activation_rate = 0.0;
    int runs = 0;
};

/// Aggregates correction events over repeated runs with one prompt.
CaseStats case_statistics(const VelocityField& field, const ConceptId& prompt,
                          const SampleConfig& cfg, int runs, uint64_t seed);

struct TrajectoryStudyRow {
    std::string run_label;
    int step = 0;
    double pc1 = 0.0, pc2 = 0.0;
    bool has_delta = false;
    double dpc1 = 0.0, dpc2 = 0.0;  // projected correction, rows with an applied event only
};

struct TrajectoryStudy {
    std::vector<std::string> labels;  // era-plain, era-dve, anc-plain, anc-dve
    std::vector<Trajectory> trajectories;
    Pca2 basis;  // fitted on the union of all recorded states
    std::vector<TrajectoryStudyRow> rows;
    std::map<std::string, Vec> endpoints;
};

/// Four shared-noise runs ({erasure, anchor} prompts x {plain, dve}) with a
/// top-2 PCA projection of every visited state and applied correction.
TrajectoryStudy trajectory_study(const VelocityField& field, const ErasureSpec& spec,
                                 const SampleConfig& base_cfg, uint64_t seed);

struct SubspaceDiagnostic {
    int rank = 0;                    // singular values above 1e-6 * sigma_max
    Vec singular_values;             // descending
    double energy_fraction = 0.0;    // ||P_C delta||^2 / ||delta||^2
    double nullspace_drive = 0.0;    // ||P_N delta|| / ||delta||
    double max_probe_residual = 0.0; // max over probes of ||P_N J e|| / max(1, ||J e||)
    bool delta_degenerate = false;
    bool jacobian_degenerate = false;
};

/// Range/nullspace split of the analytic-field Jacobian at (z, t, c) and the
/// placement of delta_v relative to it. Also exercises P_N[J e] = 0 on 10
/// deterministic random probes.
SubspaceDiagnostic subspace_diagnostic(const ConceptWorld& world, const Vec& z, double t,
                                       const ConceptId& c, const Vec& delta_v);

}  // namespace dve
