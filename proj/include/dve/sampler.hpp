#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dve/correction.hpp"
#include "dve/field.hpp"
#include "dve/numerics.hpp"

namespace dve {

enum class SampleMode { kPlain, kDve, kDveNaive, kDvePreprocessed };

SampleMode parse_sample_mode(const std::string& name);  // "plain" | "dve" | "dve-naive" | "dve-preprocessed"
std::string sample_mode_name(SampleMode mode);

struct SampleConfig {
    int steps = 64;          // T
    double guidance = 1.0;   // classifier-free guidance scale
    SampleMode mode = SampleMode::kPlain;
    std::vector<ErasureSpec> specs;
    std::optional<DeltaTable> delta_table;  // required by dve-preprocessed
    bool record_trajectory = false;
    bool record_deltas = false;   // keep per-step deltas on the trajectory (table building)
    bool guided_deltas = false;   // compute deltas from guided instead of raw conditionals

    /// ConfigError on violations; field_dim checks the preprocessed table shape.
    void validate(int field_dim) const;
};

struct TrajectoryStep {
    int step = 0;    // n
    double t = 0.0;  // t_n = n / T
    Vec z;           // state before the Euler update
    Vec v_user;
    Vec v_corr;
    std::vector<CorrectionEvent> events;  // one per spec
    double correction_norm = 0.0;         // norm of the correction added to v_user
    int phase = 1;                        // editing trajectories mark phase 2 rows
    std::vector<Vec> deltas;              // only when record_deltas
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;  // in execution order n = T .. 1
    Vec terminal;                       // z_0
    ConceptId prompt;
    int total_steps = 0;
};

struct GenResult {
    Vec sample;
    Trajectory trajectory;  // populated only when record_trajectory
    int events_applied = 0;
    int events_total = 0;  // correction attempts (steps x specs) in dve modes
};

/// One explicit Euler update toward data: z + (t_n - t_prev) * v for a field
/// that points from noise to data. Requires t_prev < t_n.
Vec euler_step(const Vec& z, double t_n, double t_prev, const Vec& v);

/// v(z,t,null) + s_g * (v(z,t,c) - v(z,t,null)). s_g = 1 returns the
/// conditional field exactly (single evaluation), s_g = 0 the unconditional.
Vec guided_velocity(const VelocityField& field, const Vec& z, double t, const ConceptId& c,
                    double s_g);

/// Full generation: z_1 ~ N(0, I) from rng, then T corrected Euler steps down to t = 0.
GenResult generate(const VelocityField& field, const ConceptId& c_user, const SampleConfig& cfg,
                   RngStream& rng);

/// Same, from a caller-supplied initial noise (shared-noise studies).
GenResult generate_from(const VelocityField& field, const ConceptId& c_user,
                        const SampleConfig& cfg, Vec z1);

/// Stream for sample j of a named prompt; batch determinism contract.
RngStream sample_stream(uint64_t master_seed, const ConceptId& prompt, int occurrence,
                        int sample_index);

/// count samples per prompt, each on its own derived stream; the output
/// multiset is independent of prompt order and scheduling.
std::vector<std::pair<ConceptId, Vec>> batch_generate(const VelocityField& field,
                                                      const std::vector<ConceptId>& prompts,
                                                      int count, const SampleConfig& cfg,
                                                      uint64_t master_seed);

}  // namespace dve
