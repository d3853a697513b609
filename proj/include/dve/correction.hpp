#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dve/field.hpp"
#include "dve/gmm.hpp"
#include "dve/numerics.hpp"

namespace dve {

/// One (erasure concept, anchor concept, gamma, tau, n_star) tuple.
struct ErasureSpec {
    ConceptId erasure;
    ConceptId anchor;
    double gamma = 1.0;  // > 0, erasure strength
    double tau = 0.0;    // <= 0, activation threshold on the projection score
    int n_star = 0;      // steps with n <= n_star never correct

    /// Hard error on invariant violations; total_steps bounds n_star when >= 0.
    void validate(int total_steps = -1) const;
};

/// Outcome of one correction attempt at one step for one spec.
struct CorrectionEvent {
    int step = 0;  // n, filled by the sampler
    double t = 0.0;
    int spec_index = 0;
    double score = 0.0;     // projection score s; meaningless when degenerate
    bool has_score = false;
    bool degenerate = false;  // ||delta_v|| below threshold, correction skipped
    bool applied = false;
    double magnitude = 0.0;  // gamma * (tau - s) when applied selectively
};

/// ||delta_v|| <= 1e-9 * sqrt(d) counts as degenerate (nothing to erase).
double degenerate_delta_threshold(size_t dim);

/// delta_v = v_anc - v_era; the concept-specific direction from erasure toward anchor.
Vec differential_vector(const Vec& v_anc, const Vec& v_era);

/// s = <v_user, delta_v> / ||delta_v||; nullopt when delta_v is degenerate.
std::optional<double> projection_score(const Vec& v_user, const Vec& delta_v);

/// Adds gamma * (tau - s) * delta_v / ||delta_v|| only when s < tau; otherwise
/// returns v_user bitwise unchanged. Post-correction score is (1-gamma) s + gamma tau.
std::pair<Vec, CorrectionEvent> selective_correct(const Vec& v_user, const Vec& delta_v,
                                                  double gamma, double tau);

/// Unconditional v_user + gamma * delta_v (the no-selection ablation).
Vec naive_correct(const Vec& v_user, const Vec& delta_v, double gamma);

/// Aggregated multi-concept correction: every score is computed against the
/// original v_user, so the result is order-invariant. Degenerate deltas skip.
std::pair<Vec, std::vector<CorrectionEvent>> multi_correct(
    const Vec& v_user, const std::vector<std::pair<Vec, ErasureSpec>>& deltas);

/// multi_correct with the step-cutoff gate: spec i contributes only when
/// step_n > spec.n_star (in addition to s < tau).
std::pair<Vec, std::vector<CorrectionEvent>> multi_correct_gated(
    const Vec& v_user, const std::vector<std::pair<Vec, ErasureSpec>>& deltas, int step_n);

/// true iff n > n_star and s < tau.
bool step_gate(int n, int n_star, double s, double tau);

/// Per-timestep averaged differential vectors from M prior runs.
struct DeltaTable {
    int steps = 0;
    int dim = 0;
    std::vector<Vec> vectors;  // vectors[n-1] is the mean delta at step n
    struct Provenance {
        int m = 0;
        uint64_t seed = 0;
        std::vector<ConceptId> prompts;
    } provenance;

    void validate() const;
};

/// Runs M full DVE generations (prompt j = prompts[j % prompts.size()],
/// per-run streams derived from rng) and averages the live per-step deltas.
DeltaTable build_delta_table(const VelocityField& field, const ErasureSpec& spec,
                             const std::vector<ConceptId>& prompts, int m, int steps,
                             double guidance, const RngStream& rng);

}  // namespace dve
