#pragma once

#include <vector>

#include "dve/correction.hpp"
#include "dve/field.hpp"
#include "dve/sampler.hpp"

namespace dve {

/// Inversion-free editing run: two-phase trajectory with the corrected target
/// velocity, active over steps (n_min, n_max].
struct EditConfig {
    Vec x_src;  // source point (latents are data space; decode is the identity)
    ConceptId c_src;
    ConceptId c_tar;
    std::vector<ErasureSpec> specs;
    int n_min = 0;
    int n_max = 0;
    int steps = 64;  // T
    double guidance = 1.0;
    bool guided_deltas = false;
    bool record_trajectory = false;

    void validate(int field_dim) const;  // 0 <= n_min <= n_max <= T
};

/// v_edit = v_tar_corr - v_src.
Vec edit_velocity(const Vec& v_tar_corr, const Vec& v_src);

/// Phase 1 walks the edit trajectory from n_max down to n_min+1 with fresh
/// per-step noise; when n_min > 0, phase 2 re-noises and finishes with
/// DVE-corrected generation on the target trajectory.
GenResult edit(const VelocityField& field, const EditConfig& cfg, const RngStream& rng);

}  // namespace dve
