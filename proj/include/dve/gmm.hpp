#pragma once

#include <map>
#include <string>
#include <vector>

#include "dve/numerics.hpp"

namespace dve {

/// Concept token. The reserved name "null" denotes the unconditional signal.
using ConceptId = std::string;
inline const ConceptId kNullConcept = "null";

struct GaussianComponent {
    Vec mean;
    Vec diag_cov;  // entries > 0
    double weight = 0.0;
    std::vector<ConceptId> tags;
};

/// Concept-labeled Gaussian mixture; doubles as the ground-truth oracle.
/// Immutable after validate(); all operations on it are pure.
struct ConceptWorld {
    int dim = 0;
    std::vector<GaussianComponent> components;
    std::vector<ConceptId> concepts;

    /// Checks weights sum to 1 (1e-12), every concept tags a component,
    /// dimensions agree and covariances are positive. Hard error otherwise.
    void validate() const;

    bool has_concept(const ConceptId& c) const;

    /// Indices of components tagged c ("null" selects all). Unknown concept is an error.
    std::vector<int> tagged(const ConceptId& c) const;
};

struct ScenarioDefaults {
    double gamma = 1.0;
    double tau = 0.0;
    int n_star = 0;
    int steps = 64;
    double guidance = 1.0;
};

/// A world plus named prompt bindings (user/erasure/anchor/source/target)
/// and default hyperparameters.
struct ScenarioSpec {
    ConceptWorld world;
    std::map<std::string, ConceptId> bindings;
    ScenarioDefaults defaults;

    void validate() const;
};

/// Draw x0 from the c-conditional mixture (weights renormalized; full mixture for "null").
Vec sample_data(const ConceptWorld& world, const ConceptId& c, RngStream& rng);

struct Classification {
    ConceptId label;
    Vec posterior;  // aligned with the candidate list, sums to 1
};

/// Exact Bayes classifier over concept-conditional mixtures with a uniform
/// prior over the candidates. Ties break toward the earlier candidate.
Classification bayes_classify(const ConceptWorld& world, const Vec& x,
                              const std::vector<ConceptId>& candidates);

/// Closed-form conditional velocity E[x0 - x1 | z_t = z, c] for the linear
/// interpolation path z_t = (1-t) x0 + t x1 with x1 ~ N(0, I).
/// t outside [0,1] is an error; inside, t is clamped to [1e-4, 1] so the
/// data-endpoint singularity is never evaluated.
Vec analytic_velocity(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c);

/// Central finite-difference Jacobian of analytic_velocity in z,
/// step 1e-5 * max(1, ||z||). Requires t in (0, 1].
Mat velocity_jacobian(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c);

/// Per-component responsibilities r_k(z, t) for the c-conditional mixture,
/// log-space stabilized; sums to 1. Indices align with world.tagged(c).
Vec responsibilities(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c);

}  // namespace dve
