#pragma once

#include "dve/gmm.hpp"
#include "dve/numerics.hpp"

namespace dve {

/// Conditional velocity field v(z, t, c). Implementations are immutable and
/// safe for concurrent evaluation; they must support the "null" condition.
class VelocityField {
  public:
    virtual ~VelocityField() = default;
    virtual int dim() const = 0;
    virtual Vec velocity(const Vec& z, double t, const ConceptId& c) const = 0;
};

/// Oracle field backed by the closed-form mixture conditional expectation.
class AnalyticField : public VelocityField {
  public:
    explicit AnalyticField(ConceptWorld world) : world_(std::move(world)) { world_.validate(); }

    int dim() const override { return world_.dim; }
    Vec velocity(const Vec& z, double t, const ConceptId& c) const override {
        return analytic_velocity(world_, z, t, c);
    }
    const ConceptWorld& world() const { return world_; }

  private:
    ConceptWorld world_;
};

}  // namespace dve
