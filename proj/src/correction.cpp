#include "dve/correction.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dve/sampler.hpp"

namespace dve {

void ErasureSpec::validate(int total_steps) const {
    if (erasure.empty() || anchor.empty())
        throw std::invalid_argument("ErasureSpec: empty concept name");
    if (!(gamma > 0.0)) throw std::invalid_argument("ErasureSpec: gamma must be > 0");
    if (tau > 0.0) throw std::invalid_argument("ErasureSpec: tau must be <= 0");
    if (n_star < 0) throw std::invalid_argument("ErasureSpec: n_star must be >= 0");
    if (total_steps >= 0 && n_star >= total_steps)
        throw std::invalid_argument("ErasureSpec: n_star must be < total steps");
}

double degenerate_delta_threshold(size_t dim) {
    return 1e-9 * std::sqrt(static_cast<double>(dim));
}

Vec differential_vector(const Vec& v_anc, const Vec& v_era) {
    return v_anc - v_era;
}

std::optional<double> projection_score(const Vec& v_user, const Vec& delta_v) {
    double dn = norm(delta_v);
    if (dn <= degenerate_delta_threshold(delta_v.size())) return std::nullopt;
    return dot(v_user, delta_v) / dn;
}

bool step_gate(int n, int n_star, double s, double tau) {
    return n > n_star && s < tau;
}

std::pair<Vec, CorrectionEvent> selective_correct(const Vec& v_user, const Vec& delta_v,
                                                  double gamma, double tau) {
    ErasureSpec spec;
    spec.erasure = "-";
    spec.anchor = "-";
    spec.gamma = gamma;
    spec.tau = tau;
    spec.n_star = 0;
    auto [v, events] = multi_correct(v_user, {{delta_v, spec}});
    return {std::move(v), events[0]};
}

Vec naive_correct(const Vec& v_user, const Vec& delta_v, double gamma) {
    if (v_user.size() != delta_v.size())
        throw std::invalid_argument("naive_correct: dimension mismatch");
    Vec v = v_user;
    axpy(gamma, delta_v, v);
    return v;
}

std::pair<Vec, std::vector<CorrectionEvent>> multi_correct(
    const Vec& v_user, const std::vector<std::pair<Vec, ErasureSpec>>& deltas) {
    return multi_correct_gated(v_user, deltas, std::numeric_limits<int>::max());
}

std::pair<Vec, std::vector<CorrectionEvent>> multi_correct_gated(
    const Vec& v_user, const std::vector<std::pair<Vec, ErasureSpec>>& deltas, int step_n) {
    std::vector<CorrectionEvent> events(deltas.size());
    bool any_active = false;
    for (size_t i = 0; i < deltas.size(); ++i) {
        const auto& [delta, spec] = deltas[i];
        if (delta.size() != v_user.size())
            throw std::invalid_argument("multi_correct: delta dimension mismatch at index " +
                                        std::to_string(i));
        CorrectionEvent& ev = events[i];
        ev.spec_index = static_cast<int>(i);
        std::optional<double> s = projection_score(v_user, delta);
        if (!s) {
            ev.degenerate = true;
            continue;
        }
        ev.score = *s;
        ev.has_score = true;
        if (step_gate(step_n, spec.n_star, *s, spec.tau)) {
            ev.applied = true;
            ev.magnitude = spec.gamma * (spec.tau - *s);
            any_active = true;
        }
    }
    // Inactive across the board: the identity on v_user, bitwise.
    if (!any_active) return {v_user, std::move(events)};

    Vec v = v_user;
    for (size_t i = 0; i < deltas.size(); ++i) {
        if (!events[i].applied) continue;
        const Vec& delta = deltas[i].first;
        axpy(events[i].magnitude / norm(delta), delta, v);
    }
    return {std::move(v), std::move(events)};
}

void DeltaTable::validate() const {
    if (steps < 1) throw std::invalid_argument("DeltaTable: steps must be >= 1");
    if (dim < 1) throw std::invalid_argument("DeltaTable: dim must be >= 1");
    if (static_cast<int>(vectors.size()) != steps)
        throw std::invalid_argument("DeltaTable: expected one vector per timestep");
    for (const Vec& v : vectors) {
        if (static_cast<int>(v.size()) != dim)
            throw std::invalid_argument("DeltaTable: vector dimension mismatch");
        if (!all_finite(v)) throw std::invalid_argument("DeltaTable: non-finite entry");
    }
    if (provenance.m < 1) throw std::invalid_argument("DeltaTable: provenance M must be >= 1");
}

DeltaTable build_delta_table(const VelocityField& field, const ErasureSpec& spec,
                             const std::vector<ConceptId>& prompts, int m, int steps,
                             double guidance, const RngStream& rng) {
    if (m < 1) throw std::invalid_argument("build_delta_table: M must be >= 1");
    if (prompts.empty()) throw std::invalid_argument("build_delta_table: no prompts");
    spec.validate(steps);

    SampleConfig cfg;
    cfg.steps = steps;
    cfg.guidance = guidance;
    cfg.mode = SampleMode::kDve;
    cfg.specs = {spec};
    cfg.record_trajectory = true;
    cfg.record_deltas = true;

    DeltaTable table;
    table.steps = steps;
    table.dim = field.dim();
    table.vectors.assign(steps, Vec(field.dim(), 0.0));
    table.provenance.m = m;
    table.provenance.seed = rng.seed();
    table.provenance.prompts = prompts;

    for (int j = 0; j < m; ++j) {
        const ConceptId& prompt = prompts[j % prompts.size()];
        RngStream run_rng = derive_stream(rng, static_cast<uint64_t>(j));
        GenResult res = generate(field, prompt, cfg, run_rng);
        for (int n = steps; n >= 1; --n) {
            const TrajectoryStep& st = res.trajectory.steps[steps - n];  // steps stored T..1
            axpy(1.0 / m, st.deltas.at(0), table.vectors[n - 1]);
        }
    }
    return table;
}

}  // namespace dve
