#include "dve/sampler.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "dve/errors.hpp"

namespace dve {

SampleMode parse_sample_mode(const std::string& name) {
    if (name == "plain") return SampleMode::kPlain;
    if (name == "dve") return SampleMode::kDve;
    if (name == "dve-naive") return SampleMode::kDveNaive;
    if (name == "dve-preprocessed") return SampleMode::kDvePreprocessed;
    throw ConfigError("unknown sample mode: " + name);
}

std::string sample_mode_name(SampleMode mode) {
    switch (mode) {
        case SampleMode::kPlain: return "plain";
        case SampleMode::kDve: return "dve";
        case SampleMode::kDveNaive: return "dve-naive";
        case SampleMode::kDvePreprocessed: return "dve-preprocessed";
    }
    return "?";
}

void SampleConfig::validate(int field_dim) const {
    if (steps < 1) throw ConfigError("SampleConfig: steps must be >= 1");
    if (guidance < 0.0) throw ConfigError("SampleConfig: guidance must be >= 0");
    if (mode != SampleMode::kPlain) {
        if (specs.empty()) throw ConfigError("SampleConfig: dve modes require at least one spec");
        for (const ErasureSpec& s : specs) {
            try {
                s.validate(steps);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    if (mode == SampleMode::kDvePreprocessed) {
        if (!delta_table) throw ConfigError("SampleConfig: dve-preprocessed requires a delta table");
        if (specs.size() != 1)
            throw ConfigError("SampleConfig: dve-preprocessed supports exactly one spec");
        delta_table->validate();
        if (delta_table->steps != steps)
            throw ConfigError("SampleConfig: delta table has " + std::to_string(delta_table->steps) +
                              " steps, run uses " + std::to_string(steps));
        if (delta_table->dim != field_dim)
            throw ConfigError("SampleConfig: delta table dim mismatch");
    }
}

Vec euler_step(const Vec& z, double t_n, double t_prev, const Vec& v) {
    if (!(t_prev < t_n)) throw std::invalid_argument("euler_step: t_prev must be < t_n");
    // v points from noise toward data (E[x0 - x1 | z]); stepping t down by
    // (t_n - t_prev) therefore moves z along +v.
    Vec out = z;
    axpy(t_n - t_prev, v, out);
    return out;
}

Vec guided_velocity(const VelocityField& field, const Vec& z, double t, const ConceptId& c,
                    double s_g) {
    if (s_g == 1.0) return field.velocity(z, t, c);
    if (s_g == 0.0) return field.velocity(z, t, kNullConcept);
    Vec uncond = field.velocity(z, t, kNullConcept);
    Vec cond = field.velocity(z, t, c);
    Vec out = uncond;
    for (size_t i = 0; i < out.size(); ++i) out[i] += s_g * (cond[i] - uncond[i]);
    return out;
}

namespace {

// Live differential vectors for every spec at (z, t).
std::vector<std::pair<Vec, ErasureSpec>> live_deltas(const VelocityField& field, const Vec& z,
                                                     double t, const SampleConfig& cfg) {
    std::vector<std::pair<Vec, ErasureSpec>> deltas;
    deltas.reserve(cfg.specs.size());
    for (const ErasureSpec& spec : cfg.specs) {
        Vec v_anc, v_era;
        if (cfg.guided_deltas) {
            v_anc = guided_velocity(field, z, t, spec.anchor, cfg.guidance);
            v_era = guided_velocity(field, z, t, spec.erasure, cfg.guidance);
        } else {
            v_anc = field.velocity(z, t, spec.anchor);
            v_era = field.velocity(z, t, spec.erasure);
        }
        deltas.emplace_back(differential_vector(v_anc, v_era), spec);
    }
    return deltas;
}

}  // namespace

GenResult generate_from(const VelocityField& field, const ConceptId& c_user,
                        const SampleConfig& cfg, Vec z1) {
    cfg.validate(field.dim());
    if (static_cast<int>(z1.size()) != field.dim())
        throw ConfigError("generate_from: initial noise dimension mismatch");

    GenResult res;
    res.trajectory.prompt = c_user;
    res.trajectory.total_steps = cfg.steps;
    if (cfg.record_trajectory) res.trajectory.steps.reserve(cfg.steps);

    const int T = cfg.steps;
    Vec z = std::move(z1);
    for (int n = T; n >= 1; --n) {
        const double t_n = static_cast<double>(n) / T;
        const double t_prev = static_cast<double>(n - 1) / T;

        Vec v_user = guided_velocity(field, z, t_n, c_user, cfg.guidance);
        Vec v_corr;
        std::vector<CorrectionEvent> events;
        std::vector<std::pair<Vec, ErasureSpec>> deltas;

        switch (cfg.mode) {
            case SampleMode::kPlain:
                v_corr = v_user;
                break;
            case SampleMode::kDve: {
                deltas = live_deltas(field, z, t_n, cfg);
                auto [v, ev] = multi_correct_gated(v_user, deltas, n);
                v_corr = std::move(v);
                events = std::move(ev);
                break;
            }
            case SampleMode::kDvePreprocessed: {
                deltas.emplace_back(cfg.delta_table->vectors[n - 1], cfg.specs[0]);
                auto [v, ev] = multi_correct_gated(v_user, deltas, n);
                v_corr = std::move(v);
                events = std::move(ev);
                break;
            }
            case SampleMode::kDveNaive: {
                deltas = live_deltas(field, z, t_n, cfg);
                v_corr = v_user;
                events.resize(deltas.size());
                for (size_t i = 0; i < deltas.size(); ++i) {
                    const auto& [delta, spec] = deltas[i];
                    CorrectionEvent& ev = events[i];
                    ev.spec_index = static_cast<int>(i);
                    if (auto s = projection_score(v_user, delta)) {
                        ev.score = *s;
                        ev.has_score = true;
                    } else {
                        ev.degenerate = true;
                    }
                    ev.applied = true;  // unconditional by construction
                    ev.magnitude = spec.gamma * norm(delta);
                    v_corr = naive_correct(v_corr, delta, spec.gamma);
                }
                break;
            }
        }

        for (CorrectionEvent& ev : events) {
            ev.step = n;
            ev.t = t_n;
            res.events_total += 1;
            res.events_applied += ev.applied ? 1 : 0;
        }

        if (!all_finite(v_corr) || !all_finite(z))
            throw NumericalError("non-finite state at step " + std::to_string(n), n);

        if (cfg.record_trajectory) {
            TrajectoryStep st;
            st.step = n;
            st.t = t_n;
            st.z = z;
            st.v_user = v_user;
            st.v_corr = v_corr;
            st.events = events;
            st.correction_norm = norm(v_corr - v_user);
            if (cfg.record_deltas) {
                st.deltas.reserve(deltas.size());
                for (auto& [d, spec] : deltas) st.deltas.push_back(d);
            }
            res.trajectory.steps.push_back(std::move(st));
        }

        z = euler_step(z, t_n, t_prev, v_corr);
    }

    if (!all_finite(z)) throw NumericalError("non-finite terminal state", 0);
    res.trajectory.terminal = z;
    res.sample = std::move(z);
    return res;
}

GenResult generate(const VelocityField& field, const ConceptId& c_user, const SampleConfig& cfg,
                   RngStream& rng) {
    return generate_from(field, c_user, cfg, standard_normal(rng, field.dim()));
}

RngStream sample_stream(uint64_t master_seed, const ConceptId& prompt, int occurrence,
                        int sample_index) {
    uint64_t id = mix64(fnv1a64(prompt), static_cast<uint64_t>(occurrence));
    id = mix64(id, static_cast<uint64_t>(sample_index));
    return RngStream(master_seed, id);
}

std::vector<std::pair<ConceptId, Vec>> batch_generate(const VelocityField& field,
                                                      const std::vector<ConceptId>& prompts,
                                                      int count, const SampleConfig& cfg,
                                                      uint64_t master_seed) {
    if (count < 1) throw ConfigError("batch_generate: count must be >= 1");
    std::vector<std::pair<ConceptId, Vec>> out;
    out.reserve(prompts.size() * count);
    std::map<ConceptId, int> seen;
    for (const ConceptId& prompt : prompts) {
        int occurrence = seen[prompt]++;
        for (int j = 0; j < count; ++j) {
            RngStream rng = sample_stream(master_seed, prompt, occurrence, j);
            out.emplace_back(prompt, generate(field, prompt, cfg, rng).sample);
        }
    }
    return out;
}

}  // namespace dve
