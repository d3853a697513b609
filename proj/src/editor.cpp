#include "dve/editor.hpp"

#include <stdexcept>
#include <string>

#include "dve/errors.hpp"

namespace dve {

void EditConfig::validate(int field_dim) const {
    if (steps < 1) throw ConfigError("EditConfig: steps must be >= 1");
    if (n_min < 0 || n_min > n_max || n_max > steps)
        throw ConfigError("EditConfig: need 0 <= n_min <= n_max <= steps");
    if (static_cast<int>(x_src.size()) != field_dim)
        throw ConfigError("EditConfig: source point dimension mismatch");
    if (!all_finite(x_src)) throw ConfigError("EditConfig: non-finite source point");
    if (c_src.empty() || c_tar.empty()) throw ConfigError("EditConfig: missing prompt");
    for (const ErasureSpec& s : specs) {
        try {
            s.validate(steps);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (guidance < 0.0) throw ConfigError("EditConfig: guidance must be >= 0");
}

Vec edit_velocity(const Vec& v_tar_corr, const Vec& v_src) {
    return v_tar_corr - v_src;
}

namespace {

std::vector<std::pair<Vec, ErasureSpec>> deltas_at(const VelocityField& field, const Vec& z,
                                                   double t, const EditConfig& cfg) {
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

void record_step(GenResult& res, const EditConfig& cfg, int n, double t, int phase, const Vec& z,
                 Vec v_user, Vec v_corr, std::vector<CorrectionEvent> events, double corr_norm) {
    for (CorrectionEvent& ev : events) {
        ev.step = n;
        ev.t = t;
        res.events_total += 1;
        res.events_applied += ev.applied ? 1 : 0;
    }
    if (!cfg.record_trajectory) return;
    TrajectoryStep st;
    st.step = n;
    st.t = t;
    st.phase = phase;
    st.z = z;
    st.v_user = std::move(v_user);
    st.v_corr = std::move(v_corr);
    st.events = std::move(events);
    st.correction_norm = corr_norm;
    res.trajectory.steps.push_back(std::move(st));
}

}  // namespace

GenResult edit(const VelocityField& field, const EditConfig& cfg, const RngStream& rng) {
    cfg.validate(field.dim());
    const int T = cfg.steps;
    const int d = field.dim();

    GenResult res;
    res.trajectory.prompt = cfg.c_tar;
    res.trajectory.total_steps = T;

    // Phase 1: edit trajectory driven by the corrected target/source velocity gap.
    Vec z_edit = cfg.x_src;
    for (int n = cfg.n_max; n >= cfg.n_min + 1; --n) {
        const double t_n = static_cast<double>(n) / T;
        const double t_prev = static_cast<double>(n - 1) / T;

        RngStream step_rng = derive_stream(rng, mix64(fnv1a64("edit-phase1"), static_cast<uint64_t>(n)));
        Vec eps = standard_normal(step_rng, d);

        Vec z_src(d), z_tar(d);
        for (int i = 0; i < d; ++i) {
            z_src[i] = (1.0 - t_n) * cfg.x_src[i] + t_n * eps[i];
            z_tar[i] = z_edit[i] + z_src[i] - cfg.x_src[i];
        }

        Vec v_tar = guided_velocity(field, z_tar, t_n, cfg.c_tar, cfg.guidance);
        auto [v_tar_corr, events] = multi_correct_gated(v_tar, deltas_at(field, z_tar, t_n, cfg), n);
        Vec v_src = field.velocity(z_src, t_n, cfg.c_src);
        Vec v_edit = edit_velocity(v_tar_corr, v_src);

        if (!all_finite(v_edit))
            throw NumericalError("edit: non-finite state at step " + std::to_string(n), n);
        double corr_norm = norm(v_tar_corr - v_tar);
        record_step(res, cfg, n, t_n, 1, z_edit, std::move(v_tar), v_edit, std::move(events),
                    corr_norm);
        z_edit = euler_step(z_edit, t_n, t_prev, v_edit);
    }

    if (cfg.n_min == 0) {
        res.trajectory.terminal = z_edit;
        res.sample = std::move(z_edit);
        return res;
    }

    // Phase 2: re-noise the edit state onto a target trajectory, then finish
    // as plain DVE-corrected generation down to t = 0.
    const double t_min = static_cast<double>(cfg.n_min) / T;
    RngStream bridge_rng = derive_stream(rng, fnv1a64("edit-phase2"));
    Vec eps = standard_normal(bridge_rng, d);
    Vec z_tar(d);
    for (int i = 0; i < d; ++i)
        z_tar[i] = z_edit[i] + t_min * eps[i] + (1.0 - t_min) * cfg.x_src[i] - cfg.x_src[i];

    for (int n = cfg.n_min; n >= 1; --n) {
        const double t_n = static_cast<double>(n) / T;
        const double t_prev = static_cast<double>(n - 1) / T;

        Vec v_tar = guided_velocity(field, z_tar, t_n, cfg.c_tar, cfg.guidance);
        auto [v_corr, events] = multi_correct_gated(v_tar, deltas_at(field, z_tar, t_n, cfg), n);

        if (!all_finite(v_corr))
            throw NumericalError("edit: non-finite state at step " + std::to_string(n), n);
        double corr_norm = norm(v_corr - v_tar);
        record_step(res, cfg, n, t_n, 2, z_tar, std::move(v_tar), v_corr, std::move(events),
                    corr_norm);
        z_tar = euler_step(z_tar, t_n, t_prev, v_corr);
    }

    res.trajectory.terminal = z_tar;
    res.sample = std::move(z_tar);
    return res;
}

}  // namespace dve
