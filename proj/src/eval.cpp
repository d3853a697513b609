#include "dve/eval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dve/correction.hpp"
#include "dve/errors.hpp"

namespace dve {

ErasureReport ua_ira(const ConceptWorld& world, const VelocityField& field,
                     const SampleConfig& cfg, const std::vector<ConceptId>& erased_prompts,
                     const std::vector<ConceptId>& retained_prompts, int n_per_prompt,
                     uint64_t seed) {
    if (erased_prompts.empty() || retained_prompts.empty())
        throw ConfigError("ua_ira: prompt lists must be nonempty");
    for (const ConceptId& c : erased_prompts)
        if (std::count(retained_prompts.begin(), retained_prompts.end(), c))
            throw ConfigError("ua_ira: prompt lists must be disjoint (" + c + " in both)");
    if (n_per_prompt < 1) throw ConfigError("ua_ira: n_per_prompt must be >= 1");

    ErasureReport report;
    report.n_per_prompt = n_per_prompt;
    report.mode = sample_mode_name(cfg.mode);
    report.seed = seed;

    // Streams keyed by (role, list position, sample index) rather than by
    // concept name, so consistently relabeling concepts permutes the report
    // entries exactly.
    auto run_prompt = [&](const ConceptId& prompt, const char* role, int position) {
        int hits = 0;
        long applied = 0, total = 0;
        for (int j = 0; j < n_per_prompt; ++j) {
            RngStream rng(seed, mix64(fnv1a64(role), mix64(position, j)));
            GenResult res = generate(field, prompt, cfg, rng);
            applied += res.events_applied;
            total += res.events_total;
            if (bayes_classify(world, res.sample, world.concepts).label == prompt) ++hits;
        }
        report.activation_rate[prompt] = total > 0 ? static_cast<double>(applied) / total : 0.0;
        return static_cast<double>(hits) / n_per_prompt;
    };

    for (size_t i = 0; i < erased_prompts.size(); ++i)
        report.ua[erased_prompts[i]] = run_prompt(erased_prompts[i], "eval-ua", static_cast<int>(i));
    for (size_t i = 0; i < retained_prompts.size(); ++i)
        report.ira[retained_prompts[i]] =
            run_prompt(retained_prompts[i], "eval-ira", static_cast<int>(i));

    for (const auto& [c, v] : report.ua) report.ua_mean += v / report.ua.size();
    for (const auto& [c, v] : report.ira) report.ira_mean += v / report.ira.size();
    return report;
}

CaseStats case_statistics(const VelocityField& field, const ConceptId& prompt,
                          const SampleConfig& cfg, int runs, uint64_t seed) {
    if (runs < 1) throw ConfigError("case_statistics: runs must be >= 1");
    SampleConfig rec_cfg = cfg;
    rec_cfg.record_trajectory = true;

    CaseStats stats;
    stats.runs = runs;
    stats.mean_score_per_step.assign(cfg.steps, 0.0);
    stats.scored_counts.assign(cfg.steps, 0);
    long applied = 0, total = 0;

    for (int j = 0; j < runs; ++j) {
        RngStream rng = sample_stream(seed, prompt, 0, j);
        GenResult res = generate(field, prompt, rec_cfg, rng);
        applied += res.events_applied;
        total += res.events_total;
        for (const TrajectoryStep& st : res.trajectory.steps) {
            int idx = cfg.steps - st.step;  // step n = T maps to index 0
            for (const CorrectionEvent& ev : st.events) {
                if (!ev.has_score) continue;
                stats.mean_score_per_step[idx] += ev.score;
                stats.scored_counts[idx] += 1;
            }
        }
    }
    for (int i = 0; i < cfg.steps; ++i)
        if (stats.scored_counts[i] > 0) stats.mean_score_per_step[i] /= stats.scored_counts[i];
    stats.activation_rate = total > 0 ? static_cast<double>(applied) / total : 0.0;
    return stats;
}

TrajectoryStudy trajectory_study(const VelocityField& field, const ErasureSpec& spec,
                                 const SampleConfig& base_cfg, uint64_t seed) {
    spec.validate(base_cfg.steps);

    RngStream init_rng(seed, fnv1a64("trace-init"));
    Vec z1 = standard_normal(init_rng, field.dim());

    TrajectoryStudy study;
    study.labels = {"era-plain", "era-dve", "anc-plain", "anc-dve"};
    std::vector<ConceptId> prompts = {spec.erasure, spec.erasure, spec.anchor, spec.anchor};
    std::vector<bool> with_dve = {false, true, false, true};

    for (size_t i = 0; i < study.labels.size(); ++i) {
        SampleConfig cfg = base_cfg;
        cfg.record_trajectory = true;
        cfg.mode = with_dve[i] ? SampleMode::kDve : SampleMode::kPlain;
        cfg.specs = with_dve[i] ? std::vector<ErasureSpec>{spec} : std::vector<ErasureSpec>{};
        GenResult res = generate_from(field, prompts[i], cfg, z1);
        study.endpoints[study.labels[i]] = res.sample;
        study.trajectories.push_back(std::move(res.trajectory));
    }

    std::vector<Vec> states;
    for (const Trajectory& tr : study.trajectories) {
        for (const TrajectoryStep& st : tr.steps) states.push_back(st.z);
        states.push_back(tr.terminal);
    }
    study.basis = pca_top2(states);

    auto project = [&](const Vec& v, double& p1, double& p2) {
        p1 = 0.0;
        p2 = 0.0;
        for (int i = 0; i < study.basis.components.cols; ++i) {
            p1 += study.basis.components.at(0, i) * v[i];
            p2 += study.basis.components.at(1, i) * v[i];
        }
    };

    for (size_t i = 0; i < study.trajectories.size(); ++i) {
        const Trajectory& tr = study.trajectories[i];
        for (const TrajectoryStep& st : tr.steps) {
            TrajectoryStudyRow row;
            row.run_label = study.labels[i];
            row.step = st.step;
            project(st.z, row.pc1, row.pc2);
            bool applied = false;
            for (const CorrectionEvent& ev : st.events) applied |= ev.applied;
            if (applied) {
                row.has_delta = true;
                project(st.v_corr - st.v_user, row.dpc1, row.dpc2);
            }
            study.rows.push_back(row);
        }
        TrajectoryStudyRow last;
        last.run_label = study.labels[i];
        last.step = 0;
        project(tr.terminal, last.pc1, last.pc2);
        study.rows.push_back(last);
    }
    return study;
}

SubspaceDiagnostic subspace_diagnostic(const ConceptWorld& world, const Vec& z, double t,
                                       const ConceptId& c, const Vec& delta_v) {
    Mat jac = velocity_jacobian(world, z, t, c);
    const int d = world.dim;

    // Left singular vectors via the spectrum of J J^T; range(J) = span of the
    // columns with nonzero singular value.
    Mat jjt = matmul(jac, jac.transpose());
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            double s = 0.5 * (jjt.at(i, j) + jjt.at(j, i));  // exact symmetrization
            jjt.at(i, j) = s;
            jjt.at(j, i) = s;
        }
    EigResult eig = symmetric_eig(jjt);

    SubspaceDiagnostic diag;
    diag.singular_values.resize(d);
    for (int i = 0; i < d; ++i) diag.singular_values[i] = std::sqrt(std::max(0.0, eig.values[i]));
    const double sigma_max = diag.singular_values[0];

    if (sigma_max <= 1e-12) {
        diag.jacobian_degenerate = true;
        diag.rank = 0;
        diag.delta_degenerate = norm(delta_v) <= degenerate_delta_threshold(delta_v.size());
        return diag;
    }
    for (int i = 0; i < d; ++i)
        if (diag.singular_values[i] > 1e-6 * sigma_max) diag.rank += 1;

    // P_C = U_r U_r^T over the leading rank columns.
    auto project_range = [&](const Vec& v) {
        Vec out(d, 0.0);
        for (int r = 0; r < diag.rank; ++r) {
            double coef = 0.0;
            for (int i = 0; i < d; ++i) coef += eig.vectors.at(i, r) * v[i];
            for (int i = 0; i < d; ++i) out[i] += coef * eig.vectors.at(i, r);
        }
        return out;
    };

    double dn = norm(delta_v);
    if (dn <= degenerate_delta_threshold(delta_v.size())) {
        diag.delta_degenerate = true;
    } else {
        Vec in_range = project_range(delta_v);
        diag.energy_fraction = dot(in_range, in_range) / (dn * dn);
        Vec in_null = delta_v - in_range;
        diag.nullspace_drive = norm(in_null) / dn;
    }

    RngStream probe_rng(20240, fnv1a64("subspace-probes"));
    for (int p = 0; p < 10; ++p) {
        Vec e = standard_normal(probe_rng, d);
        Vec je = jac.matvec(e);
        Vec resid = je - project_range(je);
        diag.max_probe_residual =
            std::max(diag.max_probe_residual, norm(resid) / std::max(1.0, norm(je)));
    }
    return diag;
}

}  // namespace dve
