// Acceptance suite: every criterion prints one [PASS]/[FAIL] line.
// Run all criteria with no arguments, or one with `--criterion N`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dve/editor.hpp"
#include "dve/eval.hpp"
#include "dve/mlp.hpp"
#include "dve/sampler.hpp"
#include "dve/serialize.hpp"
#include "test_util.hpp"

using namespace dve;
using namespace dve::testutil;
namespace fs = std::filesystem;

namespace {

// Desk-scale defaults for the erasure pipeline. gamma = 2 rather than 1:
// at gamma = 1 the correction exactly neutralizes the scored component
// (post-correction score pinned to tau), which freezes the coordinate along
// the concept axis instead of redirecting it; redirection needs gamma > 1.
constexpr double kGamma = 2.0;
constexpr double kTau = 0.0;
constexpr int kSteps = 64;

SampleConfig dve_cfg(double gamma = kGamma, double tau = kTau, int n_star = 0,
                     SampleMode mode = SampleMode::kDve) {
    SampleConfig cfg;
    cfg.steps = kSteps;
    cfg.mode = mode;
    cfg.specs = {{"ERA", "ANC", gamma, tau, n_star}};
    return cfg;
}

bool check(bool ok, std::string& detail, const std::string& clause) {
    if (!ok) detail += (detail.empty() ? "" : "; ") + clause;
    return ok;
}

// ---------------------------------------------------------------------------

bool criterion_1(std::string& detail) {
    RngStream rng(101, 0);
    const int d = 8;
    int active = 0;
    bool ok = true;
    for (int rep = 0; rep < 10000; ++rep) {
        Vec v = standard_normal(rng, d);
        Vec delta = standard_normal(rng, d);
        double gamma = 4.0 * rng.uniform01();
        if (gamma == 0.0) gamma = 1e-6;
        double tau = -2.0 * rng.uniform01();
        double s = *projection_score(v, delta);

        auto [out, ev] = selective_correct(v, delta, gamma, tau);
        if (!ev.applied) {
            ok &= check(out == v, detail, "inactive branch not bitwise identity");
            continue;
        }
        ++active;
        double s_after = *projection_score(out, delta);
        ok &= check(std::abs(s_after - ((1 - gamma) * s + gamma * tau)) <= 1e-12, detail,
                    "post-correction score identity violated");

        auto [out1, ev1] = selective_correct(v, delta, 1.0, tau);
        ok &= check(std::abs(*projection_score(out1, delta) - tau) <= 1e-12, detail,
                    "gamma=1 does not pin the score to tau");

        Vec r = out - v;
        Vec unit = (1.0 / norm(delta)) * delta;
        Vec resid = r - dot(r, unit) * unit;
        ok &= check(norm(resid) <= 1e-12, detail, "correction residual not parallel to delta");

        double alpha = 0.1 + 10.0 * rng.uniform01();
        Vec out_scaled = selective_correct(v, alpha * delta, gamma, tau).first;
        double diff = 0.0;
        for (int i = 0; i < d; ++i) diff = std::max(diff, std::abs(out_scaled[i] - out[i]));
        ok &= check(diff <= 1e-12, detail, "not invariant to positive delta rescaling");
        if (!ok) break;
    }
    ok &= check(active > 1500, detail, "too few active cases to be meaningful");
    return ok;
}

bool criterion_2(std::string& detail) {
    RngStream rng(102, 0);
    for (int rep = 0; rep < 1000; ++rep) {
        int k = 2 + static_cast<int>(rng.below(3));
        Vec v = standard_normal(rng, 6);
        double tau = -rng.uniform01();
        std::vector<std::pair<Vec, ErasureSpec>> deltas;
        for (int i = 0; i < k; ++i)
            deltas.emplace_back(standard_normal(rng, 6),
                                ErasureSpec{"e" + std::to_string(i), "a",
                                            0.1 + 3.0 * rng.uniform01(), tau, 0});
        Vec base = multi_correct(v, deltas).first;
        std::vector<int> order(k);
        for (int i = 0; i < k; ++i) order[i] = i;
        do {
            std::vector<std::pair<Vec, ErasureSpec>> perm;
            for (int i : order) perm.push_back(deltas[i]);
            Vec out = multi_correct(v, perm).first;
            for (int i = 0; i < 6; ++i)
                if (std::abs(out[i] - base[i]) > 1e-12) {
                    detail = "permutation changed the result beyond 1e-12";
                    return false;
                }
        } while (std::next_permutation(order.begin(), order.end()));
    }
    return true;
}

bool criterion_3(std::string& detail) {
    bool ok = true;
    RngStream rng(103, 0);

    ConceptWorld single = single_world({2.0, -1.0}, {1.5, 0.5});
    ConceptWorld std_single = single_world({0.0, 0.0}, {1.0, 1.0});
    for (int i = 0; i < 10; ++i) {
        Vec z = standard_normal(rng, 2);
        Vec v_half = analytic_velocity(std_single, z, 0.5, "A");
        ok &= check(std::abs(v_half[0]) <= 1e-12 && std::abs(v_half[1]) <= 1e-12, detail,
                    "t=0.5 single standard component field not zero");
        Vec v_one = analytic_velocity(single, z, 1.0, "A");
        ok &= check(std::abs(v_one[0] - (2.0 - z[0])) <= 1e-12 &&
                        std::abs(v_one[1] - (-1.0 - z[1])) <= 1e-12,
                    detail, "t=1 field is not mu - z");
    }
    if (!ok) return false;

    // Monte-Carlo conditional-expectation oracle at 20 (z, t) points drawn
    // from the t-marginal; cached across runs.
    ConceptWorld world = reference_world();
    const long n_pairs = 1000000;
    const double bandwidth = 0.05;
    const std::string cache_path = "acceptance_mc_cache.json";
    const std::string cache_key = "ref2d-null-20pts-1e6-h0.05-seed103";

    nlohmann::json cache;
    if (fs::exists(cache_path)) {
        std::ifstream in(cache_path);
        in >> cache;
    }
    bool have_cache = cache.contains("key") && cache["key"] == cache_key;

    Vec nm(2, 0.0), nc(2, 1.0);
    nlohmann::json points = nlohmann::json::array();
    for (int p = 0; p < 20; ++p) {
        double t = 0.2 + 0.75 * rng.uniform01();
        Vec x0 = sample_data(world, kNullConcept, rng);
        Vec x1 = gaussian_sample(rng, nm, nc);
        Vec z = {(1 - t) * x0[0] + t * x1[0], (1 - t) * x0[1] + t * x1[1]};

        Vec mc_value, mc_se;
        double ess = 0.0;
        if (have_cache) {
            const auto& rec = cache["points"][p];
            mc_value = rec["value"].get<Vec>();
            mc_se = rec["se"].get<Vec>();
            ess = rec["ess"].get<double>();
        } else {
            RngStream mc_rng(103, 1000 + p);
            McEstimate est = mc_velocity_oracle(world, kNullConcept, z, t, n_pairs, bandwidth, mc_rng);
            mc_value = est.value;
            mc_se = est.stderr_;
            ess = est.ess;
            points.push_back({{"value", mc_value}, {"se", mc_se}, {"ess", ess}});
        }
        ok &= check(ess >= 100.0, detail, "oracle effective sample size too small at point " +
                                              std::to_string(p));
        Vec v = analytic_velocity(world, z, t, kNullConcept);
        for (int j = 0; j < 2; ++j)
            ok &= check(std::abs(v[j] - mc_value[j]) <= 3.0 * mc_se[j], detail,
                        "field vs MC oracle beyond 3 SE at point " + std::to_string(p));
    }
    if (!have_cache) {
        nlohmann::json out;
        out["key"] = cache_key;
        out["points"] = points;
        std::ofstream f(cache_path);
        f << out.dump(1);
    }
    return ok;
}

bool criterion_4(std::string& detail) {
    Vec target_mean = {1.0, -2.0}, target_var = {1.5, 0.5};
    ConceptWorld w = single_world(target_mean, target_var);
    AnalyticField field(w);
    SampleConfig cfg;
    cfg.steps = 512;
    const int n = 10000;
    Vec sum(2, 0.0), sumsq(2, 0.0);
    for (int i = 0; i < n; ++i) {
        RngStream rng = sample_stream(104, "A", 0, i);
        Vec z = generate(field, "A", cfg, rng).sample;
        for (int j = 0; j < 2; ++j) {
            sum[j] += z[j];
            sumsq[j] += z[j] * z[j];
        }
    }
    bool ok = true;
    for (int j = 0; j < 2; ++j) {
        double mean = sum[j] / n;
        double var = sumsq[j] / n - mean * mean;
        ok &= check(std::abs(mean - target_mean[j]) <= 0.05, detail,
                    "terminal mean off axis " + std::to_string(j) + " by " +
                        format_double(mean - target_mean[j]));
        ok &= check(std::abs(var - target_var[j]) <= 0.1, detail,
                    "terminal variance off axis " + std::to_string(j) + " by " +
                        format_double(var - target_var[j]));
    }
    return ok;
}

bool criterion_5(std::string& detail) {
    ConceptWorld world = reference_world();
    AnalyticField field(world);
    SampleConfig plain;
    plain.steps = kSteps;

    ErasureReport base = ua_ira(world, field, plain, {"ERA"}, {"IRR"}, 500, 105);
    ErasureReport dve = ua_ira(world, field, dve_cfg(), {"ERA"}, {"IRR"}, 500, 105);

    bool ok = true;
    ok &= check(dve.ua.at("ERA") <= 0.10, detail,
                "UA(ERA) with erasure = " + format_double(dve.ua.at("ERA")));
    ok &= check(base.ua.at("ERA") >= 0.95, detail,
                "plain UA(ERA) = " + format_double(base.ua.at("ERA")));
    ok &= check(dve.ira.at("IRR") >= 0.90, detail,
                "IRA(IRR) = " + format_double(dve.ira.at("IRR")));
    detail += detail.empty() ? "" : "; ";
    detail += "gamma=" + format_double(kGamma) + " tau=" + format_double(kTau);
    return ok;
}

bool criterion_6(std::string& detail) {
    AnalyticField field(reference_world());
    SampleConfig plain;
    plain.steps = kSteps;
    SampleConfig selective = dve_cfg();
    SampleConfig naive = dve_cfg(kGamma, kTau, 0, SampleMode::kDveNaive);

    std::vector<double> ratios;
    for (int j = 0; j < 200; ++j) {
        Vec z1;
        {
            RngStream rng = sample_stream(106, "IRR", 0, j);
            z1 = standard_normal(rng, 2);
        }
        Vec base = generate_from(field, "IRR", plain, z1).sample;
        Vec sel = generate_from(field, "IRR", selective, z1).sample;
        Vec nai = generate_from(field, "IRR", naive, z1).sample;
        double ds = norm(sel - base);
        double dn = norm(nai - base);
        ratios.push_back(dn / std::max(ds, 1e-300));
    }
    std::nth_element(ratios.begin(), ratios.begin() + 100, ratios.end());
    double median = ratios[100];
    detail = "median displacement ratio = " + format_double(median);
    return median >= 2.0;
}

bool criterion_7(std::string& detail) {
    AnalyticField field(reference_world());
    CaseStats stats = case_statistics(field, "ANC", dve_cfg(), 200, 107);
    detail = "anchor activation rate = " + format_double(stats.activation_rate);
    return stats.activation_rate <= 0.05;
}

bool criterion_8(std::string& detail) {
    ConceptWorld world = reference_world();
    AnalyticField field(world);
    SampleConfig cfg = dve_cfg(kGamma, kTau, kSteps / 2);
    cfg.record_trajectory = true;

    bool ok = true;
    int early_applied = 0;
    for (int j = 0; j < 200; ++j) {
        RngStream rng = sample_stream(108, "ERA", 0, j);
        GenResult res = generate(field, "ERA", cfg, rng);
        for (const TrajectoryStep& st : res.trajectory.steps)
            for (const CorrectionEvent& ev : st.events)
                if (ev.applied && st.step <= kSteps / 2) ++early_applied;
    }
    ok &= check(early_applied == 0, detail,
                std::to_string(early_applied) + " corrections fired at n <= n*");

    SampleConfig eval_cfg = dve_cfg(kGamma, kTau, kSteps / 2);
    ErasureReport report = ua_ira(world, field, eval_cfg, {"ERA"}, {"IRR"}, 500, 108);
    ok &= check(report.ua.at("ERA") <= 0.25, detail,
                "UA(ERA) with cutoff = " + format_double(report.ua.at("ERA")));
    return ok;
}

bool criterion_9(std::string& detail) {
    ConceptWorld world = reference_world();
    AnalyticField field(world);
    ErasureSpec spec{"ERA", "ANC", kGamma, kTau, 0};
    bool ok = true;

    // M = 1: table equals the live deltas of its source run exactly
    RngStream base1(109, 1);
    DeltaTable m1 = build_delta_table(field, spec, {"ERA"}, 1, kSteps, 1.0, base1);
    SampleConfig rec = dve_cfg();
    rec.record_trajectory = true;
    rec.record_deltas = true;
    RngStream replay = derive_stream(base1, 0);
    GenResult src = generate(field, "ERA", rec, replay);
    for (int n = 1; n <= kSteps && ok; ++n)
        ok &= check(m1.vectors[n - 1] == src.trajectory.steps[kSteps - n].deltas[0], detail,
                    "M=1 table differs from the source run at step " + std::to_string(n));

    // M = 4 end-to-end through the preprocessed mode
    RngStream base4(109, 4);
    DeltaTable m4 = build_delta_table(field, spec, {"ERA"}, 4, kSteps, 1.0, base4);
    SampleConfig pre = dve_cfg(kGamma, kTau, 0, SampleMode::kDvePreprocessed);
    pre.delta_table = m4;
    ErasureReport report = ua_ira(world, field, pre, {"ERA"}, {"IRR"}, 500, 109);
    ok &= check(report.ua.at("ERA") <= 0.25, detail,
                "preprocessed UA(ERA) = " + format_double(report.ua.at("ERA")));
    return ok;
}

bool criterion_10(std::string& detail) {
    AnalyticField field(reference_world());
    ErasureSpec spec{"ERA", "ANC", kGamma, kTau, 0};
    SampleConfig base;
    base.steps = kSteps;
    TrajectoryStudy study = trajectory_study(field, spec, base, 110);

    double plain_gap = norm(study.endpoints.at("era-plain") - study.endpoints.at("anc-plain"));
    double dve_gap = norm(study.endpoints.at("era-dve") - study.endpoints.at("anc-plain"));
    double anchor_gap = norm(study.endpoints.at("anc-dve") - study.endpoints.at("anc-plain"));

    bool ok = true;
    ok &= check(2.0 * dve_gap <= plain_gap, detail,
                "era-dve endpoint only " + format_double(plain_gap / std::max(dve_gap, 1e-300)) +
                    "x closer");
    ok &= check(anchor_gap <= 0.10 * plain_gap, detail,
                "anchor trajectories diverge: gap " + format_double(anchor_gap));
    return ok;
}

bool criterion_11(std::string& detail) {
    ConceptWorld world = reference_world();
    AnalyticField field(world);
    const int T = kSteps;
    const int n_max = static_cast<int>(std::lround(24.0 * T / 28.0));
    bool ok = true;

    // degenerate-spec edit equals plain FlowEdit bitwise
    for (int n_min : {0, 12}) {
        EditConfig plain;
        plain.x_src = {0.0, 6.0};
        plain.c_src = "IRR";
        plain.c_tar = "ERA";
        plain.steps = T;
        plain.n_max = n_max;
        plain.n_min = n_min;
        EditConfig degen = plain;
        degen.specs = {{"ERA", "ERA", kGamma, kTau, 0}};
        RngStream rng(111, n_min);
        ok &= check(edit(field, plain, rng).sample == edit(field, degen, rng).sample, detail,
                    "degenerate-spec edit differs from plain FlowEdit (n_min=" +
                        std::to_string(n_min) + ")");
    }

    int anc_with = 0, era_without = 0, anc_inherent = 0;
    for (int j = 0; j < 200; ++j) {
        RngStream src_rng(1110, j);
        EditConfig cfg;
        cfg.x_src = sample_data(world, "IRR", src_rng);
        cfg.c_src = "IRR";
        cfg.c_tar = "ERA";
        cfg.steps = T;
        cfg.n_max = n_max;
        cfg.specs = {{"ERA", "ANC", kGamma, 0.0, 0}};
        RngStream rng(1111, j);
        if (bayes_classify(world, edit(field, cfg, rng).sample, world.concepts).label == "ANC")
            ++anc_with;

        EditConfig no_dve = cfg;
        no_dve.specs.clear();
        if (bayes_classify(world, edit(field, no_dve, rng).sample, world.concepts).label == "ERA")
            ++era_without;

        EditConfig inherent = cfg;
        RngStream src2(1112, j);
        inherent.x_src = sample_data(world, "ERA", src2);
        inherent.c_src = "ERA";
        inherent.c_tar = "ERA";
        if (bayes_classify(world, edit(field, inherent, rng).sample, world.concepts).label == "ANC")
            ++anc_inherent;
    }
    ok &= check(anc_with >= 170, detail, "ANC rate with erasure = " + std::to_string(anc_with) + "/200");
    ok &= check(era_without >= 180, detail, "baseline ERA rate = " + std::to_string(era_without) + "/200");
    ok &= check(anc_inherent >= 160, detail,
                "source-inherent suppression = " + std::to_string(anc_inherent) + "/200");
    return ok;
}

bool criterion_12(std::string& detail) {
    ConceptWorld world = reference_world();
    TrainConfig cfg;
    cfg.seed = 112;
    TrainResult trained = train(world, cfg);
    bool ok = true;

    double head = trained.loss_history.front();
    double tail = 0.0;
    int tail_n = cfg.steps / 10;
    for (int i = cfg.steps - tail_n; i < cfg.steps; ++i) tail += trained.loss_history[i] / tail_n;
    ok &= check(tail < 0.2 * head, detail,
                "final loss " + format_double(tail) + " not below 0.2 x initial " +
                    format_double(head));

    double mse = tube_grid_mse(trained.field, world);
    ok &= check(mse <= 0.05, detail, "grid MSE = " + format_double(mse));

    // criterion 5 re-run on the learned field, relaxed bounds
    ErasureReport report = ua_ira(world, trained.field, dve_cfg(), {"ERA"}, {"IRR"}, 500, 112);
    ok &= check(report.ua.at("ERA") <= 0.20, detail,
                "learned-field UA(ERA) = " + format_double(report.ua.at("ERA")));
    ok &= check(report.ira.at("IRR") >= 0.80, detail,
                "learned-field IRA(IRR) = " + format_double(report.ira.at("IRR")));

    // plain-mode prompted accuracy within 10 points of the analytic field
    AnalyticField analytic(world);
    SampleConfig plain;
    plain.steps = kSteps;
    ErasureReport learned_base = ua_ira(world, trained.field, plain, {"ERA"}, {"IRR"}, 200, 113);
    ErasureReport analytic_base = ua_ira(world, analytic, plain, {"ERA"}, {"IRR"}, 200, 113);
    double gap = std::abs(learned_base.ua.at("ERA") - analytic_base.ua.at("ERA"));
    ok &= check(gap <= 0.10, detail, "plain-mode accuracy parity gap = " + format_double(gap));
    return ok;
}

bool criterion_13(std::string& detail) {
    RngStream rng(113, 0);
    double worst = 0.0;
    for (int config = 0; config < 10; ++config) {
        TrainConfig cfg;
        cfg.seed = 1300 + config;
        cfg.embed_dim = 2 + static_cast<int>(rng.below(6));
        cfg.hidden = (config % 2 == 0) ? std::vector<int>{6, 5} : std::vector<int>{9};
        int d = 2 + static_cast<int>(rng.below(2));
        MlpField f = MlpField::init(d, {"A", "B"}, cfg);

        std::vector<BatchItem> batch;
        std::vector<ConceptId> cs = {"A", "B", kNullConcept};
        int b = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < b; ++i)
            batch.push_back({standard_normal(rng, d), standard_normal(rng, d),
                             0.05 + 0.9 * rng.uniform01(), cs[rng.below(3)]});

        Gradients grads = rectified_flow_loss_grad(f, batch).second;
        const double h = 1e-6;
        for (size_t i = 0; i < f.param_count(); ++i) {
            double orig = f.get_param(i);
            f.set_param(i, orig + h);
            double lp = rectified_flow_loss_grad(f, batch).first;
            f.set_param(i, orig - h);
            double lm = rectified_flow_loss_grad(f, batch).first;
            f.set_param(i, orig);
            double fd = (lp - lm) / (2.0 * h);
            double ad = grads.get_param(i);
            double scale = std::max({std::abs(ad), std::abs(fd), 1e-3});
            worst = std::max(worst, std::abs(ad - fd) / scale);
        }
    }
    detail = "worst relative gradient error = " + format_double(worst);
    return worst <= 1e-4;
}

bool criterion_14(std::string& detail) {
    bool ok = true;
    ConceptWorld iso = single_world({0.0, 0.0}, {1.0, 1.0});
    SubspaceDiagnostic diag = subspace_diagnostic(iso, {0.3, 0.4}, 0.8, "A", {1.0, -1.0});
    ok &= check(diag.rank == 2, detail, "isotropic rank = " + std::to_string(diag.rank));
    ok &= check(std::abs(diag.energy_fraction - 1.0) <= 1e-8, detail,
                "isotropic energy fraction = " + format_double(diag.energy_fraction));
    ok &= check(diag.max_probe_residual <= 1e-8, detail,
                "isotropic probe residual = " + format_double(diag.max_probe_residual));

    ConceptWorld world = reference_world();
    RngStream rng(114, 0);
    for (int rep = 0; rep < 10; ++rep) {
        Vec z = standard_normal(rng, 2);
        double t = 0.3 + 0.65 * rng.uniform01();
        Vec v_anc = analytic_velocity(world, z, t, "ANC");
        Vec v_era = analytic_velocity(world, z, t, "ERA");
        SubspaceDiagnostic d2 =
            subspace_diagnostic(world, z, t, kNullConcept, differential_vector(v_anc, v_era));
        ok &= check(d2.max_probe_residual <= 1e-8, detail,
                    "mixture probe residual = " + format_double(d2.max_probe_residual));
    }
    return ok;
}

bool criterion_15(std::string& detail) {
#ifndef DVE_CLI_PATH
    detail = "CLI path not configured";
    return false;
#else
    const std::string cli = DVE_CLI_PATH;
    fs::path dir = fs::path(DVE_TEST_TMPDIR) / "acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto run = [&](const std::string& args) {
        std::string cmd = cli + " " + args + " > /dev/null 2>&1";
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    std::string w = (dir / "w.json").string();
    if (run("scenario --preset reference-2d --out " + w) != 0) {
        detail = "scenario command failed";
        return false;
    }
    std::vector<std::pair<std::string, std::string>> cases = {
        {"sample", "sample --scenario " + w + " --seed 5 -n 8 --steps 24"},
        {"erase", "erase --scenario " + w + " --seed 5 -n 8 --steps 24"},
        {"preprocess", "preprocess --scenario " + w + " --seed 5 --m 2 --steps 24"},
        {"edit", "edit --scenario " + w + " --seed 5 -n 4 --steps 24"},
        {"eval", "eval --scenario " + w + " --seed 5 -n 8 --steps 24"},
        {"trace", "trace --scenario " + w + " --seed 5 --steps 24"},
        {"train", "train --scenario " + w + " --seed 5 --train-steps 50 --batch 8 --hidden 8"},
    };
    for (const auto& [name, args] : cases) {
        fs::path d1 = dir / (name + "_1"), d2 = dir / (name + "_2");
        if (run(args + " --out " + d1.string()) != 0 || run(args + " --out " + d2.string()) != 0) {
            detail = name + " command failed";
            return false;
        }
        for (const auto& entry : fs::directory_iterator(d1)) {
            fs::path twin = d2 / entry.path().filename();
            if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
                detail = name + ": " + entry.path().filename().string() + " not byte-identical";
                return false;
            }
        }
    }
    return true;
#endif
}

struct Criterion {
    int id;
    const char* title;
    std::function<bool(std::string&)> fn;
};

const std::vector<Criterion> kCriteria = {
    {1, "projection algebra on 10^4 random tuples", criterion_1},
    {2, "multi-concept order invariance", criterion_2},
    {3, "analytic field: closed forms + Monte-Carlo oracle", criterion_3},
    {4, "sampler convergence to the data law (T=512, 10^4 seeds)", criterion_4},
    {5, "erasure efficacy on reference-2d (UA/IRA)", criterion_5},
    {6, "selectivity: naive shifts irrelevant prompts >= 2x more", criterion_6},
    {7, "anchor-prompt quiescence at tau = 0", criterion_7},
    {8, "early-stage cutoff n* = T/2", criterion_8},
    {9, "preprocessed delta tables (M=1 exact, M=4 effective)", criterion_9},
    {10, "shared-noise trajectory study endpoint geometry", criterion_10},
    {11, "editing: bitwise degenerate path + erasure rates", criterion_11},
    {12, "learned field parity (grid MSE + relaxed UA/IRA)", criterion_12},
    {13, "gradient check on 10 random configurations", criterion_13},
    {14, "subspace diagnostic projector identities", criterion_14},
    {15, "CLI determinism: double-run byte identity", criterion_15},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);

    int failures = 0;
    for (const Criterion& c : kCriteria) {
        if (only != 0 && c.id != only) continue;
        std::string detail;
        bool ok = false;
        try {
            ok = c.fn(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", c.id, c.title,
                    detail.empty() ? "" : " -- ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
