#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dve/errors.hpp"
#include "dve/eval.hpp"
#include "dve/sampler.hpp"
#include "test_util.hpp"

using namespace dve;
using namespace dve::testutil;

namespace {

struct ConstField : VelocityField {
    Vec value;
    explicit ConstField(Vec v) : value(std::move(v)) {}
    int dim() const override { return static_cast<int>(value.size()); }
    Vec velocity(const Vec&, double, const ConceptId&) const override { return value; }
};

struct BlowupField : VelocityField {
    int dim() const override { return 1; }
    Vec velocity(const Vec&, double t, const ConceptId&) const override {
        return {t < 0.5 ? std::numeric_limits<double>::infinity() : 0.0};
    }
};

}  // namespace

TEST_CASE("euler_step: basic behavior") {
    Vec z = {1.0, 2.0};
    CHECK(euler_step(z, 0.5, 0.25, {0.0, 0.0}) == z);
    Vec out = euler_step(z, 0.5, 0.25, {4.0, -4.0});
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(1.0));
    CHECK_THROWS_AS(euler_step(z, 0.25, 0.5, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("constant field integrates exactly over unit time") {
    // A constant data-ward field c means x0 = x1 + c, so z_0 = z_1 + c.
    ConstField field({2.5, -1.0});
    SampleConfig cfg;
    cfg.steps = 17;
    RngStream rng(3, 0);
    Vec z1 = standard_normal(rng, 2);
    GenResult res = generate_from(field, kNullConcept, cfg, z1);
    CHECK(res.sample[0] == doctest::Approx(z1[0] + 2.5).epsilon(1e-12));
    CHECK(res.sample[1] == doctest::Approx(z1[1] - 1.0).epsilon(1e-12));
}

TEST_CASE("guided_velocity: endpoint scales and affine combination") {
    AnalyticField field(reference_world());
    RngStream rng(4, 0);
    Vec z = standard_normal(rng, 2);
    const double t = 0.7;

    CHECK(guided_velocity(field, z, t, "ERA", 1.0) == field.velocity(z, t, "ERA"));
    CHECK(guided_velocity(field, z, t, "ERA", 0.0) == field.velocity(z, t, kNullConcept));

    Vec uncond = field.velocity(z, t, kNullConcept);
    Vec cond = field.velocity(z, t, "ERA");
    Vec got = guided_velocity(field, z, t, "ERA", 2.0);
    for (int i = 0; i < 2; ++i)
        CHECK(got[i] == doctest::Approx(uncond[i] + 2.0 * (cond[i] - uncond[i])).epsilon(1e-15));
}

TEST_CASE("generate: erasure == anchor reduces to plain mode bitwise") {
    AnalyticField field(reference_world());
    SampleConfig plain;
    plain.steps = 32;
    SampleConfig dve_cfg = plain;
    dve_cfg.mode = SampleMode::kDve;
    dve_cfg.specs = {{"ERA", "ERA", 1.0, 0.0, 0}};

    RngStream r1(5, 1), r2(5, 1);
    Vec a = generate(field, "IRR", plain, r1).sample;
    Vec b = generate(field, "IRR", dve_cfg, r2).sample;
    CHECK(a == b);
}

TEST_CASE("generate: tau = -1e9 never fires, equals plain mode") {
    AnalyticField field(reference_world());
    SampleConfig plain;
    plain.steps = 32;
    SampleConfig dve_cfg = plain;
    dve_cfg.mode = SampleMode::kDve;
    dve_cfg.specs = {{"ERA", "ANC", 1.0, -1e9, 0}};

    RngStream r1(6, 1), r2(6, 1);
    GenResult a = generate(field, "ERA", plain, r1);
    GenResult b = generate(field, "ERA", dve_cfg, r2);
    CHECK(a.sample == b.sample);
    CHECK(b.events_applied == 0);
    CHECK(b.events_total == 32);
}

TEST_CASE("trajectory: chain consistency and event invariant") {
    AnalyticField field(reference_world());
    SampleConfig cfg;
    cfg.steps = 24;
    cfg.mode = SampleMode::kDve;
    cfg.specs = {{"ERA", "ANC", 1.3, -0.2, 6}};
    cfg.record_trajectory = true;

    RngStream rng(7, 2);
    GenResult res = generate(field, "ERA", cfg, rng);
    const Trajectory& tr = res.trajectory;
    REQUIRE(static_cast<int>(tr.steps.size()) == 24);

    for (int i = 0; i < 24; ++i) {
        const TrajectoryStep& st = tr.steps[i];
        CHECK(st.step == 24 - i);
        CHECK(st.t == doctest::Approx(double(st.step) / 24).epsilon(1e-15));
        const Vec& next = (i + 1 < 24) ? tr.steps[i + 1].z : tr.terminal;
        double t_prev = double(st.step - 1) / 24;
        for (int j = 0; j < 2; ++j)
            CHECK(next[j] ==
                  doctest::Approx(st.z[j] + (st.t - t_prev) * st.v_corr[j]).epsilon(1e-12));
        for (const CorrectionEvent& ev : st.events) {
            bool gate = st.step > 6 && ev.has_score && ev.score < -0.2;
            CHECK(ev.applied == gate);
            if (ev.applied) CHECK(ev.magnitude > 0.0);
        }
    }
}

TEST_CASE("generate: reference scenario redirects the erased prompt") {
    AnalyticField field(reference_world());
    ConceptWorld world = reference_world();

    SampleConfig plain;
    plain.steps = 64;
    SampleConfig dve_cfg = plain;
    dve_cfg.mode = SampleMode::kDve;
    dve_cfg.specs = {{"ERA", "ANC", 2.0, 0.0, 0}};

    int anc_hits = 0, era_hits_plain = 0;
    const int runs = 100;
    for (int j = 0; j < runs; ++j) {
        RngStream r1 = sample_stream(2024, "ERA", 0, j);
        RngStream r2 = sample_stream(2024, "ERA", 0, j);
        Vec corrected = generate(field, "ERA", dve_cfg, r1).sample;
        Vec baseline = generate(field, "ERA", plain, r2).sample;
        if (bayes_classify(world, corrected, world.concepts).label == "ANC") ++anc_hits;
        if (bayes_classify(world, baseline, world.concepts).label == "ERA") ++era_hits_plain;
    }
    CHECK(anc_hits >= 90);
    CHECK(era_hits_plain >= 95);
}

TEST_CASE("dve-naive applies unconditionally") {
    AnalyticField field(reference_world());
    SampleConfig cfg;
    cfg.steps = 16;
    cfg.mode = SampleMode::kDveNaive;
    cfg.specs = {{"ERA", "ANC", 0.5, 0.0, 0}};
    RngStream rng(8, 0);
    GenResult res = generate(field, "IRR", cfg, rng);
    CHECK(res.events_applied == 16);
}

TEST_CASE("preprocessed mode validates table shape") {
    AnalyticField field(reference_world());
    ErasureSpec spec{"ERA", "ANC", 1.0, 0.0, 0};
    RngStream base(9, 0);
    DeltaTable table = build_delta_table(field, spec, {"ERA"}, 1, 8, 1.0, base);

    SampleConfig cfg;
    cfg.steps = 16;  // mismatch
    cfg.mode = SampleMode::kDvePreprocessed;
    cfg.specs = {spec};
    cfg.delta_table = table;
    RngStream rng(9, 1);
    CHECK_THROWS_AS(generate(field, "ERA", cfg, rng), ConfigError);

    cfg.steps = 8;
    CHECK_NOTHROW(generate(field, "ERA", cfg, rng));
}

TEST_CASE("non-finite field state raises NumericalError with the step index") {
    BlowupField field;
    SampleConfig cfg;
    cfg.steps = 4;
    RngStream rng(10, 0);
    try {
        generate(field, kNullConcept, cfg, rng);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.step_index >= 1);
        CHECK(e.step_index <= 2);  // t < 0.5 first occurs at n = 2 of 4
    }
}

TEST_CASE("batch_generate: determinism and prompt-order independence") {
    AnalyticField field(reference_world());
    SampleConfig cfg;
    cfg.steps = 8;

    auto one = batch_generate(field, {"ERA"}, 1, cfg, 99);
    RngStream direct = sample_stream(99, "ERA", 0, 0);
    CHECK(one[0].second == generate(field, "ERA", cfg, direct).sample);

    auto a = batch_generate(field, {"ERA", "IRR"}, 3, cfg, 55);
    auto b = batch_generate(field, {"ERA", "IRR"}, 3, cfg, 55);
    CHECK(a == b);

    auto shuffled = batch_generate(field, {"IRR", "ERA"}, 3, cfg, 55);
    auto key = [](const std::pair<ConceptId, Vec>& p) { return p; };
    std::sort(a.begin(), a.end());
    std::sort(shuffled.begin(), shuffled.end());
    CHECK(a == shuffled);
    (void)key;
}

TEST_CASE("plain-mode terminal distribution approaches the data law as T grows") {
    // Energy-distance estimate against direct draws, single-Gaussian world.
    ConceptWorld w = single_world({1.0, -2.0}, {1.5, 0.5});
    AnalyticField field(w);

    const int n = 1500;
    RngStream data_rng(77, 0);
    std::vector<Vec> ref(n);
    for (int i = 0; i < n; ++i) ref[i] = sample_data(w, "A", data_rng);

    auto energy_distance = [&](const std::vector<Vec>& xs) {
        double xy = 0.0, xx = 0.0, yy = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                xy += norm(xs[i] - ref[j]);
                if (j > i) {
                    xx += norm(xs[i] - xs[j]);
                    yy += norm(ref[i] - ref[j]);
                }
            }
        double m = double(n) * n;
        return 2.0 * xy / m - 2.0 * xx / m - 2.0 * yy / m;
    };

    std::vector<int> ts = {8, 32, 128, 512};
    std::vector<double> ed;
    for (int T : ts) {
        SampleConfig cfg;
        cfg.steps = T;
        std::vector<Vec> xs(n);
        for (int i = 0; i < n; ++i) {
            RngStream rng = sample_stream(1234, "A", 0, i);
            xs[i] = generate(field, "A", cfg, rng).sample;
        }
        ed.push_back(energy_distance(xs));
    }
    // decreasing within noise; the coarse grid must be clearly worse than the finest
    for (size_t k = 0; k + 1 < ed.size(); ++k) CHECK(ed[k + 1] <= ed[k] * 1.25 + 2e-3);
    CHECK(ed.back() < ed.front());
}
