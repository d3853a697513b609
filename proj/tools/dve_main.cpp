#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dve/editor.hpp"
#include "dve/errors.hpp"
#include "dve/eval.hpp"
#include "dve/mlp.hpp"
#include "dve/sampler.hpp"
#include "dve/serialize.hpp"

namespace fs = std::filesystem;
using namespace dve;

namespace {

constexpr const char* kVersion = "dve 0.1.0";

struct CommonOpts {
    std::string scenario_path;
    std::string field_spec = "analytic";
    uint64_t seed = 1;
    int steps = 0;  // scenario default unless the flag was given
    bool steps_set = false;
    double guidance = 1.0;
    bool guidance_set = false;
    std::string out;
};

struct SpecOpts {
    std::vector<std::string> erase;
    std::vector<std::string> anchor;
    double gamma = 0.0;  // scenario defaults unless the flags were given
    bool gamma_set = false;
    double tau = 0.0;
    bool tau_set = false;
    int cutoff = 0;
    bool cutoff_set = false;
    std::string mode = "dve";
    std::string delta_table_path;
};

struct LoadedRun {
    ScenarioSpec scenario;
    std::unique_ptr<VelocityField> field;
    std::map<std::string, std::string> input_hashes;
    SampleConfig cfg;
    std::map<std::string, std::string> resolved;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_field = true) {
    cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
    if (with_field)
        cmd->add_option("--field", opts.field_spec,
                        "velocity field: 'analytic' or a checkpoint path");
    cmd->add_option("--seed", opts.seed, "master seed; all randomness derives from it");
    cmd->add_option("--steps", opts.steps, "ODE steps T")
        ->each([&opts](const std::string&) { opts.steps_set = true; });
    cmd->add_option("--guidance", opts.guidance, "classifier-free guidance scale")
        ->each([&opts](const std::string&) { opts.guidance_set = true; });
    cmd->add_option("--out", opts.out, "output directory")->required();
}

void add_spec_opts(CLI::App* cmd, SpecOpts& opts, bool with_mode = true) {
    cmd->add_option("--erase", opts.erase, "erasure concept (repeatable)");
    cmd->add_option("--anchor", opts.anchor, "anchor concept (repeatable, pairs with --erase)");
    cmd->add_option("--gamma", opts.gamma, "erasure strength")
        ->each([&opts](const std::string&) { opts.gamma_set = true; });
    cmd->add_option("--tau", opts.tau, "projection-score threshold (<= 0)")
        ->each([&opts](const std::string&) { opts.tau_set = true; });
    cmd->add_option("--cutoff", opts.cutoff, "early-stage cutoff step n*")
        ->each([&opts](const std::string&) { opts.cutoff_set = true; });
    if (with_mode) {
        cmd->add_option("--mode", opts.mode, "plain | dve | dve-naive | dve-preprocessed");
        cmd->add_option("--delta-table", opts.delta_table_path, "preprocessed delta table JSON");
    }
}

LoadedRun load_run(const CommonOpts& common, const SpecOpts* specs, bool has_field = true) {
    LoadedRun run;
    run.scenario = scenario_from_json(read_file(common.scenario_path));
    run.input_hashes[common.scenario_path] = file_hash_hex(common.scenario_path);

    if (has_field) {
        if (common.field_spec == "analytic") {
            run.field = std::make_unique<AnalyticField>(run.scenario.world);
        } else {
            Checkpoint ckpt = checkpoint_from_json(read_file(common.field_spec));
            run.input_hashes[common.field_spec] = file_hash_hex(common.field_spec);
            if (ckpt.field.dim() != run.scenario.world.dim)
                throw ConfigError("checkpoint dimension does not match the scenario");
            run.field = std::make_unique<MlpField>(std::move(ckpt.field));
        }
        run.resolved["field"] = common.field_spec;
    }

    const ScenarioDefaults& d = run.scenario.defaults;
    run.cfg.steps = common.steps_set ? common.steps : d.steps;
    run.cfg.guidance = common.guidance_set ? common.guidance : d.guidance;
    run.resolved["scenario"] = common.scenario_path;
    run.resolved["seed"] = std::to_string(common.seed);
    run.resolved["steps"] = std::to_string(run.cfg.steps);
    run.resolved["guidance"] = format_double(run.cfg.guidance);

    if (specs) {
        double gamma = specs->gamma_set ? specs->gamma : d.gamma;
        double tau = specs->tau_set ? specs->tau : d.tau;
        int cutoff = specs->cutoff_set ? specs->cutoff : d.n_star;

        std::vector<std::string> erase = specs->erase;
        std::vector<std::string> anchor = specs->anchor;
        if (erase.empty() && run.scenario.bindings.count("erasure"))
            erase = {run.scenario.bindings.at("erasure")};
        if (anchor.empty() && run.scenario.bindings.count("anchor"))
            anchor = {run.scenario.bindings.at("anchor")};
        if (erase.size() != anchor.size())
            throw ConfigError("--erase and --anchor must be given in pairs");
        for (size_t i = 0; i < erase.size(); ++i) {
            ErasureSpec spec{erase[i], anchor[i], gamma, tau, cutoff};
            try {
                spec.validate(run.cfg.steps);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            if (!run.scenario.world.has_concept(spec.erasure))
                throw ConfigError("unknown erasure concept: " + spec.erasure);
            if (!run.scenario.world.has_concept(spec.anchor))
                throw ConfigError("unknown anchor concept: " + spec.anchor);
            run.cfg.specs.push_back(spec);
            run.resolved["spec." + std::to_string(i)] =
                spec.erasure + "->" + spec.anchor + " gamma=" + format_double(gamma) +
                " tau=" + format_double(tau) + " cutoff=" + std::to_string(cutoff);
        }
        run.cfg.mode = parse_sample_mode(specs->mode);
        run.resolved["mode"] = specs->mode;
        if (!specs->delta_table_path.empty()) {
            run.cfg.delta_table = delta_table_from_json(read_file(specs->delta_table_path));
            run.input_hashes[specs->delta_table_path] = file_hash_hex(specs->delta_table_path);
            run.resolved["delta_table"] = specs->delta_table_path;
        }
        if (run.cfg.mode != SampleMode::kPlain && run.cfg.specs.empty())
            throw ConfigError(
                "dve modes need at least one --erase/--anchor pair (or scenario bindings)");
    } else {
        run.cfg.mode = SampleMode::kPlain;
        run.resolved["mode"] = "plain";
    }
    return run;
}

// Writes manifest.json first, then every artifact it promises.
void emit(const std::string& out_dir, const std::string& command, const LoadedRun& run,
          uint64_t seed, const std::vector<std::pair<std::string, std::string>>& artifacts) {
    fs::create_directories(out_dir);
    RunManifest m;
    m.command = command;
    m.resolved_config = run.resolved;
    m.input_hashes = run.input_hashes;
    m.seed = seed;
    m.version = kVersion;
    for (const auto& [name, content] : artifacts) m.outputs.push_back(name);
    write_file(out_dir + "/manifest.json", manifest_to_json(m));
    for (const auto& [name, content] : artifacts) write_file(out_dir + "/" + name, content);
}

ConceptId bound_concept(const ScenarioSpec& scenario, const std::string& flag_value,
                        const std::string& role) {
    if (!flag_value.empty()) return flag_value;
    auto it = scenario.bindings.find(role);
    if (it == scenario.bindings.end())
        throw ConfigError("no --" + role + " given and the scenario binds none");
    return it->second;
}

ScenarioSpec make_preset(const std::string& name) {
    ScenarioSpec spec;
    spec.world.dim = 2;
    spec.world.concepts = {"ERA", "ANC", "IRR"};
    spec.world.components = {
        {{-4.0, 0.0}, {1.0, 1.0}, 1.0 / 3.0, {"ERA"}},
        {{4.0, 0.0}, {1.0, 1.0}, 1.0 / 3.0, {"ANC"}},
        {{0.0, 6.0}, {1.0, 1.0}, 1.0 / 3.0, {"IRR"}},
    };
    spec.bindings = {{"user", "ERA"},
                     {"erasure", "ERA"},
                     {"anchor", "ANC"},
                     {"source", "IRR"},
                     {"target", "ERA"}};
    if (name == "reference-2d") {
        spec.defaults = {2.0, 0.0, 0, 64, 1.0};
    } else if (name == "flux-defaults") {
        // hyperparameters large latent models ship with; kept for
        // documentation symmetry, not tuned for this world
        spec.defaults = {3.0, -15.0, 0, 28, 3.5};
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    spec.validate();
    return spec;
}

int cmd_scenario(const std::string& preset, const std::string& in_path,
                 const std::string& out_path) {
    ScenarioSpec spec;
    std::map<std::string, std::string> hashes;
    if (!in_path.empty()) {
        spec = scenario_from_json(read_file(in_path));
        hashes[in_path] = file_hash_hex(in_path);
    } else {
        spec = make_preset(preset);
    }
    fs::path out(out_path);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());

    RunManifest m;
    m.command = "scenario";
    m.resolved_config = {{"preset", in_path.empty() ? preset : std::string("-")},
                         {"in", in_path.empty() ? std::string("-") : in_path}};
    m.input_hashes = hashes;
    m.seed = 0;
    m.version = kVersion;
    m.outputs = {out.filename().string()};
    write_file(out_path + ".manifest.json", manifest_to_json(m));
    write_file(out_path, scenario_to_json(spec));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale flow-matching engine with training-free concept erasure"};
    app.require_subcommand(1);

    auto* scenario_cmd = app.add_subcommand("scenario", "write or validate a scenario file");
    std::string preset = "reference-2d", scenario_in, scenario_out;
    scenario_cmd->add_option("--preset", preset, "named preset: reference-2d | flux-defaults");
    scenario_cmd->add_option("--in", scenario_in, "validate and re-emit a user scenario");
    scenario_cmd->add_option("--out", scenario_out, "output path")->required();

    auto* train_cmd = app.add_subcommand("train", "train the MLP velocity field");
    CommonOpts train_common;
    TrainConfig train_cfg;
    add_common(train_cmd, train_common, false);
    train_cmd->add_option("--train-steps", train_cfg.steps, "SGD steps");
    train_cmd->add_option("--batch", train_cfg.batch, "minibatch size");
    train_cmd->add_option("--lr", train_cfg.lr, "learning rate");
    std::string optimizer = "momentum";
    train_cmd->add_option("--optimizer", optimizer, "sgd | momentum");
    train_cmd->add_option("--hidden", train_cfg.hidden, "hidden layer widths");
    train_cmd->add_option("--embed-dim", train_cfg.embed_dim, "concept embedding dimension");

    auto* sample_cmd = app.add_subcommand("sample", "plain generation");
    auto* erase_cmd = app.add_subcommand("erase", "generation with concept erasure");
    CommonOpts sample_common, erase_common;
    SpecOpts erase_specs;
    std::string sample_prompt, erase_prompt;
    int sample_count = 16, erase_count = 16;
    add_common(sample_cmd, sample_common);
    sample_cmd->add_option("--prompt", sample_prompt, "user concept (default: scenario binding)");
    sample_cmd->add_option("-n,--count", sample_count, "samples per prompt");
    add_common(erase_cmd, erase_common);
    add_spec_opts(erase_cmd, erase_specs);
    erase_cmd->add_option("--prompt", erase_prompt, "user concept (default: scenario binding)");
    erase_cmd->add_option("-n,--count", erase_count, "samples per prompt");

    auto* prep_cmd = app.add_subcommand("preprocess", "build a delta table from M runs");
    CommonOpts prep_common;
    SpecOpts prep_specs;
    int prep_m = 4;
    std::vector<std::string> prep_prompts;
    add_common(prep_cmd, prep_common);
    add_spec_opts(prep_cmd, prep_specs, false);
    prep_cmd->add_option("--m", prep_m, "number of preprocessing runs");
    prep_cmd->add_option("--prompt", prep_prompts, "prompts to cycle (default: erasure concept)");

    auto* edit_cmd = app.add_subcommand("edit", "FlowEdit-style editing with erasure");
    CommonOpts edit_common;
    SpecOpts edit_specs;
    std::string edit_source, edit_target, edit_source_point;
    int edit_count = 16, edit_nmin = -1, edit_nmax = -1;
    add_common(edit_cmd, edit_common);
    add_spec_opts(edit_cmd, edit_specs, false);
    edit_cmd->add_option("--source", edit_source, "source concept (default: scenario binding)");
    edit_cmd->add_option("--target", edit_target, "target concept (default: scenario binding)");
    edit_cmd->add_option("--source-point", edit_source_point,
                         "explicit source point 'x,y,...' (default: sample the source concept)");
    edit_cmd->add_option("--nmin", edit_nmin, "lower bound of the active range");
    edit_cmd->add_option("--nmax", edit_nmax, "upper bound of the active range (default 24T/28)");
    edit_cmd->add_option("-n,--count", edit_count, "number of edits");

    auto* eval_cmd = app.add_subcommand("eval", "UA / IRA metrics");
    CommonOpts eval_common;
    SpecOpts eval_specs;
    std::vector<std::string> eval_erased, eval_retained;
    int eval_count = 100;
    add_common(eval_cmd, eval_common);
    add_spec_opts(eval_cmd, eval_specs);
    eval_cmd->add_option("--erased", eval_erased, "prompts scored as UA (default: erasure binding)");
    eval_cmd->add_option("--retained", eval_retained,
                         "prompts scored as IRA (default: remaining concepts)");
    eval_cmd->add_option("-n,--count", eval_count, "samples per prompt");

    auto* trace_cmd = app.add_subcommand("trace", "four-run shared-noise PCA trajectory study");
    CommonOpts trace_common;
    SpecOpts trace_specs;
    add_common(trace_cmd, trace_common);
    add_spec_opts(trace_cmd, trace_specs, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*scenario_cmd) return cmd_scenario(preset, scenario_in, scenario_out);

        if (*train_cmd) {
            LoadedRun run = load_run(train_common, nullptr, false);
            train_cfg.seed = train_common.seed;
            train_cfg.use_momentum = optimizer == "momentum";
            if (optimizer != "momentum" && optimizer != "sgd")
                throw ConfigError("unknown optimizer: " + optimizer);
            try {
                train_cfg.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            run.resolved["train_steps"] = std::to_string(train_cfg.steps);
            run.resolved["batch"] = std::to_string(train_cfg.batch);
            run.resolved["lr"] = format_double(train_cfg.lr);
            run.resolved["optimizer"] = optimizer;
            TrainResult result = train(run.scenario.world, train_cfg);
            emit(train_common.out, "train", run, train_common.seed,
                 {{"checkpoint.json", checkpoint_to_json(result.field, train_cfg)}});
            return 0;
        }

        if (*sample_cmd || *erase_cmd) {
            bool is_erase = static_cast<bool>(*erase_cmd);
            const CommonOpts& common = is_erase ? erase_common : sample_common;
            LoadedRun run = load_run(common, is_erase ? &erase_specs : nullptr);
            ConceptId prompt =
                bound_concept(run.scenario, is_erase ? erase_prompt : sample_prompt, "user");
            if (!run.scenario.world.has_concept(prompt) && prompt != kNullConcept)
                throw ConfigError("unknown prompt: " + prompt);
            int count = is_erase ? erase_count : sample_count;
            if (count < 1) throw ConfigError("--count must be >= 1");
            run.resolved["prompt"] = prompt;
            run.resolved["count"] = std::to_string(count);
            auto samples = batch_generate(*run.field, {prompt}, count, run.cfg, common.seed);
            emit(common.out, is_erase ? "erase" : "sample", run, common.seed,
                 {{"samples.csv", samples_to_csv(samples)}});
            return 0;
        }

        if (*prep_cmd) {
            LoadedRun run = load_run(prep_common, &prep_specs);
            if (run.cfg.specs.size() != 1)
                throw ConfigError("preprocess builds a table for exactly one erase/anchor pair");
            std::vector<ConceptId> prompts = prep_prompts;
            if (prompts.empty()) prompts = {run.cfg.specs[0].erasure};
            for (const ConceptId& p : prompts)
                if (!run.scenario.world.has_concept(p) && p != kNullConcept)
                    throw ConfigError("unknown prompt: " + p);
            if (prep_m < 1) throw ConfigError("--m must be >= 1");
            run.resolved["m"] = std::to_string(prep_m);
            RngStream base(prep_common.seed, fnv1a64("preprocess"));
            DeltaTable table = build_delta_table(*run.field, run.cfg.specs[0], prompts, prep_m,
                                                 run.cfg.steps, run.cfg.guidance, base);
            emit(prep_common.out, "preprocess", run, prep_common.seed,
                 {{"delta_table.json", delta_table_to_json(table)}});
            return 0;
        }

        if (*edit_cmd) {
            LoadedRun run = load_run(edit_common, &edit_specs);
            EditConfig cfg;
            cfg.c_src = bound_concept(run.scenario, edit_source, "source");
            cfg.c_tar = bound_concept(run.scenario, edit_target, "target");
            cfg.specs = run.cfg.specs;
            cfg.steps = run.cfg.steps;
            cfg.guidance = run.cfg.guidance;
            cfg.n_max = edit_nmax >= 0 ? edit_nmax
                                       : static_cast<int>(std::lround(24.0 * cfg.steps / 28.0));
            cfg.n_min = edit_nmin >= 0 ? edit_nmin : 0;
            if (edit_count < 1) throw ConfigError("--count must be >= 1");
            run.resolved["source"] = cfg.c_src;
            run.resolved["target"] = cfg.c_tar;
            run.resolved["n_min"] = std::to_string(cfg.n_min);
            run.resolved["n_max"] = std::to_string(cfg.n_max);
            run.resolved["count"] = std::to_string(edit_count);

            Vec fixed_point;
            if (!edit_source_point.empty()) {
                std::stringstream ss(edit_source_point);
                std::string tok;
                while (std::getline(ss, tok, ',')) fixed_point.push_back(std::stod(tok));
                if (static_cast<int>(fixed_point.size()) != run.scenario.world.dim)
                    throw ConfigError("--source-point dimension mismatch");
                run.resolved["source_point"] = edit_source_point;
            }

            std::vector<std::pair<ConceptId, Vec>> outs;
            std::string trajectory_csv;
            for (int j = 0; j < edit_count; ++j) {
                EditConfig one = cfg;
                if (fixed_point.empty()) {
                    RngStream src_rng(edit_common.seed, mix64(fnv1a64("edit-source"), j));
                    one.x_src = sample_data(run.scenario.world, one.c_src, src_rng);
                } else {
                    one.x_src = fixed_point;
                }
                one.record_trajectory = j == 0;
                RngStream rng(edit_common.seed, mix64(fnv1a64("edit"), j));
                GenResult res = edit(*run.field, one, rng);
                outs.emplace_back(one.c_tar, res.sample);
                if (j == 0) trajectory_csv = trajectory_to_csv("edit-0", res.trajectory, true);
            }
            emit(edit_common.out, "edit", run, edit_common.seed,
                 {{"edits.csv", samples_to_csv(outs)}, {"trajectory.csv", trajectory_csv}});
            return 0;
        }

        if (*eval_cmd) {
            LoadedRun run = load_run(eval_common, &eval_specs);
            std::vector<ConceptId> erased = eval_erased, retained = eval_retained;
            if (erased.empty())
                for (const ErasureSpec& s : run.cfg.specs) erased.push_back(s.erasure);
            if (erased.empty()) throw ConfigError("no --erased prompts and no specs to infer them");
            if (retained.empty()) {
                for (const ConceptId& c : run.scenario.world.concepts) {
                    bool used = std::count(erased.begin(), erased.end(), c) > 0;
                    for (const ErasureSpec& s : run.cfg.specs) used |= (s.anchor == c);
                    if (!used) retained.push_back(c);
                }
            }
            if (eval_count < 1) throw ConfigError("--count must be >= 1");
            for (size_t i = 0; i < erased.size(); ++i)
                run.resolved["erased." + std::to_string(i)] = erased[i];
            for (size_t i = 0; i < retained.size(); ++i)
                run.resolved["retained." + std::to_string(i)] = retained[i];
            run.resolved["count"] = std::to_string(eval_count);
            ErasureReport report = ua_ira(run.scenario.world, *run.field, run.cfg, erased,
                                          retained, eval_count, eval_common.seed);
            emit(eval_common.out, "eval", run, eval_common.seed,
                 {{"report.json", report_to_json(report)}});
            return 0;
        }

        if (*trace_cmd) {
            SpecOpts with_mode = trace_specs;
            with_mode.mode = "dve";
            LoadedRun run = load_run(trace_common, &with_mode);
            if (run.cfg.specs.size() != 1)
                throw ConfigError("trace uses exactly one erase/anchor pair");
            SampleConfig base = run.cfg;
            base.mode = SampleMode::kPlain;
            base.specs.clear();
            TrajectoryStudy study =
                trajectory_study(*run.field, run.cfg.specs[0], base, trace_common.seed);
            std::vector<std::pair<std::string, std::string>> artifacts;
            for (size_t i = 0; i < study.labels.size(); ++i)
                artifacts.emplace_back("traj_" + study.labels[i] + ".csv",
                                       trajectory_to_csv(study.labels[i], study.trajectories[i]));
            artifacts.emplace_back("pca.csv", study_to_pca_csv(study));
            emit(trace_common.out, "trace", run, trace_common.seed, artifacts);
            return 0;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure at step " << e.step_index << ": " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
