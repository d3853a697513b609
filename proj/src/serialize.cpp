#include "dve/serialize.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dve/errors.hpp"

namespace dve {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw ConfigError("failed writing file: " + path);
}

std::string file_hash_hex(const std::string& path) {
    std::string bytes = read_file(path);
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx",
             static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return std::string(buf);
}

namespace {

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown field \"" + key + "\"");
    for (const std::string& key : required)
        if (!obj.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
}

Vec to_vec(const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ConfigError(where + ": expected an array");
    Vec v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
        if (!x.is_number()) throw ConfigError(where + ": expected numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

}  // namespace

std::string scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["format"] = "scenario-v1";
    j["dim"] = spec.world.dim;
    j["components"] = json::array();
    for (const GaussianComponent& g : spec.world.components) {
        json c;
        c["mean"] = g.mean;
        c["diag_cov"] = g.diag_cov;
        c["weight"] = g.weight;
        c["tags"] = g.tags;
        j["components"].push_back(c);
    }
    j["concepts"] = spec.world.concepts;
    j["bindings"] = spec.bindings;
    j["defaults"] = {{"gamma", spec.defaults.gamma},
                     {"tau", spec.defaults.tau},
                     {"n_star", spec.defaults.n_star},
                     {"steps", spec.defaults.steps},
                     {"guidance", spec.defaults.guidance}};
    return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json(const std::string& text) {
    json j = parse_json(text);
    require_keys(j, {"format", "dim", "components", "concepts", "bindings", "defaults"},
                 {"format", "dim", "components", "concepts"}, "scenario");
    if (j["format"] != "scenario-v1")
        throw ConfigError("scenario: unknown format version " + j["format"].dump());

    ScenarioSpec spec;
    spec.world.dim = j["dim"].get<int>();
    for (const auto& c : j["components"]) {
        require_keys(c, {"mean", "diag_cov", "weight", "tags"},
                     {"mean", "diag_cov", "weight", "tags"}, "scenario component");
        GaussianComponent g;
        g.mean = to_vec(c["mean"], "component mean");
        g.diag_cov = to_vec(c["diag_cov"], "component diag_cov");
        g.weight = c["weight"].get<double>();
        g.tags = c["tags"].get<std::vector<std::string>>();
        spec.world.components.push_back(std::move(g));
    }
    spec.world.concepts = j["concepts"].get<std::vector<std::string>>();
    if (j.contains("bindings")) {
        require_keys(j["bindings"], {"user", "erasure", "anchor", "source", "target"}, {},
                     "scenario bindings");
        spec.bindings = j["bindings"].get<std::map<std::string, ConceptId>>();
    }
    if (j.contains("defaults")) {
        require_keys(j["defaults"], {"gamma", "tau", "n_star", "steps", "guidance"}, {},
                     "scenario defaults");
        const json& d = j["defaults"];
        if (d.contains("gamma")) spec.defaults.gamma = d["gamma"].get<double>();
        if (d.contains("tau")) spec.defaults.tau = d["tau"].get<double>();
        if (d.contains("n_star")) spec.defaults.n_star = d["n_star"].get<int>();
        if (d.contains("steps")) spec.defaults.steps = d["steps"].get<int>();
        if (d.contains("guidance")) spec.defaults.guidance = d["guidance"].get<double>();
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return spec;
}

std::string checkpoint_to_json(const MlpField& field, const TrainConfig& cfg) {
    json j;
    j["format"] = "mlpfield-v1";
    j["dim"] = field.dim();
    j["layers"] = json::array();
    for (const MlpField::Layer& l : field.layers()) {
        json lj;
        lj["rows"] = l.w.rows;
        lj["cols"] = l.w.cols;
        lj["weights"] = l.w.data;  // row-major
        lj["bias"] = l.b;
        j["layers"].push_back(lj);
    }
    json emb = json::object();
    for (int r = 0; r < field.embeddings().rows; ++r) {
        Vec row(field.embed_dim());
        for (int c = 0; c < field.embed_dim(); ++c) row[c] = field.embeddings().at(r, c);
        emb[field.embedding_order()[r]] = row;
    }
    j["embeddings"] = emb;
    j["embedding_order"] = field.embedding_order();
    j["train_config"] = {{"steps", cfg.steps},       {"batch", cfg.batch},
                         {"lr", cfg.lr},             {"seed", cfg.seed},
                         {"use_momentum", cfg.use_momentum}, {"momentum", cfg.momentum},
                         {"hidden", cfg.hidden},     {"embed_dim", cfg.embed_dim}};
    return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
    json j = parse_json(text);
    require_keys(j, {"format", "dim", "layers", "embeddings", "embedding_order", "train_config"},
                 {"format", "dim", "layers", "embeddings", "embedding_order", "train_config"},
                 "checkpoint");
    if (j["format"] != "mlpfield-v1")
        throw ConfigError("checkpoint: unknown format version " + j["format"].dump());

    int dim = j["dim"].get<int>();
    std::vector<MlpField::Layer> layers;
    for (const auto& lj : j["layers"]) {
        require_keys(lj, {"rows", "cols", "weights", "bias"}, {"rows", "cols", "weights", "bias"},
                     "checkpoint layer");
        MlpField::Layer l;
        l.w = Mat(lj["rows"].get<int>(), lj["cols"].get<int>());
        Vec w = to_vec(lj["weights"], "layer weights");
        if (w.size() != l.w.data.size()) throw ConfigError("checkpoint: weight shape mismatch");
        l.w.data = std::move(w);
        l.b = to_vec(lj["bias"], "layer bias");
        if (static_cast<int>(l.b.size()) != l.w.rows)
            throw ConfigError("checkpoint: bias shape mismatch");
        layers.push_back(std::move(l));
    }

    std::vector<ConceptId> order = j["embedding_order"].get<std::vector<std::string>>();
    if (order.empty()) throw ConfigError("checkpoint: empty embedding order");
    const json& emb = j["embeddings"];
    Vec first = to_vec(emb.at(order[0]), "embedding row");
    Mat table(static_cast<int>(order.size()), static_cast<int>(first.size()));
    for (size_t r = 0; r < order.size(); ++r) {
        if (!emb.contains(order[r]))
            throw ConfigError("checkpoint: missing embedding for " + order[r]);
        Vec row = to_vec(emb.at(order[r]), "embedding row");
        if (row.size() != first.size()) throw ConfigError("checkpoint: ragged embedding table");
        for (size_t c = 0; c < row.size(); ++c) table.at(static_cast<int>(r), static_cast<int>(c)) = row[c];
    }

    Checkpoint ckpt{MlpField::from_parts(dim, std::move(layers), std::move(table), order), {}};
    const json& tc = j["train_config"];
    require_keys(tc, {"steps", "batch", "lr", "seed", "use_momentum", "momentum", "hidden", "embed_dim"},
                 {}, "checkpoint train_config");
    if (tc.contains("steps")) ckpt.config.steps = tc["steps"].get<int>();
    if (tc.contains("batch")) ckpt.config.batch = tc["batch"].get<int>();
    if (tc.contains("lr")) ckpt.config.lr = tc["lr"].get<double>();
    if (tc.contains("seed")) ckpt.config.seed = tc["seed"].get<uint64_t>();
    if (tc.contains("use_momentum")) ckpt.config.use_momentum = tc["use_momentum"].get<bool>();
    if (tc.contains("momentum")) ckpt.config.momentum = tc["momentum"].get<double>();
    if (tc.contains("hidden")) ckpt.config.hidden = tc["hidden"].get<std::vector<int>>();
    if (tc.contains("embed_dim")) ckpt.config.embed_dim = tc["embed_dim"].get<int>();
    return ckpt;
}

std::string delta_table_to_json(const DeltaTable& table) {
    json j;
    j["format"] = "deltatable-v1";
    j["steps"] = table.steps;
    j["dim"] = table.dim;
    j["vectors"] = table.vectors;
    j["provenance"] = {{"M", table.provenance.m},
                       {"seed", table.provenance.seed},
                       {"prompts", table.provenance.prompts}};
    return j.dump(2) + "\n";
}

DeltaTable delta_table_from_json(const std::string& text) {
    json j = parse_json(text);
    require_keys(j, {"format", "steps", "dim", "vectors", "provenance"},
                 {"format", "steps", "dim", "vectors", "provenance"}, "delta table");
    if (j["format"] != "deltatable-v1")
        throw ConfigError("delta table: unknown format version " + j["format"].dump());
    DeltaTable table;
    table.steps = j["steps"].get<int>();
    table.dim = j["dim"].get<int>();
    for (const auto& v : j["vectors"]) table.vectors.push_back(to_vec(v, "delta vector"));
    const json& p = j["provenance"];
    require_keys(p, {"M", "seed", "prompts"}, {"M", "seed", "prompts"}, "delta table provenance");
    table.provenance.m = p["M"].get<int>();
    table.provenance.seed = p["seed"].get<uint64_t>();
    table.provenance.prompts = p["prompts"].get<std::vector<std::string>>();
    try {
        table.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("delta table: ") + e.what());
    }
    return table;
}

std::string report_to_json(const ErasureReport& report) {
    json j;
    j["format"] = "erasure-report-v1";
    j["ua"] = report.ua;
    j["ira"] = report.ira;
    j["ua_mean"] = report.ua_mean;
    j["ira_mean"] = report.ira_mean;
    j["activation_rate"] = report.activation_rate;
    j["n_per_prompt"] = report.n_per_prompt;
    j["mode"] = report.mode;
    j["seed"] = report.seed;
    return j.dump(2) + "\n";
}

std::string diagnostic_to_json(const SubspaceDiagnostic& diag) {
    json j;
    j["format"] = "subspace-diagnostic-v1";
    j["rank"] = diag.rank;
    j["singular_values"] = diag.singular_values;
    j["energy_fraction"] = diag.energy_fraction;
    j["nullspace_drive"] = diag.nullspace_drive;
    j["max_probe_residual"] = diag.max_probe_residual;
    j["delta_degenerate"] = diag.delta_degenerate;
    j["jacobian_degenerate"] = diag.jacobian_degenerate;
    return j.dump(2) + "\n";
}

namespace {

void append_step_row(std::string& out, const std::string& run_id, const TrajectoryStep& st,
                     bool with_phase) {
    out += run_id;
    out += ',' + std::to_string(st.step) + ',' + format_double(st.t);
    for (double x : st.z) out += ',' + format_double(x);
    double score_min = 0.0;
    bool has = false;
    for (const CorrectionEvent& ev : st.events) {
        if (!ev.has_score) continue;
        score_min = has ? std::min(score_min, ev.score) : ev.score;
        has = true;
    }
    out += ',';
    if (has) out += format_double(score_min);
    bool applied = false;
    for (const CorrectionEvent& ev : st.events) applied |= ev.applied;
    out += ',' + std::string(applied ? "1" : "0");
    out += ',' + format_double(st.correction_norm);
    if (with_phase) out += ',' + std::to_string(st.phase);
    out += '\n';
}

}  // namespace

std::string trajectory_to_csv(const std::string& run_id, const Trajectory& trajectory,
                              bool with_phase) {
    const int d = static_cast<int>(trajectory.terminal.size());
    std::string out = "run_id,step,t";
    for (int i = 0; i < d; ++i) out += ",z_" + std::to_string(i);
    out += ",score_min,applied,corr_norm";
    if (with_phase) out += ",phase";
    out += '\n';

    for (const TrajectoryStep& st : trajectory.steps) append_step_row(out, run_id, st, with_phase);

    // Terminal row: no velocity was evaluated at t = 0.
    out += run_id + ",0,0";
    for (double x : trajectory.terminal) out += ',' + format_double(x);
    out += ",,0,0";
    if (with_phase) {
        int phase = trajectory.steps.empty() ? 1 : trajectory.steps.back().phase;
        out += ',' + std::to_string(phase);
    }
    out += '\n';
    return out;
}

std::string samples_to_csv(const std::vector<std::pair<ConceptId, Vec>>& samples) {
    int d = samples.empty() ? 0 : static_cast<int>(samples[0].second.size());
    std::string out = "prompt,index";
    for (int i = 0; i < d; ++i) out += ",z_" + std::to_string(i);
    out += '\n';
    std::map<ConceptId, int> counter;
    for (const auto& [prompt, z] : samples) {
        out += prompt + ',' + std::to_string(counter[prompt]++);
        for (double x : z) out += ',' + format_double(x);
        out += '\n';
    }
    return out;
}

std::string study_to_pca_csv(const TrajectoryStudy& study) {
    std::string out = "run_label,step,pc1,pc2,dpc1,dpc2\n";
    for (const TrajectoryStudyRow& row : study.rows) {
        out += row.run_label + ',' + std::to_string(row.step) + ',' + format_double(row.pc1) +
               ',' + format_double(row.pc2) + ',';
        if (row.has_delta) out += format_double(row.dpc1);
        out += ',';
        if (row.has_delta) out += format_double(row.dpc2);
        out += '\n';
    }
    return out;
}

std::string manifest_to_json(const RunManifest& m) {
    json j;
    j["format"] = "manifest-v1";
    j["command"] = m.command;
    j["resolved_config"] = m.resolved_config;
    j["input_hashes"] = m.input_hashes;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

}  // namespace dve
