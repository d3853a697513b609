#include "dve/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dve {

namespace {
constexpr double kTrainTMin = 1e-4;  // matches the analytic-field clamp
}

void TrainConfig::validate() const {
    if (steps < 0) throw std::invalid_argument("TrainConfig: steps must be >= 0");
    if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: learning rate must be > 0");
    if (embed_dim < 1) throw std::invalid_argument("TrainConfig: embed_dim must be >= 1");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("TrainConfig: hidden widths must be >= 1");
}

MlpField MlpField::init(int dim, const std::vector<ConceptId>& concepts, const TrainConfig& cfg) {
    cfg.validate();
    if (dim < 1) throw std::invalid_argument("MlpField: dim must be >= 1");

    MlpField f;
    f.dim_ = dim;
    f.embed_order_ = concepts;
    f.embed_order_.push_back(kNullConcept);
    for (size_t i = 0; i < f.embed_order_.size(); ++i)
        f.embed_index_[f.embed_order_[i]] = static_cast<int>(i);

    RngStream rng(cfg.seed, fnv1a64("mlp-init"));

    std::vector<int> widths;
    widths.push_back(dim + 1 + cfg.embed_dim);
    for (int h : cfg.hidden) widths.push_back(h);
    widths.push_back(dim);

    for (size_t l = 0; l + 1 < widths.size(); ++l) {
        Layer layer;
        layer.w = Mat(widths[l + 1], widths[l]);
        layer.b = Vec(widths[l + 1], 0.0);
        double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
        for (double& x : layer.w.data) x = bound * (2.0 * rng.uniform01() - 1.0);
        f.layers_.push_back(std::move(layer));
    }

    // Random unit rows, Gram-Schmidt against earlier rows while room remains.
    int n_embed = static_cast<int>(f.embed_order_.size());
    f.embeddings_ = Mat(n_embed, cfg.embed_dim);
    for (int r = 0; r < n_embed; ++r) {
        Vec row = standard_normal(rng, cfg.embed_dim);
        for (int p = 0; p < r && p < cfg.embed_dim; ++p) {
            Vec prev(cfg.embed_dim);
            for (int j = 0; j < cfg.embed_dim; ++j) prev[j] = f.embeddings_.at(p, j);
            axpy(-dot(row, prev), prev, row);
        }
        double rn = norm(row);
        if (rn < 1e-12) rn = 1.0;
        for (int j = 0; j < cfg.embed_dim; ++j) f.embeddings_.at(r, j) = row[j] / rn;
    }
    return f;
}

MlpField MlpField::from_parts(int dim, std::vector<Layer> layers, Mat embeddings,
                              std::vector<ConceptId> embed_order) {
    MlpField f;
    f.dim_ = dim;
    f.layers_ = std::move(layers);
    f.embeddings_ = std::move(embeddings);
    f.embed_order_ = std::move(embed_order);
    if (f.embeddings_.rows != static_cast<int>(f.embed_order_.size()))
        throw std::invalid_argument("MlpField: embedding table / order size mismatch");
    for (size_t i = 0; i < f.embed_order_.size(); ++i)
        f.embed_index_[f.embed_order_[i]] = static_cast<int>(i);
    if (f.embed_index_.find(kNullConcept) == f.embed_index_.end())
        throw std::invalid_argument("MlpField: embedding table misses \"null\"");
    return f;
}

int MlpField::embedding_row(const ConceptId& c) const {
    auto it = embed_index_.find(c);
    if (it == embed_index_.end())
        throw std::invalid_argument("MlpField: unknown concept " + c);
    return it->second;
}

Vec MlpField::velocity(const Vec& z, double t, const ConceptId& c) const {
    if (static_cast<int>(z.size()) != dim_)
        throw std::invalid_argument("MlpField: z dimension mismatch");
    int row = embedding_row(c);

    Vec a(dim_ + 1 + embeddings_.cols);
    for (int i = 0; i < dim_; ++i) a[i] = z[i];
    a[dim_] = t;
    for (int j = 0; j < embeddings_.cols; ++j) a[dim_ + 1 + j] = embeddings_.at(row, j);

    for (size_t l = 0; l < layers_.size(); ++l) {
        a = layers_[l].w.matvec(a);
        axpy(1.0, layers_[l].b, a);
        if (l + 1 < layers_.size())
            for (double& x : a) x = std::tanh(x);
    }
    return a;
}

size_t MlpField::param_count() const {
    size_t n = 0;
    for (const Layer& l : layers_) n += l.w.data.size() + l.b.size();
    return n + embeddings_.data.size();
}

double MlpField::get_param(size_t i) const {
    for (const Layer& l : layers_) {
        if (i < l.w.data.size()) return l.w.data[i];
        i -= l.w.data.size();
        if (i < l.b.size()) return l.b[i];
        i -= l.b.size();
    }
    return embeddings_.data.at(i);
}

void MlpField::set_param(size_t i, double v) {
    for (Layer& l : layers_) {
        if (i < l.w.data.size()) {
            l.w.data[i] = v;
            return;
        }
        i -= l.w.data.size();
        if (i < l.b.size()) {
            l.b[i] = v;
            return;
        }
        i -= l.b.size();
    }
    embeddings_.data.at(i) = v;
}

size_t Gradients::param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.data.size() + l.b.size();
    return n + embeddings.data.size();
}

double Gradients::get_param(size_t i) const {
    for (const auto& l : layers) {
        if (i < l.w.data.size()) return l.w.data[i];
        i -= l.w.data.size();
        if (i < l.b.size()) return l.b[i];
        i -= l.b.size();
    }
    return embeddings.data.at(i);
}

void Gradients::scale(double a) {
    for (auto& l : layers) {
        for (double& x : l.w.data) x *= a;
        for (double& x : l.b) x *= a;
    }
    for (double& x : embeddings.data) x *= a;
}

std::pair<double, Gradients> rectified_flow_loss_grad(const MlpField& field,
                                                      const std::vector<BatchItem>& batch) {
    if (batch.empty()) throw std::invalid_argument("rectified_flow_loss_grad: empty batch");
    const int d = field.dim();
    const int e = field.embed_dim();
    const auto& layers = field.layers();
    const size_t L = layers.size();

    Gradients g;
    g.layers.resize(L);
    for (size_t l = 0; l < L; ++l) {
        g.layers[l].w = Mat(layers[l].w.rows, layers[l].w.cols);
        g.layers[l].b = Vec(layers[l].b.size(), 0.0);
    }
    g.embeddings = Mat(field.embeddings().rows, e);

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;

    std::vector<Vec> act(L + 1);  // act[0] is the input, act[L] the output
    for (const BatchItem& item : batch) {
        if (static_cast<int>(item.x0.size()) != d || static_cast<int>(item.x1.size()) != d)
            throw std::invalid_argument("rectified_flow_loss_grad: sample dimension mismatch");
        if (item.t < 0.0 || item.t > 1.0)
            throw std::invalid_argument("rectified_flow_loss_grad: t outside [0,1]");
        int row = field.embedding_row(item.c);

        Vec& input = act[0];
        input.assign(d + 1 + e, 0.0);
        for (int i = 0; i < d; ++i) input[i] = (1.0 - item.t) * item.x0[i] + item.t * item.x1[i];
        input[d] = item.t;
        for (int j = 0; j < e; ++j) input[d + 1 + j] = field.embeddings().at(row, j);

        for (size_t l = 0; l < L; ++l) {
            act[l + 1] = layers[l].w.matvec(act[l]);
            axpy(1.0, layers[l].b, act[l + 1]);
            if (l + 1 < L)
                for (double& x : act[l + 1]) x = std::tanh(x);
        }

        Vec delta(d);  // dLoss/d out
        for (int i = 0; i < d; ++i) {
            double r = act[L][i] - (item.x0[i] - item.x1[i]);
            loss += inv_b * r * r;
            delta[i] = 2.0 * inv_b * r;
        }

        for (size_t l = L; l-- > 0;) {
            const Mat& w = layers[l].w;
            for (int i = 0; i < w.rows; ++i) {
                g.layers[l].b[i] += delta[i];
                for (int j = 0; j < w.cols; ++j) g.layers[l].w.at(i, j) += delta[i] * act[l][j];
            }
            Vec prev(w.cols, 0.0);
            for (int i = 0; i < w.rows; ++i)
                for (int j = 0; j < w.cols; ++j) prev[j] += w.at(i, j) * delta[i];
            if (l > 0)
                for (int j = 0; j < w.cols; ++j) prev[j] *= 1.0 - act[l][j] * act[l][j];
            delta = std::move(prev);
        }
        // delta now holds dLoss/d input; its embedding slice accumulates to the row of c.
        for (int j = 0; j < e; ++j) g.embeddings.at(row, j) += delta[d + 1 + j];
    }
    return {loss, std::move(g)};
}

TrainResult train(const ConceptWorld& world, const TrainConfig& cfg) {
    cfg.validate();
    world.validate();

    TrainResult out{MlpField::init(world.dim, world.concepts, cfg), {}};
    MlpField& field = out.field;
    if (cfg.steps == 0) return out;

    RngStream data_rng(cfg.seed, fnv1a64("mlp-train-data"));
    std::vector<ConceptId> conditions = world.concepts;
    conditions.push_back(kNullConcept);

    Gradients vel;  // momentum buffer, zero-initialized to parameter shapes
    vel.layers.resize(field.layers().size());
    for (size_t l = 0; l < field.layers().size(); ++l) {
        vel.layers[l].w = Mat(field.layers()[l].w.rows, field.layers()[l].w.cols);
        vel.layers[l].b = Vec(field.layers()[l].b.size(), 0.0);
    }
    vel.embeddings = Mat(field.embeddings().rows, field.embeddings().cols);

    Vec noise_mean(world.dim, 0.0), noise_cov(world.dim, 1.0);
    std::vector<BatchItem> batch(cfg.batch);
    out.loss_history.reserve(cfg.steps);

    for (int step = 0; step < cfg.steps; ++step) {
        for (BatchItem& item : batch) {
            item.c = conditions[data_rng.below(conditions.size())];
            item.x0 = sample_data(world, item.c, data_rng);
            item.x1 = gaussian_sample(data_rng, noise_mean, noise_cov);
            item.t = kTrainTMin + (1.0 - kTrainTMin) * data_rng.uniform01();
        }
        auto [loss, grads] = rectified_flow_loss_grad(field, batch);
        out.loss_history.push_back(loss);

        const double beta = cfg.use_momentum ? cfg.momentum : 0.0;
        for (size_t l = 0; l < grads.layers.size(); ++l) {
            MlpField::Layer& layer = field.layers()[l];
            for (size_t i = 0; i < layer.w.data.size(); ++i) {
                vel.layers[l].w.data[i] = beta * vel.layers[l].w.data[i] - cfg.lr * grads.layers[l].w.data[i];
                layer.w.data[i] += vel.layers[l].w.data[i];
            }
            for (size_t i = 0; i < layer.b.size(); ++i) {
                vel.layers[l].b[i] = beta * vel.layers[l].b[i] - cfg.lr * grads.layers[l].b[i];
                layer.b[i] += vel.layers[l].b[i];
            }
        }
        for (size_t i = 0; i < field.embeddings().data.size(); ++i) {
            vel.embeddings.data[i] = beta * vel.embeddings.data[i] - cfg.lr * grads.embeddings.data[i];
            field.embeddings().data[i] += vel.embeddings.data[i];
        }
    }
    return out;
}

}  // namespace dve
