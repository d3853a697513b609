#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dve/field.hpp"
#include "dve/gmm.hpp"
#include "dve/numerics.hpp"

namespace dve {

struct TrainConfig {
    int steps = 20000;
    int batch = 64;
    double lr = 0.01;
    uint64_t seed = 1;
    bool use_momentum = true;  // plain SGD otherwise
    double momentum = 0.9;
    std::vector<int> hidden = {128, 128};
    int embed_dim = 8;

    void validate() const;
};

/// tanh MLP velocity field on concatenated (z, t, embed(c)) with a learned
/// per-concept embedding table (including "null"). Deterministic forward pass.
class MlpField : public VelocityField {
  public:
    struct Layer {
        Mat w;  // out x in
        Vec b;
    };

    /// Seeded init: weights U(-1/sqrt(fan_in), +1/sqrt(fan_in)), embeddings
    /// orthogonal-ish random unit rows.
    static MlpField init(int dim, const std::vector<ConceptId>& concepts, const TrainConfig& cfg);

    int dim() const override { return dim_; }
    Vec velocity(const Vec& z, double t, const ConceptId& c) const override;

    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    const Mat& embeddings() const { return embeddings_; }
    Mat& embeddings() { return embeddings_; }
    const std::vector<ConceptId>& embedding_order() const { return embed_order_; }
    int embed_dim() const { return embeddings_.cols; }
    int embedding_row(const ConceptId& c) const;

    // Flat parameter view (layer weights, biases, then embeddings) for
    // optimizers and finite-difference checks.
    size_t param_count() const;
    double get_param(size_t i) const;
    void set_param(size_t i, double v);

    /// Construct from explicit shapes (checkpoint loading).
    static MlpField from_parts(int dim, std::vector<Layer> layers, Mat embeddings,
                               std::vector<ConceptId> embed_order);

  private:
    MlpField() = default;
    int dim_ = 0;
    std::vector<Layer> layers_;
    Mat embeddings_;  // row per concept in embed_order_
    std::vector<ConceptId> embed_order_;
    std::map<ConceptId, int> embed_index_;
};

/// Gradients shaped like the field's parameters.
struct Gradients {
    std::vector<MlpField::Layer> layers;
    Mat embeddings;

    size_t param_count() const;
    double get_param(size_t i) const;
    void scale(double a);
};

struct BatchItem {
    Vec x0;
    Vec x1;
    double t = 0.5;
    ConceptId c;
};

/// Mean squared regression loss || f(z_t, t, c) - (x0 - x1) ||^2 over the
/// batch with z_t = (1-t) x0 + t x1, plus reverse-mode gradients for every
/// parameter (embedding rows included). Empty batch is an error.
std::pair<double, Gradients> rectified_flow_loss_grad(const MlpField& field,
                                                      const std::vector<BatchItem>& batch);

struct TrainResult {
    MlpField field;
    std::vector<double> loss_history;  // pre-update batch loss per step
};

/// Minibatch SGD on the regression objective; per-item draws are
/// (c uniform over concepts + null, x0 ~ data | c, x1 ~ N(0,I), t ~ U[1e-4, 1]).
TrainResult train(const ConceptWorld& world, const TrainConfig& cfg);

}  // namespace dve
