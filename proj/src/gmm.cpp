#include "dve/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dve {

namespace {

constexpr double kTMin = 1e-4;  // clamp inside analytic_velocity; Euler never hits t = 0

double log_diag_gaussian(const Vec& x, const Vec& mean, const Vec& diag_cov) {
    double lp = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - mean[i];
        lp += -0.5 * (d * d / diag_cov[i] + std::log(2.0 * M_PI * diag_cov[i]));
    }
    return lp;
}

// Renormalized weights of the components tagged c.
std::vector<double> conditional_weights(const ConceptWorld& world, const std::vector<int>& idx) {
    double total = 0.0;
    for (int k : idx) total += world.components[k].weight;
    std::vector<double> w(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) w[i] = world.components[idx[i]].weight / total;
    return w;
}

// log p(x | c) for the renormalized sub-mixture.
double log_conditional_density(const ConceptWorld& world, const Vec& x, const ConceptId& c) {
    std::vector<int> idx = world.tagged(c);
    std::vector<double> w = conditional_weights(world, idx);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> lp(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) {
        const GaussianComponent& g = world.components[idx[i]];
        lp[i] = std::log(w[i]) + log_diag_gaussian(x, g.mean, g.diag_cov);
        best = std::max(best, lp[i]);
    }
    double acc = 0.0;
    for (double v : lp) acc += std::exp(v - best);
    return best + std::log(acc);
}

}  // namespace

void ConceptWorld::validate() const {
    if (dim < 1) throw std::invalid_argument("ConceptWorld: dim must be >= 1");
    if (components.empty()) throw std::invalid_argument("ConceptWorld: no components");
    double wsum = 0.0;
    for (const GaussianComponent& g : components) {
        if (static_cast<int>(g.mean.size()) != dim || static_cast<int>(g.diag_cov.size()) != dim)
            throw std::invalid_argument("ConceptWorld: component dimension mismatch");
        if (!(g.weight > 0.0)) throw std::invalid_argument("ConceptWorld: component weight must be positive");
        if (g.tags.empty()) throw std::invalid_argument("ConceptWorld: component with no tags");
        for (double v : g.diag_cov)
            if (!(v > 0.0)) throw std::invalid_argument("ConceptWorld: nonpositive covariance entry");
        if (!all_finite(g.mean) || !all_finite(g.diag_cov))
            throw std::invalid_argument("ConceptWorld: non-finite component parameters");
        wsum += g.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw std::invalid_argument("ConceptWorld: component weights must sum to 1");
    for (const ConceptId& c : concepts) {
        if (c.empty()) throw std::invalid_argument("ConceptWorld: empty concept name");
        if (c == kNullConcept) throw std::invalid_argument("ConceptWorld: \"null\" is reserved");
        if (std::count(concepts.begin(), concepts.end(), c) != 1)
            throw std::invalid_argument("ConceptWorld: duplicate concept name " + c);
        bool tagged_somewhere = false;
        for (const GaussianComponent& g : components)
            tagged_somewhere |= std::count(g.tags.begin(), g.tags.end(), c) > 0;
        if (!tagged_somewhere)
            throw std::invalid_argument("ConceptWorld: concept " + c + " tags no component");
    }
    for (const GaussianComponent& g : components)
        for (const ConceptId& t : g.tags)
            if (!has_concept(t))
                throw std::invalid_argument("ConceptWorld: component tag " + t + " not declared");
}

bool ConceptWorld::has_concept(const ConceptId& c) const {
    return std::count(concepts.begin(), concepts.end(), c) > 0;
}

std::vector<int> ConceptWorld::tagged(const ConceptId& c) const {
    std::vector<int> idx;
    if (c == kNullConcept) {
        idx.resize(components.size());
        for (size_t k = 0; k < components.size(); ++k) idx[k] = static_cast<int>(k);
        return idx;
    }
    if (!has_concept(c)) throw std::invalid_argument("unknown concept: " + c);
    for (size_t k = 0; k < components.size(); ++k) {
        const auto& tags = components[k].tags;
        if (std::count(tags.begin(), tags.end(), c)) idx.push_back(static_cast<int>(k));
    }
    return idx;
}

void ScenarioSpec::validate() const {
    world.validate();
    for (const auto& [role, c] : bindings) {
        if (!world.has_concept(c) && c != kNullConcept)
            throw std::invalid_argument("ScenarioSpec: binding " + role + " -> unknown concept " + c);
    }
    if (!(defaults.gamma > 0.0)) throw std::invalid_argument("ScenarioSpec: gamma must be > 0");
    if (defaults.tau > 0.0) throw std::invalid_argument("ScenarioSpec: tau must be <= 0");
    if (defaults.steps < 1) throw std::invalid_argument("ScenarioSpec: steps must be >= 1");
    if (defaults.n_star < 0 || defaults.n_star >= defaults.steps)
        throw std::invalid_argument("ScenarioSpec: n_star must be in [0, steps)");
    if (defaults.guidance < 0.0) throw std::invalid_argument("ScenarioSpec: guidance must be >= 0");
}

Vec sample_data(const ConceptWorld& world, const ConceptId& c, RngStream& rng) {
    std::vector<int> idx = world.tagged(c);
    std::vector<double> w = conditional_weights(world, idx);
    double u = rng.uniform01();
    size_t pick = w.size() - 1;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        if (u < acc) {
            pick = i;
            break;
        }
    }
    const GaussianComponent& g = world.components[idx[pick]];
    return gaussian_sample(rng, g.mean, g.diag_cov);
}

Classification bayes_classify(const ConceptWorld& world, const Vec& x,
                              const std::vector<ConceptId>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("bayes_classify: no candidates");
    std::vector<double> lp(candidates.size());
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < candidates.size(); ++i) {
        lp[i] = log_conditional_density(world, x, candidates[i]);  // uniform prior cancels
        best = std::max(best, lp[i]);
    }
    Classification out;
    out.posterior.resize(candidates.size());
    double z = 0.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        out.posterior[i] = std::exp(lp[i] - best);
        z += out.posterior[i];
    }
    size_t argmax = 0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        out.posterior[i] /= z;
        if (lp[i] > lp[argmax]) argmax = i;  // strict: ties keep the earlier candidate
    }
    out.label = candidates[argmax];
    return out;
}

Vec responsibilities(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c) {
    std::vector<int> idx = world.tagged(c);
    std::vector<double> w = conditional_weights(world, idx);
    const double omt = 1.0 - t;

    std::vector<double> lr(idx.size());
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < idx.size(); ++i) {
        const GaussianComponent& g = world.components[idx[i]];
        // Marginal of z_t under component k: N((1-t) mu_k, (1-t)^2 Sigma_k + t^2 I).
        double lp = std::log(w[i]);
        for (int j = 0; j < world.dim; ++j) {
            double dj = omt * omt * g.diag_cov[j] + t * t;
            double diff = z[j] - omt * g.mean[j];
            lp += -0.5 * (diff * diff / dj + std::log(2.0 * M_PI * dj));
        }
        lr[i] = lp;
        best = std::max(best, lp);
    }
    Vec r(idx.size());
    double acc = 0.0;
    for (size_t i = 0; i < idx.size(); ++i) {
        r[i] = std::exp(lr[i] - best);
        acc += r[i];
    }
    for (double& v : r) v /= acc;
    return r;
}

Vec analytic_velocity(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c) {
    if (static_cast<int>(z.size()) != world.dim)
        throw std::invalid_argument("analytic_velocity: z dimension mismatch");
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("analytic_velocity: t outside [0,1]");
    const double tc = std::max(t, kTMin);
    const double omt = 1.0 - tc;

    std::vector<int> idx = world.tagged(c);
    Vec r = responsibilities(world, z, tc, c);

    Vec v(world.dim, 0.0);
    for (size_t i = 0; i < idx.size(); ++i) {
        const GaussianComponent& g = world.components[idx[i]];
        for (int j = 0; j < world.dim; ++j) {
            double dj = omt * omt * g.diag_cov[j] + tc * tc;
            double resid = z[j] - omt * g.mean[j];
            // E[x0|z,k] - E[x1|z,k] = mu_k + ((1-t) Sigma_k - t I) D_k^{-1} (z - (1-t) mu_k)
            double cond = g.mean[j] + (omt * g.diag_cov[j] - tc) * resid / dj;
            v[j] += r[i] * cond;
        }
    }
    return v;
}

Mat velocity_jacobian(const ConceptWorld& world, const Vec& z, double t, const ConceptId& c) {
    if (t <= 0.0 || t > 1.0) throw std::invalid_argument("velocity_jacobian: t outside (0,1]");
    const double h = 1e-5 * std::max(1.0, norm(z));
    Mat jac(world.dim, world.dim);
    for (int j = 0; j < world.dim; ++j) {
        Vec zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        Vec vp = analytic_velocity(world, zp, t, c);
        Vec vm = analytic_velocity(world, zm, t, c);
        for (int i = 0; i < world.dim; ++i) jac.at(i, j) = (vp[i] - vm[i]) / (2.0 * h);
    }
    return jac;
}

}  // namespace dve
