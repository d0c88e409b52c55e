// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/toy.hpp"

#include <algorithm>
#include <cmath>

#include "pic/error.hpp"

namespace pic {

Tensor GaussianWorld::mean(const PromptEmbedding& c) const {
    const size_t d = latent_dim(), k = context_len * embed_dim;
    if (c.tokens.shape() != Shape{context_len, embed_dim})
        throw ValidationError("toy world expects embeddings of shape " + shape_to_string({context_len, embed_dim}) +
                              ", got " + shape_to_string(c.tokens.shape()));
    Tensor mu(latent_shape);
    for (size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = mean_map.data() + i * k;
        for (size_t j = 0; j < k; ++j) acc += row[j] * c.tokens[j];
        mu[i] = acc + bias[i];
    }
    return mu;
}

void GaussianWorld::validate() const {
    const size_t d = latent_dim();
    if (!(data_std > 0.0)) throw ValidationError("toy world needs data_std > 0");
    if (mean_map.shape() != Shape{d, context_len * embed_dim}) throw ValidationError("toy world mean_map has wrong shape");
    if (bias.size() != d) throw ValidationError("toy world bias has wrong size");
    if (!mean_map.all_finite() || !bias.all_finite()) throw ValidationError("toy world parameters not finite");
    std::vector<int> seen(d, 0);
    for (size_t i : edited_coords) seen.at(i) += 1;
    for (size_t i : shared_coords) {
        seen.at(i) += 1;
        for (size_t j = 0; j < context_len * embed_dim; ++j)
            if (mean_map.at(i, j) != 0.0) throw ValidationError("shared coordinate " + std::to_string(i) + " depends on the prompt");
    }
    if (std::any_of(seen.begin(), seen.end(), [](int s) { return s != 1; }))
        throw ValidationError("edited/shared coordinates must partition the latent");
}

GaussianWorld make_two_domain_world(size_t latent_dim, size_t edited, size_t context_len, size_t embed_dim,
                                    double data_std, double scale, std::mt19937_64& rng) {
    if (edited > latent_dim) throw ValidationError("more edited coordinates than latent dimensions");
    GaussianWorld w;
    w.latent_shape = {latent_dim};
    w.context_len = context_len;
    w.embed_dim = embed_dim;
    w.data_std = data_std;
    w.mean_map = Tensor({latent_dim, context_len * embed_dim});
    w.bias = Tensor({latent_dim});
    std::normal_distribution<double> normal(0.0, scale / std::sqrt(static_cast<double>(context_len * embed_dim)));
    for (size_t i = 0; i < edited; ++i) {
        for (size_t j = 0; j < context_len * embed_dim; ++j) w.mean_map.at(i, j) = normal(rng);
        w.edited_coords.push_back(i);
    }
    for (size_t i = edited; i < latent_dim; ++i) w.shared_coords.push_back(i);
    return w;
}

Tensor analytic_eps(const GaussianWorld& world, const Tensor& x, int t, const PromptEmbedding& c,
                    const DiffusionSchedule& sched) {
    if (x.shape() != world.latent_shape)
        throw ValidationError("toy latent shape " + shape_to_string(x.shape()) + " != " + shape_to_string(world.latent_shape));
    const double a = sched.alpha(t);
    if (!(a > 0.0 && a <= 1.0)) throw SingularScheduleError("toy denoiser needs alpha in (0, 1]", t);
    Tensor mu = world.mean(c);
    const double s2 = world.data_std * world.data_std;
    const double scale = std::sqrt(1.0 - a) / (a * s2 + 1.0 - a);
    const double sa = std::sqrt(a);
    Tensor eps = x;
    for (size_t i = 0; i < eps.size(); ++i) eps[i] = scale * (x[i] - sa * mu[i]);
    return eps;
}

Tensor analytic_eps_posterior(const GaussianWorld& world, const Tensor& x, double alpha, const Tensor& mu) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw SingularScheduleError("posterior form needs alpha in (0, 1)");
    require_same_shape(x, mu, "analytic_eps_posterior");
    const double s2 = world.data_std * world.data_std;
    const double den = alpha * s2 + (1.0 - alpha);
    Tensor eps = x;
    for (size_t i = 0; i < eps.size(); ++i) {
        double m = (s2 * std::sqrt(alpha) * x[i] + (1.0 - alpha) * mu[i]) / den;
        eps[i] = (x[i] - std::sqrt(alpha) * m) / std::sqrt(1.0 - alpha);
    }
    return eps;
}

Tensor ToyDenoiser::predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext*) const {
    return analytic_eps(*m_world, latent, step, y, m_sched);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    const size_t n = a.shape().at(0), k = a.shape().at(1), m = b.shape().at(1);
    if (b.shape().at(0) != k) throw ValidationError("matmul inner dimensions differ");
    Tensor out({n, m});
    for (size_t i = 0; i < n; ++i)
        for (size_t p = 0; p < k; ++p) {
            double aip = a.at(i, p);
            if (aip == 0.0) continue;
            const double* brow = b.data() + p * m;
            double* orow = out.data() + i * m;
            for (size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
        }
    return out;
}

Tensor transpose(const Tensor& a) {
    const size_t n = a.shape().at(0), m = a.shape().at(1);
    Tensor out({m, n});
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < m; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor softmax_rows(const Tensor& logits) {
    const size_t n = logits.shape().at(0), m = logits.shape().at(1);
    Tensor out({n, m});
    for (size_t i = 0; i < n; ++i) {
        double mx = -INFINITY;
        for (size_t j = 0; j < m; ++j) mx = std::max(mx, logits.at(i, j));
        double s = 0.0;
        for (size_t j = 0; j < m; ++j) s += out.at(i, j) = std::exp(logits.at(i, j) - mx);
        for (size_t j = 0; j < m; ++j) out.at(i, j) /= s;
    }
    return out;
}

AttentionToyDenoiser::AttentionToyDenoiser(std::shared_ptr<const GaussianWorld> world, DiffusionSchedule sched,
                                           int layers, int key_dim, double feature_weight, uint64_t seed)
    : m_world(std::move(world)), m_sched(std::move(sched)), m_key_dim(key_dim), m_feature_weight(feature_weight) {
    if (m_world->latent_shape.size() != 3) throw ValidationError("attention stub needs a C x H x W latent");
    if (layers < 1 || key_dim < 1) throw ValidationError("attention stub needs >= 1 layer and key dim");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const size_t C = channels(), D = m_world->embed_dim, dk = static_cast<size_t>(key_dim);
    auto draw = [&](size_t r, size_t c, double s) {
        Tensor t({r, c});
        for (double& v : t.values()) v = s * normal(rng);
        return t;
    };
    for (int k = 0; k < layers; ++k) {
        m_layers.push_back({draw(C, dk, 1.0), draw(D, dk, 1.0 / std::sqrt(static_cast<double>(D))),
                            draw(D, C, 1.0 / std::sqrt(static_cast<double>(D))), draw(C, dk, 1.0)});
    }
}

std::string AttentionToyDenoiser::layer_name(int k) {
    return "block" + std::to_string(k);
}

std::vector<HookPoint> AttentionToyDenoiser::hook_points() const {
    std::vector<HookPoint> out;
    for (size_t k = 0; k < m_layers.size(); ++k) {
        std::string name = layer_name(static_cast<int>(k));
        out.push_back({name, HookKind::cross_attention});
        out.push_back({name, HookKind::self_attention});
        out.push_back({name, HookKind::feature});
    }
    return out;
}

Tensor AttentionToyDenoiser::positions_view(const Tensor& latent) const {
    if (latent.shape() != m_world->latent_shape)
        throw ValidationError("latent shape " + shape_to_string(latent.shape()) + " != " +
                              shape_to_string(m_world->latent_shape));
    const size_t C = channels(), Q = positions();
    Tensor x({Q, C});
    for (size_t c = 0; c < C; ++c)
        for (size_t q = 0; q < Q; ++q) x.at(q, c) = latent[c * Q + q];
    return x;
}

Tensor AttentionToyDenoiser::cross_projection(const Layer& layer, const PromptEmbedding& y) const {
    Tensor keys = matmul(y.tokens, layer.wk);  // L x dk
    Tensor b = matmul(layer.wq, transpose(keys));
    b *= 1.0 / std::sqrt(static_cast<double>(m_key_dim));
    return b;
}

Tensor AttentionToyDenoiser::predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks) const {
    Tensor eps = analytic_eps(*m_world, latent, step, y, m_sched);
    const Tensor x = positions_view(latent);
    const size_t C = channels(), Q = positions();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(m_key_dim));
    Tensor acc({Q, C});
    for (size_t k = 0; k < m_layers.size(); ++k) {
        const Layer& layer = m_layers[k];
        const std::string name = layer_name(static_cast<int>(k));

        Tensor cross = softmax_rows(matmul(x, cross_projection(layer, y)));
        if (hooks) cross = hooks->apply({name, HookKind::cross_attention}, step, std::move(cross));

        Tensor p = matmul(x, layer.ws);
        Tensor logits = matmul(p, transpose(p));
        logits *= inv_sqrt_dk;
        Tensor self = softmax_rows(logits);
        if (hooks) self = hooks->apply({name, HookKind::self_attention}, step, std::move(self));

        Tensor mixed = matmul(cross, matmul(y.tokens, layer.wv));
        mixed += matmul(self, x);
        mixed += x;
        for (double& v : mixed.values()) v = std::tanh(v);
        if (hooks) mixed = hooks->apply({name, HookKind::feature}, step, std::move(mixed));
        acc += mixed;
    }
    for (size_t c = 0; c < C; ++c)
        for (size_t q = 0; q < Q; ++q) eps[c * Q + q] += m_feature_weight * acc.at(q, c);
    return eps;
}

AttentionSnapshot AttentionToyDenoiser::cross_maps(const Tensor& latent, int step, const PromptEmbedding& y) const {
    AttentionSnapshot snap;
    snap.step = step;
    const Tensor x = positions_view(latent);
    for (size_t k = 0; k < m_layers.size(); ++k)
        snap.cross_maps[layer_name(static_cast<int>(k))] = softmax_rows(matmul(x, cross_projection(m_layers[k], y)));
    return snap;
}

Tensor AttentionToyDenoiser::cross_loss_gradient(const Tensor& latent, int step, const PromptEmbedding& y,
                                                 const AttentionSnapshot& target, double* loss) const {
    (void)step;
    const Tensor x = positions_view(latent);
    const size_t C = channels(), Q = positions();
    Tensor grad_x({Q, C});
    double total = 0.0;
    for (size_t k = 0; k < m_layers.size(); ++k) {
        auto it = target.cross_maps.find(layer_name(static_cast<int>(k)));
        if (it == target.cross_maps.end()) continue;
        Tensor b = cross_projection(m_layers[k], y);
        Tensor a = softmax_rows(matmul(x, b));
        require_same_shape(a, it->second, "cross-attention target");
        const size_t L = a.shape()[1];
        Tensor dz({Q, L});
        for (size_t q = 0; q < Q; ++q) {
            double dot = 0.0;
            for (size_t l = 0; l < L; ++l) {
                double diff = a.at(q, l) - it->second.at(q, l);
                total += diff * diff;
                dot += 2.0 * diff * a.at(q, l);
            }
            for (size_t l = 0; l < L; ++l) dz.at(q, l) = a.at(q, l) * (2.0 * (a.at(q, l) - it->second.at(q, l)) - dot);
        }
        grad_x += matmul(dz, transpose(b));
    }
    if (loss) *loss = total;
    Tensor out(m_world->latent_shape);
    for (size_t c = 0; c < C; ++c)
        for (size_t q = 0; q < Q; ++q) out[c * Q + q] = grad_x.at(q, c);
    return out;
}

}  // namespace pic
