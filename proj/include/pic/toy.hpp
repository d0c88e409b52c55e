// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <vector>

#include "pic/denoiser.hpp"
#include "pic/schedule.hpp"

namespace pic {

/// Gaussian data x0 ~ Normal(mu_c, sigma^2 I) with mu_c = W vec(c) + b. Rows of W
/// on shared coordinates are zero, so those means never depend on the prompt.
struct GaussianWorld {
    Shape latent_shape;
    size_t context_len = 2;
    size_t embed_dim = 4;
    Tensor mean_map;  // d x (L * D)
    Tensor bias;      // d
    double data_std = 1.0;
    std::vector<size_t> edited_coords;
    std::vector<size_t> shared_coords;

    size_t latent_dim() const { return shape_numel(latent_shape); }
    Tensor mean(const PromptEmbedding& c) const;
    void validate() const;
};

/// Random two-domain world: the first `edited` coordinates carry prompt-dependent
/// means with W entries ~ Normal(0, scale^2 / (L D)); the rest are shared.
GaussianWorld make_two_domain_world(size_t latent_dim, size_t edited, size_t context_len, size_t embed_dim,
                                    double data_std, double scale, std::mt19937_64& rng);

/// Bayes-optimal eps for the world at step t, in the form regular at alpha = 1.
Tensor analytic_eps(const GaussianWorld& world, const Tensor& x, int t, const PromptEmbedding& c,
                    const DiffusionSchedule& sched);

/// Same quantity through the posterior mean m; singular at alpha in {0, 1}.
Tensor analytic_eps_posterior(const GaussianWorld& world, const Tensor& x, double alpha, const Tensor& mu);

class ToyDenoiser : public Denoiser {
public:
    ToyDenoiser(std::shared_ptr<const GaussianWorld> world, DiffusionSchedule sched)
        : m_world(std::move(world)), m_sched(std::move(sched)) {}

    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const override;
    Shape latent_shape() const override { return m_world->latent_shape; }
    int context_length() const override { return static_cast<int>(m_world->context_len); }
    bool thread_safe() const override { return true; }

    const GaussianWorld& world() const { return *m_world; }
    const DiffusionSchedule& schedule() const { return m_sched; }

private:
    std::shared_ptr<const GaussianWorld> m_world;
    DiffusionSchedule m_sched;
};

/// Gradient access to cross-attention maps, needed by the latent guidance step.
class CrossAttentionGradient {
public:
    virtual ~CrossAttentionGradient() = default;
    /// Cross-attention maps of the conditional pass eps(x, t, y).
    virtual AttentionSnapshot cross_maps(const Tensor& latent, int step, const PromptEmbedding& y) const = 0;
    /// Loss sum_k ||M_k(x) - target_k||_F^2 over layers present in `target`, and its gradient in x.
    virtual Tensor cross_loss_gradient(const Tensor& latent, int step, const PromptEmbedding& y,
                                       const AttentionSnapshot& target, double* loss) const = 0;
};

/// Instrumented stub: the analytic Gaussian denoiser plus small parallel attention
/// layers over the spatial positions of a C x H x W latent. Every cross map, self map
/// and feature goes through the hook context, so injections are visible in the output
/// and in the trace.
class AttentionToyDenoiser : public Denoiser, public CrossAttentionGradient {
public:
    AttentionToyDenoiser(std::shared_ptr<const GaussianWorld> world, DiffusionSchedule sched, int layers, int key_dim,
                         double feature_weight, uint64_t seed);

    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const override;
    Shape latent_shape() const override { return m_world->latent_shape; }
    int context_length() const override { return static_cast<int>(m_world->context_len); }
    std::vector<HookPoint> hook_points() const override;
    bool thread_safe() const override { return true; }

    AttentionSnapshot cross_maps(const Tensor& latent, int step, const PromptEmbedding& y) const override;
    Tensor cross_loss_gradient(const Tensor& latent, int step, const PromptEmbedding& y, const AttentionSnapshot& target,
                               double* loss) const override;

    static std::string layer_name(int k);

private:
    struct Layer {
        Tensor wq;  // C x dk
        Tensor wk;  // D x dk
        Tensor wv;  // D x C
        Tensor ws;  // C x dk
    };

    size_t channels() const { return m_world->latent_shape.at(0); }
    size_t positions() const { return m_world->latent_dim() / channels(); }
    /// Q x C view of a C x H x W latent.
    Tensor positions_view(const Tensor& latent) const;
    /// C x L projection B = Wq (Y Wk)^T / sqrt(dk); cross logits are X B.
    Tensor cross_projection(const Layer& layer, const PromptEmbedding& y) const;

    std::shared_ptr<const GaussianWorld> m_world;
    DiffusionSchedule m_sched;
    std::vector<Layer> m_layers;
    int m_key_dim;
    double m_feature_weight;
};

/// Row-wise softmax of a 2-D tensor.
Tensor softmax_rows(const Tensor& logits);
/// a (n x k) times b (k x m).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace pic
