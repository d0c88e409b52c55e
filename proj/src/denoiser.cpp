// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/denoiser.hpp"

#include <cmath>

#include "pic/error.hpp"

namespace pic {

std::string to_string(HookKind kind) {
    switch (kind) {
    case HookKind::cross_attention:
        return "cross_attention";
    case HookKind::self_attention:
        return "self_attention";
    case HookKind::feature:
        return "feature";
    }
    return "?";
}

std::map<std::string, Tensor>& AttentionSnapshot::group(HookKind kind) {
    if (kind == HookKind::cross_attention) return cross_maps;
    if (kind == HookKind::self_attention) return self_maps;
    return features;
}

const std::map<std::string, Tensor>& AttentionSnapshot::group(HookKind kind) const {
    return const_cast<AttentionSnapshot*>(this)->group(kind);
}

void validate_attention_rows(const Tensor& map, const std::string& name, double tol) {
    if (map.shape().empty()) throw ValidationError("attention map " + name + " has no axes");
    size_t cols = map.shape().back();
    size_t rows = cols ? map.size() / cols : 0;
    for (size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (size_t c = 0; c < cols; ++c) s += map[r * cols + c];
        if (!(std::abs(s - 1.0) <= tol))
            throw ValidationError("attention map " + name + " row " + std::to_string(r) + " sums to " +
                                  std::to_string(s));
    }
}

void HookContext::inject_from(const AttentionSnapshot* source, bool cross, bool self, bool features) {
    m_inject = source;
    m_inject_cross = cross;
    m_inject_self = self;
    m_inject_features = features;
}

Tensor HookContext::apply(const HookPoint& point, int step, Tensor value) {
    if (m_capture) {
        m_capture->step = step;
        m_capture->group(point.kind)[point.layer] = value;
    }
    bool injected = false;
    if (m_inject && !m_inject->empty()) {
        bool wanted = (point.kind == HookKind::cross_attention && m_inject_cross) ||
                      (point.kind == HookKind::self_attention && m_inject_self) ||
                      (point.kind == HookKind::feature && m_inject_features);
        const auto& group = m_inject->group(point.kind);
        auto it = group.find(point.layer);
        if (wanted && it != group.end()) {
            if (m_inject->step != step)
                throw ValidationError("injection snapshot from step " + std::to_string(m_inject->step) +
                                      " applied at step " + std::to_string(step));
            if (it->second.shape() != value.shape())
                throw ValidationError("injected " + to_string(point.kind) + " map for " + point.layer +
                                      " has shape " + shape_to_string(it->second.shape()) + ", expected " +
                                      shape_to_string(value.shape()));
            if (point.kind != HookKind::feature) validate_attention_rows(it->second, point.layer);
            value = it->second;
            injected = true;
        }
    }
    if (m_trace_on) m_trace.push_back({point.layer, point.kind, step, injected, value});
    return value;
}

GuidedDenoiser::GuidedDenoiser(std::shared_ptr<const Denoiser> inner, PromptEmbedding null_embedding, double scale)
    : m_inner(std::move(inner)), m_null(std::move(null_embedding)), m_scale(scale) {
    if (!std::isfinite(scale) || scale < 0.0) throw ConfigError("guidance scale must be finite and >= 0");
}

Tensor GuidedDenoiser::predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks) const {
    Tensor cond = m_inner->predict(latent, step, y, hooks);
    if (m_scale == 1.0) return cond;
    Tensor uncond = m_inner->predict(latent, step, m_null, nullptr);
    Tensor out = uncond;
    for (size_t i = 0; i < out.size(); ++i) out[i] = uncond[i] + m_scale * (cond[i] - uncond[i]);
    return out;
}

Tensor CountingDenoiser::predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks) const {
    ++m_calls;
    return m_inner->predict(latent, step, y, hooks);
}

Tensor SerializedDenoiser::predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks) const {
    std::lock_guard lock(m_mutex);
    return m_inner->predict(latent, step, y, hooks);
}

std::shared_ptr<const Denoiser> make_shareable(std::shared_ptr<const Denoiser> model) {
    if (model->thread_safe()) return model;
    return std::make_shared<SerializedDenoiser>(std::move(model));
}

void check_prediction(const Tensor& eps, const Tensor& latent, int step, const std::string& branch) {
    if (eps.shape() != latent.shape())
        throw ValidationError("denoiser returned shape " + shape_to_string(eps.shape()) + " for latent " +
                              shape_to_string(latent.shape()));
    if (!eps.all_finite()) throw NumericalError("non-finite noise prediction", step, branch);
}

}  // namespace pic
