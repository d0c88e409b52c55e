// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pic/prompt.hpp"
#include "pic/tensor.hpp"

namespace pic {

enum class HookKind { cross_attention, self_attention, feature };

std::string to_string(HookKind kind);

struct HookPoint {
    std::string layer;
    HookKind kind;
};

/// Attention maps and features recorded from one denoiser evaluation.
struct AttentionSnapshot {
    int step = -1;
    std::map<std::string, Tensor> cross_maps;
    std::map<std::string, Tensor> self_maps;
    std::map<std::string, Tensor> features;

    bool empty() const { return cross_maps.empty() && self_maps.empty() && features.empty(); }
    std::map<std::string, Tensor>& group(HookKind kind);
    const std::map<std::string, Tensor>& group(HookKind kind) const;
};

/// Rows of an attention map (last axis) must sum to one.
void validate_attention_rows(const Tensor& map, const std::string& name, double tol = 1e-4);

struct HookTraceEntry {
    std::string layer;
    HookKind kind;
    int step;
    bool injected;
    Tensor value;
};

/// Per-run hook scope. A denoiser routes every instrumented tensor through apply(),
/// which records it, optionally substitutes a tensor from the injection snapshot,
/// and appends to the trace. Nothing here is global, so concurrent runs stay isolated.
class HookContext {
public:
    void capture_into(AttentionSnapshot* sink) { m_capture = sink; }
    void inject_from(const AttentionSnapshot* source, bool cross, bool self, bool features);
    void enable_trace(bool on) { m_trace_on = on; }

    Tensor apply(const HookPoint& point, int step, Tensor value);

    const std::vector<HookTraceEntry>& trace() const { return m_trace; }
    void clear_trace() { m_trace.clear(); }

private:
    AttentionSnapshot* m_capture = nullptr;
    const AttentionSnapshot* m_inject = nullptr;
    bool m_inject_cross = false;
    bool m_inject_self = false;
    bool m_inject_features = false;
    bool m_trace_on = false;
    std::vector<HookTraceEntry> m_trace;
};

/// Noise-prediction network eps_theta(x, t, y). `step` is the inference index.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const = 0;
    virtual Shape latent_shape() const = 0;
    virtual int context_length() const = 0;
    virtual std::vector<HookPoint> hook_points() const { return {}; }
    virtual bool thread_safe() const { return false; }
};

/// Classifier-free guidance around an inner denoiser. Hooks reach only the
/// conditional pass.
class GuidedDenoiser : public Denoiser {
public:
    GuidedDenoiser(std::shared_ptr<const Denoiser> inner, PromptEmbedding null_embedding, double scale);

    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const override;
    Shape latent_shape() const override { return m_inner->latent_shape(); }
    int context_length() const override { return m_inner->context_length(); }
    std::vector<HookPoint> hook_points() const override { return m_inner->hook_points(); }
    bool thread_safe() const override { return m_inner->thread_safe(); }

    double scale() const { return m_scale; }
    /// Inner evaluations per guided prediction.
    int passes() const { return m_scale == 1.0 ? 1 : 2; }

private:
    std::shared_ptr<const Denoiser> m_inner;
    PromptEmbedding m_null;
    double m_scale;
};

/// Counts inner evaluations; used for ledger cross-checks.
class CountingDenoiser : public Denoiser {
public:
    explicit CountingDenoiser(std::shared_ptr<const Denoiser> inner) : m_inner(std::move(inner)) {}

    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const override;
    Shape latent_shape() const override { return m_inner->latent_shape(); }
    int context_length() const override { return m_inner->context_length(); }
    std::vector<HookPoint> hook_points() const override { return m_inner->hook_points(); }
    bool thread_safe() const override { return m_inner->thread_safe(); }

    long calls() const { return m_calls.load(); }
    void reset() { m_calls = 0; }

private:
    std::shared_ptr<const Denoiser> m_inner;
    mutable std::atomic<long> m_calls{0};
};

/// Exclusive-access wrapper for adapters that do not declare thread safety.
class SerializedDenoiser : public Denoiser {
public:
    explicit SerializedDenoiser(std::shared_ptr<const Denoiser> inner) : m_inner(std::move(inner)) {}

    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext* hooks = nullptr) const override;
    Shape latent_shape() const override { return m_inner->latent_shape(); }
    int context_length() const override { return m_inner->context_length(); }
    std::vector<HookPoint> hook_points() const override { return m_inner->hook_points(); }
    bool thread_safe() const override { return true; }

private:
    std::shared_ptr<const Denoiser> m_inner;
    mutable std::mutex m_mutex;
};

/// Wraps in SerializedDenoiser unless the adapter declares itself thread safe.
std::shared_ptr<const Denoiser> make_shareable(std::shared_ptr<const Denoiser> model);

/// Shape check plus finiteness check on a prediction; throws NumericalError naming step and branch.
void check_prediction(const Tensor& eps, const Tensor& latent, int step, const std::string& branch);

}  // namespace pic
