// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>

#include "json.hpp"
#include "pic/correction.hpp"
#include "pic/toy.hpp"

namespace pic {

enum class IntegrationKind { none, ptp, pnp, p2p };

std::string to_string(IntegrationKind kind);
IntegrationKind integration_from_string(const std::string& name);

/// Injection windows are fractions of the reverse run, counted from t = T.
struct PtpConfig {
    double cross_replace = 0.8;
    double self_replace = 0.4;
    bool operator==(const PtpConfig&) const = default;
};

struct PnpConfig {
    double feature_injection = 0.8;
    double self_injection = 0.5;
    bool operator==(const PnpConfig&) const = default;
};

struct GuidanceConfig {
    double lambda_xa = 0.1;
    double injection_window = 1.0;
    bool operator==(const GuidanceConfig&) const = default;
};

struct IntegrationConfig {
    IntegrationKind kind = IntegrationKind::none;
    PtpConfig ptp;
    PnpConfig pnp;
    GuidanceConfig p2p;

    void validate() const;
    bool operator==(const IntegrationConfig&) const = default;
};

void to_json(nlohmann::json& j, const IntegrationConfig& c);
/// Reads the nested per-integration objects; `kind` is read from "integration".
void from_json(const nlohmann::json& j, IntegrationConfig& c);

/// True while reverse step t lies in the first `fraction` of a T-step run.
bool in_window(int t, int T, double fraction);

using NoisePair = std::pair<Tensor, Tensor>;

/// (eps with source cross/self maps injected on (x_tgt, y_t), eps(x_tgt, t, y_src) without injection).
NoisePair ptp_corrected_predict(const Denoiser& model, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                                const PromptEmbedding& y_src, const AttentionSnapshot& source, const PtpConfig& cfg,
                                int T, HookContext* trace = nullptr);

/// As ptp_corrected_predict, injecting source self maps and residual features.
NoisePair pnp_corrected_predict(const Denoiser& model, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                                const PromptEmbedding& y_src, const AttentionSnapshot& source, const PnpConfig& cfg,
                                int T, HookContext* trace = nullptr);

/// x_tgt - lambda_xa * grad ||M^tgt - M^src||_F^2 with M^tgt read from the y_t pass.
Tensor p2p_guidance_step(const CrossAttentionGradient& grad, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                         const AttentionSnapshot& source, const GuidanceConfig& cfg);

/// eps(x_hat, t, y_t) - eps(x_hat, t, y_src).
Tensor p2p_correction(const Denoiser& model, const Tensor& x_hat, int t, const PromptEmbedding& y_t,
                      const PromptEmbedding& y_src);

/// Source snapshot from a recomputed eps(x^src_t, t, y^src) pass with capture hooks.
AttentionSnapshot capture_source(const Denoiser& model, const Tensor& x_src, int t, const PromptEmbedding& y_src);

/// Correction provider for the three attention editors.
class IntegrationCorrection : public CorrectionProvider {
public:
    IntegrationCorrection(IntegrationConfig config, int total_steps, const CrossAttentionGradient* grad = nullptr,
                          HookContext* trace = nullptr);

    CorrectionOutput correct(const WindowStep& step, const Denoiser& model, CallLedger& ledger) override;

private:
    IntegrationConfig m_config;
    int m_total_steps;
    const CrossAttentionGradient* m_grad;
    HookContext* m_trace;
};

}  // namespace pic
