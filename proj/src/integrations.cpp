// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/integrations.hpp"

#include "pic/error.hpp"

namespace pic {

std::string to_string(IntegrationKind kind) {
    switch (kind) {
    case IntegrationKind::none:
        return "none";
    case IntegrationKind::ptp:
        return "ptp";
    case IntegrationKind::pnp:
        return "pnp";
    case IntegrationKind::p2p:
        return "p2p";
    }
    return "?";
}

IntegrationKind integration_from_string(const std::string& name) {
    if (name == "none") return IntegrationKind::none;
    if (name == "ptp") return IntegrationKind::ptp;
    if (name == "pnp") return IntegrationKind::pnp;
    if (name == "p2p") return IntegrationKind::p2p;
    throw ConfigError("unknown integration '" + name + "' (expected none, ptp, pnp or p2p)");
}

namespace {

void require_fraction(double v, const std::string& name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(name + " must lie in [0, 1]");
}

}  // namespace

void IntegrationConfig::validate() const {
    require_fraction(ptp.cross_replace, "ptp.cross_replace");
    require_fraction(ptp.self_replace, "ptp.self_replace");
    require_fraction(pnp.feature_injection, "pnp.feature_injection");
    require_fraction(pnp.self_injection, "pnp.self_injection");
    require_fraction(p2p.injection_window, "p2p.injection_window");
    if (!(p2p.lambda_xa >= 0.0)) throw ConfigError("p2p.lambda_xa must be >= 0");
}

void to_json(nlohmann::json& j, const IntegrationConfig& c) {
    j = {{"integration", to_string(c.kind)},
         {"ptp", {{"cross_replace", c.ptp.cross_replace}, {"self_replace", c.ptp.self_replace}}},
         {"pnp", {{"feature_injection", c.pnp.feature_injection}, {"self_injection", c.pnp.self_injection}}},
         {"p2p", {{"lambda_xa", c.p2p.lambda_xa}, {"injection_window", c.p2p.injection_window}}}};
}

void from_json(const nlohmann::json& j, IntegrationConfig& c) {
    c.kind = integration_from_string(j.value("integration", std::string("none")));
    if (j.contains("ptp")) {
        c.ptp.cross_replace = j["ptp"].value("cross_replace", c.ptp.cross_replace);
        c.ptp.self_replace = j["ptp"].value("self_replace", c.ptp.self_replace);
    }
    if (j.contains("pnp")) {
        c.pnp.feature_injection = j["pnp"].value("feature_injection", c.pnp.feature_injection);
        c.pnp.self_injection = j["pnp"].value("self_injection", c.pnp.self_injection);
    }
    if (j.contains("p2p")) {
        c.p2p.lambda_xa = j["p2p"].value("lambda_xa", c.p2p.lambda_xa);
        c.p2p.injection_window = j["p2p"].value("injection_window", c.p2p.injection_window);
    }
}

bool in_window(int t, int T, double fraction) {
    return static_cast<double>(T - t) < fraction * T;
}

namespace {

NoisePair injected_pair(const Denoiser& model, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                        const PromptEmbedding& y_src, const AttentionSnapshot& source, bool cross, bool self,
                        bool features, HookContext* trace) {
    if (!source.empty() && source.step != t)
        throw ValidationError("source snapshot from step " + std::to_string(source.step) + " used at step " +
                              std::to_string(t));
    HookContext local;
    HookContext& ctx = trace ? *trace : local;
    ctx.inject_from(&source, cross, self, features);
    Tensor eps_interp = model.predict(x_tgt, t, y_t, &ctx);
    ctx.inject_from(nullptr, false, false, false);
    check_prediction(eps_interp, x_tgt, t, "integration/interpolated");
    Tensor eps_src = model.predict(x_tgt, t, y_src);
    check_prediction(eps_src, x_tgt, t, "integration/source");
    return {std::move(eps_interp), std::move(eps_src)};
}

}  // namespace

NoisePair ptp_corrected_predict(const Denoiser& model, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                                const PromptEmbedding& y_src, const AttentionSnapshot& source, const PtpConfig& cfg,
                                int T, HookContext* trace) {
    return injected_pair(model, x_tgt, t, y_t, y_src, source, in_window(t, T, cfg.cross_replace),
                         in_window(t, T, cfg.self_replace), false, trace);
}

NoisePair pnp_corrected_predict(const Denoiser& model, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                                const PromptEmbedding& y_src, const AttentionSnapshot& source, const PnpConfig& cfg,
                                int T, HookContext* trace) {
    return injected_pair(model, x_tgt, t, y_t, y_src, source, false, in_window(t, T, cfg.self_injection),
                         in_window(t, T, cfg.feature_injection), trace);
}

Tensor p2p_guidance_step(const CrossAttentionGradient& grad, const Tensor& x_tgt, int t, const PromptEmbedding& y_t,
                         const AttentionSnapshot& source, const GuidanceConfig& cfg) {
    if (cfg.lambda_xa == 0.0 || source.cross_maps.empty()) return x_tgt;
    if (source.step != t)
        throw ValidationError("source snapshot from step " + std::to_string(source.step) + " used at step " +
                              std::to_string(t));
    for (const auto& [name, map] : source.cross_maps) validate_attention_rows(map, name);
    Tensor g = grad.cross_loss_gradient(x_tgt, t, y_t, source, nullptr);
    if (!g.all_finite()) throw NumericalError("non-finite cross-attention gradient", t, "p2p guidance");
    return axpy(x_tgt, -cfg.lambda_xa, g);
}

Tensor p2p_correction(const Denoiser& model, const Tensor& x_hat, int t, const PromptEmbedding& y_t,
                      const PromptEmbedding& y_src) {
    Tensor a = model.predict(x_hat, t, y_t);
    check_prediction(a, x_hat, t, "p2p/interpolated");
    Tensor b = model.predict(x_hat, t, y_src);
    check_prediction(b, x_hat, t, "p2p/source");
    return correction_term(a, b);
}

AttentionSnapshot capture_source(const Denoiser& model, const Tensor& x_src, int t, const PromptEmbedding& y_src) {
    AttentionSnapshot snap;
    snap.step = t;
    HookContext ctx;
    ctx.capture_into(&snap);
    Tensor eps = model.predict(x_src, t, y_src, &ctx);
    check_prediction(eps, x_src, t, "source snapshot");
    snap.step = t;
    return snap;
}

IntegrationCorrection::IntegrationCorrection(IntegrationConfig config, int total_steps,
                                             const CrossAttentionGradient* grad, HookContext* trace)
    : m_config(std::move(config)), m_total_steps(total_steps), m_grad(grad), m_trace(trace) {
    m_config.validate();
    if (m_config.kind == IntegrationKind::p2p && !m_grad)
        throw ModelUnavailableError("p2p integration needs a backbone with differentiable cross-attention");
}

CorrectionOutput IntegrationCorrection::correct(const WindowStep& step, const Denoiser& model, CallLedger& ledger) {
    const int T = m_total_steps;
    switch (m_config.kind) {
    case IntegrationKind::none: {
        PlainCorrection plain;
        return plain.correct(step, model, ledger);
    }
    case IntegrationKind::ptp:
    case IntegrationKind::pnp: {
        AttentionSnapshot source = capture_source(model, step.x_src, step.t, step.y_src);
        ++ledger.snapshot_calls;
        NoisePair pair = m_config.kind == IntegrationKind::ptp
                             ? ptp_corrected_predict(model, step.x_tgt, step.t, step.y_cond, step.y_src, source,
                                                     m_config.ptp, T, m_trace)
                             : pnp_corrected_predict(model, step.x_tgt, step.t, step.y_cond, step.y_src, source,
                                                     m_config.pnp, T, m_trace);
        ledger.corrected_calls += 2;
        return {correction_term(pair.first, pair.second), std::nullopt};
    }
    case IntegrationKind::p2p: {
        std::optional<Tensor> x_hat;
        Tensor base = step.x_tgt;
        if (in_window(step.t, T, m_config.p2p.injection_window) && m_config.p2p.lambda_xa != 0.0) {
            AttentionSnapshot source = capture_source(model, step.x_src, step.t, step.y_src);
            ++ledger.snapshot_calls;
            x_hat = p2p_guidance_step(*m_grad, step.x_tgt, step.t, step.y_cond, source, m_config.p2p);
            ++ledger.guidance_calls;
            base = *x_hat;
        }
        Tensor delta = p2p_correction(model, base, step.t, step.y_cond, step.y_src);
        ledger.corrected_calls += 2;
        return {std::move(delta), std::move(x_hat)};
    }
    }
    throw ValidationError("unknown integration");
}

}  // namespace pic
