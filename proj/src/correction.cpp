// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/correction.hpp"

#include <cctype>
#include <cmath>

#include "pic/error.hpp"

namespace pic {

std::string to_string(Variant v) {
    switch (v) {
    case Variant::PIC:
        return "PIC";
    case Variant::DDIM:
        return "DDIM";
    case Variant::DDIM_PI:
        return "DDIM_PI";
    case Variant::DDIM_NC:
        return "DDIM_NC";
    }
    return "?";
}

Variant variant_from_string(const std::string& name) {
    std::string up = name;
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (Variant v : all_variants())
        if (to_string(v) == up) return v;
    if (up == "DDIM+PI") return Variant::DDIM_PI;
    if (up == "DDIM+NC") return Variant::DDIM_NC;
    throw ConfigError("unknown variant '" + name + "' (expected PIC, DDIM, DDIM_PI or DDIM_NC)");
}

const std::vector<Variant>& all_variants() {
    static const std::vector<Variant> v{Variant::DDIM, Variant::DDIM_PI, Variant::DDIM_NC, Variant::PIC};
    return v;
}

void EditConfig::validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be finite and >= 0");
    if (num_steps < 1) throw ConfigError("steps must be >= 1");
    if (tau < 0 || tau > num_steps)
        throw ConfigError("tau must lie in [0, steps], got " + std::to_string(tau) + " with steps " +
                          std::to_string(num_steps));
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
    if (!(guidance_scale >= 1.0) || !std::isfinite(guidance_scale)) throw ConfigError("guidance_scale must be >= 1");
}

void to_json(nlohmann::json& j, const CallLedger& l) {
    j = {{"forward_calls", l.forward_calls},
         {"corrected_calls", l.corrected_calls},
         {"plain_calls", l.plain_calls},
         {"terminal_source_calls", l.terminal_source_calls},
         {"snapshot_calls", l.snapshot_calls},
         {"guidance_calls", l.guidance_calls},
         {"guidance_passes", l.guidance_passes},
         {"model_evaluations", l.model_evaluations()}};
}

Tensor correction_term(const Tensor& eps_interp, const Tensor& eps_src_cond) {
    require_same_shape(eps_interp, eps_src_cond, "correction_term");
    return eps_interp - eps_src_cond;
}

Tensor corrected_noise(const Tensor& eps_src_saved, const Tensor& delta, double gamma) {
    require_same_shape(eps_src_saved, delta, "corrected_noise");
    if (gamma == 0.0) return eps_src_saved;
    return axpy(eps_src_saved, gamma, delta);
}

CorrectionOutput PlainCorrection::correct(const WindowStep& step, const Denoiser& model, CallLedger& ledger) {
    Tensor eps_interp = model.predict(step.x_tgt, step.t, step.y_cond);
    check_prediction(eps_interp, step.x_tgt, step.t, "corrected/interpolated");
    Tensor eps_src = model.predict(step.x_tgt, step.t, step.y_src);
    check_prediction(eps_src, step.x_tgt, step.t, "corrected/source");
    ledger.corrected_calls += 2;
    return {correction_term(eps_interp, eps_src), std::nullopt};
}

int guidance_passes_of(const Denoiser& model) {
    if (auto* g = dynamic_cast<const GuidedDenoiser*>(&model)) return g->passes();
    return 1;
}

Tensor plain_reverse(LatentState x, const PromptEmbedding& y, const Denoiser& model, const DiffusionSchedule& sched,
                     CallLedger* ledger) {
    while (x.t >= 1) {
        Tensor eps = model.predict(x.data, x.t, y);
        if (ledger) ++ledger->plain_calls;
        check_prediction(eps, x.data, x.t, "plain");
        x = reverse_step(x, eps, sched);
    }
    return x.data;
}

EditResult run_variant(Variant variant, const TrajectoryCache& cache, const PromptEmbedding& y_src,
                       const PromptEmbedding& y_tgt, const InterpolationPlan& plan, const EditConfig& config,
                       const Denoiser& model, const DiffusionSchedule& sched, const ReverseOptions& options) {
    config.validate();
    const int T = config.num_steps;
    if (cache.num_steps() != T || sched.num_steps() != T || plan.total_steps != T)
        throw ValidationError("step mismatch: cache " + std::to_string(cache.num_steps()) + ", schedule " +
                              std::to_string(sched.num_steps()) + ", plan " + std::to_string(plan.total_steps) +
                              ", config " + std::to_string(T));
    if (static_cast<long>(cache.source_noise.size()) != T) throw ValidationError("cache is incomplete");
    y_src.validate();
    y_tgt.validate();

    EditResult result;
    result.ledger.forward_calls = cache.forward_calls;
    result.ledger.guidance_passes = guidance_passes_of(model);

    PlainCorrection plain_provider;
    CorrectionProvider* provider = options.provider ? options.provider : &plain_provider;
    const int window_end = variant == Variant::DDIM ? T : T - config.tau;  // steps t > window_end are corrected

    LatentState x = cache.latents.back();
    if (options.record_trajectory) result.trajectory.push_back(x.data);

    std::optional<Tensor> terminal;
    for (int t = T; t >= 1; --t) {
        Tensor eps;
        if (t > window_end) {
            if (variant == Variant::DDIM_PI) {
                PromptEmbedding y_t = interpolated_prompt(y_src, y_tgt, plan, t);
                eps = model.predict(x.data, t, y_t);
                ++result.ledger.corrected_calls;
                check_prediction(eps, x.data, t, "interpolated");
            } else {
                if (t == T) {
                    terminal = model.predict(cache.terminal(), T, y_src);
                    ++result.ledger.terminal_source_calls;
                    check_prediction(*terminal, cache.terminal(), T, "terminal source");
                }
                const Tensor& saved = cached_source_noise(cache, t, *terminal);
                if (config.gamma == 0.0) {
                    eps = saved;
                } else {
                    PromptEmbedding y_cond = variant == Variant::PIC ? interpolated_prompt(y_src, y_tgt, plan, t) : y_tgt;
                    WindowStep step{t, x.data, cache.latents[static_cast<size_t>(t)].data, y_cond, y_src, sched};
                    CorrectionOutput corr = provider->correct(step, model, result.ledger);
                    if (corr.latent) {
                        require_same_shape(*corr.latent, x.data, "guided latent");
                        x.data = std::move(*corr.latent);
                    }
                    eps = corrected_noise(saved, corr.delta, config.gamma);
                    if (!eps.all_finite()) throw NumericalError("non-finite corrected noise", t, "corrected");
                }
            }
        } else {
            eps = model.predict(x.data, t, y_tgt);
            ++result.ledger.plain_calls;
            check_prediction(eps, x.data, t, "plain");
        }
        x = reverse_step(x, eps, sched);
        if (!x.data.all_finite()) throw NumericalError("non-finite latent", t - 1, "reverse");
        if (options.record_trajectory) result.trajectory.push_back(x.data);
    }
    result.output = std::move(x.data);
    return result;
}

EditResult pic_reverse(const TrajectoryCache& cache, const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                       const InterpolationPlan& plan, const EditConfig& config, const Denoiser& model,
                       const DiffusionSchedule& sched, const ReverseOptions& options) {
    return run_variant(Variant::PIC, cache, y_src, y_tgt, plan, config, model, sched, options);
}

}  // namespace pic
