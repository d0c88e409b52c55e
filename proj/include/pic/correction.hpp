// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pic/denoiser.hpp"
#include "pic/prompt.hpp"
#include "pic/schedule.hpp"
#include "pic/trajectory.hpp"

namespace pic {

enum class Variant { PIC, DDIM, DDIM_PI, DDIM_NC };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
const std::vector<Variant>& all_variants();

struct EditConfig {
    double gamma = 1.0;
    int tau = 25;
    double beta = 0.3;
    int num_steps = 50;
    double guidance_scale = 7.5;
    uint64_t seed = 0;
    Variant variant = Variant::PIC;

    void validate() const;
    bool operator==(const EditConfig&) const = default;
};

/// Denoiser evaluations of one edit, counted before guidance doubling.
struct CallLedger {
    long forward_calls = 0;
    long corrected_calls = 0;
    long plain_calls = 0;
    long terminal_source_calls = 0;  // eps(x^src_T, T, y^src), uncached by the forward loop
    long snapshot_calls = 0;         // source passes recomputed for attention capture
    long guidance_calls = 0;         // attention reads for the latent guidance step
    int guidance_passes = 1;         // 2 under classifier-free guidance with w != 1

    long logical_total() const {
        return forward_calls + corrected_calls + plain_calls + terminal_source_calls + snapshot_calls + guidance_calls;
    }
    long model_evaluations() const { return logical_total() * guidance_passes; }
};

void to_json(nlohmann::json& j, const CallLedger& l);

/// Delta eps = eps_interp - eps_src_cond.
Tensor correction_term(const Tensor& eps_interp, const Tensor& eps_src_cond);

/// eps_hat = eps_src_saved + gamma * delta.
Tensor corrected_noise(const Tensor& eps_src_saved, const Tensor& delta, double gamma);

/// State handed to a correction provider at one corrected reverse step.
struct WindowStep {
    int t;
    const Tensor& x_tgt;
    const Tensor& x_src;           // cached x^src_t
    const PromptEmbedding& y_cond; // y_t for PIC, y^tgt for DDIM_NC
    const PromptEmbedding& y_src;
    const DiffusionSchedule& sched;
};

struct CorrectionOutput {
    Tensor delta;
    std::optional<Tensor> latent;  // replaces x^tgt_t before the reverse step when set
};

/// Produces the correction term for a corrected step; integrations plug in here.
class CorrectionProvider {
public:
    virtual ~CorrectionProvider() = default;
    virtual CorrectionOutput correct(const WindowStep& step, const Denoiser& model, CallLedger& ledger) = 0;
};

/// Two plain evaluations on x^tgt_t, combined as correction_term.
class PlainCorrection : public CorrectionProvider {
public:
    CorrectionOutput correct(const WindowStep& step, const Denoiser& model, CallLedger& ledger) override;
};

struct ReverseOptions {
    CorrectionProvider* provider = nullptr;  // PlainCorrection when null
    bool record_trajectory = false;
};

struct EditResult {
    Tensor output;
    CallLedger ledger;
    std::vector<Tensor> trajectory;  // x^tgt_T .. x^tgt_0 when recorded
};

/// Reverse loop for any variant, from a completed source cache.
EditResult run_variant(Variant variant, const TrajectoryCache& cache, const PromptEmbedding& y_src,
                       const PromptEmbedding& y_tgt, const InterpolationPlan& plan, const EditConfig& config,
                       const Denoiser& model, const DiffusionSchedule& sched, const ReverseOptions& options = {});

/// run_variant with Variant::PIC.
EditResult pic_reverse(const TrajectoryCache& cache, const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                       const InterpolationPlan& plan, const EditConfig& config, const Denoiser& model,
                       const DiffusionSchedule& sched, const ReverseOptions& options = {});

/// Plain DDIM reverse with fresh eps(x, t, y) from state x down to t = 0.
Tensor plain_reverse(LatentState x, const PromptEmbedding& y, const Denoiser& model, const DiffusionSchedule& sched,
                     CallLedger* ledger = nullptr);

int guidance_passes_of(const Denoiser& model);

}  // namespace pic
