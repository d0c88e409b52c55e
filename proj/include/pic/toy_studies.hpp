// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <vector>

#include "json.hpp"
#include "pic/correction.hpp"
#include "pic/toy.hpp"

namespace pic {

/// Shared shape of the small two-domain worlds used by the studies.
struct ToyWorldParams {
    size_t latent_dim = 8;
    size_t edited = 4;
    size_t context_len = 2;
    size_t embed_dim = 4;
    double data_std = 1.0;
    double mean_scale = 1.0;
    int train_steps = 1000;
    ScheduleKind schedule = ScheduleKind::scaled_linear;
};

/// One random draw: world, source/target embeddings (target differs in token 1) and x0 ~ N(mu_src, sigma^2).
struct ToyDraw {
    std::shared_ptr<GaussianWorld> world;
    PromptEmbedding y_src;
    PromptEmbedding y_tgt;
    Tensor x0;
};

ToyDraw make_toy_draw(const ToyWorldParams& params, uint64_t seed);

struct ReconstructionRow {
    int steps = 0;
    double cached_error = 0.0;  // replay of cached source noise (the gamma = 0, tau = T edit)
    double fresh_error = 0.0;   // plain reverse with fresh source-conditioned eps
};

/// Mean over seeds of RMS(reconstruction - x0) / sigma.
std::vector<ReconstructionRow> reconstruction_study(const ToyWorldParams& params, const std::vector<int>& steps,
                                                    int seeds, uint64_t first_seed = 0);

struct SurrogateScores {
    double bd = 0.0;  // distance on shared coordinates to the source reconstruction
    double cs = 0.0;  // minus distance of edited coordinates to the target mean
};

SurrogateScores surrogate_scores(const GaussianWorld& world, const Tensor& output, const Tensor& reference,
                                 const Tensor& target_mean);

struct AblationOptions {
    ToyWorldParams world;
    int seeds = 100;
    uint64_t first_seed = 0;
    int steps = 50;
    int tau = 25;
    double gamma = 1.0;
    double beta = 0.3;
    double guidance_scale = 1.0;
};

struct AblationResult {
    std::map<Variant, SurrogateScores> mean;
    long forward_calls = 0;

    /// PIC <= DDIM_NC <= DDIM_PI <= DDIM on surrogate BD, with PIC < DDIM.
    bool bd_ordered() const;
    /// |CS_PIC - CS_best| <= rel * |CS_best|.
    bool cs_within(double rel) const;
    nlohmann::json to_json() const;
};

AblationResult toy_ablation(const AblationOptions& options);

}  // namespace pic
