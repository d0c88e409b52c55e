// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pic/denoiser.hpp"
#include "pic/schedule.hpp"

namespace pic {

/// Inverted source latents x^src_0..x^src_T and the source-conditioned noise
/// predictions eps(x^src_t, t, y^src) for t = 0..T-1. Write-once, then read-only.
struct TrajectoryCache {
    std::vector<LatentState> latents;
    std::vector<Tensor> source_noise;
    std::string prompt_fingerprint;
    long forward_calls = 0;

    int num_steps() const { return static_cast<int>(latents.size()) - 1; }
    const Tensor& terminal() const { return latents.back().data; }
};

/// Fingerprint of an embedding: sha256 over its shape and raw values.
std::string embedding_fingerprint(const PromptEmbedding& y);

TrajectoryCache invert_source(const Tensor& x0, const PromptEmbedding& y_src, const Denoiser& model,
                              const DiffusionSchedule& sched);

/// Steps whose stored latent does not equal the forward step over the stored noise.
/// Checks every step when `steps` is empty.
std::vector<int> replay_mismatches(const TrajectoryCache& cache, const DiffusionSchedule& sched,
                                   const std::vector<int>& steps = {});

/// Source noise to use at reverse step t: the cache entry for t < T, otherwise `terminal_eps`.
const Tensor& cached_source_noise(const TrajectoryCache& cache, int t, const Tensor& terminal_eps);

/// Reverse replay of the cached source noise from x^src_T (fresh evaluation only at t = T).
Tensor reconstruct_cached(const TrajectoryCache& cache, const PromptEmbedding& y_src, const Denoiser& model,
                          const DiffusionSchedule& sched);

/// Plain DDIM reverse from x^src_T with fresh eps conditioned on y^src.
Tensor reconstruct_fresh(const TrajectoryCache& cache, const PromptEmbedding& y_src, const Denoiser& model,
                         const DiffusionSchedule& sched);

struct CacheMeta {
    int num_steps = 0;
    int num_train_steps = 0;
    ScheduleKind schedule_kind = ScheduleKind::scaled_linear;
    Shape latent_shape;
    std::string prompt_fingerprint;
    std::string config_fingerprint;
    nlohmann::json extra;
};

/// Writes `meta.json` plus one .npy per latent and per noise, staged and renamed into place.
void save_cache(const std::filesystem::path& dir, const TrajectoryCache& cache, const CacheMeta& meta);

CacheMeta load_cache_meta(const std::filesystem::path& dir);

/// Loads and verifies the replay invariant on `sample_steps` evenly spread steps
/// (all steps when <= 0).
TrajectoryCache load_cache(const std::filesystem::path& dir, const DiffusionSchedule& sched, int sample_steps = 8);

}  // namespace pic
