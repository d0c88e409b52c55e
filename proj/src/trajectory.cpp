// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/trajectory.hpp"

#include <cstring>

#include "pic/error.hpp"
#include "pic/util.hpp"

namespace pic {

std::string embedding_fingerprint(const PromptEmbedding& y) {
    std::string bytes = shape_to_string(y.tokens.shape()) + "|" + std::to_string(y.meaningful_len) + "|";
    bytes.append(reinterpret_cast<const char*>(y.tokens.data()), y.tokens.size() * sizeof(double));
    return sha256_hex(bytes);
}

TrajectoryCache invert_source(const Tensor& x0, const PromptEmbedding& y_src, const Denoiser& model,
                              const DiffusionSchedule& sched) {
    if (!x0.all_finite()) throw ValidationError("source latent has non-finite entries");
    y_src.validate();
    TrajectoryCache cache;
    cache.prompt_fingerprint = embedding_fingerprint(y_src);
    cache.latents.push_back({x0, 0});
    for (int t = 0; t < sched.num_steps(); ++t) {
        const LatentState& x = cache.latents.back();
        Tensor eps = model.predict(x.data, t, y_src);
        ++cache.forward_calls;
        check_prediction(eps, x.data, t, "forward");
        LatentState next = forward_step(x, eps, sched);
        if (!next.data.all_finite()) throw NumericalError("non-finite latent", t + 1, "forward");
        cache.source_noise.push_back(std::move(eps));
        cache.latents.push_back(std::move(next));
    }
    return cache;
}

std::vector<int> replay_mismatches(const TrajectoryCache& cache, const DiffusionSchedule& sched,
                                   const std::vector<int>& steps) {
    std::vector<int> all;
    const std::vector<int>* which = &steps;
    if (steps.empty()) {
        for (int t = 0; t < cache.num_steps(); ++t) all.push_back(t);
        which = &all;
    }
    std::vector<int> bad;
    for (int t : *which) {
        if (t < 0 || t >= cache.num_steps()) throw IndexError("replay step " + std::to_string(t) + " outside cache");
        const Tensor& noise = cache.source_noise[static_cast<size_t>(t)];
        const Tensor& latent = cache.latents[static_cast<size_t>(t)].data;
        if (noise.shape() != latent.shape()) {
            bad.push_back(t);
            continue;
        }
        LatentState next = forward_step(cache.latents[static_cast<size_t>(t)], noise, sched);
        if (!bitwise_equal(next.data, cache.latents[static_cast<size_t>(t) + 1].data)) bad.push_back(t);
    }
    return bad;
}

const Tensor& cached_source_noise(const TrajectoryCache& cache, int t, const Tensor& terminal_eps) {
    if (t < cache.num_steps()) return cache.source_noise.at(static_cast<size_t>(t));
    return terminal_eps;
}

namespace {

void require_matching(const TrajectoryCache& cache, const DiffusionSchedule& sched) {
    if (cache.num_steps() != sched.num_steps())
        throw ValidationError("cache has " + std::to_string(cache.num_steps()) + " steps, schedule has " +
                              std::to_string(sched.num_steps()));
}

}  // namespace

Tensor reconstruct_cached(const TrajectoryCache& cache, const PromptEmbedding& y_src, const Denoiser& model,
                          const DiffusionSchedule& sched) {
    require_matching(cache, sched);
    const int T = sched.num_steps();
    LatentState x = cache.latents.back();
    if (T == 0) return x.data;
    Tensor terminal = model.predict(x.data, T, y_src);
    check_prediction(terminal, x.data, T, "terminal source");
    for (int t = T; t >= 1; --t) x = reverse_step(x, cached_source_noise(cache, t, terminal), sched);
    return x.data;
}

Tensor reconstruct_fresh(const TrajectoryCache& cache, const PromptEmbedding& y_src, const Denoiser& model,
                         const DiffusionSchedule& sched) {
    require_matching(cache, sched);
    LatentState x = cache.latents.back();
    for (int t = sched.num_steps(); t >= 1; --t) {
        Tensor eps = model.predict(x.data, t, y_src);
        check_prediction(eps, x.data, t, "reconstruct");
        x = reverse_step(x, eps, sched);
    }
    return x.data;
}

namespace {

std::string latent_name(int t) {
    return "latent_" + std::to_string(t) + ".npy";
}

std::string noise_name(int t) {
    return "noise_" + std::to_string(t) + ".npy";
}

}  // namespace

void save_cache(const std::filesystem::path& dir, const TrajectoryCache& cache, const CacheMeta& meta) {
    namespace fs = std::filesystem;
    if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
    fs::path stage = staging_path(dir);
    fs::create_directories(stage);
    for (int t = 0; t <= cache.num_steps(); ++t) save_npy(stage / latent_name(t), cache.latents[static_cast<size_t>(t)].data);
    for (int t = 0; t < cache.num_steps(); ++t) save_npy(stage / noise_name(t), cache.source_noise[static_cast<size_t>(t)]);
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"num_steps", meta.num_steps},
                        {"num_train_steps", meta.num_train_steps},
                        {"schedule", to_string(meta.schedule_kind)},
                        {"latent_shape", meta.latent_shape},
                        {"prompt_fingerprint", meta.prompt_fingerprint},
                        {"config_fingerprint", meta.config_fingerprint},
                        {"forward_calls", cache.forward_calls},
                        {"extra", meta.extra}};
    write_json_atomic(stage / "meta.json", j);

    std::error_code ec;
    fs::rename(stage, dir, ec);
    if (ec) {
        // Another writer finished first; their cache has the same content when fingerprints match.
        fs::remove_all(stage);
        if (!fs::exists(dir / "meta.json")) throw ValidationError("cannot place cache at " + dir.string() + ": " + ec.message());
    }
}

CacheMeta load_cache_meta(const std::filesystem::path& dir) {
    auto j = read_json(dir / "meta.json");
    if (j.value("schema_version", 0) != kSchemaVersion)
        throw ValidationError(dir.string() + ": unsupported cache schema version");
    CacheMeta meta;
    meta.num_steps = j.at("num_steps");
    meta.num_train_steps = j.at("num_train_steps");
    meta.schedule_kind = schedule_kind_from_string(j.at("schedule"));
    meta.latent_shape = j.at("latent_shape").get<Shape>();
    meta.prompt_fingerprint = j.at("prompt_fingerprint");
    meta.config_fingerprint = j.value("config_fingerprint", "");
    meta.extra = j.value("extra", nlohmann::json::object());
    return meta;
}

TrajectoryCache load_cache(const std::filesystem::path& dir, const DiffusionSchedule& sched, int sample_steps) {
    CacheMeta meta = load_cache_meta(dir);
    if (meta.num_steps != sched.num_steps())
        throw ValidationError(dir.string() + ": cache has " + std::to_string(meta.num_steps) + " steps, run expects " +
                              std::to_string(sched.num_steps()));
    TrajectoryCache cache;
    cache.prompt_fingerprint = meta.prompt_fingerprint;
    cache.forward_calls = read_json(dir / "meta.json").value("forward_calls", 0L);
    for (int t = 0; t <= meta.num_steps; ++t) {
        Tensor latent = load_npy(dir / latent_name(t));
        if (latent.shape() != meta.latent_shape) throw ValidationError(dir.string() + ": latent " + std::to_string(t) + " has wrong shape");
        cache.latents.push_back({std::move(latent), t});
    }
    for (int t = 0; t < meta.num_steps; ++t) cache.source_noise.push_back(load_npy(dir / noise_name(t)));

    std::vector<int> steps;
    int T = meta.num_steps;
    if (sample_steps <= 0 || sample_steps >= T) {
        for (int t = 0; t < T; ++t) steps.push_back(t);
    } else {
        for (int i = 0; i < sample_steps; ++i) steps.push_back(static_cast<int>(static_cast<long>(i) * (T - 1) / std::max(1, sample_steps - 1)));
    }
    auto bad = replay_mismatches(cache, sched, steps);
    if (!bad.empty())
        throw ValidationError(dir.string() + ": replay check failed at step " + std::to_string(bad.front()));
    return cache;
}

}  // namespace pic
