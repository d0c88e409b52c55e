// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/toy_studies.hpp"

#include <cmath>

#include "pic/trajectory.hpp"

namespace pic {

ToyDraw make_toy_draw(const ToyWorldParams& p, uint64_t seed) {
    std::mt19937_64 rng(seed);
    ToyDraw d;
    d.world = std::make_shared<GaussianWorld>(
        make_two_domain_world(p.latent_dim, p.edited, p.context_len, p.embed_dim, p.data_std, p.mean_scale, rng));
    std::normal_distribution<double> normal(0.0, 1.0);
    d.y_src.tokens = Tensor({p.context_len, p.embed_dim});
    for (double& v : d.y_src.tokens.values()) v = normal(rng);
    d.y_src.meaningful_len = static_cast<int>(p.context_len);
    d.y_src.text = "source";
    d.y_tgt = d.y_src;
    d.y_tgt.text = "target";
    size_t row = std::min<size_t>(1, p.context_len - 1);
    for (size_t k = 0; k < p.embed_dim; ++k) d.y_tgt.tokens.at(row, k) = normal(rng);
    d.x0 = d.world->mean(d.y_src);
    for (double& v : d.x0.values()) v += p.data_std * normal(rng);
    return d;
}

namespace {

double rms(const Tensor& a, const Tensor& b) {
    return (a - b).norm() / std::sqrt(static_cast<double>(a.size()));
}

}  // namespace

std::vector<ReconstructionRow> reconstruction_study(const ToyWorldParams& params, const std::vector<int>& steps,
                                                    int seeds, uint64_t first_seed) {
    std::vector<ReconstructionRow> rows;
    for (int T : steps) {
        ReconstructionRow row;
        row.steps = T;
        auto sched = build_schedule(params.train_steps, T, params.schedule);
        for (int s = 0; s < seeds; ++s) {
            ToyDraw d = make_toy_draw(params, first_seed + static_cast<uint64_t>(s));
            ToyDenoiser model(d.world, sched);
            auto cache = invert_source(d.x0, d.y_src, model, sched);
            row.cached_error += rms(reconstruct_cached(cache, d.y_src, model, sched), d.x0) / params.data_std;
            row.fresh_error += rms(reconstruct_fresh(cache, d.y_src, model, sched), d.x0) / params.data_std;
        }
        row.cached_error /= seeds;
        row.fresh_error /= seeds;
        rows.push_back(row);
    }
    return rows;
}

SurrogateScores surrogate_scores(const GaussianWorld& world, const Tensor& output, const Tensor& reference,
                                 const Tensor& target_mean) {
    double bd = 0.0, cs = 0.0;
    for (size_t i : world.shared_coords) bd += (output[i] - reference[i]) * (output[i] - reference[i]);
    for (size_t i : world.edited_coords) cs += (output[i] - target_mean[i]) * (output[i] - target_mean[i]);
    return {std::sqrt(bd), -std::sqrt(cs)};
}

bool AblationResult::bd_ordered() const {
    double pic = mean.at(Variant::PIC).bd, nc = mean.at(Variant::DDIM_NC).bd, pi = mean.at(Variant::DDIM_PI).bd,
           ddim = mean.at(Variant::DDIM).bd;
    return pic <= nc && nc <= pi && pi <= ddim && pic < ddim;
}

bool AblationResult::cs_within(double rel) const {
    double best = -INFINITY;
    for (const auto& [v, s] : mean) best = std::max(best, s.cs);
    return std::abs(mean.at(Variant::PIC).cs - best) <= rel * std::abs(best);
}

nlohmann::json AblationResult::to_json() const {
    nlohmann::json j;
    for (const auto& [v, s] : mean) j["variants"][to_string(v)] = {{"surrogate_bd", s.bd}, {"surrogate_cs", s.cs}};
    j["bd_ordered"] = bd_ordered();
    j["cs_within_5pct"] = cs_within(0.05);
    j["forward_calls"] = forward_calls;
    return j;
}

AblationResult toy_ablation(const AblationOptions& o) {
    AblationResult result;
    for (Variant v : all_variants()) result.mean[v] = {};
    auto sched = build_schedule(o.world.train_steps, o.steps, o.world.schedule);
    for (int s = 0; s < o.seeds; ++s) {
        ToyDraw d = make_toy_draw(o.world, o.first_seed + static_cast<uint64_t>(s));
        auto inner = std::make_shared<ToyDenoiser>(d.world, sched);
        PromptEmbedding null_embedding = d.y_src;
        for (double& v : null_embedding.tokens.values()) v = 0.0;
        GuidedDenoiser model(inner, null_embedding, o.guidance_scale);

        auto cache = invert_source(d.x0, d.y_src, model, sched);
        result.forward_calls += cache.forward_calls;
        Tensor reference = reconstruct_cached(cache, d.y_src, model, sched);
        Tensor target_mean = d.world->mean(d.y_tgt);

        InterpolationPlan plan;
        plan.kind = EditKind::replacement;
        plan.beta = o.beta;
        plan.total_steps = o.steps;
        EditConfig cfg;
        cfg.gamma = o.gamma;
        cfg.tau = o.tau;
        cfg.beta = o.beta;
        cfg.num_steps = o.steps;
        cfg.guidance_scale = o.guidance_scale;
        cfg.seed = o.first_seed + static_cast<uint64_t>(s);
        for (Variant v : all_variants()) {
            auto out = run_variant(v, cache, d.y_src, d.y_tgt, plan, cfg, model, sched);
            auto sc = surrogate_scores(*d.world, out.output, reference, target_mean);
            result.mean[v].bd += sc.bd / o.seeds;
            result.mean[v].cs += sc.cs / o.seeds;
        }
    }
    return result;
}

}  // namespace pic
