// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/invariant_suite.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "pic/correction.hpp"
#include "pic/error.hpp"
#include "pic/integrations.hpp"
#include "pic/metrics.hpp"
#include "pic/toy_studies.hpp"
#include "pic/trajectory.hpp"
#include "pic/util.hpp"

namespace pic {

bool SuiteReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

nlohmann::json SuiteReport::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["all_passed"] = all_passed();
    for (const auto& c : checks)
        j["checks"].push_back({{"name", c.name},
                               {"passed", c.passed},
                               {"measured", c.measured},
                               {"tolerance", c.tolerance},
                               {"detail", c.detail}});
    j["tables"] = tables;
    return j;
}

std::string SuiteReport::to_table() const {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-34s %-5s %12s %12s  %s\n", "check", "ok", "measured", "tolerance", "detail");
    out << line;
    for (const auto& c : checks) {
        std::snprintf(line, sizeof line, "%-34s %-5s %12.3e %12.3e  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                      c.measured, c.tolerance, c.detail.c_str());
        out << line;
    }
    if (tables.contains("reconstruction")) {
        out << "\nreconstruction error / sigma\n";
        for (const auto& r : tables["reconstruction"]) {
            std::snprintf(line, sizeof line, "  T=%-4d cached %.4f  fresh %.4f\n", r["steps"].get<int>(),
                          r["cached"].get<double>(), r["fresh"].get<double>());
            out << line;
        }
    }
    return out.str();
}

namespace {

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Tensor t(shape);
    for (double& v : t.values()) v = n(rng);
    return t;
}

PromptEmbedding random_embedding(size_t L, size_t D, std::mt19937_64& rng) {
    PromptEmbedding y;
    y.tokens = random_tensor({L, D}, rng);
    y.meaningful_len = static_cast<int>(L);
    return y;
}

void add(SuiteReport& r, const std::string& name, const std::function<SuiteCheck()>& fn) {
    SuiteCheck c;
    try {
        c = fn();
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.name = name;
    r.checks.push_back(std::move(c));
}

}  // namespace

SuiteReport run_invariant_suite(const SuiteOptions& o) {
    SuiteReport report;
    const uint64_t seed = o.seed;

    add(report, "schedule_monotone", [&] {
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        auto alphas = sched.alphas();
        if (o.corrupt_schedule) std::swap(alphas[10], alphas[20]);
        auto bad = schedule_violations(alphas);
        return SuiteCheck{"", bad.empty(), static_cast<double>(bad.size()), 0.0,
                          bad.empty() ? "51 entries, strictly decreasing" : bad.front()};
    });

    add(report, "ddim_algebraic_inverse", [&] {
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> step(0, 49);
        double worst = 0.0;
        for (int i = 0; i < o.draws; ++i) {
            Tensor x = random_tensor({16}, rng), e = random_tensor({16}, rng);
            int t = step(rng);
            auto back = reverse_step(forward_step({x, t}, e, sched), e, sched);
            worst = std::max(worst, (back.data - x).norm() / x.norm());
        }
        return SuiteCheck{"", worst <= 1e-6, worst, 1e-6, std::to_string(o.draws) + " draws"};
    });

    add(report, "trajectory_replay", [&] {
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        ToyDraw d = make_toy_draw({}, seed);
        ToyDenoiser model(d.world, sched);
        auto cache = invert_source(d.x0, d.y_src, model, sched);
        auto bad = replay_mismatches(cache, sched);
        return SuiteCheck{"", bad.empty(), static_cast<double>(bad.size()), 0.0, "bitwise replay over 50 steps"};
    });

    add(report, "reconstruction_decreasing", [&] {
        auto rows = reconstruction_study({}, {25, 50, 100}, o.recon_seeds, seed);
        nlohmann::json table = nlohmann::json::array();
        for (const auto& r : rows) table.push_back({{"steps", r.steps}, {"cached", r.cached_error}, {"fresh", r.fresh_error}});
        report.tables["reconstruction"] = table;
        bool dec = rows[0].cached_error > rows[1].cached_error && rows[1].cached_error > rows[2].cached_error &&
                   rows[0].fresh_error > rows[1].fresh_error && rows[1].fresh_error > rows[2].fresh_error;
        return SuiteCheck{"", dec, rows[2].cached_error, 0.0, "error / sigma at T = 25, 50, 100 strictly decreasing"};
    });

    add(report, "interpolation_endpoints", [&] {
        std::mt19937_64 rng(seed + 1);
        bool ok = mixing_coefficient(50, 50, 0.3) == 0.3 && mixing_coefficient(0, 50, 0.3) == 1.0;
        auto a = random_embedding(7, 3, rng), b = random_embedding(7, 3, rng);
        ok = ok && bitwise_equal(interpolate_replacement(a, b, 0.0).tokens, a.tokens) &&
             bitwise_equal(interpolate_replacement(a, b, 1.0).tokens, b.tokens);
        InterpolationPlan ins{EditKind::insertion, 2, 3, 0.8, 50, "", ""};
        auto out = interpolate_insertion(a, b, ins, 0.37);
        for (size_t l = 2; l <= 3; ++l)
            for (size_t k = 0; k < 3; ++k) ok = ok && out.tokens.at(l, k) == b.tokens.at(l, k);
        return SuiteCheck{"", ok, ok ? 0.0 : 1.0, 0.0, "beta_T, beta_0, replacement endpoints, insertion span"};
    });

    add(report, "correction_algebra", [&] {
        std::mt19937_64 rng(seed + 2);
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        ToyDraw d = make_toy_draw({}, seed);
        ToyDenoiser model(d.world, sched);
        Tensor x = random_tensor({8}, rng);
        Tensor zero = correction_term(model.predict(x, 30, d.y_src), model.predict(x, 30, d.y_src));
        double worst = zero.norm();
        Tensor e = random_tensor({8}, rng), dl = random_tensor({8}, rng);
        for (double g : {0.0, 0.5, 1.0, 2.5}) {
            Tensor diff = corrected_noise(e, dl, g + 0.5) - corrected_noise(e, dl, g);
            worst = std::max(worst, max_abs_diff(diff, 0.5 * dl));
        }
        return SuiteCheck{"", worst <= 1e-12, worst, 1e-12, "zero delta at y_t = y_src; affine in gamma"};
    });

    auto edit_setup = [&](int T) {
        auto sched = build_schedule(1000, T, ScheduleKind::scaled_linear);
        ToyDraw d = make_toy_draw({}, seed + 3);
        auto model = std::make_shared<ToyDenoiser>(d.world, sched);
        return std::make_tuple(sched, d, model);
    };

    add(report, "variant_collapse_tau0", [&] {
        auto [sched, d, model] = edit_setup(50);
        auto cache = invert_source(d.x0, d.y_src, *model, sched);
        InterpolationPlan plan{EditKind::replacement, -1, -1, 0.3, 50, "", ""};
        EditConfig cfg;
        cfg.tau = 0;
        cfg.guidance_scale = 1.0;
        Tensor ref = run_variant(Variant::DDIM, cache, d.y_src, d.y_tgt, plan, cfg, *model, sched).output;
        bool same = true;
        for (Variant v : {Variant::PIC, Variant::DDIM_PI, Variant::DDIM_NC})
            same = same && bitwise_equal(run_variant(v, cache, d.y_src, d.y_tgt, plan, cfg, *model, sched).output, ref);
        return SuiteCheck{"", same, same ? 0.0 : 1.0, 0.0, "bitwise"};
    });

    add(report, "gamma0_collapse", [&] {
        auto [sched, d, model] = edit_setup(50);
        auto cache = invert_source(d.x0, d.y_src, *model, sched);
        InterpolationPlan plan{EditKind::replacement, -1, -1, 0.3, 50, "", ""};
        EditConfig cfg;
        cfg.gamma = 0.0;
        cfg.tau = 50;
        cfg.guidance_scale = 1.0;
        auto res = pic_reverse(cache, d.y_src, d.y_tgt, plan, cfg, *model, sched);
        bool ok = res.ledger.corrected_calls == 0 &&
                  bitwise_equal(res.output, reconstruct_cached(cache, d.y_src, *model, sched));
        return SuiteCheck{"", ok, static_cast<double>(res.ledger.corrected_calls), 0.0,
                          "zero target evaluations, output equals cached reconstruction bitwise"};
    });

    add(report, "call_ledger", [&] {
        bool ok = true;
        for (int T : {10, 50}) {
            auto [sched, d, model] = edit_setup(T);
            auto counting = std::make_shared<CountingDenoiser>(model);
            PromptEmbedding null_embedding = d.y_src;
            for (double& v : null_embedding.tokens.values()) v = 0.0;
            for (double w : {1.0, 7.5}) {
                GuidedDenoiser guided(counting, null_embedding, w);
                for (int tau : {0, 1, T / 2, T}) {
                    counting->reset();
                    auto cache = invert_source(d.x0, d.y_src, guided, sched);
                    InterpolationPlan plan{EditKind::replacement, -1, -1, 0.3, T, "", ""};
                    EditConfig cfg;
                    cfg.num_steps = T;
                    cfg.tau = tau;
                    cfg.guidance_scale = w;
                    auto res = pic_reverse(cache, d.y_src, d.y_tgt, plan, cfg, guided, sched);
                    const auto& l = res.ledger;
                    ok = ok && l.forward_calls == T && l.corrected_calls == 2 * tau && l.plain_calls == T - tau &&
                         counting->calls() == l.model_evaluations() && l.guidance_passes == (w == 1.0 ? 1 : 2);
                }
            }
        }
        return SuiteCheck{"", ok, ok ? 0.0 : 1.0, 0.0, "forward T, corrected 2 tau, plain T - tau; x2 under CFG"};
    });

    add(report, "guidance_affine", [&] {
        std::mt19937_64 rng(seed + 4);
        auto [sched, d, model] = edit_setup(50);
        PromptEmbedding null_embedding = d.y_src;
        for (double& v : null_embedding.tokens.values()) v = 0.0;
        Tensor x = random_tensor({8}, rng);
        auto p = [&](double w) { return GuidedDenoiser(model, null_embedding, w).predict(x, 20, d.y_tgt); };
        double err = max_abs_diff(p(2.0) - p(1.0), p(1.0) - p(0.0));
        bool ok = err <= 1e-12 && bitwise_equal(p(1.0), model->predict(x, 20, d.y_tgt));
        return SuiteCheck{"", ok, err, 1e-12, "p(2) - p(1) = p(1) - p(0); w = 1 exact"};
    });

    add(report, "determinism", [&] {
        auto [sched, d, model] = edit_setup(50);
        InterpolationPlan plan{EditKind::replacement, -1, -1, 0.3, 50, "", ""};
        EditConfig cfg;
        cfg.guidance_scale = 1.0;
        auto c1 = invert_source(d.x0, d.y_src, *model, sched);
        auto c2 = invert_source(d.x0, d.y_src, *model, sched);
        bool ok = bitwise_equal(pic_reverse(c1, d.y_src, d.y_tgt, plan, cfg, *model, sched).output,
                                pic_reverse(c2, d.y_src, d.y_tgt, plan, cfg, *model, sched).output);
        return SuiteCheck{"", ok, ok ? 0.0 : 1.0, 0.0, "repeated runs bitwise identical"};
    });

    add(report, "p2p_gradient_fd", [&] {
        std::mt19937_64 rng(seed + 5);
        GaussianWorld w;
        w.latent_shape = {3, 2, 3};
        w.context_len = 4;
        w.embed_dim = 5;
        w.mean_map = Tensor({18, 20});
        w.bias = Tensor({18});
        for (size_t i = 0; i < 18; ++i) w.shared_coords.push_back(i);
        auto world = std::make_shared<GaussianWorld>(w);
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        AttentionToyDenoiser model(world, sched, 2, 3, 0.05, seed);
        double worst = 0.0;
        for (int probe = 0; probe < 100; ++probe) {
            Tensor x = random_tensor({3, 2, 3}, rng);
            auto y = random_embedding(4, 5, rng), y2 = random_embedding(4, 5, rng);
            auto target = model.cross_maps(random_tensor({3, 2, 3}, rng), 10, y2);
            Tensor g = model.cross_loss_gradient(x, 10, y, target, nullptr);
            Tensor fd(x.shape());
            const double h = 1e-5;
            for (size_t i = 0; i < x.size(); ++i) {
                Tensor xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                double lp, lm;
                model.cross_loss_gradient(xp, 10, y, target, &lp);
                model.cross_loss_gradient(xm, 10, y, target, &lm);
                fd[i] = (lp - lm) / (2 * h);
            }
            worst = std::max(worst, (g - fd).norm() / std::max(fd.norm(), 1e-12));
        }
        return SuiteCheck{"", worst <= 1e-5, worst, 1e-5, "100 probes, central differences"};
    });

    add(report, "integration_reduction", [&] {
        std::mt19937_64 rng(seed + 6);
        GaussianWorld w;
        w.latent_shape = {2, 2, 2};
        w.context_len = 3;
        w.embed_dim = 4;
        w.mean_map = random_tensor({8, 12}, rng);
        w.bias = Tensor({8});
        for (size_t i = 0; i < 8; ++i) w.edited_coords.push_back(i);
        auto world = std::make_shared<GaussianWorld>(w);
        auto sched = build_schedule(1000, 50, ScheduleKind::scaled_linear);
        AttentionToyDenoiser model(world, sched, 2, 3, 0.05, seed);
        Tensor x = random_tensor({2, 2, 2}, rng);
        auto yt = random_embedding(3, 4, rng), ys = random_embedding(3, 4, rng);
        Tensor base = correction_term(model.predict(x, 40, yt), model.predict(x, 40, ys));
        AttentionSnapshot empty;
        auto ptp = ptp_corrected_predict(model, x, 40, yt, ys, empty, {}, 50);
        auto pnp = pnp_corrected_predict(model, x, 40, yt, ys, empty, {}, 50);
        GuidanceConfig no_step;
        no_step.lambda_xa = 0.0;
        Tensor xh = p2p_guidance_step(model, x, 40, yt, capture_source(model, x, 40, ys), no_step);
        bool ok = bitwise_equal(correction_term(ptp.first, ptp.second), base) &&
                  bitwise_equal(correction_term(pnp.first, pnp.second), base) &&
                  bitwise_equal(p2p_correction(model, xh, 40, yt, ys), base);
        return SuiteCheck{"", ok, ok ? 0.0 : 1.0, 0.0, "disabled ptp / pnp / p2p equal the base correction"};
    });

    add(report, "toy_edit_ordering", [&] {
        AblationOptions ao;
        ao.seeds = o.edit_seeds;
        ao.first_seed = seed;
        auto res = toy_ablation(ao);
        report.tables["ablation"] = res.to_json();
        bool ok = res.bd_ordered() && res.cs_within(0.05);
        char detail[160];
        std::snprintf(detail, sizeof detail, "surrogate BD PIC %.4f NC %.4f PI %.4f DDIM %.4f; PIC CS within 5%% of best",
                      res.mean.at(Variant::PIC).bd, res.mean.at(Variant::DDIM_NC).bd, res.mean.at(Variant::DDIM_PI).bd,
                      res.mean.at(Variant::DDIM).bd);
        return SuiteCheck{"", ok, res.mean.at(Variant::PIC).bd, 0.0, detail};
    });

    add(report, "metric_self_distance", [&] {
        std::mt19937_64 rng(seed + 7);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Image img(32, 32);
        for (double& v : img.pixels) v = u(rng);
        FixedBoxDetector det({0.25, 0.25, 0.75, 0.75});
        MultiScaleDistance lp;
        PatchAffinityExtractor vit;
        double bd = background_distance(img, img, "x", "obj", det, lp).value;
        double sd = structure_distance(img, img, vit);
        return SuiteCheck{"", bd == 0.0 && sd == 0.0, bd + sd, 0.0, "BD(x, x) = SD(x, x) = 0"};
    });

    return report;
}

}  // namespace pic
