// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include "pic/correction.hpp"
#include "pic/error.hpp"
#include "pic/toy_studies.hpp"
#include "pic/trajectory.hpp"
#include "pic/util.hpp"

using namespace pic;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    DiffusionSchedule sched;
    ToyDraw draw;
    std::shared_ptr<ToyDenoiser> model;
    TrajectoryCache cache;

    explicit Fixture(int T, uint64_t seed = 11)
        : sched(build_schedule(1000, T, ScheduleKind::scaled_linear)), draw(make_toy_draw({}, seed)),
          model(std::make_shared<ToyDenoiser>(draw.world, sched)),
          cache(invert_source(draw.x0, draw.y_src, *model, sched)) {}

    InterpolationPlan plan(double beta = 0.3) const {
        InterpolationPlan p;
        p.beta = beta;
        p.total_steps = sched.num_steps();
        return p;
    }
    EditConfig config(int tau, double gamma = 1.0) const {
        EditConfig c;
        c.num_steps = sched.num_steps();
        c.tau = tau;
        c.gamma = gamma;
        c.guidance_scale = 1.0;
        return c;
    }
};

// Reverse loop written directly from the update rules, one scalar at a time.
Tensor oracle_pic(const Fixture& f, const Denoiser& model, int tau, double gamma, double beta) {
    const int T = f.sched.num_steps();
    Tensor x = f.cache.terminal();
    Tensor eps_terminal = model.predict(f.cache.latents[T].data, T, f.draw.y_src);
    for (int t = T; t >= 1; --t) {
        Tensor eps;
        if (t > T - tau) {
            double b = beta + (1.0 - beta) * (T - t) / T;
            PromptEmbedding yt = f.draw.y_src;
            for (size_t i = 0; i < yt.tokens.size(); ++i)
                yt.tokens[i] = b * f.draw.y_tgt.tokens[i] + (1.0 - b) * f.draw.y_src.tokens[i];
            Tensor d = model.predict(x, t, yt) - model.predict(x, t, f.draw.y_src);
            const Tensor& saved = t == T ? eps_terminal : f.cache.source_noise[t];
            eps = saved;
            for (size_t i = 0; i < eps.size(); ++i) eps[i] += gamma * d[i];
        } else {
            eps = model.predict(x, t, f.draw.y_tgt);
        }
        double a = f.sched.alpha(t), ap = f.sched.alpha(t - 1);
        for (size_t i = 0; i < x.size(); ++i)
            x[i] = std::sqrt(ap) * (x[i] - std::sqrt(1 - a) * eps[i]) / std::sqrt(a) + std::sqrt(1 - ap) * eps[i];
    }
    return x;
}

double rel(const Tensor& a, const Tensor& b) { return (a - b).norm() / b.norm(); }

class NanDenoiser : public Denoiser {
public:
    NanDenoiser(std::shared_ptr<const Denoiser> inner, int bad_step) : m_inner(std::move(inner)), m_bad(bad_step) {}
    Tensor predict(const Tensor& x, int step, const PromptEmbedding& y, HookContext* h) const override {
        Tensor e = m_inner->predict(x, step, y, h);
        if (step == m_bad && y.text == "target") e[0] = std::numeric_limits<double>::quiet_NaN();
        return e;
    }
    Shape latent_shape() const override { return m_inner->latent_shape(); }
    int context_length() const override { return m_inner->context_length(); }

private:
    std::shared_ptr<const Denoiser> m_inner;
    int m_bad;
};

}  // namespace

TEST(CorrectionTerm, Definition) {
    Tensor d = correction_term(Tensor({2}, {1, 2}), Tensor({2}, {0.5, 2}));
    EXPECT_EQ(d[0], 0.5);
    EXPECT_EQ(d[1], 0.0);
    Tensor e({3}, {0.1, 0.2, 0.3});
    EXPECT_EQ(correction_term(e, e).norm(), 0.0);
    EXPECT_THROW(correction_term(Tensor({2}), Tensor({3})), ValidationError);
}

TEST(CorrectionTerm, MatchesAnalyticMeanDifference) {
    // For the Gaussian denoiser the difference is linear in mu_t - mu_src.
    Fixture f(50);
    const auto& w = *f.draw.world;
    Tensor x = f.cache.latents[30].data;
    int t = 30;
    double a = f.sched.alpha(t), s2 = w.data_std * w.data_std;
    Tensor got = correction_term(f.model->predict(x, t, f.draw.y_tgt), f.model->predict(x, t, f.draw.y_src));
    Tensor dmu = w.mean(f.draw.y_tgt) - w.mean(f.draw.y_src);
    double coef = -std::sqrt(1 - a) * std::sqrt(a) / (a * s2 + 1 - a);
    EXPECT_LT(max_abs_diff(got, coef * dmu), 1e-12);
}

TEST(CorrectedNoise, Examples) {
    Tensor e({2}, {0.3, -0.7}), d({2}, {1.0, 2.0});
    EXPECT_TRUE(bitwise_equal(corrected_noise(e, d, 0.0), e));
    Tensor one = corrected_noise(e, d, 1.0);
    EXPECT_DOUBLE_EQ(one[0], 1.3);
    EXPECT_DOUBLE_EQ(one[1], 1.3);
    for (double g1 : {0.0, 0.5, 1.0})
        for (double g2 : {0.5, 1.0, 2.5})
            EXPECT_LT(max_abs_diff(corrected_noise(e, d, g1 + g2) - corrected_noise(e, d, g1), g2 * d), 1e-14);
    EXPECT_THROW(corrected_noise(e, Tensor({3}), 1.0), ValidationError);
}

TEST(EditConfig, Invariants) {
    EditConfig c;
    EXPECT_NO_THROW(c.validate());
    c.gamma = -0.1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.tau = 51;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.guidance_scale = 0.5;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_EQ(EditConfig{}.gamma, 1.0);
    EXPECT_EQ(EditConfig{}.tau, 25);
    EXPECT_EQ(EditConfig{}.num_steps, 50);
}

TEST(Variant, Names) {
    EXPECT_EQ(variant_from_string("DDIM+PI"), Variant::DDIM_PI);
    EXPECT_EQ(variant_from_string("DDIM_NC"), Variant::DDIM_NC);
    EXPECT_EQ(variant_from_string("pic"), Variant::PIC);
    EXPECT_THROW(variant_from_string("foo"), ConfigError);
}

TEST(PicReverse, MatchesDirectLoop) {
    Fixture f(50);
    for (int tau : {0, 1, 25, 50})
        for (double gamma : {0.5, 1.0, 2.5}) {
            auto res = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(tau, gamma), *f.model, f.sched);
            EXPECT_LT(rel(res.output, oracle_pic(f, *f.model, tau, gamma, 0.3)), 1e-12) << tau << " " << gamma;
        }
}

TEST(PicReverse, TauZeroIsNaiveDdim) {
    Fixture f(50);
    auto res = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(0), *f.model, f.sched);
    LatentState x{f.cache.terminal(), 50};
    while (x.t > 0) x = reverse_step(x, f.model->predict(x.data, x.t, f.draw.y_tgt), f.sched);
    EXPECT_TRUE(bitwise_equal(res.output, x.data));
}

TEST(PicReverse, VariantCollapseAtTauZero) {
    Fixture f(50);
    auto ddim = run_variant(Variant::DDIM, f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(25), *f.model, f.sched);
    for (Variant v : {Variant::PIC, Variant::DDIM_PI, Variant::DDIM_NC}) {
        auto r = run_variant(v, f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(0), *f.model, f.sched);
        EXPECT_TRUE(bitwise_equal(r.output, ddim.output)) << to_string(v);
    }
    EXPECT_EQ(ddim.ledger.corrected_calls, 0);
}

TEST(PicReverse, NoiseCorrectionEqualsPicWhenInterpolationDegenerate) {
    Fixture f(50);
    auto pic = run_variant(Variant::PIC, f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(1.0), f.config(25), *f.model, f.sched);
    auto nc = run_variant(Variant::DDIM_NC, f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(1.0), f.config(25), *f.model, f.sched);
    EXPECT_TRUE(bitwise_equal(pic.output, nc.output));
}

TEST(PicReverse, GammaZeroShortCircuitsAndReconstructs) {
    Fixture f(50);
    auto counting = std::make_shared<CountingDenoiser>(f.model);
    auto res = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(50, 0.0), *counting, f.sched);
    EXPECT_EQ(res.ledger.corrected_calls, 0);
    EXPECT_EQ(counting->calls(), 1);  // only the uncached terminal source prediction
    EXPECT_TRUE(bitwise_equal(res.output, reconstruct_cached(f.cache, f.draw.y_src, *f.model, f.sched)));
}

TEST(PicReverse, WindowGating) {
    Fixture f(50);
    ReverseOptions opts;
    opts.record_trajectory = true;
    auto res = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(20), *f.model, f.sched, opts);
    ASSERT_EQ(res.trajectory.size(), 51u);
    // trajectory[k] holds x at t = T - k; after the window the run is a plain reverse from that state.
    Tensor tail = plain_reverse({res.trajectory[20], 30}, f.draw.y_tgt, *f.model, f.sched);
    EXPECT_TRUE(bitwise_equal(tail, res.output));
}

TEST(PicReverse, LedgerFormulaWithAndWithoutGuidance) {
    for (int T : {5, 20, 50}) {
        Fixture f(T);
        auto counting = std::make_shared<CountingDenoiser>(f.model);
        PromptEmbedding null_embedding = f.draw.y_src;
        null_embedding.tokens = Tensor(null_embedding.tokens.shape());
        for (double w : {1.0, 7.5}) {
            GuidedDenoiser g(counting, null_embedding, w);
            for (int tau = 0; tau <= T; tau += std::max(1, T / 5)) {
                counting->reset();
                auto cache = invert_source(f.draw.x0, f.draw.y_src, g, f.sched);
                auto cfg = f.config(tau);
                cfg.guidance_scale = w;
                auto r = pic_reverse(cache, f.draw.y_src, f.draw.y_tgt, f.plan(), cfg, g, f.sched);
                const auto& l = r.ledger;
                EXPECT_EQ(l.forward_calls, T);
                EXPECT_EQ(l.corrected_calls, 2 * tau);
                EXPECT_EQ(l.plain_calls, T - tau);
                EXPECT_EQ(l.terminal_source_calls, tau > 0 ? 1 : 0);
                EXPECT_EQ(l.guidance_passes, w == 1.0 ? 1 : 2);
                EXPECT_EQ(counting->calls(), l.model_evaluations());
            }
        }
    }
}

TEST(PicReverse, Deterministic) {
    Fixture f(50);
    auto a = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(25), *f.model, f.sched);
    auto b = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(25), *f.model, f.sched);
    EXPECT_TRUE(bitwise_equal(a.output, b.output));
}

TEST(PicReverse, StepMismatchIsValidationError) {
    Fixture f(50);
    auto cfg = f.config(10);
    cfg.num_steps = 40;
    EXPECT_THROW(pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), cfg, *f.model, f.sched), ValidationError);
}

TEST(PicReverse, NonFiniteNamesStepAndBranch) {
    Fixture f(50);
    NanDenoiser bad(f.model, 10);
    try {
        pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(25), bad, f.sched);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_EQ(e.step(), 10);
        EXPECT_FALSE(e.branch().empty());
        EXPECT_EQ(e.exit_code(), ExitCode::numerical);
    }
}

TEST(ToyEdit, MovesTowardTargetAndKeepsBackground) {
    double edited_to_tgt = 0, edited_to_src = 0, bg_pic = 0, bg_naive = 0;
    for (uint64_t s = 0; s < 100; ++s) {
        Fixture f(50, s);
        const auto& w = *f.draw.world;
        Tensor mu_t = w.mean(f.draw.y_tgt), mu_s = w.mean(f.draw.y_src);
        Tensor ref = reconstruct_cached(f.cache, f.draw.y_src, *f.model, f.sched);
        Tensor pic = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(25), *f.model, f.sched).output;
        Tensor naive = pic_reverse(f.cache, f.draw.y_src, f.draw.y_tgt, f.plan(), f.config(0), *f.model, f.sched).output;
        for (size_t i : w.edited_coords) {
            edited_to_tgt += std::pow(pic[i] - mu_t[i], 2);
            edited_to_src += std::pow(pic[i] - mu_s[i], 2);
        }
        double a = 0, b = 0;
        for (size_t i : w.shared_coords) {
            a += std::pow(pic[i] - ref[i], 2);
            b += std::pow(naive[i] - ref[i], 2);
        }
        bg_pic += std::sqrt(a);
        bg_naive += std::sqrt(b);
    }
    EXPECT_LT(edited_to_tgt, edited_to_src);
    EXPECT_LT(bg_pic, bg_naive);
}

TEST(Trajectory, DegenerateZeroSteps) {
    auto sched = DiffusionSchedule::from_alphas({1.0});
    Fixture f(5);
    auto c = invert_source(f.draw.x0, f.draw.y_src, *f.model, sched);
    EXPECT_EQ(c.latents.size(), 1u);
    EXPECT_TRUE(c.source_noise.empty());
    EXPECT_EQ(c.forward_calls, 0);
}

TEST(Trajectory, ReplayInvariantBitwise) {
    Fixture f(50);
    EXPECT_TRUE(replay_mismatches(f.cache, f.sched).empty());
    EXPECT_EQ(f.cache.forward_calls, 50);
    auto broken = f.cache;
    broken.latents[7].data[0] += 1e-12;
    EXPECT_EQ(replay_mismatches(broken, f.sched), (std::vector<int>{6, 7}));
}

TEST(Trajectory, ReconstructionErrorShrinksWithSteps) {
    auto rows = reconstruction_study({}, {25, 50, 100}, 20, 3);
    EXPECT_GT(rows[0].cached_error, rows[1].cached_error);
    EXPECT_GT(rows[1].cached_error, rows[2].cached_error);
    EXPECT_GT(rows[0].fresh_error, rows[1].fresh_error);
    EXPECT_GT(rows[1].fresh_error, rows[2].fresh_error);
}

TEST(Trajectory, SaveLoadRoundTrip) {
    Fixture f(10);
    fs::path dir = fs::temp_directory_path() / ("pic_cache_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    CacheMeta meta;
    meta.num_steps = 10;
    meta.num_train_steps = 1000;
    meta.latent_shape = f.draw.x0.shape();
    meta.prompt_fingerprint = f.cache.prompt_fingerprint;
    meta.config_fingerprint = "abc";
    save_cache(dir, f.cache, meta);
    auto loaded = load_cache(dir, f.sched, 0);
    EXPECT_EQ(loaded.forward_calls, 10);
    for (int t = 0; t <= 10; ++t) EXPECT_TRUE(bitwise_equal(loaded.latents[t].data, f.cache.latents[t].data));
    for (int t = 0; t < 10; ++t) EXPECT_TRUE(bitwise_equal(loaded.source_noise[t], f.cache.source_noise[t]));
    EXPECT_EQ(read_json(dir / "meta.json")["schema_version"], kSchemaVersion);

    // A corrupted latent fails the replay check on load.
    Tensor bad = load_npy(dir / "latent_4.npy");
    bad[0] += 0.5;
    save_npy(dir / "latent_4.npy", bad);
    EXPECT_THROW(load_cache(dir, f.sched, 0), ValidationError);
    EXPECT_THROW(load_cache(dir, build_schedule(1000, 12, ScheduleKind::scaled_linear)), ValidationError);
    fs::remove_all(dir);
}

TEST(Trajectory, EmbeddingFingerprintTracksContent) {
    Fixture f(5);
    EXPECT_EQ(embedding_fingerprint(f.draw.y_src), embedding_fingerprint(f.draw.y_src));
    EXPECT_NE(embedding_fingerprint(f.draw.y_src), embedding_fingerprint(f.draw.y_tgt));
}
