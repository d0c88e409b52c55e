// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "pic/adapters.hpp"
#include "pic/error.hpp"
#include "pic/integrations.hpp"

using namespace pic;

namespace {

// eps(x, t, y) = c * y[0] + t, independent of x; enough to check guidance arithmetic.
class ConstDenoiser : public Denoiser {
public:
    Tensor predict(const Tensor& latent, int step, const PromptEmbedding& y, HookContext*) const override {
        Tensor out(latent.shape(), y.tokens[0] + step);
        return out;
    }
    Shape latent_shape() const override { return {2}; }
    int context_length() const override { return 1; }
};

PromptEmbedding scalar_embedding(double v) {
    PromptEmbedding y;
    y.tokens = Tensor({1, 1}, v);
    return y;
}

struct AttentionFixture {
    Backbone b = make_backbone("toy-attention", {1000, 10, ScheduleKind::scaled_linear, 0, ""});
    PromptEmbedding y_src = b.encoder->encode("a cat sitting on a mat");
    PromptEmbedding y_tgt = b.encoder->encode("a dog sitting on a mat");
    Tensor x_src = Tensor(b.denoiser->latent_shape(), 0.3);
    Tensor x_tgt = Tensor(b.denoiser->latent_shape(), -0.1);

    AttentionFixture() {
        for (size_t i = 0; i < x_src.size(); ++i) {
            x_src[i] += 0.01 * static_cast<double>(i % 7);
            x_tgt[i] -= 0.02 * static_cast<double>(i % 5);
        }
    }
};

}  // namespace

TEST(Guidance, UnitScaleIsConditionalOnly) {
    auto inner = std::make_shared<ConstDenoiser>();
    GuidedDenoiser g(inner, scalar_embedding(1.0), 1.0);
    EXPECT_EQ(g.passes(), 1);
    EXPECT_EQ(g.predict(Tensor({2}), 0, scalar_embedding(2.0))[0], 2.0);
}

TEST(Guidance, ZeroScaleIsUnconditional) {
    GuidedDenoiser g(std::make_shared<ConstDenoiser>(), scalar_embedding(1.0), 0.0);
    EXPECT_EQ(g.predict(Tensor({2}), 0, scalar_embedding(2.0))[0], 1.0);
}

TEST(Guidance, HandExample) {
    GuidedDenoiser g(std::make_shared<ConstDenoiser>(), scalar_embedding(1.0), 7.5);
    EXPECT_EQ(g.passes(), 2);
    EXPECT_DOUBLE_EQ(g.predict(Tensor({2}), 0, scalar_embedding(2.0))[1], 8.5);
}

TEST(Guidance, AffineInScale) {
    auto inner = std::make_shared<ConstDenoiser>();
    auto at = [&](double w) {
        return GuidedDenoiser(inner, scalar_embedding(-0.4), w).predict(Tensor({2}), 3, scalar_embedding(1.3))[0];
    };
    double slope = at(1.0) - at(0.0);
    for (double w : {0.5, 2.0, 7.5, 12.0}) EXPECT_NEAR(at(w), at(0.0) + w * slope, 1e-12);
    EXPECT_THROW(GuidedDenoiser(inner, scalar_embedding(0.0), -1.0), ConfigError);
}

TEST(Guidance, CountsInnerPasses) {
    auto counter = std::make_shared<CountingDenoiser>(std::make_shared<ConstDenoiser>());
    GuidedDenoiser g(counter, scalar_embedding(0.0), 7.5);
    for (int i = 0; i < 3; ++i) g.predict(Tensor({2}), i, scalar_embedding(1.0));
    EXPECT_EQ(counter->calls(), 6);
    EXPECT_EQ(guidance_passes_of(g), 2);
}

TEST(Hooks, CrossInjectionAppearsVerbatimInTrace) {
    AttentionFixture f;
    const int T = 10, t = 9;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, t, f.y_src);
    ASSERT_EQ(source.cross_maps.size(), 2u);
    HookContext trace;
    trace.enable_trace(true);
    ptp_corrected_predict(*f.b.denoiser, f.x_tgt, t, f.y_tgt, f.y_src, source, {}, T, &trace);
    int injected = 0;
    for (const auto& e : trace.trace()) {
        if (e.kind == HookKind::feature) {
            EXPECT_FALSE(e.injected);
            continue;
        }
        ASSERT_TRUE(e.injected) << e.layer << " " << to_string(e.kind);
        EXPECT_TRUE(bitwise_equal(e.value, source.group(e.kind).at(e.layer)));
        ++injected;
    }
    EXPECT_EQ(injected, 4);
}

TEST(Hooks, OutsideWindowNothingInjected) {
    AttentionFixture f;
    const int T = 10, t = 1;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, t, f.y_src);
    HookContext trace;
    trace.enable_trace(true);
    auto pair = ptp_corrected_predict(*f.b.denoiser, f.x_tgt, t, f.y_tgt, f.y_src, source, {}, T, &trace);
    for (const auto& e : trace.trace()) EXPECT_FALSE(e.injected);
    EXPECT_TRUE(bitwise_equal(pair.first, f.b.denoiser->predict(f.x_tgt, t, f.y_tgt)));
}

TEST(Hooks, FeatureInjectionIsBitwise) {
    AttentionFixture f;
    const int T = 10, t = 10;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, t, f.y_src);
    HookContext trace;
    trace.enable_trace(true);
    pnp_corrected_predict(*f.b.denoiser, f.x_tgt, t, f.y_tgt, f.y_src, source, {}, T, &trace);
    int features = 0;
    for (const auto& e : trace.trace()) {
        if (e.kind == HookKind::cross_attention) {
            EXPECT_FALSE(e.injected);
            continue;
        }
        ASSERT_TRUE(e.injected);
        EXPECT_TRUE(bitwise_equal(e.value, source.group(e.kind).at(e.layer)));
        features += e.kind == HookKind::feature;
    }
    EXPECT_EQ(features, 2);
}

TEST(Hooks, InjectionChangesPrediction) {
    AttentionFixture f;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, 10, f.y_src);
    auto pair = ptp_corrected_predict(*f.b.denoiser, f.x_tgt, 10, f.y_tgt, f.y_src, source, {}, 10);
    EXPECT_GT(max_abs_diff(pair.first, f.b.denoiser->predict(f.x_tgt, 10, f.y_tgt)), 0.0);
    EXPECT_TRUE(bitwise_equal(pair.second, f.b.denoiser->predict(f.x_tgt, 10, f.y_src)));
}

TEST(Hooks, RejectsNonStochasticRows) {
    AttentionFixture f;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, 10, f.y_src);
    source.cross_maps.begin()->second[0] += 0.5;
    EXPECT_THROW(ptp_corrected_predict(*f.b.denoiser, f.x_tgt, 10, f.y_tgt, f.y_src, source, {}, 10),
                 ValidationError);
    Tensor m({2, 3}, {0.2, 0.3, 0.5, 0.1, 0.1, 0.1});
    EXPECT_THROW(validate_attention_rows(m, "m"), ValidationError);
}

TEST(Hooks, SnapshotStepMismatch) {
    AttentionFixture f;
    AttentionSnapshot source = capture_source(*f.b.denoiser, f.x_src, 9, f.y_src);
    EXPECT_THROW(ptp_corrected_predict(*f.b.denoiser, f.x_tgt, 8, f.y_tgt, f.y_src, source, {}, 10), ValidationError);
}

TEST(Hooks, GuidanceKeepsHooksOnConditionalPass) {
    AttentionFixture f;
    GuidedDenoiser g(f.b.denoiser, f.b.encoder->encode(""), 7.5);
    HookContext trace;
    trace.enable_trace(true);
    g.predict(f.x_tgt, 5, f.y_tgt, &trace);
    EXPECT_EQ(trace.trace().size(), f.b.denoiser->hook_points().size());
}

TEST(TargetPrompt, WordReplacement) {
    TaskSpec horse{"zebra2horse", TaskFamily::word_replacement, "zebra", "horse"};
    EXPECT_EQ(build_target_prompt("A zebra is lying on the grass.", horse), "A horse is lying on the grass.");
    EXPECT_EQ(build_target_prompt("A zebra is lying on the grass.", task_preset("zebra2horse")),
              "A horse is lying on the grass.");
}

TEST(TargetPrompt, PhraseInsertion) {
    EXPECT_EQ(build_target_prompt("a dog sitting on a bench", task_preset("dog2dog_glasses")),
              "a dog with glasses sitting on a bench");
}

TEST(TargetPrompt, MissingWordIsTaskMismatch) {
    EXPECT_THROW(build_target_prompt("a cat on a sofa", task_preset("dog2cat")), TaskMismatchError);
    // Whole words only.
    EXPECT_THROW(build_target_prompt("a hotdog stand", task_preset("dog2cat")), TaskMismatchError);
    EXPECT_THROW(task_preset("cat2bird"), ConfigError);
}

TEST(TargetPrompt, PresetsCoverBenchmarkTasks) {
    for (const char* name : {"cat2dog", "dog2cat", "horse2zebra", "zebra2horse", "tree2palm", "dog2dog_glasses"})
        EXPECT_EQ(task_presets().count(name), 1u) << name;
}

TEST(Caption, UserPromptWins) {
    Image img(4, 4);
    UnavailableCaptioner blip("blip");
    EXPECT_EQ(caption_source(img, &blip, std::string("a cat")), "a cat");
    FixedCaptioner fixed("a photo of a horse");
    EXPECT_EQ(caption_source(img, &fixed), "a photo of a horse");
    EXPECT_THROW(caption_source(img, &blip), ModelUnavailableError);
    EXPECT_THROW(caption_source(img, nullptr), ModelUnavailableError);
}

TEST(Encoder, DeterministicAndPadded) {
    HashingTextEncoder enc(8, 4, 1);
    auto a = enc.encode("A cat"), b = enc.encode("A cat"), c = enc.encode("A dog");
    EXPECT_TRUE(bitwise_equal(a.tokens, b.tokens));
    EXPECT_EQ(a.tokens.shape(), (Shape{8, 4}));
    EXPECT_EQ(a.meaningful_len, 4);
    // Positions before the changed word see only their prefix.
    for (size_t j = 0; j < 4; ++j) EXPECT_EQ(a.tokens.at(1, j), c.tokens.at(1, j));
    EXPECT_NE(a.tokens.at(2, 0), c.tokens.at(2, 0));
    EXPECT_FALSE(bitwise_equal(HashingTextEncoder(8, 4, 2).encode("A cat").tokens, a.tokens));
}

TEST(Encoder, EmptyPromptIsNullEmbedding) {
    HashingTextEncoder enc(8, 4, 0);
    auto y = enc.encode("");
    EXPECT_EQ(y.meaningful_len, 2);
    EXPECT_NO_THROW(y.validate());
}

TEST(Encoder, TruncationWarns) {
    HashingTextEncoder enc(4, 2, 0);
    std::vector<std::string> warnings;
    auto y = enc.encode("one two three four five", &warnings);
    EXPECT_EQ(y.meaningful_len, 4);
    ASSERT_EQ(warnings.size(), 1u);
    EXPECT_NE(warnings[0].find("truncated"), std::string::npos);
    warnings.clear();
    enc.encode("one two", &warnings);
    EXPECT_TRUE(warnings.empty());
}

TEST(Codec, IdentityRoundTrip) {
    IdentityCodec codec(4);
    Image img(4, 4);
    for (size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<double>(i) / 48.0;
    Tensor z = codec.encode(img);
    EXPECT_EQ(z.shape(), (Shape{3, 4, 4}));
    EXPECT_EQ(codec.decode(z).pixels, img.pixels);
    EXPECT_EQ(z[16], img.at(0, 0, 1));
    EXPECT_THROW(codec.decode(Tensor({3, 4, 5})), ValidationError);
}

TEST(Backbone, KnownIds) {
    BackboneOptions opts;
    EXPECT_THROW(make_backbone("sd-v1.4", opts), ModelUnavailableError);
    EXPECT_THROW(make_backbone("imagen", opts), ConfigError);
    Backbone toy = make_backbone("toy", opts);
    EXPECT_EQ(toy.gradient, nullptr);
    EXPECT_EQ(toy.denoiser->latent_shape(), (Shape{3, 64, 64}));
    EXPECT_NE(make_backbone("toy-attention", opts).gradient, nullptr);
}
