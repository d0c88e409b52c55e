// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "pic/error.hpp"
#include "pic/prompt.hpp"

using namespace pic;

namespace {

PromptEmbedding make(size_t L, size_t D, std::vector<double> values) {
    PromptEmbedding y;
    y.tokens = Tensor({L, D}, std::move(values));
    y.meaningful_len = static_cast<int>(L);
    return y;
}

PromptEmbedding random_embedding(size_t L, size_t D, std::mt19937_64& rng) {
    std::normal_distribution<double> n;
    std::vector<double> v(L * D);
    for (double& x : v) x = n(rng);
    return make(L, D, v);
}

InterpolationPlan span_plan(EditKind kind, int ls, int lf, double beta = 0.8) {
    InterpolationPlan p;
    p.kind = kind;
    p.span_start = ls;
    p.span_end = lf;
    p.beta = beta;
    return p;
}

// Three-branch insertion rule written out per position.
Tensor brute_insertion(const Tensor& src, const Tensor& tgt, int ls, int lf, double b) {
    const int L = static_cast<int>(tgt.shape()[0]), D = static_cast<int>(tgt.shape()[1]);
    const int n = lf - ls + 1;
    Tensor out({static_cast<size_t>(L), static_cast<size_t>(D)});
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < D; ++k) {
            double v;
            if (l < ls) v = src.at(l, k);
            else if (l <= lf) v = tgt.at(l, k);
            else v = b * tgt.at(l, k) + (1 - b) * src.at(l - n, k);
            out.at(l, k) = v;
        }
    return out;
}

// Removal via an explicit target -> source alignment table.
Tensor brute_removal(const Tensor& src, const Tensor& tgt, int ls, int lf, double b) {
    const int L = static_cast<int>(tgt.shape()[0]), D = static_cast<int>(tgt.shape()[1]);
    std::vector<int> align(L, -1);
    int s = 0;
    for (int l = 0; l < L; ++l) {
        if (s == ls) s = lf + 1;  // skip the removed source run
        align[l] = l < ls ? -1 : (s < L ? s : -1);
        ++s;
    }
    Tensor out({static_cast<size_t>(L), static_cast<size_t>(D)});
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < D; ++k)
            out.at(l, k) = align[l] < 0 ? tgt.at(l, k) : b * tgt.at(l, k) + (1 - b) * src.at(align[l], k);
    return out;
}

}  // namespace

TEST(MixingCoefficient, Endpoints) {
    for (double beta : {0.0, 0.3, 0.8, 1.0}) {
        EXPECT_EQ(mixing_coefficient(50, 50, beta), beta);
        EXPECT_EQ(mixing_coefficient(0, 50, beta), 1.0);
    }
}

TEST(MixingCoefficient, Midpoint) {
    EXPECT_NEAR(mixing_coefficient(25, 50, 0.3), 0.65, 1e-15);
}

TEST(MixingCoefficient, MonotoneAsTDecreases) {
    double prev = mixing_coefficient(50, 50, 0.3);
    for (int t = 49; t >= 0; --t) {
        double b = mixing_coefficient(t, 50, 0.3);
        EXPECT_GE(b, prev);
        prev = b;
    }
}

TEST(Replacement, EndpointsAreBitwise) {
    std::mt19937_64 rng(1);
    auto a = random_embedding(6, 3, rng), b = random_embedding(6, 3, rng);
    EXPECT_TRUE(bitwise_equal(interpolate_replacement(a, b, 0.0).tokens, a.tokens));
    EXPECT_TRUE(bitwise_equal(interpolate_replacement(a, b, 1.0).tokens, b.tokens));
}

TEST(Replacement, Midpoint) {
    auto y = interpolate_replacement(make(1, 2, {1, 0}), make(1, 2, {0, 2}), 0.5);
    EXPECT_DOUBLE_EQ(y.tokens.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(y.tokens.at(0, 1), 1.0);
}

TEST(Replacement, AffineInBeta) {
    std::mt19937_64 rng(2);
    auto a = random_embedding(4, 5, rng), b = random_embedding(4, 5, rng);
    auto lo = interpolate_replacement(a, b, 0.2), hi = interpolate_replacement(a, b, 0.6);
    auto mid = interpolate_replacement(a, b, 0.4);
    EXPECT_LT(max_abs_diff(mid.tokens, 0.5 * (lo.tokens + hi.tokens)), 1e-14);
}

TEST(Replacement, ShapeMismatch) {
    EXPECT_THROW(interpolate_replacement(make(2, 1, {1, 2}), make(3, 1, {1, 2, 3}), 0.5), ValidationError);
}

TEST(Insertion, HandWorkedSevenTokenExample) {
    const double a0 = 1, a1 = 2, a2 = 3, a3 = 4, a4 = 5, b0 = 10, b1 = 11, c2 = 20, c3 = 21, c4 = 22;
    auto src = make(7, 1, {a0, a1, a2, a3, a4, 0, 0});
    auto tgt = make(7, 1, {a0, a1, b0, b1, c2, c3, c4});
    auto y = interpolate_insertion(src, tgt, span_plan(EditKind::insertion, 2, 3), 0.5);
    std::vector<double> expect{a0, a1, b0, b1, 0.5 * c2 + 0.5 * a2, 0.5 * c3 + 0.5 * a3, 0.5 * c4 + 0.5 * a4};
    for (size_t l = 0; l < 7; ++l) EXPECT_DOUBLE_EQ(y.tokens.at(l, 0), expect[l]) << "position " << l;
}

TEST(Insertion, BetaOneGivesTargetWhenPrefixShared) {
    std::mt19937_64 rng(3);
    auto src = random_embedding(8, 2, rng), tgt = random_embedding(8, 2, rng);
    for (size_t k = 0; k < 2; ++k) tgt.tokens.at(0, k) = src.tokens.at(0, k);
    auto y = interpolate_insertion(src, tgt, span_plan(EditKind::insertion, 1, 2), 1.0);
    EXPECT_TRUE(bitwise_equal(y.tokens, tgt.tokens));
}

TEST(Insertion, SingleTokenSpanShiftsSuffixByOne) {
    auto src = make(5, 1, {0, 1, 2, 3, 4});
    auto tgt = make(5, 1, {0, 9, 1, 2, 3});
    auto y = interpolate_insertion(src, tgt, span_plan(EditKind::insertion, 1, 1), 0.0);
    EXPECT_TRUE(bitwise_equal(y.tokens, tgt.tokens));
}

TEST(Insertion, EmptySpanRejected) {
    auto e = make(4, 1, {0, 1, 2, 3});
    EXPECT_THROW(interpolate_insertion(e, e, span_plan(EditKind::insertion, 2, 1), 0.5), ValidationError);
    EXPECT_THROW(interpolate_insertion(e, e, span_plan(EditKind::insertion, 2, 4), 0.5), ValidationError);
    EXPECT_THROW(interpolate_insertion(e, e, span_plan(EditKind::removal, 1, 1), 0.5), ValidationError);
}

TEST(Insertion, SpanFidelityForAnyBeta) {
    std::mt19937_64 rng(4);
    auto src = random_embedding(9, 3, rng), tgt = random_embedding(9, 3, rng);
    for (double b : {0.0, 0.13, 0.5, 0.99, 1.0}) {
        auto y = interpolate_insertion(src, tgt, span_plan(EditKind::insertion, 3, 5), b);
        for (size_t l = 3; l <= 5; ++l)
            for (size_t k = 0; k < 3; ++k) EXPECT_EQ(y.tokens.at(l, k), tgt.tokens.at(l, k));
    }
}

TEST(Insertion, MatchesBruteForceOnRandomSpans) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        int L = std::uniform_int_distribution<int>(1, 12)(rng);
        int ls = std::uniform_int_distribution<int>(0, L - 1)(rng);
        int lf = std::uniform_int_distribution<int>(ls, L - 1)(rng);
        double b = std::uniform_real_distribution<double>(0, 1)(rng);
        auto src = random_embedding(L, 2, rng), tgt = random_embedding(L, 2, rng);
        auto y = interpolate_insertion(src, tgt, span_plan(EditKind::insertion, ls, lf), b);
        ASSERT_LT(max_abs_diff(y.tokens, brute_insertion(src.tokens, tgt.tokens, ls, lf, b)), 1e-15);
    }
}

TEST(Removal, BetaOneGivesTarget) {
    std::mt19937_64 rng(6);
    auto src = random_embedding(8, 2, rng), tgt = random_embedding(8, 2, rng);
    auto y = interpolate_removal(src, tgt, span_plan(EditKind::removal, 2, 4), 1.0);
    EXPECT_TRUE(bitwise_equal(y.tokens, tgt.tokens));
}

TEST(Removal, MatchesAlignmentOracleIncludingClamp) {
    // Positions l >= L - n run past the source and take the clamp branch in every trial.
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        int L = std::uniform_int_distribution<int>(1, 12)(rng);
        int ls = std::uniform_int_distribution<int>(0, L - 1)(rng);
        int lf = std::uniform_int_distribution<int>(ls, L - 1)(rng);
        double b = std::uniform_real_distribution<double>(0, 1)(rng);
        auto src = random_embedding(L, 2, rng), tgt = random_embedding(L, 2, rng);
        auto y = interpolate_removal(src, tgt, span_plan(EditKind::removal, ls, lf), b);
        ASSERT_LT(max_abs_diff(y.tokens, brute_removal(src.tokens, tgt.tokens, ls, lf, b)), 1e-15);
    }
}

TEST(Removal, RoleSymmetryWithInsertion) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const int L = 10, ls = 2, lf = 4, n = 3;
        double b = std::uniform_real_distribution<double>(0, 1)(rng);
        auto shorter = random_embedding(L, 3, rng), longer = random_embedding(L, 3, rng);
        auto rem = interpolate_removal(longer, shorter, span_plan(EditKind::removal, ls, lf), b);
        auto ins = interpolate_insertion(shorter, longer, span_plan(EditKind::insertion, ls, lf), 1.0 - b);
        // Removal position l pairs with insertion position l + n; the 1 - (1 - b) rounding
        // keeps this from being bitwise.
        for (int l = ls; l + n < L; ++l)
            for (size_t k = 0; k < 3; ++k) ASSERT_NEAR(rem.tokens.at(l, k), ins.tokens.at(l + n, k), 1e-12);
    }
}

TEST(Dispatch, InterpolatedPromptUsesStepSchedule) {
    std::mt19937_64 rng(9);
    auto a = random_embedding(3, 2, rng), b = random_embedding(3, 2, rng);
    InterpolationPlan p;
    p.beta = 0.3;
    p.total_steps = 50;
    auto y = interpolated_prompt(a, b, p, 25);
    EXPECT_LT(max_abs_diff(y.tokens, interpolate_replacement(a, b, 0.65).tokens), 1e-15);
    EXPECT_TRUE(bitwise_equal(interpolated_prompt(a, b, p, 0).tokens, b.tokens));
}

TEST(WordTokenizer, WrapsAndLowercases) {
    WordTokenizer tok;
    auto t = tok.tokenize("A Dog, lying.");
    std::vector<std::string> expect{"<bos>", "a", "dog", ",", "lying", ".", "<eos>"};
    EXPECT_EQ(t, expect);
}

TEST(PlanFromPrompts, Replacement) {
    WordTokenizer tok;
    auto p = plan_from_prompts("a zebra lying", "a horse lying", tok);
    EXPECT_EQ(p.kind, EditKind::replacement);
    EXPECT_EQ(p.span_start, -1);
}

TEST(PlanFromPrompts, InsertionCoversPhrase) {
    WordTokenizer tok;
    auto p = plan_from_prompts("a dog on grass", "a dog with glasses on grass", tok);
    EXPECT_EQ(p.kind, EditKind::insertion);
    auto t = tok.tokenize("a dog with glasses on grass");
    EXPECT_EQ(t[p.span_start], "with");
    EXPECT_EQ(t[p.span_end], "glasses");
}

TEST(PlanFromPrompts, RemovalMirrorsInsertion) {
    WordTokenizer tok;
    auto ins = plan_from_prompts("a dog on grass", "a dog with glasses on grass", tok);
    auto rem = plan_from_prompts("a dog with glasses on grass", "a dog on grass", tok);
    EXPECT_EQ(rem.kind, EditKind::removal);
    EXPECT_EQ(rem.span_start, ins.span_start);
    EXPECT_EQ(rem.span_end, ins.span_end);
}

TEST(PlanFromPrompts, UnsupportedEdits) {
    WordTokenizer tok;
    EXPECT_THROW(plan_from_prompts("a dog", "a dog", tok), UnsupportedEditError);
    EXPECT_THROW(plan_from_prompts("a red dog on grass", "a dog on green grass lying", tok), UnsupportedEditError);
}

TEST(Plan, JsonRoundTrip) {
    InterpolationPlan p = span_plan(EditKind::insertion, 3, 4, 0.8);
    p.total_steps = 40;
    p.src_text = "a dog";
    p.tgt_text = "a dog with glasses";
    nlohmann::json j = p;
    for (const char* key : {"kind", "span_start", "span_end", "beta", "total_steps", "src_text", "tgt_text"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j.get<InterpolationPlan>(), p);
}

TEST(Plan, Validation) {
    EXPECT_THROW(span_plan(EditKind::insertion, 1, 1, 1.5).validate(), ValidationError);
    EXPECT_THROW(span_plan(EditKind::insertion, 5, 6).validate(6), ValidationError);
    EXPECT_NO_THROW(span_plan(EditKind::insertion, 4, 5).validate(6));
    EXPECT_EQ(default_beta(EditKind::replacement), 0.3);
    EXPECT_EQ(default_beta(EditKind::insertion), 0.8);
    EXPECT_EQ(default_beta(EditKind::removal), 0.8);
}
