// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "pic/error.hpp"

namespace pic {

void PromptEmbedding::validate() const {
    if (tokens.shape().size() != 2) throw ValidationError("prompt embedding must be L x D, got " +
                                                          shape_to_string(tokens.shape()));
    if (meaningful_len <= 0 || static_cast<size_t>(meaningful_len) > length())
        throw ValidationError("meaningful_len " + std::to_string(meaningful_len) + " outside (0, " +
                              std::to_string(length()) + "]");
    if (!tokens.all_finite()) throw ValidationError("prompt embedding has non-finite entries");
}

std::string to_string(EditKind kind) {
    switch (kind) {
    case EditKind::replacement:
        return "replacement";
    case EditKind::insertion:
        return "insertion";
    case EditKind::removal:
        return "removal";
    }
    return "?";
}

EditKind edit_kind_from_string(const std::string& name) {
    if (name == "replacement") return EditKind::replacement;
    if (name == "insertion") return EditKind::insertion;
    if (name == "removal") return EditKind::removal;
    throw ConfigError("unknown edit kind '" + name + "'");
}

void InterpolationPlan::validate(int context_len) const {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1], got " + std::to_string(beta));
    if (total_steps < 1) throw ValidationError("plan total_steps must be >= 1");
    if (kind == EditKind::replacement) return;
    if (span_start < 0 || span_end < span_start)
        throw ValidationError("invalid span [" + std::to_string(span_start) + ", " + std::to_string(span_end) +
                              "] for " + to_string(kind));
    if (context_len > 0 && span_end >= context_len)
        throw ValidationError("span end " + std::to_string(span_end) + " outside context of length " +
                              std::to_string(context_len));
}

void to_json(nlohmann::json& j, const InterpolationPlan& p) {
    j = {{"kind", to_string(p.kind)}, {"span_start", p.span_start}, {"span_end", p.span_end},
         {"beta", p.beta},           {"total_steps", p.total_steps}, {"src_text", p.src_text},
         {"tgt_text", p.tgt_text}};
}

void from_json(const nlohmann::json& j, InterpolationPlan& p) {
    p.kind = edit_kind_from_string(j.at("kind").get<std::string>());
    p.span_start = j.value("span_start", -1);
    p.span_end = j.value("span_end", -1);
    p.beta = j.value("beta", default_beta(p.kind));
    p.total_steps = j.value("total_steps", 50);
    p.src_text = j.value("src_text", "");
    p.tgt_text = j.value("tgt_text", "");
}

double default_beta(EditKind kind) {
    return kind == EditKind::replacement ? 0.3 : 0.8;
}

double mixing_coefficient(int t, int T, double beta) {
    // beta * u + (1 - u) with u = t / T hits both endpoints without rounding.
    double u = static_cast<double>(t) / T;
    return beta * u + static_cast<double>(T - t) / T;
}

namespace {

void require_compatible(const PromptEmbedding& a, const PromptEmbedding& b) {
    if (a.tokens.shape().size() != 2 || a.tokens.shape() != b.tokens.shape())
        throw ValidationError("prompt embeddings differ in shape: " + shape_to_string(a.tokens.shape()) + " vs " +
                              shape_to_string(b.tokens.shape()));
}

void mix_row(PromptEmbedding& out, size_t row, const PromptEmbedding& tgt, size_t tgt_row, const PromptEmbedding& src,
             size_t src_row, double b) {
    size_t D = out.dim();
    for (size_t k = 0; k < D; ++k) out.tokens.at(row, k) = b * tgt.tokens.at(tgt_row, k) + (1.0 - b) * src.tokens.at(src_row, k);
}

void copy_row(PromptEmbedding& out, size_t row, const PromptEmbedding& from, size_t from_row) {
    size_t D = out.dim();
    for (size_t k = 0; k < D; ++k) out.tokens.at(row, k) = from.tokens.at(from_row, k);
}

}  // namespace

PromptEmbedding interpolate_replacement(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt, double beta_t) {
    require_compatible(y_src, y_tgt);
    PromptEmbedding out = y_tgt;
    for (size_t l = 0; l < out.length(); ++l) mix_row(out, l, y_tgt, l, y_src, l, beta_t);
    return out;
}

PromptEmbedding interpolate_insertion(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                      const InterpolationPlan& plan, double beta_t) {
    require_compatible(y_src, y_tgt);
    if (plan.kind != EditKind::insertion) throw ValidationError("interpolate_insertion needs an insertion plan");
    plan.validate(static_cast<int>(y_tgt.length()));
    const size_t L = y_tgt.length();
    const size_t ls = static_cast<size_t>(plan.span_start), lf = static_cast<size_t>(plan.span_end);
    PromptEmbedding out = y_tgt;
    for (size_t l = 0; l < L; ++l) {
        if (l < ls) {
            copy_row(out, l, y_src, l);
        } else if (l <= lf) {
            copy_row(out, l, y_tgt, l);
        } else {
            // Suffix token l of the target continues source token l - n.
            mix_row(out, l, y_tgt, l, y_src, l - (lf - ls + 1), beta_t);
        }
    }
    return out;
}

PromptEmbedding interpolate_removal(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                    const InterpolationPlan& plan, double beta_t) {
    require_compatible(y_src, y_tgt);
    if (plan.kind != EditKind::removal) throw ValidationError("interpolate_removal needs a removal plan");
    plan.validate(static_cast<int>(y_src.length()));
    const size_t L = y_tgt.length();
    const size_t ls = static_cast<size_t>(plan.span_start);
    const size_t n = static_cast<size_t>(plan.span_len());
    PromptEmbedding out = y_tgt;
    for (size_t l = ls; l < L; ++l) {
        size_t src_index = l + n;
        if (src_index < L) mix_row(out, l, y_tgt, l, y_src, src_index, beta_t);
    }
    return out;
}

PromptEmbedding interpolate(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt, const InterpolationPlan& plan,
                            double beta_t) {
    switch (plan.kind) {
    case EditKind::replacement:
        return interpolate_replacement(y_src, y_tgt, beta_t);
    case EditKind::insertion:
        return interpolate_insertion(y_src, y_tgt, plan, beta_t);
    case EditKind::removal:
        return interpolate_removal(y_src, y_tgt, plan, beta_t);
    }
    throw ValidationError("unknown plan kind");
}

PromptEmbedding interpolated_prompt(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                    const InterpolationPlan& plan, int t) {
    return interpolate(y_src, y_tgt, plan, mixing_coefficient(t, plan.total_steps, plan.beta));
}

std::vector<std::string> WordTokenizer::tokenize(const std::string& text) const {
    std::vector<std::string> out{"<bos>"};
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'' || c == '-') {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
            if (std::ispunct(c)) out.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    out.push_back("<eos>");
    return out;
}

InterpolationPlan plan_from_prompts(const std::string& p_src, const std::string& p_tgt, const Tokenizer& tokenizer,
                                    int total_steps) {
    auto a = tokenizer.tokenize(p_src);
    auto b = tokenizer.tokenize(p_tgt);
    const size_t L = static_cast<size_t>(tokenizer.context_length());
    if (a.size() > L || b.size() > L)
        throw ValidationError("prompt longer than the context length " + std::to_string(L));

    size_t shortest = std::min(a.size(), b.size());
    size_t prefix = 0;
    while (prefix < shortest && a[prefix] == b[prefix]) ++prefix;
    size_t suffix = 0;
    while (suffix < shortest - prefix && a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) ++suffix;
    size_t mid_a = a.size() - prefix - suffix, mid_b = b.size() - prefix - suffix;

    InterpolationPlan plan;
    plan.total_steps = total_steps;
    plan.src_text = p_src;
    plan.tgt_text = p_tgt;
    if (mid_a == 0 && mid_b == 0)
        throw UnsupportedEditError("source and target prompts tokenize identically; supply an explicit plan");
    if (a.size() == b.size()) {
        plan.kind = EditKind::replacement;
    } else if (mid_a == 0) {
        plan.kind = EditKind::insertion;
        plan.span_start = static_cast<int>(prefix);
        plan.span_end = static_cast<int>(prefix + mid_b - 1);
    } else if (mid_b == 0) {
        plan.kind = EditKind::removal;
        plan.span_start = static_cast<int>(prefix);
        plan.span_end = static_cast<int>(prefix + mid_a - 1);
    } else {
        throw UnsupportedEditError("prompts differ in more than one contiguous inserted or removed run; "
                                   "supply an explicit interpolation plan");
    }
    plan.beta = default_beta(plan.kind);
    return plan;
}

}  // namespace pic
