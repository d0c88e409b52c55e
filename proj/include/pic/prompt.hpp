// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "pic/tensor.hpp"

namespace pic {

/// Token-aligned prompt embedding: `tokens` is L x D over the full padded context.
struct PromptEmbedding {
    Tensor tokens;
    int meaningful_len = 1;
    std::string text;

    size_t length() const { return tokens.shape().at(0); }
    size_t dim() const { return tokens.shape().at(1); }
    void validate() const;
};

enum class EditKind { replacement, insertion, removal };

std::string to_string(EditKind kind);
EditKind edit_kind_from_string(const std::string& name);

struct InterpolationPlan {
    EditKind kind = EditKind::replacement;
    int span_start = -1;  // l_s, -1 for replacement
    int span_end = -1;    // l_f, -1 for replacement
    double beta = 0.3;
    int total_steps = 50;
    std::string src_text;
    std::string tgt_text;

    int span_len() const { return span_end - span_start + 1; }
    /// Throws ValidationError; `context_len` bounds the span when positive.
    void validate(int context_len = 0) const;

    bool operator==(const InterpolationPlan&) const = default;
};

void to_json(nlohmann::json& j, const InterpolationPlan& p);
void from_json(const nlohmann::json& j, InterpolationPlan& p);

double default_beta(EditKind kind);

/// beta_t, moving from beta at t = T to 1 at t = 0.
double mixing_coefficient(int t, int T, double beta);

PromptEmbedding interpolate_replacement(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt, double beta_t);
PromptEmbedding interpolate_insertion(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                      const InterpolationPlan& plan, double beta_t);
PromptEmbedding interpolate_removal(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                    const InterpolationPlan& plan, double beta_t);

/// Dispatch on plan.kind.
PromptEmbedding interpolate(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                            const InterpolationPlan& plan, double beta_t);

/// Embedding at reverse step t of a T-step run.
PromptEmbedding interpolated_prompt(const PromptEmbedding& y_src, const PromptEmbedding& y_tgt,
                                    const InterpolationPlan& plan, int t);

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    /// Token strings including the begin/end markers, not padded.
    virtual std::vector<std::string> tokenize(const std::string& text) const = 0;
    virtual int context_length() const = 0;
};

/// Lower-cased words and punctuation marks, wrapped in <bos>/<eos>.
class WordTokenizer : public Tokenizer {
public:
    explicit WordTokenizer(int context_length = 77) : m_context_length(context_length) {}
    std::vector<std::string> tokenize(const std::string& text) const override;
    int context_length() const override { return m_context_length; }

private:
    int m_context_length;
};

InterpolationPlan plan_from_prompts(const std::string& p_src, const std::string& p_tgt, const Tokenizer& tokenizer,
                                    int total_steps = 50);

}  // namespace pic
