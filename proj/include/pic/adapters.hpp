// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pic/denoiser.hpp"
#include "pic/image.hpp"
#include "pic/prompt.hpp"
#include "pic/toy.hpp"

namespace pic {

class TextEncoder {
public:
    virtual ~TextEncoder() = default;
    /// Fixed-length L x D embedding; over-length prompts are truncated and a warning appended.
    virtual PromptEmbedding encode(const std::string& prompt, std::vector<std::string>* warnings = nullptr) const = 0;
    virtual const Tokenizer& tokenizer() const = 0;
    virtual int embed_dim() const = 0;
    int context_length() const { return tokenizer().context_length(); }
};

/// Deterministic stand-in encoder: each token maps to a hash-seeded Gaussian vector,
/// plus a position code and a running mean of earlier tokens, so every position only
/// sees its prefix (as with a causal text transformer).
class HashingTextEncoder : public TextEncoder {
public:
    HashingTextEncoder(int context_length, int embed_dim, uint64_t seed = 0);

    PromptEmbedding encode(const std::string& prompt, std::vector<std::string>* warnings = nullptr) const override;
    const Tokenizer& tokenizer() const override { return m_tokenizer; }
    int embed_dim() const override { return m_dim; }

private:
    std::vector<double> token_vector(const std::string& token) const;

    WordTokenizer m_tokenizer;
    int m_dim;
    uint64_t m_seed;
};

PromptEmbedding encode_prompt(const std::string& prompt, const TextEncoder& encoder,
                              std::vector<std::string>* warnings = nullptr);

class Captioner {
public:
    virtual ~Captioner() = default;
    virtual std::string caption(const Image& image) const = 0;
};

class FixedCaptioner : public Captioner {
public:
    explicit FixedCaptioner(std::string text) : m_text(std::move(text)) {}
    std::string caption(const Image&) const override { return m_text; }

private:
    std::string m_text;
};

/// Placeholder for captioners whose weights are not available locally.
class UnavailableCaptioner : public Captioner {
public:
    explicit UnavailableCaptioner(std::string id) : m_id(std::move(id)) {}
    std::string caption(const Image&) const override;

private:
    std::string m_id;
};

/// User prompt wins; otherwise the captioner (greedy, deterministic). Missing both is an error.
std::string caption_source(const Image& image, const Captioner* captioner,
                           const std::optional<std::string>& user_prompt = std::nullopt);

enum class TaskFamily { word_replacement, adding_phrase };

struct TaskSpec {
    std::string name;
    TaskFamily family = TaskFamily::word_replacement;
    std::string source_word;  // replacement: word to replace; adding_phrase: anchor
    std::string target_word;  // replacement: substitute; adding_phrase: inserted phrase

    bool operator==(const TaskSpec&) const = default;
};

void to_json(nlohmann::json& j, const TaskSpec& t);
void from_json(const nlohmann::json& j, TaskSpec& t);

/// Presets for the six benchmark tasks (cat2dog, dog2cat, horse2zebra, zebra2horse,
/// tree2palm, dog2dog_glasses).
const std::map<std::string, TaskSpec>& task_presets();
TaskSpec task_preset(const std::string& name);
double task_default_beta(const TaskSpec& task);

/// Replace the first whole-word occurrence, or insert the phrase right after the anchor.
std::string build_target_prompt(const std::string& p_src, const TaskSpec& task);

class LatentCodec {
public:
    virtual ~LatentCodec() = default;
    virtual Tensor encode(const Image& image) const = 0;
    virtual Image decode(const Tensor& latent) const = 0;
    virtual Shape latent_shape() const = 0;
};

/// Toy-mode codec: the latent is the RGB image itself at the native resolution (3 x R x R).
class IdentityCodec : public LatentCodec {
public:
    explicit IdentityCodec(int resolution) : m_resolution(resolution) {}
    Tensor encode(const Image& image) const override;
    Image decode(const Tensor& latent) const override;
    Shape latent_shape() const override;
    int resolution() const { return m_resolution; }

private:
    int m_resolution;
};

/// Everything one backbone id provides.
struct Backbone {
    std::string id;
    std::shared_ptr<const Denoiser> denoiser;
    std::shared_ptr<const TextEncoder> encoder;
    std::shared_ptr<const LatentCodec> codec;
    std::shared_ptr<const Captioner> captioner;
    const CrossAttentionGradient* gradient = nullptr;
    std::shared_ptr<const GaussianWorld> world;
    int native_resolution = 0;
};

struct BackboneOptions {
    int num_train_steps = 1000;
    int num_steps = 50;
    ScheduleKind schedule = ScheduleKind::scaled_linear;
    uint64_t seed = 0;
    std::string weights_path;
};

/// "toy", "toy-attention"; latent-diffusion ids raise ModelUnavailableError.
Backbone make_backbone(const std::string& id, const BackboneOptions& options);
std::vector<std::string> known_backbones();

/// Image-shaped Gaussian world: 3 x R x R latent, prompt-dependent means inside the
/// central box [R/4, 3R/4)^2, a flat grey elsewhere.
GaussianWorld make_image_world(int resolution, int context_len, int embed_dim, uint64_t seed);

/// Pixel box (x0, y0, x1, y1) of the edited region of an image world, at the given image size.
std::array<int, 4> image_world_box(int width, int height);

}  // namespace pic
