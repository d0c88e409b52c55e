// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/adapters.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "pic/error.hpp"
#include "pic/util.hpp"

namespace pic {

HashingTextEncoder::HashingTextEncoder(int context_length, int embed_dim, uint64_t seed)
    : m_tokenizer(context_length), m_dim(embed_dim), m_seed(seed) {
    if (context_length < 2 || embed_dim < 1) throw ConfigError("text encoder needs L >= 2 and D >= 1");
}

std::vector<double> HashingTextEncoder::token_vector(const std::string& token) const {
    std::vector<double> v(static_cast<size_t>(m_dim));
    uint64_t h = hash_string(token, m_seed);
    for (int k = 0; k < m_dim; k += 2) {
        // Box-Muller on two hashed uniforms.
        double u1 = (static_cast<double>(mix64(h + 2 * static_cast<uint64_t>(k)) >> 11) + 0.5) * 0x1.0p-53;
        double u2 = (static_cast<double>(mix64(h + 2 * static_cast<uint64_t>(k) + 1) >> 11) + 0.5) * 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        v[static_cast<size_t>(k)] = r * std::cos(2.0 * std::numbers::pi * u2);
        if (k + 1 < m_dim) v[static_cast<size_t>(k) + 1] = r * std::sin(2.0 * std::numbers::pi * u2);
    }
    return v;
}

PromptEmbedding HashingTextEncoder::encode(const std::string& prompt, std::vector<std::string>* warnings) const {
    const size_t L = static_cast<size_t>(context_length());
    const size_t D = static_cast<size_t>(m_dim);
    auto tokens = m_tokenizer.tokenize(prompt);
    if (tokens.size() > L) {
        if (warnings)
            warnings->push_back("prompt '" + prompt + "' has " + std::to_string(tokens.size()) +
                                " tokens, truncated to " + std::to_string(L));
        tokens.resize(L - 1);
        tokens.push_back("<eos>");
    }
    PromptEmbedding out;
    out.text = prompt;
    out.meaningful_len = static_cast<int>(tokens.size());
    while (tokens.size() < L) tokens.push_back("<pad>");

    out.tokens = Tensor({L, D});
    std::vector<double> running(D, 0.0);
    for (size_t l = 0; l < L; ++l) {
        auto v = token_vector(tokens[l]);
        for (size_t k = 0; k < D; ++k) {
            double pos = 0.1 * std::sin((static_cast<double>(l) + 1.0) / std::pow(10.0, static_cast<double>(k) / D));
            double ctx = l ? 0.5 * running[k] / static_cast<double>(l) : 0.0;
            out.tokens.at(l, k) = v[k] + pos + ctx;
            running[k] += v[k];
        }
    }
    return out;
}

PromptEmbedding encode_prompt(const std::string& prompt, const TextEncoder& encoder, std::vector<std::string>* warnings) {
    return encoder.encode(prompt, warnings);
}

std::string UnavailableCaptioner::caption(const Image&) const {
    throw ModelUnavailableError("captioner '" + m_id + "' has no local weights; pass --source-prompt instead");
}

std::string caption_source(const Image& image, const Captioner* captioner, const std::optional<std::string>& user_prompt) {
    if (user_prompt && !user_prompt->empty()) return *user_prompt;
    if (!captioner) throw ModelUnavailableError("no source prompt given and no captioner configured");
    std::string text = captioner->caption(image);
    if (text.empty()) throw ValidationError("captioner returned an empty caption");
    return text;
}

void to_json(nlohmann::json& j, const TaskSpec& t) {
    j = {{"name", t.name},
         {"family", t.family == TaskFamily::word_replacement ? "word_replacement" : "adding_phrase"},
         {"source_word", t.source_word},
         {"target_word", t.target_word}};
}

void from_json(const nlohmann::json& j, TaskSpec& t) {
    if (j.is_string()) {
        t = task_preset(j.get<std::string>());
        return;
    }
    t.name = j.value("name", "custom");
    std::string family = j.value("family", "word_replacement");
    if (family == "word_replacement") t.family = TaskFamily::word_replacement;
    else if (family == "adding_phrase") t.family = TaskFamily::adding_phrase;
    else throw ConfigError("unknown task family '" + family + "'");
    t.source_word = j.at("source_word").get<std::string>();
    t.target_word = j.at("target_word").get<std::string>();
}

const std::map<std::string, TaskSpec>& task_presets() {
    static const std::map<std::string, TaskSpec> presets{
        {"cat2dog", {"cat2dog", TaskFamily::word_replacement, "cat", "dog"}},
        {"dog2cat", {"dog2cat", TaskFamily::word_replacement, "dog", "cat"}},
        {"horse2zebra", {"horse2zebra", TaskFamily::word_replacement, "horse", "zebra"}},
        {"zebra2horse", {"zebra2horse", TaskFamily::word_replacement, "zebra", "horse"}},
        {"tree2palm", {"tree2palm", TaskFamily::word_replacement, "tree", "palm tree"}},
        {"dog2dog_glasses", {"dog2dog_glasses", TaskFamily::adding_phrase, "dog", "with glasses"}},
    };
    return presets;
}

TaskSpec task_preset(const std::string& name) {
    auto it = task_presets().find(name);
    if (it == task_presets().end()) throw ConfigError("unknown task preset '" + name + "'");
    return it->second;
}

double task_default_beta(const TaskSpec& task) {
    return task.family == TaskFamily::word_replacement ? 0.3 : 0.8;
}

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '-';
}

/// Position of the first case-insensitive whole-word match, or npos.
size_t find_word(const std::string& text, const std::string& word) {
    if (word.empty()) return std::string::npos;
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };
    std::string t = lower(text), w = lower(word);
    for (size_t pos = t.find(w); pos != std::string::npos; pos = t.find(w, pos + 1)) {
        bool left = pos == 0 || !is_word_char(t[pos - 1]);
        bool right = pos + w.size() == t.size() || !is_word_char(t[pos + w.size()]);
        if (left && right) return pos;
    }
    return std::string::npos;
}

}  // namespace

std::string build_target_prompt(const std::string& p_src, const TaskSpec& task) {
    size_t pos = find_word(p_src, task.source_word);
    if (pos == std::string::npos)
        throw TaskMismatchError("source prompt '" + p_src + "' does not contain '" + task.source_word + "' (task " +
                                task.name + ")");
    std::string out = p_src;
    if (task.family == TaskFamily::word_replacement) {
        out.replace(pos, task.source_word.size(), task.target_word);
    } else {
        out.insert(pos + task.source_word.size(), " " + task.target_word);
    }
    return out;
}

Tensor IdentityCodec::encode(const Image& image) const {
    Image img = resize_bilinear(image, m_resolution, m_resolution);
    const size_t R = static_cast<size_t>(m_resolution);
    Tensor latent({3, R, R});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < m_resolution; ++y)
            for (int x = 0; x < m_resolution; ++x)
                latent[(static_cast<size_t>(c) * R + static_cast<size_t>(y)) * R + static_cast<size_t>(x)] = img.at(x, y, c);
    return latent;
}

Image IdentityCodec::decode(const Tensor& latent) const {
    if (latent.shape() != latent_shape())
        throw ValidationError("codec expects latent " + shape_to_string(latent_shape()) + ", got " +
                              shape_to_string(latent.shape()));
    const size_t R = static_cast<size_t>(m_resolution);
    Image img(m_resolution, m_resolution);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < m_resolution; ++y)
            for (int x = 0; x < m_resolution; ++x)
                img.at(x, y, c) = latent[(static_cast<size_t>(c) * R + static_cast<size_t>(y)) * R + static_cast<size_t>(x)];
    return img;
}

Shape IdentityCodec::latent_shape() const {
    return {3, static_cast<size_t>(m_resolution), static_cast<size_t>(m_resolution)};
}

std::array<int, 4> image_world_box(int width, int height) {
    return {width / 4, height / 4, (3 * width) / 4, (3 * height) / 4};
}

GaussianWorld make_image_world(int resolution, int context_len, int embed_dim, uint64_t seed) {
    const size_t R = static_cast<size_t>(resolution), L = static_cast<size_t>(context_len),
                 D = static_cast<size_t>(embed_dim), K = L * D;
    GaussianWorld w;
    w.latent_shape = {3, R, R};
    w.context_len = L;
    w.embed_dim = D;
    w.data_std = 0.15;
    w.mean_map = Tensor({3 * R * R, K});
    w.bias = Tensor({3 * R * R}, 0.5);
    auto box = image_world_box(resolution, resolution);
    const double bw = box[2] - box[0], bh = box[3] - box[1];
    const double scale = 0.35 / std::sqrt(static_cast<double>(K));

    std::vector<int> fx(K), fy(K);
    std::vector<std::array<double, 3>> colour(K);
    for (size_t m = 0; m < K; ++m) {
        uint64_t h = mix64(seed * 0x9e37 + m);
        fx[m] = static_cast<int>(h % 3);
        fy[m] = static_cast<int>((h >> 8) % 3);
        for (int c = 0; c < 3; ++c) colour[m][static_cast<size_t>(c)] = ((mix64(h + static_cast<uint64_t>(c) + 1) >> 11) * 0x1.0p-53) * 2.0 - 1.0;
    }
    for (size_t c = 0; c < 3; ++c)
        for (size_t y = 0; y < R; ++y)
            for (size_t x = 0; x < R; ++x) {
                size_t i = (c * R + y) * R + x;
                bool inside = static_cast<int>(x) >= box[0] && static_cast<int>(x) < box[2] &&
                              static_cast<int>(y) >= box[1] && static_cast<int>(y) < box[3];
                if (!inside) {
                    w.shared_coords.push_back(i);
                    continue;
                }
                w.edited_coords.push_back(i);
                double u = (static_cast<double>(x) - box[0] + 0.5) / bw, v = (static_cast<double>(y) - box[1] + 0.5) / bh;
                for (size_t m = 0; m < K; ++m)
                    w.mean_map.at(i, m) = scale * colour[m][c] * std::cos(std::numbers::pi * fx[m] * u) *
                                          std::cos(std::numbers::pi * fy[m] * v);
            }
    return w;
}

std::vector<std::string> known_backbones() {
    return {"toy", "toy-attention", "sd-v1.4"};
}

Backbone make_backbone(const std::string& id, const BackboneOptions& options) {
    if (id == "sd-v1.4" || id == "CompVis/stable-diffusion-v1-4" || id == "stable-diffusion-v1-4") {
        std::string where = options.weights_path.empty() ? "no weights path configured" : "weights path '" + options.weights_path + "'";
        throw ModelUnavailableError("backbone '" + id + "' needs local checkpoint weights and a neural inference runtime (" +
                                    where + "; this build links none). Use --backbone toy or toy-attention.");
    }
    if (id != "toy" && id != "toy-attention")
        throw ConfigError("unknown backbone '" + id + "'; known: toy, toy-attention, sd-v1.4");

    const int L = 16, D = 8;
    Backbone b;
    b.id = id;
    b.native_resolution = id == "toy" ? 64 : 32;
    auto world = std::make_shared<GaussianWorld>(make_image_world(b.native_resolution, L, D, options.seed));
    b.world = world;
    auto sched = build_schedule(options.num_train_steps, options.num_steps, options.schedule);
    if (id == "toy") {
        b.denoiser = std::make_shared<ToyDenoiser>(world, sched);
    } else {
        auto att = std::make_shared<AttentionToyDenoiser>(world, sched, 2, 4, 0.05, options.seed + 17);
        b.gradient = att.get();
        b.denoiser = att;
    }
    b.encoder = std::make_shared<HashingTextEncoder>(L, D, options.seed);
    b.codec = std::make_shared<IdentityCodec>(b.native_resolution);
    b.captioner = std::make_shared<UnavailableCaptioner>("blip");
    return b;
}

}  // namespace pic
