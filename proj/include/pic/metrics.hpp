// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pic/adapters.hpp"
#include "pic/image.hpp"
#include "pic/tensor.hpp"

namespace pic {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

/// Shared image/text embedding space used by the CS metric and task-image selection.
class JointEmbedder {
public:
    virtual ~JointEmbedder() = default;
    virtual std::vector<double> embed_image(const Image& image, const std::string& image_id) const = 0;
    virtual std::vector<double> embed_text(const std::string& text) const = 0;
};

/// Embeddings computed offline and stored as {"images": {id: [...]}, "texts": {prompt: [...]}}.
class PrecomputedEmbedder : public JointEmbedder {
public:
    explicit PrecomputedEmbedder(const nlohmann::json& table);
    static PrecomputedEmbedder from_file(const std::filesystem::path& path);
    std::vector<double> embed_image(const Image& image, const std::string& image_id) const override;
    std::vector<double> embed_text(const std::string& text) const override;

private:
    std::map<std::string, std::vector<double>> m_images;
    std::map<std::string, std::vector<double>> m_texts;
};

/// Toy-mode joint space: an image embeds as its edited-box pixels, a prompt as the
/// world's mean for that prompt on the same coordinates, both centred on the grey bias.
class ToyJointEmbedder : public JointEmbedder {
public:
    ToyJointEmbedder(std::shared_ptr<const GaussianWorld> world, std::shared_ptr<const TextEncoder> encoder);
    std::vector<double> embed_image(const Image& image, const std::string& image_id) const override;
    std::vector<double> embed_text(const std::string& text) const override;

private:
    std::shared_ptr<const GaussianWorld> m_world;
    std::shared_ptr<const TextEncoder> m_encoder;
};

double clip_similarity(const Image& translated, const std::string& image_id, const std::string& p_tgt,
                       const JointEmbedder& embedder);

struct Detection {
    std::string kind;                // "mask" or "box"
    std::array<int, 4> box{};        // x0, y0, x1, y1 (exclusive)
    std::vector<unsigned char> mask; // width * height, nonzero = object
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual std::optional<Detection> detect(const Image& image, const std::string& image_id,
                                            const std::string& object) const = 0;
};

/// Reads `<image_id>.json` next to the images: {"boxes": {word: [x0,y0,x1,y1]}, "masks": {word: "file.png"}}.
/// Masks win over boxes when both exist.
class SidecarDetector : public Detector {
public:
    explicit SidecarDetector(std::filesystem::path dir) : m_dir(std::move(dir)) {}
    std::optional<Detection> detect(const Image& image, const std::string& image_id,
                                    const std::string& object) const override;

private:
    std::filesystem::path m_dir;
};

/// Returns the same box (given as fractions of width/height) for every image.
class FixedBoxDetector : public Detector {
public:
    explicit FixedBoxDetector(std::array<double, 4> fractions) : m_fractions(fractions) {}
    std::optional<Detection> detect(const Image& image, const std::string& image_id,
                                    const std::string& object) const override;

private:
    std::array<double, 4> m_fractions;
};

class PerceptualDistance {
public:
    virtual ~PerceptualDistance() = default;
    virtual double distance(const Image& a, const Image& b) const = 0;
};

/// Built-in multi-scale distance: per-pixel colour and gradient features at full, half
/// and quarter resolution, squared differences averaged per scale, then across scales.
class MultiScaleDistance : public PerceptualDistance {
public:
    double distance(const Image& a, const Image& b) const override;
};

/// Pixel mask (width * height) covering the detection, dilated by `margin` pixels.
std::vector<unsigned char> detection_mask(const Detection& det, int width, int height, int margin);

struct BackgroundResult {
    double value = 0.0;
    bool fallback = false;  // no detection: full-image distance
    std::string mask_kind;  // "mask", "box" or "none"
};

/// Perceptual distance between the two images with the (dilated) object region blanked in both.
BackgroundResult background_distance(const Image& src, const Image& tgt, const std::string& image_id,
                                     const std::string& object, const Detector& detector,
                                     const PerceptualDistance& perceptual, int margin = 4);

class StructureExtractor {
public:
    virtual ~StructureExtractor() = default;
    /// N x N self-attention (token affinity) map of the image.
    virtual Tensor self_attention(const Image& image) const = 0;
};

/// Patch tokens (mean-centred, unit-normalised patch pixels) with softmax affinities.
class PatchAffinityExtractor : public StructureExtractor {
public:
    explicit PatchAffinityExtractor(int patch = 8, double temperature = 0.1) : m_patch(patch), m_temperature(temperature) {}
    Tensor self_attention(const Image& image) const override;

private:
    int m_patch;
    double m_temperature;
};

/// ||A - B||_F / N for N x N maps.
double structure_distance_maps(const Tensor& a, const Tensor& b);
double structure_distance(const Image& src, const Image& tgt, const StructureExtractor& extractor);

struct PoolEntry {
    std::string id;
    std::vector<double> embedding;
};

/// Top-k ids by cosine to the domain text embedding, ties by id. k beyond the pool
/// returns the whole pool and sets *warning.
std::vector<std::string> select_task_images(const std::vector<PoolEntry>& pool, const std::vector<double>& text_embedding,
                                            size_t k, bool* warning = nullptr);

struct MetricsRow {
    std::string image_id;
    std::optional<double> cs;
    double bd = 0.0;
    double sd = 0.0;
    bool bd_fallback = false;
    std::string mask_kind;
};

struct MetricsReport {
    std::string task;
    std::vector<MetricsRow> rows;
    std::string config_fingerprint;
    std::vector<std::string> skipped;

    struct Averages {
        std::optional<double> cs;
        double bd = 0.0;
        double sd = 0.0;
    };
    Averages averages() const;
    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Table with one row per task plus an average row (CS / BD / SD columns).
std::string summary_table(const std::vector<MetricsReport>& reports);

}  // namespace pic
