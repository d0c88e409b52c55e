// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <vector>

namespace pic {

/// RGB image, row-major HWC, values nominally in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, fill) {}

    double& at(int x, int y, int c) { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }
    bool same_size(const Image& o) const { return width == o.width && height == o.height; }
};

/// Reads 8/16-bit PNG of any colour type, converted to RGB.
Image read_png(const std::filesystem::path& path);
/// Writes 8-bit RGB, clamping to [0, 1]. Not atomic; callers stage and rename.
void write_png(const std::filesystem::path& path, const Image& img);

Image resize_bilinear(const Image& img, int width, int height);

/// Tiles images left to right with a gap, for sweep contact sheets.
Image contact_sheet(const std::vector<Image>& images, int gap = 4);

}  // namespace pic
