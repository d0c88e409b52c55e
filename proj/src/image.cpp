// Copyright (C) 2026 The PIC Editing Authors
// SPDX-License-Identifier: Apache-2.0

#include "pic/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "pic/error.hpp"

namespace pic {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};

}  // namespace

Image read_png(const std::filesystem::path& path) {
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw ValidationError("cannot open image " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw ValidationError(path.string() + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ValidationError("failed to decode " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    int w = static_cast<int>(png_get_image_width(png, info));
    int h = static_cast<int>(png_get_image_height(png, info));
    size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buf(rowbytes * static_cast<size_t>(h));
    std::vector<png_bytep> rows(static_cast<size_t>(h));
    for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = buf.data() + static_cast<size_t>(y) * rowbytes;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = rows[static_cast<size_t>(y)][x * 3 + c] / 255.0;
    return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
    if (img.width <= 0 || img.height <= 0) throw ValidationError("cannot write an empty image");
    std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw ValidationError("cannot write image " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw Error("libpng initialisation failed");
    }
    std::vector<png_byte> buf(static_cast<size_t>(img.width) * img.height * 3);
    for (size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<png_byte>(std::lround(std::clamp(img.pixels[i], 0.0, 1.0) * 255.0));
    std::vector<png_bytep> rows(static_cast<size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<size_t>(y)] = buf.data() + static_cast<size_t>(y) * img.width * 3;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ValidationError("failed to encode " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image resize_bilinear(const Image& img, int width, int height) {
    if (img.width == width && img.height == height) return img;
    if (width <= 0 || height <= 0 || img.width <= 0 || img.height <= 0) throw ValidationError("invalid resize");
    Image out(width, height);
    const double sx = static_cast<double>(img.width) / width, sy = static_cast<double>(img.height) / height;
    for (int y = 0; y < height; ++y) {
        double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
        int y0 = static_cast<int>(fy), y1 = std::min(y0 + 1, img.height - 1);
        double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            int x0 = static_cast<int>(fx), x1 = std::min(x0 + 1, img.width - 1);
            double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
                double bot = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
                out.at(x, y, c) = top * (1 - wy) + bot * wy;
            }
        }
    }
    return out;
}

Image contact_sheet(const std::vector<Image>& images, int gap) {
    if (images.empty()) throw ValidationError("contact sheet needs at least one image");
    int w = 0, h = 0;
    for (const auto& im : images) {
        w += im.width;
        h = std::max(h, im.height);
    }
    w += gap * static_cast<int>(images.size() - 1);
    Image sheet(w, h, 1.0);
    int x0 = 0;
    for (const auto& im : images) {
        for (int y = 0; y < im.height; ++y)
            for (int x = 0; x < im.width; ++x)
                for (int c = 0; c < 3; ++c) sheet.at(x0 + x, y, c) = im.at(x, y, c);
        x0 += im.width + gap;
    }
    return sheet;
}

}  // namespace pic
