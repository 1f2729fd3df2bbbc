#include "maskprop/png_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace maskprop::io {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

bool has_png_magic(FILE* f) {
    unsigned char sig[8];
    size_t n = std::fread(sig, 1, 8, f);
    std::rewind(f);
    return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

inline unsigned char to_byte(float v) {
    float x = v * 255.f + 0.5f;
    return static_cast<unsigned char>(x < 0.f ? 0.f : (x > 255.f ? 255.f : x));
}

Image read_png_rgb(FILE* f, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng init failed for " + path);
    }
    std::vector<std::vector<png_byte>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png decode failed for " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    int w = static_cast<int>(png_get_image_width(png, info));
    int h = static_cast<int>(png_get_image_height(png, info));
    rows.assign(h, std::vector<png_byte>(png_get_rowbytes(png, info)));
    std::vector<png_bytep> row_ptrs(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = static_cast<float>(rows[y][x * 3 + c]) / 255.f;
    return img;
}

Image read_jpeg_rgb(FILE* f, const std::string& path) {
    jpeg_decompress_struct cinfo;
    jpeg_error_mgr jerr;
    cinfo.err = jpeg_std_error(&jerr);
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    if (jpeg_read_header(&cinfo, TRUE) != JPEG_HEADER_OK) {
        jpeg_destroy_decompress(&cinfo);
        throw std::runtime_error("jpeg decode failed for " + path);
    }
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    int w = static_cast<int>(cinfo.output_width);
    int h = static_cast<int>(cinfo.output_height);
    Image img(w, h);
    std::vector<unsigned char> row(static_cast<size_t>(w) * 3);
    unsigned char* rp = row.data();
    for (int y = 0; y < h; ++y) {
        jpeg_read_scanlines(&cinfo, &rp, 1);
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                img.at(x, y, c) = static_cast<float>(row[x * 3 + c]) / 255.f;
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

}  // namespace

Image read_image(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    if (has_png_magic(f.get())) return read_png_rgb(f.get(), path);
    return read_jpeg_rgb(f.get(), path);
}

void write_image_png(const Image& img, const std::string& path) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png encode failed for " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c) row[x * 3 + c] = to_byte(img.at(x, y, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void id_color(int id, unsigned char rgb[3]) {
    // Pascal VOC / DAVIS colormap: bits of the id spread across channels.
    rgb[0] = rgb[1] = rgb[2] = 0;
    int v = id;
    for (int shift = 7; shift >= 0 && v; --shift) {
        rgb[0] |= static_cast<unsigned char>((v & 1) << shift);
        rgb[1] |= static_cast<unsigned char>(((v >> 1) & 1) << shift);
        rgb[2] |= static_cast<unsigned char>(((v >> 2) & 1) << shift);
        v >>= 3;
    }
}

LabelMap read_indexed_png(const std::string& path) {
    FilePtr f = open_file(path, "rb");
    if (!has_png_magic(f.get())) throw std::runtime_error("not a PNG file: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("libpng init failed for " + path);
    }
    std::vector<std::vector<png_byte>> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("png decode failed for " + path);
    }
    png_init_io(png, f.get());
    png_read_info(png, info);
    if (png_get_color_type(png, info) != PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("annotation is not an indexed-palette PNG: " + path);
    }
    png_set_packing(png);  // one index per byte regardless of bit depth
    png_read_update_info(png, info);

    int w = static_cast<int>(png_get_image_width(png, info));
    int h = static_cast<int>(png_get_image_height(png, info));
    rows.assign(h, std::vector<png_byte>(png_get_rowbytes(png, info)));
    std::vector<png_bytep> row_ptrs(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = rows[y].data();
    png_read_image(png, row_ptrs.data());
    png_destroy_read_struct(&png, &info, nullptr);

    LabelMap labels(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) labels.at(x, y) = static_cast<int>(rows[y][x]);
    return labels;
}

void write_indexed_png(const LabelMap& labels, const std::string& path) {
    for (int v : labels.data)
        if (v < 0 || v > 255)
            throw std::invalid_argument("write_indexed_png: id out of palette range");

    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("png encode failed for " + path);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, labels.width, labels.height, 8, PNG_COLOR_TYPE_PALETTE,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_color palette[256];
    for (int i = 0; i < 256; ++i) {
        unsigned char rgb[3];
        id_color(i, rgb);
        palette[i] = {rgb[0], rgb[1], rgb[2]};
    }
    png_set_PLTE(png, info, palette, 256);
    png_write_info(png, info);
    std::vector<png_byte> row(labels.width);
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) row[x] = static_cast<png_byte>(labels.at(x, y));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image overlay_labels(const Image& img, const LabelMap& labels) {
    if (img.width != labels.width || img.height != labels.height)
        throw std::invalid_argument("overlay_labels: dimensions differ");
    Image out = img;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            int id = labels.at(x, y);
            if (id == 0) continue;
            unsigned char rgb[3];
            id_color(id, rgb);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = 0.5f * out.at(x, y, c) + 0.5f * static_cast<float>(rgb[c]) / 255.f;
        }
    }
    return out;
}

}  // namespace maskprop::io
