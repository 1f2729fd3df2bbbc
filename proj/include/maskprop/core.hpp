#pragma once

#include <cstddef>
#include <vector>

namespace maskprop {

// H x W x 3 color raster, row-major interleaved RGB, samples normalized to [0,1].
// 8-bit I/O converts at the boundary (see png_io); everything in between runs on
// normalized floats.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // width * height * 3

    Image() = default;
    Image(int w, int h, float fill = 0.f)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

    float& at(int x, int y, int c) {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    float at(int x, int y, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * 3 + c];
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// H x W scalar field, row-major. Mask probabilities live in [0,1]; the same
// container carries grayscale intensities and other per-pixel scalars.
struct ProbMap {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // width * height

    ProbMap() = default;
    ProbMap(int w, int h, float fill = 0.f)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// H x W x 2 displacement field in pixel units, row-major interleaved (dx, dy),
// +x right, +y down.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> data;  // width * height * 2

    FlowField() = default;
    FlowField(int w, int h, float fill_dx = 0.f, float fill_dy = 0.f)
        : width(w), height(h), data(static_cast<size_t>(w) * h * 2, 0.f) {
        if (fill_dx != 0.f || fill_dy != 0.f) {
            for (size_t i = 0; i < data.size(); i += 2) {
                data[i] = fill_dx;
                data[i + 1] = fill_dy;
            }
        }
    }

    float& dx(int x, int y) { return data[(static_cast<size_t>(y) * width + x) * 2]; }
    float dx(int x, int y) const { return data[(static_cast<size_t>(y) * width + x) * 2]; }
    float& dy(int x, int y) { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
    float dy(int x, int y) const { return data[(static_cast<size_t>(y) * width + x) * 2 + 1]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// H x W instance-ID raster, 0 = background.
struct LabelMap {
    int width = 0;
    int height = 0;
    std::vector<int> data;  // width * height

    LabelMap() = default;
    LabelMap(int w, int h, int fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

    int& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    int at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Half-open pixel box: [x0, x1) x [y0, y1).
struct BBox {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0;
    int y1 = 0;

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
    bool valid_within(int bounds_w, int bounds_h) const {
        return 0 <= x0 && x0 < x1 && x1 <= bounds_w && 0 <= y0 && y0 < y1 && y1 <= bounds_h;
    }
    bool operator==(const BBox&) const = default;
};

// Rec.601 luma of a normalized RGB image.
ProbMap to_grayscale(const Image& img);

// Corner-aligned bilinear resize. Output pixel u maps to source coordinate
// u*(src_n-1)/(dst_n-1); a size-1 output samples coordinate 0. The same
// convention is used by warp and ROI patch handling.
ProbMap resize_bilinear(const ProbMap& map, int new_w, int new_h);
Image resize_bilinear(const Image& img, int new_w, int new_h);

ProbMap crop(const ProbMap& map, const BBox& box);
Image crop(const Image& img, const BBox& box);
FlowField crop(const FlowField& flow, const BBox& box);

// Replaces dst values inside the box with the patch; everything else untouched.
ProbMap paste(const ProbMap& dst, const ProbMap& patch, const BBox& box);

}  // namespace maskprop
