#include "maskprop/core.hpp"

#include <cmath>
#include <stdexcept>

namespace maskprop {

ProbMap to_grayscale(const Image& img) {
    ProbMap g(img.width, img.height);
    const float* src = img.data.data();
    for (size_t i = 0; i < g.data.size(); ++i) {
        g.data[i] = 0.299f * src[i * 3] + 0.587f * src[i * 3 + 1] + 0.114f * src[i * 3 + 2];
    }
    return g;
}

namespace {

inline float source_coord(int dst_i, int dst_n, int src_n) {
    if (dst_n <= 1) return 0.f;
    return static_cast<float>(dst_i) * static_cast<float>(src_n - 1) /
           static_cast<float>(dst_n - 1);
}

struct BilinearTap {
    int i0, i1;
    float w1;  // weight of i1; i0 gets 1-w1
};

inline BilinearTap make_tap(float coord, int n) {
    int i0 = static_cast<int>(std::floor(coord));
    if (i0 > n - 2) i0 = n - 2;
    if (i0 < 0) i0 = 0;
    float w1 = coord - static_cast<float>(i0);
    if (n == 1) return {0, 0, 0.f};
    return {i0, i0 + 1, w1};
}

void check_resize_target(int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) throw std::invalid_argument("resize_bilinear: zero target dimension");
}

}  // namespace

ProbMap resize_bilinear(const ProbMap& map, int new_w, int new_h) {
    check_resize_target(new_w, new_h);
    ProbMap out(new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        BilinearTap ty = make_tap(source_coord(y, new_h, map.height), map.height);
        for (int x = 0; x < new_w; ++x) {
            BilinearTap tx = make_tap(source_coord(x, new_w, map.width), map.width);
            float top = map.at(tx.i0, ty.i0) * (1.f - tx.w1) + map.at(tx.i1, ty.i0) * tx.w1;
            float bot = map.at(tx.i0, ty.i1) * (1.f - tx.w1) + map.at(tx.i1, ty.i1) * tx.w1;
            out.at(x, y) = top * (1.f - ty.w1) + bot * ty.w1;
        }
    }
    return out;
}

Image resize_bilinear(const Image& img, int new_w, int new_h) {
    check_resize_target(new_w, new_h);
    Image out(new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        BilinearTap ty = make_tap(source_coord(y, new_h, img.height), img.height);
        for (int x = 0; x < new_w; ++x) {
            BilinearTap tx = make_tap(source_coord(x, new_w, img.width), img.width);
            for (int c = 0; c < 3; ++c) {
                float top = img.at(tx.i0, ty.i0, c) * (1.f - tx.w1) + img.at(tx.i1, ty.i0, c) * tx.w1;
                float bot = img.at(tx.i0, ty.i1, c) * (1.f - tx.w1) + img.at(tx.i1, ty.i1, c) * tx.w1;
                out.at(x, y, c) = top * (1.f - ty.w1) + bot * ty.w1;
            }
        }
    }
    return out;
}

namespace {

void check_crop_box(const BBox& box, int w, int h) {
    if (!box.valid_within(w, h)) throw std::invalid_argument("crop: bbox out of raster bounds");
}

}  // namespace

ProbMap crop(const ProbMap& map, const BBox& box) {
    check_crop_box(box, map.width, map.height);
    ProbMap out(box.width(), box.height());
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = map.at(box.x0 + x, box.y0 + y);
    return out;
}

Image crop(const Image& img, const BBox& box) {
    check_crop_box(box, img.width, img.height);
    Image out(box.width(), box.height());
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(box.x0 + x, box.y0 + y, c);
    return out;
}

FlowField crop(const FlowField& flow, const BBox& box) {
    check_crop_box(box, flow.width, flow.height);
    FlowField out(box.width(), box.height());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            out.dx(x, y) = flow.dx(box.x0 + x, box.y0 + y);
            out.dy(x, y) = flow.dy(box.x0 + x, box.y0 + y);
        }
    }
    return out;
}

ProbMap paste(const ProbMap& dst, const ProbMap& patch, const BBox& box) {
    if (!box.valid_within(dst.width, dst.height))
        throw std::invalid_argument("paste: bbox out of raster bounds");
    if (patch.width != box.width() || patch.height != box.height())
        throw std::invalid_argument("paste: patch dimensions do not match bbox");
    ProbMap out = dst;
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) out.at(box.x0 + x, box.y0 + y) = patch.at(x, y);
    return out;
}

}  // namespace maskprop
