#include "maskprop/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace maskprop::flow {

namespace {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Bilinear sample with replicate padding; flow warping of intensities must not
// invent zero-valued borders.
float sample_clamped(const ProbMap& map, float x, float y) {
    x = std::min(std::max(x, 0.f), static_cast<float>(map.width - 1));
    y = std::min(std::max(y, 0.f), static_cast<float>(map.height - 1));
    int x0 = std::min(static_cast<int>(x), map.width - 2);
    int y0 = std::min(static_cast<int>(y), map.height - 2);
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    int x1 = std::min(x0 + 1, map.width - 1);
    int y1 = std::min(y0 + 1, map.height - 1);
    float fx = x - static_cast<float>(x0);
    float fy = y - static_cast<float>(y0);
    float top = map.at(x0, y0) * (1.f - fx) + map.at(x1, y0) * fx;
    float bot = map.at(x0, y1) * (1.f - fx) + map.at(x1, y1) * fx;
    return top * (1.f - fy) + bot * fy;
}

ProbMap gaussian_blur(const ProbMap& in, float sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(2.5f * sigma)));
    std::vector<float> kernel(2 * radius + 1);
    float sum = 0.f;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5f * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (float& k : kernel) k /= sum;

    ProbMap tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            float acc = 0.f;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * in.at(clampi(x + i, 0, in.width - 1), y);
            tmp.at(x, y) = acc;
        }
    }
    ProbMap out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            float acc = 0.f;
            for (int i = -radius; i <= radius; ++i)
                acc += kernel[i + radius] * tmp.at(x, clampi(y + i, 0, in.height - 1));
            out.at(x, y) = acc;
        }
    }
    return out;
}

// Central differences with replicate padding.
void central_gradient(const ProbMap& g, ProbMap& gx, ProbMap& gy) {
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            int xm = clampi(x - 1, 0, g.width - 1);
            int xp = clampi(x + 1, 0, g.width - 1);
            int ym = clampi(y - 1, 0, g.height - 1);
            int yp = clampi(y + 1, 0, g.height - 1);
            gx.at(x, y) = 0.5f * (g.at(xp, y) - g.at(xm, y));
            gy.at(x, y) = 0.5f * (g.at(x, yp) - g.at(x, ym));
        }
    }
}

constexpr float kDerivClamp = 4.f;

inline float clampf(float v, float lim) { return v < -lim ? -lim : (v > lim ? lim : v); }

}  // namespace

std::vector<ProbMap> gaussian_pyramid(const ProbMap& field, int levels, float scale) {
    if (levels < 1) throw std::invalid_argument("gaussian_pyramid: levels must be >= 1");
    if (!(scale > 0.f && scale < 1.f))
        throw std::invalid_argument("gaussian_pyramid: scale must lie in (0,1)");
    std::vector<ProbMap> pyr;
    pyr.push_back(field);
    for (int l = 1; l < levels; ++l) {
        const ProbMap& prev = pyr.back();
        int nw = static_cast<int>(std::lround(prev.width * scale));
        int nh = static_cast<int>(std::lround(prev.height * scale));
        if (nw < 4 || nh < 4)
            throw std::invalid_argument("gaussian_pyramid: image too small for requested levels");
        // sigma matched to the decimation factor
        float sigma = 0.6f / scale;
        pyr.push_back(resize_bilinear(gaussian_blur(prev, sigma), nw, nh));
    }
    return pyr;
}

FlowField horn_schunck_level(const ProbMap& g_prev, const ProbMap& g_next,
                             const FlowField& init, const FlowParams& params) {
    if (g_prev.width != g_next.width || g_prev.height != g_next.height ||
        init.width != g_next.width || init.height != g_next.height)
        throw std::invalid_argument("horn_schunck_level: dimension mismatch");

    const int w = g_next.width;
    const int h = g_next.height;
    const size_t n = static_cast<size_t>(w) * h;
    const float alpha2 = params.alpha * params.alpha;
    const float flow_limit = static_cast<float>(std::max(w, h));

    // Warp the previous frame by the initial flow, then linearize around it.
    ProbMap warped(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            warped.at(x, y) = sample_clamped(g_prev, static_cast<float>(x) + init.dx(x, y),
                                             static_cast<float>(y) + init.dy(x, y));

    ProbMap wx(w, h), wy(w, h), nx(w, h), ny(w, h);
    central_gradient(warped, wx, wy);
    central_gradient(g_next, nx, ny);

    std::vector<float> ix(n), iy(n), it(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            ix[i] = clampf(0.5f * (wx.at(x, y) + nx.at(x, y)), kDerivClamp);
            iy[i] = clampf(0.5f * (wy.at(x, y) + ny.at(x, y)), kDerivClamp);
            // Effective temporal term so that the residual Ix*u + Iy*v + It
            // vanishes at the true total flow, not the increment.
            float it0 = clampf(warped.at(x, y) - g_next.at(x, y), kDerivClamp);
            it[i] = it0 - ix[i] * init.dx(x, y) - iy[i] * init.dy(x, y);
        }
    }

    std::vector<float> u(n), v(n), un(n), vn(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            u[static_cast<size_t>(y) * w + x] = init.dx(x, y);
            v[static_cast<size_t>(y) * w + x] = init.dy(x, y);
        }
    }

    // Jacobi sweeps with the classic weighted 8-neighbour average.
    for (int iter = 0; iter < params.iterations_per_level; ++iter) {
        for (int y = 0; y < h; ++y) {
            int ym = clampi(y - 1, 0, h - 1), yp = clampi(y + 1, 0, h - 1);
            for (int x = 0; x < w; ++x) {
                int xm = clampi(x - 1, 0, w - 1), xp = clampi(x + 1, 0, w - 1);
                size_t i = static_cast<size_t>(y) * w + x;
                auto idx = [&](int xx, int yy) { return static_cast<size_t>(yy) * w + xx; };
                float ubar = (u[idx(xm, ym)] + u[idx(xp, ym)] + u[idx(xm, yp)] + u[idx(xp, yp)]) / 12.f +
                             (u[idx(x, ym)] + u[idx(xm, y)] + u[idx(xp, y)] + u[idx(x, yp)]) / 6.f;
                float vbar = (v[idx(xm, ym)] + v[idx(xp, ym)] + v[idx(xm, yp)] + v[idx(xp, yp)]) / 12.f +
                             (v[idx(x, ym)] + v[idx(xm, y)] + v[idx(xp, y)] + v[idx(x, yp)]) / 6.f;
                float denom = alpha2 + ix[i] * ix[i] + iy[i] * iy[i];
                float t = (ix[i] * ubar + iy[i] * vbar + it[i]) / denom;
                un[i] = clampf(ubar - ix[i] * t, flow_limit);
                vn[i] = clampf(vbar - iy[i] * t, flow_limit);
            }
        }
        u.swap(un);
        v.swap(vn);
    }

    FlowField out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.dx(x, y) = u[static_cast<size_t>(y) * w + x];
            out.dy(x, y) = v[static_cast<size_t>(y) * w + x];
        }
    }
    return out;
}

FlowField estimate_flow(const Image& prev, const Image& next, const FlowParams& params) {
    if (prev.width != next.width || prev.height != next.height)
        throw std::invalid_argument("estimate_flow: frame dimensions differ");

    // Clamp the pyramid depth to what the frame size allows.
    int levels = 1;
    {
        int w = prev.width, h = prev.height;
        while (levels < params.pyramid_levels) {
            w = static_cast<int>(std::lround(w * params.level_scale));
            h = static_cast<int>(std::lround(h * params.level_scale));
            if (w < 4 || h < 4) break;
            ++levels;
        }
    }

    // Backward flow lives on next's grid: next is the reference image, prev is
    // the one being sampled at x + f(x).
    std::vector<ProbMap> pyr_prev = gaussian_pyramid(to_grayscale(prev), levels, params.level_scale);
    std::vector<ProbMap> pyr_next = gaussian_pyramid(to_grayscale(next), levels, params.level_scale);

    FlowField f(pyr_next.back().width, pyr_next.back().height);
    for (int l = levels - 1; l >= 0; --l) {
        // A couple of relinearizations per level keep the Taylor expansion honest.
        for (int warp_pass = 0; warp_pass < 3; ++warp_pass)
            f = horn_schunck_level(pyr_prev[l], pyr_next[l], f, params);
        if (l > 0) {
            const ProbMap& finer = pyr_next[l - 1];
            FlowField up(finer.width, finer.height);
            ProbMap u(f.width, f.height), v(f.width, f.height);
            for (int y = 0; y < f.height; ++y)
                for (int x = 0; x < f.width; ++x) {
                    u.at(x, y) = f.dx(x, y);
                    v.at(x, y) = f.dy(x, y);
                }
            ProbMap uu = resize_bilinear(u, finer.width, finer.height);
            ProbMap vv = resize_bilinear(v, finer.width, finer.height);
            float gain = 1.f / params.level_scale;
            for (int y = 0; y < finer.height; ++y)
                for (int x = 0; x < finer.width; ++x) {
                    up.dx(x, y) = uu.at(x, y) * gain;
                    up.dy(x, y) = vv.at(x, y) * gain;
                }
            f = up;
        }
    }
    return f;
}

namespace {

void put_u32_le(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint32_t float_bits(float f) {
    uint32_t u;
    std::memcpy(&u, &f, 4);
    return u;
}

float bits_float(uint32_t u) {
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

void write_flo(const FlowField& flow, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_flo: cannot open " + path);
    os.write("PIEH", 4);
    put_u32_le(os, static_cast<uint32_t>(flow.width));
    put_u32_le(os, static_cast<uint32_t>(flow.height));
    for (float f : flow.data) put_u32_le(os, float_bits(f));
    if (!os) throw std::runtime_error("write_flo: write failed for " + path);
}

FlowField read_flo(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_flo: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PIEH", 4) != 0)
        throw std::runtime_error("read_flo: bad magic in " + path);
    int w = static_cast<int32_t>(get_u32_le(is));
    int h = static_cast<int32_t>(get_u32_le(is));
    if (!is || w <= 0 || h <= 0) throw std::runtime_error("read_flo: bad header in " + path);
    FlowField flow(w, h);
    for (float& f : flow.data) f = bits_float(get_u32_le(is));
    if (!is) throw std::runtime_error("read_flo: truncated file " + path);
    return flow;
}

}  // namespace maskprop::flow
