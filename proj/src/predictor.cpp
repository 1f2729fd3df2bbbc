#include "maskprop/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace maskprop::predictor {

ColorModel fit_color_model(const Image& img, const ProbMap& mask, int bins) {
    if (img.width != mask.width || img.height != mask.height)
        throw std::invalid_argument("fit_color_model: image and mask dimensions differ");
    if (bins < 1) throw std::invalid_argument("fit_color_model: bins must be >= 1");

    bool has_fg = false, has_bg = false;
    for (float p : mask.data) {
        has_fg |= p >= 0.5f;
        has_bg |= p < 0.5f;
    }
    if (!has_fg || !has_bg)
        throw std::invalid_argument("fit_color_model: mask must contain both classes");

    ColorModel m;
    m.bins = bins;
    size_t total = static_cast<size_t>(bins) * bins * bins;
    m.fg_hist.assign(total, 1.0);  // Laplace count
    m.bg_hist.assign(total, 1.0);

    auto bin_of = [bins](float v) {
        int b = static_cast<int>(v * static_cast<float>(bins));
        return b < 0 ? 0 : (b >= bins ? bins - 1 : b);
    };
    for (size_t i = 0; i < mask.data.size(); ++i) {
        int br = bin_of(img.data[i * 3]);
        int bg = bin_of(img.data[i * 3 + 1]);
        int bb = bin_of(img.data[i * 3 + 2]);
        size_t idx = (static_cast<size_t>(br) * bins + bg) * bins + bb;
        double p = mask.data[i];
        m.fg_hist[idx] += p;
        m.bg_hist[idx] += 1.0 - p;
    }

    double fg_sum = 0.0, bg_sum = 0.0;
    for (size_t i = 0; i < total; ++i) {
        fg_sum += m.fg_hist[i];
        bg_sum += m.bg_hist[i];
    }
    for (size_t i = 0; i < total; ++i) {
        m.fg_hist[i] /= fg_sum;
        m.bg_hist[i] /= bg_sum;
    }
    return m;
}

ProbMap predict_baseline(const ColorModel& model, const Image& img, const ProbMap& prior) {
    if (img.width != prior.width || img.height != prior.height)
        throw std::invalid_argument("predict_baseline: image and prior dimensions differ");
    const int bins = model.bins;
    auto bin_of = [bins](float v) {
        int b = static_cast<int>(v * static_cast<float>(bins));
        return b < 0 ? 0 : (b >= bins ? bins - 1 : b);
    };
    ProbMap out(prior.width, prior.height);
    for (size_t i = 0; i < prior.data.size(); ++i) {
        size_t idx = (static_cast<size_t>(bin_of(img.data[i * 3])) * bins +
                      bin_of(img.data[i * 3 + 1])) *
                         bins +
                     bin_of(img.data[i * 3 + 2]);
        double p = prior.data[i];
        double num = p * model.fg_hist[idx];
        double den = num + (1.0 - p) * model.bg_hist[idx];
        out.data[i] = den > 0.0 ? static_cast<float>(num / den) : 0.f;
    }
    return out;
}

// ---------------------------------------------------------------------------
// TinyNet
// ---------------------------------------------------------------------------

namespace {

struct Feat {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Feat() = default;
    Feat(int c_, int h_, int w_) : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, 0.0) {}
    double& at(int ch, int y, int x) {
        return v[(static_cast<size_t>(ch) * h + y) * w + x];
    }
    double at(int ch, int y, int x) const {
        return v[(static_cast<size_t>(ch) * h + y) * w + x];
    }
};

// 3x3 convolution, zero padding 1, stride 1.
void conv3x3(const Feat& in, const std::vector<double>& w, const std::vector<double>& b, int out_c,
             Feat& out) {
    out = Feat(out_c, in.h, in.w);
    for (int co = 0; co < out_c; ++co) {
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                double acc = b[co];
                for (int ci = 0; ci < in.c; ++ci) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        int yy = y + dy;
                        if (yy < 0 || yy >= in.h) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            int xx = x + dx;
                            if (xx < 0 || xx >= in.w) continue;
                            acc += w[((static_cast<size_t>(co) * in.c + ci) * 3 + (dy + 1)) * 3 +
                                     (dx + 1)] *
                                   in.at(ci, yy, xx);
                        }
                    }
                }
                out.at(co, y, x) = acc;
            }
        }
    }
}

void conv3x3_backward(const Feat& in, const std::vector<double>& w, const Feat& d_out,
                      std::vector<double>& d_w, std::vector<double>& d_b, Feat& d_in) {
    d_in = Feat(in.c, in.h, in.w);
    for (int co = 0; co < d_out.c; ++co) {
        for (int y = 0; y < in.h; ++y) {
            for (int x = 0; x < in.w; ++x) {
                double g = d_out.at(co, y, x);
                if (g == 0.0) continue;
                d_b[co] += g;
                for (int ci = 0; ci < in.c; ++ci) {
                    for (int dy = -1; dy <= 1; ++dy) {
                        int yy = y + dy;
                        if (yy < 0 || yy >= in.h) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            int xx = x + dx;
                            if (xx < 0 || xx >= in.w) continue;
                            size_t wi = ((static_cast<size_t>(co) * in.c + ci) * 3 + (dy + 1)) * 3 +
                                        (dx + 1);
                            d_w[wi] += g * in.at(ci, yy, xx);
                            d_in.at(ci, yy, xx) += g * w[wi];
                        }
                    }
                }
            }
        }
    }
}

void relu(Feat& f) {
    for (double& v : f.v) v = v > 0.0 ? v : 0.0;
}

// d_pre = d_post masked by the post-activation support (post > 0).
void relu_backward(const Feat& post, Feat& d) {
    for (size_t i = 0; i < post.v.size(); ++i)
        if (post.v[i] <= 0.0) d.v[i] = 0.0;
}

void avgpool2(const Feat& in, Feat& out) {
    out = Feat(in.c, in.h / 2, in.w / 2);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x)
                out.at(c, y, x) = 0.25 * (in.at(c, 2 * y, 2 * x) + in.at(c, 2 * y, 2 * x + 1) +
                                          in.at(c, 2 * y + 1, 2 * x) + in.at(c, 2 * y + 1, 2 * x + 1));
}

void avgpool2_backward(const Feat& d_out, Feat& d_in, int in_h, int in_w) {
    d_in = Feat(d_out.c, in_h, in_w);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y)
            for (int x = 0; x < d_out.w; ++x) {
                double g = 0.25 * d_out.at(c, y, x);
                d_in.at(c, 2 * y, 2 * x) = g;
                d_in.at(c, 2 * y, 2 * x + 1) = g;
                d_in.at(c, 2 * y + 1, 2 * x) = g;
                d_in.at(c, 2 * y + 1, 2 * x + 1) = g;
            }
}

void upsample2_nearest(const Feat& in, Feat& out) {
    out = Feat(in.c, in.h * 2, in.w * 2);
    for (int c = 0; c < in.c; ++c)
        for (int y = 0; y < out.h; ++y)
            for (int x = 0; x < out.w; ++x) out.at(c, y, x) = in.at(c, y / 2, x / 2);
}

void upsample2_backward(const Feat& d_out, Feat& d_in) {
    d_in = Feat(d_out.c, d_out.h / 2, d_out.w / 2);
    for (int c = 0; c < d_out.c; ++c)
        for (int y = 0; y < d_out.h; ++y)
            for (int x = 0; x < d_out.w; ++x) d_in.at(c, y / 2, x / 2) += d_out.at(c, y, x);
}

Feat concat(const Feat& a, const Feat& b) {
    Feat out(a.c + b.c, a.h, a.w);
    std::copy(a.v.begin(), a.v.end(), out.v.begin());
    std::copy(b.v.begin(), b.v.end(), out.v.begin() + static_cast<long>(a.v.size()));
    return out;
}

void split(const Feat& d, int c_a, Feat& d_a, Feat& d_b) {
    d_a = Feat(c_a, d.h, d.w);
    d_b = Feat(d.c - c_a, d.h, d.w);
    std::copy(d.v.begin(), d.v.begin() + static_cast<long>(d_a.v.size()), d_a.v.begin());
    std::copy(d.v.begin() + static_cast<long>(d_a.v.size()), d.v.end(), d_b.v.begin());
}

Feat input_tensor(const Image& img, const ProbMap& prior) {
    Feat in(4, img.height, img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) in.at(c, y, x) = img.at(x, y, c);
            in.at(3, y, x) = prior.at(x, y);
        }
    }
    return in;
}

struct ForwardCache {
    Feat in;              // 4 x S x S
    Feat a1;              // post conv1+relu (skip 1)
    Feat p1;              // pooled
    Feat a2;              // post conv2+relu (skip 2)
    Feat p2;              // pooled
    Feat a3;              // bottleneck post relu
    Feat u1, cat1, a4;    // decoder stage 1
    Feat u2, cat2, a5;    // decoder stage 2
    Feat logits;          // 1 x S x S
};

}  // namespace

TinyNet::TinyNet(uint32_t seed, Channels ch) : ch_(ch) {
    auto add = [this](const std::string& name, std::vector<int> shape) {
        ParamBlock b;
        b.name = name;
        b.shape = std::move(shape);
        size_t n = 1;
        for (int d : b.shape) n *= static_cast<size_t>(d);
        b.v.assign(n, 0.0);
        blocks_.push_back(std::move(b));
    };
    add("w1", {ch.c1, 4, 3, 3});
    add("b1", {ch.c1});
    add("w2", {ch.c2, ch.c1, 3, 3});
    add("b2", {ch.c2});
    add("w3", {ch.c3, ch.c2, 3, 3});
    add("b3", {ch.c3});
    add("w4", {ch.c4, ch.c3 + ch.c2, 3, 3});
    add("b4", {ch.c4});
    add("w5", {ch.c5, ch.c4 + ch.c1, 3, 3});
    add("b5", {ch.c5});
    add("wh", {1, ch.c5, 1, 1});
    add("bh", {1});

    std::mt19937 rng(seed);
    for (ParamBlock& b : blocks_) {
        if (b.shape.size() < 2) continue;  // biases start at zero
        size_t fan_in = b.v.size() / static_cast<size_t>(b.shape[0]);
        size_t fan_out = b.v.size() / static_cast<size_t>(b.shape[1]);
        double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : b.v) {
            double u = static_cast<double>(rng()) * (1.0 / 4294967296.0);
            w = (2.0 * u - 1.0) * r;
        }
    }
}

namespace {

void run_forward(const std::vector<ParamBlock>& p, const TinyNet::Channels& ch, const Image& img,
                 const ProbMap& prior, ForwardCache& fc) {
    if (img.width != prior.width || img.height != prior.height)
        throw std::invalid_argument("TinyNet: image and prior dimensions differ");
    if (img.width != img.height || img.width % 4 != 0 || img.width < 4)
        throw std::invalid_argument("TinyNet: patch must be square with side divisible by 4");

    fc.in = input_tensor(img, prior);
    conv3x3(fc.in, p[0].v, p[1].v, ch.c1, fc.a1);
    relu(fc.a1);
    avgpool2(fc.a1, fc.p1);
    conv3x3(fc.p1, p[2].v, p[3].v, ch.c2, fc.a2);
    relu(fc.a2);
    avgpool2(fc.a2, fc.p2);
    conv3x3(fc.p2, p[4].v, p[5].v, ch.c3, fc.a3);
    relu(fc.a3);
    upsample2_nearest(fc.a3, fc.u1);
    fc.cat1 = concat(fc.u1, fc.a2);
    conv3x3(fc.cat1, p[6].v, p[7].v, ch.c4, fc.a4);
    relu(fc.a4);
    upsample2_nearest(fc.a4, fc.u2);
    fc.cat2 = concat(fc.u2, fc.a1);
    conv3x3(fc.cat2, p[8].v, p[9].v, ch.c5, fc.a5);
    relu(fc.a5);

    fc.logits = Feat(1, fc.a5.h, fc.a5.w);
    const std::vector<double>& wh = p[10].v;
    double bh = p[11].v[0];
    for (int y = 0; y < fc.a5.h; ++y) {
        for (int x = 0; x < fc.a5.w; ++x) {
            double acc = bh;
            for (int c = 0; c < ch.c5; ++c) acc += wh[c] * fc.a5.at(c, y, x);
            fc.logits.at(0, y, x) = acc;
        }
    }
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ProbMap TinyNet::forward(const Image& img, const ProbMap& prior) const {
    ForwardCache fc;
    run_forward(blocks_, ch_, img, prior, fc);
    ProbMap out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(x, y) = static_cast<float>(sigmoid(fc.logits.at(0, y, x)));
    return out;
}

double TinyNet::loss_and_grad(const std::vector<TrainSample>& batch,
                              std::vector<double>& grad) const {
    grad.assign(param_count(), 0.0);
    if (batch.empty()) throw std::invalid_argument("TinyNet: empty batch");

    // Flat views over per-block gradients.
    std::vector<std::vector<double>> g(blocks_.size());
    for (size_t i = 0; i < blocks_.size(); ++i) g[i].assign(blocks_[i].v.size(), 0.0);

    double total_loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (const TrainSample& s : batch) {
        ForwardCache fc;
        run_forward(blocks_, ch_, s.image, s.prior, fc);
        const int hgt = fc.logits.h, wid = fc.logits.w;
        const double inv_px = 1.0 / static_cast<double>(hgt * wid);

        // Sigmoid + BCE fused: dL/dlogit = (p - t) / n_pixels.
        Feat d_logits(1, hgt, wid);
        double loss = 0.0;
        for (int y = 0; y < hgt; ++y) {
            for (int x = 0; x < wid; ++x) {
                double z = fc.logits.at(0, y, x);
                double pr = sigmoid(z);
                double t = s.target.at(x, y);
                double eps = 1e-12;
                loss -= (t * std::log(std::max(pr, eps)) +
                         (1.0 - t) * std::log(std::max(1.0 - pr, eps))) *
                        inv_px;
                d_logits.at(0, y, x) = (pr - t) * inv_px * inv_batch;
            }
        }
        total_loss += loss * inv_batch;

        // Head backward.
        Feat d_a5(ch_.c5, hgt, wid);
        const std::vector<double>& wh = blocks_[10].v;
        for (int y = 0; y < hgt; ++y) {
            for (int x = 0; x < wid; ++x) {
                double gz = d_logits.at(0, y, x);
                g[11][0] += gz;
                for (int c = 0; c < ch_.c5; ++c) {
                    g[10][c] += gz * fc.a5.at(c, y, x);
                    d_a5.at(c, y, x) = gz * wh[c];
                }
            }
        }

        relu_backward(fc.a5, d_a5);
        Feat d_cat2;
        conv3x3_backward(fc.cat2, blocks_[8].v, d_a5, g[8], g[9], d_cat2);
        Feat d_u2, d_a1_skip;
        split(d_cat2, fc.u2.c, d_u2, d_a1_skip);
        Feat d_a4;
        upsample2_backward(d_u2, d_a4);
        relu_backward(fc.a4, d_a4);
        Feat d_cat1;
        conv3x3_backward(fc.cat1, blocks_[6].v, d_a4, g[6], g[7], d_cat1);
        Feat d_u1, d_a2_skip;
        split(d_cat1, fc.u1.c, d_u1, d_a2_skip);
        Feat d_a3;
        upsample2_backward(d_u1, d_a3);
        relu_backward(fc.a3, d_a3);
        Feat d_p2;
        conv3x3_backward(fc.p2, blocks_[4].v, d_a3, g[4], g[5], d_p2);
        Feat d_a2;
        avgpool2_backward(d_p2, d_a2, fc.a2.h, fc.a2.w);
        for (size_t i = 0; i < d_a2.v.size(); ++i) d_a2.v[i] += d_a2_skip.v[i];
        relu_backward(fc.a2, d_a2);
        Feat d_p1;
        conv3x3_backward(fc.p1, blocks_[2].v, d_a2, g[2], g[3], d_p1);
        Feat d_a1;
        avgpool2_backward(d_p1, d_a1, fc.a1.h, fc.a1.w);
        for (size_t i = 0; i < d_a1.v.size(); ++i) d_a1.v[i] += d_a1_skip.v[i];
        relu_backward(fc.a1, d_a1);
        Feat d_in;
        conv3x3_backward(fc.in, blocks_[0].v, d_a1, g[0], g[1], d_in);
    }

    size_t off = 0;
    for (size_t i = 0; i < blocks_.size(); ++i) {
        std::copy(g[i].begin(), g[i].end(), grad.begin() + static_cast<long>(off));
        off += g[i].size();
    }
    return total_loss;
}

size_t TinyNet::param_count() const {
    size_t n = 0;
    for (const ParamBlock& b : blocks_) n += b.v.size();
    return n;
}

std::vector<double> TinyNet::flat_params() const {
    std::vector<double> p;
    p.reserve(param_count());
    for (const ParamBlock& b : blocks_) p.insert(p.end(), b.v.begin(), b.v.end());
    return p;
}

void TinyNet::set_flat_params(const std::vector<double>& p) {
    if (p.size() != param_count()) throw std::invalid_argument("TinyNet: flat parameter size mismatch");
    size_t off = 0;
    for (ParamBlock& b : blocks_) {
        std::copy(p.begin() + static_cast<long>(off), p.begin() + static_cast<long>(off + b.v.size()),
                  b.v.begin());
        off += b.v.size();
    }
}

double bce_loss(const ProbMap& pred, const ProbMap& target) {
    if (pred.width != target.width || pred.height != target.height)
        throw std::invalid_argument("bce_loss: dimensions differ");
    double loss = 0.0;
    const double eps = 1e-12;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        double p = std::min(std::max(static_cast<double>(pred.data[i]), eps), 1.0 - eps);
        double t = target.data[i];
        loss -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return loss / static_cast<double>(pred.data.size());
}

TrainTrace train(TinyNet& net, const std::vector<TrainSample>& dataset, const TrainConfig& cfg) {
    if (dataset.empty()) throw std::invalid_argument("train: dataset is empty");
    if (cfg.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");

    std::mt19937 rng(cfg.seed);
    TrainTrace trace;
    trace.losses.reserve(cfg.steps);
    std::vector<double> grad;

    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<TrainSample> batch;
        batch.reserve(cfg.batch_size);
        for (int b = 0; b < cfg.batch_size; ++b)
            batch.push_back(dataset[rng() % dataset.size()]);

        double loss = net.loss_and_grad(batch, grad);
        if (!std::isfinite(loss))
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
        trace.losses.push_back(loss);

        std::vector<double> p = net.flat_params();
        for (size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * grad[i];
        net.set_flat_params(p);
    }
    return trace;
}

double grad_check(const TinyNet& net, const TrainSample& sample, int num_params, uint32_t seed) {
    TinyNet probe = net;
    std::vector<double> analytic;
    probe.loss_and_grad({sample}, analytic);

    std::vector<double> base = net.flat_params();
    std::mt19937 rng(seed);
    const double h = 1e-5;
    double max_rel = 0.0;
    int checks = std::min<int>(num_params, static_cast<int>(base.size()));

    for (int k = 0; k < checks; ++k) {
        size_t idx = rng() % base.size();
        std::vector<double> p = base;
        p[idx] = base[idx] + h;
        probe.set_flat_params(p);
        std::vector<double> dummy;
        double lp = probe.loss_and_grad({sample}, dummy);
        p[idx] = base[idx] - h;
        probe.set_flat_params(p);
        double lm = probe.loss_and_grad({sample}, dummy);
        double numeric = (lp - lm) / (2.0 * h);
        double rel = std::fabs(analytic[idx] - numeric) /
                     std::max({std::fabs(analytic[idx]), std::fabs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'P', 'N', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& os, double v) {
    uint64_t u;
    std::memcpy(&u, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void save_checkpoint(const TinyNet& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os.write(kMagic, 4);
    put_u32(os, kVersion);
    TinyNet::Channels ch = net.channels();
    put_u32(os, static_cast<uint32_t>(ch.c1));
    put_u32(os, static_cast<uint32_t>(ch.c2));
    put_u32(os, static_cast<uint32_t>(ch.c3));
    put_u32(os, static_cast<uint32_t>(ch.c4));
    put_u32(os, static_cast<uint32_t>(ch.c5));
    put_u32(os, static_cast<uint32_t>(net.blocks().size()));
    for (const ParamBlock& b : net.blocks()) {
        put_u32(os, static_cast<uint32_t>(b.shape.size()));
        for (int d : b.shape) put_u32(os, static_cast<uint32_t>(d));
    }
    for (const ParamBlock& b : net.blocks())
        for (double v : b.v) put_f64(os, v);
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

TinyNet load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    if (get_u32(is) != kVersion) throw std::runtime_error("load_checkpoint: unsupported version");

    TinyNet::Channels ch;
    ch.c1 = static_cast<int>(get_u32(is));
    ch.c2 = static_cast<int>(get_u32(is));
    ch.c3 = static_cast<int>(get_u32(is));
    ch.c4 = static_cast<int>(get_u32(is));
    ch.c5 = static_cast<int>(get_u32(is));

    TinyNet net(0, ch);
    uint32_t nblocks = get_u32(is);
    if (nblocks != net.blocks().size())
        throw std::runtime_error("load_checkpoint: unexpected block count");
    for (const ParamBlock& b : net.blocks()) {
        uint32_t ndim = get_u32(is);
        if (ndim != b.shape.size()) throw std::runtime_error("load_checkpoint: shape rank mismatch");
        for (int d : b.shape)
            if (get_u32(is) != static_cast<uint32_t>(d))
                throw std::runtime_error("load_checkpoint: shape mismatch");
    }
    std::vector<double> flat;
    flat.reserve(net.param_count());
    for (size_t i = 0; i < net.param_count(); ++i) flat.push_back(get_f64(is));
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    net.set_flat_params(flat);
    return net;
}

}  // namespace maskprop::predictor
