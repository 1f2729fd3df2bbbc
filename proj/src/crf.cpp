#include "maskprop/crf.hpp"

#include <cmath>
#include <stdexcept>

#include "maskprop/permutohedral.hpp"

namespace maskprop::crf {

namespace {

constexpr double kUnaryClamp = 1e-6;

// Marginals normalize exactly by construction: q_fg + q_bg = 1.
inline void softmax2(double exp_bg, double exp_fg, double& q_bg, double& q_fg) {
    double m = exp_bg > exp_fg ? exp_bg : exp_fg;
    double eb = std::exp(exp_bg - m);
    double ef = std::exp(exp_fg - m);
    q_bg = eb / (eb + ef);
    q_fg = ef / (eb + ef);
}

void init_marginals(const UnaryField& unary, std::vector<double>& q_bg, std::vector<double>& q_fg) {
    size_t n = unary.bg.size();
    q_bg.resize(n);
    q_fg.resize(n);
    for (size_t i = 0; i < n; ++i) softmax2(-unary.bg[i], -unary.fg[i], q_bg[i], q_fg[i]);
}

ProbMap foreground_marginal(int w, int h, const std::vector<double>& q_fg) {
    ProbMap out(w, h);
    for (size_t i = 0; i < q_fg.size(); ++i) out.data[i] = static_cast<float>(q_fg[i]);
    return out;
}

}  // namespace

UnaryField unary_from_prob(const ProbMap& prob) {
    UnaryField u;
    u.width = prob.width;
    u.height = prob.height;
    u.bg.resize(prob.data.size());
    u.fg.resize(prob.data.size());
    for (size_t i = 0; i < prob.data.size(); ++i) {
        double p = prob.data[i];
        if (p < kUnaryClamp) p = kUnaryClamp;
        if (p > 1.0 - kUnaryClamp) p = 1.0 - kUnaryClamp;
        u.fg[i] = -std::log(p);
        u.bg[i] = -std::log(1.0 - p);
    }
    return u;
}

ProbMap mean_field_brute(const UnaryField& unary, const Image& img, const CrfParams& params) {
    if (img.width != unary.width || img.height != unary.height)
        throw std::invalid_argument("mean_field_brute: unary and image dimensions differ");
    const int w = unary.width, h = unary.height;
    const size_t n = static_cast<size_t>(w) * h;
    if (n > 4096) throw std::invalid_argument("mean_field_brute: pixel count exceeds 4096");

    const double inv2a = 1.0 / (2.0 * params.theta_alpha * params.theta_alpha);
    const double inv2b = 1.0 / (2.0 * params.theta_beta * params.theta_beta);
    const double inv2g = 1.0 / (2.0 * params.theta_gamma * params.theta_gamma);

    std::vector<double> q_bg, q_fg;
    init_marginals(unary, q_bg, q_fg);
    std::vector<double> m_bg(n), m_fg(n);

    for (int it = 0; it < params.iterations; ++it) {
        for (size_t i = 0; i < n; ++i) {
            int xi = static_cast<int>(i) % w, yi = static_cast<int>(i) / w;
            double ri = img.data[i * 3], gi = img.data[i * 3 + 1], bi = img.data[i * 3 + 2];
            double acc_bg = 0.0, acc_fg = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                int xj = static_cast<int>(j) % w, yj = static_cast<int>(j) / w;
                double dp = static_cast<double>(xi - xj) * (xi - xj) +
                            static_cast<double>(yi - yj) * (yi - yj);
                double dr = ri - img.data[j * 3];
                double dg = gi - img.data[j * 3 + 1];
                double db = bi - img.data[j * 3 + 2];
                double k = params.w_app * std::exp(-dp * inv2a -
                                                   (dr * dr + dg * dg + db * db) * inv2b) +
                           params.w_smooth * std::exp(-dp * inv2g);
                acc_bg += k * q_bg[j];
                acc_fg += k * q_fg[j];
            }
            m_bg[i] = acc_bg;
            m_fg[i] = acc_fg;
        }
        // Potts: each label is penalized by the other label's message mass.
        for (size_t i = 0; i < n; ++i)
            softmax2(-unary.bg[i] - m_fg[i], -unary.fg[i] - m_bg[i], q_bg[i], q_fg[i]);
    }
    return foreground_marginal(w, h, q_fg);
}

ProbMap mean_field_lattice(const UnaryField& unary, const Image& img, const CrfParams& params) {
    if (img.width != unary.width || img.height != unary.height)
        throw std::invalid_argument("mean_field_lattice: unary and image dimensions differ");
    const int w = unary.width, h = unary.height;
    const size_t n = static_cast<size_t>(w) * h;

    std::vector<float> feat_app(n * 5), feat_smooth(n * 2);
    for (size_t i = 0; i < n; ++i) {
        float x = static_cast<float>(i % w), y = static_cast<float>(i / w);
        feat_app[i * 5] = x / params.theta_alpha;
        feat_app[i * 5 + 1] = y / params.theta_alpha;
        feat_app[i * 5 + 2] = img.data[i * 3] / params.theta_beta;
        feat_app[i * 5 + 3] = img.data[i * 3 + 1] / params.theta_beta;
        feat_app[i * 5 + 4] = img.data[i * 3 + 2] / params.theta_beta;
        feat_smooth[i * 2] = x / params.theta_gamma;
        feat_smooth[i * 2 + 1] = y / params.theta_gamma;
    }
    PermutohedralLattice lat_app(feat_app, static_cast<int>(n), 5);
    PermutohedralLattice lat_smooth(feat_smooth, static_cast<int>(n), 2);

    std::vector<double> q_bg, q_fg;
    init_marginals(unary, q_bg, q_fg);

    std::vector<double> q2(n * 2), filt_app, filt_smooth;
    for (int it = 0; it < params.iterations; ++it) {
        for (size_t i = 0; i < n; ++i) {
            q2[i * 2] = q_bg[i];
            q2[i * 2 + 1] = q_fg[i];
        }
        lat_app.filter(q2, filt_app, 2);
        lat_smooth.filter(q2, filt_smooth, 2);
        for (size_t i = 0; i < n; ++i) {
            double self_app = lat_app.self_weights()[i];
            double self_smooth = lat_smooth.self_weights()[i];
            double m_bg = params.w_app * (filt_app[i * 2] - self_app * q_bg[i]) +
                          params.w_smooth * (filt_smooth[i * 2] - self_smooth * q_bg[i]);
            double m_fg = params.w_app * (filt_app[i * 2 + 1] - self_app * q_fg[i]) +
                          params.w_smooth * (filt_smooth[i * 2 + 1] - self_smooth * q_fg[i]);
            softmax2(-unary.bg[i] - m_fg, -unary.fg[i] - m_bg, q_bg[i], q_fg[i]);
        }
    }
    return foreground_marginal(w, h, q_fg);
}

ProbMap refine(const ProbMap& prob, const Image& img, const CrfParams& params) {
    if (img.width != prob.width || img.height != prob.height)
        throw std::invalid_argument("crf::refine: dimensions differ");
    UnaryField u = unary_from_prob(prob);
    if (prob.pixel_count() <= 4096) return mean_field_brute(u, img, params);
    return mean_field_lattice(u, img, params);
}

}  // namespace maskprop::crf
