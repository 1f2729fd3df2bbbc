#include "maskprop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace maskprop::metrics {

BinaryMask mask_from_labels(const LabelMap& labels, int instance_id) {
    BinaryMask m(labels.width, labels.height);
    for (size_t i = 0; i < labels.data.size(); ++i) m.data[i] = labels.data[i] == instance_id;
    return m;
}

BinaryMask mask_from_prob(const ProbMap& prob, float threshold) {
    BinaryMask m(prob.width, prob.height);
    for (size_t i = 0; i < prob.data.size(); ++i) m.data[i] = prob.data[i] >= threshold;
    return m;
}

double jaccard(const BinaryMask& pred, const BinaryMask& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("jaccard: mask dimensions differ");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        bool p = pred.data[i] != 0, g = gt.data[i] != 0;
        inter += p && g;
        uni += p || g;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

BinaryMask boundary_of(const BinaryMask& m) {
    BinaryMask b(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            bool edge = x == 0 || y == 0 || x == m.width - 1 || y == m.height - 1;
            bool bg_neighbor = (x > 0 && !m.at(x - 1, y)) || (x < m.width - 1 && !m.at(x + 1, y)) ||
                               (y > 0 && !m.at(x, y - 1)) || (y < m.height - 1 && !m.at(x, y + 1));
            b.at(x, y) = edge || bg_neighbor;
        }
    }
    return b;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Felzenszwalb-Huttenlocher 1-D squared distance transform.
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    std::vector<int> v(n);
    std::vector<double> z(n + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        int p = v[k];
        d[q] = (q - p) * static_cast<double>(q - p) + f[p];
    }
}

// Squared Euclidean distance to the nearest set pixel; inf if the set is empty.
std::vector<double> squared_edt(const BinaryMask& set) {
    const int w = set.width, h = set.height;
    std::vector<double> dist(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < dist.size(); ++i) dist[i] = set.data[i] ? 0.0 : kInf;

    std::vector<double> f(std::max(w, h)), d(std::max(w, h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = dist[static_cast<size_t>(y) * w + x];
        dt_1d(f, d, w);
        for (int x = 0; x < w; ++x) dist[static_cast<size_t>(y) * w + x] = d[x];
    }
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = dist[static_cast<size_t>(y) * w + x];
        dt_1d(f, d, h);
        for (int y = 0; y < h; ++y) dist[static_cast<size_t>(y) * w + x] = d[y];
    }
    return dist;
}

// Fraction of `from` boundary pixels within tol of a `to` boundary pixel.
double matched_fraction(const BinaryMask& from, const BinaryMask& to, double tol) {
    size_t total = 0, matched = 0;
    std::vector<double> dist = squared_edt(to);
    double tol2 = tol * tol;
    for (size_t i = 0; i < from.data.size(); ++i) {
        if (!from.data[i]) continue;
        ++total;
        matched += dist[i] <= tol2;
    }
    return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
}

}  // namespace

double boundary_f(const BinaryMask& pred, const BinaryMask& gt, double tol_px) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("boundary_f: mask dimensions differ");
    if (tol_px < 0) throw std::invalid_argument("boundary_f: negative tolerance");

    BinaryMask pb = boundary_of(pred);
    BinaryMask gb = boundary_of(gt);
    bool pb_empty = std::all_of(pb.data.begin(), pb.data.end(), [](uint8_t v) { return !v; });
    bool gb_empty = std::all_of(gb.data.begin(), gb.data.end(), [](uint8_t v) { return !v; });
    if (pb_empty && gb_empty) return 1.0;
    if (pb_empty || gb_empty) return 0.0;

    double precision = matched_fraction(pb, gb, tol_px);
    double recall = matched_fraction(gb, pb, tol_px);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double default_boundary_tolerance(int width, int height) {
    double diag = std::sqrt(static_cast<double>(width) * width + static_cast<double>(height) * height);
    return std::max(1.0, 0.008 * diag);
}

MeasureStats sequence_stats(const std::vector<double>& scores) {
    const size_t n = scores.size();
    if (n < 4) throw std::invalid_argument("sequence_stats: need at least 4 frames");
    MeasureStats s;
    double sum = 0.0;
    size_t above = 0;
    for (double v : scores) {
        sum += v;
        above += v > 0.5;
    }
    s.mean = sum / static_cast<double>(n);
    s.recall = static_cast<double>(above) / static_cast<double>(n);

    size_t q = (n + 3) / 4;
    double first = 0.0, last = 0.0;
    for (size_t i = 0; i < q; ++i) {
        first += scores[i];
        last += scores[n - q + i];
    }
    s.decay = (first - last) / static_cast<double>(q);
    return s;
}

double overall(double j_mean_pct, double f_mean_pct) { return 0.5 * (j_mean_pct + f_mean_pct); }

double overall_rounded(double j_mean_pct, double f_mean_pct) {
    long long tenths = std::llround(j_mean_pct * 10.0) + std::llround(f_mean_pct * 10.0);
    long long half = tenths >= 0 ? (tenths + 1) / 2 : -((-tenths) / 2);  // half-up at one decimal
    return static_cast<double>(half) / 10.0;
}

void write_metrics_csv(const std::string& path, const std::vector<SequenceRow>& rows) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    os << "sequence,j_mean,j_recall,j_decay,f_mean,f_recall,f_decay,overall\n";
    os.setf(std::ios::fixed);
    os.precision(4);
    for (const auto& row : rows) {
        double ov = overall_rounded(row.stats.j.mean * 100.0, row.stats.f.mean * 100.0);
        os << row.name << ',' << row.stats.j.mean << ',' << row.stats.j.recall << ','
           << row.stats.j.decay << ',' << row.stats.f.mean << ',' << row.stats.f.recall << ','
           << row.stats.f.decay << ',';
        os.precision(1);
        os << ov << '\n';
        os.precision(4);
    }
    if (!os) throw std::runtime_error("write_metrics_csv: write failed for " + path);
}

}  // namespace maskprop::metrics
