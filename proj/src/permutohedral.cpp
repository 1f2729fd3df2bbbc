#include "maskprop/permutohedral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace maskprop::crf {

namespace {

// Open-addressing table mapping lattice keys (d shorts) to dense vertex ids.
class KeyTable {
public:
    KeyTable(int key_size, size_t expected)
        : key_size_(key_size), capacity_(std::max<size_t>(16, expected * 2)), table_(capacity_, -1) {
        keys_.reserve(capacity_ / 2 * key_size_);
    }

    int size() const { return filled_; }

    int find(const short* key, bool create) {
        if (2 * static_cast<size_t>(filled_) >= capacity_) grow();
        size_t h = hash(key) % capacity_;
        while (true) {
            int e = table_[h];
            if (e == -1) {
                if (!create) return -1;
                keys_.insert(keys_.end(), key, key + key_size_);
                table_[h] = filled_;
                return filled_++;
            }
            if (std::equal(key, key + key_size_, &keys_[static_cast<size_t>(e) * key_size_]))
                return e;
            h = h + 1 < capacity_ ? h + 1 : 0;
        }
    }

    const short* key_of(int id) const { return &keys_[static_cast<size_t>(id) * key_size_]; }

private:
    size_t hash(const short* key) const {
        size_t r = 0;
        for (int i = 0; i < key_size_; ++i) {
            r += static_cast<size_t>(key[i]);
            r *= 1664525u;
        }
        return r;
    }

    void grow() {
        capacity_ *= 2;
        std::fill(table_.begin(), table_.end(), -1);
        table_.resize(capacity_, -1);
        for (int e = 0; e < filled_; ++e) {
            size_t h = hash(key_of(e)) % capacity_;
            while (table_[h] >= 0) h = h + 1 < capacity_ ? h + 1 : 0;
            table_[h] = e;
        }
    }

    int key_size_;
    size_t capacity_;
    int filled_ = 0;
    std::vector<short> keys_;
    std::vector<int> table_;
};

}  // namespace

PermutohedralLattice::PermutohedralLattice(const std::vector<float>& features, int num_points,
                                           int dim)
    : n_(num_points), d_(dim) {
    if (d_ < 1 || d_ > 8) throw std::invalid_argument("permutohedral: feature dimension must be 1..8");
    if (features.size() != static_cast<size_t>(n_) * d_)
        throw std::invalid_argument("permutohedral: feature buffer size mismatch");

    offset_.assign(static_cast<size_t>(n_) * (d_ + 1), -1);
    barycentric_.assign(static_cast<size_t>(n_) * (d_ + 1), 0.f);
    self_weight_.assign(n_, 0.0);

    KeyTable table(d_, static_cast<size_t>(n_));

    std::vector<float> elevated(d_ + 1), rem0(d_ + 1), bary(d_ + 2);
    std::vector<int> rank(d_ + 1);
    std::vector<short> key(d_);

    // canonical[r][i]: i-th coordinate of the r-th canonical simplex vertex
    std::vector<short> canonical((d_ + 1) * (d_ + 1));
    for (int r = 0; r <= d_; ++r) {
        for (int i = 0; i <= d_ - r; ++i) canonical[r * (d_ + 1) + i] = static_cast<short>(r);
        for (int i = d_ - r + 1; i <= d_; ++i)
            canonical[r * (d_ + 1) + i] = static_cast<short>(r - (d_ + 1));
    }

    // Elevation scaling so the lattice blur realizes a unit-variance Gaussian.
    const float inv_std_dev = std::sqrt(2.f / 3.f) * static_cast<float>(d_ + 1);
    std::vector<float> scale_factor(d_);
    for (int i = 0; i < d_; ++i)
        scale_factor[i] = 1.f / std::sqrt(static_cast<float>((i + 2) * (i + 1))) * inv_std_dev;

    for (int p = 0; p < n_; ++p) {
        const float* f = &features[static_cast<size_t>(p) * d_];

        // Elevate onto the hyperplane sum(x) = 0.
        float sm = 0.f;
        for (int j = d_; j > 0; --j) {
            float cf = f[j - 1] * scale_factor[j - 1];
            elevated[j] = sm - static_cast<float>(j) * cf;
            sm += cf;
        }
        elevated[0] = sm;

        // Nearest zero-colored lattice point by rounding to multiples of d+1.
        const float down = 1.f / static_cast<float>(d_ + 1);
        int sum = 0;
        for (int i = 0; i <= d_; ++i) {
            int rd = static_cast<int>(std::lround(elevated[i] * down));
            rem0[i] = static_cast<float>(rd * (d_ + 1));
            sum += rd;
        }

        // Rank = position of each coordinate in the sorted residuals.
        std::fill(rank.begin(), rank.end(), 0);
        for (int i = 0; i < d_; ++i) {
            float di = elevated[i] - rem0[i];
            for (int j = i + 1; j <= d_; ++j) {
                if (di < elevated[j] - rem0[j])
                    ++rank[i];
                else
                    ++rank[j];
            }
        }

        // Walk back onto the plane if the rounded point does not sum to zero.
        for (int i = 0; i <= d_; ++i) {
            rank[i] += sum;
            if (rank[i] < 0) {
                rank[i] += d_ + 1;
                rem0[i] += static_cast<float>(d_ + 1);
            } else if (rank[i] > d_) {
                rank[i] -= d_ + 1;
                rem0[i] -= static_cast<float>(d_ + 1);
            }
        }

        // Barycentric coordinates inside the simplex.
        std::fill(bary.begin(), bary.end(), 0.f);
        for (int i = 0; i <= d_; ++i) {
            float v = (elevated[i] - rem0[i]) * down;
            bary[d_ - rank[i]] += v;
            bary[d_ - rank[i] + 1] -= v;
        }
        bary[0] += 1.f + bary[d_ + 1];

        for (int r = 0; r <= d_; ++r) {
            for (int i = 0; i < d_; ++i)
                key[i] = static_cast<short>(static_cast<int>(rem0[i]) +
                                            canonical[r * (d_ + 1) + rank[i]]);
            offset_[static_cast<size_t>(p) * (d_ + 1) + r] = table.find(key.data(), true);
            barycentric_[static_cast<size_t>(p) * (d_ + 1) + r] = bary[r];
        }
    }

    m_ = table.size();

    // Blur neighbours along each of the d+1 lattice axes.
    blur_n1_.assign(static_cast<size_t>(d_ + 1) * m_, -1);
    blur_n2_.assign(static_cast<size_t>(d_ + 1) * m_, -1);
    std::vector<short> n1(d_), n2(d_);
    for (int j = 0; j <= d_; ++j) {
        for (int v = 0; v < m_; ++v) {
            const short* k = table.key_of(v);
            for (int i = 0; i < d_; ++i) {
                n1[i] = static_cast<short>(k[i] - 1);
                n2[i] = static_cast<short>(k[i] + 1);
            }
            if (j < d_) {
                n1[j] = static_cast<short>(k[j] + d_);
                n2[j] = static_cast<short>(k[j] - d_);
            }
            blur_n1_[static_cast<size_t>(j) * m_ + v] = table.find(n1.data(), false);
            blur_n2_[static_cast<size_t>(j) * m_ + v] = table.find(n2.data(), false);
        }
    }

    // Self-coefficient estimate from splat weights: within one simplex,
    // vertices r and r' sit 2^-|r-r'| apart under the axis blur.
    const double alpha = 1.0 / (1.0 + std::pow(2.0, -d_));
    for (int p = 0; p < n_; ++p) {
        double sw = 0.0;
        const float* b = &barycentric_[static_cast<size_t>(p) * (d_ + 1)];
        for (int r = 0; r <= d_; ++r)
            for (int r2 = 0; r2 <= d_; ++r2)
                sw += static_cast<double>(b[r]) * b[r2] * std::pow(2.0, -std::abs(r - r2));
        self_weight_[p] = alpha * sw;
    }
}

void PermutohedralLattice::filter(const std::vector<double>& in, std::vector<double>& out,
                                  int value_size) const {
    if (in.size() != static_cast<size_t>(n_) * value_size)
        throw std::invalid_argument("permutohedral filter: input size mismatch");
    out.assign(static_cast<size_t>(n_) * value_size, 0.0);

    // Slot 0 is a zero sink for missing neighbours; vertex v lives at v+1.
    std::vector<double> values(static_cast<size_t>(m_ + 1) * value_size, 0.0);
    std::vector<double> new_values(values.size(), 0.0);

    for (int p = 0; p < n_; ++p) {
        for (int r = 0; r <= d_; ++r) {
            size_t o = static_cast<size_t>(offset_[static_cast<size_t>(p) * (d_ + 1) + r]) + 1;
            double w = barycentric_[static_cast<size_t>(p) * (d_ + 1) + r];
            for (int k = 0; k < value_size; ++k)
                values[o * value_size + k] += w * in[static_cast<size_t>(p) * value_size + k];
        }
    }

    for (int j = 0; j <= d_; ++j) {
        for (int v = 0; v < m_; ++v) {
            size_t n1 = static_cast<size_t>(blur_n1_[static_cast<size_t>(j) * m_ + v]) + 1;
            size_t n2 = static_cast<size_t>(blur_n2_[static_cast<size_t>(j) * m_ + v]) + 1;
            for (int k = 0; k < value_size; ++k)
                new_values[static_cast<size_t>(v + 1) * value_size + k] =
                    values[static_cast<size_t>(v + 1) * value_size + k] +
                    0.5 * (values[n1 * value_size + k] + values[n2 * value_size + k]);
        }
        values.swap(new_values);
    }

    const double alpha = 1.0 / (1.0 + std::pow(2.0, -d_));
    for (int p = 0; p < n_; ++p) {
        for (int r = 0; r <= d_; ++r) {
            size_t o = static_cast<size_t>(offset_[static_cast<size_t>(p) * (d_ + 1) + r]) + 1;
            double w = barycentric_[static_cast<size_t>(p) * (d_ + 1) + r];
            for (int k = 0; k < value_size; ++k)
                out[static_cast<size_t>(p) * value_size + k] += alpha * w * values[o * value_size + k];
        }
    }
}

std::vector<double> permutohedral_filter(const std::vector<double>& values, int value_size,
                                         const std::vector<float>& features, int num_points,
                                         int dim) {
    PermutohedralLattice lattice(features, num_points, dim);
    std::vector<double> filtered;
    lattice.filter(values, filtered, value_size);
    std::vector<double> norm;
    lattice.filter(std::vector<double>(num_points, 1.0), norm, 1);
    for (int p = 0; p < num_points; ++p) {
        double n = norm[p] > 1e-12 ? norm[p] : 1e-12;
        for (int k = 0; k < value_size; ++k) filtered[static_cast<size_t>(p) * value_size + k] /= n;
    }
    return filtered;
}

}  // namespace maskprop::crf
