#pragma once

#include <vector>

namespace maskprop::crf {

// Permutohedral lattice for fast approximate Gaussian filtering in feature
// space (splat-blur-slice). Features are expected pre-scaled so the target
// kernel is exp(-|f_i - f_j|^2 / 2); feature dimension is limited to 8.
class PermutohedralLattice {
public:
    // features: row-major num_points x dim.
    PermutohedralLattice(const std::vector<float>& features, int num_points, int dim);

    int num_points() const { return n_; }
    int num_vertices() const { return m_; }

    // Unnormalized filtering: out_i ~= sum_j k(f_i, f_j) in_j, self included.
    // in/out are row-major num_points x value_size; sequential and deterministic.
    void filter(const std::vector<double>& in, std::vector<double>& out, int value_size) const;

    // Estimate of the lattice's own diagonal k(f_i, f_i), derived from the
    // splat barycentrics and the blur structure; used to subtract the
    // self-message in mean-field updates.
    const std::vector<double>& self_weights() const { return self_weight_; }

private:
    int n_ = 0;  // points
    int d_ = 0;  // feature dimension
    int m_ = 0;  // lattice vertices
    std::vector<int> offset_;        // (d_+1) vertex ids per point
    std::vector<float> barycentric_; // (d_+1) weights per point
    std::vector<int> blur_n1_;       // (d_+1)*m_ neighbour ids, -1 if absent
    std::vector<int> blur_n2_;
    std::vector<double> self_weight_;
};

// Normalized Gaussian filtering: out_i = sum_j k_ij v_j / sum_j k_ij.
// values: row-major num_points x value_size; features: num_points x dim.
std::vector<double> permutohedral_filter(const std::vector<double>& values, int value_size,
                                         const std::vector<float>& features, int num_points,
                                         int dim);

}  // namespace maskprop::crf
