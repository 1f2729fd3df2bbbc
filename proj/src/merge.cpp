#include "maskprop/merge.hpp"

#include <stdexcept>
#include <unordered_set>

namespace maskprop::merge {

ProbMap select_instance_map(const std::optional<ProbMap>& prop, const std::optional<ProbMap>& retr,
                            int width, int height) {
    if (prop) return *prop;
    if (retr) return *retr;
    return ProbMap(width, height, 0.f);
}

LabelMap argmax_merge(const std::vector<std::pair<int, ProbMap>>& maps, const MergeParams& params) {
    if (maps.empty()) throw std::invalid_argument("argmax_merge: no instance maps");
    const int w = maps.front().second.width;
    const int h = maps.front().second.height;
    std::unordered_set<int> seen;
    for (const auto& [id, m] : maps) {
        if (m.width != w || m.height != h)
            throw std::invalid_argument("argmax_merge: instance map dimension mismatch");
        if (!seen.insert(id).second) throw std::invalid_argument("argmax_merge: duplicate instance id");
    }

    LabelMap out(w, h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int best_id = 0;
            float best_p = -1.f;
            for (const auto& [id, m] : maps) {
                float p = m.at(x, y);
                if (p > best_p || (p == best_p && id < best_id)) {
                    best_p = p;
                    best_id = id;
                }
            }
            out.at(x, y) = best_p >= params.bg_threshold ? best_id : 0;
        }
    }
    return out;
}

}  // namespace maskprop::merge
