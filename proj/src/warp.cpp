#include "maskprop/warp.hpp"

#include <cmath>
#include <stdexcept>

namespace maskprop {

float bilinear_sample(const ProbMap& map, float x, float y) {
    if (x < 0.f || y < 0.f || x > static_cast<float>(map.width - 1) ||
        y > static_cast<float>(map.height - 1)) {
        return 0.f;
    }
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    if (x0 > map.width - 2) x0 = map.width - 2;   // x == W-1 lands on the last cell
    if (y0 > map.height - 2) y0 = map.height - 2;
    if (x0 < 0) x0 = 0;  // single-column/-row maps
    if (y0 < 0) y0 = 0;
    float fx = x - static_cast<float>(x0);
    float fy = y - static_cast<float>(y0);
    int x1 = map.width == 1 ? x0 : x0 + 1;
    int y1 = map.height == 1 ? y0 : y0 + 1;

    float top = map.at(x0, y0) * (1.f - fx) + map.at(x1, y0) * fx;
    float bot = map.at(x0, y1) * (1.f - fx) + map.at(x1, y1) * fx;
    return top * (1.f - fy) + bot * fy;
}

ProbMap warp_prob(const ProbMap& prev, const FlowField& flow) {
    if (prev.width != flow.width || prev.height != flow.height)
        throw std::invalid_argument("warp_prob: map and flow dimensions differ");
    ProbMap out(prev.width, prev.height);
    for (int y = 0; y < prev.height; ++y) {
        for (int x = 0; x < prev.width; ++x) {
            out.at(x, y) = bilinear_sample(prev, static_cast<float>(x) + flow.dx(x, y),
                                           static_cast<float>(y) + flow.dy(x, y));
        }
    }
    return out;
}

}  // namespace maskprop
