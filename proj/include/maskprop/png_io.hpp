#pragma once

#include <string>

#include "maskprop/core.hpp"

namespace maskprop::io {

// Color frame from PNG or JPEG (decided by file magic), normalized to [0,1].
Image read_image(const std::string& path);

void write_image_png(const Image& img, const std::string& path);

// Indexed-palette PNG where the palette index is the instance id (0 =
// background). Reading rejects non-palette PNGs; ids round-trip exactly.
LabelMap read_indexed_png(const std::string& path);
void write_indexed_png(const LabelMap& labels, const std::string& path);

// Instance-colored 50% alpha blend over the frame.
Image overlay_labels(const Image& img, const LabelMap& labels);

// Palette color used for an instance id (VOC-style colormap).
void id_color(int id, unsigned char rgb[3]);

}  // namespace maskprop::io
