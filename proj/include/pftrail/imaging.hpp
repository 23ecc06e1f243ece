#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pftrail/curvedef.hpp"
#include "pftrail/geometry.hpp"
#include "pftrail/hexraster.hpp"

namespace pftrail {

enum class Colormap { gray, rainbow, hypsometric };

Colormap parse_colormap(const std::string& name);

// u in [0, 1]. gray is the identity luminance ramp, rainbow sweeps hue
// from 0 to 300 degrees, hypsometric runs green -> brown -> white.
Vec3 colormap_rgb(Colormap scheme, double u);

struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // row-major rgb, top row first
};

// Per-pixel visit parameter, before shading. `window` is the world
// rectangle the pixel grid covers (sampled bounding box plus 2% margin).
struct ProgressionField {
    int width = 0;
    int height = 0;
    std::vector<double> t;
    std::vector<uint8_t> visited;
    BBox2 window;
};

// Samples the curve at max_gap = (pixel size)/(2R) and merges parameters
// per pixel under the policy. The y axis points up.
ProgressionField progression_field(const CurveDefinition& def, int width,
                                   int height,
                                   MergePolicy policy = MergePolicy::last);

RasterImage shade(const ProgressionField& field, Colormap scheme);

RasterImage progression_image(const CurveDefinition& def, int width, int height,
                              Colormap scheme = Colormap::rainbow,
                              MergePolicy policy = MergePolicy::last);

// Binary P6, byte-identical for identical images.
void write_ppm(const RasterImage& img, std::ostream& out);
RasterImage read_ppm(std::istream& in);

}  // namespace pftrail
