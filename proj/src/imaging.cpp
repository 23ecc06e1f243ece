#include "pftrail/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "pftrail/traversal.hpp"

namespace pftrail {

Colormap parse_colormap(const std::string& name) {
    if (name == "gray" || name == "grey") return Colormap::gray;
    if (name == "rainbow") return Colormap::rainbow;
    if (name == "hypsometric") return Colormap::hypsometric;
    throw std::invalid_argument("unknown colormap: " + name);
}

namespace {

Vec3 lerp(const Vec3& a, const Vec3& b, double f) {
    return {a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f, a.z + (b.z - a.z) * f};
}

}  // namespace

Vec3 colormap_rgb(Colormap scheme, double u) {
    u = std::clamp(u, 0.0, 1.0);
    switch (scheme) {
        case Colormap::gray:
            return {u, u, u};
        case Colormap::rainbow: {
            // Hue 300*u degrees at full saturation and value.
            double h = 5.0 * u;
            int i = std::min(int(h), 5);
            double f = h - i;
            switch (i) {
                case 0: return {1.0, f, 0.0};
                case 1: return {1.0 - f, 1.0, 0.0};
                case 2: return {0.0, 1.0, f};
                case 3: return {0.0, 1.0 - f, 1.0};
                case 4: return {f, 0.0, 1.0};
                default: return {1.0, 0.0, 1.0};
            }
        }
        case Colormap::hypsometric: {
            const Vec3 green{0.20, 0.50, 0.20};
            const Vec3 brown{0.55, 0.40, 0.25};
            const Vec3 white{1.0, 1.0, 1.0};
            return u < 0.5 ? lerp(green, brown, 2.0 * u)
                           : lerp(brown, white, 2.0 * (u - 0.5));
        }
    }
    return {0.0, 0.0, 0.0};
}

ProgressionField progression_field(const CurveDefinition& def, int width,
                                   int height, MergePolicy policy) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be at least 1x1");

    Traversal trav(def);
    double radius = trav.expansion_radius().radius;

    // Coarse pass fixes the pixel scale; it only underestimates the true
    // extent, which makes the final gap (and so the density) conservative.
    BBox2 coarse;
    for (const SamplePoint& s : trav.sample({.max_gap = 0.02}))
        coarse.expand(s.position);
    double scale = std::max(coarse.width() / width, coarse.height() / height);
    auto samples = trav.sample({.max_gap = scale / (2.0 * radius)});

    BBox2 bbox;
    for (const SamplePoint& s : samples) bbox.expand(s.position);
    ProgressionField field;
    field.width = width;
    field.height = height;
    field.t.assign(size_t(width) * height, 0.0);
    field.visited.assign(size_t(width) * height, 0);
    field.window = bbox;
    field.window.lo.x -= 0.02 * bbox.width();
    field.window.hi.x += 0.02 * bbox.width();
    field.window.lo.y -= 0.02 * bbox.height();
    field.window.hi.y += 0.02 * bbox.height();

    double wx = field.window.width(), wy = field.window.height();
    for (const SamplePoint& s : samples) {
        // Degenerate extents (a straight-line generator) collapse to row 0.
        int cx = wx > 0.0
                     ? std::clamp(int((s.position.x - field.window.lo.x) / wx * width),
                                  0, width - 1)
                     : 0;
        int cy = wy > 0.0
                     ? std::clamp(int((s.position.y - field.window.lo.y) / wy * height),
                                  0, height - 1)
                     : 0;
        size_t idx = size_t(height - 1 - cy) * width + cx;  // y points up
        if (!field.visited[idx]) {
            field.visited[idx] = 1;
            field.t[idx] = s.t;
            continue;
        }
        switch (policy) {
            case MergePolicy::first: break;
            case MergePolicy::last: field.t[idx] = s.t; break;
            case MergePolicy::min: field.t[idx] = std::min(field.t[idx], s.t); break;
            case MergePolicy::max: field.t[idx] = std::max(field.t[idx], s.t); break;
        }
    }
    return field;
}

RasterImage shade(const ProgressionField& field, Colormap scheme) {
    RasterImage img;
    img.width = field.width;
    img.height = field.height;
    img.pixels.assign(size_t(field.width) * field.height * 3, 0);
    for (size_t i = 0; i < field.visited.size(); ++i) {
        if (!field.visited[i]) continue;
        Vec3 c = colormap_rgb(scheme, field.t[i]);
        img.pixels[3 * i + 0] = uint8_t(std::lround(255.0 * c.x));
        img.pixels[3 * i + 1] = uint8_t(std::lround(255.0 * c.y));
        img.pixels[3 * i + 2] = uint8_t(std::lround(255.0 * c.z));
    }
    return img;
}

RasterImage progression_image(const CurveDefinition& def, int width, int height,
                              Colormap scheme, MergePolicy policy) {
    return shade(progression_field(def, width, height, policy), scheme);
}

void write_ppm(const RasterImage& img, std::ostream& out) {
    if (img.width < 1 || img.height < 1 ||
        img.pixels.size() != size_t(img.width) * img.height * 3)
        throw std::invalid_argument("image buffer does not match its dimensions");
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              std::streamsize(img.pixels.size()));
    if (!out) throw std::runtime_error("failed to write image output");
}

RasterImage read_ppm(std::istream& in) {
    std::string magic;
    in >> magic;
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || magic != "P6" || w < 1 || h < 1 || maxval != 255)
        throw std::runtime_error("not a P6 image with 8-bit channels");
    in.get();  // single whitespace after the header
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(size_t(w) * h * 3);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
    if (in.gcount() != std::streamsize(img.pixels.size()))
        throw std::runtime_error("truncated image payload");
    return img;
}

}  // namespace pftrail
