#pragma once

#include <string>

#include "pftrail/geometry.hpp"

namespace pftrail {

// Where a subcommand gets its definition: a .pfc file path, or one of the
// built-in names when `builtin_name` is non-empty.
struct CurveSource {
    std::string path;
    std::string builtin_name;
};

struct RenderConfig {
    CurveSource source;
    std::string output;

    int grid = 256;        // cells across the model width, >= 8
    double height = 0.0;   // model height; 0 resolves to half the width
    std::string merge = "max";
    double gap = 0.0;      // layer split threshold; 0 resolves per grid
    std::string colormap = "rainbow";
    std::string style = "normal";  // normal | eroded
    double erode_slope = 1.0;
    int erode_iterations = 0;  // 0 = run to the fixpoint

    bool parapets = false;
    double parapet_height = 0.0;     // 0 resolves to 1.5 * edge
    double parapet_thickness = 0.0;  // 0 resolves to 0.25 * edge
    double cliff_threshold = 0.0;    // 0 resolves to 20 * edge

    bool background = true;
    int oversample = 1;

    bool has_zoom = false;  // focus given as a curve parameter
    double zoom_t = 0.0;
    bool has_focus = false;  // focus given as a point
    Vec2 focus{};
    double zeta = 1.0;

    double cam_azimuth = 210.0;   // degrees, counterclockwise from +x
    double cam_elevation = 35.0;  // degrees above the horizon
    double cam_distance = 0.0;    // 0 resolves to 2.2 * bbox diagonal
    double fov = 50.0;

    int threads = 0;  // 0: PFTRAIL_THREADS, then hardware concurrency
    std::string dump_columns_path;  // optional layer-stack text dump
};

struct ImageConfig {
    CurveSource source;
    std::string output;
    int width = 256;
    int height = 256;
    std::string scheme = "rainbow";
    std::string policy = "last";
};

struct InvertConfig {
    CurveSource source;
    Vec2 point{};
    double eps = 1e-5;
};

// Exit statuses shared by all subcommands:
//   0 ok, 1 usage, 2 unreadable/unparseable input, 3 invalid definition,
//   4 output I/O failure.
int run_render(const RenderConfig& cfg);
int run_image(const ImageConfig& cfg);
int run_info(const CurveSource& source);
int run_invert(const InvertConfig& cfg);

}  // namespace pftrail
