#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "pftrail/curvedef.hpp"
#include "pftrail/render.hpp"

namespace {

void add_source_options(CLI::App* sub, pftrail::CurveSource* src) {
    std::string names;
    for (const std::string& n : pftrail::builtin_names()) {
        if (!names.empty()) names += ", ";
        names += n;
    }
    auto* file = sub->add_option("input", src->path, "curve definition file (.pfc)");
    sub->add_option("--builtin", src->builtin_name,
                    "use a built-in definition: " + names)
        ->excludes(file);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pftrail: plane-filling curves and traversals as 3D terrain"};
    app.require_subcommand(1);

    pftrail::RenderConfig render;
    std::string zoom_arg, focus_arg;
    CLI::App* r = app.add_subcommand(
        "render", "build a terrain model (COLLADA) from a definition");
    add_source_options(r, &render.source);
    r->add_option("-o,--output", render.output, "output .dae path")->required();
    r->add_option("-g,--grid", render.grid, "cells across the model width")
        ->capture_default_str();
    r->add_option("--height", render.height,
                  "model height (default: half the width)");
    r->add_option("--merge", render.merge, "cell elevation policy: max, min, first, last")
        ->capture_default_str();
    r->add_option("--gap", render.gap,
                  "parameter gap that splits layers (default: ~10 cells of t)");
    r->add_option("--colormap", render.colormap,
                  "gray, rainbow or hypsometric")
        ->capture_default_str();
    r->add_option("--style", render.style, "normal or eroded")
        ->capture_default_str();
    r->add_option("--erode-slope", render.erode_slope,
                  "slope limit for the eroded style, per cell step")
        ->capture_default_str();
    r->add_option("--erode-iterations", render.erode_iterations,
                  "erosion passes, 0 runs to the fixpoint")
        ->capture_default_str();
    r->add_flag("--parapets", render.parapets, "rim boxes on high cliff edges");
    r->add_option("--parapet-height", render.parapet_height,
                  "parapet height (default: 1.5 edge lengths)");
    r->add_option("--parapet-thickness", render.parapet_thickness,
                  "parapet thickness (default: 0.25 edge lengths)");
    r->add_option("--cliff-threshold", render.cliff_threshold,
                  "drop that counts as a cliff (default: 20 edge lengths)");
    bool no_background = false;
    r->add_flag("--no-background", no_background,
                "omit the backdrop planes and cliff");
    r->add_option("--oversample", render.oversample,
                  "extra sampling density factor")
        ->capture_default_str();
    r->add_option("--zoom", zoom_arg,
                  "polynomial close-up \"t,zeta\" about the point at parameter t");
    r->add_option("--focus", focus_arg,
                  "polynomial close-up \"x,y,zeta\" about a point on the curve");
    r->add_option("--azimuth", render.cam_azimuth,
                  "camera azimuth in degrees, counterclockwise from +x")
        ->capture_default_str();
    r->add_option("--elevation", render.cam_elevation,
                  "camera elevation in degrees above the horizon")
        ->capture_default_str();
    r->add_option("--distance", render.cam_distance,
                  "camera distance (default: 2.2 bounding-box diagonals)");
    r->add_option("--fov", render.fov, "vertical field of view in degrees")
        ->capture_default_str();
    r->add_option("--threads", render.threads,
                  "worker threads (default: PFTRAIL_THREADS or all cores)");
    r->add_option("--dump-columns", render.dump_columns_path,
                  "also write the layer stacks as text to this path");

    pftrail::ImageConfig image;
    std::string size_arg = "256x256";
    CLI::App* i = app.add_subcommand(
        "image", "write a progression raster (binary PPM) of a definition");
    add_source_options(i, &image.source);
    i->add_option("-o,--output", image.output, "output .ppm path")->required();
    i->add_option("--size", size_arg, "image size WxH")->capture_default_str();
    i->add_option("--scheme", image.scheme, "gray, rainbow or hypsometric")
        ->capture_default_str();
    i->add_option("--policy", image.policy,
                  "per-pixel parameter choice: first, last, min, max")
        ->capture_default_str();

    pftrail::CurveSource info_source;
    CLI::App* n = app.add_subcommand(
        "info", "print generators, weights, radius and validation");
    add_source_options(n, &info_source);

    pftrail::InvertConfig invert;
    std::string point_arg;
    CLI::App* v = app.add_subcommand(
        "invert", "find the smallest parameter that maps near a point");
    add_source_options(v, &invert.source);
    v->add_option("--point", point_arg, "query point \"x,y\"")->required();
    v->add_option("--eps", invert.eps, "hit tolerance around the point")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (r->parsed()) {
        render.background = !no_background;
        if (!zoom_arg.empty()) {
            if (std::sscanf(zoom_arg.c_str(), "%lf,%lf", &render.zoom_t,
                            &render.zeta) != 2) {
                std::fprintf(stderr, "pftrail: --zoom expects \"t,zeta\"\n");
                return 1;
            }
            render.has_zoom = true;
        }
        if (!focus_arg.empty()) {
            if (std::sscanf(focus_arg.c_str(), "%lf,%lf,%lf", &render.focus.x,
                            &render.focus.y, &render.zeta) != 3) {
                std::fprintf(stderr, "pftrail: --focus expects \"x,y,zeta\"\n");
                return 1;
            }
            render.has_focus = true;
        }
        return pftrail::run_render(render);
    }
    if (i->parsed()) {
        if (std::sscanf(size_arg.c_str(), "%dx%d", &image.width,
                        &image.height) != 2) {
            std::fprintf(stderr, "pftrail: --size expects \"WxH\"\n");
            return 1;
        }
        return pftrail::run_image(image);
    }
    if (n->parsed()) return pftrail::run_info(info_source);
    if (v->parsed()) {
        if (std::sscanf(point_arg.c_str(), "%lf,%lf", &invert.point.x,
                        &invert.point.y) != 2) {
            std::fprintf(stderr, "pftrail: --point expects \"x,y\"\n");
            return 1;
        }
        return pftrail::run_invert(invert);
    }
    return 1;
}
