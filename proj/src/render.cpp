#include "pftrail/render.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pftrail/curvedef.hpp"
#include "pftrail/hexraster.hpp"
#include "pftrail/imaging.hpp"
#include "pftrail/meshgen.hpp"
#include "pftrail/traversal.hpp"

namespace pftrail {

namespace {

constexpr double kPi = 3.14159265358979323846;

int usage_error(const std::string& msg) {
    std::fprintf(stderr, "pftrail: %s\n", msg.c_str());
    return 1;
}

// 0 on success, 1/2 otherwise (errors already printed).
int load_definition(const CurveSource& src, CurveDefinition* def) {
    if (!src.builtin_name.empty()) {
        try {
            *def = builtin(src.builtin_name);
            return 0;
        } catch (const std::invalid_argument& e) {
            std::fprintf(stderr, "pftrail: %s\n", e.what());
            return 2;
        }
    }
    if (src.path.empty())
        return usage_error("no input: give a definition file or --builtin");

    std::ifstream in(src.path, std::ios::binary);
    if (!in) {
        std::fprintf(stderr, "pftrail: cannot read %s\n", src.path.c_str());
        return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad()) {
        std::fprintf(stderr, "pftrail: cannot read %s\n", src.path.c_str());
        return 2;
    }
    try {
        *def = parse_definition(text.str());
    } catch (const ParseError& e) {
        std::fprintf(stderr, "%s: %s\n", src.path.c_str(), e.what());
        return 2;
    }
    return 0;
}

// Validation gate shared by the rendering subcommands. Warnings are
// reported but non-fatal.
int check_valid(const CurveDefinition& def) {
    ValidationReport rep = validate(def);
    for (const std::string& w : rep.warnings)
        std::fprintf(stderr, "pftrail: warning: %s\n", w.c_str());
    if (!rep.ok()) {
        for (const std::string& e : rep.errors)
            std::fprintf(stderr, "pftrail: error: %s\n", e.c_str());
        return 3;
    }
    return 0;
}

int resolve_threads(int flag) {
    if (flag > 0) return std::min(flag, 256);
    if (const char* env = std::getenv("PFTRAIL_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return std::min(v, 256);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(std::min(hc, 64u)) : 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

const char* basis_name(Basis b) {
    return b == Basis::square ? "square" : "triangular";
}

}  // namespace

int run_render(const RenderConfig& cfg) {
    if (cfg.output.empty()) return usage_error("an output path is required (-o)");
    if (cfg.grid < 8) return usage_error("grid resolution must be at least 8");
    if (cfg.oversample < 1) return usage_error("oversample must be at least 1");
    if (cfg.height < 0.0) return usage_error("height must be positive");
    if (cfg.gap < 0.0) return usage_error("gap threshold must be positive");
    if (!(cfg.erode_slope > 0.0))
        return usage_error("erode slope must be positive");
    if (cfg.erode_iterations < 0)
        return usage_error("erode iterations must be non-negative");
    if (cfg.parapet_height < 0.0 || cfg.parapet_thickness < 0.0)
        return usage_error("parapet sizes must be positive");
    if (cfg.cliff_threshold < 0.0)
        return usage_error("cliff threshold must be positive");
    if (!(cfg.fov > 10.0 && cfg.fov < 120.0))
        return usage_error("field of view must lie in (10, 120) degrees");
    if (cfg.has_zoom && cfg.has_focus)
        return usage_error("--zoom and --focus are mutually exclusive");
    if ((cfg.has_zoom || cfg.has_focus) && !(cfg.zeta >= 1.0))
        return usage_error("zeta must be at least 1");
    if (cfg.has_zoom && !(cfg.zoom_t >= 0.0 && cfg.zoom_t <= 1.0))
        return usage_error("zoom parameter must lie in [0, 1]");
    if (cfg.threads < 0) return usage_error("thread count must be positive");

    MergePolicy policy;
    Colormap scheme;
    try {
        policy = parse_merge_policy(cfg.merge);
        scheme = parse_colormap(cfg.colormap);
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    }
    bool eroded;
    if (cfg.style == "normal")
        eroded = false;
    else if (cfg.style == "eroded")
        eroded = true;
    else
        return usage_error("style must be normal or eroded");

    CurveDefinition def;
    if (int rc = load_definition(cfg.source, &def)) return rc;
    if (int rc = check_valid(def)) return rc;

    std::optional<Traversal> trav;
    try {
        trav.emplace(def);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "pftrail: error: %s\n", e.what());
        return 3;
    }

    auto t_start = std::chrono::steady_clock::now();
    ExpansionBound eb = trav->expansion_radius();
    const double R = eb.radius;

    std::optional<CloseupMap> cm;
    if (cfg.has_zoom || cfg.has_focus) {
        Vec2 fp;
        double tf;
        if (cfg.has_zoom) {
            tf = cfg.zoom_t;
            fp = trav->point_at(tf);
        } else {
            fp = cfg.focus;
            // the raw extent sets the hit tolerance for locating the focus
            BBox2 raw;
            for (const SamplePoint& s : trav->sample({.max_gap = 0.05}))
                raw.expand(s.position);
            double diag = std::hypot(raw.width(), raw.height());
            auto t = trav->inverse_at(fp, 1e-6 * diag);
            if (!t) t = trav->inverse_at(fp, 1e-3 * diag);
            if (!t) {
                std::fprintf(stderr,
                             "pftrail: error: focus point does not lie on the "
                             "traversal\n");
                return 3;
            }
            tf = *t;
        }
        cm = CloseupMap{fp, tf, cfg.zeta};
    }

    // Close-up output keeps t monotone but signed around the focus; shift
    // and rescale it so elevations fill [0, 1] again.
    double t_shift = 0.0, t_scale = 1.0;
    if (cm) {
        double eta = cm->t_exponent();
        double below = std::pow(cm->t_focus, eta);
        double above = std::pow(1.0 - cm->t_focus, eta);
        t_shift = below;
        t_scale = 1.0 / (below + above);
    }
    auto transform = [&](SamplePoint s) {
        if (cm) {
            s.position = cm->map_xy(s.position);
            s.t = (cm->map_t(s.t) + t_shift) * t_scale;
        }
        return s;
    };

    SampleOptions base{.max_gap = 0.05, .oversample = 1, .metric = {}};
    if (cm)
        base.metric = [&cm](const Vec2& p) { return cm->map_xy(p); };

    // Output-space extent: a coarse pass, then one refined to ~1% of it.
    BBox2 bbox;
    for (const SamplePoint& s : trav->sample(base))
        bbox.expand(transform(s).position);
    {
        SampleOptions fine = base;
        fine.max_gap = std::max(bbox.width(), bbox.height()) / 100.0;
        if (fine.max_gap > 0.0) {
            BBox2 refined;
            for (const SamplePoint& s : trav->sample(fine))
                refined.expand(transform(s).position);
            bbox = refined;
        }
    }
    double width = bbox.width() > 0.0 ? bbox.width() : bbox.height();
    if (!(width > 0.0)) {
        std::fprintf(stderr, "pftrail: error: traversal has no extent\n");
        return 3;
    }

    const double e = width / (1.5 * cfg.grid);
    const double H = cfg.height > 0.0 ? cfg.height : 0.5 * width;

    // Default layer split. A continuous curve that leaves a cell and comes
    // back fills it solid, so nothing should split; that needs a threshold
    // no in-range gap can exceed. Discontinuous traversals get one scaled
    // to the parameter share of roughly ten cells, so flyovers and
    // far-apart revisits become bridge and tunnel slabs.
    bool has_jumps = false;
    for (const Generator& g : def.generators)
        for (const GeneratorItem& it : g.items)
            if (it.kind == ItemKind::jump) has_jumps = true;
    const double cell_area = 1.5 * std::sqrt(3.0) * e * e;
    const double box_area = bbox.width() * bbox.height();
    double tau = 1.0;
    if (cfg.gap > 0.0)
        tau = cfg.gap;
    else if (has_jumps)
        tau = 10.0 * cell_area / std::max(box_area, cell_area);

    HexGrid grid{e, bbox.lo};
    RasterOptions ropt{.gap_threshold = tau, .policy = policy, .z_scale = H};
    SampleOptions sopt = base;
    sopt.max_gap = e / (2.0 * R);
    sopt.oversample = cfg.oversample;

    // Fixed chunk count keeps the merge identical for every worker count.
    const int chunks = 64;
    int threads = std::min(resolve_threads(cfg.threads), chunks);

    auto t_sample = std::chrono::steady_clock::now();
    std::vector<ColumnBuilder> parts;
    parts.reserve(chunks);
    for (int i = 0; i < chunks; ++i) parts.emplace_back(grid, ropt);
    {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= chunks) break;
                for (const SamplePoint& s : trav->sample_chunk(sopt, i, chunks))
                    parts[i].add(transform(s));
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads - 1);
        for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
        for (std::thread& th : pool) th.join();
    }
    ColumnBuilder all = std::move(parts[0]);
    for (int i = 1; i < chunks; ++i) all.merge(std::move(parts[i]));
    parts.clear();
    const size_t sample_count = all.sample_count();
    std::vector<CellColumn> columns = std::move(all).finalize();
    if (columns.empty()) {
        std::fprintf(stderr, "pftrail: error: traversal produced no samples\n");
        return 3;
    }
    double sample_secs = seconds_since(t_sample);

    auto t_raster = std::chrono::steady_clock::now();
    const double cliff_threshold =
        cfg.cliff_threshold > 0.0 ? cfg.cliff_threshold : 20.0 * e;
    mark_cliffs(columns, cliff_threshold);
    if (eroded) erode(columns, e, cfg.erode_slope, cfg.erode_iterations);
    double raster_secs = seconds_since(t_raster);

    if (!cfg.dump_columns_path.empty()) {
        std::ofstream dump(cfg.dump_columns_path, std::ios::binary);
        std::string text = dump_columns(columns);
        dump.write(text.data(), std::streamsize(text.size()));
        dump.flush();
        if (!dump) {
            std::fprintf(stderr, "pftrail: cannot write %s\n",
                         cfg.dump_columns_path.c_str());
            return 4;
        }
    }

    size_t layer_count = 0;
    for (const CellColumn& c : columns) layer_count += c.layers.size();

    const bool top_from_hi =
        policy == MergePolicy::max || policy == MergePolicy::last;
    LayerColor color;
    if (scheme == Colormap::hypsometric) {
        color = [H](const Layer& l) {
            double u = std::min(std::max(l.top / H, 0.0), 1.0);
            return colormap_rgb(Colormap::hypsometric, u);
        };
    } else {
        color = [scheme, top_from_hi](const Layer& l) {
            return colormap_rgb(scheme, top_from_hi ? l.t_hi : l.t_lo);
        };
    }

    SceneConfig scene;
    scene.fov_deg = cfg.fov;
    scene.background = cfg.background;
    scene.parapets = cfg.parapets;
    scene.parapet_height = cfg.parapet_height;
    scene.parapet_thickness = cfg.parapet_thickness;

    auto t_mesh = std::chrono::steady_clock::now();
    Mesh terrain = build_terrain(columns, grid, scene, color);

    BBox2 model;
    for (const Vec3& v : terrain.vertices) model.expand({v.x, v.y});
    const double bbw = model.width(), bbh = model.height();

    Vec3 look_at{model.center().x, model.center().y, 0.25 * H};
    double dist = cfg.cam_distance > 0.0
                      ? cfg.cam_distance
                      : 2.2 * std::sqrt(bbw * bbw + bbh * bbh + H * H);
    double az = cfg.cam_azimuth * kPi / 180.0;
    double el = cfg.cam_elevation * kPi / 180.0;
    scene.look_at = look_at;
    scene.camera = look_at + Vec3{dist * std::cos(el) * std::cos(az),
                                  dist * std::cos(el) * std::sin(az),
                                  dist * std::sin(el)};
    scene.bg_front_z = 0.0;
    scene.bg_back_z = 0.35 * H;
    scene.bg_cliff_y = model.hi.y + 0.2 * bbh;

    Mesh background = build_background(scene, model);
    double mesh_secs = seconds_since(t_mesh);
    const size_t vertex_count = terrain.vertices.size() + background.vertices.size();
    const size_t triangle_count =
        terrain.triangles.size() + background.triangles.size();

    auto t_write = std::chrono::steady_clock::now();
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "pftrail: cannot write %s\n", cfg.output.c_str());
        return 4;
    }
    try {
        std::vector<Mesh> meshes;
        meshes.reserve(2);
        meshes.push_back(std::move(terrain));
        meshes.push_back(std::move(background));
        write_collada(meshes, scene, out);
        out.flush();
        if (!out) throw std::runtime_error("failed to write model output");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pftrail: %s\n", e.what());
        return 4;
    }
    double write_secs = seconds_since(t_write);

    std::fprintf(stderr, "expansion radius %.6f (depth %d)\n", R, eb.depth_used);
    std::fprintf(stderr, "%zu samples -> %zu cells, %zu layers\n", sample_count,
                 columns.size(), layer_count);
    std::fprintf(stderr, "%zu vertices, %zu triangles\n", vertex_count,
                 triangle_count);
    std::fprintf(stderr,
                 "timings: sample %.2fs, raster %.2fs, mesh %.2fs, write %.2fs, "
                 "total %.2fs\n",
                 sample_secs, raster_secs, mesh_secs, write_secs,
                 seconds_since(t_start));
    return 0;
}

int run_image(const ImageConfig& cfg) {
    if (cfg.output.empty()) return usage_error("an output path is required (-o)");
    if (cfg.width < 1 || cfg.height < 1)
        return usage_error("image size must be at least 1x1");

    Colormap scheme;
    MergePolicy policy;
    try {
        scheme = parse_colormap(cfg.scheme);
        policy = parse_merge_policy(cfg.policy);
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    }

    CurveDefinition def;
    if (int rc = load_definition(cfg.source, &def)) return rc;
    if (int rc = check_valid(def)) return rc;

    RasterImage img;
    try {
        img = progression_image(def, cfg.width, cfg.height, scheme, policy);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "pftrail: error: %s\n", e.what());
        return 3;
    }

    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "pftrail: cannot write %s\n", cfg.output.c_str());
        return 4;
    }
    try {
        write_ppm(img, out);
        out.flush();
        if (!out) throw std::runtime_error("failed to write image output");
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pftrail: %s\n", e.what());
        return 4;
    }
    return 0;
}

int run_info(const CurveSource& source) {
    CurveDefinition def;
    if (int rc = load_definition(source, &def)) return rc;

    std::printf("%s\n", def.name.empty() ? "(unnamed)" : def.name.c_str());
    std::printf("start: %s\n", def.start.c_str());
    if (def.restriction)
        std::printf("restriction: [%.17g, %.17g]\n", def.restriction->first,
                    def.restriction->second);

    ValidationReport rep = validate(def);

    for (const Generator& g : def.generators) {
        size_t segments = 0, jumps = 0;
        for (const GeneratorItem& it : g.items)
            (it.kind == ItemKind::segment ? segments : jumps) += 1;
        if (jumps)
            std::printf("generator %s (%s basis): %zu segments, %zu jumps\n",
                        g.id.c_str(), basis_name(g.basis), segments, jumps);
        else
            std::printf("generator %s (%s basis): %zu segments\n", g.id.c_str(),
                        basis_name(g.basis), segments);
        if (!rep.ok()) continue;  // transforms may be degenerate

        std::vector<SegmentTransform> parts;
        try {
            parts = segment_transforms(g, def);
        } catch (const std::invalid_argument&) {
            continue;
        }
        double weight_sum = 0.0;
        for (size_t i = 0; i < parts.size(); ++i) {
            const SegmentTransform& s = parts[i];
            if (s.is_jump) {
                std::printf("  item %zu: jump\n", i);
                continue;
            }
            weight_sum += s.weight;
            std::printf("  item %zu: -> %s, weight %.6g, contraction %.6g%s%s\n",
                        i, def.generators[size_t(s.target)].id.c_str(), s.weight,
                        s.contraction, s.reversed ? ", reversed" : "",
                        s.map.mirrored ? ", mirrored" : "");
        }
        std::printf("  weights sum to %.6g\n", weight_sum);
    }

    for (const std::string& w : rep.warnings)
        std::printf("warning: %s\n", w.c_str());
    if (!rep.ok()) {
        for (const std::string& e : rep.errors)
            std::printf("error: %s\n", e.c_str());
        return 3;
    }

    try {
        Traversal trav(def);
        ExpansionBound eb = trav.expansion_radius();
        std::printf("expansion radius %.6f (depth %d)\n", eb.radius,
                    eb.depth_used);
    } catch (const std::invalid_argument& e) {
        std::printf("error: %s\n", e.what());
        return 3;
    }
    return 0;
}

int run_invert(const InvertConfig& cfg) {
    if (!(cfg.eps > 0.0)) return usage_error("eps must be positive");

    CurveDefinition def;
    if (int rc = load_definition(cfg.source, &def)) return rc;
    if (int rc = check_valid(def)) return rc;

    std::optional<Traversal> trav;
    try {
        trav.emplace(def);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "pftrail: error: %s\n", e.what());
        return 3;
    }

    auto t = trav->inverse_at(cfg.point, cfg.eps);
    if (t)
        std::printf("%.17g\n", *t);
    else
        std::printf("none\n");
    return 0;
}

}  // namespace pftrail
