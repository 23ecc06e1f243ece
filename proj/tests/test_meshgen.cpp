#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "pftrail/curvedef.hpp"
#include "pftrail/hexraster.hpp"
#include "pftrail/meshgen.hpp"
#include "pftrail/traversal.hpp"

using namespace pftrail;

namespace {

Vec3 gray_of_t(const Layer& l) { return {l.t_hi, l.t_hi, l.t_hi}; }

CellColumn ground_col(int q, int r, double top, double t = -1.0) {
    if (t < 0.0) t = top;
    return CellColumn{{q, r}, {Layer{.t_lo = t, .t_hi = t, .top = top}}};
}

using PosKey = std::array<long long, 3>;

PosKey pos_key(const Vec3& v) {
    return {llround(v.x * 1e9), llround(v.y * 1e9), llround(v.z * 1e9)};
}

// Edges identified by welded endpoint positions, ignoring colour, so
// neighbouring cells with different layer colours still pair up.
std::map<std::pair<PosKey, PosKey>, int> edge_counts(const Mesh& m) {
    std::map<std::pair<PosKey, PosKey>, int> counts;
    for (const auto& tri : m.triangles) {
        for (int k = 0; k < 3; ++k) {
            PosKey a = pos_key(m.vertices[tri[k]]);
            PosKey b = pos_key(m.vertices[tri[(k + 1) % 3]]);
            if (b < a) std::swap(a, b);
            ++counts[{a, b}];
        }
    }
    return counts;
}

bool mesh_is_valid(const Mesh& m) {
    if (m.colors.size() != m.vertices.size()) return false;
    for (const Vec3& v : m.vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            return false;
    for (const auto& t : m.triangles)
        for (uint32_t i : t)
            if (i >= m.vertices.size()) return false;
    for (size_t i = 0; i < m.triangles.size(); ++i) {
        Vec3 a = m.vertices[m.triangles[i][0]];
        Vec3 raw = (m.vertices[m.triangles[i][1]] - a)
                       .cross(m.vertices[m.triangles[i][2]] - a);
        if (!(raw.norm() > 0.0)) return false;  // zero-area face
        if (std::abs(face_normal(m, i).norm() - 1.0) > 1e-6) return false;
    }
    return true;
}

bool closed_surface(const Mesh& m) {
    for (const auto& [edge, count] : edge_counts(m))
        if (count != 2) return false;
    return true;
}

}  // namespace

TEST_CASE("a single column builds a closed hexagonal prism") {
    std::vector<CellColumn> cols = {ground_col(0, 0, 2.0)};
    HexGrid grid{1.0, {0.0, 0.0}};
    Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);

    CHECK(m.triangles.size() == 24);  // 6 cap + 6 base + 6 walls * 2
    CHECK(m.vertices.size() == 14);   // 12 rim corners + 2 fan centers
    CHECK(mesh_is_valid(m));
    CHECK(closed_surface(m));

    double zmin = 1e300, zmax = -1e300;
    for (const Vec3& v : m.vertices) {
        zmin = std::min(zmin, v.z);
        zmax = std::max(zmax, v.z);
    }
    CHECK(zmin == 0.0);
    CHECK(zmax == 2.0);

    CHECK_THROWS_AS(build_terrain({}, grid, SceneConfig{}, gray_of_t),
                    std::invalid_argument);
}

TEST_CASE("walls appear only toward strictly lower ground") {
    HexGrid grid{1.0, {0.0, 0.0}};

    SUBCASE("equal neighbours leave the shared edge open") {
        std::vector<CellColumn> cols = {ground_col(0, 0, 1.0), ground_col(1, 0, 1.0)};
        Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);
        // 12 cap + 12 base + 10 boundary walls * 2; nothing between the two.
        CHECK(m.triangles.size() == 44);
        CHECK(mesh_is_valid(m));
        CHECK(closed_surface(m));
    }

    SUBCASE("a step emits one wall from the higher side") {
        std::vector<CellColumn> cols = {ground_col(0, 0, 2.0), ground_col(1, 0, 1.0)};
        Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);
        // 24 caps/bases + 5 outer walls each * 2 + the step wall * 2.
        CHECK(m.triangles.size() == 46);
        CHECK(mesh_is_valid(m));

        int dangling = 0;
        bool over_shared = false, dangling_vertical = true;
        for (const auto& [edge, count] : edge_counts(m)) {
            over_shared = over_shared || count > 2;
            if (count == 1) {
                ++dangling;
                // T-junctions at terrace corners leave unpaired vertical
                // edge segments; nothing else may dangle.
                dangling_vertical = dangling_vertical &&
                                    edge.first[0] == edge.second[0] &&
                                    edge.first[1] == edge.second[1];
            }
        }
        CHECK(!over_shared);
        CHECK(dangling_vertical);
        CHECK(dangling == 6);  // three stacked segments at each shared corner
    }
}

TEST_CASE("bridge slabs are closed floating boxes") {
    HexGrid grid{1.0, {0.0, 0.0}};
    std::vector<CellColumn> cols = {ground_col(0, 0, 0.5)};
    cols[0].layers.push_back(Layer{
        .t_lo = 0.8, .t_hi = 0.9, .top = 5.0, .kind = LayerKind::bridge});

    Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);
    CHECK(m.triangles.size() == 48);  // prism and slab, 24 each
    CHECK(mesh_is_valid(m));
    CHECK(closed_surface(m));

    std::set<long long> zs;
    for (const Vec3& v : m.vertices) zs.insert(llround(v.z * 1e9));
    CHECK(zs.count(llround(5.0 * 1e9)) == 1);
    CHECK(zs.count(llround(2.0 * 1e9)) == 1);  // default slab thickness 3 * edge

    SceneConfig thin;
    thin.bridge_thickness = 1.0;
    Mesh m2 = build_terrain(cols, grid, thin, gray_of_t);
    std::set<long long> zs2;
    for (const Vec3& v : m2.vertices) zs2.insert(llround(v.z * 1e9));
    CHECK(zs2.count(llround(4.0 * 1e9)) == 1);
}

TEST_CASE("parapets rise on flagged cliff edges") {
    HexGrid grid{1.0, {0.0, 0.0}};
    std::vector<CellColumn> cols = {ground_col(0, 0, 1.0)};
    cols[0].layers[0].cliff_flags[0] = true;

    SceneConfig off;
    Mesh plain = build_terrain(cols, grid, off, gray_of_t);
    CHECK(plain.triangles.size() == 24);  // flags alone change nothing

    SceneConfig on;
    on.parapets = true;
    Mesh m = build_terrain(cols, grid, on, gray_of_t);
    CHECK(m.triangles.size() == 36);  // prism + 12 for one rim box
    CHECK(mesh_is_valid(m));

    double zmax = 0.0;
    for (const Vec3& v : m.vertices) zmax = std::max(zmax, v.z);
    CHECK(zmax == doctest::Approx(2.5).epsilon(1e-12));  // top + 1.5 * edge
}

TEST_CASE("terraced terrain stays edge manifold with exact cap footprints") {
    Traversal trav(builtin("hilbert"));
    double e = 1.0 / 24.0;
    auto samples = trav.sample({.max_gap = e / (2.0 * trav.expansion_radius().radius)});
    HexGrid grid{e, {0.0, 0.0}};
    // A huge gap threshold keeps one ground layer per cell: no bridges.
    auto cols = rasterize(samples, grid, {.gap_threshold = 2.0, .z_scale = 0.4});

    Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);
    CHECK(mesh_is_valid(m));

    bool over_shared = false, dangling_vertical = true;
    for (const auto& [edge, count] : edge_counts(m)) {
        over_shared = over_shared || count > 2;
        if (count == 1)
            dangling_vertical = dangling_vertical &&
                                edge.first[0] == edge.second[0] &&
                                edge.first[1] == edge.second[1];
    }
    CHECK(!over_shared);
    CHECK(dangling_vertical);

    std::set<PosKey> verts;
    for (const Vec3& v : m.vertices) verts.insert(pos_key(v));
    bool caps = true, bases = true;
    for (const CellColumn& col : cols) {
        Vec2 c = grid.center(col.cell);
        caps = caps && verts.count({llround(c.x * 1e9), llround(c.y * 1e9),
                                    llround(col.layers[0].top * 1e9)}) > 0;
        bases = bases && verts.count({llround(c.x * 1e9), llround(c.y * 1e9), 0}) > 0;
    }
    CHECK(caps);
    CHECK(bases);
}

TEST_CASE("background builds three rectangles split by the cliff line") {
    SceneConfig cfg;
    cfg.bg_front_z = 0.0;
    cfg.bg_back_z = 0.3;
    cfg.bg_cliff_y = 1.2;
    BBox2 bbox;
    bbox.expand({0.0, 0.0});
    bbox.expand({1.0, 1.0});

    Mesh m = build_background(cfg, bbox);
    CHECK(m.triangles.size() == 6);
    CHECK(mesh_is_valid(m));

    BBox2 plan;
    double zmin = 1e300, zmax = -1e300;
    for (const Vec3& v : m.vertices) {
        plan.expand({v.x, v.y});
        zmin = std::min(zmin, v.z);
        zmax = std::max(zmax, v.z);
    }
    CHECK(plan.lo.x == doctest::Approx(-1.0));  // footprint tripled
    CHECK(plan.hi.x == doctest::Approx(2.0));
    CHECK(plan.lo.y == doctest::Approx(-1.0));
    CHECK(plan.hi.y == doctest::Approx(2.0));
    CHECK(zmin == 0.0);
    CHECK(zmax == 0.3);

    int facing_front = 0, facing_up = 0;
    for (size_t i = 0; i < m.triangles.size(); ++i) {
        Vec3 n = face_normal(m, i);
        if (std::abs(n.y + 1.0) < 1e-12) ++facing_front;
        if (std::abs(n.z - 1.0) < 1e-12) ++facing_up;
    }
    CHECK(facing_front == 2);  // the cliff wall
    CHECK(facing_up == 4);     // front plane and back half-plane

    cfg.background = false;
    CHECK(build_background(cfg, bbox).empty());
    cfg.background = true;
    CHECK(build_background(cfg, BBox2{}).empty());
}

TEST_CASE("collada output is deterministic and complete") {
    HexGrid grid{1.0, {0.0, 0.0}};
    std::vector<CellColumn> cols = {ground_col(0, 0, 1.0), ground_col(1, 0, 0.5)};
    Mesh terrain = build_terrain(cols, grid, SceneConfig{}, gray_of_t);

    SceneConfig scene;
    scene.camera = {-3.0, -3.0, 2.0};
    scene.look_at = {0.5, 0.5, 0.0};
    scene.bg_front_z = 0.0;
    scene.bg_back_z = 0.4;
    scene.bg_cliff_y = 3.0;
    BBox2 bbox;
    for (const Vec3& v : terrain.vertices) bbox.expand({v.x, v.y});
    Mesh bg = build_background(scene, bbox);

    std::string doc = collada_string({terrain, bg}, scene);
    CHECK(collada_string({terrain, bg}, scene) == doc);

    CHECK(doc.rfind("<?xml version=\"1.0\" encoding=\"utf-8\"?>", 0) == 0);
    CHECK(doc.find("version=\"1.4.1\"") != std::string::npos);
    CHECK(doc.find("<up_axis>Z_UP</up_axis>") != std::string::npos);
    CHECK(doc.find("<yfov>50.000000</yfov>") != std::string::npos);
    CHECK(doc.find("geometry id=\"mesh0\"") != std::string::npos);
    CHECK(doc.find("geometry id=\"mesh1\"") != std::string::npos);
    CHECK(doc.find("instance_camera") != std::string::npos);
    CHECK(doc.find("-0.000000") == std::string::npos);
    CHECK(doc.find("nan") == std::string::npos);
    CHECK(doc.find("inf") == std::string::npos);
    CHECK(doc.substr(doc.size() - 11) == "</COLLADA>\n");

    std::ostringstream sink;
    write_collada({terrain, bg}, scene, sink);
    CHECK(sink.str() == doc);

    SUBCASE("single triangle layout") {
        Mesh tri;
        tri.vertices = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
        tri.colors = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
        tri.triangles = {{0, 1, 2}};
        std::string d = collada_string({tri}, scene);
        CHECK(d.find("-positions-array\" count=\"9\"") != std::string::npos);
        CHECK(d.find("<triangles count=\"1\">") != std::string::npos);
        CHECK(d.find("<p>0 0 1 0 2 0</p>") != std::string::npos);
    }

    SUBCASE("no meshes still yields a valid scene") {
        std::string d = collada_string({}, scene);
        CHECK(d.find("library_geometries") == std::string::npos);
        CHECK(d.find("library_cameras") != std::string::npos);
        CHECK(d.find("instance_visual_scene") != std::string::npos);
        CHECK(collada_string({}, scene) == d);
    }

    SUBCASE("invalid input is rejected") {
        SceneConfig bad = scene;
        bad.fov_deg = 5.0;
        CHECK_THROWS_AS(collada_string({terrain}, bad), std::invalid_argument);
        bad.fov_deg = 130.0;
        CHECK_THROWS_AS(collada_string({terrain}, bad), std::invalid_argument);

        Mesh broken = terrain;
        broken.colors.pop_back();
        CHECK_THROWS_AS(collada_string({broken}, scene), std::invalid_argument);

        broken = terrain;
        broken.triangles.push_back({0, 1, 999999});
        CHECK_THROWS_AS(collada_string({broken}, scene), std::invalid_argument);

        broken = terrain;
        broken.vertices[0].x = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(collada_string({broken}, scene), std::invalid_argument);
    }
}

TEST_CASE("polya terrain caps every cell inside the triangle") {
    Traversal trav(builtin("polya"));
    double e = 1.0 / 96.0;
    auto samples = trav.sample({.max_gap = e / (2.0 * trav.expansion_radius().radius)});
    HexGrid grid{e, {0.0, 0.0}};
    auto cols = rasterize(samples, grid, {.gap_threshold = 2.0, .z_scale = 0.5});
    Mesh m = build_terrain(cols, grid, SceneConfig{}, gray_of_t);

    std::set<std::pair<long long, long long>> cap_xy;
    for (const Vec3& v : m.vertices)
        cap_xy.insert({llround(v.x * 1e9), llround(v.y * 1e9)});

    std::set<std::pair<int, int>> cells;
    for (const CellColumn& col : cols) cells.insert({col.cell.q, col.cell.r});

    // Every rasterized cell is capped (fan center present in the mesh).
    bool capped = true;
    for (const CellColumn& col : cols) {
        Vec2 c = grid.center(col.cell);
        capped = capped && cap_xy.count({llround(c.x * 1e9), llround(c.y * 1e9)}) > 0;
    }
    CHECK(capped);

    // And the rasterized set covers the triangle interior.
    int interior = 0, missing = 0;
    for (int q = -2; q <= 66; ++q) {
        for (int r = -40; r <= 40; ++r) {
            Vec2 c = grid.center({q, r});
            bool inside = true;
            for (int k = 0; k < 6 && inside; ++k) {
                double ang = k * (M_PI / 3.0);
                Vec2 corner{c.x + e * std::cos(ang), c.y + e * std::sin(ang)};
                inside = oracles::in_polya_triangle(corner, -1e-9);
            }
            if (!inside) continue;
            ++interior;
            if (!cells.count({q, r})) ++missing;
        }
    }
    CHECK(interior > 700);
    CHECK(missing == 0);
}
