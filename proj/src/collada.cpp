#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pftrail/meshgen.hpp"

namespace pftrail {

namespace {

// Text sink: accumulates into a string, and when bound to a stream flushes
// in 1 MiB slices so serializing a large model never holds the whole
// document in memory.
struct Sink {
    std::ostream* os = nullptr;
    std::string buf;

    void put(std::string_view s) {
        buf.append(s);
        if (os && buf.size() >= (1u << 20)) flush();
    }
    void put(char c) {
        buf.push_back(c);
        if (os && buf.size() >= (1u << 20)) flush();
    }
    void flush() {
        if (os && !buf.empty()) {
            os->write(buf.data(), std::streamsize(buf.size()));
            buf.clear();
        }
    }
};

// Fixed 6-decimal formatting; "-0.000000" collapses to "0.000000" so
// equal models serialize identically regardless of sign of zero.
void fmt6(Sink& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    const char* s = buf;
    if (buf[0] == '-') {
        bool zero = true;
        for (const char* p = buf + 1; *p && zero; ++p)
            zero = *p == '0' || *p == '.';
        if (zero) s = buf + 1;
    }
    out.put(std::string_view(s));
}

void put_uint(Sink& out, uint64_t v) {
    char buf[24];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.put(std::string_view(buf, size_t(r.ptr - buf)));
}

void append_floats(Sink& out, const double* v, size_t n) {
    for (size_t i = 0; i < n; ++i) {
        if (i) out.put(' ');
        fmt6(out, v[i]);
    }
}

// <source> with the payload streamed by the callback between the
// float_array tags.
template <class Payload>
void emit_source(Sink& out, const std::string& id, size_t floats, size_t stride,
                 const char* const* params, size_t nparams, Payload&& payload) {
    out.put("      <source id=\"" + id + "\">\n");
    out.put("        <float_array id=\"" + id + "-array\" count=\"" +
            std::to_string(floats) + "\">");
    payload(out);
    out.put("</float_array>\n");
    out.put("        <technique_common>\n");
    out.put("          <accessor source=\"#" + id + "-array\" count=\"" +
            std::to_string(floats / stride) + "\" stride=\"" +
            std::to_string(stride) + "\">\n");
    for (size_t i = 0; i < nparams; ++i)
        out.put(std::string("            <param name=\"") + params[i] +
                "\" type=\"float\"/>\n");
    out.put("          </accessor>\n");
    out.put("        </technique_common>\n");
    out.put("      </source>\n");
}

void validate_mesh(const Mesh& mesh) {
    if (mesh.colors.size() != mesh.vertices.size())
        throw std::invalid_argument("mesh colour count must match vertex count");
    for (const Vec3& v : mesh.vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
            throw std::invalid_argument("mesh contains non-finite coordinates");
    for (const auto& t : mesh.triangles)
        for (uint32_t i : t)
            if (i >= mesh.vertices.size())
                throw std::invalid_argument("triangle index out of range");
}

void emit_document(const std::vector<Mesh>& meshes, const SceneConfig& scene,
                   Sink& out) {
    if (!(scene.fov_deg > 10.0) || !(scene.fov_deg < 120.0))
        throw std::invalid_argument("field of view must lie in (10, 120) degrees");

    std::vector<const Mesh*> live;
    for (const Mesh& m : meshes) {
        if (m.empty()) continue;
        validate_mesh(m);
        live.push_back(&m);
    }

    out.put(
        "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
        "<COLLADA xmlns=\"http://www.collada.org/2005/11/COLLADASchema\" "
        "version=\"1.4.1\">\n"
        "  <asset>\n"
        "    <contributor>\n"
        "      <authoring_tool>pftrail</authoring_tool>\n"
        "    </contributor>\n"
        "    <created>2024-01-01T00:00:00</created>\n"
        "    <modified>2024-01-01T00:00:00</modified>\n"
        "    <unit name=\"meter\" meter=\"1\"/>\n"
        "    <up_axis>Z_UP</up_axis>\n"
        "  </asset>\n");

    double dist = (scene.look_at - scene.camera).norm();
    if (!(dist > 0.0)) dist = 1.0;
    out.put("  <library_cameras>\n");
    out.put("    <camera id=\"camera0\" name=\"camera0\">\n");
    out.put("      <optics>\n        <technique_common>\n          <perspective>\n");
    out.put("            <yfov>");
    fmt6(out, scene.fov_deg);
    out.put("</yfov>\n            <znear>");
    fmt6(out, 0.001 * dist);
    out.put("</znear>\n            <zfar>");
    fmt6(out, 10.0 * dist);
    out.put("</zfar>\n          </perspective>\n        </technique_common>\n"
            "      </optics>\n    </camera>\n  </library_cameras>\n");

    if (!live.empty()) {
        out.put("  <library_geometries>\n");
        for (size_t gi = 0; gi < live.size(); ++gi) {
            const Mesh& m = *live[gi];
            std::string id = "mesh" + std::to_string(gi);
            out.put("    <geometry id=\"" + id + "\" name=\"" + id + "\">\n");
            out.put("      <mesh>\n");

            const char* xyz[3] = {"X", "Y", "Z"};
            emit_source(out, id + "-positions", m.vertices.size() * 3, 3, xyz, 3,
                        [&](Sink& s) {
                            for (size_t i = 0; i < m.vertices.size(); ++i) {
                                if (i) s.put(' ');
                                double v[3] = {m.vertices[i].x, m.vertices[i].y,
                                               m.vertices[i].z};
                                append_floats(s, v, 3);
                            }
                        });

            emit_source(out, id + "-normals", m.triangles.size() * 3, 3, xyz, 3,
                        [&](Sink& s) {
                            for (size_t i = 0; i < m.triangles.size(); ++i) {
                                if (i) s.put(' ');
                                Vec3 n = face_normal(m, i);
                                double v[3] = {n.x, n.y, n.z};
                                append_floats(s, v, 3);
                            }
                        });

            const char* rgb[3] = {"R", "G", "B"};
            emit_source(out, id + "-colors", m.colors.size() * 3, 3, rgb, 3,
                        [&](Sink& s) {
                            for (size_t i = 0; i < m.colors.size(); ++i) {
                                if (i) s.put(' ');
                                double v[3] = {m.colors[i].x, m.colors[i].y,
                                               m.colors[i].z};
                                append_floats(s, v, 3);
                            }
                        });

            out.put("      <vertices id=\"" + id + "-vertices\">\n");
            out.put("        <input semantic=\"POSITION\" source=\"#" + id +
                    "-positions\"/>\n");
            out.put("      </vertices>\n");

            out.put("      <triangles count=\"" +
                    std::to_string(m.triangles.size()) + "\">\n");
            out.put("        <input semantic=\"VERTEX\" source=\"#" + id +
                    "-vertices\" offset=\"0\"/>\n");
            out.put("        <input semantic=\"NORMAL\" source=\"#" + id +
                    "-normals\" offset=\"1\"/>\n");
            out.put("        <input semantic=\"COLOR\" source=\"#" + id +
                    "-colors\" offset=\"0\" set=\"0\"/>\n");
            out.put("        <p>");
            for (size_t i = 0; i < m.triangles.size(); ++i) {
                for (int k = 0; k < 3; ++k) {
                    if (i || k) out.put(' ');
                    put_uint(out, m.triangles[i][k]);
                    out.put(' ');
                    put_uint(out, i);
                }
            }
            out.put("</p>\n");
            out.put("      </triangles>\n");
            out.put("      </mesh>\n");
            out.put("    </geometry>\n");
        }
        out.put("  </library_geometries>\n");
    }

    // Camera basis: local -z looks at the target, world +z is up.
    Vec3 f = scene.look_at - scene.camera;
    double flen = f.norm();
    if (!(flen > 0.0)) {
        f = {0.0, 1.0, 0.0};
        flen = 1.0;
    }
    f = f * (1.0 / flen);
    Vec3 zl = f * -1.0;
    Vec3 up{0.0, 0.0, 1.0};
    Vec3 xl = up.cross(zl);
    if (xl.norm() < 1e-12) {
        up = {0.0, 1.0, 0.0};
        xl = up.cross(zl);
    }
    xl = xl * (1.0 / xl.norm());
    Vec3 yl = zl.cross(xl);

    out.put("  <library_visual_scenes>\n");
    out.put("    <visual_scene id=\"scene0\" name=\"scene0\">\n");
    out.put("      <node id=\"cameraNode\" name=\"cameraNode\">\n");
    out.put("        <matrix>");
    {
        double m[16] = {xl.x, yl.x, zl.x, scene.camera.x,
                        xl.y, yl.y, zl.y, scene.camera.y,
                        xl.z, yl.z, zl.z, scene.camera.z,
                        0.0,  0.0,  0.0,  1.0};
        append_floats(out, m, 16);
    }
    out.put("</matrix>\n");
    out.put("        <instance_camera url=\"#camera0\"/>\n");
    out.put("      </node>\n");
    for (size_t gi = 0; gi < live.size(); ++gi) {
        std::string id = std::to_string(gi);
        out.put("      <node id=\"meshNode" + id + "\" name=\"meshNode" + id +
                "\">\n");
        out.put("        <instance_geometry url=\"#mesh" + id + "\"/>\n");
        out.put("      </node>\n");
    }
    out.put("    </visual_scene>\n");
    out.put("  </library_visual_scenes>\n");
    out.put("  <scene>\n");
    out.put("    <instance_visual_scene url=\"#scene0\"/>\n");
    out.put("  </scene>\n");
    out.put("</COLLADA>\n");
}

}  // namespace

std::string collada_string(const std::vector<Mesh>& meshes,
                           const SceneConfig& scene) {
    Sink sink;
    sink.buf.reserve(1 << 20);
    emit_document(meshes, scene, sink);
    return std::move(sink.buf);
}

void write_collada(const std::vector<Mesh>& meshes, const SceneConfig& scene,
                   std::ostream& out) {
    Sink sink{&out, {}};
    emit_document(meshes, scene, sink);
    sink.flush();
    if (!out) throw std::runtime_error("failed to write model output");
}

}  // namespace pftrail
