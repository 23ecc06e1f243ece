#include <doctest.h>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pftrail/curvedef.hpp"
#include "pftrail/imaging.hpp"
#include "pftrail/render.hpp"
#include "pftrail/traversal.hpp"

namespace fs = std::filesystem;
using namespace pftrail;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path tmp_path(const char* name) {
    return fs::temp_directory_path() / name;
}

// The run_* entry points narrate to stderr; keep the test log clean.
struct QuietStderr {
    int saved;
    QuietStderr() {
        std::fflush(stderr);
        saved = dup(2);
        int sink = open("/dev/null", O_WRONLY);
        dup2(sink, 2);
        close(sink);
    }
    ~QuietStderr() {
        std::fflush(stderr);
        dup2(saved, 2);
        close(saved);
    }
};

const char* cli_bin() { return std::getenv("PFTRAIL_BIN"); }

int cli(const std::string& args, std::string* out = nullptr) {
    std::string cmd = std::string(cli_bin()) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string text;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) text.append(buf, n);
    int status = pclose(p);
    if (out) *out = text;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("render subcommand writes deterministic collada") {
    QuietStderr quiet;
    fs::path a = tmp_path("pftrail_cli_a.dae");
    fs::path b = tmp_path("pftrail_cli_b.dae");

    RenderConfig cfg;
    cfg.source.builtin_name = "polya";
    cfg.output = a.string();
    cfg.grid = 48;
    cfg.threads = 1;
    REQUIRE(run_render(cfg) == 0);

    std::string doc = slurp(a);
    CHECK(doc.starts_with("<?xml"));
    CHECK(doc.ends_with("</COLLADA>\n"));
    CHECK(doc.find("library_geometries") != std::string::npos);

    cfg.output = b.string();
    cfg.threads = 3;
    REQUIRE(run_render(cfg) == 0);
    CHECK(slurp(b) == doc);

    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("render rejects bad flags and inputs with distinct codes") {
    QuietStderr quiet;
    fs::path out = tmp_path("pftrail_cli_rej.dae");

    RenderConfig good;
    good.source.builtin_name = "polya";
    good.output = out.string();
    good.grid = 16;

    auto expect = [&](auto mutate, int code) {
        RenderConfig cfg = good;
        mutate(cfg);
        CHECK(run_render(cfg) == code);
    };

    expect([](RenderConfig& c) { c.grid = 7; }, 1);
    expect([](RenderConfig& c) { c.oversample = 0; }, 1);
    expect([](RenderConfig& c) { c.style = "smooth"; }, 1);
    expect([](RenderConfig& c) { c.merge = "average"; }, 1);
    expect([](RenderConfig& c) { c.colormap = "viridis"; }, 1);
    expect([](RenderConfig& c) { c.fov = 5.0; }, 1);
    expect([](RenderConfig& c) { c.output.clear(); }, 1);
    expect([](RenderConfig& c) { c.threads = -2; }, 1);
    expect([](RenderConfig& c) {
        c.has_zoom = true;
        c.zoom_t = 0.5;
        c.zeta = 0.5;
    }, 1);
    expect([](RenderConfig& c) {
        c.has_zoom = c.has_focus = true;
        c.zeta = 2.0;
    }, 1);

    expect([](RenderConfig& c) {
        c.source.builtin_name.clear();
        c.source.path = "does_not_exist.pfc";
    }, 2);
    expect([](RenderConfig& c) { c.source.builtin_name = "nonesuch"; }, 2);

    fs::path bad = tmp_path("pftrail_cli_bad.pfc");
    std::ofstream(bad) << "curve broken\nnot a directive\n";
    expect([&](RenderConfig& c) {
        c.source.builtin_name.clear();
        c.source.path = bad.string();
    }, 2);
    fs::remove(bad);

    expect([](RenderConfig& c) { c.output = "/nonexistent_dir/x.dae"; }, 4);
}

TEST_CASE("close-up renders accept both focus forms") {
    QuietStderr quiet;
    fs::path out = tmp_path("pftrail_cli_zoom.dae");

    RenderConfig cfg;
    cfg.source.builtin_name = "gosper";
    cfg.output = out.string();
    cfg.grid = 32;
    cfg.threads = 2;
    cfg.has_zoom = true;
    cfg.zoom_t = 2.0 / 7.0;
    cfg.zeta = 2.0;
    REQUIRE(run_render(cfg) == 0);
    CHECK(slurp(out).ends_with("</COLLADA>\n"));

    Vec2 fp = Traversal(builtin("gosper")).point_at(2.0 / 7.0);
    RenderConfig byPoint = cfg;
    byPoint.has_zoom = false;
    byPoint.has_focus = true;
    byPoint.focus = fp;
    REQUIRE(run_render(byPoint) == 0);

    RenderConfig offCurve = byPoint;
    offCurve.focus = {40.0, 40.0};
    CHECK(run_render(offCurve) == 3);

    fs::remove(out);
}

TEST_CASE("image subcommand emits a valid deterministic ppm") {
    QuietStderr quiet;
    fs::path a = tmp_path("pftrail_cli_a.ppm");
    fs::path b = tmp_path("pftrail_cli_b.ppm");

    ImageConfig cfg;
    cfg.source.builtin_name = "polya";
    cfg.output = a.string();
    cfg.width = 64;
    cfg.height = 64;
    cfg.scheme = "gray";
    REQUIRE(run_image(cfg) == 0);

    std::string ppm = slurp(a);
    std::string header = "P6\n64 64\n255\n";
    CHECK(ppm.starts_with(header));
    CHECK(ppm.size() == header.size() + 64 * 64 * 3);

    cfg.output = b.string();
    REQUIRE(run_image(cfg) == 0);
    CHECK(slurp(b) == ppm);

    cfg.width = 0;
    CHECK(run_image(cfg) == 1);
    cfg.width = 64;
    cfg.policy = "median";
    CHECK(run_image(cfg) == 1);

    fs::remove(a);
    fs::remove(b);
}

TEST_CASE("column dumps reflect the layer semantics") {
    QuietStderr quiet;
    fs::path out = tmp_path("pftrail_cli_dump.dae");
    fs::path dump = tmp_path("pftrail_cli_dump.txt");

    RenderConfig cfg;
    cfg.source.builtin_name = "polya";
    cfg.output = out.string();
    cfg.grid = 24;
    cfg.threads = 1;
    cfg.dump_columns_path = dump.string();
    REQUIRE(run_render(cfg) == 0);

    std::string text = slurp(dump);
    REQUIRE(!text.empty());
    size_t lines = 0;
    std::istringstream in(text);
    std::string line;
    bool all_seven_fields = true;
    while (std::getline(in, line)) {
        ++lines;
        std::istringstream fields(line);
        std::string tok;
        int count = 0;
        while (fields >> tok) ++count;
        if (count != 7) all_seven_fields = false;
    }
    CHECK(lines > 100);
    CHECK(all_seven_fields);
    // a continuous curve must stay solid: one ground layer per cell
    CHECK(text.find("bridge") == std::string::npos);

    cfg.source.builtin_name = "zorder";
    cfg.grid = 16;
    REQUIRE(run_render(cfg) == 0);
    CHECK(slurp(dump).find("bridge") != std::string::npos);

    fs::remove(out);
    fs::remove(dump);
}

TEST_CASE("command line parsing and reporting") {
    if (!cli_bin()) {
        MESSAGE("PFTRAIL_BIN not set; skipping subprocess checks");
        return;
    }

    std::string out;
    CHECK(cli("--help", &out) == 0);
    CHECK(out.find("render") != std::string::npos);
    CHECK(out.find("image") != std::string::npos);

    CHECK(cli("") == 1);                          // a subcommand is required
    CHECK(cli("render --builtin polya") == 1);    // -o is required
    CHECK(cli("render --builtin polya --zoom nope -o /tmp/x.dae") == 1);
    CHECK(cli("image --builtin polya --size 64 -o /tmp/x.ppm") == 1);

    CHECK(cli("info --builtin polya", &out) == 0);
    CHECK(out.find("2 segments") != std::string::npos);
    CHECK(out.find("0.5") != std::string::npos);
    CHECK(out.find("expansion radius") != std::string::npos);

    CHECK(cli("info --builtin gosper", &out) == 0);
    CHECK(out.find("7 segments") != std::string::npos);
    CHECK(out.find("0.142857") != std::string::npos);

    CHECK(cli("info missing_file.pfc") == 2);

    CHECK(cli("invert --builtin polya --point 0.5,0.5", &out) == 0);
    double t = std::strtod(out.c_str(), nullptr);
    CHECK(std::abs(t - 0.5) < 1e-6);
    Vec2 img = Traversal(builtin("polya")).point_at(t);
    CHECK(std::hypot(img.x - 0.5, img.y - 0.5) <= 1e-5);

    CHECK(cli("invert --builtin polya --point 9,9", &out) == 0);
    CHECK(out == "none\n");
}

TEST_CASE("subprocess renders are byte-identical across thread counts") {
    if (!cli_bin()) {
        MESSAGE("PFTRAIL_BIN not set; skipping subprocess checks");
        return;
    }
    fs::path a = tmp_path("pftrail_cli_t2.dae");
    fs::path b = tmp_path("pftrail_cli_t5.dae");
    REQUIRE(cli("render --builtin hilbert --grid 32 --threads 2 -o " +
                a.string()) == 0);
    REQUIRE(cli("render --builtin hilbert --grid 32 --threads 5 -o " +
                b.string()) == 0);
    std::string da = slurp(a), db = slurp(b);
    CHECK(!da.empty());
    CHECK(da == db);
    fs::remove(a);
    fs::remove(b);
}
