#include "pftrail/curvedef.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <utility>

namespace pftrail {

namespace {

struct Tok {
    int col = 0;  // 1-based
    std::string text;
};

std::vector<Tok> tokenize(std::string_view line) {
    std::vector<Tok> out;
    size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < line.size()) {
            char d = line[j];
            if (d == ' ' || d == '\t' || d == '\r' || d == '#') break;
            ++j;
        }
        out.push_back({int(i) + 1, std::string(line.substr(i, j - i))});
        i = j;
    }
    return out;
}

// Scalar grammar: [sign][numeric]["s3"]["/" numeric]. At least one of the
// numeric part or "s3" must be present. "s3" stands for sqrt(3), so "-s3/2"
// reads as -sqrt(3)/2.
double parse_scalar(const Tok& t, int line) {
    const std::string& s = t.text;
    auto fail = [&](const char* what) {
        throw ParseError(line, t.col, std::string(what) + " '" + s + "'");
    };
    size_t i = 0;
    double sign = 1.0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        if (s[i] == '-') sign = -1.0;
        ++i;
    }
    double mag = 1.0;
    bool have_part = false;
    if (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) {
        char* end = nullptr;
        mag = std::strtod(s.c_str() + i, &end);
        if (end == s.c_str() + i) fail("malformed number");
        i = size_t(end - s.c_str());
        have_part = true;
    }
    if (i + 2 <= s.size() && s[i] == 's' && s[i + 1] == '3') {
        mag *= std::sqrt(3.0);
        i += 2;
        have_part = true;
    }
    if (i < s.size() && s[i] == '/') {
        ++i;
        if (i >= s.size() || !(std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.'))
            fail("malformed denominator in");
        char* end = nullptr;
        double den = std::strtod(s.c_str() + i, &end);
        if (end == s.c_str() + i || den == 0.0) fail("malformed denominator in");
        i = size_t(end - s.c_str());
        mag /= den;
    }
    if (!have_part || i != s.size() || !std::isfinite(mag)) fail("malformed number");
    return sign * mag;
}

Vec2 world_displacement(Basis basis, const Vec2& d) {
    if (basis == Basis::square) return d;
    static const double h = std::sqrt(3.0) / 2.0;
    return {d.x + 0.5 * d.y, h * d.y};
}

void format_scalar(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

ParseError::ParseError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

const Generator* CurveDefinition::find_generator(std::string_view id) const {
    for (const Generator& g : generators)
        if (g.id == id) return &g;
    return nullptr;
}

int CurveDefinition::generator_index(std::string_view id) const {
    for (size_t i = 0; i < generators.size(); ++i)
        if (generators[i].id == id) return int(i);
    return -1;
}

bool structurally_equal(const CurveDefinition& a, const CurveDefinition& b) {
    return a.start == b.start && a.restriction == b.restriction &&
           a.generators == b.generators;
}

CurveDefinition parse_definition(std::string_view text) {
    CurveDefinition def;
    struct ItemRef {
        size_t gen, item;
        int line, col;
    };
    std::vector<ItemRef> target_refs;
    std::vector<std::pair<int, int>> gen_pos;  // line/col of each generator directive
    int start_line = 0, start_col = 0;
    bool saw_curve = false, saw_start = false, saw_restrict = false;
    int cur = -1;  // index of the generator being filled

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        size_t end = (nl == std::string_view::npos) ? text.size() : nl;
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;

        std::vector<Tok> toks = tokenize(line);
        if (!toks.empty()) {
            const std::string& kw = toks[0].text;
            auto count_error = [&](const char* what) {
                throw ParseError(line_no, toks[0].col,
                                 "'" + kw + "' expects " + what);
            };
            if (kw == "curve") {
                if (saw_curve)
                    throw ParseError(line_no, toks[0].col, "duplicate 'curve' directive");
                if (toks.size() < 2) count_error("a name");
                saw_curve = true;
                for (size_t k = 1; k < toks.size(); ++k) {
                    if (k > 1) def.name += ' ';
                    def.name += toks[k].text;
                }
            } else if (kw == "start") {
                if (saw_start)
                    throw ParseError(line_no, toks[0].col, "duplicate 'start' directive");
                if (toks.size() != 2) count_error("a generator id");
                saw_start = true;
                def.start = toks[1].text;
                start_line = line_no;
                start_col = toks[1].col;
            } else if (kw == "restrict") {
                if (saw_restrict)
                    throw ParseError(line_no, toks[0].col, "duplicate 'restrict' directive");
                if (toks.size() != 3) count_error("two parameters");
                saw_restrict = true;
                double t0 = parse_scalar(toks[1], line_no);
                double t1 = parse_scalar(toks[2], line_no);
                if (!(t0 >= 0.0 && t0 < t1 && t1 <= 1.0))
                    throw ParseError(line_no, toks[1].col,
                                     "restriction must satisfy 0 <= t0 < t1 <= 1");
                def.restriction = {t0, t1};
            } else if (kw == "generator") {
                if (toks.size() != 4 || toks[2].text != "basis")
                    count_error("'<id> basis <square|triangular>'");
                Generator g;
                g.id = toks[1].text;
                if (def.find_generator(g.id))
                    throw ParseError(line_no, toks[1].col,
                                     "duplicate generator '" + g.id + "'");
                if (toks[3].text == "square")
                    g.basis = Basis::square;
                else if (toks[3].text == "triangular")
                    g.basis = Basis::triangular;
                else
                    throw ParseError(line_no, toks[3].col,
                                     "basis must be 'square' or 'triangular'");
                def.generators.push_back(std::move(g));
                gen_pos.push_back({line_no, toks[0].col});
                cur = int(def.generators.size()) - 1;
            } else if (kw == "seg" || kw == "jump") {
                if (cur < 0)
                    throw ParseError(line_no, toks[0].col,
                                     "'" + kw + "' before any 'generator' directive");
                if (toks.size() < 3) count_error("two displacement components");
                GeneratorItem item;
                item.kind = (kw == "seg") ? ItemKind::segment : ItemKind::jump;
                item.displacement.x = parse_scalar(toks[1], line_no);
                item.displacement.y = parse_scalar(toks[2], line_no);
                if (item.displacement.x == 0.0 && item.displacement.y == 0.0)
                    throw ParseError(line_no, toks[1].col, "zero displacement");
                size_t k = 3;
                if (kw == "seg") {
                    while (k < toks.size()) {
                        const std::string& flag = toks[k].text;
                        if (flag == "R" && !item.reversed) {
                            item.reversed = true;
                            ++k;
                        } else if (flag == "F" && !item.mirrored) {
                            item.mirrored = true;
                            ++k;
                        } else if (flag == "->") {
                            if (k + 1 >= toks.size())
                                throw ParseError(line_no, toks[k].col,
                                                 "'->' expects a generator id");
                            item.target = toks[k + 1].text;
                            target_refs.push_back({size_t(cur),
                                                   def.generators[cur].items.size(),
                                                   line_no, toks[k + 1].col});
                            k += 2;
                            if (k != toks.size())
                                throw ParseError(line_no, toks[k].col,
                                                 "trailing tokens after target");
                        } else {
                            throw ParseError(line_no, toks[k].col,
                                             "unexpected token '" + flag + "'");
                        }
                    }
                } else if (toks.size() != 3) {
                    throw ParseError(line_no, toks[3].col,
                                     "unexpected token '" + toks[3].text + "'");
                }
                def.generators[cur].items.push_back(std::move(item));
            } else {
                throw ParseError(line_no, toks[0].col, "unknown directive '" + kw + "'");
            }
        }

        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }

    if (def.generators.empty()) throw ParseError(1, 1, "no generator defined");

    for (size_t gi = 0; gi < def.generators.size(); ++gi) {
        Generator& g = def.generators[gi];
        Vec2 net{};
        bool any_segment = false;
        for (const GeneratorItem& item : g.items) {
            net = net + world_displacement(g.basis, item.displacement);
            any_segment |= item.kind == ItemKind::segment;
        }
        auto [gl, gc] = gen_pos[gi];
        if (!any_segment)
            throw ParseError(gl, gc, "generator '" + g.id + "' has no segments");
        if (net.x == 0.0 && net.y == 0.0)
            throw ParseError(gl, gc,
                             "generator '" + g.id + "' has zero net displacement");
        for (GeneratorItem& item : g.items)
            if (item.kind == ItemKind::segment && item.target.empty())
                item.target = g.id;
    }

    for (const ItemRef& ref : target_refs) {
        const std::string& id = def.generators[ref.gen].items[ref.item].target;
        if (!def.find_generator(id))
            throw ParseError(ref.line, ref.col, "unknown generator '" + id + "'");
    }

    if (saw_start) {
        if (!def.find_generator(def.start))
            throw ParseError(start_line, start_col,
                             "unknown generator '" + def.start + "'");
    } else if (def.generators.size() == 1) {
        def.start = def.generators[0].id;
    } else {
        throw ParseError(1, 1, "'start' is required with multiple generators");
    }

    return def;
}

std::string to_pfc(const CurveDefinition& def) {
    std::string out;
    if (!def.name.empty()) out += "curve " + def.name + "\n";
    out += "start " + def.start + "\n";
    if (def.restriction) {
        out += "restrict ";
        format_scalar(out, def.restriction->first);
        out += ' ';
        format_scalar(out, def.restriction->second);
        out += '\n';
    }
    for (const Generator& g : def.generators) {
        out += "\ngenerator " + g.id + " basis ";
        out += (g.basis == Basis::square) ? "square" : "triangular";
        out += '\n';
        for (const GeneratorItem& item : g.items) {
            out += (item.kind == ItemKind::segment) ? "seg " : "jump ";
            format_scalar(out, item.displacement.x);
            out += ' ';
            format_scalar(out, item.displacement.y);
            if (item.kind == ItemKind::segment) {
                if (item.reversed) out += " R";
                if (item.mirrored) out += " F";
                if (!item.target.empty() && item.target != g.id)
                    out += " -> " + item.target;
            }
            out += '\n';
        }
    }
    return out;
}

ValidationReport validate(const CurveDefinition& def) {
    ValidationReport rep;
    auto err = [&](std::string m) { rep.errors.push_back(std::move(m)); };

    if (def.generators.empty()) {
        err("no generators");
        return rep;
    }
    std::set<std::string> ids;
    for (const Generator& g : def.generators)
        if (!ids.insert(g.id).second) err("duplicate generator '" + g.id + "'");
    if (!def.find_generator(def.start))
        err("start generator '" + def.start + "' not defined");
    if (def.restriction) {
        auto [t0, t1] = *def.restriction;
        if (!(t0 >= 0.0 && t0 < t1 && t1 <= 1.0))
            err("restriction must satisfy 0 <= t0 < t1 <= 1");
    }

    for (const Generator& g : def.generators) {
        bool any_segment = false;
        for (const GeneratorItem& item : g.items) {
            if (item.kind != ItemKind::segment) continue;
            any_segment = true;
            if (!item.target.empty() && !def.find_generator(item.target))
                err("generator '" + g.id + "' refers to unknown generator '" +
                    item.target + "'");
        }
        if (!any_segment) {
            err("generator '" + g.id + "' has no segments");
            continue;
        }
        std::vector<SegmentTransform> st;
        try {
            st = segment_transforms(g, def);
        } catch (const std::exception& e) {
            err("generator '" + g.id + "': " + e.what());
            continue;
        }
        double raw = 0.0;
        int seg_index = 0;
        for (const SegmentTransform& s : st) {
            if (s.is_jump) continue;
            ++seg_index;
            if (s.contraction >= 1.0)
                err("generator '" + g.id + "' segment " + std::to_string(seg_index) +
                    " does not contract (factor " + std::to_string(s.contraction) + ")");
            raw += s.contraction * s.contraction;
        }
        if (std::abs(raw - 1.0) > 1e-9)
            rep.warnings.push_back("generator '" + g.id +
                                   "': squared contractions sum to " +
                                   std::to_string(raw) + ", not 1");
    }
    return rep;
}

CurveDefinition inner_flip(CurveDefinition def) {
    for (Generator& g : def.generators)
        for (GeneratorItem& item : g.items)
            if (item.kind == ItemKind::segment) item.reversed = !item.reversed;
    return def;
}

std::vector<SegmentTransform> segment_transforms(const Generator& gen,
                                                 const CurveDefinition& def) {
    // Complex division on Vec2, reading (x, y) as x + iy.
    auto cdiv = [](const Vec2& a, const Vec2& b) -> Vec2 {
        double n = b.norm2();
        return {(a.x * b.x + a.y * b.y) / n, (a.y * b.x - a.x * b.y) / n};
    };
    // Squared length straight from basis coordinates. Integer inputs stay
    // exact, so equal-length segments get bitwise-equal weights and dyadic
    // or k/n weight boundaries land exactly on the matching doubles.
    auto basis_norm2 = [&](const Vec2& d) {
        double n = d.x * d.x + d.y * d.y;
        if (gen.basis == Basis::triangular) n += d.x * d.y;
        return n;
    };

    std::vector<Vec2> gates;  // cumulative positions, world coordinates
    gates.reserve(gen.items.size() + 1);
    gates.push_back({0.0, 0.0});
    Vec2 net_basis{0.0, 0.0};
    for (const GeneratorItem& item : gen.items) {
        Vec2 d = world_displacement(gen.basis, item.displacement);
        if (d.x == 0.0 && d.y == 0.0)
            throw std::invalid_argument("zero displacement in generator '" + gen.id + "'");
        gates.push_back(gates.back() + d);
        net_basis = net_basis + item.displacement;
    }
    Vec2 net = gates.back();
    if (net.x == 0.0 && net.y == 0.0)
        throw std::invalid_argument("zero net displacement in generator '" + gen.id + "'");
    double net_n2 = basis_norm2(net_basis);

    // Normalize so the chord runs (0,0) -> (1,0).
    for (Vec2& g : gates) g = cdiv(g, net);

    int own = def.generator_index(gen.id);
    double sum_sq = 0.0;
    for (size_t i = 0; i < gen.items.size(); ++i)
        if (gen.items[i].kind == ItemKind::segment)
            sum_sq += basis_norm2(gen.items[i].displacement);

    std::vector<SegmentTransform> out;
    out.reserve(gen.items.size());
    for (size_t i = 0; i < gen.items.size(); ++i) {
        const GeneratorItem& item = gen.items[i];
        const Vec2& p = gates[i];
        const Vec2& q = gates[i + 1];
        SegmentTransform st;
        Vec2 a, b;
        if (item.kind == ItemKind::jump) {
            st.is_jump = true;
            a = q - p;
            b = p;
        } else {
            st.reversed = item.reversed;
            // Reversed segments map the unit chord backwards, so the
            // refinement enters at q and leaves at p after the t flip.
            a = st.reversed ? p - q : q - p;
            b = st.reversed ? q : p;
            double n2 = basis_norm2(item.displacement);
            st.contraction = std::sqrt(n2 / net_n2);
            st.weight = n2 / sum_sq;
            st.target = item.target.empty() ? own
                                            : def.generator_index(item.target);
            if (st.target < 0)
                throw std::invalid_argument("unresolved target in generator '" +
                                            gen.id + "'");
        }
        st.map.scale = a.norm();
        st.map.rotation = std::atan2(a.y, a.x);
        st.map.mirrored = item.mirrored;
        st.map.translation = b;
        out.push_back(st);
    }
    return out;
}

}  // namespace pftrail
