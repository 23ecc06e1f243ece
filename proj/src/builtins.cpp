#include "pftrail/curvedef.hpp"

#include <stdexcept>

namespace pftrail {

namespace {

// Two mirrored halves on the diagonals of the unit square.
constexpr const char* kPolya = R"pfc(curve polya
start p
generator p basis square
seg 1 1 F
seg 1 -1 F
)pfc";

// Same halves, playback restricted to the first three quarters. Fills the
// trapezoid (0,0) (1,0) (1.5,0.5) (1,1) before renormalization of the chord.
constexpr const char* kTrapezoid = R"pfc(curve trapezoid
start p
restrict 0 0.75
generator p basis square
seg 1 1 F
seg 1 -1 F
)pfc";

constexpr const char* kHilbert = R"pfc(curve hilbert
start h
generator h basis square
seg 0 1 F
seg 1 0
seg 1 0
seg 0 -1 F
)pfc";

// 3x3 switchback along the diagonal.
constexpr const char* kPeano = R"pfc(curve peano
start p
generator p basis square
seg 1 1
seg -1 1 F
seg 1 1
seg 1 -1 F
seg -1 -1
seg 1 -1 F
seg 1 1
seg -1 1 F
seg 1 1
)pfc";

// Morton order: four diagonal cell visits stitched with jumps.
constexpr const char* kZorder = R"pfc(curve zorder
start z
generator z basis square
seg 1 1
jump 0 -1
seg 1 1
jump -2 0
seg 1 1
jump 0 -1
seg 1 1
)pfc";

// Seven pieces on the triangular lattice, net displacement 2e1 + e2.
constexpr const char* kGosper = R"pfc(curve gosper
start g
generator g basis triangular
seg 1 0
seg 0 1 R
seg -1 0 R
seg -1 1
seg 1 0
seg 1 0
seg 1 -1 R
)pfc";

struct Entry {
    const char* name;
    const char* text;
};

constexpr Entry kEntries[] = {
    {"gosper", kGosper},   {"hilbert", kHilbert},       {"peano", kPeano},
    {"polya", kPolya},     {"trapezoid", kTrapezoid},   {"zorder", kZorder},
};

}  // namespace

std::vector<std::string> builtin_names() {
    return {"gosper", "gosper-innerflip", "hilbert", "peano",
            "polya",  "trapezoid",        "zorder"};
}

CurveDefinition builtin(const std::string& name) {
    if (name == "gosper-innerflip") {
        CurveDefinition def = inner_flip(builtin("gosper"));
        def.name = name;
        return def;
    }
    for (const Entry& e : kEntries)
        if (name == e.name) return parse_definition(e.text);
    throw std::invalid_argument("unknown builtin curve '" + name + "'");
}

}  // namespace pftrail
