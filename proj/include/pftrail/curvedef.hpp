#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pftrail/geometry.hpp"

namespace pftrail {

// Displacement basis for a generator. Square uses the unit axes,
// triangular uses (1,0) and (1/2, sqrt(3)/2).
enum class Basis { square, triangular };

enum class ItemKind { segment, jump };

struct GeneratorItem {
    ItemKind kind = ItemKind::segment;
    Vec2 displacement{};     // in the generator's basis coordinates
    bool reversed = false;   // segment traversed from its far end back
    bool mirrored = false;   // child curve reflected across the segment axis
    std::string target;      // generator id the segment refines into

    bool operator==(const GeneratorItem&) const = default;
};

struct Generator {
    std::string id;
    Basis basis = Basis::square;
    std::vector<GeneratorItem> items;

    bool operator==(const Generator&) const = default;
};

struct CurveDefinition {
    std::string name;
    std::vector<Generator> generators;  // in file order
    std::string start;
    std::optional<std::pair<double, double>> restriction;  // [t0, t1] of the base curve

    const Generator* find_generator(std::string_view id) const;
    int generator_index(std::string_view id) const;  // -1 when absent
};

// Equality of everything except the display name.
bool structurally_equal(const CurveDefinition& a, const CurveDefinition& b);

class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Parses the line-oriented .pfc definition text. Throws ParseError with
// a 1-based line/column on malformed input, dangling references, zero
// displacements or zero net displacement.
CurveDefinition parse_definition(std::string_view text);

// Canonical text form; parse_definition(to_pfc(d)) is structurally equal to d.
std::string to_pfc(const CurveDefinition& def);

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Checks contraction factors (< 1), weight normalization (sum of squared
// contractions near 1 per generator), reference integrity and restriction
// bounds. Warnings are non-fatal.
ValidationReport validate(const CurveDefinition& def);

std::vector<std::string> builtin_names();

// Returns a catalogue definition. Throws std::invalid_argument for
// names not in builtin_names().
CurveDefinition builtin(const std::string& name);

// Toggles the reversed flag of every segment item. Involution.
CurveDefinition inner_flip(CurveDefinition def);

struct SegmentTransform {
    bool is_jump = false;
    Similarity map;        // unit gate chord (0,0)-(1,0) onto the segment chord
    double weight = 0.0;   // contraction^2 / sum of contraction^2, 0 for jumps
    double contraction = 0.0;
    bool reversed = false;
    int target = -1;       // generator index, -1 for jumps
};

// Normalized per-item transforms of one generator. The generator's net
// displacement is mapped onto (0,0)-(1,0) first; weights of the segment
// items sum to exactly 1. Throws std::invalid_argument on a degenerate
// (zero displacement) segment or zero net displacement.
std::vector<SegmentTransform> segment_transforms(const Generator& gen,
                                                 const CurveDefinition& def);

}  // namespace pftrail
