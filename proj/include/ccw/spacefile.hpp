#pragma once

#include <string>
#include <vector>

#include "ccw/structure.hpp"

namespace ccw {

/// Line-oriented space definition document. Grammar (EBNF in
/// docs/space_format.md): header, coordinates, weights, optional anchor,
/// one `field` line per generator with comma-separated polynomial components,
/// optional depth override. parse -> print -> parse is a fixed point.
struct SpaceSpecDocument {
    std::string name;
    int dim = 0;
    std::vector<std::string> coords;
    std::vector<int> weights;
    RatVec anchor;                             // defaults to the origin
    std::vector<std::vector<RPoly>> fields;    // per generator, per coordinate
    int depth = 0;                             // 0 = compute minimal at the anchor
};

SpaceSpecDocument parse_space_document(const std::string& text);
std::string print_space_document(const SpaceSpecDocument& doc);

/// Builds and validates the weighted system (computes the minimal depth at
/// the anchor when the document omits it).
WeightedSystem to_system(const SpaceSpecDocument& doc);

inline WeightedSystem parse_space(const std::string& text) {
    return to_system(parse_space_document(text));
}

SpaceSpecDocument document_from_system(const WeightedSystem& sys);

/// Built-in fixtures: heisenberg-<n>, heisenberg-weighted, weighted-euclidean,
/// example3-unit, example3-graded. Unknown names raise a UsageError that lists
/// the catalog.
SpaceSpecDocument catalog(const std::string& name);
std::vector<std::string> catalog_names();

}  // namespace ccw
