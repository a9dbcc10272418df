#include "ccw/spacefile.hpp"

#include <sstream>

#include "ccw/errors.hpp"
#include "ccw/expr_parser.hpp"

namespace ccw {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

// splits a field line into component expressions at top-level commas
std::vector<std::string> split_components(const std::string& body) {
    std::vector<std::string> parts;
    int depth = 0;
    std::string cur;
    for (char ch : body) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    return parts;
}

}  // namespace

SpaceSpecDocument parse_space_document(const std::string& text) {
    SpaceSpecDocument doc;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    bool saw_name = false, saw_dim = false, saw_coords = false, saw_weights = false,
         saw_anchor = false;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        const std::string& key = toks[0];
        auto need = [&](bool cond, const std::string& msg) {
            if (!cond) throw ParseError(msg, lineno, 1);
        };
        if (key == "space") {
            need(toks.size() == 2, "expected: space <name>");
            doc.name = toks[1];
            saw_name = true;
        } else if (key == "dim") {
            need(toks.size() == 2, "expected: dim <N>");
            try {
                doc.dim = std::stoi(toks[1]);
            } catch (...) {
                throw ParseError("dimension must be an integer", lineno, 5);
            }
            need(doc.dim >= 1, "dimension must be >= 1");
            saw_dim = true;
        } else if (key == "coords") {
            need(toks.size() >= 2, "expected: coords <name>...");
            doc.coords.assign(toks.begin() + 1, toks.end());
            saw_coords = true;
        } else if (key == "weights") {
            need(toks.size() >= 2, "expected: weights <d1> <d2> ...");
            for (size_t i = 1; i < toks.size(); ++i) {
                try {
                    doc.weights.push_back(std::stoi(toks[i]));
                } catch (...) {
                    throw ParseError("weights must be integers", lineno, 1);
                }
                if (doc.weights.back() < 1)
                    throw ParseError("weights must be positive integers", lineno, 1);
            }
            saw_weights = true;
        } else if (key == "anchor") {
            need(toks.size() >= 2, "expected: anchor <a1> <a2> ...");
            for (size_t i = 1; i < toks.size(); ++i) {
                try {
                    doc.anchor.push_back(parse_rational(toks[i]));
                } catch (const UsageError& e) {
                    throw ParseError(e.what(), lineno, 1);
                }
            }
            saw_anchor = true;
        } else if (key == "depth") {
            need(toks.size() == 2, "expected: depth <M>");
            try {
                doc.depth = std::stoi(toks[1]);
            } catch (...) {
                throw ParseError("depth must be an integer", lineno, 7);
            }
            need(doc.depth >= 1, "depth must be >= 1");
        } else if (key == "field") {
            need(saw_coords, "field line before coords");
            auto pos = line.find("field");
            std::string body = line.substr(pos + 5);
            auto parts = split_components(body);
            if (static_cast<int>(parts.size()) != static_cast<int>(doc.coords.size()))
                throw ParseError("field needs " + std::to_string(doc.coords.size()) +
                                     " comma-separated components, found " +
                                     std::to_string(parts.size()),
                                 lineno, static_cast<int>(pos) + 6);
            std::vector<RPoly> comps;
            int col = static_cast<int>(pos) + 6;
            for (const auto& part : parts) {
                ExprParser p(part, doc.coords, lineno, col);
                comps.push_back(p.parse());
                col += static_cast<int>(part.size()) + 1;
            }
            doc.fields.push_back(std::move(comps));
        } else {
            throw ParseError("unknown directive '" + key + "'", lineno, 1);
        }
    }
    if (!saw_name) throw ParseError("missing 'space <name>' header", lineno, 1);
    if (!saw_coords) throw ParseError("missing 'coords' line", lineno, 1);
    if (!saw_dim) doc.dim = static_cast<int>(doc.coords.size());
    if (doc.dim != static_cast<int>(doc.coords.size()))
        throw ParseError("dim does not match the number of coordinates", lineno, 1);
    if (!saw_weights) throw ParseError("missing 'weights' line", lineno, 1);
    if (doc.fields.empty()) throw ParseError("no field lines", lineno, 1);
    if (doc.weights.size() != doc.fields.size())
        throw ParseError("weight count " + std::to_string(doc.weights.size()) +
                             " does not match field count " + std::to_string(doc.fields.size()),
                         lineno, 1);
    if (!saw_anchor) doc.anchor.assign(doc.dim, Rational(0));
    if (static_cast<int>(doc.anchor.size()) != doc.dim)
        throw ParseError("anchor dimension does not match coords", lineno, 1);
    return doc;
}

std::string print_space_document(const SpaceSpecDocument& doc) {
    std::ostringstream os;
    os << "space " << doc.name << "\n";
    os << "dim " << doc.dim << "\n";
    os << "coords";
    for (const auto& c : doc.coords) os << " " << c;
    os << "\n";
    os << "weights";
    for (int w : doc.weights) os << " " << w;
    os << "\n";
    os << "anchor";
    for (const auto& a : doc.anchor) os << " " << a.str();
    os << "\n";
    for (const auto& f : doc.fields) {
        os << "field ";
        for (size_t j = 0; j < f.size(); ++j) {
            if (j) os << ", ";
            os << to_string(f[j], doc.coords);
        }
        os << "\n";
    }
    if (doc.depth > 0) os << "depth " << doc.depth << "\n";
    return os.str();
}

WeightedSystem to_system(const SpaceSpecDocument& doc) {
    WeightedSystem sys;
    sys.name = doc.name;
    sys.chart = Chart(doc.coords);
    for (const auto& comps : doc.fields) sys.generators.emplace_back(sys.chart, comps);
    sys.weights = doc.weights;
    sys.anchor = doc.anchor;
    for (size_t i = 1; i < sys.weights.size(); ++i)
        if (sys.weights[i] < sys.weights[i - 1])
            throw UsageError("weights must be sorted nondecreasing");
    if (doc.depth > 0) {
        sys.depth = doc.depth;
    } else {
        int cap = 0;
        for (int w : sys.weights) cap += w;
        cap = std::max(cap, sys.weights.back()) * sys.dim();
        auto m = minimal_depth_at(sys, sys.anchor, std::min(cap, 10));
        if (!m)
            throw StructuralDefect(
                "commutators do not span the tangent space at the anchor (no finite depth)");
        sys.depth = *m;
    }
    validate_system(sys);
    return sys;
}

SpaceSpecDocument document_from_system(const WeightedSystem& sys) {
    SpaceSpecDocument doc;
    doc.name = sys.name;
    doc.dim = sys.dim();
    doc.coords = sys.chart.names;
    doc.weights = sys.weights;
    doc.anchor = sys.anchor;
    for (const auto& g : sys.generators) doc.fields.push_back(g.components());
    doc.depth = sys.depth;
    return doc;
}

std::vector<std::string> catalog_names() {
    return {"heisenberg-<n>", "heisenberg-weighted", "weighted-euclidean", "example3-unit",
            "example3-graded"};
}

SpaceSpecDocument catalog(const std::string& name) {
    auto make = [&](const std::string& body) { return parse_space_document(body); };
    if (name.rfind("heisenberg-", 0) == 0 && name != "heisenberg-weighted") {
        std::string tail = name.substr(11);
        int n = 0;
        try {
            n = std::stoi(tail);
        } catch (...) {
            n = 0;
        }
        if (n >= 1 && std::to_string(n) == tail) {
            std::ostringstream os;
            os << "space heisenberg-" << n << "\n";
            os << "coords";
            for (int j = 1; j <= n; ++j) os << " x" << j;
            for (int j = 1; j <= n; ++j) os << " y" << j;
            os << " t\nweights";
            for (int j = 0; j < 2 * n; ++j) os << " 1";
            os << " 2\n";
            auto zeros = [&](int except, const std::string& value) {
                std::ostringstream fs;
                for (int c = 0; c < 2 * n + 1; ++c) {
                    if (c) fs << ", ";
                    fs << (c == except ? value : "0");
                }
                return fs.str();
            };
            for (int j = 0; j < n; ++j) {
                std::ostringstream fs;
                for (int c = 0; c < 2 * n + 1; ++c) {
                    if (c) fs << ", ";
                    if (c == j)
                        fs << "1";
                    else if (c == 2 * n)
                        fs << "-1/2*y" << (j + 1);
                    else
                        fs << "0";
                }
                os << "field " << fs.str() << "\n";
            }
            for (int j = 0; j < n; ++j) {
                std::ostringstream fs;
                for (int c = 0; c < 2 * n + 1; ++c) {
                    if (c) fs << ", ";
                    if (c == n + j)
                        fs << "1";
                    else if (c == 2 * n)
                        fs << "1/2*x" << (j + 1);
                    else
                        fs << "0";
                }
                os << "field " << fs.str() << "\n";
            }
            os << "field " << zeros(2 * n, "1") << "\n";
            os << "depth 2\n";
            return make(os.str());
        }
    }
    if (name == "heisenberg-weighted")
        return make(
            "space heisenberg-weighted\n"
            "coords x y t\n"
            "weights 1 2 3\n"
            "field 1, 0, -1/2*y\n"
            "field 0, 1, 1/2*x\n"
            "field 0, 0, 1\n"
            "depth 3\n");
    if (name == "weighted-euclidean")
        return make(
            "space weighted-euclidean\n"
            "coords x1 x2 x3\n"
            "weights 1 2 3\n"
            "field 1, 0, 0\n"
            "field 0, 1, 0\n"
            "field 0, 0, 1\n"
            "depth 3\n");
    if (name == "example3-unit")
        return make(
            "space example3-unit\n"
            "coords x y t\n"
            "weights 1 1 1\n"
            "field 0, 1, 0\n"
            "field 1, 0, y\n"
            "field 1, 0, 0\n"
            "depth 2\n");
    if (name == "example3-graded")
        return make(
            "space example3-graded\n"
            "coords x y t\n"
            "weights 1 2 3\n"
            "field 0, 1, 0\n"
            "field 1, 0, y\n"
            "field 1, 0, 0\n"
            "depth 3\n");
    std::ostringstream os;
    os << "unknown catalog space '" << name << "'; available:";
    for (const auto& n : catalog_names()) os << " " << n;
    throw UsageError(os.str());
}

}  // namespace ccw
