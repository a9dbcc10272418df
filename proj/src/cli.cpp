#include "ccw/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ccw/errors.hpp"
#include "ccw/lab.hpp"
#include "ccw/spacefile.hpp"

namespace ccw {

namespace {

using nlohmann::json;

constexpr const char* kSchemaVersion = "1";

struct CommonOpts {
    std::string space_file;
    std::string catalog_name;
    std::string point;
    std::string target;
    std::string anchor;
    std::string eps_grid;
    std::string out_dir = ".";
    int samples = 0;
    uint64_t seed = 12345;
    bool json_mode = false;
    bool serial = false;
    double tol = 0.0;
    double gap = 0.0;
};

void add_space_flags(CLI::App* cmd, CommonOpts& o) {
    auto* space = cmd->add_option("--space", o.space_file, "space definition file");
    auto* cat = cmd->add_option("--catalog", o.catalog_name, "built-in space name");
    space->excludes(cat);
}

RatVec parse_point(const std::string& text, int dim) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    if (static_cast<int>(parts.size()) != dim)
        throw UsageError("point '" + text + "' has " + std::to_string(parts.size()) +
                         " coordinates, expected " + std::to_string(dim));
    RatVec p;
    for (const auto& s : parts) p.push_back(parse_rational(s));
    return p;
}

std::vector<double> to_doubles(const RatVec& p) {
    std::vector<double> d;
    d.reserve(p.size());
    for (const auto& r : p) d.push_back(to_double(r));
    return d;
}

WeightedSystem load_system(const CommonOpts& o) {
    SpaceSpecDocument doc;
    if (!o.space_file.empty()) {
        std::ifstream f(o.space_file);
        if (!f) throw UsageError("cannot open space file '" + o.space_file + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        doc = parse_space_document(ss.str());
    } else if (!o.catalog_name.empty()) {
        doc = catalog(o.catalog_name);
    } else {
        throw UsageError("one of --space or --catalog is required");
    }
    if (!o.anchor.empty()) doc.anchor = parse_point(o.anchor, static_cast<int>(doc.coords.size()));
    return to_system(doc);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur, ',')) grid.push_back(std::stod(cur));
    return grid;
}

std::string field_to_string(const RField& f) {
    std::ostringstream os;
    os << "(";
    for (int j = 0; j < f.dim(); ++j) {
        if (j) os << ", ";
        os << to_string(f.component(j), f.chart().names);
    }
    os << ")";
    return os.str();
}

int cmd_analyze(const CommonOpts& o) {
    auto sys = load_system(o);
    RatVec p = o.point.empty() ? sys.anchor : parse_point(o.point, sys.dim());
    auto snap = filtration_dims(sys, p);
    auto cls = classify_point(sys, p, Rational(1, 100), 64, o.seed);
    if (o.json_mode) {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["space"] = sys.name;
        j["depth"] = sys.depth;
        j["dims"] = snap.dims;
        j["generic_dims"] = cls.generic_dims;
        j["regularity"] = to_string(cls.verdict);
        j["certified"] = cls.certified;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "space " << sys.name << " (dim " << sys.dim() << ", depth " << sys.depth
                  << ")\n";
        std::cout << "dims:";
        for (int d : snap.dims) std::cout << " " << d;
        std::cout << "\nregularity: " << to_string(cls.verdict)
                  << (cls.certified ? " (certified by exact rank)" : "") << "\n";
    }
    return 0;
}

int cmd_frame(const CommonOpts& o) {
    auto sys = load_system(o);
    RatVec p = o.point.empty() ? sys.anchor : parse_point(o.point, sys.dim());
    auto frame = adapted_frame(sys, p);
    if (o.json_mode) {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["space"] = sys.name;
        json words = json::array();
        for (size_t i = 0; i < frame.words.size(); ++i) {
            json w;
            w["word"] = frame.words[i].word;
            w["degree"] = frame.frame_weights[i];
            w["field"] = field_to_string(frame.words[i].field);
            words.push_back(w);
        }
        j["frame"] = words;
        j["weight_sum"] = frame.weight_sum;
        j["length_sum"] = frame.length_sum;
        j["tie_break"] = "(degree, word length, word lex); other minimal frames may exist";
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "adapted frame at";
        for (const auto& c : p) std::cout << " " << c.str();
        std::cout << "\n";
        for (size_t i = 0; i < frame.words.size(); ++i)
            std::cout << "  Y" << (i + 1) << " = word " << word_to_string(frame.words[i].word)
                      << "  deg " << frame.frame_weights[i] << "  "
                      << field_to_string(frame.words[i].field) << "\n";
        std::cout << "weight sum " << frame.weight_sum << ", length sum " << frame.length_sum
                  << "\n";
        std::cout << "note: ties broken by (degree, word length, word lex); other minimal "
                     "frames may exist\n";
    }
    return 0;
}

int cmd_nilpotentize(const CommonOpts& o) {
    auto sys = load_system(o);
    RatVec p = o.point.empty() ? sys.anchor : parse_point(o.point, sys.dim());
    auto na = nilpotentize(sys, p);
    auto sc = structure_constants(na);
    if (o.json_mode) {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["space"] = sys.name;
        json hats = json::array();
        for (size_t i = 0; i < na.words().size(); ++i) {
            json h;
            h["word"] = na.words()[i].word;
            h["hdeg"] = na.words()[i].hdeg;
            h["hat"] = field_to_string(na.hat[i]);
            hats.push_back(h);
        }
        j["hat_fields"] = hats;
        json cs = json::array();
        for (const auto& [key, val] : sc.c) {
            auto [i, jj, k] = key;
            cs.push_back({{"i", i + 1}, {"j", jj + 1}, {"k", k + 1}, {"value", val.str()}});
        }
        j["structure_constants"] = cs;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "nilpotent approximation of " << sys.name << " (privileged chart "
                  << (na.chart.exact() ? "exact" : "fitted") << ")\n";
        for (size_t i = 0; i < na.words().size(); ++i)
            std::cout << "  hat X" << word_to_string(na.words()[i].word) << " (deg "
                      << na.words()[i].hdeg << ") = " << field_to_string(na.hat[i]) << "\n";
        std::cout << "structure constants (i j k value):\n";
        for (const auto& [key, val] : sc.c) {
            auto [i, jj, k] = key;
            if (i < jj)
                std::cout << "  " << (i + 1) << " " << (jj + 1) << " " << (k + 1) << " "
                          << val.str() << "\n";
        }
    }
    return 0;
}

int cmd_lift(const CommonOpts& o) {
    auto sys = load_system(o);
    RatVec p = o.point.empty() ? sys.anchor : parse_point(o.point, sys.dim());
    auto ls = lift_system(sys, p);
    auto doc = document_from_system(ls.lifted);
    std::string body = print_space_document(doc);
    if (!o.out_dir.empty() && o.out_dir != "-") {
        std::filesystem::create_directories(o.out_dir);
        std::string path = o.out_dir + "/" + ls.lifted.name + ".space";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw UsageError("cannot write '" + path + "'");
        f << body;
        std::cout << "lifted space written to " << path << " (dim " << ls.lifted.dim()
                  << ", free dim " << ls.hall.dim() << ")\n";
    } else {
        std::cout << body;
    }
    return 0;
}

int cmd_rho(const CommonOpts& o, bool hat) {
    auto sys = load_system(o);
    if (o.point.empty()) throw UsageError("rho needs --point (and --target)");
    RatVec v = parse_point(o.point, sys.dim());
    RatVec w = o.target.empty() ? sys.anchor : parse_point(o.target, sys.dim());
    RhoConfig cfg;
    cfg.seed = o.seed;
    if (o.tol > 0) cfg.endpoint_tol = o.tol;
    if (o.gap > 0) cfg.bisect_rel_gap = o.gap;
    QuasimetricEstimate est;
    if (hat) {
        auto na = nilpotentize(sys, sys.anchor);
        est = rho_u_estimate(na, to_doubles(v), to_doubles(w), cfg);
    } else {
        est = rho_estimate(sys, to_doubles(v), to_doubles(w), cfg);
    }
    if (o.json_mode) {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["space"] = sys.name;
        j["metric"] = hat ? "rho_u" : "rho";
        j["value"] = est.value;
        j["status"] = to_string(est.status);
        j["endpoint_residual"] = est.endpoint_residual;
        j["bisect_gap"] = est.bisect_gap;
        j["controls"] = est.controls;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << (hat ? "rho_u" : "rho") << " estimate: " << est.value << "  (status "
                  << to_string(est.status) << ", endpoint residual " << est.endpoint_residual
                  << ", bracket gap " << est.bisect_gap << ")\n";
    }
    return est.status == RhoStatus::Converged ? 0 : 1;
}

int cmd_converge(const CommonOpts& o, const std::string& kind) {
    auto sys = load_system(o);
    RatVec p = o.point.empty() ? sys.anchor : parse_point(o.point, sys.dim());
    ExperimentConfig cfg;
    cfg.seed = o.seed;
    if (!o.eps_grid.empty()) cfg.eps_grid = parse_grid(o.eps_grid);
    if (o.samples > 0) {
        cfg.anchors_per_eps = std::max(2, o.samples / 8);
        cfg.tuples_per_anchor = o.samples;
        cfg.pairs_per_eps = o.samples;
        cfg.box_points = o.samples;
    }
    if (o.serial) cfg.exec = ExecMode::Serial;
    ConvergenceReport rep;
    if (kind == "divergence")
        rep = divergence_experiment(sys, p, cfg);
    else if (kind == "local-approx")
        rep = local_approx_experiment(sys, p, cfg);
    else if (kind == "cone")
        rep = cone_rescale_experiment(sys, p, cfg);
    else if (kind == "gromov")
        rep = gromov_convergence_experiment(sys, p, cfg);
    else
        throw UsageError("unknown experiment '" + kind +
                         "' (divergence | local-approx | cone | gromov)");
    std::string base = o.out_dir + "/" + sys.name + "-" + kind;
    emit_report(rep, base + ".csv", base + ".svg");
    if (o.json_mode) {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["experiment"] = rep.experiment;
        j["space"] = rep.space;
        j["slope"] = rep.slope;
        j["r2"] = rep.r2;
        j["expected_slope"] = rep.expected_slope;
        j["verdict"] = to_string(rep.verdict);
        j["note"] = rep.note;
        j["csv"] = base + ".csv";
        j["svg"] = base + ".svg";
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << rep.experiment << " on " << rep.space << ": ";
        if (rep.fit_valid)
            std::cout << "slope " << rep.slope << " (expected "
                      << (rep.slope_upper_bound ? "<= " : ">= ") << rep.expected_slope
                      << "), R2 " << rep.r2 << ", ";
        std::cout << "verdict " << to_string(rep.verdict);
        if (!rep.note.empty()) std::cout << " [" << rep.note << "]";
        std::cout << "\nwrote " << base << ".csv and " << base << ".svg\n";
    }
    return (rep.verdict == Verdict::Pass || rep.verdict == Verdict::PassZero) ? 0 : 1;
}

int cmd_catalog(const std::string& name) {
    if (name.empty()) {
        std::cout << "available spaces:\n";
        for (const auto& n : catalog_names()) std::cout << "  " << n << "\n";
        return 0;
    }
    std::cout << print_space_document(catalog(name));
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"weighted Carnot-Caratheodory workbench"};
    app.require_subcommand(1);
    CommonOpts o;
    std::string converge_kind, catalog_name_arg;
    bool rho_hat = false;

    auto add_common = [&](CLI::App* cmd, bool with_point = true) {
        add_space_flags(cmd, o);
        if (with_point) cmd->add_option("--point", o.point, "point as comma-separated rationals");
        cmd->add_option("--anchor", o.anchor, "override the anchor point");
        cmd->add_option("--seed", o.seed, "random seed");
        cmd->add_flag("--json", o.json_mode, "machine-readable output");
    };

    auto* analyze = app.add_subcommand("analyze", "filtration dimensions and regularity");
    add_common(analyze);
    auto* frame = app.add_subcommand("frame", "adapted frame at a point");
    add_common(frame);
    auto* nil = app.add_subcommand("nilpotentize", "hat fields and structure constants");
    add_common(nil);
    auto* lift = app.add_subcommand("lift", "emit the lifted space file");
    add_common(lift);
    lift->add_option("--out", o.out_dir, "output directory ('-' for stdout)");
    auto* rho = app.add_subcommand("rho", "quasimetric estimate between two points");
    add_common(rho);
    rho->add_option("--target", o.target, "second point (defaults to the anchor)");
    rho->add_flag("--hat", rho_hat, "use the nilpotentized metric rho^u");
    rho->add_option("--tol", o.tol, "endpoint tolerance");
    rho->add_option("--gap", o.gap, "bisection relative gap");
    auto* conv = app.add_subcommand("converge", "convergence-rate experiments");
    add_common(conv);
    conv->add_option("kind", converge_kind, "divergence | local-approx | cone | gromov")
        ->required();
    conv->add_option("--eps-grid", o.eps_grid, "comma-separated decreasing grid");
    conv->add_option("--samples", o.samples, "sample count per grid point");
    conv->add_option("--out", o.out_dir, "output directory");
    conv->add_flag("--serial", o.serial, "force the serial reference kernels");
    auto* cat = app.add_subcommand("catalog", "list or print built-in spaces");
    cat->add_option("name", catalog_name_arg, "fixture name");

    std::vector<const char*> argv;
    argv.push_back("ccw");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            app.exit(e);
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(o);
        if (frame->parsed()) return cmd_frame(o);
        if (nil->parsed()) return cmd_nilpotentize(o);
        if (lift->parsed()) return cmd_lift(o);
        if (rho->parsed()) return cmd_rho(o, rho_hat);
        if (conv->parsed()) return cmd_converge(o, converge_kind);
        if (cat->parsed()) return cmd_catalog(catalog_name_arg);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const StructuralDefect& e) {
        std::cerr << "structural defect: " << e.what() << "\n";
        return 3;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace ccw
