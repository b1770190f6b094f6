#pragma once

// The spinnet command line: parsing, dispatch and report formatting.
//
// Reports go to `out`, one JSON document (or text table) per command,
// except `geometry`, which writes one JSON line per sample followed by a
// summary line. Failures write a single JSON line to `err`.

#include "spinnet/error.hpp"
#include "spinnet/exact_value.hpp"
#include "spinnet/geometry.hpp"
#include "spinnet/graph.hpp"
#include "spinnet/montecarlo.hpp"
#include "spinnet/projector.hpp"
#include "spinnet/recoupling.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace spinnet {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInput = 2, kExitComputation = 3 };

namespace cli {

using Json = nlohmann::ordered_json;

/// Thrown for malformed option values that CLI11 itself cannot see.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Could not read the graph file.
class InputError : public Error {
public:
    using Error::Error;
};

inline Json rational_json(const ExactValue& v) {
    return Json{{"kind", "rational"}, {"num", numerator_string(v)}, {"den", denominator_string(v)}};
}

inline Json float_json(double value, double std_error, std::uint64_t samples, std::uint64_t seed) {
    return Json{{"kind", "float"}, {"value", value}, {"stderr", std_error}, {"samples", samples}, {"seed", seed}};
}

inline std::string format_double(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

inline LabeledGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_graph(text.str());
}

/// Parses "(0,1)(2,3)": two parenthesized groups of edge indices.
inline VertexSplit parse_split(const std::string& spec) {
    std::vector<std::vector<EdgeId>> groups;
    std::size_t i = 0;
    auto skip_space = [&] {
        while (i < spec.size() && std::isspace(static_cast<unsigned char>(spec[i]))) ++i;
    };
    auto fail = [&](const std::string& what) -> UsageError {
        return UsageError("bad --split '" + spec + "' at offset " + std::to_string(i) + ": " + what);
    };
    skip_space();
    while (i < spec.size()) {
        if (spec[i] != '(') throw fail("expected '('");
        ++i;
        std::vector<EdgeId> group;
        for (;;) {
            skip_space();
            std::size_t start = i;
            while (i < spec.size() && std::isdigit(static_cast<unsigned char>(spec[i]))) ++i;
            if (start == i) throw fail("expected an edge index");
            if (i - start > 9) throw fail("edge index too large");
            group.push_back(static_cast<EdgeId>(std::stoul(spec.substr(start, i - start))));
            skip_space();
            if (i < spec.size() && spec[i] == ',') {
                ++i;
                continue;
            }
            if (i < spec.size() && spec[i] == ')') {
                ++i;
                break;
            }
            throw fail("expected ',' or ')'");
        }
        groups.push_back(std::move(group));
        skip_space();
    }
    if (groups.size() != 2) throw fail("expected exactly two groups");
    return {groups[0], groups[1]};
}

struct Options {
    std::string file;
    std::string format = "json";
    std::string method = "exact";
    std::uint64_t samples = 100000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t chunk_size = kDefaultChunkSize;
    std::uint64_t term_budget = ExactOptions{}.term_budget;
    std::uint64_t step_budget = ExactOptions{}.step_budget;
    std::string vertex;
    std::string split;
    bool evaluate_terms = false;
    std::vector<Spin> spins;
    std::uint64_t geometry_samples = 1000;
};

inline void emit(std::ostream& out, const Options& o, const Json& j, const std::string& text) {
    if (o.format == "text") out << text;
    else out << j.dump() << '\n';
}

inline int cmd_check(const Options& o, std::ostream& out) {
    auto g = load_graph(o.file);
    auto report = check_admissibility(g);
    Json failures = Json::array();
    std::ostringstream text;
    text << (report.admissible ? "admissible" : "inadmissible") << '\n';
    for (const auto& f : report.failures) {
        failures.push_back(Json{{"vertex", f.name}, {"parity_failed", f.parity}, {"closure_failed", f.closure}, {"reason", f.reason()}});
        text << "  " << f.name << ": " << f.reason() << '\n';
    }
    Json j{{"status", report.admissible ? "admissible" : "inadmissible"},
           {"admissible", report.admissible},
           {"failures", failures},
           {"graph_digest", graph_digest(g)}};
    emit(out, o, j, text.str());
    return kExitOk;
}

inline int cmd_simplify(const Options& o, std::ostream& out) {
    auto g = load_graph(o.file);
    auto r = simplify(g);
    Json j{{"multiplier", rational_json(r.multiplier)},
           {"graph", serialize_graph(r.graph)},
           {"graph_digest", graph_digest(r.graph)}};
    emit(out, o, j, "multiplier: " + to_string(r.multiplier) + "\n" + serialize_graph(r.graph));
    return kExitOk;
}

inline int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    auto g = load_graph(o.file);
    const std::string digest = graph_digest(g);
    std::string method = o.method;
    std::string notice;

    Json value;
    std::string text_value;
    if (method == "exact") {
        try {
            ExactOptions eo;
            eo.term_budget = o.term_budget;
            eo.step_budget = o.step_budget;
            ExactValue v = eval_relativistic_exact(g, eo);
            value = rational_json(v);
            text_value = to_string(v);
        } catch (const BudgetExceededError& e) {
            notice = std::string("exact evaluation stopped (") + e.what() + "); fell back to contract";
            err << Json{{"notice", notice}}.dump() << '\n';
            method = "contract";
        }
    }
    if (method == "contract") {
        ContractOptions co;
        co.dimension_cap = dimension_cap_from_env();
        double v = contract_evaluate(g, co);
        value = float_json(v, 0.0, 0, 0);
        text_value = format_double(v);
    } else if (method == "mc") {
        MCOptions mo;
        mo.chunk_size = o.chunk_size;
        auto est = mc_evaluate(g, o.samples, o.seed, o.workers, mo);
        value = float_json(est.mean, est.std_error, est.n_samples, est.seed);
        text_value = format_double(est.mean) + " +- " + format_double(est.std_error) + " (" +
                     std::to_string(est.n_samples) + " samples, seed " + std::to_string(est.seed) + ")";
    }

    Json j{{"method", method}, {"value", value}, {"graph_digest", digest}};
    if (!notice.empty()) j["notice"] = notice;
    std::string text = "method: " + method + "\nvalue:  " + text_value + "\ndigest: " + digest + "\n";
    if (!notice.empty()) text += "notice: " + notice + "\n";
    emit(out, o, j, text);
    return kExitOk;
}

inline int cmd_expand(const Options& o, std::ostream& out) {
    auto g = load_graph(o.file);
    auto v = g.find_vertex(o.vertex);
    if (!v) throw GraphError("unknown vertex '" + o.vertex + "'");
    VertexSplit split = parse_split(o.split);
    for (const auto* group : {&split.first, &split.second})
        for (EdgeId e : *group)
            if (e >= g.edge_count()) throw GraphError("edge index " + std::to_string(e) + " out of range");
    auto sum = expand_vertex(g, *v, split);

    Json terms = Json::array();
    std::ostringstream text;
    ExactValue total = 0;
    for (const auto& t : sum.terms) {
        Json term{{"coefficient", rational_json(t.coefficient)},
                  {"graph", serialize_graph(t.graph)},
                  {"graph_digest", graph_digest(t.graph)}};
        text << "# coefficient " << to_string(t.coefficient) << '\n' << serialize_graph(t.graph);
        if (o.evaluate_terms) {
            ExactValue val = eval_relativistic_exact(t.graph);
            total += t.coefficient * val;
            term["value"] = rational_json(val);
            text << "# value " << to_string(val) << '\n';
        }
        terms.push_back(std::move(term));
    }
    Json j{{"vertex", o.vertex}, {"terms", terms}, {"graph_digest", graph_digest(g)}};
    if (o.evaluate_terms) {
        j["value"] = rational_json(total);
        text << "# total " << to_string(total) << '\n';
    }
    emit(out, o, j, text.str());
    return kExitOk;
}

inline int cmd_geometry(const Options& o, std::ostream& out) {
    if (o.spins.size() != 10) throw UsageError("--spins takes exactly 10 values");
    std::array<Spin, 10> spins{};
    for (std::size_t k = 0; k < 10; ++k) spins[k] = o.spins[k];

    GeometrySummary summary;
    std::vector<BatchStats> batches;
    const bool text = o.format == "text";
    if (text) out << "index status integrand angles\n";
    for_each_geometry(
        spins, o.geometry_samples, o.seed, o.workers,
        [&](const GeometrySample& s) {
            if (s.index % o.chunk_size == 0) batches.emplace_back();
            batches.back().add(s.integrand);
            switch (s.outcome.status) {
                case SimplexStatus::simplex: ++summary.simplex; break;
                case SimplexStatus::degenerate: ++summary.degenerate; break;
                case SimplexStatus::non_simplex: ++summary.non_simplex; break;
            }
            auto angles = angle_matrix(std::span<const GroupElement>(s.elements));
            std::array<double, 10> data{};
            for (std::size_t k = 0; k < 10; ++k) data[k] = angles[kK5Pairs[k][0]][kK5Pairs[k][1]].phi;
            if (text) {
                out << s.index << ' ' << to_string(s.outcome.status) << ' ' << format_double(s.integrand);
                for (double a : data) out << ' ' << format_double(a);
                out << '\n';
                return;
            }
            Json rec{{"kind", "sample"},
                     {"index", s.index},
                     {"status", to_string(s.outcome.status)},
                     {"integrand", s.integrand},
                     {"angles", data}};
            if (s.outcome.geometry) rec["weights"] = s.outcome.geometry->weights;
            else if (s.outcome.status == SimplexStatus::non_simplex) rec["null_vector"] = s.outcome.null_vector;
            out << rec.dump() << '\n';
        },
        o.chunk_size);
    summary.integrand = estimate_from_batches(batches, o.seed, o.chunk_size);

    const auto& est = summary.integrand;
    if (text) {
        out << "mean " << format_double(est.mean) << " stderr " << format_double(est.std_error) << " samples "
            << est.n_samples << " simplex " << summary.simplex << " non_simplex " << summary.non_simplex
            << " degenerate " << summary.degenerate << '\n';
    } else {
        out << Json{{"kind", "summary"},
                    {"mean", est.mean},
                    {"stderr", est.std_error},
                    {"samples", est.n_samples},
                    {"seed", est.seed},
                    {"simplex", summary.simplex},
                    {"non_simplex", summary.non_simplex},
                    {"degenerate", summary.degenerate}}
                   .dump()
            << '\n';
    }
    if (summary.degenerate == est.n_samples) throw GeometryError("every sample was degenerate");
    return kExitOk;
}

inline void report_error(std::ostream& err, const std::string& kind, const std::string& message, Json extra = Json::object()) {
    Json j{{"error", kind}, {"message", message}};
    for (auto& [k, v] : extra.items()) j[k] = v;
    err << j.dump() << '\n';
}

}  // namespace cli

/// Runs the command line on args (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using cli::Json;
    cli::Options o;
    CLI::App app{"Evaluate the classical spin network invariant of a spin-labelled graph", "spinnet"};
    app.require_subcommand(1);
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    };

    auto* check = app.add_subcommand("check", "Report admissibility of every vertex");
    check->add_option("FILE", o.file, "Graph file")->required();
    add_format(check);

    auto* simp = app.add_subcommand("simplify", "Apply the exact local rewrites");
    simp->add_option("FILE", o.file, "Graph file")->required();
    add_format(simp);

    auto* ev = app.add_subcommand("eval", "Evaluate the invariant");
    ev->add_option("FILE", o.file, "Graph file")->required();
    ev->add_option("--method", o.method, "exact, contract or mc")->check(CLI::IsMember({"exact", "contract", "mc"}));
    ev->add_option("--samples", o.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    ev->add_option("--seed", o.seed, "Monte Carlo seed");
    ev->add_option("--workers", o.workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);
    ev->add_option("--chunk-size", o.chunk_size, "Samples per random stream")->check(CLI::PositiveNumber);
    ev->add_option("--term-budget", o.term_budget, "Trivalent graphs allowed before falling back to contract")
        ->check(CLI::PositiveNumber);
    ev->add_option("--step-budget", o.step_budget, "Reduction steps allowed per trivalent graph")
        ->check(CLI::PositiveNumber);
    add_format(ev);

    auto* ex = app.add_subcommand("expand", "Expand a vertex into two joined by a new edge");
    ex->add_option("FILE", o.file, "Graph file")->required();
    ex->add_option("--vertex", o.vertex, "Vertex name")->required();
    ex->add_option("--split", o.split, "Edge index groups, e.g. \"(0,1)(2,3)\"")->required();
    ex->add_flag("--evaluate", o.evaluate_terms, "Also evaluate every term exactly and report the sum");
    add_format(ex);

    auto* geo = app.add_subcommand("geometry", "Sample K5 vertex variables as 4-simplex normals");
    geo->add_option("--spins", o.spins, "Ten K5 edge spins, pairs (0,1) (0,2) ... (3,4)")->required()->expected(10);
    geo->add_option("--samples", o.geometry_samples, "Samples")->check(CLI::PositiveNumber);
    geo->add_option("--seed", o.seed, "Seed");
    geo->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    geo->add_option("--chunk-size", o.chunk_size, "Samples per random stream")->check(CLI::PositiveNumber);
    add_format(geo);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        cli::report_error(err, "usage", e.what());
        return kExitUsage;
    }

    try {
        if (*check) return cli::cmd_check(o, out);
        if (*simp) return cli::cmd_simplify(o, out);
        if (*ev) return cli::cmd_eval(o, out, err);
        if (*ex) return cli::cmd_expand(o, out);
        if (*geo) return cli::cmd_geometry(o, out);
    } catch (const cli::UsageError& e) {
        cli::report_error(err, "usage", e.what());
        return kExitUsage;
    } catch (const ParseError& e) {
        cli::report_error(err, "parse", e.reason(), Json{{"line", e.line()}, {"column", e.column()}});
        return kExitInput;
    } catch (const cli::InputError& e) {
        cli::report_error(err, "input", e.what());
        return kExitInput;
    } catch (const GraphError& e) {
        cli::report_error(err, "input", e.what());
        return kExitInput;
    } catch (const DimensionCapError& e) {
        cli::report_error(err, "dimension_cap", e.what(), Json{{"requested", e.requested()}, {"cap", e.cap()}});
        return kExitComputation;
    } catch (const BudgetExceededError& e) {
        cli::report_error(err, "budget", e.what());
        return kExitComputation;
    } catch (const GeometryError& e) {
        cli::report_error(err, "geometry", e.what());
        return kExitComputation;
    } catch (const Error& e) {
        cli::report_error(err, "computation", e.what());
        return kExitComputation;
    } catch (const std::bad_alloc&) {
        cli::report_error(err, "computation", "out of memory");
        return kExitComputation;
    }
    cli::report_error(err, "usage", "no subcommand");
    return kExitUsage;
}

}  // namespace spinnet
