// Command-line front end for the weighted-sequence-space library: parses
// weight specs and parameters, runs the library operations, and emits
// byte-reproducible JSON/CSV reports suitable for plotting.
//
// Exit codes (frozen for CI use):
//   0  success (for verify-embed: all checks passed)
//   2  parse error (bad JSON, bad flag value, unreadable file)
//   3  precondition violation (including shape mismatches)
//   4  a bounded search exhausted its cap
//   5  verification failure (a certificate or check did not hold)
//   1  unexpected internal error
//
// JSON is the canonical format (sorted keys, 17-significant-digit doubles);
// CSV is a projection with stable documented columns.  Every report embeds
// the tool version and the resolved config: JSON reports as top-level keys,
// CSV reports as two leading '#' comment lines.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "garling/big_index.hpp"
#include "garling/conditionality.hpp"
#include "garling/construction.hpp"
#include "garling/embedding.hpp"
#include "garling/errors.hpp"
#include "garling/finseq.hpp"
#include "garling/norms.hpp"
#include "garling/report.hpp"
#include "garling/weights.hpp"

namespace {

using nlohmann::json;

constexpr const char* kToolName = "gwp";
constexpr const char* kToolVersion = "1.0.0";
// Fixed default seed for every randomized subcommand; override with --seed.
constexpr std::uint64_t kDefaultSeed = 1729;

const char* kDefaultWeight = R"({"family":"power","alpha":1.0})";

// ---------------------------------------------------------------------------
// Input helpers
// ---------------------------------------------------------------------------

// Inline JSON if the argument starts with '{' or '['; otherwise a file path.
json parse_json_arg(const std::string& arg, const std::string& what) {
    size_t b = arg.find_first_not_of(" \t\r\n");
    if (b != std::string::npos && (arg[b] == '{' || arg[b] == '[')) {
        try {
            return json::parse(arg);
        } catch (const json::exception& e) {
            throw garling::ParseError(what + ": " + e.what());
        }
    }
    std::ifstream in(arg);
    if (!in) throw garling::ParseError(what + ": cannot open file '" + arg + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw garling::ParseError(what + " (file '" + arg + "'): " + e.what());
    }
}

garling::Weight weight_from_arg(const std::string& arg) {
    return garling::Weight::from_json(parse_json_arg(arg, "--weight"));
}

// Accepts a bare coefficient array (positions 1..n) or an {offset, coeffs}
// object.
garling::FinSeq finseq_from_arg(const std::string& arg) {
    json j = parse_json_arg(arg, "--vec");
    try {
        if (j.is_array()) return garling::FinSeq(0, j.get<std::vector<double>>());
        return garling::FinSeq::from_json(j);
    } catch (const json::exception& e) {
        throw garling::ParseError(std::string("--vec: ") + e.what());
    }
}

// Decimal digits parse exactly; anything with '.', 'e', 'E' parses as a
// double and rounds up.
garling::BigIndex parse_big_arg(const std::string& arg, const std::string& what) {
    try {
        if (arg.find_first_of(".eE") != std::string::npos)
            return garling::big_index_from_double_ceil(std::stod(arg));
        return garling::big_index_from_string(arg);
    } catch (const std::exception& e) {
        throw garling::ParseError(what + ": " + e.what());
    }
}

// Content digest used to identify input artifacts in embedded configs without
// baking filesystem paths into reproducible output (FNV-1a, 64-bit).
std::string content_digest(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

garling::SpaceNorm space_from_flags(const std::string& space, const std::string& weight_arg,
                                    double p) {
    if (space == "garling") return garling::SpaceNorm::garling(weight_from_arg(weight_arg), p);
    if (space == "lorentz") return garling::SpaceNorm::lorentz(weight_from_arg(weight_arg), p);
    if (space == "ellp") return garling::SpaceNorm::ellp(p);
    if (space == "sup") return garling::SpaceNorm::sup();
    throw garling::ParseError("--space: unknown space '" + space + "'");
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct CommonOpts {
    std::string out;  // empty -> stdout
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--out", c.out, "Output file (default: stdout)");
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

void write_text(std::string body, const std::string& out_path) {
    if (body.empty() || body.back() != '\n') body.push_back('\n');
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw garling::ParseError("--out: cannot open '" + out_path + "' for writing");
    f << body;
    f.flush();
    if (!f) throw garling::ParseError("--out: write to '" + out_path + "' failed");
}

void emit_report(const CommonOpts& c, const json& config, const json& payload,
                 const std::string& csv_body) {
    if (c.format == "csv") {
        std::string text = std::string("# ") + kToolName + " " + kToolVersion + "\n# config " +
                           garling::canonical_json(config) + "\n" + csv_body;
        write_text(std::move(text), c.out);
        return;
    }
    json top;
    top["tool"] = kToolName;
    top["version"] = kToolVersion;
    top["config"] = config;
    top["report"] = payload;
    write_text(garling::canonical_json(top, 2), c.out);
}

// ---------------------------------------------------------------------------
// norm
// ---------------------------------------------------------------------------

struct NormCmd {
    std::string space = "garling";
    std::string weight = kDefaultWeight;
    double p = 1.0;
    std::string vec;
    CommonOpts common;
};

int run_norm(const NormCmd& o) {
    garling::SpaceNorm norm = space_from_flags(o.space, o.weight, o.p);
    garling::FinSeq f = finseq_from_arg(o.vec);

    double value = 0.0;
    json witness = nullptr;  // selection ordinals; only the Garling norm has one
    if (norm.kind == garling::SpaceNorm::Kind::Garling) {
        garling::GarlingResult r = garling::garling_norm(f, *norm.weight, norm.p);
        value = r.value;
        witness = r.witness;
    } else {
        value = garling::eval_norm(f, norm);
    }

    json config{{"subcommand", "norm"},
                {"space", norm.to_json()},
                {"vec", f.to_json()},
                {"format", o.common.format}};
    json payload{{"norm_kind", norm.label()}, {"value", value}, {"witness", witness}};
    std::string csv = "norm_kind,value,witness_json\n" + garling::csv_field(norm.label()) + "," +
                      garling::format_double_17(value) + "," +
                      garling::csv_field(garling::canonical_json(witness)) + "\n";
    emit_report(o.common, config, payload, csv);
    return 0;
}

// ---------------------------------------------------------------------------
// kappa
// ---------------------------------------------------------------------------

struct KappaCmd {
    int n = 0;
    double t = 1.1;
    std::string weight = kDefaultWeight;
    double p = 1.0;
    std::string k_floor = "1";
    std::string cap;  // empty -> library default (1e6)
    CommonOpts common;
};

int run_kappa(const KappaCmd& o) {
    garling::Weight w = weight_from_arg(o.weight);
    garling::BigIndex k_floor = parse_big_arg(o.k_floor, "--k-floor");
    garling::BigIndex cap = o.cap.empty() ? garling::BigIndex{1'000'000}
                                          : parse_big_arg(o.cap, "--cap");

    garling::KappaBuildReport report =
        garling::build_kappa(o.n, o.t, w, o.p, k_floor, {}, cap);

    json config{{"subcommand", "kappa"}, {"n", o.n},
                {"t", o.t},              {"weight", w.to_json()},
                {"p", o.p},              {"k_floor", garling::to_string(k_floor)},
                {"cap", garling::to_string(cap)},
                {"format", o.common.format}};
    std::string csv = "position,k\n";
    for (size_t i = 0; i < report.kappa.entries.size(); ++i)
        csv += std::to_string(i + 1) + "," + garling::to_string(report.kappa.entries[i]) + "\n";
    emit_report(o.common, config, report.to_json(), csv);
    return 0;
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

struct EmbedCmd {
    double eps = 0.0;
    int n = 0;
    std::string weight = R"({"family":"power","alpha":0.5})";
    double p = 2.0;
    std::string cap;  // empty -> library default (1e36)
    CommonOpts common;
};

int run_embed(const EmbedCmd& o) {
    garling::Weight w = weight_from_arg(o.weight);
    garling::PlanCaps caps;
    caps.k_cap = o.cap.empty() ? garling::default_plan_cap() : parse_big_arg(o.cap, "--cap");

    garling::EmbeddingPlan plan = garling::build_embedding_plan(o.eps, o.n, w, o.p, caps);

    json config{{"subcommand", "embed"}, {"eps", o.eps},
                {"n", o.n},              {"weight", w.to_json()},
                {"p", o.p},              {"cap", garling::to_string(caps.k_cap)},
                {"format", o.common.format}};
    std::string csv = "n,i,first,last,k\n";
    for (const auto& cell : plan.cells)
        csv += std::to_string(cell.n) + "," + std::to_string(cell.i) + "," +
               garling::to_string(cell.first) + "," + garling::to_string(cell.last) + "," +
               garling::to_string(cell.k) + "\n";
    emit_report(o.common, config, json{{"plan", plan.to_json()}}, csv);
    return 0;
}

// ---------------------------------------------------------------------------
// verify-embed
// ---------------------------------------------------------------------------

struct VerifyEmbedCmd {
    std::string plan;
    int trials = 200;
    std::uint64_t seed = kDefaultSeed;
    CommonOpts common;
};

// Accepts a bare plan object or a full `embed` report (plan under
// report.plan).
garling::EmbeddingPlan plan_from_arg(const std::string& arg) {
    json j = parse_json_arg(arg, "--plan");
    if (j.is_object() && j.contains("report")) j = j.at("report");
    if (j.is_object() && j.contains("plan")) j = j.at("plan");
    return garling::EmbeddingPlan::from_json(j);
}

int run_verify_embed(const VerifyEmbedCmd& o) {
    garling::EmbeddingPlan plan = plan_from_arg(o.plan);
    garling::VerificationReport report = garling::verify_embedding(plan, o.trials, o.seed);

    // Identify the plan by content, not by path: reports stay byte-identical
    // when the same plan is verified from different locations.
    json config{{"subcommand", "verify-embed"},
                {"plan_digest", content_digest(garling::canonical_json(plan.to_json()))},
                {"trials", o.trials},
                {"seed", o.seed},
                {"format", o.common.format}};
    emit_report(o.common, config, report.to_json(), report.to_csv());
    return report.pass ? 0 : 5;
}

// ---------------------------------------------------------------------------
// weight-report
// ---------------------------------------------------------------------------

struct WeightReportCmd {
    std::string weight = kDefaultWeight;
    std::string horizon = "1000000";
    double trend_epsilon = 0.05;
    CommonOpts common;
};

int run_weight_report(const WeightReportCmd& o) {
    garling::Weight w = weight_from_arg(o.weight);
    garling::BigIndex horizon = parse_big_arg(o.horizon, "--horizon");
    garling::RegularityReport rep = garling::regularity_report(w, horizon, o.trend_epsilon);
    const char* trend = rep.trend == garling::Trend::Growing ? "growing" : "bounded-looking";

    json config{{"subcommand", "weight-report"},
                {"weight", w.to_json()},
                {"horizon", garling::to_string(horizon)},
                {"trend_epsilon", o.trend_epsilon},
                {"format", o.common.format}};
    json payload{{"horizon", garling::to_string(rep.horizon)},
                 {"sup_ratio", rep.sup_ratio},
                 {"argmax", garling::to_string(rep.argmax)},
                 {"half_sup_ratio", rep.half_sup_ratio},
                 {"trend", trend},
                 {"trend_epsilon", rep.trend_epsilon}};
    std::string csv = "horizon,sup_ratio,argmax,half_sup_ratio,trend,trend_epsilon\n" +
                      garling::to_string(rep.horizon) + "," +
                      garling::format_double_17(rep.sup_ratio) + "," +
                      garling::to_string(rep.argmax) + "," +
                      garling::format_double_17(rep.half_sup_ratio) + "," + trend + "," +
                      garling::format_double_17(rep.trend_epsilon) + "\n";
    emit_report(o.common, config, payload, csv);
    return 0;
}

// ---------------------------------------------------------------------------
// cond
// ---------------------------------------------------------------------------

struct CondCmd {
    std::string basis = "summing";
    int d = 8;
    int levels = 2;
    std::string space = "sup";
    std::string weight = kDefaultWeight;
    double p = 1.0;
    std::string gauge = "L";
    int m_max = 8;
    std::string mode = "exact";
    std::uint64_t seed = kDefaultSeed;
    int restarts = 64;
    int iterations = 40;
    CommonOpts common;
};

garling::FiniteBasis basis_from_flags(const std::string& basis, int d, int levels,
                                      const std::string& space, const std::string& weight,
                                      double p) {
    if (basis == "unit") return garling::unit_vector_basis(d, space_from_flags(space, weight, p));
    if (basis == "summing") return garling::summing_basis(d);
    if (basis == "besov") return garling::besov_sum_basis(levels, p);
    throw garling::ParseError("--basis: unknown basis '" + basis + "'");
}

int run_cond(const CondCmd& o) {
    garling::FiniteBasis basis =
        basis_from_flags(o.basis, o.d, o.levels, o.space, o.weight, o.p);
    garling::GaugeMode mode =
        o.mode == "probe" ? garling::GaugeMode::Probe : garling::GaugeMode::Exact;
    garling::ProbeOptions opts{o.seed, o.restarts, o.iterations};
    garling::GaugeReport report = garling::gauge_report(basis, o.gauge, o.m_max, mode, opts);

    json config{{"subcommand", "cond"},
                {"basis", o.basis},
                {"d", o.d},
                {"levels", o.levels},
                {"space", o.basis == "unit" ? json(basis.ambient.to_json()) : json(nullptr)},
                {"p", o.p},
                {"gauge", o.gauge},
                {"m_max", o.m_max},
                {"mode", o.mode},
                {"seed", o.seed},
                {"restarts", o.restarts},
                {"iterations", o.iterations},
                {"format", o.common.format}};
    emit_report(o.common, config, report.to_json(), report.to_csv());
    return 0;
}

// ---------------------------------------------------------------------------
// greedy
// ---------------------------------------------------------------------------

struct GreedyCmd {
    std::string vec;
    int m = 1;
    int samples = 0;
    std::string basis = "unit";
    int d = 10;
    int levels = 2;
    std::string space = "sup";
    std::string weight = kDefaultWeight;
    double p = 1.0;
    std::uint64_t seed = kDefaultSeed;
    CommonOpts common;
};

int run_greedy(const GreedyCmd& o) {
    json jv = parse_json_arg(o.vec, "--vec");
    if (!jv.is_array()) throw garling::ParseError("--vec: greedy expects a JSON array");
    std::vector<double> coeffs;
    try {
        coeffs = jv.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw garling::ParseError(std::string("--vec: ") + e.what());
    }
    std::vector<int> set = garling::greedy_set(coeffs, o.m);

    json config{{"subcommand", "greedy"}, {"vec", jv},
                {"m", o.m},               {"samples", o.samples},
                {"basis", o.basis},       {"d", o.d},
                {"levels", o.levels},     {"p", o.p},
                {"seed", o.seed},         {"format", o.common.format}};
    json payload{{"m", o.m}, {"coeffs", jv}, {"greedy_set", set}};
    if (o.samples > 0) {
        garling::FiniteBasis basis =
            basis_from_flags(o.basis, o.d, o.levels, o.space, o.weight, o.p);
        payload["almost_greedy"] =
            garling::almost_greedy_ratio(basis, o.samples, o.seed).to_json();
    }
    std::string csv = "ordinal,index\n";
    for (size_t i = 0; i < set.size(); ++i)
        csv += std::to_string(i + 1) + "," + std::to_string(set[i]) + "\n";
    emit_report(o.common, config, payload, csv);
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"Weighted-sequence-space toolkit: norms, block constructions, "
                 "embedding plans, and basis diagnostics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

    NormCmd norm_o;
    CLI::App* norm_c = app.add_subcommand("norm", "Evaluate a sequence-space norm of a vector");
    norm_c->add_option("--space", norm_o.space, "Norm kind")
        ->check(CLI::IsMember({"garling", "lorentz", "ellp", "sup"}))
        ->capture_default_str();
    norm_c->add_option("--weight", norm_o.weight, "Weight spec (inline JSON or file path)")
        ->capture_default_str();
    norm_c->add_option("--p", norm_o.p, "Exponent p >= 1")->capture_default_str();
    norm_c->add_option("--vec", norm_o.vec,
                       "Vector: JSON array or {offset,coeffs} object, inline or file")
        ->required();
    add_common(norm_c, norm_o.common);

    KappaCmd kappa_o;
    CLI::App* kappa_c =
        app.add_subcommand("kappa", "Build a certified block-length tuple kappa");
    kappa_c->add_option("--n", kappa_o.n, "Number of blocks")->required();
    kappa_c->add_option("--t", kappa_o.t, "Norm budget t > 1")->capture_default_str();
    kappa_c->add_option("--weight", kappa_o.weight, "Weight spec (inline JSON or file path)")
        ->capture_default_str();
    kappa_c->add_option("--p", kappa_o.p, "Exponent p >= 1")->capture_default_str();
    kappa_c->add_option("--k-floor", kappa_o.k_floor, "Minimum admissible block length")
        ->capture_default_str();
    kappa_c->add_option("--cap", kappa_o.cap, "Search cap per block (default 1000000)");
    add_common(kappa_c, kappa_o.common);

    EmbedCmd embed_o;
    CLI::App* embed_c =
        app.add_subcommand("embed", "Build an embedding plan (triangular kappa array)");
    embed_c->add_option("--eps", embed_o.eps, "Distortion budget; t = sqrt(1+eps)")->required();
    embed_c->add_option("--n", embed_o.n, "Depth N (levels 1..N)")->required();
    embed_c->add_option("--weight", embed_o.weight, "Weight spec (inline JSON or file path)")
        ->capture_default_str();
    embed_c->add_option("--p", embed_o.p, "Exponent p >= 1")->capture_default_str();
    embed_c->add_option("--cap", embed_o.cap, "Search cap per block (default 1e36)");
    add_common(embed_c, embed_o.common);

    VerifyEmbedCmd verify_o;
    CLI::App* verify_c = app.add_subcommand(
        "verify-embed", "Re-verify an embedding plan; exit 5 if any check fails");
    verify_c->add_option("--plan", verify_o.plan, "Plan: file path or inline JSON")->required();
    verify_c->add_option("--trials", verify_o.trials, "Random trials per check family")
        ->capture_default_str();
    verify_c->add_option("--seed", verify_o.seed, "RNG seed (default 1729)")
        ->capture_default_str();
    add_common(verify_c, verify_o.common);

    WeightReportCmd wr_o;
    CLI::App* wr_c = app.add_subcommand(
        "weight-report", "Regularity/trend diagnostics for a weight sequence");
    wr_c->add_option("--weight", wr_o.weight, "Weight spec (inline JSON or file path)")
        ->capture_default_str();
    wr_c->add_option("--horizon", wr_o.horizon, "Scan horizon")->capture_default_str();
    wr_c->add_option("--trend-epsilon", wr_o.trend_epsilon,
                     "Relative sup-growth threshold for the growing verdict")
        ->capture_default_str();
    add_common(wr_c, wr_o.common);

    CondCmd cond_o;
    CLI::App* cond_c = app.add_subcommand(
        "cond", "Conditionality gauges L_m / k_m for a finite basis");
    cond_c->add_option("--basis", cond_o.basis, "Basis family")
        ->check(CLI::IsMember({"unit", "summing", "besov"}))
        ->capture_default_str();
    cond_c->add_option("--d", cond_o.d, "Dimension (unit, summing)")->capture_default_str();
    cond_c->add_option("--levels", cond_o.levels, "Levels (besov)")->capture_default_str();
    cond_c->add_option("--space", cond_o.space, "Ambient norm kind (unit)")
        ->check(CLI::IsMember({"garling", "lorentz", "ellp", "sup"}))
        ->capture_default_str();
    cond_c->add_option("--weight", cond_o.weight, "Ambient weight spec (unit)")
        ->capture_default_str();
    cond_c->add_option("--p", cond_o.p, "Exponent p (unit ambient / besov outer sum)")
        ->capture_default_str();
    cond_c->add_option("--gauge", cond_o.gauge, "Gauge kind")
        ->check(CLI::IsMember({"L", "k"}))
        ->capture_default_str();
    cond_c->add_option("--m-max", cond_o.m_max, "Report entries for m = 1..m_max")
        ->capture_default_str();
    cond_c->add_option("--mode", cond_o.mode, "Exact enumeration or seeded probe")
        ->check(CLI::IsMember({"exact", "probe"}))
        ->capture_default_str();
    cond_c->add_option("--seed", cond_o.seed, "Probe seed (default 1729)")
        ->capture_default_str();
    cond_c->add_option("--restarts", cond_o.restarts, "Probe restarts")->capture_default_str();
    cond_c->add_option("--iterations", cond_o.iterations, "Probe ascent iterations")
        ->capture_default_str();
    add_common(cond_c, cond_o.common);

    GreedyCmd greedy_o;
    CLI::App* greedy_c = app.add_subcommand(
        "greedy", "Greedy index set of a coefficient vector (optionally an "
                  "almost-greedy ratio estimate for a basis)");
    greedy_c->add_option("--vec", greedy_o.vec, "Coefficient vector: JSON array, inline or file")
        ->required();
    greedy_c->add_option("--m", greedy_o.m, "Greedy set size")->required();
    greedy_c->add_option("--samples", greedy_o.samples,
                         "If > 0, also estimate the almost-greedy ratio of --basis")
        ->capture_default_str();
    greedy_c->add_option("--basis", greedy_o.basis, "Basis family for the estimate")
        ->check(CLI::IsMember({"unit", "summing", "besov"}))
        ->capture_default_str();
    greedy_c->add_option("--d", greedy_o.d, "Dimension (unit, summing)")
        ->capture_default_str();
    greedy_c->add_option("--levels", greedy_o.levels, "Levels (besov)")->capture_default_str();
    greedy_c->add_option("--space", greedy_o.space, "Ambient norm kind (unit)")
        ->check(CLI::IsMember({"garling", "lorentz", "ellp", "sup"}))
        ->capture_default_str();
    greedy_c->add_option("--weight", greedy_o.weight, "Ambient weight spec (unit)")
        ->capture_default_str();
    greedy_c->add_option("--p", greedy_o.p, "Exponent p (unit ambient / besov outer sum)")
        ->capture_default_str();
    greedy_c->add_option("--seed", greedy_o.seed, "Sample seed (default 1729)")
        ->capture_default_str();
    add_common(greedy_c, greedy_o.common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help / --version
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (norm_c->parsed()) return run_norm(norm_o);
        if (kappa_c->parsed()) return run_kappa(kappa_o);
        if (embed_c->parsed()) return run_embed(embed_o);
        if (verify_c->parsed()) return run_verify_embed(verify_o);
        if (wr_c->parsed()) return run_weight_report(wr_o);
        if (cond_c->parsed()) return run_cond(cond_o);
        if (greedy_c->parsed()) return run_greedy(greedy_o);
        std::cerr << kToolName << ": no subcommand\n";
        return 2;
    } catch (const garling::ParseError& e) {
        std::cerr << kToolName << ": parse error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << kToolName << ": parse error: " << e.what() << '\n';
        return 2;
    } catch (const garling::PreconditionError& e) {
        std::cerr << kToolName << ": precondition violated: " << e.what() << '\n';
        return 3;
    } catch (const garling::ShapeError& e) {
        std::cerr << kToolName << ": shape mismatch: " << e.what() << '\n';
        return 3;
    } catch (const garling::CapExceededError& e) {
        std::cerr << kToolName << ": cap exceeded: " << e.what() << '\n';
        return 4;
    } catch (const garling::VerificationError& e) {
        std::cerr << kToolName << ": verification failure: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << kToolName << ": internal error: " << e.what() << '\n';
        return 1;
    }
}
