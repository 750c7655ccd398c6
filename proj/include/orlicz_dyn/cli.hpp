#pragma once

// Scenario files, report/trace writers and the batch runner behind the
// orlicz_dyn command line tool.

#include "dynamics.hpp"
#include "error.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace orlicz_dyn::cli {

using nlohmann::json;

enum class Mode { DisjointTransitive, SameWeight, DisjointMixing, Chaotic, DisjointChaotic, Witness };

inline std::string to_string(Mode m) {
    switch (m) {
    case Mode::DisjointTransitive: return "disjoint_transitive";
    case Mode::SameWeight: return "same_weight";
    case Mode::DisjointMixing: return "disjoint_mixing";
    case Mode::Chaotic: return "chaotic";
    case Mode::DisjointChaotic: return "disjoint_chaotic";
    case Mode::Witness: return "witness";
    }
    return "unknown";
}

enum ExitStatus : int { kVerified = 0, kError = 1, kNotVerified = 2, kRefused = 3 };

struct WitnessSpec {
    OrliczVector f;
    std::vector<OrliczVector> targets;
    std::optional<std::int64_t> n;
    std::optional<CompactSet> e;
};

struct ExperimentConfig {
    Mode mode = Mode::DisjointTransitive;
    Scenario scenario;
    std::size_t chaos_operator = 0;  // 0-based
    std::optional<WitnessSpec> witness;
    std::int64_t seed = 0;
    json raw;
};

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool write_json = true;
    bool write_csv = true;
    bool override_diagnostics = false;
};

namespace detail {

[[noreturn]] inline void bad_field(const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidConfig, "field '" + field + "': " + why);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) bad_field(path + key, "missing");
    return obj.at(key);
}

inline double number(const json& v, const std::string& field) {
    if (!v.is_number()) bad_field(field, "expected a number");
    return v.get<double>();
}

inline std::int64_t integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) bad_field(field, "expected an integer");
    return v.get<std::int64_t>();
}

inline std::vector<double> number_array(const json& v, const std::string& field) {
    if (!v.is_array()) bad_field(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

template <class Fn>
auto guarded(const std::string& field, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidConfig) throw;
        bad_field(field, e.what());
    }
}

} // namespace detail

inline GroupModel parse_group(const json& j) {
    using detail::bad_field;
    if (!j.is_object()) bad_field("group", "expected an object");
    const auto& kind_v = detail::require(j, "kind", "group.");
    if (!kind_v.is_string()) bad_field("group.kind", "expected a string");
    const auto kind = kind_v.get<std::string>();
    return detail::guarded("group", [&] {
        if (kind == "int_line") return GroupModel::int_line();
        if (kind == "int_lattice") {
            return GroupModel::int_lattice(
                static_cast<std::size_t>(detail::integer(detail::require(j, "dim", "group."), "group.dim")));
        }
        if (kind == "heisenberg_int") return GroupModel::heisenberg_int();
        if (kind == "lattice_line") {
            return GroupModel::lattice_line(detail::number(detail::require(j, "h", "group."), "group.h"));
        }
        if (kind == "heisenberg_lattice") {
            return GroupModel::heisenberg_lattice(detail::number(detail::require(j, "h", "group."), "group.h"));
        }
        bad_field("group.kind", "unknown kind '" + kind + "'");
    });
}

inline YoungFunction parse_young(const json& j) {
    using detail::bad_field;
    if (!j.is_object()) bad_field("young", "expected an object");
    const auto& fam_v = detail::require(j, "family", "young.");
    if (!fam_v.is_string()) bad_field("young.family", "expected a string");
    const auto fam = fam_v.get<std::string>();
    return detail::guarded("young", [&] {
        if (fam == "power") return YoungFunction::power(detail::number(detail::require(j, "p", "young."), "young.p"));
        if (fam == "powerlog") {
            return YoungFunction::power_log(detail::number(detail::require(j, "alpha", "young."), "young.alpha"));
        }
        if (fam == "custom") {
            const auto& s = detail::require(j, "samples", "young.");
            if (!s.is_array()) bad_field("young.samples", "expected [[t, phi], ...]");
            std::vector<std::pair<double, double>> samples;
            for (const auto& pt : s) {
                const auto v = detail::number_array(pt, "young.samples");
                if (v.size() != 2) bad_field("young.samples", "each sample must be [t, phi]");
                samples.emplace_back(v[0], v[1]);
            }
            return YoungFunction::custom(samples);
        }
        bad_field("young.family", "unknown family '" + fam + "'");
    });
}

inline Element parse_element(const GroupModel& model, const json& j, const std::string& field) {
    const auto coords = detail::number_array(j, field);
    return detail::guarded(field, [&] { return model.element_from_coords(coords); });
}

inline Weight parse_weight(const GroupModel& model, const json& j, const std::string& field) {
    using detail::bad_field;
    if (!j.is_object()) bad_field(field, "expected an object");
    const auto& rule_v = detail::require(j, "rule", field + ".");
    if (!rule_v.is_string()) bad_field(field + ".rule", "expected a string");
    const auto rule = rule_v.get<std::string>();
    return detail::guarded(field, [&] {
        if (rule == "constant") return Weight::constant(detail::number(detail::require(j, "c", field + "."), field + ".c"));
        if (rule == "clamp_exp") {
            const auto coord = detail::integer(detail::require(j, "coord", field + "."), field + ".coord");
            if (coord < 0 || static_cast<std::size_t>(coord) >= model.dim()) {
                bad_field(field + ".coord", "coordinate index out of range for the group");
            }
            return Weight::clamp_exp(detail::number(detail::require(j, "base", field + "."), field + ".base"),
                                     static_cast<std::size_t>(coord),
                                     detail::number(detail::require(j, "lo", field + "."), field + ".lo"),
                                     detail::number(detail::require(j, "hi", field + "."), field + ".hi"));
        }
        if (rule == "table") {
            std::map<Element, double> values;
            if (j.contains("entries")) {
                const auto& entries = j.at("entries");
                if (!entries.is_array()) bad_field(field + ".entries", "expected [[coords, value], ...]");
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    const auto f = field + ".entries[" + std::to_string(i) + "]";
                    const auto& e = entries[i];
                    if (!e.is_array() || e.size() != 2) bad_field(f, "expected [coords, value]");
                    values[parse_element(model, e[0], f)] = detail::number(e[1], f);
                }
            }
            return Weight::table(std::move(values),
                                 detail::number(detail::require(j, "default", field + "."), field + ".default"));
        }
        bad_field(field + ".rule", "unknown rule '" + rule + "'");
    });
}

inline CompactSet parse_set(const GroupModel& model, const json& j, const std::string& field) {
    using detail::bad_field;
    if (!j.is_object()) bad_field(field, "expected {\"box\": ...} or {\"points\": ...}");
    if (j.contains("box")) {
        const auto& box = j.at("box");
        const auto lo = detail::number_array(detail::require(box, "lo", field + ".box."), field + ".box.lo");
        const auto hi = detail::number_array(detail::require(box, "hi", field + ".box."), field + ".box.hi");
        return detail::guarded(field, [&] { return CompactSet::box(model, lo, hi); });
    }
    if (j.contains("points")) {
        const auto& pts = j.at("points");
        if (!pts.is_array()) bad_field(field + ".points", "expected an array of coordinate arrays");
        std::vector<Element> out;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            out.push_back(parse_element(model, pts[i], field + ".points[" + std::to_string(i) + "]"));
        }
        return CompactSet(std::move(out));
    }
    bad_field(field, "expected \"box\" or \"points\"");
}

inline OrliczVector parse_vector(const GroupModel& model, const json& j, const std::string& field) {
    if (!j.is_array()) detail::bad_field(field, "expected [[coords, value], ...]");
    OrliczVector v(model);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto f = field + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) detail::bad_field(f, "expected [coords, value]");
        v.add(parse_element(model, j[i][0], f), detail::number(j[i][1], f));
    }
    return v;
}

inline json vector_to_json(const OrliczVector& v) {
    json out = json::array();
    const auto& model = v.model();
    for (const auto& [g, val] : v) {
        json coords = json::array();
        for (std::size_t j = 0; j < model.dim(); ++j) {
            if (model.is_counting()) {
                coords.push_back(g[j]);
            } else {
                coords.push_back(model.coord(g, j));
            }
        }
        out.push_back(json::array({coords, val}));
    }
    return out;
}

inline Mode parse_mode(const std::string& s) {
    if (s == "disjoint_transitive") return Mode::DisjointTransitive;
    if (s == "same_weight") return Mode::SameWeight;
    if (s == "disjoint_mixing") return Mode::DisjointMixing;
    if (s == "chaotic") return Mode::Chaotic;
    if (s == "disjoint_chaotic") return Mode::DisjointChaotic;
    if (s == "witness") return Mode::Witness;
    detail::bad_field("mode", "unknown mode '" + s + "'");
}

inline ExperimentConfig parse_config(const json& j) {
    using detail::bad_field;
    using detail::require;
    if (!j.is_object()) bad_field("<root>", "expected a JSON object");
    ExperimentConfig cfg;
    cfg.raw = j;
    const auto& mode_v = require(j, "mode", "");
    if (!mode_v.is_string()) bad_field("mode", "expected a string");
    cfg.mode = parse_mode(mode_v.get<std::string>());

    auto& s = cfg.scenario;
    s.model = parse_group(require(j, "group", ""));
    if (j.contains("young")) s.phi = parse_young(j.at("young"));
    s.a = parse_element(s.model, require(j, "a", ""), "a");

    if (j.contains("weights")) {
        const auto& ws = j.at("weights");
        if (!ws.is_array()) bad_field("weights", "expected an array of weight objects");
        for (std::size_t i = 0; i < ws.size(); ++i) {
            s.weights.push_back(parse_weight(s.model, ws[i], "weights[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("powers")) {
        const auto& ps = j.at("powers");
        if (!ps.is_array()) bad_field("powers", "expected an array of integers");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            s.powers.push_back(detail::integer(ps[i], "powers[" + std::to_string(i) + "]"));
        }
    }
    if (j.contains("weight")) {
        if (!s.weights.empty()) bad_field("weight", "give either 'weight' or 'weights', not both");
        const Weight w = parse_weight(s.model, j.at("weight"), "weight");
        const std::size_t count = s.powers.empty() ? 1 : s.powers.size();
        s.weights.assign(count, w);
    }
    if (s.weights.empty()) bad_field("weights", "missing");
    if (s.powers.empty()) {
        for (std::size_t l = 0; l < s.weights.size(); ++l) s.powers.push_back(static_cast<std::int64_t>(l + 1));
    }
    if (s.powers.size() != s.weights.size()) bad_field("powers", "length must match the number of weights");

    s.k = parse_set(s.model, require(j, "K", ""), "K");
    s.epsilon = detail::number(require(j, "epsilon", ""), "epsilon");
    s.n_max = detail::integer(require(j, "n_max", ""), "n_max");
    if (j.contains("e_k_policy")) {
        s.e_k_policy.deficit_cap =
            detail::number(require(j.at("e_k_policy"), "deficit_cap", "e_k_policy."), "e_k_policy.deficit_cap");
    }
    if (j.contains("chaos")) {
        s.chaos_terms = detail::integer(require(j.at("chaos"), "t_max", "chaos."), "chaos.t_max");
    }
    if (j.contains("aperiodicity_n_max")) {
        s.aperiodicity_n_max = detail::integer(j.at("aperiodicity_n_max"), "aperiodicity_n_max");
    }
    if (j.contains("mixing_min_window")) {
        s.mixing_min_window = detail::integer(j.at("mixing_min_window"), "mixing_min_window");
    }
    if (j.contains("override_diagnostics")) {
        if (!j.at("override_diagnostics").is_boolean()) bad_field("override_diagnostics", "expected a boolean");
        s.override_diagnostics = j.at("override_diagnostics").get<bool>();
    }
    if (j.contains("operator")) {
        const auto op = detail::integer(j.at("operator"), "operator");
        if (op < 1 || static_cast<std::size_t>(op) > s.weights.size()) bad_field("operator", "must be in [1, L]");
        cfg.chaos_operator = static_cast<std::size_t>(op - 1);
    }
    if (j.contains("seed")) cfg.seed = detail::integer(j.at("seed"), "seed");

    // structural invariants, reported against the config rather than the checker
    const std::size_t min_ops = (cfg.mode == Mode::Chaotic) ? 1 : 2;
    detail::guarded("scenario", [&] {
        s.validate(min_ops);
        return 0;
    });

    if (cfg.mode == Mode::Witness) {
        const auto& w = require(j, "witness", "");
        WitnessSpec spec{parse_vector(s.model, require(w, "f", "witness."), "witness.f"), {}, std::nullopt,
                         std::nullopt};
        if (w.contains("targets")) {
            const auto& ts = w.at("targets");
            if (!ts.is_array()) bad_field("witness.targets", "expected an array of vectors");
            for (std::size_t i = 0; i < ts.size(); ++i) {
                spec.targets.push_back(parse_vector(s.model, ts[i], "witness.targets[" + std::to_string(i) + "]"));
            }
        }
        if (w.contains("n")) {
            spec.n = detail::integer(w.at("n"), "witness.n");
            if (*spec.n < 0) bad_field("witness.n", "must be >= 0");
        }
        if (w.contains("E")) spec.e = parse_set(s.model, w.at("E"), "witness.E");
        cfg.witness = std::move(spec);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, "config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

/// Trace CSV: n, one column per sup quantity, e_k_deficit.
inline std::string trace_csv(const ConditionReport& report) {
    std::ostringstream out;
    out << "n";
    for (const auto& c : report.columns) out << ',' << c;
    out << ",e_k_deficit\n";
    for (const auto& row : report.trace) {
        out << row.n;
        for (double v : row.values) out << ',' << format_value(v);
        out << ',' << format_value(row.e_k_deficit) << '\n';
    }
    return out.str();
}

inline json report_summary(const ConditionReport& r) {
    json j;
    j["mode"] = r.mode;
    j["verdict"] = to_string(r.verdict);
    j["n_star"] = r.n_star ? json(*r.n_star) : json(nullptr);
    j["reason"] = r.reason;
    return j;
}

inline json report_to_json(const ConditionReport& r, const ExperimentConfig& cfg) {
    json j = report_summary(r);
    if (r.n_tail) j["n_tail"] = *r.n_tail;
    if (r.aperiodicity) {
        static constexpr const char* names[] = {"bounded", "not_aperiodic_within_bound", "periodic"};
        j["aperiodicity"] = {{"status", names[static_cast<int>(r.aperiodicity->status)]},
                             {"M", r.aperiodicity->m},
                             {"scan", r.aperiodicity->n_max}};
    }
    if (r.agrees_with_general) j["agrees_with_general"] = *r.agrees_with_general;
    if (!r.failing_operators.empty()) {
        json ops = json::array();
        for (auto l : r.failing_operators) ops.push_back(l + 1);
        j["failing_operators"] = ops;
    }
    if (!r.sub_reports.empty()) {
        json subs = json::array();
        for (std::size_t l = 0; l < r.sub_reports.size(); ++l) {
            auto sub = report_summary(r.sub_reports[l]);
            sub["operator"] = l + 1;
            subs.push_back(sub);
        }
        j["sub_reports"] = subs;
    }
    j["columns"] = r.columns;
    const auto pick = r.n_tail ? r.n_tail : r.n_star;
    if (pick && *pick >= 1 && static_cast<std::size_t>(*pick) <= r.trace.size()) {
        const auto& row = r.trace[static_cast<std::size_t>(*pick - 1)];
        json vals;
        for (std::size_t q = 0; q < r.columns.size(); ++q) vals[r.columns[q]] = row.values[q];
        j["values_at_n"] = vals;
        j["e_k_deficit"] = row.e_k_deficit;
    }
    j["parameters"] = cfg.raw;
    j["seed"] = cfg.seed;
    return j;
}

inline int exit_status(Verdict v) {
    switch (v) {
    case Verdict::Verified: return kVerified;
    case Verdict::NotVerifiedWithinBound: return kNotVerified;
    case Verdict::Refused: return kRefused;
    }
    return kError;
}

struct RunResult {
    ConditionReport report;
    json document;
    int status = kError;
};

/// Dispatches the configured checker and assembles the JSON report.
inline RunResult evaluate(ExperimentConfig cfg, bool override_diagnostics = false) {
    auto& s = cfg.scenario;
    if (override_diagnostics) s.override_diagnostics = true;
    RunResult out;
    switch (cfg.mode) {
    case Mode::DisjointTransitive: out.report = check_disjoint_transitive(s); break;
    case Mode::SameWeight: out.report = check_same_weight(s); break;
    case Mode::DisjointMixing: out.report = check_disjoint_mixing(s); break;
    case Mode::Chaotic: out.report = check_chaotic(cfg.chaos_operator, s); break;
    case Mode::DisjointChaotic: out.report = check_disjoint_chaotic(s); break;
    case Mode::Witness: break;
    }

    if (cfg.mode == Mode::Witness) {
        const auto& spec = *cfg.witness;
        // the checker supplies refusals and n*; an explicit witness.n overrides n*
        out.report = check_disjoint_transitive(s);
        out.report.mode = "witness";
        const bool refused = out.report.verdict == Verdict::Refused;
        const std::int64_t n = spec.n.value_or(out.report.n_star.value_or(-1));
        out.document = report_to_json(out.report, cfg);
        if (!refused && n >= 0) {
            const CompactSet e = spec.e ? *spec.e : s.k;
            const auto v = build_witness(s, spec.f, spec.targets, n, e);
            const auto res = verify_witness(s, v, spec.f, spec.targets, n);
            const auto bounds = witness_bounds(s, spec.f, spec.targets, n, e);
            json w;
            w["n"] = n;
            w["vector"] = vector_to_json(v);
            w["rho0"] = res.rho0;
            w["rho"] = res.rho;
            w["rho0_bound"] = bounds.rho0;
            w["rho_bound"] = bounds.rho;
            out.document["witness"] = w;
        }
        out.status = exit_status(out.report.verdict);
        return out;
    }

    out.document = report_to_json(out.report, cfg);
    if (cfg.mode == Mode::Chaotic && out.report.verified()) {
        json pp;
        try {
            const auto op = s.op(cfg.chaos_operator);
            const auto period = *out.report.n_star * s.powers[cfg.chaos_operator];
            const auto point = build_periodic_point(op, s.phi, indicator(s.model, s.k), s.k, period,
                                                    s.chaos_terms);
            const auto residual = luxemburg_norm(op.apply_T(point.p, period) - point.p, s.phi);
            pp = {{"period", period},
                  {"t_max", s.chaos_terms},
                  {"support_size", point.p.size()},
                  {"tail_bound", point.tail_bound},
                  {"residual", residual}};
        } catch (const Error& e) {
            pp = {{"error", e.what()}};
        }
        out.document["periodic_point"] = pp;
    }
    out.status = exit_status(out.report.verdict);
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path.string() + "'");
    f << contents;
}

inline std::string summary_line(const ConditionReport& r) {
    std::string line = r.mode + ": " + to_string(r.verdict);
    if (r.n_star) line += " n*=" + std::to_string(*r.n_star);
    if (r.n_tail) line += " n_tail=" + std::to_string(*r.n_tail);
    if (!r.reason.empty()) line += " (" + r.reason + ")";
    return line;
}

/// `check`: writes report.json / trace.csv and returns the exit status.
inline int run(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& out,
               std::ostream& err) {
    try {
        auto cfg = load_config(config_path);
        auto result = evaluate(std::move(cfg), opts.override_diagnostics);
        std::filesystem::create_directories(opts.out_dir);
        if (opts.write_json) write_file(opts.out_dir / "report.json", result.document.dump(2) + "\n");
        if (opts.write_csv) write_file(opts.out_dir / "trace.csv", trace_csv(result.report));
        auto line = summary_line(result.report);
        if (result.document.contains("witness")) {
            const auto& w = result.document["witness"];
            line += " witness n=" + std::to_string(w["n"].get<std::int64_t>()) +
                    " rho0=" + format_value(w["rho0"].get<double>());
        }
        out << line << '\n';
        return result.status;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

/// `trace`: writes only trace.csv.
inline int emit_series(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& out,
                       std::ostream& err) {
    RunOptions csv_only = opts;
    csv_only.write_json = false;
    csv_only.write_csv = true;
    return run(config_path, csv_only, out, err);
}

} // namespace orlicz_dyn::cli
