#include <orlicz_dyn/cli.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace orlicz_dyn;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = ORLICZ_DYN_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("orlicz_dyn_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const json& j) {
    const auto p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

json z_step_config(const std::string& mode) { return load(kScenarios / ("z_step_" + mode + ".json")); }

struct Outcome {
    int status;
    std::string out;
    std::string err;
};

Outcome run_check(const fs::path& config, const fs::path& out_dir, bool override_diag = false) {
    cli::RunOptions opts;
    opts.out_dir = out_dir;
    opts.override_diagnostics = override_diag;
    std::ostringstream out;
    std::ostringstream err;
    const int status = cli::run(config, opts, out, err);
    return {status, out.str(), err.str()};
}

std::string parse_error(const json& j) {
    try {
        cli::parse_config(j);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
        return e.what();
    }
    return "";
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
    return cells;
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(ORLICZ_DYN_BIN) + " " + args + " > /dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

} // namespace

TEST(CliConfig, ParsesHeisenbergExample) {
    const auto cfg = cli::load_config(kScenarios / "heisenberg_example1.json");
    EXPECT_EQ(cfg.mode, cli::Mode::DisjointTransitive);
    EXPECT_EQ(cfg.scenario.model.kind(), GroupKind::HeisenbergInt);
    EXPECT_EQ(cfg.scenario.a, (Element{1, 0, 2}));
    EXPECT_EQ(cfg.scenario.k.size(), 343u);
    EXPECT_EQ(cfg.scenario.powers, (std::vector<std::int64_t>{1, 2}));
    EXPECT_EQ(cfg.scenario.epsilon, 1e-3);
}

TEST(CliConfig, DefaultsAndSharedWeight) {
    json j = z_step_config("disjoint_transitive");
    j.erase("powers");
    j.erase("weight");
    j["weights"] = json::array({json{{"rule", "constant"}, {"c", 2.0}}, json{{"rule", "constant"}, {"c", 3.0}}});
    const auto cfg = cli::parse_config(j);
    EXPECT_EQ(cfg.scenario.powers, (std::vector<std::int64_t>{1, 2}));
    EXPECT_EQ(cfg.scenario.phi.eval(2.0), 2.0);  // Power(2) default
    EXPECT_EQ(cfg.seed, 0);
}

TEST(CliConfig, ErrorsNameTheField) {
    auto base = z_step_config("disjoint_transitive");
    auto with = [&](const std::string& key, json value) {
        json j = base;
        j[key] = std::move(value);
        return j;
    };
    auto without = [&](const std::string& key) {
        json j = base;
        j.erase(key);
        return j;
    };
    EXPECT_NE(parse_error(without("mode")).find("'mode'"), std::string::npos);
    EXPECT_NE(parse_error(with("mode", "sideways")).find("'mode'"), std::string::npos);
    EXPECT_NE(parse_error(with("group", json{{"kind", "torus"}})).find("'group.kind'"), std::string::npos);
    EXPECT_NE(parse_error(with("group", json{{"kind", "lattice_line"}})).find("'group.h'"), std::string::npos);
    EXPECT_NE(parse_error(with("a", json::array({0.5}))).find("'a'"), std::string::npos);
    EXPECT_NE(parse_error(with("a", "one")).find("'a'"), std::string::npos);
    EXPECT_NE(parse_error(with("epsilon", "small")).find("'epsilon'"), std::string::npos);
    EXPECT_NE(parse_error(without("n_max")).find("'n_max'"), std::string::npos);
    EXPECT_NE(parse_error(with("n_max", 2.5)).find("'n_max'"), std::string::npos);
    json listed = without("weight");
    listed["weights"] = json::array({base["weight"], base["weight"]});
    listed["powers"] = json::array({1, 2, 3});
    EXPECT_NE(parse_error(listed).find("'powers'"), std::string::npos);
    listed["weights"] = json::array();
    EXPECT_NE(parse_error(listed).find("'weights'"), std::string::npos);
    listed = base;
    listed["weights"] = json::array({base["weight"], base["weight"]});
    EXPECT_NE(parse_error(listed).find("not both"), std::string::npos);
    EXPECT_NE(parse_error(with("powers", json::array({2, 1}))).find("'scenario'"), std::string::npos);
    EXPECT_NE(parse_error(with("young", json{{"family", "power"}, {"p", 0.5}})).find("'young'"), std::string::npos);
    EXPECT_NE(parse_error(with("young", json{{"family", "exp"}})).find("'young.family'"), std::string::npos);
    EXPECT_NE(parse_error(with("K", json{{"ball", 3}})).find("'K'"), std::string::npos);
    EXPECT_NE(parse_error(with("weight", json{{"rule", "clamp_exp"}, {"base", 2.0}, {"coord", 4}, {"lo", -1},
                                              {"hi", 1}}))
                  .find("'weight.coord'"),
              std::string::npos);
    EXPECT_NE(parse_error(with("weight", json{{"rule", "constant"}, {"c", -1.0}})).find("'weight'"),
              std::string::npos);
    EXPECT_NE(parse_error(with("override_diagnostics", 1)).find("'override_diagnostics'"), std::string::npos);
    EXPECT_NE(parse_error(with("operator", 3)).find("'operator'"), std::string::npos);
    EXPECT_NE(parse_error(json::array()).find("'<root>'"), std::string::npos);

    json one_op = base;
    one_op["powers"] = json::array({1});
    EXPECT_NE(parse_error(one_op).find("at least 2 operators"), std::string::npos);
    one_op["mode"] = "chaotic";
    EXPECT_EQ(parse_error(one_op), "");

    json w = z_step_config("witness");
    w["witness"].erase("f");
    EXPECT_NE(parse_error(w).find("'witness.f'"), std::string::npos);
    w = z_step_config("witness");
    w["witness"]["n"] = -1;
    EXPECT_NE(parse_error(w).find("'witness.n'"), std::string::npos);
}

TEST(CliConfig, ParsesEveryWeightRuleAndSet) {
    json j = z_step_config("disjoint_transitive");
    j.erase("weight");
    j["weights"] = json::array({json{{"rule", "table"}, {"default", 2.0}, {"entries", json::array({json::array({json::array({0}), 0.5})})}},
                                json{{"rule", "constant"}, {"c", 2.0}}});
    j["K"] = json{{"points", json::array({json::array({0}), json::array({3}), json::array({0})})}};
    j["young"] = json{{"family", "custom"}, {"samples", json::array({json::array({0, 0}), json::array({1, 1}),
                                                                     json::array({2, 3})})}};
    const auto cfg = cli::parse_config(j);
    EXPECT_EQ(cfg.scenario.weights[0](cfg.scenario.model, Element{0}), 0.5);
    EXPECT_EQ(cfg.scenario.weights[0](cfg.scenario.model, Element{1}), 2.0);
    EXPECT_EQ(cfg.scenario.k.size(), 2u);
    EXPECT_TRUE(cfg.scenario.phi.is_custom());
}

TEST(CliConfig, LatticeCoordinatesAreReal) {
    const auto cfg = cli::load_config(kScenarios / "lattice_line_deficit.json");
    EXPECT_EQ(cfg.scenario.a, Element{1});
    EXPECT_EQ(cfg.scenario.k.size(), 13u);
    EXPECT_EQ(cfg.scenario.e_k_policy.deficit_cap, 1.0);
}

TEST(CliConfig, FileErrors) {
    EXPECT_THROW(cli::load_config("/nonexistent/config.json"), Error);
    const auto dir = scratch("bad_json");
    std::ofstream(dir / "bad.json") << "{ not json";
    try {
        cli::load_config(dir / "bad.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    }
}

TEST(CliRun, ExitStatusesMatchVerdicts) {
    const std::vector<std::pair<std::string, int>> cases{
        {"heisenberg_example1", 0},      {"z_step_disjoint_transitive", 0}, {"z_step_same_weight", 0},
        {"z_step_disjoint_mixing", 0},   {"z_step_chaotic", 0},             {"z_step_witness", 0},
        {"negative_unit_weight", 3},     {"negative_identity_element", 3},  {"negative_constant_two", 2},
        {"oscillating_mixing", 2},       {"oscillating_transitive", 0},     {"lattice_line_deficit", 0},
        {"heisenberg_disjoint_chaotic", 0}};
    for (const auto& [name, status] : cases) {
        const auto dir = scratch(name);
        const auto r = run_check(kScenarios / (name + ".json"), dir);
        EXPECT_EQ(r.status, status) << name << ": " << r.out << r.err;
        const auto report = load(dir / "report.json");
        const std::string want = status == 0 ? "verified" : status == 2 ? "not_verified_within_bound" : "refused";
        EXPECT_EQ(report["verdict"], want) << name;
        EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1) << name;
        EXPECT_TRUE(fs::exists(dir / "trace.csv"));
    }
}

TEST(CliRun, HeisenbergReport) {
    const auto dir = scratch("heis");
    const auto r = run_check(kScenarios / "heisenberg_example1.json", dir);
    ASSERT_EQ(r.status, 0);
    const auto report = load(dir / "report.json");
    EXPECT_EQ(report["n_star"], 14);
    EXPECT_EQ(report["aperiodicity"]["M"], 3);
    EXPECT_EQ(report["parameters"]["a"], json::array({1, 0, 2}));
    EXPECT_LT(report["values_at_n"]["phi_1"].get<double>(), 1e-3);
    EXPECT_EQ(csv_lines(slurp(dir / "trace.csv")).size(), 65u);
}

TEST(CliRun, RefusalReasonsAreEchoed) {
    const auto dir = scratch("refusals");
    auto r = run_check(kScenarios / "negative_unit_weight.json", dir);
    EXPECT_NE(r.out.find("||w||_inf <= 1"), std::string::npos);
    EXPECT_NE(load(dir / "report.json")["reason"].get<std::string>().find("||w||_inf <= 1"), std::string::npos);
    r = run_check(kScenarios / "negative_identity_element.json", dir);
    EXPECT_NE(r.out.find("not aperiodic"), std::string::npos);
    // overriding the diagnostics runs the search, which cannot succeed with w = 1
    r = run_check(kScenarios / "negative_unit_weight.json", dir, true);
    EXPECT_EQ(r.status, 2);
}

TEST(CliRun, ErrorsExitWithOne) {
    const auto dir = scratch("errors");
    auto r = run_check("/nonexistent.json", dir);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    json j = z_step_config("disjoint_transitive");
    j["epsilon"] = -1.0;
    r = run_check(write_config(dir, j), dir);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("epsilon"), std::string::npos);
    json w = z_step_config("witness");
    w["witness"]["f"] = json::array({json::array({json::array({5}), 1.0})});
    r = run_check(write_config(dir, w), dir);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("SupportEscapesK"), std::string::npos);
}

TEST(CliRun, WitnessReport) {
    const auto dir = scratch("witness");
    ASSERT_EQ(run_check(kScenarios / "z_step_witness.json", dir).status, 0);
    const auto w = load(dir / "report.json")["witness"];
    EXPECT_EQ(w["n"], 4);
    EXPECT_NEAR(w["rho0"].get<double>(), 0.1328125, 1e-12);
    EXPECT_LE(w["rho0"].get<double>(), w["rho0_bound"].get<double>() + 1e-12);
    EXPECT_EQ(w["vector"].size(), 3u);

    // without an explicit n the checker's n* is used
    json j = z_step_config("witness");
    j["witness"].erase("n");
    const auto d2 = scratch("witness_auto");
    ASSERT_EQ(run_check(write_config(d2, j), d2).status, 0);
    const auto report = load(d2 / "report.json");
    EXPECT_EQ(report["witness"]["n"], report["n_star"]);
}

TEST(CliRun, ChaoticReportCarriesPeriodicPoint) {
    const auto dir = scratch("chaotic");
    ASSERT_EQ(run_check(kScenarios / "z_step_chaotic.json", dir).status, 0);
    const auto pp = load(dir / "report.json")["periodic_point"];
    ASSERT_TRUE(pp.contains("residual"));
    EXPECT_LE(pp["residual"].get<double>(), pp["tail_bound"].get<double>());
}

TEST(CliRun, FormatSelection) {
    const auto dir = scratch("formats");
    cli::RunOptions opts;
    opts.out_dir = dir;
    opts.write_csv = false;
    std::ostringstream out, err;
    EXPECT_EQ(cli::run(kScenarios / "z_step_same_weight.json", opts, out, err), 0);
    EXPECT_TRUE(fs::exists(dir / "report.json"));
    EXPECT_FALSE(fs::exists(dir / "trace.csv"));
}

TEST(CliRun, ReportsAreDeterministic) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    for (const auto* name : {"heisenberg_disjoint_chaotic.json", "oscillating_mixing.json", "z_step_witness.json"}) {
        run_check(kScenarios / name, a);
        run_check(kScenarios / name, b);
        EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json")) << name;
        EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv")) << name;
    }
}

TEST(CliTrace, ColumnCounts) {
    auto count_columns = [](const fs::path& config) {
        const auto dir = scratch("cols");
        cli::RunOptions opts;
        opts.out_dir = dir;
        std::ostringstream out, err;
        cli::emit_series(config, opts, out, err);
        EXPECT_FALSE(fs::exists(dir / "report.json"));
        const auto header = split(csv_lines(slurp(dir / "trace.csv")).at(0));
        EXPECT_EQ(header.front(), "n");
        EXPECT_EQ(header.back(), "e_k_deficit");
        return header.size() - 2;
    };
    // 2L + L(L-1) + (chaos ? L : 0)
    EXPECT_EQ(count_columns(kScenarios / "heisenberg_example1.json"), 2u * 2 + 2 * 1);
    EXPECT_EQ(count_columns(kScenarios / "heisenberg_disjoint_chaotic.json"), 2u * 2 + 2 * 1 + 2);
    EXPECT_EQ(count_columns(kScenarios / "z_step_chaotic.json"), 2u + 1);

    const auto dir = scratch("three");
    json j = z_step_config("disjoint_transitive");
    j["powers"] = json::array({1, 2, 3});
    EXPECT_EQ(count_columns(write_config(dir, j)), 2u * 3 + 3 * 2);
}

TEST(CliTrace, RowsAndValues) {
    const auto dir = scratch("rows");
    json j = z_step_config("disjoint_transitive");
    j["K"] = json{{"points", json::array({json::array({0})})}};
    j["n_max"] = 3;
    const auto config = write_config(dir, j);
    cli::RunOptions opts;
    opts.out_dir = dir;
    std::ostringstream out, err;
    cli::emit_series(config, opts, out, err);
    const auto lines = csv_lines(slurp(dir / "trace.csv"));
    ASSERT_EQ(lines.size(), 4u);
    const auto header = split(lines[0]);
    const auto row3 = split(lines[3]);
    const auto col = std::find(header.begin(), header.end(), "phi_tilde_1") - header.begin();
    EXPECT_EQ(row3.at(static_cast<std::size_t>(col)), "0.25");

    j["n_max"] = 1;
    cli::emit_series(write_config(dir, j), opts, out, err);
    EXPECT_EQ(csv_lines(slurp(dir / "trace.csv")).size(), 2u);
}

TEST(CliTrace, FullPrecision) {
    EXPECT_EQ(cli::format_value(1.0 / 3.0), "0.333333333333333");
    EXPECT_EQ(cli::format_value(0.25), "0.25");
    EXPECT_EQ(cli::format_value(std::ldexp(1.0, -60)), "8.67361737988404e-19");
}

TEST(CliBinary, SubcommandsAndExitCodes) {
    const auto dir = scratch("binary");
    const auto cfg = [](const char* name) { return (kScenarios / name).string(); };
    const auto out = " --out " + dir.string();
    EXPECT_EQ(run_binary("check --config " + cfg("heisenberg_example1.json") + out), 0);
    EXPECT_EQ(run_binary("check --config " + cfg("negative_constant_two.json") + out), 2);
    EXPECT_EQ(run_binary("check --config " + cfg("negative_unit_weight.json") + out), 3);
    EXPECT_EQ(run_binary("check --config " + cfg("negative_unit_weight.json") + out + " --override-diagnostics"), 2);
    EXPECT_EQ(run_binary("check --config " + cfg("z_step_same_weight.json") + out + " --format json"), 0);
    EXPECT_EQ(run_binary("check --config " + cfg("z_step_same_weight.json") + out + " --format xml"), 1);
    EXPECT_EQ(run_binary("check --config /nonexistent.json" + out), 1);
    EXPECT_EQ(run_binary("frobnicate"), 1);
    EXPECT_EQ(run_binary(""), 1);
    fs::remove(dir / "report.json");
    EXPECT_EQ(run_binary("trace --config " + cfg("z_step_chaotic.json") + out), 0);
    EXPECT_TRUE(fs::exists(dir / "trace.csv"));
    EXPECT_FALSE(fs::exists(dir / "report.json"));
    const std::string env_cmd = "ORLICZ_DYN_THREADS=1 " + std::string(ORLICZ_DYN_BIN) + " check --config " +
                                cfg("heisenberg_example1.json") + out + " > /dev/null 2>&1";
    const int raw = std::system(env_cmd.c_str());
    EXPECT_TRUE(WIFEXITED(raw) && WEXITSTATUS(raw) == 0);
}
