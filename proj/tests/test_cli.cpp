#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fracspec/config.hpp"
#include "fracspec/constructor.hpp"
#include "fracspec/error.hpp"
#include "fracspec/report.hpp"
#include "fracspec/run.hpp"

using namespace fracspec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fracspec_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Exec {
  int code = -1;
  std::string out, err;
};

Exec cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(FRACSPEC_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  Exec e;
  e.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  e.out = read_text(out.string());
  e.err = read_text(err.string());
  return e;
}

RunConfig verify_config(const std::string& suite, const std::string& spec) {
  RunConfig c;
  c.command = "verify";
  c.suite = suite;
  c.spec = spec;
  return c;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("minimal config takes the defaults") {
    const RunConfig c = config_from_json(nlohmann::json{{"command", "report"}, {"spec", "s.json"}});
    RunConfig want;
    want.command = "report";
    want.spec = "s.json";
    CHECK(c == want);
    CHECK(c.eps_grid.log);
    CHECK(c.eps_grid.n == 16);
    CHECK(c.theta_points == 8);
  }

  TEST_CASE("config round trip (property)") {
    for (int seed = 1; seed < 40; ++seed) {
      RunConfig c;
      c.command = "verify";
      c.suite = verify_suites()[static_cast<std::size_t>(seed) % verify_suites().size()];
      c.spec = "spec.json";
      c.ledger = "ledger.json";
      c.seed = static_cast<std::uint64_t>(seed) * 7919u;
      c.eps_grid = {1e-3 * seed, 0.3, seed + 3, seed % 2 == 0};
      c.jl_slack = 1.0 / (seed + 2);
      c.alphas = {0.1 * (seed % 9 + 0.5)};
      c.precision = seed % 3 == 0 ? Precision{256u + static_cast<unsigned>(seed)} : Precision{};
      const RunConfig back = config_from_json(nlohmann::json::parse(to_json(c).dump()));
      CHECK(back == c);
      CHECK(to_json(back) == to_json(c));
    }
  }

  TEST_CASE("unknown keys and missing keys are named") {
    CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"command", "report"}, {"spec", "a"}, {"epsilonn", 0.1}}),
                         doctest::Contains("epsilonn"), ValidationError);
    CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"command", "verify"}, {"suite", "ledger"}}),
                         doctest::Contains("spec ledger"), ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"command", "verify"}, {"suite", "nope"}, {"spec", "a"}}),
                    ValidationError);
    CHECK(config_from_json(nlohmann::json{{"seed", 5}}, false).seed == 5);
  }

  TEST_CASE("grid and precision text") {
    const GridSpec g = parse_grid("0.001:0.1:16", true);
    CHECK(g.log);
    CHECK(g.points().size() == 16);
    CHECK(g.points().front() == doctest::Approx(1e-3));
    CHECK(parse_grid(to_string(g), false) == g);
    CHECK_FALSE(parse_grid("-1:1:5", false).log);
    CHECK(parse_grid("1e-3:1:5:lin", true).log == false);
    CHECK_THROWS_AS(parse_grid("1:2", false), ValidationError);
    CHECK_THROWS_AS(parse_grid("-1:1:5:log", false), ValidationError);
    CHECK(parse_precision("double").bits == 0);
    CHECK(parse_precision("ext:512").bits == 512);
    CHECK_THROWS_AS(parse_precision("ext:128"), ValidationError);
  }

  TEST_CASE("config hash ignores worker count and output path") {
    RunConfig a = verify_config("jl", "spec.json");
    RunConfig b = a;
    b.workers = 4;
    b.out = "elsewhere.csv";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
  }

  TEST_CASE("CSV header carries tool, version and hash") {
    Table t;
    t.columns = {"x", "ok"};
    t.add({cell(0.1), cell(true)});
    CHECK_THROWS(t.add({"1"}));
    const RunConfig c = verify_config("jl", "spec.json");
    const std::string csv = render_csv(t, provenance(c));
    CHECK(csv.rfind("# tool=fracspec version=" + std::string(kToolVersion) + " config_hash=" + config_hash(c), 0) == 0);
    CHECK(csv.find("\nx,ok\n0.1,1\n") != std::string::npos);
    CHECK(cell(1.0 / 3.0) == "0.3333333333333333");
    CHECK(cell(std::numeric_limits<double>::infinity()) == "inf");
  }

  TEST_CASE("run maps outcomes to exit codes") {
    const fs::path dir = scratch_dir("run");
    RunConfig c;
    c.command = "construct";
    c.kind = "sparse";
    c.stages = 3;
    c.out = (dir / "sparse.json").string();
    REQUIRE(run(c).exit_code == kExitOk);
    const PotentialSpec s = load_spec(c.out);
    CHECK(check_growth(growth_schedule(s)).holds);

    RunConfig g = verify_config("growth", c.out);
    g.out = (dir / "growth.csv").string();
    CHECK(run(g).exit_code == kExitOk);
    CHECK(fs::exists(g.out));

    // A barrier below the growth threshold fails the growth suite.
    write_text((dir / "weak.json").string(),
               serialize(PotentialSpec(Domain::half_line, {Barrier::from_value(10, 100.0)})));
    CHECK(run(verify_config("growth", (dir / "weak.json").string())).exit_code ==
          kExitVerifyBase + suite_index("growth"));

    CHECK(run(verify_config("growth", (dir / "missing.json").string())).exit_code == kExitInput);
    write_text((dir / "broken.json").string(), "{\"domain\":");
    CHECK(run(verify_config("growth", (dir / "broken.json").string())).exit_code == kExitInput);
    RunConfig bad = verify_config("growth", c.out);
    bad.suite = "nope";
    CHECK(run(bad).exit_code == kExitConfig);
  }

  TEST_CASE("verify jl on the free spec passes") {
    const fs::path dir = scratch_dir("jl");
    write_text((dir / "free.json").string(), serialize(PotentialSpec::free()));
    RunConfig c = verify_config("jl", (dir / "free.json").string());
    c.e_grid.n = 10;
    c.eps_grid.n = 6;
    CHECK(run(c).exit_code == kExitOk);
  }

  TEST_CASE("fault-injected ledger names the stage") {
    const fs::path dir = scratch_dir("ledger");
    WholelineOptions o;
    o.stages_per_side = 2;
    o.grids = {201, 16};
    const WholelineBuild b = build_wholeline(o);
    ConstructionLedger faulty = b.ledger;
    faulty[2].eps = faulty[1].eps * 0.6;
    write_text((dir / "spec.json").string(), serialize(b.spec));
    write_json((dir / "ledger.json").string(), ledger_to_json(faulty));
    RunConfig c = verify_config("ledger", (dir / "spec.json").string());
    c.ledger = (dir / "ledger.json").string();
    const RunResult r = run(c);
    CHECK(r.exit_code == kExitVerifyBase + suite_index("ledger"));
    CHECK(r.message.find("stage 3") != std::string::npos);
  }

  TEST_CASE("suites are identical across worker counts") {
    const PotentialSpec s(Domain::half_line, {Barrier::from_value(5, 2.0), Barrier::from_value(17, 0.5)});
    for (const char* suite : {"jl", "cocycle", "oracle"}) {
      RunConfig c = verify_config(suite, "unused");
      c.e_grid.n = 7;
      c.eps_grid.n = 4;
      c.samples = 50;
      c.oracle_n = 400;
      const SuiteResult one = run_suite(c, s);
      c.workers = 4;
      const SuiteResult four = run_suite(c, s);
      CHECK(one.table.rows == four.table.rows);
    }
  }

  TEST_CASE("binary: version, diagnostics and a construct-verify round") {
    const fs::path dir = scratch_dir("bin");
    CHECK(cli("--version", dir).out.find(kToolVersion) != std::string::npos);

    const Exec unknown = cli("verify --suite nope --spec x.json", dir);
    CHECK(unknown.code == 2);
    const auto diag = nlohmann::json::parse(unknown.err);
    CHECK(diag["error"] == "config");
    CHECK(diag["exit_code"] == 2);

    CHECK(cli("verify --suite growth", dir).code == 2);
    CHECK(cli("verify --suite growth --spec " + (dir / "none.json").string(), dir).code == 3);

    const std::string spec = (dir / "spec.json").string();
    REQUIRE(cli("construct --kind sparse --stages 3 --out " + spec, dir).code == 0);
    CHECK(fs::exists(spec + ".provenance.json"));
    CHECK(cli("verify --suite growth --spec " + spec, dir).code == 0);
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    CHECK(cli("verify --suite lyapunov --e-grid -1.9:1.9:40 --workers 1 --spec " + spec + " --out " + a, dir).code == 0);
    CHECK(cli("verify --suite lyapunov --e-grid -1.9:1.9:40 --workers 4 --spec " + spec + " --out " + b, dir).code == 0);
    CHECK(read_text(a) == read_text(b));

    const std::string cfg = (dir / "cfg.json").string();
    write_text(cfg, R"({"seed": 9, "epsilonn": 1})");
    const Exec rejected = cli("verify --suite growth --spec " + spec + " --config " + cfg, dir);
    CHECK(rejected.code == 2);
    CHECK(rejected.err.find("epsilonn") != std::string::npos);
  }
}
