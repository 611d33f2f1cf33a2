#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kCli = OULC_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
    const fs::path out = fs::temp_directory_path() / "oulc_cli_out.txt";
    const std::string cmd =
        std::string(kCli) + " " + args + " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::stringstream buf;
    buf << in.rdbuf();
    r.stdout_text = buf.str();
    return r;
}

fs::path sim_csv(const std::string& name, const std::string& extra = "") {
    const fs::path p = fs::temp_directory_path() / name;
    const std::string args =
        "simulate --n 40 --tau 12 --mu0 0.0008 --mu1 0.0008 --sigma2-0 0.000169 "
        "--sigma2-1 0.0012 --substeps 200 --seed 7 --raw-log " +
        extra + " --out " + p.string();
    REQUIRE(run_cli(args).exit_code == 0);
    return p;
}

}  // namespace

TEST_CASE("simulate then detect recovers the planted change point") {
    const fs::path csv = sim_csv("cli_sim.csv");
    const RunResult res =
        run_cli("detect --input " + csv.string() + " --no-log --model both");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.stdout_text);
    CHECK(j["schema_version"] == 1);
    REQUIRE(j["fits"].size() == 2);
    CHECK(j["fits"][0]["model"] == "oulc");
    CHECK(j["fits"][1]["model"] == "oc");
    const long tau = j["fits"][0]["tau_hat"].get<long>();
    CHECK(tau == 12);
    CHECK(j["fits"][0].contains("tau_date"));
}

TEST_CASE("year-length variance-shift golden run recovers tau = 25") {
    const fs::path p = fs::temp_directory_path() / "cli_golden.csv";
    REQUIRE(run_cli("simulate --n 250 --tau 25 --mu0 0.0008 --mu1 0.0008 "
                    "--sigma2-0 0.000169 --sigma2-1 0.000784 --substeps 1000 "
                    "--seed 20220322 --out " + p.string()).exit_code == 0);
    const RunResult res = run_cli("detect --input " + p.string() + " --model oulc");
    REQUIRE(res.exit_code == 0);
    const json j = json::parse(res.stdout_text);
    CHECK(j["fits"][0]["tau_hat"].get<long>() == 25);
}

TEST_CASE("detect output is byte-identical across runs and worker counts") {
    const fs::path csv = sim_csv("cli_det.csv");
    const auto a = run_cli("detect --input " + csv.string() + " --no-log --threads 1");
    const auto b = run_cli("detect --input " + csv.string() + " --no-log --threads 4");
    REQUIRE(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("csv output format") {
    const fs::path csv = sim_csv("cli_csv.csv");
    const auto res = run_cli("detect --input " + csv.string() +
                             " --no-log --model oc --output csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.stdout_text.rfind("model,tau_hat,tau_date,mu0,sigma2_0,", 0) == 0);
    CHECK(res.stdout_text.find("\noc,") != std::string::npos);
}

TEST_CASE("aic parameter count is configurable") {
    const fs::path csv = sim_csv("cli_aick.csv");
    const auto k5 = run_cli("detect --input " + csv.string() + " --no-log --model oc");
    const auto k4 = run_cli("detect --input " + csv.string() +
                            " --no-log --model oc --aic-k 4");
    REQUIRE(k5.exit_code == 0);
    REQUIRE(k4.exit_code == 0);
    const json a = json::parse(k5.stdout_text);
    const json b = json::parse(k4.stdout_text);
    CHECK(a["fits"][0]["loglik"] == b["fits"][0]["loglik"]);
    CHECK(a["fits"][0]["aic"].get<double>() ==
          doctest::Approx(b["fits"][0]["aic"].get<double>() + 2.0));
}

TEST_CASE("ci command emits intervals and is seed-reproducible") {
    const fs::path csv = sim_csv("cli_ci.csv");
    const std::string args = "ci --input " + csv.string() +
                             " --no-log --model oc --B 24 --alpha 0.1 --seed 5 "
                             "--substeps 64";
    const auto a = run_cli(args);
    REQUIRE(a.exit_code == 0);
    const json j = json::parse(a.stdout_text);
    CHECK(j["bootstrap"]["B"] == 24);
    CHECK(j["bootstrap"]["ci_mu0"].size() == 2);
    CHECK(j["bootstrap"]["tau_set_mass"].get<double>() >= 0.9);
    const auto b = run_cli(args + " --threads 3");
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("bench command writes metrics files") {
    const fs::path cfg = fs::temp_directory_path() / "bench_cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"scenarios":[{"name":"t","n":24,"tau":8,"mu0":0,"mu1":0,
                  "sigma2_0":0.000169,"sigma2_1":0.0015,
                  "replications":3,"seed":2,"substeps":64}]})";
    }
    const fs::path dir = fs::temp_directory_path() / "bench_out";
    const auto res = run_cli("bench --config " + cfg.string() + " --out-dir " +
                             dir.string() + " --raw-estimates");
    REQUIRE(res.exit_code == 0);
    CHECK(fs::exists(dir / "metrics.json"));
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "estimates.csv"));
    std::ifstream in(dir / "metrics.json");
    const json j = json::parse(in);
    CHECK(j["scenarios"][0]["models"].contains("oulc"));
    CHECK(j["scenarios"][0]["models"].contains("oc"));
}

TEST_CASE("exit codes separate usage, data, and numerical failures") {
    CHECK(run_cli("detect").exit_code == 2);                 // missing --input
    CHECK(run_cli("nonsense").exit_code == 2);               // unknown subcommand
    CHECK(run_cli("detect --input /nonexistent.csv").exit_code == 3);

    // a constant-diff file breaks the open/close model numerically
    const fs::path p = fs::temp_directory_path() / "degenerate.csv";
    {
        std::ofstream out(p);
        out << "date,open,high,low,close\n";
        for (int i = 10; i < 22; ++i) {
            out << "2022-01-" << i << ",1.0,3.0,0.5,2.0\n";
        }
    }
    CHECK(run_cli("detect --input " + p.string() + " --model oc").exit_code == 4);
}

TEST_CASE("help exits cleanly") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("detect --help").exit_code == 0);
}
