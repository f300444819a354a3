#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#include "snwit/serialization.hpp"
#include "snwit/states.hpp"

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string output;
};

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "snwit_cli_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Runs the installed binary with stdout and stderr captured together.
CommandResult run_cli(const std::string& args) {
    static int invocation = 0;
    auto capture = scratch_dir() / ("capture_" + std::to_string(invocation++) + ".txt");
    const std::string command =
        std::string(SNWIT_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    CommandResult result;
    REQUIRE(WIFEXITED(status));
    result.exit_code = WEXITSTATUS(status);
    result.output = read_file(capture);
    return result;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// Pulls the number after "label = " from a report line.
double parse_value(const std::string& output, const std::string& label) {
    auto pos = output.find(label);
    REQUIRE(pos != std::string::npos);
    pos += label.size();
    return std::stod(output.substr(pos));
}

}  // namespace

TEST_CASE("povm build honors the admissible x range") {
    auto below = run_cli("povm build --d 3 --N 8 --M 2 --x 0.75");
    CHECK(below.exit_code == 2);
    CHECK(contains(below.output, "range"));

    auto above = run_cli("povm build --d 3 --N 8 --M 2 --x 2.0");
    CHECK(above.exit_code == 2);
    CHECK(contains(above.output, "range"));
}

TEST_CASE("povm build reports constructions that cannot stay positive") {
    auto result = run_cli("povm build --d 3 --N 8 --M 2 --x 1.5");
    CHECK(result.exit_code == 1);
    CHECK(contains(result.output, "construction failed"));
}

TEST_CASE("povm build writes a file that povm validate accepts") {
    auto out = scratch_dir() / "family.json";
    std::filesystem::remove(out);

    auto build = run_cli("povm build --d 3 --N 8 --M 2 --x 1.0 --out " + out.string());
    CHECK(build.exit_code == 0);
    CHECK(contains(build.output, "result: pass"));
    REQUIRE(std::filesystem::exists(out));

    auto validate = run_cli("povm validate " + out.string());
    CHECK(validate.exit_code == 0);
    CHECK(contains(validate.output, "result: pass"));
}

TEST_CASE("povm validate rejects malformed input as a data error") {
    auto bad = scratch_dir() / "broken.json";
    std::ofstream(bad) << "{\"d\": 3}";
    auto result = run_cli("povm validate " + bad.string());
    CHECK(result.exit_code == 1);

    auto missing = run_cli("povm validate " + (scratch_dir() / "no_such.json").string());
    CHECK(missing.exit_code == 1);
}

TEST_CASE("povm validate without a file argument is a usage error") {
    auto result = run_cli("povm validate");
    CHECK(result.exit_code == 2);
}

TEST_CASE("witness eval verdict tracks the sign of the expectation value") {
    const std::string base = "witness eval --d 3 --N 8 --M 2 --k 2 --x 1.5 --v ";

    auto detected = run_cli(base + "0.7");
    CHECK(detected.exit_code == 0);
    CHECK(contains(detected.output, "SN >= 3: yes"));
    CHECK(parse_value(detected.output, "Tr(W rho) = ") < 0.0);

    auto missed = run_cli(base + "0.6");
    CHECK(missed.exit_code == 0);
    CHECK(contains(missed.output, "SN >= 3: no"));
    CHECK(parse_value(missed.output, "Tr(W rho) = ") > 0.0);

    auto boundary = run_cli(base + "0.625");
    CHECK(boundary.exit_code == 0);
    CHECK(contains(boundary.output, "SN >= 3: no"));
    CHECK(std::abs(parse_value(boundary.output, "Tr(W rho) = ")) < 1e-9);
}

TEST_CASE("witness eval accepts a state from disk") {
    auto path = scratch_dir() / "state.json";
    snwit::write_json_file(path.string(),
                           snwit::state_to_json(snwit::isotropic_state(3, 0.7)));

    auto result = run_cli("witness eval --d 3 --N 8 --M 2 --k 2 --x 1.5 --state file:" +
                          path.string());
    CHECK(result.exit_code == 0);
    CHECK(contains(result.output, "SN >= 3: yes"));

    auto qubit_path = scratch_dir() / "qubit_state.json";
    snwit::write_json_file(qubit_path.string(),
                           snwit::state_to_json(snwit::isotropic_state(2, 0.7)));
    auto mismatch = run_cli("witness eval --d 3 --N 8 --M 2 --k 2 --x 1.5 --state file:" +
                            qubit_path.string());
    CHECK(mismatch.exit_code == 1);
}

TEST_CASE("witness eval requires a seed for random rotations") {
    auto result =
        run_cli("witness eval --d 3 --N 8 --M 2 --k 2 --x 1.5 --v 0.7 --rotation random");
    CHECK(result.exit_code == 2);

    auto seeded = run_cli(
        "witness eval --d 3 --N 8 --M 2 --k 2 --x 1.5 --v 1.0 --rotation random --seed 5");
    CHECK(seeded.exit_code == 0);
}

TEST_CASE("sweep emits the documented CSV schema") {
    auto result = run_cli(
        "sweep --d 3 --N 8 --M 2 --k 2 --x-min 0.9 --x-max 1.5 --steps 4 --format csv");
    CHECK(result.exit_code == 0);

    std::istringstream lines(result.output);
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "x,v_threshold,v_baseline");
    int rows = 0;
    std::string last;
    while (std::getline(lines, line)) {
        if (!line.empty()) {
            last = line;
            ++rows;
        }
    }
    CHECK(rows == 4);

    std::istringstream cells(last);
    std::string x_text, threshold_text, baseline_text;
    REQUIRE(std::getline(cells, x_text, ','));
    REQUIRE(std::getline(cells, threshold_text, ','));
    REQUIRE(std::getline(cells, baseline_text, ','));
    CHECK(std::stod(x_text) == Catch::Approx(1.5).margin(1e-15));
    CHECK(std::stod(threshold_text) == Catch::Approx(0.625).margin(1e-9));
    CHECK(std::stod(baseline_text) == Catch::Approx(0.685).margin(1e-15));
}

TEST_CASE("sweep with a single step emits one row at x-min") {
    auto result = run_cli(
        "sweep --d 3 --N 8 --M 2 --k 2 --x-min 1.5 --x-max 1.5 --steps 1 --format csv");
    CHECK(result.exit_code == 0);
    std::istringstream lines(result.output);
    std::string header, row, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row));
    CHECK_FALSE(std::getline(lines, extra));
    CHECK(contains(row, "1.5,"));
}

TEST_CASE("sweep output is byte identical across runs") {
    auto first = scratch_dir() / "sweep_a.csv";
    auto second = scratch_dir() / "sweep_b.csv";
    const std::string args =
        "sweep --d 3 --N 8 --M 2 --k 2 --x-min 0.8 --x-max 1.4 --steps 25 --format csv";
    CHECK(run_cli(args + " --out " + first.string()).exit_code == 0);
    CHECK(run_cli(args + " --out " + second.string()).exit_code == 0);
    CHECK(read_file(first) == read_file(second));
}

TEST_CASE("sweep json format carries the same fields") {
    auto result = run_cli(
        "sweep --d 3 --N 8 --M 2 --k 2 --x-min 1.5 --x-max 1.5 --steps 1 --format json");
    CHECK(result.exit_code == 0);
    auto rows = nlohmann::json::parse(result.output);
    REQUIRE(rows.is_array());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["x"].get<double>() == Catch::Approx(1.5).margin(1e-15));
    CHECK(rows[0]["v_threshold"].get<double>() == Catch::Approx(0.625).margin(1e-9));
    CHECK(rows[0]["v_baseline"].get<double>() == Catch::Approx(0.685).margin(1e-15));
}

TEST_CASE("sweep rejects out-of-range grids and bad formats") {
    CHECK(run_cli("sweep --d 3 --N 8 --M 2 --k 2 --x-min 0.7 --x-max 1.5 --steps 3")
              .exit_code == 2);
    CHECK(run_cli("sweep --d 3 --N 8 --M 2 --k 2 --x-min 1.0 --x-max 0.9 --steps 3")
              .exit_code == 2);
    CHECK(run_cli("sweep --d 3 --N 8 --M 2 --k 2 --x-min 0.9 --x-max 1.0 --steps 0")
              .exit_code == 2);
    CHECK(run_cli("sweep --d 3 --N 8 --M 2 --k 2 --x-min 0.9 --x-max 1.0 --steps 3 "
                  "--format xml")
              .exit_code == 2);
}

TEST_CASE("kpos-check passes at x = d/M and flags usage errors") {
    auto pass = run_cli(
        "kpos-check --d 3 --N 8 --M 2 --k 2 --x 1.5 --trials 50 --seed 7");
    CHECK(pass.exit_code == 0);
    CHECK(contains(pass.output, "result: pass"));

    // Away from x = d/M the trace-square constant shifts off 1/(kd-1), so
    // the check reports a real deviation and exits 1.
    auto off_edge = run_cli(
        "kpos-check --d 3 --N 8 --M 2 --k 2 --x 1.0 --trials 50 --seed 7");
    CHECK(off_edge.exit_code == 1);
    CHECK(contains(off_edge.output, "result: fail"));

    CHECK(run_cli("kpos-check --d 3 --N 8 --M 2 --k 4 --x 1.0 --trials 50 --seed 7")
              .exit_code == 2);
    CHECK(run_cli("kpos-check --d 3 --N 8 --M 2 --k 2 --x 1.0 --trials 0 --seed 7")
              .exit_code == 2);
    CHECK(run_cli("kpos-check --d 3 --N 8 --M 2 --k 2 --x 1.0 --trials 50").exit_code ==
          2);
}

TEST_CASE("fedorov reports matching closed-form and grid estimates") {
    auto result = run_cli("fedorov --sigma-plus 2 --sigma-minus 1 --grid-n 256");
    CHECK(result.exit_code == 0);
    CHECK(parse_value(result.output, "K = ") == Catch::Approx(1.25).margin(1e-9));
    CHECK(parse_value(result.output, "R = ") == Catch::Approx(1.25).margin(1e-9));
    CHECK(parse_value(result.output, "R (grid 256) = ") ==
          Catch::Approx(1.25).margin(1e-3));
    CHECK(parse_value(result.output, "K (svd 256) = ") ==
          Catch::Approx(1.25).margin(1e-3));
}

TEST_CASE("fedorov surfaces unresolvable conditional widths as a data error") {
    auto result = run_cli("fedorov --sigma-plus 10 --sigma-minus 0.5 --grid-n 512");
    CHECK(result.exit_code == 1);

    CHECK(run_cli("fedorov --sigma-minus 1").exit_code == 2);
    CHECK(run_cli("fedorov --sigma-plus -1 --sigma-minus 1").exit_code == 2);
}

TEST_CASE("dual-validate distinguishes its three verdicts") {
    const std::string base = "dual-validate --d 3 --N 8 --M 2 --k 2 --x 1.5 ";

    auto consistent = run_cli(base + "--v 0.9 --sigma-plus 3 --sigma-minus 0.5");
    CHECK(consistent.exit_code == 0);
    CHECK(contains(consistent.output, "verdict: consistent"));

    auto inconclusive = run_cli(base + "--v 0.3 --sigma-plus 3 --sigma-minus 0.5");
    CHECK(inconclusive.exit_code == 0);
    CHECK(contains(inconclusive.output, "verdict: witness inconclusive"));

    auto conflicted = run_cli(base + "--v 0.9 --sigma-plus 1 --sigma-minus 1");
    CHECK(conflicted.exit_code == 1);
    CHECK(contains(conflicted.output, "verdict: inconsistent - review"));
}

TEST_CASE("unknown flags and missing subcommands are usage errors") {
    CHECK(run_cli("povm build --nonsense 3").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
}

TEST_CASE("tolerance comes from --tol, then SNWIT_TOL, then the default") {
    auto out = scratch_dir() / "tol_family.json";
    auto build = run_cli("povm build --d 3 --N 8 --M 2 --x 1.0 --out " + out.string());
    REQUIRE(build.exit_code == 0);

    static int env_invocation = 0;
    auto run_with_env = [&](const std::string& env, const std::string& args) {
        auto capture =
            scratch_dir() / ("env_capture_" + std::to_string(env_invocation++) + ".txt");
        const std::string command = env + " " + std::string(SNWIT_CLI_PATH) + " " + args +
                                    " > " + capture.string() + " 2>&1";
        const int status = std::system(command.c_str());
        REQUIRE(status != -1);
        REQUIRE(WIFEXITED(status));
        return WEXITSTATUS(status);
    };

    CHECK(run_with_env("SNWIT_TOL=1e-2", "povm validate " + out.string()) == 0);
    CHECK(run_with_env("SNWIT_TOL=garbage", "povm validate " + out.string()) == 2);
    CHECK(run_with_env("SNWIT_TOL=garbage",
                       "povm validate " + out.string() + " --tol 1e-10") == 0);
}
