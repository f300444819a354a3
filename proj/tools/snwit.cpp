#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "snwit/snwit.hpp"

namespace {

// Flag/config problems exit 2; data and check failures exit 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double default_tolerance() {
    if (const char* env = std::getenv("SNWIT_TOL")) {
        try {
            const double value = std::stod(env);
            if (value > 0.0) {
                return value;
            }
        } catch (const std::exception&) {
        }
        throw UsageError("SNWIT_TOL must be a positive number, got '" + std::string(env) +
                         "'");
    }
    return 1e-10;
}

std::string fmt(double value, int digits = 12) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
    return buffer;
}

void check_formal_range(int d, int N, int M, double x) {
    if (d < 2 || N < 1 || M < 2) {
        throw UsageError("need d >= 2, N >= 1, M >= 2");
    }
    const double lo = static_cast<double>(d) / (static_cast<double>(M) * M);
    const double hi = std::min(static_cast<double>(d) * d / (static_cast<double>(M) * M),
                               static_cast<double>(d) / M);
    if (!(x > lo) || x > hi) {
        throw UsageError("x = " + fmt(x) + " outside the admissible range (" + fmt(lo) +
                         ", " + fmt(hi) + "]");
    }
}

snwit::RotationFamily make_rotations(const std::string& kind, int N, int M,
                                     const std::optional<std::uint64_t>& seed) {
    if (kind == "identity") {
        return snwit::identity_rotation_family(N, M);
    }
    if (kind == "random") {
        if (!seed) {
            throw UsageError("--rotation random requires an explicit --seed");
        }
        return snwit::random_rotation_family(N, M, *seed);
    }
    throw UsageError("--rotation must be 'identity' or 'random', got '" + kind + "'");
}

snwit::BipartiteState make_state(const std::string& spec, int d,
                                 const std::optional<double>& v) {
    if (spec == "isotropic") {
        if (!v) {
            throw UsageError("--state isotropic requires --v");
        }
        if (*v < 0.0 || *v > 1.0) {
            throw UsageError("--v must lie in [0, 1]");
        }
        return snwit::isotropic_state(d, *v);
    }
    if (spec.rfind("file:", 0) == 0) {
        auto state = snwit::state_from_json(snwit::read_json_file(spec.substr(5)));
        if (state.dA != d || state.dB != d) {
            throw std::runtime_error("state file has factors " + std::to_string(state.dA) +
                                     "x" + std::to_string(state.dB) + ", expected " +
                                     std::to_string(d) + "x" + std::to_string(d));
        }
        return state;
    }
    throw UsageError("--state must be 'isotropic' or 'file:<path>', got '" + spec + "'");
}

void print_validation(const snwit::ValidationReport& report) {
    std::cout << "trace deviation:         " << fmt(report.trace_deviation, 6) << "\n"
              << "purity deviation:        " << fmt(report.purity_deviation, 6) << "\n"
              << "intra-overlap deviation: " << fmt(report.intra_overlap_deviation, 6)
              << "\n"
              << "inter-overlap deviation: " << fmt(report.inter_overlap_deviation, 6)
              << "\n"
              << "completeness deviation:  " << fmt(report.completeness_deviation, 6)
              << "\n"
              << "min eigenvalue:          " << fmt(report.min_eigenvalue, 6) << "\n";
}

int run_povm_build(int d, int N, int M, double x, const std::string& out, double tol) {
    check_formal_range(d, N, M, x);
    snwit::SymmetricPovm povm;
    try {
        povm = snwit::build_nm_povm(d, N, M, x);
    } catch (const snwit::NonPositiveElementError& e) {
        std::cout << "construction failed: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cout << "construction failed: " << e.what() << "\n";
        return 1;
    }
    auto report = snwit::validate_povm(povm);
    print_validation(report);
    if (!out.empty()) {
        snwit::write_json_file(out, snwit::povm_to_json(povm));
        std::cout << "wrote " << out << "\n";
    }
    const bool ok = report.passes(tol);
    std::cout << "result: " << (ok ? "pass" : "fail") << " at tolerance " << fmt(tol, 6)
              << "\n";
    return ok ? 0 : 1;
}

int run_povm_validate(const std::string& path, double tol) {
    auto povm = snwit::povm_from_json(snwit::read_json_file(path));
    auto report = snwit::validate_povm(povm);
    print_validation(report);
    const bool ok = report.passes(tol);
    std::cout << "result: " << (ok ? "pass" : "fail") << " at tolerance " << fmt(tol, 6)
              << "\n";
    return ok ? 0 : 1;
}

int run_witness_eval(int d, int N, int M, int k, double x, const std::string& rotation,
                     const std::optional<std::uint64_t>& seed, const std::string& state_spec,
                     const std::optional<double>& v, const std::string& out) {
    check_formal_range(d, N, M, x);
    if (k < 1 || k > d) {
        throw UsageError("need 1 <= k <= d");
    }
    auto rotations = make_rotations(rotation, N, M, seed);
    auto witness = snwit::build_witness(snwit::build_nm_frame(d, N, M, x), rotations, k);
    auto state = make_state(state_spec, d, v);
    const double value = snwit::expectation(witness, state);
    std::cout << "Tr(W rho) = " << fmt(value) << "\n";
    std::cout << "SN >= " << (k + 1) << ": " << (value < -1e-12 ? "yes" : "no") << "\n";
    if (!out.empty()) {
        snwit::write_json_file(out, snwit::witness_to_json(witness));
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int run_sweep(int d, int N, int M, int k, double x_min, double x_max, int steps,
              const std::string& format, const std::string& out) {
    if (steps < 1) {
        throw UsageError("--steps must be >= 1");
    }
    if (x_min > x_max) {
        throw UsageError("--x-min must not exceed --x-max");
    }
    check_formal_range(d, N, M, x_min);
    check_formal_range(d, N, M, x_max);
    if (k < 1 || k > d) {
        throw UsageError("need 1 <= k <= d");
    }
    const double baseline = 0.685;

    std::ostringstream body;
    nlohmann::json rows = nlohmann::json::array();
    if (format == "csv") {
        body << "x,v_threshold,v_baseline\n";
    } else if (format != "json") {
        throw UsageError("--format must be 'csv' or 'json'");
    }
    for (int i = 0; i < steps; ++i) {
        const double x =
            (steps == 1) ? x_min : x_min + (x_max - x_min) * i / (steps - 1.0);
        const double threshold = snwit::threshold_v(d, k, M, N, x);
        if (format == "csv") {
            body << fmt(x, 17) << "," << fmt(threshold, 17) << "," << fmt(baseline, 17)
                 << "\n";
        } else {
            rows.push_back({{"x", x}, {"v_threshold", threshold}, {"v_baseline", baseline}});
        }
    }
    const std::string text = (format == "csv") ? body.str() : rows.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        std::ofstream file(out);
        if (!file) {
            throw std::runtime_error("cannot open " + out);
        }
        file << text;
        std::cout << "wrote " << out << "\n";
    }
    return 0;
}

int run_kpos_check(int d, int N, int M, int k, double x, int trials,
                   const std::optional<std::uint64_t>& seed, const std::string& rotation,
                   double tol) {
    if (d < 2 || N < 1 || M < 2) {
        throw UsageError("need d >= 2, N >= 1, M >= 2");
    }
    if (k < 1 || k > d) {
        throw UsageError("need 1 <= k <= d");
    }
    if (trials < 1) {
        throw UsageError("--trials must be >= 1");
    }
    if (!(x > static_cast<double>(d) / (static_cast<double>(M) * M))) {
        throw UsageError("need x > d/M^2");
    }
    if (!seed) {
        throw UsageError("kpos-check requires an explicit --seed");
    }
    auto map = snwit::make_witness_map(snwit::build_nm_frame(d, N, M, x),
                                       make_rotations(rotation, N, M, seed), k);
    auto result = snwit::kpos_trace_square_check(map, trials, *seed);
    std::cout << "target purity:        " << fmt(1.0 / (static_cast<double>(k) * d - 1.0))
              << "\n";
    std::cout << "max trace deviation:  " << fmt(result.max_trace_deviation, 6) << "\n";
    std::cout << "min output eigenvalue: " << fmt(result.min_eigenvalue, 6) << "\n";
    const bool ok = result.max_trace_deviation < tol && result.min_eigenvalue > -1e-9;
    std::cout << "result: " << (ok ? "pass" : "fail") << "\n";
    return ok ? 0 : 1;
}

int run_fedorov(double sigma_plus, double sigma_minus, int grid_n) {
    if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) {
        throw UsageError("--sigma-plus and --sigma-minus must be positive");
    }
    snwit::GaussianBiphoton model(sigma_plus, sigma_minus);
    std::cout << "K = " << fmt(snwit::schmidt_number_gaussian(model)) << "\n";
    std::cout << "R = " << fmt(snwit::fedorov_ratio(model)) << "\n";
    if (grid_n > 0) {
        if (grid_n < 8) {
            throw UsageError("--grid-n must be >= 8");
        }
        auto grid = snwit::make_gaussian_grid(model, grid_n);
        std::cout << "R (grid " << grid_n << ") = " << fmt(snwit::fedorov_ratio_grid(grid))
                  << "\n";
        std::cout << "K (svd " << grid_n << ") = "
                  << fmt(snwit::participation_ratio_svd(grid)) << "\n";
    }
    return 0;
}

int run_dual_validate(int d, int N, int M, int k, double x, const std::string& rotation,
                      const std::optional<std::uint64_t>& seed,
                      const std::string& state_spec, const std::optional<double>& v,
                      double sigma_plus, double sigma_minus) {
    check_formal_range(d, N, M, x);
    if (k < 1 || k > d) {
        throw UsageError("need 1 <= k <= d");
    }
    if (!(sigma_plus > 0.0) || !(sigma_minus > 0.0)) {
        throw UsageError("--sigma-plus and --sigma-minus must be positive");
    }
    auto witness = snwit::build_witness(snwit::build_nm_frame(d, N, M, x),
                                        make_rotations(rotation, N, M, seed), k);
    auto state = make_state(state_spec, d, v);
    const double value = snwit::expectation(witness, state);
    snwit::GaussianBiphoton model(sigma_plus, sigma_minus);
    const double ratio = snwit::fedorov_ratio(model);

    std::cout << "Tr(W rho) = " << fmt(value) << "\n";
    std::cout << "R = " << fmt(ratio) << "\n";
    const bool witness_detects = value < -1e-12;
    const bool ratio_agrees = ratio >= k + 1;
    std::string verdict;
    int code = 0;
    if (!witness_detects) {
        verdict = "witness inconclusive";
    } else if (ratio_agrees) {
        verdict = "consistent";
    } else {
        verdict = "inconsistent - review";
        code = 1;
    }
    std::cout << "verdict: " << verdict << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symmetric-measurement Schmidt-number witness toolkit"};
    app.require_subcommand(1);

    int d = 3;
    int N = 8;
    int M = 2;
    int k = 2;
    double x = 1.0;
    double x_min = 0.76;
    double x_max = 1.5;
    int steps = 100;
    int trials = 100;
    int grid_n = 0;
    double sigma_plus = 1.0;
    double sigma_minus = 1.0;
    std::optional<double> v;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_flag;
    std::string rotation = "identity";
    std::string state_spec = "isotropic";
    std::string format = "csv";
    std::string out;
    std::string input_path;

    auto add_dims = [&](CLI::App* cmd, bool with_k) {
        cmd->add_option("--d", d, "Hilbert space dimension");
        cmd->add_option("--N", N, "number of measurement families");
        cmd->add_option("--M", M, "outcomes per family");
        if (with_k) {
            cmd->add_option("--k", k, "Schmidt-rank class parameter");
        }
    };

    auto* povm = app.add_subcommand("povm", "build or validate measurement families");
    povm->require_subcommand(1);
    auto* povm_build = povm->add_subcommand("build", "construct and validate a family");
    add_dims(povm_build, false);
    povm_build->add_option("--x", x, "purity parameter");
    povm_build->add_option("--out", out, "write the family as JSON");
    povm_build->add_option("--tol", tol_flag, "validation tolerance");
    auto* povm_validate = povm->add_subcommand("validate", "validate a stored family");
    povm_validate->add_option("file", input_path, "JSON file to validate")->required();
    povm_validate->add_option("--tol", tol_flag, "validation tolerance");

    auto* witness_eval = app.add_subcommand("witness", "witness operations");
    witness_eval->require_subcommand(1);
    auto* eval = witness_eval->add_subcommand("eval", "evaluate a witness on a state");
    add_dims(eval, true);
    eval->add_option("--x", x, "purity parameter");
    eval->add_option("--rotation", rotation, "identity|random");
    eval->add_option("--seed", seed, "seed for randomized choices");
    eval->add_option("--state", state_spec, "isotropic or file:<path>");
    eval->add_option("--v", v, "isotropic visibility");
    eval->add_option("--out", out, "write the witness as JSON");

    auto* sweep = app.add_subcommand("sweep", "tabulate the detection threshold curve");
    add_dims(sweep, true);
    sweep->add_option("--x-min", x_min, "lower end of the x grid");
    sweep->add_option("--x-max", x_max, "upper end of the x grid");
    sweep->add_option("--steps", steps, "number of grid points");
    sweep->add_option("--format", format, "csv|json");
    sweep->add_option("--out", out, "output file (stdout if omitted)");

    auto* kpos = app.add_subcommand("kpos-check", "verify the extended-map purity constant");
    add_dims(kpos, true);
    kpos->add_option("--x", x, "purity parameter");
    kpos->add_option("--trials", trials, "number of sampled states");
    kpos->add_option("--seed", seed, "sampling seed");
    kpos->add_option("--rotation", rotation, "identity|random");
    kpos->add_option("--tol", tol_flag, "deviation tolerance");

    auto* fedorov = app.add_subcommand("fedorov", "width-ratio and Schmidt-number report");
    fedorov->add_option("--sigma-plus", sigma_plus, "width of the symmetric factor")
        ->required();
    fedorov->add_option("--sigma-minus", sigma_minus, "width of the antisymmetric factor")
        ->required();
    fedorov->add_option("--grid-n", grid_n, "also run the grid estimators at this size");

    auto* dual = app.add_subcommand("dual-validate",
                                    "cross-check witness detection against the width ratio");
    add_dims(dual, true);
    dual->add_option("--x", x, "purity parameter");
    dual->add_option("--rotation", rotation, "identity|random");
    dual->add_option("--seed", seed, "seed for randomized choices");
    dual->add_option("--state", state_spec, "isotropic or file:<path>");
    dual->add_option("--v", v, "isotropic visibility");
    dual->add_option("--sigma-plus", sigma_plus, "width of the symmetric factor")
        ->required();
    dual->add_option("--sigma-minus", sigma_minus, "width of the antisymmetric factor")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const double tol = tol_flag ? *tol_flag : default_tolerance();
        if (tol <= 0.0) {
            throw UsageError("--tol must be positive");
        }
        if (povm_build->parsed()) {
            return run_povm_build(d, N, M, x, out, tol);
        }
        if (povm_validate->parsed()) {
            return run_povm_validate(input_path, tol);
        }
        if (eval->parsed()) {
            return run_witness_eval(d, N, M, k, x, rotation, seed, state_spec, v, out);
        }
        if (sweep->parsed()) {
            return run_sweep(d, N, M, k, x_min, x_max, steps, format, out);
        }
        if (kpos->parsed()) {
            return run_kpos_check(d, N, M, k, x, trials, seed, rotation, tol);
        }
        if (fedorov->parsed()) {
            return run_fedorov(sigma_plus, sigma_minus, grid_n);
        }
        if (dual->parsed()) {
            return run_dual_validate(d, N, M, k, x, rotation, seed, state_spec, v,
                                     sigma_plus, sigma_minus);
        }
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
