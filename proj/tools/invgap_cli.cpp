// Command-line front end for the invgap shared library. Talks to the core
// exclusively through the C API in invgap/invgap.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "invgap/invgap.h"

namespace {

using nlohmann::json;

constexpr double kInverseTwoPiE = 0.058549831524319168;

// Accepts a plain number or the literal "1/(2*pi*e)".
double parse_sigma2_y(const std::string& text) {
    std::string stripped;
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) stripped += c;
    }
    if (stripped == "1/(2*pi*e)") return kInverseTwoPiE;
    std::size_t pos = 0;
    const double value = std::stod(stripped, &pos);
    if (pos != stripped.size()) {
        throw CLI::ValidationError("--sigma2-y", "expected a number or 1/(2*pi*e)");
    }
    return value;
}

std::uint64_t env_seed(std::uint64_t fallback) {
    if (const char* env = std::getenv("INVGAP_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return fallback;
}

struct SweepOptions {
    std::int64_t n_obs = 10;
    double y = 1.0;
    std::string sigma2_y = "1/(2*pi*e)";
    double sigma2_0 = 1.0;
    std::int64_t k_min = 0;
    std::int64_t k_max = 0;
    std::int64_t k_step = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string config_path;
    CLI::Option* n_obs_opt = nullptr;
    CLI::Option* y_opt = nullptr;
    CLI::Option* sigma2_y_opt = nullptr;
    CLI::Option* sigma2_0_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
};

void add_sweep_options(CLI::App* cmd, SweepOptions& opt) {
    opt.n_obs_opt = cmd->add_option("--n-obs", opt.n_obs, "Number of observations N");
    opt.y_opt = cmd->add_option("--y", opt.y, "Observation value (identical observations)");
    opt.sigma2_y_opt = cmd->add_option("--sigma2-y", opt.sigma2_y,
                                       "Noise variance; accepts the literal 1/(2*pi*e)");
    opt.sigma2_0_opt =
        cmd->add_option("--sigma2-0", opt.sigma2_0, "Per-function prior variance sigma2_0");
    cmd->add_option("--k-min", opt.k_min, "Smallest K (0 keeps the default schedule)");
    cmd->add_option("--k-max", opt.k_max, "Largest K");
    cmd->add_option("--k-step", opt.k_step, "K increment");
    opt.seed_opt = cmd->add_option("--seed", opt.seed, "Random seed");
    cmd->add_option("--out", opt.out, "Output CSV path (default: stdout)");
    cmd->add_option("--config", opt.config_path,
                    "JSON config file (explicit flags override it)");
}

json sweep_config_json(const SweepOptions& opt) {
    json config = json::object();
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) throw std::runtime_error("cannot read config file: " + opt.config_path);
        in >> config;
    }
    // Explicitly passed flags win over the config file; untouched flags keep
    // whatever the file (or the built-in default) says.
    if (opt.n_obs_opt->count() || !config.contains("n_obs")) config["n_obs"] = opt.n_obs;
    if (opt.y_opt->count() || !config.contains("y")) config["y"] = opt.y;
    if (opt.sigma2_y_opt->count() || !config.contains("sigma2_y")) {
        config["sigma2_y"] = parse_sigma2_y(opt.sigma2_y);
    }
    if (opt.sigma2_0_opt->count() || !config.contains("sigma2_0")) {
        config["sigma2_0"] = opt.sigma2_0;
    }
    if (opt.k_step > 0 || opt.k_min > 0 || opt.k_max > 0) {
        config.erase("k_values");
        config["k_min"] = opt.k_min > 0 ? opt.k_min : 1;
        config["k_max"] = opt.k_max > 0 ? opt.k_max : 100;
        config["k_step"] = opt.k_step > 0 ? opt.k_step : 1;
    }
    const std::uint64_t default_seed = config.value("seed", std::uint64_t{0});
    config["seed"] = opt.seed_opt->count() ? opt.seed : env_seed(default_seed);
    return config;
}

int check(ig_status status) {
    if (status != IG_OK) {
        std::cerr << "error: " << ig_last_error() << "\n";
        return 1;
    }
    return 0;
}

int emit(const char* text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    }
    return 0;
}

std::vector<std::int64_t> parse_widths(const std::string& text) {
    std::vector<std::int64_t> widths;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        widths.push_back(std::stoll(item));
    }
    return widths;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean-field versus invariance-abiding variational posteriors: "
                 "closed forms, verification suite and figure sweeps"};
    app.require_subcommand(1);

    SweepOptions gap_opt;
    CLI::App* gap_cmd = app.add_subcommand(
        "gap-sweep", "Invariance gap at both optima and the data-related bound, per K");
    add_sweep_options(gap_cmd, gap_opt);

    SweepOptions elbo_opt;
    CLI::App* elbo_cmd = app.add_subcommand(
        "elbo-sweep", "ELBO terms and predictive variance for q0/qmix at both optima, per K");
    add_sweep_options(elbo_cmd, elbo_opt);

    std::string verify_suite = "all";
    std::uint64_t verify_seed = 0;
    bool verify_seed_set = false;
    std::string verify_widths;
    std::string verify_out;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "Run the library's property suite; exit 1 on failure");
    verify_cmd->add_option("--suite", verify_suite,
                           "gaussian | invariance | linear | bnn | all");
    verify_cmd->add_option("--seed", verify_seed, "Random seed")
        ->each([&](const std::string&) { verify_seed_set = true; });
    verify_cmd->add_option("--widths", verify_widths,
                           "Comma-separated layer widths for the bnn suite, e.g. 1,2,2,1");
    verify_cmd->add_option("--out", verify_out, "Write the JSON report to this path");

    std::string bnn_widths = "1,2,2,1";
    std::string bnn_activation = "tanh";
    std::uint64_t bnn_seed = 0;
    bool bnn_seed_set = false;
    double bnn_sigma2_y = 0.1;
    std::string bnn_dataset;
    std::int64_t bnn_synthetic = -1;
    bool bnn_fit = false;
    std::string bnn_out;
    CLI::App* bnn_cmd = app.add_subcommand(
        "bnn-check", "Network invariance checks, permutation gap and optional layer-wise fit");
    bnn_cmd->add_option("--widths", bnn_widths, "Comma-separated layer widths");
    bnn_cmd->add_option("--activation", bnn_activation, "identity | tanh | relu");
    bnn_cmd->add_option("--seed", bnn_seed, "Random seed")->each([&](const std::string&) {
        bnn_seed_set = true;
    });
    bnn_cmd->add_option("--sigma2-y", bnn_sigma2_y, "Observation noise variance");
    bnn_cmd->add_option("--dataset", bnn_dataset,
                        "JSON dataset file {\"x\": [[...]...], \"y\": [...]}");
    bnn_cmd->add_option("--n-data", bnn_synthetic,
                        "Generate this many synthetic observations (0 = empty dataset)");
    bnn_cmd->add_flag("--fit", bnn_fit, "Run the layer-wise iterative fit");
    bnn_cmd->add_option("--out", bnn_out, "Write the JSON report to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gap_cmd->parsed() || elbo_cmd->parsed()) {
            const bool is_gap = gap_cmd->parsed();
            const SweepOptions& opt = is_gap ? gap_opt : elbo_opt;
            const std::string config = sweep_config_json(opt).dump();
            char* csv = nullptr;
            const ig_status status =
                is_gap ? ig_run_gap_sweep(config.c_str(),
                                          opt.out.empty() ? nullptr : opt.out.c_str(), &csv)
                       : ig_run_elbo_sweep(config.c_str(),
                                           opt.out.empty() ? nullptr : opt.out.c_str(), &csv);
            if (int rc = check(status)) return rc;
            emit(csv, opt.out);
            ig_string_free(csv);
            return 0;
        }
        if (verify_cmd->parsed()) {
            const std::uint64_t seed = verify_seed_set ? verify_seed : env_seed(0);
            std::string widths_json;
            if (!verify_widths.empty()) {
                widths_json = json(parse_widths(verify_widths)).dump();
            }
            char* report = nullptr;
            int32_t all_passed = 0;
            const ig_status status =
                ig_run_verify(verify_suite.c_str(), seed,
                              widths_json.empty() ? nullptr : widths_json.c_str(), &report,
                              &all_passed);
            if (int rc = check(status)) return rc;
            if (!verify_out.empty()) {
                std::ofstream out(verify_out, std::ios::binary);
                out << report << "\n";
            } else {
                std::cout << report << "\n";
            }
            ig_string_free(report);
            return all_passed ? 0 : 1;
        }
        if (bnn_cmd->parsed()) {
            json config;
            config["widths"] = parse_widths(bnn_widths);
            config["activation"] = bnn_activation;
            config["seed"] = bnn_seed_set ? bnn_seed : env_seed(0);
            config["sigma2_y"] = bnn_sigma2_y;
            if (!bnn_dataset.empty()) {
                std::ifstream in(bnn_dataset);
                if (!in) throw std::runtime_error("cannot read dataset: " + bnn_dataset);
                json dataset;
                in >> dataset;
                config["dataset"] = std::move(dataset);
            } else if (bnn_synthetic >= 0) {
                config["synthetic_n"] = bnn_synthetic;
            }
            config["fit"] = bnn_fit;
            char* report = nullptr;
            int32_t all_passed = 0;
            const std::string config_text = config.dump();
            if (int rc = check(ig_run_bnn_check(config_text.c_str(), &report, &all_passed))) {
                return rc;
            }
            if (!bnn_out.empty()) {
                std::ofstream out(bnn_out, std::ios::binary);
                out << report << "\n";
            } else {
                std::cout << report << "\n";
            }
            ig_string_free(report);
            return all_passed ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
