// Command-line front end: estimate, sweep and verify.
//
// Exit codes: 0 success, 1 invalid input, 2 an estimator failed at run time,
// 3 a verification check failed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "outage/experiment.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kInvalid = 1, kRuntime = 2, kVerify = 3 };

struct Common {
    std::string spec_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 1;
    std::string out_dir = ".";
    std::string format = "csv";
    double mode_constant = outage::kDefaultModeConstant;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

outage::RunSettings settings_from(const Common& c) {
    outage::RunSettings s;
    s.workers = c.workers;
    if (c.seed_given) s.seed = c.seed;
    s.mode_constant = c.mode_constant;
    return s;
}

int report_failures(const std::vector<const outage::MethodRun*>& runs) {
    int code = kOk;
    for (const auto* r : runs) {
        if (r->error.empty()) continue;
        std::cerr << "warning: " << outage::method_name(r->method) << ": " << r->error << '\n';
        if (r->runtime_failure) code = kRuntime;
    }
    return code;
}

int cmd_estimate(const Common& c) {
    const auto spec = outage::parse_spec_file(c.spec_path);
    const auto settings = settings_from(c);
    const auto runs = outage::run_experiment(spec, settings);
    const fs::path dir(c.out_dir);
    fs::create_directories(dir);
    const std::string stem = fs::path(c.spec_path).stem().string();

    std::string csv = outage::results_csv_header();
    for (const auto& r : runs) csv += outage::results_csv_row(r);
    const std::string json = outage::results_json(spec, settings, runs);
    if (c.format == "csv") {
        write_file(dir / (stem + ".csv"), csv);
        std::cout << csv;
    } else {
        std::cout << json;
    }
    write_file(dir / (stem + ".json"), json);

    std::vector<const outage::MethodRun*> ptrs;
    for (const auto& r : runs) ptrs.push_back(&r);
    return report_failures(ptrs);
}

int cmd_sweep(const Common& c) {
    const auto spec = outage::parse_spec_file(c.spec_path);
    if (!spec.sweep) throw outage::SpecError(c.spec_path, 0, "sweep needs a [sweep] section");
    const auto settings = settings_from(c);
    const auto points = outage::run_sweep(spec, settings);
    const fs::path dir(c.out_dir);
    fs::create_directories(dir);
    const std::string stem = fs::path(c.spec_path).stem().string();

    std::vector<outage::MethodRun> runs;
    std::vector<double> axis;
    std::string csv = outage::results_csv_header();
    for (const auto& p : points) {
        runs.push_back(p.run);
        axis.push_back(p.axis_value);
        csv += outage::results_csv_row(p.run);
    }
    const std::string json = outage::results_json(spec, settings, runs, &axis);
    const std::string scv = outage::sweep_scv_csv(points);
    if (c.format == "csv") {
        write_file(dir / (stem + "_scv.csv"), scv);
        write_file(dir / (stem + "_results.csv"), csv);
        std::cout << scv;
    } else {
        std::cout << json;
    }
    write_file(dir / (stem + ".json"), json);

    std::vector<const outage::MethodRun*> ptrs;
    for (const auto& p : points) ptrs.push_back(&p.run);
    return report_failures(ptrs);
}

int cmd_verify(const Common& c) {
    outage::VerifySettings s;
    if (c.seed_given) s.seed = c.seed;
    s.workers = c.workers;
    s.mode_constant = c.mode_constant;
    const auto checks = outage::verify_suite(s);
    bool ok = true;
    std::cout << "check,status,detail\n";
    for (const auto& ch : checks) {
        std::cout << ch.name << ',' << (ch.passed ? "pass" : "FAIL") << ',' << ch.detail << '\n';
        ok = ok && ch.passed;
    }
    return ok ? kOk : kVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Outage probability of GSC/MRC receivers under Rician fading by rare-event simulation"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App* sub, bool with_spec) {
        if (with_spec) sub->add_option("spec", c.spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", c.seed, "Override the spec seed");
        sub->add_option("--workers", c.workers, "Worker threads (results do not depend on it)")
            ->check(CLI::Range(1u, 1024u));
        sub->add_option("--pis-constant", c.mode_constant, "PIS density-bound constant (testing only)")
            ->check(CLI::PositiveNumber);
    };
    auto* estimate = app.add_subcommand("estimate", "Run every listed method at the spec's channel point");
    add_common(estimate, true);
    auto* sweep = app.add_subcommand("sweep", "Run the methods across the spec's sweep axis");
    add_common(sweep, true);
    for (auto* sub : {estimate, sweep}) {
        sub->add_option("--out-dir", c.out_dir, "Directory for output files");
        sub->add_option("--format", c.format, "Primary output format")->check(CLI::IsMember({"csv", "json"}));
    }
    auto* verify = app.add_subcommand("verify", "Run the oracle self-checks");
    add_common(verify, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }
    c.seed_given = (estimate->parsed() && estimate->count("--seed")) || (sweep->parsed() && sweep->count("--seed")) ||
                   (verify->parsed() && verify->count("--seed"));

    try {
        if (estimate->parsed()) return cmd_estimate(c);
        if (sweep->parsed()) return cmd_sweep(c);
        return cmd_verify(c);
    } catch (const outage::SpecError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const outage::EstimationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
