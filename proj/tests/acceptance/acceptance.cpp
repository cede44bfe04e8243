// Acceptance gate: one PASS/FAIL line per criterion, followed by the numbers
// behind it. Exit status is nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "outage/estimators.hpp"
#include "outage/metrics.hpp"
#include "outage/samplers.hpp"

using namespace outage;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& note) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "  ok   " : "  MISS ") + note);
    }
};

RunOptions run_opts() {
    RunOptions o;
    o.workers = std::max(1u, std::thread::hardware_concurrency());
    return o;
}

double rel_diff(double a, double b) { return std::fabs(a / b - 1.0); }

double standard_error(const EstimateResult& r) { return std::sqrt(r.var_hat / static_cast<double>(r.samples)); }

EstimateResult run(Method m, const ChannelConfig& c, std::uint64_t S, std::uint64_t seed) {
    const auto o = run_opts();
    switch (m) {
        case Method::nmc: return estimate_nmc(c, S, seed, o);
        case Method::uis: return estimate_uis(c, S, seed, o).result;
        case Method::pis: return estimate_pis(c, S, seed, o).result;
        case Method::et: return estimate_et(c, S, seed, o).result;
        case Method::ce: return estimate_ce(c, S, seed, {}, o).result;
        case Method::mls: return estimate_mls(c, seed, {}, o).result;
    }
    return {};
}

// Checks that each method lands within tol of a quoted value.
void quoted_point(Outcome& out, const ChannelConfig& c, double quoted, double tol, std::initializer_list<Method> methods,
                  std::uint64_t S, std::uint64_t seed) {
    for (Method m : methods) {
        const auto r = run(m, c, S, seed);
        out.check(rel_diff(r.p_hat, quoted) <= tol,
                  fmt("%-3s M=%zu m=%zu mu=%g gamma=%g: p=%.4e vs %.3e (diff %.2f%%, tol %.0f%%, RE %.2f%%)",
                      method_name(m).c_str(), c.branches(), c.combined(), c.mu()[0], c.threshold(), r.p_hat, quoted,
                      100 * rel_diff(r.p_hat, quoted), 100 * tol, 100 * relative_error(r)));
    }
}

// ------------------------------------------------------------- criteria

Outcome base_point() {
    Outcome out;
    const auto t0 = Clock::now();
    for (const auto& [gamma, quoted] : {std::pair{1.0, 9.22e-6}, std::pair{0.5, 5.56e-8}}) {
        const auto c = ChannelConfig::identical(8, 4, 0.5, gamma);
        quoted_point(out, c, quoted, 0.01, {Method::pis, Method::et, Method::ce}, 1000000, 1);
        const auto uis = run(Method::uis, c, 5000000, 1);
        out.notes.push_back(fmt("  info uis gamma=%g: p=%.4e RE %.2f%% (not gated)", gamma, uis.p_hat,
                                100 * relative_error(uis)));
    }
    const double t = seconds_since(t0);
    out.check(t <= 120.0, fmt("total wall time %.1f s (budget 120 s)", t));
    return out;
}

Outcome rarer_thresholds() {
    Outcome out;
    for (const auto& [gamma, quoted] : {std::pair{0.4, 1.02e-8}, std::pair{0.3, 1.11e-9}, std::pair{0.2, 4.73e-11}}) {
        quoted_point(out, ChannelConfig::identical(8, 4, 0.5, gamma), quoted, 0.02, {Method::pis, Method::et, Method::ce},
                     1000000, 2);
    }
    return out;
}

Outcome two_of_eight() {
    Outcome out;
    const auto c = ChannelConfig::identical(8, 2, 0.5, 0.1);
    quoted_point(out, c, 9.05e-12, 0.03, {Method::pis, Method::ce}, 1000000, 3);
    const double et_re = relative_error(run(Method::et, c, 1000000, 3));
    const double pis_re = relative_error(run(Method::pis, c, 1000000, 3));
    out.check(et_re >= 5.0 * pis_re, fmt("ET RE %.2f%% vs PIS RE %.3f%%: ratio %.1f (need >= 5)", 100 * et_re,
                                         100 * pis_re, et_re / pis_re));
    return out;
}

Outcome large_means() {
    Outcome out;
    quoted_point(out, ChannelConfig::identical(8, 4, 2.3, 17.0), 9.0e-4, 0.03, {Method::pis, Method::et, Method::ce},
                 1000000, 4);
    quoted_point(out, ChannelConfig::identical(8, 4, 3.0, 17.0), 1.07e-8, 0.03, {Method::ce}, 1000000, 4);
    for (const auto& [mu, quoted] : {std::pair{2.3, 6.15}, std::pair{3.0, 313.6}}) {
        const auto b = compute_m_ell(mu, 4, 17.0);
        out.check(rel_diff(b.value, quoted) <= 0.01,
                  fmt("rejection constant mu=%g block=4 gamma=17 (%s): %.4g vs %.4g (diff %.1f%%, tol 1%%)", mu,
                      mell_case_name(b.branch), b.value, quoted, 100 * rel_diff(b.value, quoted)));
    }
    return out;
}

void agree(Outcome& out, const EstimateResult& r, double ref, double ref_se, const char* label) {
    const double se = std::hypot(standard_error(r), ref_se);
    const double z = se > 0.0 ? std::fabs(r.p_hat - ref) / se : 0.0;
    const bool ok = std::fabs(r.p_hat - ref) <= 4.0 * se + 1e-12 * ref;
    out.check(ok, fmt("%s %-3s: p=%.6e vs %.6e, z=%.2f (need <= 4)", label, method_name(r.method).c_str(), r.p_hat, ref,
                      z));
}

Outcome oracle_equivalence() {
    Outcome out;
    const auto t0 = Clock::now();
    const Method all[] = {Method::nmc, Method::uis, Method::pis, Method::et, Method::ce, Method::mls};

    const auto small = ChannelConfig::identical(3, 2, 0.5, 0.5);
    const auto ref = estimate_nmc(small, 100000000, 50, run_opts());
    out.notes.push_back(fmt("  info reference NMC S=1e8: p=%.6e RE %.3f%%", ref.p_hat, 100 * relative_error(ref)));
    for (Method m : all) agree(out, run(m, small, 1000000, 51), ref.p_hat, standard_error(ref), "M=3 m=2");

    for (const auto& c : {ChannelConfig::identical(3, 1, 0.5, 0.3), ChannelConfig::identical(3, 3, 0.5, 0.5)}) {
        const double exact = *closed_form_outage(c);
        const std::string label = c.combined() == 1 ? "m=1  " : "m=M  ";
        for (Method m : all) agree(out, run(m, c, 1000000, 52), exact, 0.0, label.c_str());
    }
    const double t = seconds_since(t0);
    out.check(t <= 300.0, fmt("wall time %.1f s (budget 300 s)", t));
    return out;
}

Outcome closed_form_variance() {
    Outcome out;
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    // The plug-in var_hat is the closed form evaluated at p_hat; the check
    // compares the empirical variance against it at an independent p.
    const auto ref = estimate_ce(c, 4000000, 60, {}, run_opts()).result;
    const double p = ref.p_hat;
    out.notes.push_back(fmt("  info reference p=%.5e from CE S=4e6 (RE %.3f%%)", p, 100 * relative_error(ref)));

    const auto uis = estimate_uis(c, 1000000, 61, run_opts());
    const double uis_cf = uis.ell1 * p - p * p;
    out.check(rel_diff(*uis.result.sample_var, uis_cf) <= 0.05,
              fmt("UIS sample variance %.4e vs l1 p - p^2 = %.4e (diff %.1f%%, tol 5%%)", *uis.result.sample_var,
                  uis_cf, 100 * rel_diff(*uis.result.sample_var, uis_cf)));

    const auto pis = estimate_pis(c, 1000000, 62, run_opts());
    const double pis_cf = pis.plan.ell2 * p - p * p;
    out.check(rel_diff(*pis.result.sample_var, pis_cf) <= 0.05,
              fmt("PIS sample variance %.4e vs l2 p - p^2 = %.4e (diff %.2f%%, tol 5%%)", *pis.result.sample_var,
                  pis_cf, 100 * rel_diff(*pis.result.sample_var, pis_cf)));
    return out;
}

Outcome bounded_relative_error() {
    Outcome out;
    for (Method m : {Method::et, Method::pis}) {
        std::vector<double> s;
        std::string detail;
        for (double gamma : {0.4, 0.3, 0.2, 0.1}) {
            s.push_back(scv(run(m, ChannelConfig::identical(8, 4, 0.5, gamma), 1000000, 70)));
            detail += fmt(" %.3g", s.back());
        }
        const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
        out.check(*hi / *lo <= 2.0, fmt("%s SCV over gamma 0.4..0.1:%s  max/min %.2f (need <= 2)",
                                        method_name(m).c_str(), detail.c_str(), *hi / *lo));
    }
    const double exact = compute_m_ell(40.0, 4, 1.0).log_value;
    const double asym = log_m_ell_asymptotic(40.0, 4, 1.0);
    out.check(rel_diff(exact, asym) <= 0.03,
              fmt("ln rejection constant at mu=40: exact %.4f vs asymptotic %.4f (diff %.2f%%, tol 3%%)", exact, asym,
                  100 * rel_diff(exact, asym)));
    return out;
}

Outcome rejection_soundness() {
    Outcome out;
    struct Point {
        double mu;
        std::size_t n;
        double gamma;
    };
    const Point grid[] = {{0.5, 4, 1.0},  {0.0, 2, 0.5},  {1.0, 3, 2.0},   {2.3, 2, 3.0},
                          {3.0, 2, 2.0},  {2.3, 4, 17.0}, {3.0, 4, 17.0},  {1.05, 1, 1.0}};
    const std::uint64_t per_point = 1000000 / std::size(grid) + 1;
    std::uint64_t proposals = 0, violations = 0;
    bool cases[3] = {false, false, false};
    for (std::size_t k = 0; k < std::size(grid); ++k) {
        const auto& g = grid[k];
        PisBlockSampler sampler(g.mu, g.n, g.gamma);
        Engine eng(RngStream{80, k});
        std::vector<double> x(g.n);
        // Enough proposals for about 4000 acceptances, so the rate is known
        // to about 1.6%.
        const auto need = std::max<std::uint64_t>(per_point, static_cast<std::uint64_t>(4000.0 * sampler.bound().value));
        while (sampler.stats().proposals < need) sampler.draw(x, eng);
        const auto& st = sampler.stats();
        proposals += st.proposals;
        violations += st.violations;
        cases[static_cast<int>(sampler.bound().branch)] = true;
        const double ratio = st.acceptance_rate() * sampler.bound().value;
        out.check(std::fabs(ratio - 1.0) <= 0.05,
                  fmt("mu=%g n=%zu gamma=%g (%s): M=%.4g, acceptance*M=%.4f over %llu proposals", g.mu, g.n, g.gamma,
                      mell_case_name(sampler.bound().branch), sampler.bound().value, ratio,
                      static_cast<unsigned long long>(st.proposals)));
    }
    out.check(cases[0] && cases[1] && cases[2], "grid covers all three bound branches");
    out.check(proposals >= 1000000 && violations == 0,
              fmt("%llu proposals, %llu bound violations", static_cast<unsigned long long>(proposals),
                  static_cast<unsigned long long>(violations)));
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(OUTAGE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Drops the wall-time-dependent columns (wnrv_time, wall_time_s).
std::string without_timing(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (int k = 0; k < 14; ++k) {
            const auto comma = line.find(',', start);
            if (comma == std::string::npos) break;
            cols.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        cols.push_back(line.substr(start));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k == 10 || k == 12) continue;
            out += cols[k] + (k + 1 < cols.size() ? "," : "\n");
        }
    }
    return out;
}

Outcome determinism() {
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / "outage_acceptance_sweep";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "sweep.ini") << "[channel]\nM = 8\nm = 4\nmu = 0.5\ngamma_th = 1\n"
                                        "[run]\nmethods = nmc, uis, pis, et, ce, mls\nseed = 7\nsamples = 100000\n"
                                        "[sweep]\naxis = gamma_th\nvalues = 1, 0.6, 0.4\n"
                                        "[hyper]\nce_pilot = 20000\nmls_pilot = 2000\nmls_per_level = 2000\n"
                                        "mls_replications = 10\n";
    std::string scv[2], results[2];
    const unsigned workers[2] = {1, 4};
    for (int k = 0; k < 2; ++k) {
        const auto sub = dir / ("w" + std::to_string(workers[k]));
        const int code = run_cli("sweep " + (dir / "sweep.ini").string() + " --seed 11 --workers " +
                                 std::to_string(workers[k]) + " --out-dir " + sub.string());
        out.check(code == 0, fmt("sweep with --workers %u exits %d", workers[k], code));
        scv[k] = slurp(sub / "sweep_scv.csv");
        results[k] = slurp(sub / "sweep_results.csv");
    }
    out.check(!scv[0].empty() && scv[0] == scv[1], fmt("SCV table byte-identical (%zu bytes)", scv[0].size()));
    out.check(!results[0].empty() && without_timing(results[0]) == without_timing(results[1]),
              "results table identical outside the wall-time columns");
    return out;
}

struct Tier {
    std::string name;
    double mean = 0.0;
    double se = 0.0;
};

// SCV mean and standard error over independent seeds.
Tier scv_over_seeds(Method m, const ChannelConfig& c, std::uint64_t S, int seeds) {
    std::vector<double> v;
    for (int k = 0; k < seeds; ++k) v.push_back(scv(run(m, c, S, 100 + k)));
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / seeds;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {method_name(m), mean, std::sqrt(ss / (seeds - 1) / seeds)};
}

// MLS: SCV is proportional to the variance of the replicate estimates; its
// standard error follows from their fourth central moment.
Tier mls_scv(const ChannelConfig& c) {
    MlsOptions o;
    o.replications = 200;
    const auto r = estimate_mls(c, 110, o, run_opts());
    const auto& x = r.replicate_estimates;
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double var_of_var = (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n;
    const double s = scv(r.result);
    const double rel_var = std::sqrt(std::max(var_of_var, 0.0)) / m2;
    const double rel_p = relative_error(r.result);
    return {"mls", s, s * std::hypot(rel_var, 2.0 * rel_p)};
}

Outcome method_ranking() {
    Outcome out;
    const auto c = ChannelConfig::identical(8, 4, 0.5, 1.0);
    const int seeds = 5;
    const Tier ce = scv_over_seeds(Method::ce, c, 1000000, seeds);
    const Tier et = scv_over_seeds(Method::et, c, 1000000, seeds);
    const Tier pis = scv_over_seeds(Method::pis, c, 1000000, seeds);
    const Tier uis = scv_over_seeds(Method::uis, c, 1000000, seeds);
    const Tier mls = mls_scv(c);
    // NMC has no usable samples here; its SCV is analytic at the CE estimate.
    const double p = estimate_ce(c, 4000000, 120, {}, run_opts()).result.p_hat;
    const Tier nmc{"nmc (analytic)", 1.0 / p - 1.0, 0.0};

    for (const Tier* t : {&ce, &et, &pis, &mls, &uis, &nmc}) {
        out.notes.push_back(fmt("  info %-15s SCV %.4g +- %.2g", t->name.c_str(), t->mean, t->se));
    }
    auto separated = [&](const Tier& lo, const Tier& hi) {
        const double se = std::hypot(lo.se, hi.se);
        const double gap = (hi.mean - lo.mean) / se;
        out.check(gap >= 3.0, fmt("%s < %s: gap %.1f SE (need >= 3)", lo.name.c_str(), hi.name.c_str(), gap));
    };
    separated(ce, et.mean < pis.mean ? et : pis);
    const double ratio = et.mean / pis.mean;
    out.check(ratio >= 0.5 && ratio <= 2.0, fmt("et ~ pis: SCV ratio %.2f (need within [0.5, 2])", ratio));
    separated(et.mean > pis.mean ? et : pis, mls);
    separated(mls, uis);
    separated(uis, nmc);
    return out;
}

}  // namespace

int main() {
    std::setvbuf(stdout, nullptr, _IOLBF, 0);
    struct Criterion {
        int id;
        const char* title;
        std::function<Outcome()> body;
    };
    const Criterion criteria[] = {
        {1, "quoted probabilities at M=8, m=4, mu=0.5 within 1%, under 2 min", base_point},
        {2, "quoted probabilities at gamma 0.4, 0.3, 0.2 within 2%", rarer_thresholds},
        {3, "M=8, m=2, gamma=0.1 within 3%; ET RE at least 5x PIS RE", two_of_eight},
        {4, "large-mean points at gamma=17 within 3%; rejection constants within 1%", large_means},
        {5, "all estimators agree with NMC reference and closed forms within 4 SE", oracle_equivalence},
        {6, "UIS and PIS empirical variance match closed forms within 5%", closed_form_variance},
        {7, "bounded relative error of ET and PIS; rejection-constant asymptote", bounded_relative_error},
        {8, "rejection sampler soundness over 1e6 proposals", rejection_soundness},
        {9, "sweep output independent of worker count", determinism},
        {10, "SCV ranking CE < ET ~ PIS << MLS << UIS < NMC at 3 SE", method_ranking},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("%s criterion %d: %s (%.0f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title, seconds_since(t0));
        for (const auto& n : o.notes) std::printf("%s\n", n.c_str());
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
