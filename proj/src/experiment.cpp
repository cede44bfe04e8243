#include "outage/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "outage/metrics.hpp"
#include "outage/specfun.hpp"

namespace outage {
namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    for (char c : value) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) out.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    if (!item.empty()) out.push_back(item);
    return out;
}

class LineParser {
public:
    LineParser(std::string source, int line) : source_(std::move(source)), line_(line) {}

    [[noreturn]] void fail(const std::string& msg) const { throw SpecError(source_, line_, msg); }

    double real(const std::string& key, const std::string& text) const {
        double v = 0.0;
        const char* end = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(text.data(), end, v);
        if (ec != std::errc() || ptr != end || !std::isfinite(v)) fail("'" + key + "' expects a number, got '" + text + "'");
        return v;
    }

    std::uint64_t count(const std::string& key, const std::string& text) const {
        const double v = real(key, text);
        if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e18) {
            fail("'" + key + "' expects a nonnegative integer, got '" + text + "'");
        }
        return static_cast<std::uint64_t>(v);
    }

    std::vector<double> reals(const std::string& key, const std::string& text) const {
        std::vector<double> out;
        for (const auto& item : split_list(text)) out.push_back(real(key, item));
        if (out.empty()) fail("'" + key + "' expects at least one value");
        return out;
    }

private:
    std::string source_;
    int line_;
};

std::string fmt4(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string csv_text(std::string s) {
    for (char& c : s) {
        if (c == ',' || c == '"' || c == '\n') c = ';';
    }
    return s;
}

std::string mu_text(const ChannelConfig& c) {
    if (c.identical_means()) return fmt4(c.mu().front());
    std::string out;
    for (std::size_t i = 0; i < c.mu().size(); ++i) {
        if (i) out += ';';
        out += fmt4(c.mu()[i]);
    }
    return out;
}

json config_json(const ChannelConfig& c) {
    return {{"M", c.branches()}, {"m", c.combined()}, {"mu", c.mu()}, {"gamma_th", c.threshold()}};
}

double safe_metric(double (*f)(const EstimateResult&), const EstimateResult& r) {
    try {
        return f(r);
    } catch (const std::domain_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

SpecError::SpecError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      line_(line) {}

ChannelConfig ExperimentSpec::config() const {
    if (mu.size() == 1) return ChannelConfig::identical(M, m, mu.front(), gamma_th);
    return ChannelConfig(m, mu, gamma_th);
}

ChannelConfig ExperimentSpec::config_at(double axis_value) const {
    if (!sweep) return config();
    if (sweep->kind == SweepKind::gamma_th) return config().with_threshold(axis_value);
    return ChannelConfig::identical(M, m, axis_value, gamma_th);
}

std::uint64_t ExperimentSpec::samples_for(Method method) const {
    const auto it = samples.find(method);
    return it == samples.end() ? default_samples : it->second;
}

ExperimentSpec parse_spec(std::istream& in, const std::string& source) {
    ExperimentSpec spec;
    std::string section;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    bool have_M = false, have_m = false, have_mu = false, have_gamma = false, have_methods = false;
    bool have_axis = false, have_values = false;
    int mu_line = 0, methods_line = 0, values_line = 0, axis_line = 0;
    SweepAxis axis;

    while (std::getline(in, line)) {
        ++lineno;
        const LineParser p(source, lineno);
        const auto hash = line.find('#');
        const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') p.fail("unterminated section header");
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            if (section != "channel" && section != "run" && section != "sweep" && section != "hyper") {
                p.fail("unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) p.fail("expected 'key = value'");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        const std::string value = trim(std::string_view(text).substr(eq + 1));
        if (section.empty()) p.fail("key '" + key + "' outside of any section");
        if (key.empty()) p.fail("empty key");
        if (value.empty() && key != "methods") p.fail("key '" + key + "' has no value");
        if (!seen.insert(section + "." + key).second) p.fail("duplicate key '" + key + "' in [" + section + "]");

        if (section == "channel") {
            if (key == "M") {
                spec.M = p.count(key, value);
                have_M = true;
            } else if (key == "m") {
                spec.m = p.count(key, value);
                have_m = true;
            } else if (key == "mu") {
                spec.mu = p.reals(key, value);
                have_mu = true;
                mu_line = lineno;
            } else if (key == "gamma_th") {
                spec.gamma_th = p.real(key, value);
                have_gamma = true;
            } else {
                p.fail("unknown key '" + key + "' in [channel]");
            }
        } else if (section == "run") {
            if (key == "methods") {
                methods_line = lineno;
                have_methods = true;
                for (const auto& name : split_list(value)) {
                    try {
                        const Method m = parse_method(name);
                        if (std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end()) {
                            p.fail("method '" + name + "' listed twice");
                        }
                        spec.methods.push_back(m);
                    } catch (const std::invalid_argument& e) {
                        p.fail(e.what());
                    }
                }
            } else if (key == "seed") {
                spec.seed = p.count(key, value);
            } else if (key == "samples") {
                spec.default_samples = p.count(key, value);
                if (spec.default_samples < 1) p.fail("'samples' must be >= 1");
            } else if (key.rfind("samples.", 0) == 0) {
                Method m;
                try {
                    m = parse_method(key.substr(8));
                } catch (const std::invalid_argument& e) {
                    p.fail(e.what());
                }
                const auto n = p.count(key, value);
                if (n < 1) p.fail("'" + key + "' must be >= 1");
                spec.samples[m] = n;
            } else {
                p.fail("unknown key '" + key + "' in [run]");
            }
        } else if (section == "sweep") {
            if (key == "axis") {
                have_axis = true;
                axis_line = lineno;
                if (value == "gamma_th") axis.kind = SweepKind::gamma_th;
                else if (value == "mu") axis.kind = SweepKind::mu;
                else p.fail("sweep axis must be 'gamma_th' or 'mu'");
            } else if (key == "values") {
                have_values = true;
                values_line = lineno;
                axis.values = p.reals(key, value);
            } else {
                p.fail("unknown key '" + key + "' in [sweep]");
            }
        } else {  // hyper
            auto& h = spec.hyper;
            if (key == "rho") {
                h.rho = p.real(key, value);
                if (!(h.rho > 0.0 && h.rho < 1.0)) p.fail("'rho' must lie in (0, 1)");
            } else if (key == "ce_pilot") {
                h.ce_pilot = p.count(key, value);
                if (h.ce_pilot < 100) p.fail("'ce_pilot' must be >= 100");
            } else if (key == "mls_target") {
                h.mls_target = p.real(key, value);
                if (!(h.mls_target > 0.0 && h.mls_target < 1.0)) p.fail("'mls_target' must lie in (0, 1)");
            } else if (key == "mls_pilot") {
                h.mls_pilot = p.count(key, value);
                if (h.mls_pilot < 10) p.fail("'mls_pilot' must be >= 10");
            } else if (key == "mls_per_level") {
                h.mls_per_level = p.count(key, value);
                if (h.mls_per_level < 10) p.fail("'mls_per_level' must be >= 10");
            } else if (key == "mls_replications") {
                h.mls_replications = p.count(key, value);
                if (h.mls_replications < 2) p.fail("'mls_replications' must be >= 2");
            } else if (key == "mls_levels") {
                h.mls_levels = p.reals(key, value);
            } else {
                p.fail("unknown key '" + key + "' in [hyper]");
            }
        }
    }

    if (!have_M) throw SpecError(source, 0, "missing [channel] M");
    if (!have_m) throw SpecError(source, 0, "missing [channel] m");
    if (!have_mu) throw SpecError(source, 0, "missing [channel] mu");
    if (!have_gamma) throw SpecError(source, 0, "missing [channel] gamma_th");
    if (!have_methods || spec.methods.empty()) {
        throw SpecError(source, methods_line, "methods must list at least one estimator");
    }
    if (spec.mu.size() != 1 && spec.mu.size() != spec.M) {
        throw SpecError(source, mu_line, "mu must have 1 or M values");
    }
    if (have_axis != have_values) throw SpecError(source, have_axis ? axis_line : values_line, "[sweep] needs both axis and values");
    if (have_axis) {
        for (double v : axis.values) {
            if (!(v > 0.0)) throw SpecError(source, values_line, "sweep values must be positive");
        }
        const bool up = std::is_sorted(axis.values.begin(), axis.values.end(), std::less<>());
        const bool down = std::is_sorted(axis.values.begin(), axis.values.end(), std::greater<>());
        if (!up && !down) throw SpecError(source, values_line, "sweep values must be sorted");
        if (axis.kind == SweepKind::mu && spec.mu.size() != 1) {
            throw SpecError(source, axis_line, "a mu sweep needs a scalar mu");
        }
        spec.sweep = axis;
    }
    try {
        (void)spec.config();
        if (spec.hyper.mls_levels) {
            double prev = 0.0;
            for (double t : *spec.hyper.mls_levels) {
                if (!(t > prev) || t > 1.0) throw std::invalid_argument("mls_levels must increase strictly within (0, 1]");
                prev = t;
            }
            if (prev != 1.0) throw std::invalid_argument("mls_levels must end at 1");
        }
    } catch (const std::invalid_argument& e) {
        throw SpecError(source, 0, e.what());
    }
    return spec;
}

ExperimentSpec parse_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError(path.string(), 0, "cannot open spec file");
    return parse_spec(in, path.string());
}

MethodRun run_method(Method method, const ChannelConfig& config, const ExperimentSpec& spec,
                     const RunSettings& settings) {
    MethodRun run{method, config, std::nullopt, {}, false, "{}"};
    const std::uint64_t seed = settings.seed.value_or(spec.seed);
    RunOptions opts;
    opts.workers = settings.workers;
    const std::uint64_t S = spec.samples_for(method);
    json diag = json::object();
    try {
        switch (method) {
            case Method::nmc: {
                run.result = estimate_nmc(config, S, seed, opts);
                break;
            }
            case Method::uis: {
                auto e = estimate_uis(config, S, seed, opts);
                diag["ell1"] = e.ell1;
                run.result = std::move(e.result);
                break;
            }
            case Method::pis: {
                auto e = estimate_pis(config, S, seed, opts, settings.mode_constant);
                diag["ell2"] = e.plan.ell2;
                diag["blocks"] = json::array();
                for (std::size_t k = 0; k < e.plan.blocks.size(); ++k) {
                    const auto& b = e.plan.blocks[k];
                    const auto& mb = e.bounds[k];
                    diag["blocks"].push_back({{"start", b.start},
                                              {"size", b.size},
                                              {"delta", b.delta},
                                              {"m_ell", number_or_null(mb.value)},
                                              {"log_m_ell", mb.log_value},
                                              {"case", mell_case_name(mb.branch)}});
                }
                diag["proposals"] = e.rejection.proposals;
                diag["acceptance_rate"] = e.rejection.acceptance_rate();
                diag["bound_violations"] = e.rejection.violations;
                diag["max_log_ratio"] = e.rejection.max_log_ratio;
                run.result = std::move(e.result);
                break;
            }
            case Method::et: {
                auto e = estimate_et(config, S, seed, opts);
                diag["hit_rate"] = e.hit_rate;
                diag["proposal_rate"] = static_cast<double>(config.branches()) / config.threshold();
                run.result = std::move(e.result);
                break;
            }
            case Method::ce: {
                CeOptions ce;
                ce.pilot_samples = spec.hyper.ce_pilot;
                ce.rho = spec.hyper.rho;
                auto e = estimate_ce(config, S, seed, ce, opts);
                diag["rho"] = ce.rho;
                diag["pilot_samples"] = ce.pilot_samples;
                diag["trace"] = json::array();
                for (const auto& t : e.trace) {
                    diag["trace"].push_back({{"iteration", t.iteration}, {"gamma_t", t.gamma_t}, {"v1", t.v1}, {"v2", t.v2}});
                }
                run.result = std::move(e.result);
                break;
            }
            case Method::mls: {
                MlsOptions mo;
                mo.per_level_samples = spec.hyper.mls_per_level;
                mo.replications = spec.hyper.mls_replications;
                mo.target_cond_prob = spec.hyper.mls_target;
                mo.pilot_samples = spec.hyper.mls_pilot;
                mo.levels = spec.hyper.mls_levels;
                auto e = estimate_mls(config, seed, mo, opts);
                diag["levels"] = e.schedule.levels;
                diag["per_level_samples"] = e.schedule.per_level_samples;
                diag["survivor_fractions"] = e.schedule.survivor_fractions;
                diag["replications"] = e.replications;
                diag["zero_replications"] = e.zero_replications;
                diag["target_cond_prob"] = mo.target_cond_prob;
                diag["pilot_samples"] = mo.levels ? 0 : mo.pilot_samples;
                run.result = std::move(e.result);
                break;
            }
        }
    } catch (const EstimationError& e) {
        run.error = e.what();
        run.runtime_failure = true;
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.diagnostics_json = diag.dump();
    return run;
}

std::vector<MethodRun> run_experiment(const ExperimentSpec& spec, const RunSettings& settings) {
    std::vector<MethodRun> runs;
    const ChannelConfig config = spec.config();
    for (Method m : spec.methods) runs.push_back(run_method(m, config, spec, settings));
    return runs;
}

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec, const RunSettings& settings) {
    if (!spec.sweep) throw std::invalid_argument("spec has no [sweep] section");
    std::vector<SweepPoint> points;
    for (double v : spec.sweep->values) {
        const ChannelConfig config = spec.config_at(v);
        for (Method m : spec.methods) points.push_back({v, run_method(m, config, spec, settings)});
    }
    return points;
}

std::string results_csv_header() {
    return "method,M,m,mu,gamma_th,S,p_hat,var_hat,re_pct,scv,wnrv_time,wnrv_work,wall_time_s,seed,warnings\n";
}

std::string results_csv_row(const MethodRun& run) {
    const auto& c = run.config;
    std::ostringstream o;
    o << method_name(run.method) << ',' << c.branches() << ',' << c.combined() << ',' << mu_text(c) << ','
      << fmt4(c.threshold()) << ',';
    if (!run.result) {
        o << ",,,,,,,,," << "error: " << csv_text(run.error) << '\n';
        return o.str();
    }
    const auto& r = *run.result;
    const double re = safe_metric(relative_error, r);
    std::string warnings;
    for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    for (const auto& w : efficiency(r).warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    o << r.samples << ',' << fmt4(r.p_hat) << ',' << fmt4(r.var_hat) << ',' << fmt4(100.0 * re) << ','
      << fmt4(safe_metric(scv, r)) << ',' << fmt4(safe_metric(wnrv_time, r)) << ',' << fmt4(safe_metric(wnrv_work, r))
      << ',' << fmt4(r.wall_time_s) << ',' << r.seed << ',' << csv_text(warnings) << '\n';
    return o.str();
}

std::string sweep_scv_csv(const std::vector<SweepPoint>& points) {
    std::string out = "axis_value,method,scv\n";
    for (const auto& p : points) {
        out += fmt4(p.axis_value) + ',' + method_name(p.run.method) + ',';
        out += p.run.result ? fmt4(safe_metric(scv, *p.run.result)) : std::string("nan");
        out += '\n';
    }
    return out;
}

std::string results_json(const ExperimentSpec& spec, const RunSettings& settings, const std::vector<MethodRun>& runs,
                         const std::vector<double>* axis_values) {
    json doc;
    json methods = json::array();
    for (Method m : spec.methods) methods.push_back(method_name(m));
    json samples = json::object();
    for (Method m : spec.methods) samples[method_name(m)] = spec.samples_for(m);
    doc["spec"] = {{"M", spec.M},
                   {"m", spec.m},
                   {"mu", spec.mu},
                   {"gamma_th", spec.gamma_th},
                   {"methods", methods},
                   {"samples", samples},
                   {"seed", settings.seed.value_or(spec.seed)}};
    if (spec.sweep) {
        doc["spec"]["sweep"] = {{"axis", spec.sweep->kind == SweepKind::gamma_th ? "gamma_th" : "mu"},
                                {"values", spec.sweep->values}};
    }
    const auto& h = spec.hyper;
    doc["hyper"] = {{"rho", h.rho},
                    {"ce_pilot", h.ce_pilot},
                    {"mls_target", h.mls_target},
                    {"mls_pilot", h.mls_pilot},
                    {"mls_per_level", h.mls_per_level},
                    {"mls_replications", h.mls_replications},
                    {"mls_levels", h.mls_levels ? json(*h.mls_levels) : json(nullptr)},
                    {"pis_mode_constant", settings.mode_constant}};
    doc["workers"] = settings.workers;
    json rows = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        json row;
        row["method"] = method_name(run.method);
        if (axis_values) row["axis_value"] = (*axis_values)[i];
        row["config"] = config_json(run.config);
        if (run.result) {
            const auto& r = *run.result;
            const auto eff = efficiency(r);
            row["p_hat"] = r.p_hat;
            row["var_hat"] = r.var_hat;
            row["sample_var"] = r.sample_var ? json(*r.sample_var) : json(nullptr);
            row["samples"] = r.samples;
            row["work_units"] = r.work_units;
            row["wall_time_s"] = r.wall_time_s;
            row["seed"] = r.seed;
            row["re"] = number_or_null(eff.re);
            row["scv"] = number_or_null(eff.scv);
            row["wnrv_time"] = number_or_null(eff.wnrv);
            row["wnrv_work"] = number_or_null(eff.wnrv_work);
            row["ci95"] = {eff.ci95.first, eff.ci95.second};
            auto warnings = r.warnings;
            warnings.insert(warnings.end(), eff.warnings.begin(), eff.warnings.end());
            row["warnings"] = warnings;
        } else {
            row["error"] = run.error;
        }
        row["diagnostics"] = json::parse(run.diagnostics_json);
        rows.push_back(std::move(row));
    }
    doc["runs"] = std::move(rows);
    return doc.dump(2) + "\n";
}

// ------------------------------------------------------------------- verify

namespace {

struct Budget {
    std::uint64_t samples = 200000;
    std::uint64_t ce_pilot = 20000;
    std::uint64_t mls_per_level = 2000;
    std::uint64_t mls_replications = 20;
    std::uint64_t mls_pilot = 2000;
};

std::vector<EstimateResult> all_estimators(const ChannelConfig& config, std::uint64_t seed, unsigned workers,
                                           double mode_constant, const Budget& b) {
    RunOptions opts;
    opts.workers = workers;
    std::vector<EstimateResult> out;
    out.push_back(estimate_nmc(config, b.samples, seed, opts));
    out.push_back(estimate_uis(config, b.samples, seed, opts).result);
    out.push_back(estimate_pis(config, b.samples, seed, opts, mode_constant).result);
    out.push_back(estimate_et(config, b.samples, seed, opts).result);
    CeOptions ce;
    ce.pilot_samples = b.ce_pilot;
    out.push_back(estimate_ce(config, b.samples, seed, ce, opts).result);
    MlsOptions mo;
    mo.per_level_samples = b.mls_per_level;
    mo.replications = b.mls_replications;
    mo.pilot_samples = b.mls_pilot;
    out.push_back(estimate_mls(config, seed, mo, opts).result);
    return out;
}

double standard_error(const EstimateResult& r) { return std::sqrt(r.var_hat / static_cast<double>(r.samples)); }

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

CheckResult agreement_check(const std::string& name, const ChannelConfig& config, double reference,
                            double reference_se, const VerifySettings& s) {
    CheckResult c{name, true, ""};
    const auto results = all_estimators(config, s.seed, s.workers, s.mode_constant, Budget{});
    for (const auto& r : results) {
        const double se = std::hypot(standard_error(r), reference_se);
        const double z = se > 0.0 ? std::fabs(r.p_hat - reference) / se : 0.0;
        const bool ok = std::fabs(r.p_hat - reference) <= 4.0 * se + 1e-12 * reference;
        if (!ok) c.passed = false;
        c.detail += (c.detail.empty() ? "" : " ") + method_name(r.method) + "_z=" + short_num(z);
    }
    return c;
}

}  // namespace

std::vector<CheckResult> verify_suite(const VerifySettings& s) {
    std::vector<CheckResult> checks;
    RunOptions opts;
    opts.workers = s.workers;

    {
        const auto cfg = ChannelConfig::identical(3, 1, 0.5, 0.3);
        checks.push_back(agreement_check("closed_form_m1", cfg, *closed_form_outage(cfg), 0.0, s));
    }
    {
        const auto cfg = ChannelConfig::identical(3, 3, 0.5, 0.5);
        checks.push_back(agreement_check("closed_form_mM", cfg, *closed_form_outage(cfg), 0.0, s));
    }
    {
        const auto cfg = ChannelConfig::identical(3, 2, 0.5, 0.3);
        const auto ref = estimate_nmc(cfg, 4000000, s.seed + 1, opts);
        checks.push_back(agreement_check("small_instance_nmc", cfg, ref.p_hat, standard_error(ref), s));
    }
    {
        const auto cfg = ChannelConfig::identical(8, 4, 0.5, 1.0);
        const auto uis = estimate_uis(cfg, 200000, s.seed, opts).result;
        const auto pis = estimate_pis(cfg, 200000, s.seed, opts, s.mode_constant).result;
        for (const auto* r : {&uis, &pis}) {
            const double rel = std::fabs(*r->sample_var / r->var_hat - 1.0);
            checks.push_back({method_name(r->method) + "_variance_closed_form", rel <= 0.05,
                              "rel_diff=" + short_num(rel)});
        }
    }
    {
        // One point per rejection-constant branch, plus a mean just above 1
        // where the interior-mode bound is tightest.
        struct Point {
            double mu;
            std::size_t n;
            double gamma;
        };
        const Point grid[] = {{0.5, 4, 1.0}, {2.3, 4, 1.0}, {1.05, 1, 1.0}, {2.3, 4, 17.0}, {1.5, 2, 3.0}};
        std::uint64_t violations = 0;
        std::string detail;
        for (std::size_t k = 0; k < std::size(grid); ++k) {
            const auto& g = grid[k];
            PisBlockSampler sampler(g.mu, g.n, g.gamma, s.mode_constant);
            Engine eng(RngStream{s.seed, 100 + k});
            std::vector<double> x(g.n);
            for (int i = 0; i < 20000; ++i) sampler.draw(x, eng);
            violations += sampler.stats().violations;
            detail += (detail.empty() ? "" : " ") + std::string(mell_case_name(sampler.bound().branch)) + "@mu=" +
                      short_num(g.mu) + ":accept*M=" +
                      short_num(sampler.stats().acceptance_rate() * sampler.bound().value);
        }
        checks.push_back({"rejection_guard", violations == 0, "violations=" + std::to_string(violations) + " " + detail});
    }
    return checks;
}

}  // namespace outage
