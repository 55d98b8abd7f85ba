// twee: Tracy-Widom empirical estimator command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "twee/csv.hpp"
#include "twee/error.hpp"
#include "twee/estimator.hpp"
#include "twee/parallel.hpp"
#include "twee/simulation.hpp"
#include "twee/tracy_widom.hpp"

namespace {

using nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1.0";

enum Exit : int { ok = 0, internal = 1, usage = 2, invalid = 3, degenerate = 4 };

/// A configuration problem that maps to the usage exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

struct LoadedMatrix {
    twee::DataMatrix data;
    ordered_json fingerprint;
};

LoadedMatrix load_matrix(const std::string& role, const std::string& path, bool header) {
    const std::string text = twee::read_file(path);
    twee::DataMatrix m = twee::parse_csv_matrix(text, path, header);
    ordered_json fp;
    fp["role"] = role;
    fp["path"] = path;
    fp["rows"] = m.rows();
    fp["cols"] = m.cols();
    fp["sha256"] = sha256_hex(text);
    return {std::move(m), std::move(fp)};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + path);
    out << text;
    if (!out) throw ConfigError("failed writing " + path);
}

ordered_json fit_json(const twee::TWLocationScale& f) {
    ordered_json j;
    j["method"] = std::string(twee::to_string(f.fit_method));
    j["mu"] = f.mu;
    j["sigma"] = f.sigma;
    j["sample_size"] = f.sample_size;
    j["objective_value"] = f.objective_value;
    return j;
}

ordered_json result_json(const twee::TestResult& r) {
    ordered_json j;
    j["problem_label"] = r.problem_label;
    j["lambda_obs"] = r.lambda_obs;
    j["logit_obs"] = r.logit_obs;
    j["effective_rank"] = r.effective_rank;
    j["p_value_tw"] = r.p_value_tw;
    j["p_value_perm"] = r.p_value_perm ? ordered_json(*r.p_value_perm) : ordered_json(nullptr);
    j["fit"] = fit_json(r.fit);
    j["fit_fallback"] = r.fit_fallback;
    j["K"] = r.k;
    j["n_perm_reference"] = r.n_perm_reference ? ordered_json(*r.n_perm_reference) : ordered_json(nullptr);
    j["seed"] = r.seed;
    j["shrinkage_used"] = r.shrinkage_used;
    j["excluded_roots"] = r.excluded_roots;
    return j;
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---- test -----------------------------------------------------------------

struct TestArgs {
    std::string kind;
    std::string x, y, groups, confounders, out;
    std::optional<std::uint64_t> seed;
    std::size_t k = 100;
    std::string fit = "mm";
    bool shrinkage = false;
    std::optional<std::size_t> perm;
    std::size_t threads = 0;
    double rank_tol = twee::kDefaultRankTolerance;
    bool no_header = false;
    bool fallback_mm = false;
};

int run_test(const TestArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    const bool header = !a.no_header;
    const twee::FitMethod method = twee::parse_fit_method(a.fit);
    auto need = [&](const std::string& value, const char* flag) {
        if (value.empty()) throw ConfigError(std::string("test ") + a.kind + " requires " + flag);
    };

    ordered_json inputs = ordered_json::array();
    std::optional<twee::ProblemSpec> spec;
    if (a.kind == "manova") {
        need(a.y, "--y");
        need(a.groups, "--groups");
        auto y = load_matrix("y", a.y, header);
        const std::string gtext = twee::read_file(a.groups);
        auto labels = twee::parse_csv_labels(gtext, a.groups, header);
        inputs.push_back(y.fingerprint);
        inputs.push_back(ordered_json{{"role", "groups"}, {"path", a.groups}, {"rows", labels.size()},
                                      {"cols", 1}, {"sha256", sha256_hex(gtext)}});
        spec = twee::ManovaSpec{std::move(y.data), std::move(labels)};
    } else if (a.kind == "covequal" || a.kind == "cca") {
        need(a.x, "--x");
        need(a.y, "--y");
        auto x = load_matrix("x", a.x, header);
        auto y = load_matrix("y", a.y, header);
        inputs.push_back(x.fingerprint);
        inputs.push_back(y.fingerprint);
        if (a.kind == "covequal") {
            spec = twee::CovEqualSpec{std::move(x.data), std::move(y.data)};
        } else {
            spec = twee::CcaSpec{std::move(x.data), std::move(y.data)};
        }
    } else {
        need(a.x, "--x");
        need(a.y, "--y");
        auto y = load_matrix("y", a.y, header);
        auto x = load_matrix("x", a.x, header);
        inputs.push_back(y.fingerprint);
        inputs.push_back(x.fingerprint);
        std::optional<twee::DataMatrix> conf;
        if (!a.confounders.empty()) {
            auto c = load_matrix("confounders", a.confounders, header);
            inputs.push_back(c.fingerprint);
            conf = std::move(c.data);
        }
        spec = twee::PcevSpec{std::move(y.data), std::move(x.data), std::move(conf)};
    }

    twee::EstimatorOptions opts;
    opts.k = a.k;
    opts.fit_method = method;
    opts.seed = *a.seed;
    opts.shrinkage = a.shrinkage;
    opts.n_perm = a.perm;
    opts.threads = a.threads;
    opts.rank_tolerance = a.rank_tol;
    opts.fallback_to_mm = a.fallback_mm;
    const twee::TestResult r = twee::run_estimator(*spec, opts);

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "test " + a.kind;
    doc["result"] = result_json(r);
    doc["inputs"] = inputs;
    doc["timing"] = ordered_json{{"wall_seconds", seconds}};
    const std::string text = doc.dump(2) + "\n";

    if (a.out.empty()) {
        std::cout << text;
        return ok;
    }
    write_text(a.out, text);
    std::cout << r.problem_label << ": lambda = " << fmt12(r.lambda_obs) << ", p_tw = " << fmt12(r.p_value_tw);
    if (r.p_value_perm) std::cout << ", p_perm = " << fmt12(*r.p_value_perm);
    std::cout << " (K = " << r.k << ", fit = " << twee::to_string(r.fit.fit_method)
              << (r.fit_fallback ? " via mm fallback" : "") << ", excluded = " << r.excluded_roots << ")\n";
    return ok;
}

// ---- tw -------------------------------------------------------------------

int run_tw(const std::string& what, const std::string& value_text, double mu, double sigma) {
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(value_text, &used);
        if (used != value_text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ConfigError("'" + value_text + "' is not a number");
    }
    if (!std::isfinite(v) && what != "cdf" && what != "pdf") throw ConfigError("argument must be finite");
    if (std::isnan(v)) throw ConfigError("argument is NaN");
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
        throw ConfigError("--sigma must be positive and --mu finite");
    }
    twee::TWLocationScale d;
    d.mu = mu;
    d.sigma = sigma;
    double out = 0.0;
    if (what == "cdf") {
        out = d.cdf(v);
    } else if (what == "pdf") {
        out = d.pdf(v);
    } else {
        if (!(v > 0.0 && v < 1.0)) throw ConfigError("probability must lie in (0, 1)");
        out = d.quantile(v);
    }
    std::cout << fmt12(out) << "\n";
    return ok;
}

// ---- simulate -------------------------------------------------------------

struct SimArgs {
    std::string kind;
    std::string method = "pcev";
    long long p = 200, q = 20, n = -1, m = 96;
    double rho = 0.0, r2 = 0.0;
    std::size_t k = 100;
    std::size_t reps = 1000;
    std::size_t sims = 100;
    std::size_t perms = 500;
    std::optional<std::uint64_t> seed;
    std::string fit = "mm";
    bool shrinkage = false;
    std::size_t threads = 0;
    std::string out;
};

ordered_json config_json(const twee::ScenarioConfig& c) {
    ordered_json j;
    j["scenario"] = std::string(twee::to_string(c.scenario));
    j["p"] = c.p;
    j["q"] = c.q;
    j["n"] = c.n;
    j["m"] = c.m;
    j["rho"] = c.rho;
    j["r2"] = c.r2;
    j["n_assoc"] = c.n_assoc;
    j["K"] = c.k;
    j["reps"] = c.reps;
    j["n_perm"] = c.n_perm;
    j["seed"] = c.seed;
    j["fit_method"] = std::string(twee::to_string(c.fit_method));
    return j;
}

int run_simulate(const SimArgs& a) {
    if (a.out.empty()) throw ConfigError("simulate requires --out");
    twee::ScenarioConfig c;
    c.seed = *a.seed;
    c.k = a.k;
    c.threads = a.threads;
    c.fit_method = twee::parse_fit_method(a.fit);
    c.p = a.p;
    c.rho = a.rho;
    c.r2 = a.r2;
    ordered_json side;
    side["schema_version"] = kSchemaVersion;
    std::string csv;

    try {
        if (a.kind == "approx") {
            c.scenario = a.shrinkage ? twee::Scenario::approx_cdf_shrunk : twee::Scenario::approx_cdf;
            c.m = a.m;
            c.n = a.n < 0 ? 4 : a.n;
            c.reps = a.reps;
            twee::validate(c);
        } else {
            c.scenario = twee::parse_scenario(a.method);
            if (c.scenario != twee::Scenario::covequal && c.scenario != twee::Scenario::cca &&
                c.scenario != twee::Scenario::pcev) {
                throw ConfigError("--method must be covequal, cca or pcev");
            }
            c.q = a.q;
            c.n = a.n < 0 ? 100 : a.n;
            c.reps = a.sims;
            c.n_perm = a.perms;
            twee::validate(c);
        }
    } catch (const twee::Error& e) {
        throw ConfigError(e.what());
    }

    if (a.kind == "approx") {
        const twee::ApproxStudy s = twee::run_approx_study(c);
        csv = "grid,empirical,mm,mle,ad,adr\n";
        for (std::size_t g = 0; g < s.grid.size(); ++g) {
            csv += fmt17(s.grid[g]) + "," + fmt17(s.empirical[g]);
            for (const auto& col : s.fitted) csv += "," + fmt17(col[g]);
            csv += "\n";
        }
        side["command"] = "simulate approx";
        side["config"] = config_json(c);
        ordered_json fits = ordered_json::object();
        for (std::size_t j = 0; j < twee::kAllFitMethods.size(); ++j) {
            ordered_json f = fit_json(s.fits[j]);
            f["ks"] = s.ks[j];
            f["fallback"] = s.fit_fallback[j];
            fits[std::string(twee::to_string(twee::kAllFitMethods[j]))] = f;
        }
        side["fits"] = fits;
        side["excluded_roots"] = s.excluded_roots;
        std::cout << "approx study: " << c.reps << " roots, K = " << c.k;
        for (std::size_t j = 0; j < twee::kAllFitMethods.size(); ++j) {
            std::cout << ", ks_" << twee::to_string(twee::kAllFitMethods[j]) << " = " << fmt12(s.ks[j]);
        }
        std::cout << "\n";
    } else {
        const auto rows = twee::run_pvalue_study(c);
        csv = "sim,p_value_tw,p_value_perm\n";
        for (const auto& r : rows) csv += std::to_string(r.sim) + "," + fmt17(r.p_value_tw) + "," + fmt17(r.p_value_perm) + "\n";
        side["command"] = "simulate pvalues";
        side["config"] = config_json(c);
        std::cout << "p-value study: " << rows.size() << " simulations written to " << a.out << "\n";
    }
    write_text(a.out, csv);
    write_text(a.out + ".json", side.dump(2) + "\n");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tracy-Widom empirical estimator for double Wishart largest-root tests"};
    app.require_subcommand(1);

    // test
    TestArgs ta;
    auto* test = app.add_subcommand("test", "Run the estimator on CSV data");
    test->require_subcommand(1);
    for (const char* kind : {"manova", "covequal", "cca", "pcev"}) {
        auto* sub = test->add_subcommand(kind);
        sub->callback([&ta, kind] { ta.kind = kind; });
        if (std::string(kind) == "manova") {
            sub->add_option("--y", ta.y, "Responses CSV")->required();
            sub->add_option("--groups", ta.groups, "Single-column group label CSV")->required();
        } else if (std::string(kind) == "pcev") {
            sub->add_option("--y", ta.y, "Responses CSV")->required();
            sub->add_option("--x", ta.x, "Covariates CSV")->required();
            sub->add_option("--confounders", ta.confounders, "Confounders CSV");
        } else {
            sub->add_option("--x", ta.x, "First sample CSV")->required();
            sub->add_option("--y", ta.y, "Second sample CSV")->required();
        }
        sub->add_option("--seed", ta.seed, "Random seed")->required();
        sub->add_option("--k", ta.k, "Permutation roots used for the fit")->capture_default_str();
        sub->add_option("--fit", ta.fit, "Fit method: mm, mle, ad, adr")->capture_default_str();
        sub->add_flag("--shrinkage", ta.shrinkage, "Ledoit-Wolf shrinkage of A");
        sub->add_option("--perm", ta.perm, "Also compute a permutation p-value with N permutations");
        sub->add_option("--threads", ta.threads, "Worker threads (0 = all cores)");
        sub->add_option("--out", ta.out, "Output JSON path (stdout when omitted)");
        sub->add_option("--rank-tol", ta.rank_tol, "Relative eigenvalue cutoff")->capture_default_str();
        sub->add_flag("--no-header", ta.no_header, "CSV files have no header row");
        sub->add_flag("--fallback-mm", ta.fallback_mm, "Use the moment fit when an optimized fit fails");
    }

    // tw
    std::string tw_kind;
    std::string tw_value;
    double tw_mu = 0.0;
    double tw_sigma = 1.0;
    auto* tw = app.add_subcommand("tw", "Evaluate sigma * TW(1) + mu");
    tw->require_subcommand(1);
    for (const char* kind : {"cdf", "pdf", "quantile"}) {
        auto* sub = tw->add_subcommand(kind);
        sub->callback([&tw_kind, kind] { tw_kind = kind; });
        sub->add_option("value", tw_value, "Point or probability")->required();
        sub->add_option("--mu", tw_mu, "Location")->capture_default_str();
        sub->add_option("--sigma", tw_sigma, "Scale")->capture_default_str();
    }

    // simulate
    SimArgs sa;
    auto* sim = app.add_subcommand("simulate", "Simulation studies");
    sim->require_subcommand(1);
    auto common_sim = [&sa](CLI::App* sub) {
        sub->add_option("--seed", sa.seed, "Random seed")->required();
        sub->add_option("--p", sa.p, "Dimension of the high-dimensional side")->capture_default_str();
        sub->add_option("--k", sa.k, "Roots used for the fit")->capture_default_str();
        sub->add_option("--threads", sa.threads, "Worker threads (0 = all cores)");
        sub->add_option("--out", sa.out, "Output CSV path")->required();
    };
    auto* approx = sim->add_subcommand("approx", "Largest-root CDF approximation study");
    approx->callback([&sa] { sa.kind = "approx"; });
    common_sim(approx);
    approx->add_option("--m", sa.m, "Degrees of freedom of A")->capture_default_str();
    approx->add_option("--n", sa.n, "Degrees of freedom of B (default 4)");
    approx->add_option("--reps", sa.reps, "Simulated roots")->capture_default_str();
    approx->add_flag("--shrinkage", sa.shrinkage, "Shrink A with Ledoit-Wolf");
    auto* pvals = sim->add_subcommand("pvalues", "Paired Tracy-Widom and permutation p-values");
    pvals->callback([&sa] { sa.kind = "pvalues"; });
    common_sim(pvals);
    pvals->add_option("--method", sa.method, "covequal, cca or pcev")->capture_default_str();
    pvals->add_option("--q", sa.q, "CCA projector dimension")->capture_default_str();
    pvals->add_option("--n", sa.n, "Sample size (default 100)");
    pvals->add_option("--rho", sa.rho, "Association for covequal and cca")->capture_default_str();
    pvals->add_option("--r2", sa.r2, "Association for pcev")->capture_default_str();
    pvals->add_option("--sims", sa.sims, "Simulated datasets")->capture_default_str();
    pvals->add_option("--perms", sa.perms, "Permutations for the reference p-value")->capture_default_str();
    pvals->add_option("--fit", sa.fit, "Fit method")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (test->parsed()) return run_test(ta);
        if (tw->parsed()) return run_tw(tw_kind, tw_value, tw_mu, tw_sigma);
        return run_simulate(sa);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    } catch (const twee::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case twee::ErrorKind::parse: return usage;
            case twee::ErrorKind::validation: return invalid;
            case twee::ErrorKind::degenerate:
            case twee::ErrorKind::fit_failure: return degenerate;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return internal;
}
