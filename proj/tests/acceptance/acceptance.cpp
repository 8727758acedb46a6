// Acceptance checks. Prints one PASS/FAIL line per criterion plus indented
// detail lines; exits non-zero if any criterion fails.
//
// usage: acceptance [path/to/nogear_cli] [configs dir] [scratch dir]
// Criterion 10 is skipped (and reported as FAIL) when no CLI path is given.

#include "nogear/nogear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace nogear;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void note(const std::string& s) { details.push_back(s); }
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    }
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

int failures = 0;

void run(const std::string& id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << "  " << title << "  (" << fmt(secs, 3) << " s)\n";
    for (const auto& d : o.details) std::cout << "        " << d << '\n';
    std::cout.flush();
}

struct Triple {
    const char* label;
    double a, b, t;
};

// parameter sets of the coverage table
const std::vector<Triple> kCoverageSets{
    {"I", 0.6, 0.4, 0.75}, {"II", 0.7, 0.3, 0.5}, {"III", 0.55, 0.45, 0.83}, {"IV", 0.8, 0.2, 0.5}};

// parameter sets of the forecast-accuracy table
const std::vector<Triple> kAccuracySets{
    {"I", 0.8, 0.2, 0.5}, {"II", 0.7, 0.3, 0.5}, {"III", 0.6, 0.4, 0.75}, {"IV", 0.55, 0.45, 0.83}};

// ---------------------------------------------------------------------------

Outcome kernel_correctness() {
    Outcome o;
    for (const auto& s : kCoverageSets) {
        const auto p = validate_params(s.a, s.b, s.t);
        const auto tm = transition_matrix(p, 200);
        TwoStepTransition ts(p, 200);
        double worst = 0.0;
        for (count_t y = 0; y <= 50; ++y) {
            const auto sq = tm.left_multiply(tm.row(y));
            for (count_t x = 0; x <= 50; ++x) worst = std::max(worst, std::abs(ts(y, x) - sq[detail::idx(x)]));
        }
        o.require(worst < 1e-8, std::string("set ") + s.label + ": max |two-step - P^2| = " + fmt(worst));
    }
    return o;
}

Outcome pgf_duality() {
    Outcome o;
    for (const auto& s : kCoverageSets) {
        const auto p = validate_params(s.a, s.b, s.t);
        const auto tm = transition_matrix(p, 200);
        double worst = 0.0;
        for (count_t y : {0, 2, 5}) {
            const auto fds = h_step_distributions(tm, y, 2);
            for (const auto& fd : fds) {
                for (int k = 1; k <= 9; ++k) {
                    const double sv = 0.1 * k;
                    double sum = 0.0, pw = 1.0;
                    for (double px : fd.probs) {
                        sum += px * pw;
                        pw *= sv;
                    }
                    worst = std::max(worst, std::abs(sum - forecast_pgf(p, y, fd.horizon, sv)));
                }
            }
        }
        o.require(worst < 1e-8, std::string("set ") + s.label + ": max |pgf - sum p s^x| = " + fmt(worst));
    }
    return o;
}

Outcome moment_identities() {
    Outcome o;
    for (const auto& s : kCoverageSets) {
        const auto p = validate_params(s.a, s.b, s.t);
        const auto tm = transition_matrix(p, 200);
        double mean_err = 0.0, var1_eq = 0.0, var1_direct = 0.0;
        double worst_closed = 0.0, worst_rec = 0.0;
        count_t first_bad_h = 0;
        for (count_t y : {0, 3, 10}) {
            const auto fds = h_step_distributions(tm, y, 5);
            for (const auto& fd : fds) {
                double m = 0.0, m2 = 0.0;
                for (std::size_t x = 0; x < fd.probs.size(); ++x) {
                    m += static_cast<double>(x) * fd.probs[x];
                    m2 += static_cast<double>(x * x) * fd.probs[x];
                }
                const double v = m2 - m * m;
                const count_t h = fd.horizon;
                mean_err = std::max(mean_err, std::abs(m - cond_mean(p, y, h)));
                if (h == 1) {
                    var1_eq = std::max(var1_eq, std::abs(v - cond_var(p, y, 1)));
                    var1_direct = std::max(var1_direct, std::abs(v - (y * p.gstar_var() + p.sigma2_eps())));
                } else {
                    const double d = std::abs(v - cond_var(p, y, h));
                    if (d > 1e-4 && (first_bad_h == 0 || h < first_bad_h)) first_bad_h = h;
                    worst_closed = std::max(worst_closed, d);
                    worst_rec = std::max(worst_rec, std::abs(v - cond_var_recursive(p, y, h)));
                }
            }
        }
        const std::string tag = std::string("set ") + s.label + ": ";
        o.require(mean_err < 1e-6, tag + "max |MC mean - closed-form mean|, h=1..5: " + fmt(mean_err));
        o.require(var1_eq < 1e-6, tag + "h=1 |MC var - closed-form var| = " + fmt(var1_eq));
        o.require(var1_direct < 1e-6, tag + "h=1 |MC var - (y Var(G*) + var_eps)| = " + fmt(var1_direct));
        if (first_bad_h > 0) {
            o.note("FLAG " + tag + "closed-form variance deviates from the MC variance from h=" +
                   std::to_string(first_bad_h) + " (max dev " + fmt(worst_closed) +
                   "); the variance recursion V_h = w^2 V_{h-1} + Var(G*) m_{h-1} + var_eps agrees to " +
                   fmt(worst_rec));
        } else {
            o.note(tag + "closed-form variance agrees with MC for h=2..5 (max dev " + fmt(worst_closed) + ")");
        }
    }
    return o;
}

Outcome stationarity() {
    Outcome o;
    const auto p = validate_params(0.6, 0.4, 0.75);
    const auto s = simulate(p, 100000, RngSpec{4242, 0});
    const double mean = detail::sample_mean(s);
    const double r1 = detail::lag1_autocorrelation(s);
    std::vector<double> freq(detail::idx(s.max_value()) + 1, 0.0);
    for (count_t v : s.values) freq[detail::idx(v)] += 1.0 / static_cast<double>(s.size());
    double tv = 0.0, covered = 0.0;
    for (std::size_t x = 0; x < freq.size(); ++x) {
        const double g = marginal_pmf(p, static_cast<count_t>(x));
        tv += std::abs(freq[x] - g);
        covered += g;
    }
    tv = 0.5 * (tv + (1.0 - covered));
    o.require(std::abs(mean - 3.0) <= 0.05, "mean = " + fmt(mean) + " (target 3.0 +/- 0.05)");
    o.require(std::abs(r1 - 2.0 / 3.0) <= 0.02, "lag-1 ACF = " + fmt(r1) + " (target 0.6667 +/- 0.02)");
    o.require(tv < 0.01, "TV distance to geometric(0.75) = " + fmt(tv) + " (< 0.01)");

    // context for the mean band: the AR(1) standard error of a mean of n = 1e5
    // is sqrt(12 * (1 + 2/3) / (1 - 2/3) / 1e5) ~ 0.0245, so +/- 0.05 is about
    // two standard errors; a bias check over independent seeds follows
    double grand = 0.0;
    const int seeds = 100;
    for (int k = 0; k < seeds; ++k) grand += detail::sample_mean(simulate(p, 100000, RngSpec{4242, 1000u + k}));
    grand /= seeds;
    const double se = std::sqrt(12.0 * 5.0 / 100000.0);
    o.note("standard error of one mean ~ " + fmt(se, 3) + "; this seed is " + fmt((mean - 3.0) / se, 3) +
           " SE from 3; mean over " + std::to_string(seeds) + " further seeds = " + fmt(grand, 5) + " (" +
           fmt((grand - 3.0) / (se / std::sqrt(seeds)), 3) + " SE of the grand mean)");
    return o;
}

Outcome coverage_study() {
    Outcome o;
    for (const auto& s : kCoverageSets) {
        CoverageConfig c;
        c.label = s.label;
        c.params = validate_params(s.a, s.b, s.t);
        c.n_list = {100};
        c.horizons = {1, 2};
        c.replications = 10000;
        c.fit = false;
        c.base_seed = RngSpec{555, 0};
        const auto rep = run_coverage_experiment(c);
        for (const auto& cell : rep.cells) {
            o.require(cell.empirical_coverage >= 0.94, std::string("oracle set ") + s.label + " h=" +
                                                           std::to_string(cell.horizon) + ": coverage " +
                                                           fmt(cell.empirical_coverage, 4) + " (>= 0.94, R=10000)");
        }
    }
    CoverageConfig c;
    c.label = "I";
    c.params = validate_params(0.6, 0.4, 0.75);
    c.n_list = {1000};
    c.horizons = {2};
    c.replications = 500;
    c.fit = true;
    c.fit_opts.restarts = 2;
    c.base_seed = RngSpec{777, 0};
    const auto rep = run_coverage_experiment(c);
    const auto& cell = rep.cells.front();
    o.require(std::abs(cell.empirical_coverage - 0.9477) <= 0.03,
              "fitted set I n=1000 h=2: coverage " + fmt(cell.empirical_coverage, 4) + " (0.9477 +/- 0.03, R=500, " +
                  std::to_string(cell.failures) + " failed fits)");
    return o;
}

ExperimentConfig accuracy_config(const Triple& s, std::size_t reps) {
    ExperimentConfig c;
    c.label = s.label;
    c.generator = validate_params(s.a, s.b, s.t);
    c.fitted_families = {Family::nogear, Family::nginar};
    c.n_total = 200;
    c.horizons = {1, 2};
    c.replications = reps;
    c.base_seed = RngSpec{2024, 0};
    c.fit.restarts = 2;
    return c;
}

Outcome accuracy_table(std::size_t reps, bool values_too) {
    Outcome o;
    int ordered = 0;
    for (const auto& s : kAccuracySets) {
        const auto rep = run_forecast_experiment(accuracy_config(s, reps));
        const auto& ng = rep.cell(Family::nogear, 1);
        const auto& nb = rep.cell(Family::nginar, 1);
        const bool le = ng.prmse <= nb.prmse;
        ordered += le ? 1 : 0;
        o.note(std::string("set ") + s.label + " h=1: NoGeAR PRMSE " + fmt(ng.prmse, 5) + ", NGINAR PRMSE " +
               fmt(nb.prmse, 5) + (le ? "  (NoGeAR <= NGINAR)" : "  (NoGeAR > NGINAR)") + "; NoGeAR PMAD " +
               fmt(ng.pmad, 5) + ", PTP(mode) " + fmt(ng.ptp_mode, 4) + "; fit failures " +
               std::to_string(ng.failures + nb.failures));
        if (values_too && std::string(s.label) == "I") {
            o.require(std::abs(ng.prmse - 2.6921) <= 0.2 * 2.6921,
                      "set I NoGeAR PRMSE h=1 = " + fmt(ng.prmse, 5) + " (2.6921 +/- 20%)");
            o.require(std::abs(ng.pmad - 1.4000) <= 0.2 * 1.4000,
                      "set I NoGeAR PMAD h=1 = " + fmt(ng.pmad, 5) + " (1.4000 +/- 20%)");
        }
    }
    o.require(ordered >= 3, "NoGeAR PRMSE <= NGINAR PRMSE at h=1 in " + std::to_string(ordered) + " of 4 sets (>= 3)");
    return o;
}

Outcome nginar_reduction() {
    Outcome o;
    const NginarParams np{0.67, 3.0};
    const auto a = transition_matrix(np, 200);
    const auto b = transition_matrix(nginar_as_nogear(np), 200);
    double worst = 0.0;
    for (count_t y = 0; y <= 200; ++y)
        for (count_t x = 0; x <= 200; ++x) worst = std::max(worst, std::abs(a(y, x) - b(y, x)));
    o.require(worst < 1e-10, "max entrywise |NGINAR(0.67,3) - mapped NoGeAR| = " + fmt(worst));
    return o;
}

Outcome estimation_consistency() {
    Outcome o;
    const auto truth = validate_params(0.6, 0.4, 0.75);
    int hits = 0;
    double worst[3] = {0, 0, 0};
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto s = simulate(truth, 1000, RngSpec{8080, r});
        const auto fit = fit_cml(Family::nogear, s);
        const auto& p = std::get<ModelParams>(fit.params);
        const double d[3] = {std::abs(p.alpha() - 0.6), std::abs(p.beta() - 0.4), std::abs(p.theta() - 0.75)};
        for (int i = 0; i < 3; ++i) worst[i] = std::max(worst[i], d[i]);
        if (d[0] <= 0.1 && d[1] <= 0.1 && d[2] <= 0.1) ++hits;
    }
    o.note("largest errors: alpha " + fmt(worst[0], 4) + ", beta " + fmt(worst[1], 4) + ", theta " + fmt(worst[2], 4));
    o.require(hits >= 45, "all three within +/- 0.1 in " + std::to_string(hits) + " of 50 replications (>= 45)");
    return o;
}

// one-sample Kolmogorov-Smirnov test against U(0,1), asymptotic p-value
// with the small-sample correction of Stephens
double ks_uniform_pvalue(std::vector<double> u, double* d_out) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max(d, static_cast<double>(i + 1) / n - u[i]);
        d = std::max(d, u[i] - static_cast<double>(i) / n);
    }
    if (d_out) *d_out = d;
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

Outcome diagnostics_calibration() {
    Outcome o;
    const auto p = validate_params(0.6, 0.4, 0.75);
    const auto s = simulate(p, 20000, RngSpec{99, 0});
    const auto fit = fit_cml(Family::nogear, s);
    o.note("fitted params: alpha " + fmt(std::get<ModelParams>(fit.params).alpha(), 4) + ", beta " +
           fmt(std::get<ModelParams>(fit.params).beta(), 4) + ", theta " +
           fmt(std::get<ModelParams>(fit.params).theta(), 4));
    const auto pit = pit_histogram(fit.params, s, 10);
    double worst = 0.0;
    for (double b : pit) worst = std::max(worst, std::abs(b - 0.1));
    o.require(worst <= 0.02, "PIT 10-bin masses, max |mass - 0.1| = " + fmt(worst, 4) + " (<= 0.02)");

    const auto r = pearson_residuals(fit.params, s);
    double m = 0.0;
    for (double v : r) m += v;
    m /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - m) * (v - m);
    var /= static_cast<double>(r.size() - 1);
    o.require(std::abs(var - 1.0) <= 0.1, "Pearson residual variance = " + fmt(var, 4) + " (1 +/- 0.1)");

    std::vector<double> pvals;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto ss = simulate(p, 20000, RngSpec{31337, seed});
        pvals.push_back(ljung_box(pearson_residuals(p, ss), 10).p_value);
    }
    double d = 0.0;
    const double ks_p = ks_uniform_pvalue(pvals, &d);
    o.require(ks_p > 0.01, "Ljung-Box (m=10) p-values over 200 seeds: KS D = " + fmt(d, 4) + ", p = " + fmt(ks_p, 4) +
                               " (> 0.01)");
    return o;
}

// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism(const std::string& cli, const std::string& configs, const std::string& scratch) {
    Outcome o;
    namespace fs = std::filesystem;
    const fs::path root = fs::path(scratch);
    fs::create_directories(root);
    // simulate first so later commands have an input series
    struct Cmd {
        std::string name;
        std::string args;               // {d} expands to the run directory
        std::vector<std::string> outs;  // files to compare
    };
    const std::vector<Cmd> cmds{
        {"simulate", "simulate --alpha 0.6 --beta 0.4 --theta 0.75 --n 500 --seed 7 --out {d}/s.csv --summary-out {d}/s.json",
         {"s.csv", "s.json"}},
        {"fit", "fit --model all --input {in}/s.csv --out {d}/fit.json", {"fit.json"}},
        {"fit1", "fit --input {in}/s.csv --out {d}/fit1.json", {"fit1.json"}},
        {"forecast", "forecast --fit {in}/fit1.json --input {in}/s.csv --h 2 --out {d}/fc.json --csv {d}/fc.csv",
         {"fc.json", "fc.csv"}},
        {"evaluate", "evaluate --config " + configs + "/evaluate_nogear_n200.json --replications 2 --out {d}/ev.json --csv {d}/ev.csv",
         {"ev.json", "ev.csv"}},
        {"coverage", "coverage --config " + configs + "/coverage_four_sets.json --replications 3 --out {d}/cv.json --csv {d}/cv.csv",
         {"cv.json", "cv.csv"}},
        {"diagnose", "diagnose --fit {in}/fit1.json --input {in}/s.csv --out {d}/dg.json --csv-prefix {d}/dg",
         {"dg.json", "dg_pit.csv", "dg_acf.csv", "dg_jumps.csv"}},
    };
    auto expand = [](std::string s, const std::string& d, const std::string& in) {
        for (std::size_t pos; (pos = s.find("{d}")) != std::string::npos;) s.replace(pos, 3, d);
        for (std::size_t pos; (pos = s.find("{in}")) != std::string::npos;) s.replace(pos, 4, in);
        return s;
    };
    const fs::path a = root / "run_a", b = root / "run_b";
    fs::remove_all(a);
    fs::remove_all(b);
    fs::create_directories(a);
    fs::create_directories(b);
    for (const auto& c : cmds) {
        bool same = true;
        std::string why;
        for (const fs::path& dir : {a, b}) {
            // both runs read inputs from run_a so that paths echoed into manifests coincide
            const std::string line = "\"" + cli + "\" " + expand(c.args, dir.string(), a.string()) + " > /dev/null 2>&1";
            const int rc = std::system(line.c_str());
            if (rc != 0) {
                same = false;
                why = "exit status " + std::to_string(rc);
            }
        }
        for (const auto& f : c.outs) {
            std::string ta = slurp(a / f), tb = slurp(b / f);
            // the output paths themselves differ between the two runs
            for (std::size_t pos; (pos = tb.find(b.string())) != std::string::npos;) tb.replace(pos, b.string().size(), a.string());
            if (ta.empty() || ta != tb) {
                same = false;
                why += " " + f + (ta.empty() ? " missing" : " differs");
            }
        }
        o.require(same, c.name + ": byte-identical outputs across reruns" + (why.empty() ? "" : " (" + why + ")"));
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const std::string configs = argc > 2 ? argv[2] : "configs";
    const std::string scratch = argc > 3 ? argv[3] : "acceptance_scratch";

    run("C1", "two-step kernel equals squared truncated matrix", kernel_correctness);
    run("C2", "forecast pgf equals pmf power series", pgf_duality);
    run("C3", "conditional moment identities", moment_identities);
    run("C4", "stationary mean, lag-1 ACF and geometric marginal", stationarity);
    run("C5", "HPP interval coverage (oracle and fitted)", coverage_study);
    run("C6", "forecast accuracy, N=100, NoGeAR data", [] { return accuracy_table(100, true); });
    run("C6s", "forecast accuracy ordering smoke tier, N=10", [] { return accuracy_table(10, false); });
    run("C7", "NGINAR kernel equals mapped NoGeAR kernel", nginar_reduction);
    run("C8", "CML consistency, n=1000, 50 replications", estimation_consistency);
    run("C9", "diagnostics calibration", diagnostics_calibration);
    run("C10", "CLI determinism", [&] {
        if (cli.empty()) {
            Outcome o;
            o.require(false, "no CLI path given");
            return o;
        }
        return cli_determinism(cli, configs, scratch);
    });

    std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << '\n';
    return failures == 0 ? 0 : 1;
}
