// nogear command-line tool: simulate, fit, forecast, evaluate, coverage, diagnose.
//
// Exit codes: 0 ok, 1 internal error, 2 usage/invalid flags, 3 unreadable or
// malformed input, 4 degenerate data.

#include "nogear/io.hpp"
#include "nogear/nogear.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using nogear::io::json;

constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kInput = 3, kDegenerate = 4 };

/// Thrown for semantically invalid flags that CLI11 cannot detect.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    bool timestamp = false;
};

json manifest(const std::string& command, const json& config, const GlobalOptions& g, const json& outputs) {
    json m;
    m["tool"] = "nogear";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["config"] = config;
    m["outputs"] = outputs;
#if defined(__VERSION__)
    m["compiler"] = __VERSION__;
#endif
    if (g.timestamp) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        m["timestamp"] = buf;
    }
    return m;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw nogear::InputError("cannot write '" + path + "'");
    out << text;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nogear::InputError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw nogear::InputError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Model flags shared by simulate / forecast / diagnose
// ---------------------------------------------------------------------------

struct ModelFlags {
    std::string model = "nogear";
    std::optional<double> alpha, beta, theta, mu, p, lambda;
    bool lambda_innovation = false;

    void add_to(CLI::App* app) {
        app->add_option("--model", model, "Family: nogear, nginar, ginar, pinar");
        app->add_option("--alpha", alpha, "NoGeAR alpha, NGINAR alpha, or binomial thinning probability");
        app->add_option("--beta", beta, "NoGeAR beta");
        app->add_option("--theta", theta, "NoGeAR marginal geometric parameter");
        app->add_option("--mu", mu, "NGINAR stationary mean");
        app->add_option("--p", p, "GINAR marginal geometric parameter");
        app->add_option("--lambda", lambda, "PINAR Poisson mean");
        app->add_flag("--lambda-innovation", lambda_innovation, "PINAR lambda is the innovation mean");
    }

    nogear::FamilyParams params() const {
        nogear::Family f;
        try {
            f = nogear::family_from_string(model);
        } catch (const nogear::InputError& e) {
            throw UsageError(e.what());
        }
        auto need = [&](const std::optional<double>& v, const char* name) {
            if (!v) throw UsageError(std::string("--") + name + " is required for --model " + model);
            return *v;
        };
        try {
            switch (f) {
                case nogear::Family::nogear:
                    return nogear::validate_params(need(alpha, "alpha"), need(beta, "beta"), need(theta, "theta"));
                case nogear::Family::nginar: {
                    nogear::FamilyParams fp = nogear::NginarParams{need(alpha, "alpha"), need(mu, "mu")};
                    nogear::validate(fp);
                    return fp;
                }
                case nogear::Family::ginar: {
                    nogear::FamilyParams fp = nogear::GinarParams{need(p, "p"), need(alpha, "alpha")};
                    nogear::validate(fp);
                    return fp;
                }
                case nogear::Family::pinar: {
                    nogear::FamilyParams fp = nogear::PinarParams{need(lambda, "lambda"), need(alpha, "alpha"), lambda_innovation};
                    nogear::validate(fp);
                    return fp;
                }
            }
        } catch (const nogear::ConstraintViolation& e) {
            throw UsageError(e.what());
        }
        throw UsageError("unknown model");
    }
};

/// Parameters from --fit (a fit JSON or bare parameter JSON) or from model flags.
nogear::FamilyParams resolve_params(const std::string& fit_path, const ModelFlags& mf) {
    if (!fit_path.empty()) {
        const json j = read_json_file(fit_path);
        const json& pj = j.contains("params") ? j.at("params") : j;
        try {
            return nogear::io::params_from_json(pj);
        } catch (const nogear::ConstraintViolation& e) {
            throw UsageError(std::string("fit file parameters invalid: ") + e.what());
        }
    }
    return mf.params();
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
    ModelFlags model;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::size_t burn_in = 0;
    std::string out;
    std::string summary_out;
};

int cmd_simulate(const SimulateArgs& a, const GlobalOptions& g) {
    const auto fp = a.model.params();
    if (a.n < 1) throw UsageError("--n must be >= 1");
    const auto s = nogear::simulate(fp, a.n, nogear::RngSpec{a.seed, 0}, a.burn_in);

    std::ostringstream csv;
    nogear::io::write_series_csv(csv, s);
    write_text(a.out, csv.str());

    double mean = 0.0, var = 0.0;
    for (auto v : s.values) mean += static_cast<double>(v);
    mean /= static_cast<double>(s.size());
    for (auto v : s.values) var += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    var = s.size() > 1 ? var / static_cast<double>(s.size() - 1) : 0.0;
    const double r1 = s.size() > 1 ? nogear::detail::lag1_autocorrelation(s) : 0.0;

    json cfg{{"params", nogear::io::to_json(fp)}, {"n", a.n}, {"seed", a.seed}, {"burn_in", a.burn_in}};
    json summary{{"n", s.size()}, {"mean", mean}, {"variance", var}, {"lag1_acf", r1}};
    json doc{{"manifest", manifest("simulate", cfg, g, json{{"series", a.out.empty() ? "-" : a.out}})},
             {"summary", summary}};
    if (!a.summary_out.empty()) {
        write_text(a.summary_out, nogear::io::dump(doc));
    }
    if (!a.out.empty() && a.out != "-") {
        std::cout << "n=" << s.size() << " mean=" << mean << " variance=" << var << " lag1_acf=" << r1 << '\n';
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string model = "nogear";
    std::string input;
    std::string out;
    int restarts = 5;
    std::uint64_t seed = 20240101;
};

int cmd_fit(const FitArgs& a, const GlobalOptions& g) {
    std::vector<nogear::Family> fams;
    if (a.model == "all") {
        fams.assign(nogear::kAllFamilies.begin(), nogear::kAllFamilies.end());
    } else {
        try {
            fams.push_back(nogear::family_from_string(a.model));
        } catch (const nogear::InputError& e) {
            throw UsageError(e.what());
        }
    }
    const auto series = nogear::io::read_series_csv(a.input);
    nogear::FitOptions fo;
    fo.restarts = a.restarts;
    fo.seed = a.seed;

    std::vector<nogear::FitResult> fits;
    for (auto f : fams) fits.push_back(nogear::fit_cml(f, series, fo));

    json cfg{{"model", a.model}, {"input", a.input}, {"n", series.size()}, {"fit", nogear::io::to_json(fo)}};
    json doc;
    doc["manifest"] = manifest("fit", cfg, g, json{{"fit", a.out.empty() ? "-" : a.out}});
    if (fits.size() == 1) {
        doc.update(nogear::io::to_json(fits.front()));
    } else {
        std::vector<std::size_t> order(fits.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return fits[i].aic < fits[j].aic; });
        json arr = json::array();
        for (auto i : order) arr.push_back(nogear::io::to_json(fits[i]));
        doc["fits"] = arr;
        std::ostream& os = (a.out.empty() || a.out == "-") ? std::cerr : std::cout;
        os << "rank  family   loglik        AIC         BIC         AICc\n";
        int rank = 1;
        for (auto i : order) {
            const auto& r = fits[i];
            os << std::left << std::setw(6) << rank++ << std::setw(9) << nogear::to_string(r.family) << std::right
               << std::fixed << std::setprecision(3) << std::setw(10) << r.loglik << std::setw(12) << r.aic
               << std::setw(12) << r.bic << std::setw(12) << (r.aicc ? *r.aicc : std::nan("")) << '\n';
        }
        os.unsetf(std::ios::floatfield);
    }
    write_text(a.out, nogear::io::dump(doc));
    return kOk;
}

// ---------------------------------------------------------------------------
// forecast
// ---------------------------------------------------------------------------

struct ForecastArgs {
    ModelFlags model;
    std::string fit;
    std::string input;
    std::optional<nogear::count_t> origin;
    nogear::count_t h = 2;
    double delta = 0.05;
    nogear::count_t M = 200;
    nogear::count_t display_max = -1;
    std::string out;
    std::string csv;
};

int cmd_forecast(const ForecastArgs& a, const GlobalOptions& g) {
    if (a.h < 1) throw UsageError("--h must be >= 1");
    if (!(a.delta > 0.0 && a.delta < 1.0)) throw UsageError("--delta must lie in (0, 1)");
    if (a.M < 1) throw UsageError("--M must be >= 1");
    const auto fp = resolve_params(a.fit, a.model);

    nogear::count_t origin = 0;
    if (a.origin) {
        origin = *a.origin;
    } else if (!a.input.empty()) {
        origin = nogear::io::read_series_csv(a.input).values.back();
    } else {
        throw UsageError("forecast needs --origin or --input");
    }
    if (origin < 0 || origin > a.M) throw UsageError("origin " + std::to_string(origin) + " outside {0..M}");

    const auto tm = nogear::transition_matrix(fp, a.M);
    const auto fds = nogear::h_step_distributions(tm, origin, a.h);

    json fc = json::array();
    std::ostringstream csv;
    csv << "horizon,x,prob\n" << std::setprecision(17);
    for (const auto& fd : fds) {
        const auto pf = nogear::point_forecasts(fd);
        const auto hpp = nogear::hpp_interval(fd, a.delta);
        fc.push_back(nogear::io::to_json(fd, pf, hpp, a.display_max));
        for (std::size_t x = 0; x < fd.probs.size(); ++x) csv << fd.horizon << ',' << x << ',' << fd.probs[x] << '\n';
    }
    json cfg{{"params", nogear::io::to_json(fp)}, {"fit", a.fit}, {"input", a.input}, {"origin", origin},
             {"h", a.h}, {"delta", a.delta}, {"M", a.M}, {"display_max", a.display_max}};
    json doc{{"manifest", manifest("forecast", cfg, g, json{{"forecast", a.out.empty() ? "-" : a.out}, {"csv", a.csv}})},
             {"forecasts", fc}};
    write_text(a.out, nogear::io::dump(doc));
    if (!a.csv.empty()) write_text(a.csv, csv.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string config;
    std::string out;
    std::string csv;
    std::optional<std::size_t> replications;
    std::optional<unsigned> threads;
};

int cmd_evaluate(const EvaluateArgs& a, const GlobalOptions& g) {
    const json j = read_json_file(a.config);
    // a config may hold a single experiment or {"experiments": [...]}
    std::vector<json> items;
    if (j.contains("experiments")) {
        for (const auto& e : j.at("experiments")) {
            json merged = j;
            merged.erase("experiments");
            merged.update(e);
            items.push_back(merged);
        }
    } else {
        items.push_back(j);
    }
    json reports = json::array();
    json configs = json::array();
    std::ostringstream csv;
    bool first = true;
    for (auto& item : items) {
        if (a.replications) item["replications"] = *a.replications;
        if (a.threads) item["threads"] = *a.threads;
        nogear::ExperimentConfig cfg;
        try {
            cfg = nogear::io::experiment_config_from_json(item);
        } catch (const nogear::ConstraintViolation& e) {
            throw UsageError(e.what());
        }
        const auto rep = nogear::run_forecast_experiment(cfg);
        configs.push_back(nogear::io::to_json(cfg));
        reports.push_back(nogear::io::to_json(rep));
        std::ostringstream part;
        nogear::io::write_csv(part, rep);
        std::string text = part.str();
        if (!first) text = text.substr(text.find('\n') + 1);
        csv << text;
        first = false;
    }
    json doc{{"manifest", manifest("evaluate", configs, g, json{{"report", a.out.empty() ? "-" : a.out}, {"csv", a.csv}})},
             {"reports", reports}};
    write_text(a.out, nogear::io::dump(doc));
    if (!a.csv.empty()) write_text(a.csv, csv.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

struct CoverageArgs {
    std::string config;
    std::string out;
    std::string csv;
    std::optional<std::size_t> replications;
    std::optional<unsigned> threads;
    bool no_fit = false;
};

int cmd_coverage(const CoverageArgs& a, const GlobalOptions& g) {
    json j = read_json_file(a.config);
    if (a.replications) j["replications"] = *a.replications;
    if (a.threads) j["threads"] = *a.threads;
    if (a.no_fit) j["fit"] = false;
    std::vector<json> sets;
    if (j.contains("sets")) {
        for (const auto& s : j.at("sets")) sets.push_back(s);
    } else {
        sets.push_back(j);
    }
    json reports = json::array();
    json configs = json::array();
    std::ostringstream csv;
    nogear::io::write_coverage_csv_header(csv);
    for (const auto& s : sets) {
        nogear::CoverageConfig cfg;
        try {
            cfg = nogear::io::coverage_config_from_json(s, j);
        } catch (const nogear::ConstraintViolation& e) {
            throw UsageError(e.what());
        }
        const auto rep = nogear::run_coverage_experiment(cfg);
        configs.push_back(json{{"label", cfg.label},
                               {"params", nogear::io::to_json(cfg.params)},
                               {"n_list", cfg.n_list},
                               {"horizons", cfg.horizons},
                               {"delta", cfg.delta},
                               {"replications", cfg.replications},
                               {"seed", cfg.base_seed.seed},
                               {"M", cfg.M},
                               {"fit", cfg.fit},
                               {"fit_options", nogear::io::to_json(cfg.fit_opts)}});
        reports.push_back(nogear::io::to_json(rep));
        nogear::io::write_csv_rows(csv, rep);
    }
    json doc{{"manifest", manifest("coverage", configs, g, json{{"report", a.out.empty() ? "-" : a.out}, {"csv", a.csv}})},
             {"reports", reports}};
    write_text(a.out, nogear::io::dump(doc));
    if (!a.csv.empty()) write_text(a.csv, csv.str());
    return kOk;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct DiagnoseArgs {
    ModelFlags model;
    std::string fit;
    std::string input;
    std::string out;
    std::string csv_prefix;
    std::size_t bins = 10;
    std::size_t max_lag = 20;
    std::vector<std::size_t> lb_lags{2, 5, 10};
};

int cmd_diagnose(const DiagnoseArgs& a, const GlobalOptions& g) {
    if (a.bins < 2) throw UsageError("--bins must be >= 2");
    const auto series = nogear::io::read_series_csv(a.input);
    const auto fp = resolve_params(a.fit, a.model);
    nogear::DiagnosticsOptions opts;
    opts.pit_bins = a.bins;
    opts.max_lag = a.max_lag;
    opts.ljung_box_lags = a.lb_lags;
    const auto rep = nogear::diagnose(fp, series, opts);

    json outputs{{"report", a.out.empty() ? "-" : a.out}};
    if (!a.csv_prefix.empty()) {
        std::ostringstream pit, acf, jumps;
        pit << "bin,lower,upper,mass\n" << std::setprecision(17);
        for (std::size_t b = 0; b < rep.pit_bins.size(); ++b) {
            const double w = 1.0 / static_cast<double>(rep.pit_bins.size());
            pit << b + 1 << ',' << w * static_cast<double>(b) << ',' << w * static_cast<double>(b + 1) << ','
                << rep.pit_bins[b] << '\n';
        }
        acf << "lag,acf,bound\n" << std::setprecision(17);
        for (std::size_t k = 0; k < rep.residual_acf.values.size(); ++k)
            acf << k + 1 << ',' << rep.residual_acf.values[k] << ',' << rep.residual_acf.bound << '\n';
        jumps << "t,jump,lower,upper,violation\n" << std::setprecision(17);
        std::size_t vi = 0;
        for (std::size_t i = 0; i < rep.jumps.jumps.size(); ++i) {
            const bool viol = vi < rep.jumps.violations.size() && rep.jumps.violations[vi] == i;
            if (viol) ++vi;
            jumps << i + 2 << ',' << rep.jumps.jumps[i] << ',' << rep.jumps.lower << ',' << rep.jumps.upper << ','
                  << (viol ? 1 : 0) << '\n';
        }
        write_text(a.csv_prefix + "_pit.csv", pit.str());
        write_text(a.csv_prefix + "_acf.csv", acf.str());
        write_text(a.csv_prefix + "_jumps.csv", jumps.str());
        outputs["pit_csv"] = a.csv_prefix + "_pit.csv";
        outputs["acf_csv"] = a.csv_prefix + "_acf.csv";
        outputs["jumps_csv"] = a.csv_prefix + "_jumps.csv";
    }
    json cfg{{"params", nogear::io::to_json(fp)}, {"fit", a.fit}, {"input", a.input}, {"bins", a.bins},
             {"max_lag", a.max_lag}, {"ljung_box_lags", a.lb_lags}};
    json doc{{"manifest", manifest("diagnose", cfg, g, outputs)}, {"diagnostics", nogear::io::to_json(rep)}};
    write_text(a.out, nogear::io::dump(doc));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forecasting tools for geometric INAR(1) count time series"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_flag("--timestamp", g.timestamp, "Record the wall-clock time in output manifests");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a series and write it as CSV");
    sim.model.add_to(s);
    s->add_option("--n", sim.n, "Number of observations")->required();
    s->add_option("--seed", sim.seed, "Random seed");
    s->add_option("--burn-in", sim.burn_in, "Initial observations to discard");
    s->add_option("--out", sim.out, "Output CSV (default: stdout)");
    s->add_option("--summary-out", sim.summary_out, "Write summary and manifest JSON here");

    FitArgs fit;
    auto* f = app.add_subcommand("fit", "Conditional ML fit of one family (or 'all')");
    f->add_option("--model", fit.model, "Family or 'all'");
    f->add_option("--input", fit.input, "Series CSV")->required();
    f->add_option("--out", fit.out, "Output JSON (default: stdout)");
    f->add_option("--restarts", fit.restarts, "Random restarts");
    f->add_option("--seed", fit.seed, "Seed for restarts");

    ForecastArgs fc;
    auto* c = app.add_subcommand("forecast", "h-step forecast distributions, point forecasts and HPP intervals");
    c->set_help_flag("--help", "Print this help message and exit");  // frees -h for the horizon flag
    fc.model.add_to(c);
    c->add_option("--fit", fc.fit, "Fit JSON produced by 'fit' (overrides model flags)");
    c->add_option("--input", fc.input, "Series CSV; the last value is the origin");
    c->add_option("--origin", fc.origin, "Forecast origin (overrides --input)");
    c->add_option("--h,--horizon", fc.h, "Largest horizon");
    c->add_option("--delta", fc.delta, "HPP interval level is 1 - delta");
    c->add_option("--M", fc.M, "State-space truncation");
    c->add_option("--display-max", fc.display_max, "Truncate emitted probability vectors at this state");
    c->add_option("--out", fc.out, "Output JSON (default: stdout)");
    c->add_option("--csv", fc.csv, "Forecast pmf CSV");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "Forecast-accuracy replication experiment");
    e->add_option("--config", ev.config, "Experiment JSON")->required();
    e->add_option("--out", ev.out, "Report JSON (default: stdout)");
    e->add_option("--csv", ev.csv, "Flat CSV, one row per family and horizon");
    e->add_option("--replications", ev.replications, "Override replication count");
    e->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");

    CoverageArgs cv;
    auto* v = app.add_subcommand("coverage", "HPP interval coverage study");
    v->add_option("--config", cv.config, "Coverage JSON")->required();
    v->add_option("--out", cv.out, "Report JSON (default: stdout)");
    v->add_option("--csv", cv.csv, "Flat CSV, one row per (set, n, horizon)");
    v->add_option("--replications", cv.replications, "Override replication count");
    v->add_option("--threads", cv.threads, "Worker threads (0 = all cores)");
    v->add_flag("--no-fit", cv.no_fit, "Use the true parameters instead of refitting");

    DiagnoseArgs dg;
    auto* d = app.add_subcommand("diagnose", "Residual, PIT, jumps and Ljung-Box diagnostics");
    dg.model.add_to(d);
    d->add_option("--fit", dg.fit, "Fit JSON produced by 'fit' (overrides model flags)");
    d->add_option("--input", dg.input, "Series CSV")->required();
    d->add_option("--out", dg.out, "Report JSON (default: stdout)");
    d->add_option("--csv-prefix", dg.csv_prefix, "Write <prefix>_pit.csv, <prefix>_acf.csv, <prefix>_jumps.csv");
    d->add_option("--bins", dg.bins, "PIT histogram bins");
    d->add_option("--max-lag", dg.max_lag, "Largest residual ACF lag");
    d->add_option("--lb-lags", dg.lb_lags, "Ljung-Box lag counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kUsage;
    }

    try {
        if (*s) return cmd_simulate(sim, g);
        if (*f) return cmd_fit(fit, g);
        if (*c) return cmd_forecast(fc, g);
        if (*e) return cmd_evaluate(ev, g);
        if (*v) return cmd_coverage(cv, g);
        if (*d) return cmd_diagnose(dg, g);
    } catch (const UsageError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kUsage;
    } catch (const nogear::DegenerateSeries& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kDegenerate;
    } catch (const nogear::InputError& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kInput;
    } catch (const nlohmann::json::exception& ex) {
        std::cerr << "error: malformed configuration: " << ex.what() << '\n';
        return kInput;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kInternal;
    }
    return kUsage;
}
