#pragma once

// JSON and CSV serialization for series, parameters, fits, forecasts and
// experiment reports. Requires nlohmann/json.

#include "nogear/diagnostics.hpp"
#include "nogear/estimation.hpp"
#include "nogear/eval_harness.hpp"
#include "nogear/markov_engine.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace nogear::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Series CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline bool parse_count(const std::string& s, count_t& out) {
    if (s.empty()) return false;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end && out >= 0;
}

}  // namespace detail

/**
 * @brief Reads one count per line.
 *
 * An optional header row naming a "count" column is accepted; a "date"
 * column may appear in either position and is ignored. Throws InputError on
 * an empty file or any cell that is not a non-negative integer.
 */
inline CountSeries read_series_csv(std::istream& in, std::string name = "series") {
    CountSeries s;
    s.name = std::move(name);
    std::string line;
    std::size_t line_no = 0;
    std::size_t count_col = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (!header_seen && s.values.empty()) {
            header_seen = true;
            bool is_header = false;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "count") {
                    count_col = i;
                    is_header = true;
                } else if (cells[i] == "date") {
                    is_header = true;
                    if (cells.size() == 2) count_col = 1 - i;
                }
            }
            if (is_header) continue;
            if (cells.size() == 2) {
                count_t tmp = 0;
                if (!detail::parse_count(cells[0], tmp) && detail::parse_count(cells[1], tmp)) count_col = 1;
            }
        }
        if (count_col >= cells.size()) {
            throw InputError("line " + std::to_string(line_no) + ": missing count column");
        }
        count_t v = 0;
        if (!detail::parse_count(cells[count_col], v)) {
            throw InputError("line " + std::to_string(line_no) + ": '" + cells[count_col] +
                             "' is not a non-negative integer");
        }
        s.values.push_back(v);
    }
    if (s.values.empty()) throw InputError("series file contains no observations");
    return s;
}

inline CountSeries read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_series_csv(in, path);
}

inline void write_series_csv(std::ostream& out, const CountSeries& s) {
    out << "count\n";
    for (count_t v : s.values) out << v << '\n';
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

inline json to_json(const FamilyParams& fp) {
    json j;
    j["family"] = to_string(family_of(fp));
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ModelParams>) {
                j["alpha"] = p.alpha();
                j["beta"] = p.beta();
                j["theta"] = p.theta();
            } else if constexpr (std::is_same_v<T, NginarParams>) {
                j["alpha"] = p.alpha_ng;
                j["mu"] = p.mu;
            } else if constexpr (std::is_same_v<T, GinarParams>) {
                j["p"] = p.p;
                j["alpha"] = p.alpha_thin;
            } else {
                j["lambda"] = p.lambda;
                j["alpha"] = p.alpha_thin;
                j["lambda_is_innovation_mean"] = p.lambda_is_innovation_mean;
            }
        },
        fp);
    return j;
}

namespace detail {

inline double req(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw InputError(std::string("missing numeric field '") + key + "'");
    }
    return j.at(key).get<double>();
}

}  // namespace detail

inline FamilyParams params_from_json(const json& j) {
    if (!j.contains("family") || !j.at("family").is_string()) throw InputError("missing field 'family'");
    const Family f = family_from_string(j.at("family").get<std::string>());
    switch (f) {
        case Family::nogear:
            return validate_params(detail::req(j, "alpha"), detail::req(j, "beta"), detail::req(j, "theta"));
        case Family::nginar: {
            NginarParams np{detail::req(j, "alpha"), detail::req(j, "mu")};
            validate(FamilyParams{np});
            return np;
        }
        case Family::ginar: {
            GinarParams gp{detail::req(j, "p"), detail::req(j, "alpha")};
            validate(gp);
            return gp;
        }
        case Family::pinar: {
            PinarParams pp{detail::req(j, "lambda"), detail::req(j, "alpha"),
                           j.value("lambda_is_innovation_mean", false)};
            validate(pp);
            return pp;
        }
    }
    throw InputError("unknown family");
}

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

inline json to_json(const FitResult& r) {
    json j;
    j["family"] = to_string(r.family);
    j["params"] = to_json(r.params);
    j["loglik"] = r.loglik;
    j["k"] = r.k;
    j["n_eff"] = r.n_eff;
    j["aic"] = r.aic;
    j["bic"] = r.bic;
    j["aicc"] = r.aicc ? json(*r.aicc) : json(nullptr);
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["evaluations"] = r.evaluations;
    j["warnings"] = r.warnings;
    j["estimator"] = "conditional maximum likelihood (multi-start Nelder-Mead)";
    return j;
}

// ---------------------------------------------------------------------------
// Forecasts
// ---------------------------------------------------------------------------

inline json to_json(const HppInterval& h) {
    return json{{"lower", h.lower},
                {"upper", h.upper},
                {"achieved_coverage", h.achieved_coverage},
                {"set_coverage", h.set_coverage},
                {"delta", h.delta},
                {"threshold", h.threshold},
                {"contiguous", h.contiguous}};
}

/// `display_max` < 0 keeps the full probability vector.
inline json to_json(const ForecastDistribution& fd, const PointForecasts& pf, const HppInterval& hpp,
                    count_t display_max = -1) {
    json j;
    j["origin"] = fd.origin;
    j["horizon"] = fd.horizon;
    j["M"] = fd.M;
    j["truncation_mass"] = fd.truncation_mass;
    j["mean"] = pf.mean;
    j["mean_rounded"] = pf.mean_rounded;
    j["median"] = pf.median;
    j["mode"] = pf.mode;
    j["hpp"] = to_json(hpp);
    const std::size_t keep = display_max < 0 ? fd.probs.size()
                                             : std::min(fd.probs.size(), nogear::detail::idx(display_max) + 1);
    j["probs"] = std::vector<double>(fd.probs.begin(), fd.probs.begin() + static_cast<std::ptrdiff_t>(keep));
    j["probs_truncated_for_display"] = keep < fd.probs.size();
    return j;
}

// ---------------------------------------------------------------------------
// Experiment configs and reports
// ---------------------------------------------------------------------------

inline FitOptions fit_options_from_json(const json& j, FitOptions fo = {}) {
    fo.restarts = j.value("restarts", fo.restarts);
    fo.max_iter = j.value("max_iter", fo.max_iter);
    fo.tol = j.value("tol", fo.tol);
    fo.seed = j.value("seed", fo.seed);
    return fo;
}

inline json to_json(const FitOptions& fo) {
    return json{{"restarts", fo.restarts}, {"max_iter", fo.max_iter}, {"tol", fo.tol}, {"seed", fo.seed}};
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
    ExperimentConfig c;
    c.label = j.value("label", std::string{});
    if (!j.contains("generator")) throw InputError("experiment config needs 'generator'");
    c.generator = params_from_json(j.at("generator"));
    if (j.contains("fitted_families")) {
        c.fitted_families.clear();
        for (const auto& f : j.at("fitted_families")) c.fitted_families.push_back(family_from_string(f.get<std::string>()));
    }
    c.n_total = j.value("n_total", c.n_total);
    c.train_frac = j.value("train_frac", c.train_frac);
    if (j.contains("horizons")) c.horizons = j.at("horizons").get<std::vector<count_t>>();
    c.replications = j.value("replications", c.replications);
    c.base_seed.seed = j.value("seed", c.base_seed.seed);
    c.M = j.value("M", c.M);
    if (j.contains("fit")) c.fit = fit_options_from_json(j.at("fit"));
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

inline json to_json(const ExperimentConfig& c) {
    json fams = json::array();
    for (Family f : c.fitted_families) fams.push_back(to_string(f));
    return json{{"label", c.label},
                {"generator", to_json(c.generator)},
                {"fitted_families", fams},
                {"n_total", c.n_total},
                {"train_frac", c.train_frac},
                {"horizons", c.horizons},
                {"replications", c.replications},
                {"seed", c.base_seed.seed},
                {"M", c.M},
                {"fit", to_json(c.fit)}};
}

inline json to_json(const AccuracyReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back(json{{"family", to_string(c.family)},
                             {"horizon", c.horizon},
                             {"prmse", c.prmse},
                             {"pmad", c.pmad},
                             {"ptp_mean", c.ptp_mean},
                             {"ptp_median", c.ptp_median},
                             {"ptp_mode", c.ptp_mode},
                             {"replications_ok", c.replications_ok},
                             {"failures", c.failures}});
    }
    json fails = json::object();
    for (const auto& [f, msg] : r.failure_examples) fails[to_string(f)] = msg;
    return json{{"label", r.label}, {"n_train", r.n_train}, {"n_test", r.n_test}, {"cells", cells}, {"failure_examples", fails}};
}

inline void write_csv(std::ostream& out, const AccuracyReport& r) {
    out << "label,family,horizon,prmse,pmad,ptp_mean,ptp_median,ptp_mode,replications_ok,failures\n";
    out << std::setprecision(10);
    for (const auto& c : r.cells) {
        out << r.label << ',' << to_string(c.family) << ',' << c.horizon << ',' << c.prmse << ',' << c.pmad << ','
            << c.ptp_mean << ',' << c.ptp_median << ',' << c.ptp_mode << ',' << c.replications_ok << ','
            << c.failures << '\n';
    }
}

/// One coverage config per parameter set; the shared fields may sit at the top level.
inline CoverageConfig coverage_config_from_json(const json& j, const json& defaults = json::object()) {
    auto pick = [&](const char* key) -> const json* {
        if (j.contains(key)) return &j.at(key);
        if (defaults.contains(key)) return &defaults.at(key);
        return nullptr;
    };
    CoverageConfig c;
    c.label = j.value("label", std::string{});
    json pj = j.contains("params") ? j.at("params") : j;
    if (!pj.contains("family")) pj["family"] = "nogear";
    const FamilyParams fp = params_from_json(pj);
    if (family_of(fp) != Family::nogear) throw InputError("coverage study is defined for NoGeAR parameters");
    c.params = std::get<ModelParams>(fp);
    if (const auto* v = pick("n_list")) c.n_list = v->get<std::vector<std::size_t>>();
    if (const auto* v = pick("horizons")) c.horizons = v->get<std::vector<count_t>>();
    if (const auto* v = pick("delta")) c.delta = v->get<double>();
    if (const auto* v = pick("replications")) c.replications = v->get<std::size_t>();
    if (const auto* v = pick("seed")) c.base_seed.seed = v->get<std::uint64_t>();
    if (const auto* v = pick("M")) c.M = v->get<count_t>();
    if (const auto* v = pick("fit")) {
        if (v->is_boolean()) {
            c.fit = v->get<bool>();
        } else {
            c.fit = true;
            c.fit_opts = fit_options_from_json(*v);
        }
    }
    if (const auto* v = pick("threads")) c.threads = v->get<unsigned>();
    c.validate();
    return c;
}

inline json to_json(const CoverageReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells) {
        cells.push_back(json{{"n", c.n},
                             {"horizon", c.horizon},
                             {"empirical_coverage", c.empirical_coverage},
                             {"replications", c.replications},
                             {"failures", c.failures},
                             {"mean_achieved_coverage", c.mean_achieved_coverage},
                             {"mean_width", c.mean_width}});
    }
    return json{{"label", r.label},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"theta", r.theta},
                {"delta", r.delta},
                {"fitted", r.fitted},
                {"cells", cells}};
}

inline void write_coverage_csv_header(std::ostream& out) {
    out << "label,alpha,beta,theta,n,horizon,empirical_coverage,replications,failures,mean_achieved_coverage,mean_width\n";
}

inline void write_csv_rows(std::ostream& out, const CoverageReport& r) {
    out << std::setprecision(10);
    for (const auto& c : r.cells) {
        out << r.label << ',' << r.alpha << ',' << r.beta << ',' << r.theta << ',' << c.n << ',' << c.horizon << ','
            << c.empirical_coverage << ',' << c.replications << ',' << c.failures << ',' << c.mean_achieved_coverage
            << ',' << c.mean_width << '\n';
    }
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

inline json to_json(const DiagnosticsReport& d) {
    json acf_rows = json::array();
    for (std::size_t k = 0; k < d.residual_acf.values.size(); ++k) {
        acf_rows.push_back(json{{"lag", k + 1}, {"value", d.residual_acf.values[k]}, {"bound", d.residual_acf.bound}});
    }
    json lb = json::array();
    for (const auto& l : d.ljung_box) {
        lb.push_back(json{{"lags", l.lags}, {"statistic", l.statistic}, {"p_value", l.p_value}, {"df", l.df}});
    }
    return json{{"residuals", d.residuals},
                {"residual_acf", acf_rows},
                {"pit_bins", d.pit_bins},
                {"jumps", d.jumps.jumps},
                {"sigma_j", d.jumps.sigma_j},
                {"jump_limits", json::array({d.jumps.lower, d.jumps.upper})},
                {"jump_violations", d.jumps.violations},
                {"ljung_box", lb},
                {"ljung_box_df_rule", "chi-square with df = m, no fitted-parameter correction"},
                {"pit", "non-randomized"}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace nogear::io
