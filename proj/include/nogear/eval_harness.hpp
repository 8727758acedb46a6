#pragma once

// Replication harness for forecast-accuracy comparisons across INAR(1)
// families and for HPP-interval coverage studies.

#include "nogear/estimation.hpp"
#include "nogear/inar_zoo.hpp"
#include "nogear/markov_engine.hpp"
#include "nogear/parallel.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nogear {

// ---------------------------------------------------------------------------
// Accuracy metrics (one replication)
// ---------------------------------------------------------------------------

namespace detail {

inline void check_lengths(std::span<const count_t> a, std::span<const count_t> f) {
    if (a.size() != f.size()) {
        throw LengthMismatch("actuals and forecasts differ in length (" + std::to_string(a.size()) + " vs " +
                             std::to_string(f.size()) + ")");
    }
    if (a.empty()) throw LengthMismatch("metric needs at least one forecast");
}

}  // namespace detail

/// Root mean squared error of rounded conditional-mean forecasts.
inline double prmse(std::span<const count_t> actuals, std::span<const count_t> mean_forecasts) {
    detail::check_lengths(actuals, mean_forecasts);
    double s = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        const double d = static_cast<double>(actuals[i] - mean_forecasts[i]);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(actuals.size()));
}

/// Mean absolute error of conditional-median forecasts.
inline double pmad(std::span<const count_t> actuals, std::span<const count_t> median_forecasts) {
    detail::check_lengths(actuals, median_forecasts);
    double s = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) s += std::abs(static_cast<double>(actuals[i] - median_forecasts[i]));
    return s / static_cast<double>(actuals.size());
}

/// Percentage of exact hits.
inline double ptp(std::span<const count_t> actuals, std::span<const count_t> forecasts) {
    detail::check_lengths(actuals, forecasts);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < actuals.size(); ++i) hits += actuals[i] == forecasts[i] ? 1 : 0;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(actuals.size());
}

// ---------------------------------------------------------------------------
// Forecast experiment
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    std::string label;
    FamilyParams generator = GinarParams{};
    std::vector<Family> fitted_families{Family::nogear, Family::nginar, Family::ginar, Family::pinar};
    std::size_t n_total = 200;
    double train_frac = 0.7;
    std::vector<count_t> horizons{1, 2};
    std::size_t replications = 100;
    RngSpec base_seed{};
    count_t M = 200;
    FitOptions fit{};
    unsigned threads = 0;

    std::size_t n_train() const { return static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n_total))); }

    void validate() const {
        nogear::validate(generator);
        if (!(train_frac > 0.0 && train_frac < 1.0)) throw InputError("train_frac must lie in (0, 1)");
        if (replications < 1) throw InputError("replications must be >= 1");
        if (horizons.empty()) throw InputError("at least one horizon is required");
        for (count_t h : horizons)
            if (h < 1) throw InputError("horizons must be >= 1");
        if (fitted_families.empty()) throw InputError("at least one fitted family is required");
        count_t hmax = *std::max_element(horizons.begin(), horizons.end());
        if (n_train() < 2 || n_train() >= n_total) throw InputError("train/test split leaves an empty segment");
        if (static_cast<count_t>(n_train()) < hmax) throw InputError("training segment shorter than largest horizon");
        if (M < 1) throw InputError("M must be >= 1");
    }
};

struct AccuracyCell {
    Family family = Family::nogear;
    count_t horizon = 1;
    double prmse = 0.0;
    double pmad = 0.0;
    double ptp_mean = 0.0;
    double ptp_median = 0.0;
    double ptp_mode = 0.0;
    std::size_t replications_ok = 0;
    std::size_t failures = 0;
};

struct AccuracyReport {
    std::string label;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<AccuracyCell> cells;
    /// First failure message per family, for auditing excluded replications.
    std::map<Family, std::string> failure_examples;

    const AccuracyCell& cell(Family f, count_t h) const {
        for (const auto& c : cells)
            if (c.family == f && c.horizon == h) return c;
        throw std::out_of_range("no accuracy cell for " + to_string(f) + " h=" + std::to_string(h));
    }
};

namespace detail {

struct ReplicationMetrics {
    bool ok = false;
    std::string error;
    // per horizon index
    std::vector<double> prmse, pmad, ptp_mean, ptp_median, ptp_mode;
};

inline ReplicationMetrics forecast_one(const CountSeries& series, std::size_t n_train, Family family,
                                       const std::vector<count_t>& horizons, count_t M, const FitOptions& fit_opts) {
    ReplicationMetrics out;
    try {
        CountSeries train{{series.values.begin(), series.values.begin() + static_cast<std::ptrdiff_t>(n_train)}, "train"};
        const FitResult fit = fit_cml(family, train, fit_opts);
        const TransitionMatrix tm = transition_matrix(fit.params, M);
        const count_t hmax = *std::max_element(horizons.begin(), horizons.end());

        std::map<count_t, std::vector<PointForecasts>> cache;
        auto forecasts_from = [&](count_t origin) -> const std::vector<PointForecasts>& {
            auto it = cache.find(origin);
            if (it != cache.end()) return it->second;
            std::vector<PointForecasts> pfs;
            for (const auto& fd : h_step_distributions(tm, origin, hmax)) pfs.push_back(point_forecasts(fd));
            return cache.emplace(origin, std::move(pfs)).first->second;
        };

        for (count_t h : horizons) {
            std::vector<count_t> actual, f_mean, f_median, f_mode;
            for (std::size_t t = n_train; t < series.size(); ++t) {
                const auto& pf = forecasts_from(series[t - idx(h)])[idx(h - 1)];
                actual.push_back(series[t]);
                f_mean.push_back(pf.mean_rounded);
                f_median.push_back(pf.median);
                f_mode.push_back(pf.mode);
            }
            out.prmse.push_back(nogear::prmse(actual, f_mean));
            out.pmad.push_back(nogear::pmad(actual, f_median));
            out.ptp_mean.push_back(nogear::ptp(actual, f_mean));
            out.ptp_median.push_back(nogear::ptp(actual, f_median));
            out.ptp_mode.push_back(nogear::ptp(actual, f_mode));
        }
        out.ok = true;
    } catch (const std::exception& e) {
        out.ok = false;
        out.error = e.what();
    }
    return out;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return RngSpec{a, b}.substream(0x5eedull).stream;
}

}  // namespace detail

/**
 * @brief Simulate, split, fit every family, forecast the test segment.
 *
 * Forecasts for test index t at horizon h start from the observed value at
 * t - h. Each metric is computed per replication over the test points and
 * then averaged over replications whose fit succeeded; failures are counted.
 */
inline AccuracyReport run_forecast_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::size_t n_train = cfg.n_train();
    const std::size_t R = cfg.replications;
    const std::size_t F = cfg.fitted_families.size();

    std::vector<std::vector<detail::ReplicationMetrics>> results(R, std::vector<detail::ReplicationMetrics>(F));
    detail::parallel_for(R, cfg.threads, [&](std::size_t r) {
        const CountSeries series = simulate(cfg.generator, cfg.n_total, cfg.base_seed.substream(r));
        FitOptions fo = cfg.fit;
        fo.seed = detail::mix_seed(cfg.fit.seed, r);
        for (std::size_t f = 0; f < F; ++f) {
            results[r][f] = detail::forecast_one(series, n_train, cfg.fitted_families[f], cfg.horizons, cfg.M, fo);
        }
    });

    AccuracyReport rep;
    rep.label = cfg.label;
    rep.n_train = n_train;
    rep.n_test = cfg.n_total - n_train;
    for (std::size_t f = 0; f < F; ++f) {
        for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
            AccuracyCell c;
            c.family = cfg.fitted_families[f];
            c.horizon = cfg.horizons[hi];
            for (std::size_t r = 0; r < R; ++r) {
                const auto& m = results[r][f];
                if (!m.ok) {
                    ++c.failures;
                    if (!rep.failure_examples.contains(c.family)) rep.failure_examples[c.family] = m.error;
                    continue;
                }
                ++c.replications_ok;
                c.prmse += m.prmse[hi];
                c.pmad += m.pmad[hi];
                c.ptp_mean += m.ptp_mean[hi];
                c.ptp_median += m.ptp_median[hi];
                c.ptp_mode += m.ptp_mode[hi];
            }
            if (c.replications_ok > 0) {
                const double k = static_cast<double>(c.replications_ok);
                c.prmse /= k;
                c.pmad /= k;
                c.ptp_mean /= k;
                c.ptp_median /= k;
                c.ptp_mode /= k;
            } else {
                c.prmse = c.pmad = c.ptp_mean = c.ptp_median = c.ptp_mode = std::nan("");
            }
            rep.cells.push_back(c);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Coverage experiment
// ---------------------------------------------------------------------------

struct CoverageConfig {
    std::string label;
    ModelParams params = validate_params(0.6, 0.4, 0.75);
    std::vector<std::size_t> n_list{100, 300, 500, 1000};
    std::vector<count_t> horizons{1, 2};
    double delta = 0.05;
    std::size_t replications = 100;
    RngSpec base_seed{};
    count_t M = 200;
    /// false: intervals come from the true parameters (no estimation noise).
    bool fit = true;
    FitOptions fit_opts{};
    unsigned threads = 0;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
        if (replications < 1) throw InputError("replications must be >= 1");
        if (n_list.empty() || horizons.empty()) throw InputError("n_list and horizons must be non-empty");
        for (count_t h : horizons)
            if (h < 1) throw InputError("horizons must be >= 1");
        for (std::size_t n : n_list)
            if (n < 2) throw InputError("every n must be >= 2");
    }
};

struct CoverageCell {
    std::size_t n = 0;
    count_t horizon = 1;
    double empirical_coverage = 0.0;
    std::size_t replications = 0;
    std::size_t failures = 0;
    /// Average model-implied probability of the reported intervals.
    double mean_achieved_coverage = 0.0;
    double mean_width = 0.0;
};

struct CoverageReport {
    std::string label;
    double alpha = 0, beta = 0, theta = 0;
    double delta = 0.05;
    bool fitted = true;
    std::vector<CoverageCell> cells;

    const CoverageCell& cell(std::size_t n, count_t h) const {
        for (const auto& c : cells)
            if (c.n == n && c.horizon == h) return c;
        throw std::out_of_range("no coverage cell for n=" + std::to_string(n) + " h=" + std::to_string(h));
    }
};

/**
 * For each n and replication, simulates n + max(h) points, builds the HPP
 * interval for X_{n+h} given X_n (from parameters fitted on the first n
 * points, or the true ones when cfg.fit is false) and records containment.
 * All horizons of one replication share the simulated series.
 */
inline CoverageReport run_coverage_experiment(const CoverageConfig& cfg) {
    cfg.validate();
    const count_t hmax = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    const std::size_t H = cfg.horizons.size();

    // true-parameter intervals for every origin, computed once
    std::vector<std::vector<HppInterval>> oracle;
    if (!cfg.fit) {
        const TransitionMatrix tm = transition_matrix(cfg.params, cfg.M);
        oracle.resize(detail::idx(cfg.M) + 1);
        for (count_t y = 0; y <= cfg.M; ++y) {
            const auto fds = h_step_distributions(tm, y, hmax);
            for (count_t h : cfg.horizons) oracle[detail::idx(y)].push_back(hpp_interval(fds[detail::idx(h - 1)], cfg.delta));
        }
    }

    struct Outcome {
        bool ok = false;
        std::vector<char> hit;
        std::vector<double> achieved;
        std::vector<double> width;
    };

    CoverageReport rep;
    rep.label = cfg.label;
    rep.alpha = cfg.params.alpha();
    rep.beta = cfg.params.beta();
    rep.theta = cfg.params.theta();
    rep.delta = cfg.delta;
    rep.fitted = cfg.fit;

    for (std::size_t n : cfg.n_list) {
        std::vector<Outcome> outcomes(cfg.replications);
        detail::parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
            Outcome o;
            try {
                const auto stream = (static_cast<std::uint64_t>(n) << 32) ^ static_cast<std::uint64_t>(r);
                const CountSeries s = simulate(cfg.params, n + detail::idx(hmax), cfg.base_seed.substream(stream));
                const count_t origin = s[n - 1];
                std::vector<HppInterval> intervals;
                if (cfg.fit) {
                    CountSeries train{{s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(n)}, "train"};
                    FitOptions fo = cfg.fit_opts;
                    fo.seed = detail::mix_seed(cfg.fit_opts.seed, stream);
                    const FitResult fit = fit_cml(Family::nogear, train, fo);
                    const TransitionMatrix tm = transition_matrix(fit.params, cfg.M);
                    const auto fds = h_step_distributions(tm, origin, hmax);
                    for (count_t h : cfg.horizons) intervals.push_back(hpp_interval(fds[detail::idx(h - 1)], cfg.delta));
                } else {
                    if (origin > cfg.M) throw OriginOutOfRange("origin beyond truncation");
                    intervals = oracle[detail::idx(origin)];
                }
                for (std::size_t hi = 0; hi < H; ++hi) {
                    const count_t target = s[n - 1 + detail::idx(cfg.horizons[hi])];
                    o.hit.push_back(intervals[hi].contains(target) ? 1 : 0);
                    o.achieved.push_back(intervals[hi].achieved_coverage);
                    o.width.push_back(static_cast<double>(intervals[hi].upper - intervals[hi].lower + 1));
                }
                o.ok = true;
            } catch (const std::exception&) {
                o.ok = false;
            }
            outcomes[r] = std::move(o);
        });

        for (std::size_t hi = 0; hi < H; ++hi) {
            CoverageCell c;
            c.n = n;
            c.horizon = cfg.horizons[hi];
            std::size_t hits = 0;
            for (const auto& o : outcomes) {
                if (!o.ok) {
                    ++c.failures;
                    continue;
                }
                ++c.replications;
                hits += static_cast<std::size_t>(o.hit[hi]);
                c.mean_achieved_coverage += o.achieved[hi];
                c.mean_width += o.width[hi];
            }
            if (c.replications > 0) {
                const double k = static_cast<double>(c.replications);
                c.empirical_coverage = static_cast<double>(hits) / k;
                c.mean_achieved_coverage /= k;
                c.mean_width /= k;
            }
            rep.cells.push_back(c);
        }
    }
    return rep;
}

}  // namespace nogear
