#include "nogear/io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace nogear;

TEST(SeriesCsv, PlainAndHeader) {
    std::istringstream a("3\n0\n5\n");
    EXPECT_EQ(io::read_series_csv(a).values, (std::vector<count_t>{3, 0, 5}));
    std::istringstream b("count\n1\n2\n");
    EXPECT_EQ(io::read_series_csv(b).values, (std::vector<count_t>{1, 2}));
}

TEST(SeriesCsv, DateColumnIgnored) {
    std::istringstream a("date,count\n2020-01,4\n2020-02,7\n");
    EXPECT_EQ(io::read_series_csv(a).values, (std::vector<count_t>{4, 7}));
    std::istringstream b("count,date\n4,2020-01\n7,2020-02\n");
    EXPECT_EQ(io::read_series_csv(b).values, (std::vector<count_t>{4, 7}));
    std::istringstream c("2020-01,4\n2020-02,7\n");
    EXPECT_EQ(io::read_series_csv(c).values, (std::vector<count_t>{4, 7}));
}

TEST(SeriesCsv, Errors) {
    std::istringstream empty("");
    EXPECT_THROW(io::read_series_csv(empty), InputError);
    std::istringstream neg("1\n-2\n");
    EXPECT_THROW(io::read_series_csv(neg), InputError);
    std::istringstream frac("1\n2.5\n");
    EXPECT_THROW(io::read_series_csv(frac), InputError);
}

TEST(SeriesCsv, WriteReadRoundTrip) {
    const CountSeries s{{0, 9, 3}, "x"};
    std::stringstream ss;
    io::write_series_csv(ss, s);
    EXPECT_EQ(io::read_series_csv(ss).values, s.values);
}

TEST(ParamsJson, RoundTripEveryFamily) {
    const std::vector<FamilyParams> all{validate_params(0.6, 0.4, 0.75), NginarParams{0.67, 3.0}, GinarParams{0.5, 0.3},
                                        PinarParams{2.0, 0.4, true}};
    for (const auto& fp : all) {
        const auto back = io::params_from_json(io::to_json(fp));
        EXPECT_EQ(io::to_json(back).dump(), io::to_json(fp).dump());
    }
    EXPECT_THROW(io::params_from_json(io::json{{"family", "nogear"}, {"alpha", 0.4}, {"beta", 0.6}, {"theta", 0.7}}),
                 ConstraintViolation);
    EXPECT_THROW(io::params_from_json(io::json{{"family", "nogear"}}), InputError);
}

TEST(ForecastJson, SummariesRecomputableFromProbs) {
    const auto tm = transition_matrix(validate_params(0.6, 0.4, 0.75), 200);
    const auto fd = h_step_distribution(tm, 3, 2);
    const auto j = io::to_json(fd, point_forecasts(fd), hpp_interval(fd, 0.05));
    ForecastDistribution back;
    back.M = j["M"].get<count_t>();
    back.probs = j["probs"].get<std::vector<double>>();
    const auto pf = point_forecasts(back);
    EXPECT_EQ(pf.median, j["median"].get<count_t>());
    EXPECT_EQ(pf.mode, j["mode"].get<count_t>());
    EXPECT_EQ(pf.mean, j["mean"].get<double>());
    EXPECT_EQ(hpp_interval(back, 0.05).upper, j["hpp"]["upper"].get<count_t>());
}

TEST(ConfigJson, ExperimentConfig) {
    const auto j = io::json::parse(R"({"generator": {"family": "nginar", "alpha": 0.67, "mu": 3},
                                      "replications": 5, "seed": 9, "horizons": [1, 2, 3]})");
    const auto c = io::experiment_config_from_json(j);
    EXPECT_EQ(c.replications, 5u);
    EXPECT_EQ(c.base_seed.seed, 9u);
    EXPECT_EQ(c.horizons.size(), 3u);
    EXPECT_EQ(family_of(c.generator), Family::nginar);
    EXPECT_THROW(io::experiment_config_from_json(io::json::parse(R"({"replications": 5})")), InputError);
}
