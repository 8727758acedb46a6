#include "nogear/inar_zoo.hpp"
#include "nogear/model_core.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nogear;

TEST(Families, NamesRoundTrip) {
    for (Family f : kAllFamilies) EXPECT_EQ(family_from_string(to_string(f)), f);
    EXPECT_THROW(family_from_string("nbinar"), InputError);
    EXPECT_EQ(parameter_count(Family::nogear), 3u);
    EXPECT_EQ(parameter_count(Family::pinar), 2u);
}

TEST(Nginar, MappingToNoGeAR) {
    const auto p = nginar_as_nogear(NginarParams{0.67, 3.0});
    EXPECT_NEAR(p.alpha(), 1.0 / 1.67, 1e-15);
    EXPECT_NEAR(p.beta(), 1.0 - 1.0 / 1.67, 1e-15);
    EXPECT_NEAR(p.theta(), 0.75, 1e-15);
    EXPECT_NEAR(p.omega(), 0.67, 1e-12);  // thinning mean equals alpha_ng
}

TEST(Nginar, MatrixEqualsMappedNoGeARMatrix) {
    const NginarParams np{0.67, 3.0};
    const auto a = transition_matrix(np, 120);
    const auto b = transition_matrix(nginar_as_nogear(np), 120);
    for (count_t y = 0; y <= 120; y += 7)
        for (count_t x = 0; x <= 120; ++x) EXPECT_NEAR(a(y, x), b(y, x), 1e-12);
}

TEST(Ginar, KernelHandValues) {
    const GinarParams gp{0.5, 0.3};
    const auto k = make_kernel(gp);
    // P(0 -> 0) = P(eps = 0) = alpha + (1 - alpha)(1 - p)
    EXPECT_NEAR(kernel_transition_pmf(k, 0, 0), 0.3 + 0.7 * 0.5, 1e-15);
    // P(1 -> 0) = (1 - alpha) P(eps = 0)
    EXPECT_NEAR(kernel_transition_pmf(k, 1, 0), 0.7 * 0.65, 1e-15);
}

TEST(Ginar, StationaryLawIsGeometric) {
    const GinarParams gp{0.6, 0.4};
    const auto pi = transition_matrix(gp, 150).stationary();
    for (count_t x = 0; x <= 15; ++x) EXPECT_NEAR(pi[detail::idx(x)], 0.4 * std::pow(0.6, x), 1e-9);
}

TEST(Pinar, StationaryLawIsPoisson) {
    const PinarParams pp{2.5, 0.5};
    const auto pi = transition_matrix(pp, 80).stationary();
    for (count_t x = 0; x <= 12; ++x) EXPECT_NEAR(pi[detail::idx(x)], poisson_pmf(2.5, x), 1e-9);
    PinarParams inn{1.25, 0.5, true};
    EXPECT_NEAR(inn.stationary_mean(), 2.5, 1e-15);
}

TEST(Zoo, KernelMatchesNoGeARPmf) {
    const auto p = validate_params(0.7, 0.3, 0.5);
    const auto k = make_kernel(p);
    for (count_t y : {0, 1, 4})
        for (count_t x = 0; x <= 8; ++x) EXPECT_NEAR(kernel_transition_pmf(k, y, x), transition_pmf(p, y, x), 1e-13);
}

TEST(Zoo, SimulatedMeansMatchStationaryMeans) {
    const std::vector<FamilyParams> fams{validate_params(0.6, 0.4, 0.75), NginarParams{0.5, 2.0}, GinarParams{0.6, 0.4},
                                         PinarParams{2.0, 0.5}};
    for (const auto& fp : fams) {
        const auto s = simulate(fp, 60000, RngSpec{3, 0});
        double m = 0.0;
        for (count_t v : s.values) m += static_cast<double>(v);
        m /= static_cast<double>(s.size());
        EXPECT_NEAR(m, stationary_mean(fp), 0.1) << to_string(family_of(fp));
    }
}

TEST(Zoo, InvalidParamsRejected) {
    EXPECT_THROW(validate(FamilyParams{GinarParams{1.2, 0.3}}), ConstraintViolation);
    EXPECT_THROW(validate(FamilyParams{PinarParams{-1.0, 0.3}}), ConstraintViolation);
    EXPECT_THROW(validate(FamilyParams{NginarParams{0.9, 1.0}}), ConstraintViolation);
}
