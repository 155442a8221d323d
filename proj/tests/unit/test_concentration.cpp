#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "toeplab/toeplab.hpp"

using namespace toeplab;

namespace {

// All six evaluators with a fixed parameter draw, as functions of t.
std::vector<std::function<double(double)>> bound_zoo(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> pos(0.05, 5.0), unit(0.05, 1.0);
    double const s2 = pos(rng), M = pos(rng), EZ = pos(rng), d = pos(rng), K = pos(rng), C = pos(rng);
    double const p = 1.0 + pos(rng), e = pos(rng), a = unit(rng), psi = pos(rng);
    return {
        [=](double t) { return klein_rio_bound(t, s2, M, EZ); },
        [=](double t) { return bounded_tail_bound(t, s2, d, M, K); },
        [=](double t) { return fuk_nagaev_bound(t, s2, d, p, e, C); },
        [=](double t) { return psi_alpha_sum_bound(t, s2, d, a, psi, C); },
        [=](double t) { return psi2_toeplitz_bound(t, s2, K); },
        [=](double t) { return psi_alpha_toeplitz_bound(t, s2, psi, a, K, false); },
        [=](double t) { return psi_alpha_toeplitz_bound(t, s2, psi, a, K, true); },
    };
}

TailCurve synthetic_curve(std::vector<double> thresholds, std::function<double(double)> upper)
{
    TailCurve c;
    c.thresholds = thresholds;
    for (double t : thresholds)
    {
        c.empirical_survival.push_back(0.0);
        c.lower_confidence.push_back(0.0);
        c.upper_confidence.push_back(upper(t));
    }
    c.bound_values.assign(thresholds.size(), 1.0);
    c.n_samples = 100;
    return c;
}

}  // namespace

TEST(KleinRio, Examples)
{
    EXPECT_EQ(klein_rio_bound(0, 1, 1, 1), 1.0);
    EXPECT_NEAR(klein_rio_bound(1, 0, 1, 0), std::exp(-1.0 / 3.0), 1e-15);
    EXPECT_NEAR(klein_rio_bound(1, 0, 1, 0), 0.71653, 1e-5);
    EXPECT_NEAR(klein_rio_bound(2, 2, 1, 3), std::exp(-4.0 / 22.0), 1e-15);
    EXPECT_NEAR(klein_rio_bound(2, 2, 1, 3), 0.83383, 1e-4);
    EXPECT_EQ(klein_rio_bound(1, 0, 0, 0), 0.0);
    EXPECT_THROW((void)klein_rio_bound(-1, 1, 1, 1), std::invalid_argument);
}

TEST(KleinRio, NondecreasingInEachParameter)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 500; ++trial)
    {
        double const t = u(rng) + 0.01, s = u(rng), M = u(rng), E = u(rng), bump = u(rng);
        double const base = klein_rio_bound(t, s, M, E);
        EXPECT_GE(klein_rio_bound(t, s + bump, M, E), base);
        EXPECT_GE(klein_rio_bound(t, s, M + bump, E), base);
        EXPECT_GE(klein_rio_bound(t, s, M, E + bump), base);
    }
}

TEST(BoundedTail, Examples)
{
    EXPECT_EQ(bounded_tail_bound(0, 1, 1, 1, 1), 1.0);
    EXPECT_NEAR(bounded_tail_bound(2, 1, 1, 1, 1), std::exp(-1.0) + std::exp(-2.0), 1e-15);
    EXPECT_NEAR(bounded_tail_bound(2, 1, 1, 1, 1), 0.50321, 1e-5);
    EXPECT_EQ(bounded_tail_bound(2, 0, 1, 0, 1), 0.0);
}

TEST(FukNagaev, Examples)
{
    EXPECT_EQ(fuk_nagaev_bound(0, 1, 1, 2, 1, 1), 1.0);
    EXPECT_NEAR(fuk_nagaev_bound(2, 1, 1, 2, 0, 1), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(fuk_nagaev_bound(10, 1, 1, 2, 1, 1), std::exp(-25.0) + 0.01, 1e-15);
    EXPECT_NEAR(fuk_nagaev_bound(10, 1, 1, 2, 1, 1), 0.01, 1e-10);
}

TEST(PsiAlphaSum, Examples)
{
    EXPECT_EQ(psi_alpha_sum_bound(0, 1, 1, 1, 1, 1), 1.0);
    EXPECT_NEAR(psi_alpha_sum_bound(3, 0, 1, 1, 1, 1), 3 * std::exp(-3.0), 1e-15);
    EXPECT_NEAR(psi_alpha_sum_bound(3, 0, 1, 1, 1, 1), 0.14936, 1e-5);
    for (double t : {1.5, 3.0, 10.0})
        EXPECT_GT(psi_alpha_sum_bound(t, 0, 1, 0.5, 1, 2), psi_alpha_sum_bound(t, 0, 1, 0.5, 1, 1));
}

TEST(Psi2Toeplitz, Examples)
{
    EXPECT_EQ(psi2_toeplitz_bound(0, 1, 0.3), 0.3);
    EXPECT_EQ(psi2_toeplitz_bound(0, 1, 5.0), 1.0);
    EXPECT_NEAR(psi2_toeplitz_bound(2, 1, 2), 2 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(psi2_toeplitz_bound(2, 1, 2), 0.27067, 1e-5);
    EXPECT_EQ(psi2_toeplitz_bound(1, 0, 2), 0.0);
}

TEST(PsiAlphaToeplitz, Examples)
{
    EXPECT_EQ(psi_alpha_toeplitz_bound(0, 1, 1, 1, 1), 1.0);
    EXPECT_NEAR(psi_alpha_toeplitz_bound(1, 1, 1, 1, 1), 2 * std::exp(-1.0), 1e-15);
    EXPECT_NEAR(psi_alpha_toeplitz_bound(1, 1, 1, 1, 1), 0.73576, 1e-5);
}

TEST(PsiAlphaToeplitz, LinearBranchTakesOverForLargeT)
{
    // With Sigma^2 = psi = 1 the quadratic term t^2 loses to t (or t^alpha) once t > 1.
    for (double alpha : {0.3, 1.0, 1.5})
        for (bool power : {false, true})
        {
            double const t = 4.0;
            double const lin = power ? std::pow(t, alpha) : t;
            EXPECT_NEAR(psi_alpha_toeplitz_bound(t, 1, 1, alpha, 0.5, power), std::min(1.0, 2 * std::exp(-lin / 0.5)),
                        1e-15);
        }
    // The flag only matters when alpha != 1.
    EXPECT_EQ(psi_alpha_toeplitz_bound(3, 1, 1, 1.0, 1, true), psi_alpha_toeplitz_bound(3, 1, 1, 1.0, 1, false));
    EXPECT_NE(psi_alpha_toeplitz_bound(3, 1, 1, 0.5, 1, true), psi_alpha_toeplitz_bound(3, 1, 1, 0.5, 1, false));
}

TEST(Bounds, RangeAnchorAndMonotoneInT)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial)
        for (auto const& bound : bound_zoo(rng))
        {
            double prev = bound(0.0);
            EXPECT_LE(prev, 1.0);
            for (double t = 0.01; t < 60.0; t *= 1.3)
            {
                double const v = bound(t);
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
                EXPECT_LE(v, prev + 1e-15);
                prev = v;
            }
        }
}

TEST(Bounds, AtZeroEqualsOne)
{
    std::mt19937_64 rng(6);
    auto const zoo = bound_zoo(rng);
    for (std::size_t i = 0; i < zoo.size(); ++i)
    {
        if (i == 4)
            continue;  // psi2_toeplitz is min(1, K) at 0
        EXPECT_EQ(zoo[i](0.0), 1.0);
    }
}

TEST(BoundParams, Validation)
{
    BoundParams p;
    EXPECT_NO_THROW(p.validate());
    p.alpha = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.free_constants.K = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = {};
    p.sigma2 = -1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(TruncationLevel, Examples)
{
    EXPECT_NEAR(hj_truncation_level(1, 1), 8.0, 1e-14);
    EXPECT_NEAR(hj_truncation_level(2, 1), std::sqrt(32.0), 1e-14);
    EXPECT_NEAR(hj_truncation_level(2, 1), 5.6569, 1e-4);
    EXPECT_EQ(hj_truncation_level(3, 0), 0.0);
}

TEST(TruncationLevel, MarkovConsistencyOnAnySampleSet)
{
    // Markov's inequality holds exactly for the empirical law.
    std::mt19937_64 rng(7);
    std::student_t_distribution<double> heavy(1.2);
    for (double p : {1.0, 2.0, 3.0})
        for (int trial = 0; trial < 20; ++trial)
        {
            std::vector<double> maxima(300);
            double emax = 0.0;
            for (double& m : maxima)
            {
                m = std::abs(heavy(rng));
                emax += std::pow(m, p);
            }
            emax /= static_cast<double>(maxima.size());
            double const rho = hj_truncation_level(p, emax);
            std::size_t above = 0;
            for (double m : maxima)
                above += m > rho;
            EXPECT_LE(static_cast<double>(above) / maxima.size(), 1.0 / (2 * std::pow(4.0, p)) + 1e-15);
        }
}

TEST(StrongVariance, Examples)
{
    EXPECT_DOUBLE_EQ(sigma2_strong(std::vector<double>{1.0}, 1).value, 1.0);
    EXPECT_NEAR(sigma2_strong(std::vector<double>{1, 1, 1}, 3).value, 4.0, 1e-14);
    EXPECT_THROW((void)sigma2_strong(std::vector<double>{1, 1}, 3), std::invalid_argument);
}

TEST(StrongVariance, MatchesDenseComputationAndCap)
{
    for (std::size_t n = 1; n <= 64; ++n)
    {
        std::vector<double> m(n);
        for (std::size_t i = 0; i < n; ++i)
            m[i] = 0.5 + static_cast<double>(i % 5);
        double dense = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double const a = operator_norm_dense(a_basis_matrix(n, i));
            dense += a * a * m[i];
            total += m[i];
        }
        auto const sv = sigma2_strong(m, n);
        EXPECT_NEAR(sv.value, dense, 1e-10 * dense) << n;
        EXPECT_NEAR(sv.cap, 4 * total, 1e-12 * total);
        EXPECT_LE(sv.value, sv.cap);
    }
}

TEST(WeakVariance, SingleEntry)
{
    auto const w = sigma2_weak(std::vector<double>{2.5}, 1);
    EXPECT_EQ(w.lower, 2.5);
    EXPECT_EQ(w.upper, 2.5);
    EXPECT_EQ(w.heuristic, 2.5);
}

TEST(WeakVariance, TwoByTwoMatchesUnitCircleSearch)
{
    // Objective ||[[g0, g1], [g1, g0]]||^2 = (|g0| + |g1|)^2 over the unit circle.
    double best = 0.0;
    for (int k = 0; k < 100000; ++k)
    {
        double const th = 2 * std::numbers::pi * k / 100000.0;
        std::vector<double> g = {std::cos(th), std::sin(th)};
        best = std::max(best, std::pow(oracle::spectral_norm_symmetric(oracle::toeplitz(g)), 2));
    }
    EXPECT_NEAR(best, 2.0, 1e-8);
    auto const w = sigma2_weak(std::vector<double>{1, 1}, 2);
    EXPECT_NEAR(w.heuristic, best, 1e-8);
    EXPECT_NEAR(std::abs(w.gamma[0]), 1 / std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(std::abs(w.gamma[1]), 1 / std::sqrt(2.0), 1e-6);
}

TEST(WeakVariance, LowerEqualsNForUnitVariance)
{
    for (std::size_t n : {2u, 5u, 50u, 300u})
        EXPECT_NEAR(sigma2_weak(std::vector<double>(n, 1.0), n, 3).lower, static_cast<double>(n), 1e-8 * n);
}

TEST(WeakVariance, BracketHoldsOnRandomInput)
{
    std::mt19937_64 rng(15);
    std::exponential_distribution<double> ex(1.0);
    for (std::size_t n : {2u, 3u, 10u, 64u})
        for (int trial = 0; trial < 3; ++trial)
        {
            std::vector<double> m(n);
            for (double& v : m)
                v = ex(rng);
            auto const w = sigma2_weak(m, n);
            EXPECT_LE(w.lower, w.heuristic * (1 + 1e-12));
            EXPECT_LE(w.heuristic, w.upper * (1 + 1e-12));
            double gn = 0.0;
            for (double g : w.gamma)
                gn += g * g;
            EXPECT_NEAR(gn, 1.0, 1e-10);
        }
}

TEST(ClopperPearson, ClosedForms)
{
    // k = 1, n = 2: the upper end solves x^2 = 1 - alpha/2.
    auto const ci = clopper_pearson(1, 2, 0.05);
    EXPECT_NEAR(ci.upper, std::sqrt(0.975), 1e-12);
    EXPECT_NEAR(ci.upper, 0.9873, 2e-4);
    EXPECT_NEAR(ci.lower, 1 - std::sqrt(0.975), 1e-12);
    for (std::size_t n : {1u, 10u, 2000u})
    {
        EXPECT_NEAR(clopper_pearson(0, n, 0.01).upper, 1 - std::pow(0.005, 1.0 / n), 1e-12);
        EXPECT_EQ(clopper_pearson(0, n, 0.01).lower, 0.0);
        EXPECT_NEAR(clopper_pearson(n, n, 0.01).lower, std::pow(0.005, 1.0 / n), 1e-12);
        EXPECT_EQ(clopper_pearson(n, n, 0.01).upper, 1.0);
    }
    EXPECT_THROW((void)clopper_pearson(3, 2, 0.05), std::invalid_argument);
    EXPECT_THROW((void)clopper_pearson(1, 2, 0.0), std::invalid_argument);
}

TEST(ClopperPearson, EndpointsSolveBinomialTailEquations)
{
    // Upper end u: P(Bin(n, u) <= k) = alpha/2; lower end l: P(Bin(n, l) >= k) = alpha/2.
    auto binom_cdf = [](std::size_t k, std::size_t n, double p) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= k; ++j)
            acc += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0)
                            + j * std::log(p) + (n - j) * std::log1p(-p));
        return acc;
    };
    for (auto [k, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 10}, {5, 40}, {17, 200}})
    {
        auto const ci = clopper_pearson(k, n, 0.01);
        EXPECT_NEAR(binom_cdf(k, n, ci.upper), 0.005, 1e-10);
        EXPECT_NEAR(1 - binom_cdf(k - 1, n, ci.lower), 0.005, 1e-10);
    }
}

TEST(ClopperPearson, FewerSamplesWidenTheEnvelope)
{
    double prev = 0.0;
    for (std::size_t n : {2000u, 1000u, 400u, 100u, 20u})
    {
        double const u = clopper_pearson(n / 10, n, 0.01).upper;
        EXPECT_GT(u, prev);
        prev = u;
    }
}

TEST(EmpiricalTail, Examples)
{
    std::vector<double> const fives(7, 5.0);
    std::vector<double> const t1 = {1.0}, t4 = {4.0}, t5 = {5.0};
    EXPECT_EQ(empirical_tail(fives, 5.0, t1).empirical_survival[0], 0.0);
    EXPECT_EQ(empirical_tail(fives, 0.0, t4).empirical_survival[0], 1.0);
    auto const c = empirical_tail(std::vector<double>{0, 10}, 0.0, t5, 0.05);
    EXPECT_EQ(c.empirical_survival[0], 0.5);
    EXPECT_NEAR(c.upper_confidence[0], 0.98742, 1e-5);
    EXPECT_THROW((void)empirical_tail(std::vector<double>{}, 0.0, t5), std::invalid_argument);
    EXPECT_THROW((void)empirical_tail(fives, 0.0, std::vector<double>{2, 1}), std::invalid_argument);
}

TEST(EmpiricalTail, AgreesWithBruteForceCounting)
{
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> len(1, 10), small(-3, 3);
    for (int trial = 0; trial < 300; ++trial)
    {
        std::vector<double> s(static_cast<std::size_t>(len(rng)));
        for (double& v : s)
            v = small(rng);
        std::vector<double> const grid = {-4, -2.5, -1, 0, 0.5, 1, 2, 3.5};
        double const center = 0.5 * small(rng);
        auto const curve = empirical_tail(s, center, grid);
        double prev = 1.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
        {
            std::size_t count = 0;
            for (double v : s)
                count += v - center >= grid[i];
            EXPECT_DOUBLE_EQ(curve.empirical_survival[i], static_cast<double>(count) / s.size());
            EXPECT_LE(curve.empirical_survival[i], prev);
            EXPECT_GE(curve.upper_confidence[i], curve.empirical_survival[i]);
            EXPECT_LE(curve.lower_confidence[i], curve.empirical_survival[i]);
            EXPECT_LE(curve.upper_confidence[i], 1.0);
            EXPECT_GE(curve.lower_confidence[i], 0.0);
            prev = curve.empirical_survival[i];
        }
    }
}

TEST(Domination, TrivialBounds)
{
    auto curve = empirical_tail(std::vector<double>{1, 2, 3, 4}, 0.0, std::vector<double>{0.5, 1.5, 2.5, 3.5, 4.5});
    curve.set_bound([](double) { return 1.0; });
    auto const ok = check_bound_dominates(curve);
    EXPECT_EQ(ok.violations, 0u);
    EXPECT_EQ(ok.envelope_violations, 0u);
    curve.set_bound([](double) { return 0.0; });
    auto const bad = check_bound_dominates(curve);
    EXPECT_EQ(bad.violations, 4u);  // survival is positive at the first four thresholds
    curve.bound_values.pop_back();
    EXPECT_THROW((void)check_bound_dominates(curve), std::invalid_argument);
}

TEST(Domination, ExactGaussianTailIsRarelyConfidentlyViolated)
{
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i)
        grid.push_back(-2.0 + 0.2 * i);
    std::size_t clean = 0, seeds = 200;
    for (std::size_t seed = 0; seed < seeds; ++seed)
    {
        std::mt19937_64 rng(seed);
        auto const z = oracle::gaussian_vector(500, rng);
        auto curve = empirical_tail(z, 0.0, grid, 0.01);
        curve.set_bound([](double t) { return 0.5 * std::erfc(t / std::numbers::sqrt2); });
        clean += check_bound_dominates(curve).confident_violations == 0;
    }
    EXPECT_GE(static_cast<double>(clean) / seeds, 0.95);
}

TEST(FitConstant, AllZeroCurvesReturnRangeMinimum)
{
    std::vector<TailCurve> const curves = {synthetic_curve({0.5, 1.0, 2.0}, [](double) { return 0.0; })};
    auto const fit = fit_min_constant(curves, psi2_toeplitz_family(1.0), 0.01, 100.0);
    EXPECT_TRUE(fit.feasible);
    EXPECT_EQ(fit.value, 0.01);
}

TEST(FitConstant, RecoversConstantOfSyntheticCurve)
{
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i)
        grid.push_back(0.2 * i);
    for (double K : {0.7, 2.0, 9.0})
    {
        std::vector<TailCurve> const curves = {
            synthetic_curve(grid, [K](double t) { return psi2_toeplitz_bound(t, 1.5, K); })};
        auto const fit = fit_min_constant(curves, psi2_toeplitz_family(1.5), 0.01, 100.0);
        EXPECT_TRUE(fit.feasible);
        EXPECT_NEAR(fit.value, K, 2e-3 * K);
        EXPECT_GE(fit.value, K);
    }
}

TEST(FitConstant, InfeasibleIsFlagged)
{
    std::vector<TailCurve> const curves = {synthetic_curve({50.0}, [](double) { return 0.9; })};
    auto const fit = fit_min_constant(curves, psi2_toeplitz_family(1.0), 0.01, 2.0);
    EXPECT_FALSE(fit.feasible);
    EXPECT_EQ(fit.value, 2.0);
    EXPECT_THROW((void)fit_min_constant(std::vector<TailCurve>{}, psi2_toeplitz_family(1.0), 0.01, 2.0),
                 std::invalid_argument);
}

TEST(TailCsv, HeaderAndRows)
{
    auto curve = empirical_tail(std::vector<double>{0, 10}, 0.0, std::vector<double>{5.0}, 0.05);
    curve.set_bound([](double) { return 0.25; });
    std::ostringstream os;
    write_tail_csv(os, curve);
    std::string const text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,survival,upper_conf,bound");
    EXPECT_NE(text.find("\n5,0.5,"), std::string::npos);
    EXPECT_NE(text.find(",0.25\n"), std::string::npos);
}
