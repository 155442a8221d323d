#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "toeplab/toeplab.hpp"

using namespace toeplab;

namespace {

EnsembleSpec make(Family f, std::uint64_t seed = 1)
{
    EnsembleSpec s;
    s.family = f;
    s.master_seed = seed;
    return s;
}

// Owning copy; ranging over entries() of a temporary would dangle.
std::vector<double> values(CoeffSeq const& x) { return {x.entries().begin(), x.entries().end()}; }

std::vector<Family> all_families()
{
    return {family::Rademacher{},        family::Gaussian{0.0, 1.0}, family::Gaussian{1.0, 2.0},
            family::UniformCentered{3.0}, family::StudentT{4.0},      family::TwoPointHeavy{},
            family::Constant{-2.5}};
}

// E max(|Z1|, |Z2|) = int_0^inf (1 - erf(t/sqrt2)^2) dt by composite Simpson.
double expected_max_two_folded_normals()
{
    auto f = [](double t) {
        double const e = std::erf(t / std::numbers::sqrt2);
        return 1.0 - e * e;
    };
    int const steps = 20000;
    double const b = 12.0, h = b / steps;
    double s = f(0.0) + f(b);
    for (int k = 1; k < steps; ++k)
        s += (k % 2 == 1 ? 4.0 : 2.0) * f(k * h);
    return s * h / 3.0;
}

}  // namespace

TEST(SampleSequence, ConstantFamily)
{
    EXPECT_EQ(sample_sequence(make(family::Constant{3.0}), 4, 0), (CoeffSeq{3, 3, 3, 3}));
}

TEST(SampleSequence, RademacherSupport)
{
    for (std::uint64_t k = 0; k < 20; ++k)
        for (double v : values(sample_sequence(make(family::Rademacher{}, k), 200, k)))
            EXPECT_TRUE(v == 1.0 || v == -1.0);
}

TEST(SampleSequence, UniformSupport)
{
    for (double v : values(sample_sequence(make(family::UniformCentered{2.0}), 5000, 0)))
        EXPECT_LE(std::abs(v), 2.0);
}

TEST(SampleSequence, TwoPointHeavyIsZeroBelowActivationIndex)
{
    for (std::uint64_t k = 0; k < 200; ++k)
    {
        CoeffSeq const x = sample_sequence(make(family::TwoPointHeavy{}), 10, k);
        for (double v : x.entries())
            EXPECT_EQ(v, 0.0);
    }
}

TEST(SampleSequence, TwoPointHeavyTakesOnlyItsAtoms)
{
    // About 1.5 nonzero entries are expected per length-5000 draw, so pool a few.
    std::size_t nonzero = 0;
    for (std::uint64_t k = 0; k < 20; ++k)
    {
        CoeffSeq const x = sample_sequence(make(family::TwoPointHeavy{}), 5000, k);
        for (std::size_t i = 0; i < x.size(); ++i)
        {
            if (x[i] == 0.0)
                continue;
            ++nonzero;
            EXPECT_GE(i, two_point_first_index);
            EXPECT_DOUBLE_EQ(std::abs(x[i]), two_point_law(i).value);
        }
    }
    EXPECT_GT(nonzero, 0u);
}

TEST(TwoPointLaw, MatchesGuardedFormula)
{
    EXPECT_EQ(two_point_law(0).probability, 0.0);
    EXPECT_EQ(two_point_law(two_point_first_index - 1).value, 0.0);
    for (std::size_t i : {16u, 100u, 4096u, 1u << 20})
    {
        double const x = static_cast<double>(i);
        double const l1 = std::log(x);
        double const l2 = std::max(std::log(l1), 1.0);
        // logloglog stays guarded at 1 until i is astronomically large.
        auto const law = two_point_law(i);
        EXPECT_NEAR(law.value, std::sqrt(x * l1), 1e-12 * law.value);
        EXPECT_NEAR(law.probability, 1.0 / (x * l1 * l2), 1e-12 * law.probability);
        EXPECT_LT(2.0 * law.probability, 1.0);
    }
}

TEST(SampleSequence, RejectsInvalidParameters)
{
    EXPECT_THROW((void)sample_sequence(make(family::Gaussian{0.0, -1.0}), 3, 0), std::invalid_argument);
    EXPECT_THROW((void)sample_sequence(make(family::StudentT{0.0}), 3, 0), std::invalid_argument);
    EXPECT_THROW((void)sample_sequence(make(family::StudentT{-2.0}), 3, 0), std::invalid_argument);
    EXPECT_THROW((void)sample_sequence(make(family::UniformCentered{-1.0}), 3, 0), std::invalid_argument);
    EXPECT_THROW((void)sample_sequence(make(family::Rademacher{}), 0, 0), std::invalid_argument);
}

TEST(SampleSequence, DeterministicAndPrefixConsistent)
{
    for (Family const& f : all_families())
    {
        EnsembleSpec const spec = make(f, 77);
        for (std::uint64_t k : {0ull, 1ull, 123456789ull})
        {
            CoeffSeq const full = sample_sequence(spec, 700, k);
            EXPECT_EQ(full, sample_sequence(spec, 700, k));
            for (std::size_t m : {1u, 2u, 17u, 699u})
                EXPECT_EQ(sample_sequence(spec, m, k), full.prefix(m)) << family_name(f);
        }
    }
}

TEST(SampleSequence, CallOrderDoesNotMatter)
{
    EnsembleSpec const spec = make(family::Gaussian{}, 5);
    std::vector<CoeffSeq> forward, backward(10);
    for (std::uint64_t k = 0; k < 10; ++k)
        forward.push_back(sample_sequence(spec, 50, k));
    for (std::uint64_t k = 10; k-- > 0;)
        backward[k] = sample_sequence(spec, 50, k);
    EXPECT_EQ(forward, backward);
}

TEST(SampleSequence, DistinctSamplesAndSeedsDiffer)
{
    EnsembleSpec const a = make(family::Gaussian{}, 1), b = make(family::Gaussian{}, 2);
    EXPECT_NE(sample_sequence(a, 20, 0), sample_sequence(a, 20, 1));
    EXPECT_NE(sample_sequence(a, 20, 0), sample_sequence(b, 20, 0));
}

TEST(SampleSequence, MomentsConverge)
{
    std::size_t const n = 500, n_mc = 400;
    double const count = static_cast<double>(n * n_mc);
    for (Family const& f : {Family{family::Rademacher{}}, Family{family::Gaussian{0.0, 1.0}}})
    {
        double sum = 0.0, sum2 = 0.0;
        for (std::uint64_t k = 0; k < n_mc; ++k)
            for (double v : values(sample_sequence(make(f, 9), n, k)))
            {
                sum += v;
                sum2 += v * v;
            }
        double const mean = sum / count;
        double const var = sum2 / count - mean * mean;
        EXPECT_LE(std::abs(mean), 4.0 / std::sqrt(count)) << family_name(f);
        EXPECT_LE(std::abs(var - 1.0), 4.0 / std::sqrt(count) * std::sqrt(2.0)) << family_name(f);
    }
}

TEST(SampleSequence, EmpiricalTailsMatchFamilyTailProbability)
{
    std::size_t const draws = 200000;
    for (Family const& f : {Family{family::Gaussian{0.5, 1.5}}, Family{family::UniformCentered{2.0}},
                            Family{family::StudentT{3.0}}})
        for (double threshold : {0.5, 1.0, 2.5})
        {
            std::size_t hits = 0;
            for (std::uint64_t k = 0; k < draws / 100; ++k)
                for (double v : values(sample_sequence(make(f, 31), 100, k)))
                    hits += std::abs(v) > threshold;
            double const p = family_tail_probability(f, 0, threshold);
            double const se = std::sqrt(p * (1 - p) / draws);
            EXPECT_NEAR(static_cast<double>(hits) / draws, p, 4 * se + 1e-12) << family_name(f) << threshold;
        }
}

TEST(Truncation, Examples)
{
    EXPECT_EQ(truncate_sequence({0, 0, 0}, TruncationRule::per_index()), (CoeffSeq{0, 0, 0}));
    EXPECT_NEAR(TruncationRule::per_index().threshold(2), std::sqrt(2 * std::log(2.0)), 1e-15);
    EXPECT_EQ(truncate_sequence({5, 5, 5}, TruncationRule::per_index()), (CoeffSeq{5, 5, 0}));
    EXPECT_NEAR(TruncationRule::per_dimension(3).threshold(0), std::sqrt(3 * std::log(3.0)), 1e-15);
    EXPECT_EQ(truncate_sequence({5, 5, 5}, TruncationRule::per_dimension(3)), (CoeffSeq{0, 0, 0}));
}

TEST(Truncation, SmallIndicesAreNeverTruncated)
{
    EXPECT_TRUE(std::isinf(TruncationRule::per_index().threshold(0)));
    EXPECT_TRUE(std::isinf(TruncationRule::per_index().threshold(1)));
    EXPECT_TRUE(std::isinf(TruncationRule::per_dimension(1).threshold(7)));
    EXPECT_EQ(truncate_sequence({1e300, -1e300}, TruncationRule::per_index()), (CoeffSeq{1e300, -1e300}));
}

TEST(Truncation, IdempotentAndDominated)
{
    for (auto const& rule : {TruncationRule::per_index(), TruncationRule::per_dimension(64)})
        for (std::uint64_t k = 0; k < 20; ++k)
        {
            CoeffSeq const x = sample_sequence(make(family::StudentT{1.5}, 4), 300, k);
            CoeffSeq const once = truncate_sequence(x, rule);
            EXPECT_EQ(truncate_sequence(once, rule), once);
            for (std::size_t i = 0; i < x.size(); ++i)
            {
                EXPECT_LE(std::abs(once[i]), std::abs(x[i]));
                EXPECT_TRUE(once[i] == 0.0 || once[i] == x[i]);
                EXPECT_LE(std::abs(once[i]), rule.threshold(i));
            }
        }
}

TEST(Truncation, AppliedBySampler)
{
    EnsembleSpec spec = make(family::StudentT{1.0}, 8);
    spec.truncation = TruncationRule::per_index();
    CoeffSeq const raw = sample_sequence(make(family::StudentT{1.0}, 8), 400, 2);
    EXPECT_EQ(sample_sequence(spec, 400, 2), truncate_sequence(raw, TruncationRule::per_index()));
}

TEST(Orlicz, Examples)
{
    EXPECT_EQ(orlicz_norm_empirical(std::vector<double>(5, 0.0), 2.0), 0.0);
    EXPECT_NEAR(orlicz_norm_empirical(std::vector<double>(5, 1.0), 2.0), 1.0 / std::sqrt(std::log(2.0)), 1e-6);
    EXPECT_NEAR(orlicz_norm_empirical(std::vector<double>(5, 1.0), 1.0), 1.0 / std::log(2.0), 2e-6);
    EXPECT_NEAR(1.0 / std::sqrt(std::log(2.0)), 1.2011, 1e-4);
    EXPECT_NEAR(1.0 / std::log(2.0), 1.4427, 1e-4);
}

TEST(Orlicz, ReturnedConstantIsTheSmallestFeasible)
{
    std::vector<double> const s = {0.1, -2.0, 0.7, 3.3, 0.0, 1.2};
    for (double alpha : {0.5, 1.0, 2.0})
    {
        double const c = orlicz_norm_empirical(s, alpha);
        auto excess = [&](double cc) {
            double a = 0.0;
            for (double v : s)
                a += std::exp(std::pow(std::abs(v) / cc, alpha)) - 1.0;
            return a / static_cast<double>(s.size());
        };
        EXPECT_LE(excess(c), 1.0 + 1e-9);
        EXPECT_GT(excess(c * (1 - 1e-5)), 1.0);
    }
}

TEST(Orlicz, ScalesLinearly)
{
    std::vector<double> s = {0.1, -2.0, 0.7, 3.3};
    double const base = orlicz_norm_empirical(s, 2.0);
    for (double& v : s)
        v *= 5.0;
    EXPECT_NEAR(orlicz_norm_empirical(s, 2.0), 5.0 * base, 1e-5 * base);
}

TEST(MaxAbsMoment, Examples)
{
    auto const c = max_abs_moment(make(family::Constant{2.0}), 7, 2.0, 10, 3);
    EXPECT_EQ(c.mean, 4.0);
    EXPECT_EQ(c.std_error, 0.0);
    auto const r = max_abs_moment(make(family::Rademacher{}), 13, 3.0, 10, 3);
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_THROW((void)max_abs_moment(make(family::Rademacher{}), 3, 0.5, 10, 1), std::invalid_argument);
    EXPECT_THROW((void)max_abs_moment(make(family::Rademacher{}), 3, 1.0, 0, 1), std::invalid_argument);
}

TEST(MaxAbsMoment, MaxOfTwoFoldedNormals)
{
    double const exact = expected_max_two_folded_normals();
    EXPECT_NEAR(exact, 2.0 / std::sqrt(std::numbers::pi), 1e-9);
    auto const est = max_abs_moment(make(family::Gaussian{}), 2, 1.0, 200000, 11);
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_NEAR(est.mean, exact, 4.0 * est.std_error);
}

TEST(FamilyMoments, SecondMomentsAgreeWithSampling)
{
    for (Family const& f : {Family{family::UniformCentered{3.0}}, Family{family::Gaussian{1.0, 2.0}},
                            Family{family::StudentT{6.0}}})
    {
        double sum2 = 0.0, sum4 = 0.0;
        std::size_t count = 0;
        for (std::uint64_t k = 0; k < 400; ++k)
            for (double v : values(sample_sequence(make(f, 2), 500, k)))
            {
                sum2 += v * v;
                sum4 += v * v * v * v;
                ++count;
            }
        double const m2 = sum2 / count;
        double const se = std::sqrt((sum4 / count - m2 * m2) / count);
        EXPECT_NEAR(m2, family_second_moment(f, 0), 5 * se) << family_name(f);
    }
    EXPECT_DOUBLE_EQ(family_second_moment(family::TwoPointHeavy{}, 3), 0.0);
    auto const law = two_point_law(1000);
    EXPECT_DOUBLE_EQ(family_second_moment(family::TwoPointHeavy{}, 1000), 2 * law.probability * law.value * law.value);
}
