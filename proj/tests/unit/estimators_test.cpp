// Copyright 2026 The qmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qmeas/estimators.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qmeas/error.hpp"
#include "qmeas/io.hpp"

using namespace qmeas;

namespace {

PauliString P(const std::string &s) {
    return PauliString::parse(s);
}

WeightedPauliSum sum_of(int n, std::initializer_list<std::pair<double, const char *>> terms) {
    std::vector<PauliTerm> t;
    for (auto &[c, p] : terms) t.push_back({c, P(p)});
    return WeightedPauliSum(n, t);
}

/// Probability-weighted mean of the single-shot estimator over every
/// (basis, outcome) pair, with Born probabilities from projectors.
double enumerated_mean(const MeasurementPlan &plan, const WeightedPauliSum &o, const DensityMatrix &rho,
                       ExplicitKernel kernel = ExplicitKernel::Membership) {
    EstimateAccumulator acc(plan, o, kernel);
    double mean = 0.0;
    for (const auto &b : oracle::all_bases(o.num_qubits())) {
        double k = plan.distribution->probability(P(b));
        if (k == 0.0) continue;
        auto born = oracle::born(rho, b);
        for (std::uint32_t bits = 0; bits < born.size(); ++bits) mean += k * born[bits] * acc.shot_value(P(b), bits);
    }
    return mean;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double var_se = 0.0;
};

/// Sample mean and variance of single-shot values, with the standard error of the variance.
Moments single_shot_moments(const MeasurementPlan &plan, const WeightedPauliSum &o, const DensityMatrix &rho,
                            std::size_t shots, std::uint64_t seed) {
    PauliBasisSampler sampler(rho);
    EstimateAccumulator acc(plan, o);
    std::mt19937_64 rng(seed);
    std::vector<double> v(shots);
    for (auto &x : v) {
        PauliString b = draw_basis(plan, rng);
        x = acc.shot_value(b, sampler.draw(b, rng));
    }
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= double(shots);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
        double d = x - m.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(shots);
    m4 /= double(shots);
    m.var = m2 * double(shots) / double(shots - 1);
    m.var_se = std::sqrt((m4 - m2 * m2) / double(shots));
    return m;
}

void expect_variance_matches(const MeasurementPlan &plan, const WeightedPauliSum &o, const DensityMatrix &rho,
                             double analytic, std::uint64_t seed) {
    Moments m = single_shot_moments(plan, o, rho, 1000000, seed);
    EXPECT_LE(std::abs(m.var - analytic), 3 * m.var_se + 1e-12) << "empirical " << m.var << " analytic " << analytic;
}

std::vector<ShotRecord> simulate(const MeasurementPlan &plan, const DensityMatrix &rho, std::size_t shots,
                                 std::uint64_t seed) {
    PauliBasisSampler sampler(rho);
    std::mt19937_64 rng(seed);
    std::vector<ShotRecord> out;
    for (std::size_t k = 0; k < shots; ++k) {
        PauliString b = draw_basis(plan, rng);
        out.push_back({b, sampler.draw(b, rng), 1});
    }
    return out;
}

/// Every basis hits only the terms it is responsible for.
WeightedPauliSum disjoint_groups_observable() {
    return sum_of(2, {{0.7, "ZZ"}, {-0.4, "ZI"}, {0.5, "XX"}, {0.3, "XI"}, {-0.2, "YY"}});
}

}  // namespace

TEST(Estimate, uniform_single_record_examples) {
    auto plan = plan_uniform_cs(1);
    auto o = sum_of(1, {{1.0, "Z"}});
    std::vector<ShotRecord> z{{P("Z"), 0, 1}};
    EXPECT_DOUBLE_EQ(estimate(z, plan, o).value, 3.0);
    std::vector<ShotRecord> x{{P("X"), 0, 1}};
    EXPECT_DOUBLE_EQ(estimate(x, plan, o).value, 0.0);
    EXPECT_EQ(estimate(x, plan, o).eps0, 1.0);
}

TEST(Estimate, ghz_zz_within_five_sigma) {
    auto plan = plan_uniform_cs(4);
    auto o = sum_of(4, {{1.0, "ZZII"}});
    DensityMatrix g = ghz(4);
    auto rec = simulate(plan, g, 10000, 314);
    double var = variance_product_scheme(*plan.distribution, o, g).exact;
    EXPECT_NEAR(var, 8.0, 1e-12);
    EXPECT_LE(std::abs(estimate(rec, plan, o).value - 1.0), 5 * std::sqrt(var / 10000));
}

TEST(Estimate, errors) {
    auto plan = plan_uniform_cs(2);
    auto o = sum_of(2, {{1.0, "ZZ"}});
    std::vector<ShotRecord> none;
    EXPECT_THROW(estimate(none, plan, o), InvalidArgument);
    std::vector<ShotRecord> with_i{{P("ZI"), 0, 1}};
    EXPECT_THROW(estimate(with_i, plan, o), ForeignRecord);

    auto l1 = plan_l1(o);
    std::vector<ShotRecord> foreign{{P("XX"), 0, 1}};
    EXPECT_THROW(estimate(foreign, l1, o), ForeignRecord);

    MeasurementPlan zero_plan;
    zero_plan.scheme = Scheme::LBCS;
    zero_plan.n = 1;
    zero_plan.distribution = BasisDistribution::product({{0.0, 0.0, 1.0}});
    std::vector<ShotRecord> xrec{{P("X"), 0, 1}};
    EXPECT_THROW(estimate(xrec, zero_plan, sum_of(1, {{1.0, "Z"}})), ForeignRecord);

    std::vector<ShotRecord> wrong_n{{P("ZZZ"), 0, 1}};
    EXPECT_THROW(estimate(wrong_n, plan, o), DimensionError);
    EXPECT_THROW(estimate(with_i, plan, sum_of(3, {{1.0, "ZZZ"}})), DimensionError);

    auto d = plan_derandomized(o, 2);
    std::vector<ShotRecord> zz{{P("ZZ"), 0, 1}};
    EXPECT_THROW(estimate(zz, d, o), InvalidArgument);
}

TEST(Estimate, exhaustive_unbiasedness_small_registers) {
    std::mt19937_64 rng(1001);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 1 + trial % 3;
        DensityMatrix rho = random_mixed_state(n, rng);
        WeightedPauliSum o = oracle::random_observable(n, 2 + trial % 5, rng);
        o.accumulate(PauliString(n), 0.375);
        double want = oracle::expectation(rho, oracle::observable_dense(o));
        EXPECT_NEAR(enumerated_mean(plan_l1(o), o, rho), want, 1e-10);
        EXPECT_NEAR(enumerated_mean(plan_ldf(o).plan, o, rho), want, 1e-10);
        EXPECT_NEAR(enumerated_mean(plan_ldf(o, true).plan, o, rho), want, 1e-10);
        EXPECT_NEAR(enumerated_mean(plan_ldf(o).plan, o, rho, ExplicitKernel::Hits), want, 1e-10);
        EXPECT_NEAR(enumerated_mean(plan_uniform_cs(n), o, rho), want, 1e-10);
        EXPECT_NEAR(enumerated_mean(plan_lbcs(o), o, rho), want, 1e-10);
    }
}

TEST(EstimateDerandomized, examples) {
    auto o = sum_of(2, {{1.0, "ZZ"}});
    MeasurementPlan plan;
    plan.scheme = Scheme::Derandomized;
    plan.n = 2;
    plan.fixed_bases = {P("ZZ")};
    std::vector<ShotRecord> r{{P("ZZ"), 0b00, 1}};
    EXPECT_DOUBLE_EQ(estimate_derandomized(r, plan, o).value, 1.0);

    auto o2 = sum_of(2, {{0.5, "ZZ"}, {0.5, "XX"}});
    MeasurementPlan p2 = plan;
    p2.fixed_bases = {P("ZZ"), P("XX")};
    PauliBasisSampler g2(ghz(2));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<ShotRecord> rec;
        for (const auto &b : p2.fixed_bases) rec.push_back({b, g2.draw(b, rng), 1});
        EXPECT_DOUBLE_EQ(estimate_derandomized(rec, p2, o2).value, 1.0);
    }

    auto o3 = sum_of(2, {{1.0, "ZZ"}, {-0.75, "XY"}});
    auto rep = estimate_derandomized(r, plan, o3);
    EXPECT_DOUBLE_EQ(rep.eps0, 0.75);
    EXPECT_DOUBLE_EQ(rep.value, 1.0);
    EXPECT_EQ(rep.hits[1], 0u);
}

TEST(EstimateDerandomized, alignment_and_reps) {
    auto o = sum_of(2, {{1.0, "ZZ"}, {1.0, "XX"}});
    MeasurementPlan plan;
    plan.scheme = Scheme::Derandomized;
    plan.n = 2;
    plan.fixed_bases = {P("ZZ"), P("XX")};
    std::vector<ShotRecord> r{{P("ZZ"), 0, 3}, {P("ZZ"), 3, 2}, {P("XX"), 0, 5}};
    auto rep = estimate_derandomized(r, plan, o);
    EXPECT_EQ(rep.n_samples, 10u);
    EXPECT_EQ(rep.hits[0], 5u);
    EXPECT_DOUBLE_EQ(rep.term_values[0], 1.0);
    std::vector<ShotRecord> swapped{{P("XX"), 0, 1}, {P("ZZ"), 0, 1}};
    EXPECT_THROW(estimate_derandomized(swapped, plan, o), InvalidArgument);
    std::vector<ShotRecord> short_r{{P("ZZ"), 0, 1}};
    EXPECT_THROW(estimate_derandomized(short_r, plan, o), InvalidArgument);
}

TEST(EstimateDerandomized, enumerated_expectation_is_exact_or_bounded_by_eps0) {
    std::mt19937_64 rng(2002);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + trial % 2;
        DensityMatrix rho = random_mixed_state(n, rng);
        WeightedPauliSum o = oracle::random_observable(n, 4, rng);
        std::size_t ns = trial < 10 ? 3 : 1;
        auto plan = plan_derandomized(o, ns);
        std::vector<std::vector<double>> born;
        for (const auto &b : plan.fixed_bases) born.push_back(oracle::born(rho, b.str()));
        const std::uint32_t outcomes = 1u << n;
        std::uint32_t combos = 1;
        for (std::size_t j = 0; j < ns; ++j) combos *= outcomes;
        double mean = 0.0, eps0 = 0.0;
        for (std::uint32_t c = 0; c < combos; ++c) {
            std::vector<ShotRecord> rec;
            double p = 1.0;
            std::uint32_t rest = c;
            for (std::size_t j = 0; j < ns; ++j) {
                std::uint32_t bits = rest % outcomes;
                rest /= outcomes;
                p *= born[j][bits];
                rec.push_back({plan.fixed_bases[j], bits, 1});
            }
            auto rep = estimate_derandomized(rec, plan, o);
            mean += p * rep.value;
            eps0 = rep.eps0;
        }
        double want = oracle::expectation(rho, oracle::observable_dense(o));
        if (plan.unhit_terms.empty()) {
            EXPECT_NEAR(mean, want, 1e-10);
        } else {
            EXPECT_LE(std::abs(mean - want), eps0 + 1e-10);
        }
    }
}

TEST(Accumulator, merge_and_reps_are_consistent) {
    auto h = builtin_hamiltonian("lattice4");
    auto plan = plan_lbcs(h);
    auto rec = simulate(plan, ghz(4), 4000, 77);
    auto whole = estimate(rec, plan, h);
    EstimateAccumulator a(plan, h), b(plan, h), c(plan, h);
    std::span<const ShotRecord> all(rec);
    a.add(all.subspan(0, 1000));
    b.add(all.subspan(1000, 2000));
    c.add(all.subspan(3000));
    c.merge(a);
    c.merge(b);
    auto merged = c.report();
    EXPECT_NEAR(merged.value, whole.value, 1e-12);
    EXPECT_EQ(merged.hits, whole.hits);

    std::vector<ShotRecord> expanded, packed;
    for (std::size_t k = 0; k < 50; ++k) {
        packed.push_back({rec[k].basis, rec[k].bits, 3});
        for (int r = 0; r < 3; ++r) expanded.push_back({rec[k].basis, rec[k].bits, 1});
    }
    auto e1 = estimate(expanded, plan, h);
    auto e2 = estimate(packed, plan, h);
    EXPECT_NEAR(e1.value, e2.value, 1e-12);
    EXPECT_EQ(e1.n_samples, e2.n_samples);
    EXPECT_EQ(e2.n_samples, 150u);
}

TEST(Accumulator, identity_offset_is_exact) {
    auto o = sum_of(2, {{2.5, "II"}, {1.0, "ZZ"}});
    auto plan = plan_l1(o);
    std::vector<ShotRecord> r{{P("ZZ"), 0b01, 1}};
    auto rep = estimate(r, plan, o);
    EXPECT_DOUBLE_EQ(rep.value, 2.5 - 1.0);
    EXPECT_DOUBLE_EQ(rep.term_values[0], 1.0);
}

TEST(Aggregator, median_of_means_agrees_with_mean) {
    auto h = builtin_hamiltonian("lattice4");
    auto plan = plan_uniform_cs(4);
    DensityMatrix g = ghz(4);
    auto rec = simulate(plan, g, 20000, 4242);
    double sigma = std::sqrt(variance_product_scheme(*plan.distribution, h, g).exact / double(rec.size()));
    double mean = estimate(rec, plan, h).value;
    EstimateOptions mom;
    mom.aggregator = Aggregator::MedianOfMeans;
    mom.mom_batches = 10;
    double med = estimate(rec, plan, h, mom).value;
    EXPECT_LE(std::abs(mean - med), 2 * sigma);
    EXPECT_LE(std::abs(mean - exact_expectation(g, h)), 4 * sigma);
    mom.mom_batches = 0;
    EXPECT_THROW(estimate(rec, plan, h, mom), InvalidArgument);
}

TEST(Variance, l1_examples) {
    DensityMatrix g = ghz(4);
    EXPECT_NEAR(variance_l1(sum_of(4, {{1.0, "ZZII"}}), g), 0.0, 1e-14);
    EXPECT_NEAR(variance_l1(sum_of(4, {{1.0, "ZIII"}}), g), 1.0, 1e-14);
    EXPECT_NEAR(variance_l1(sum_of(1, {{0.5, "Z"}, {0.5, "X"}}), maximally_mixed(1)), 1.0, 1e-14);
}

TEST(Variance, grouping_examples) {
    std::mt19937_64 rng(5);
    DensityMatrix rho = random_mixed_state(2, rng);
    auto single = sum_of(2, {{1.0, "XY"}});
    double e = exact_expectation(rho, single);
    EXPECT_NEAR(variance_grouping(plan_ldf(single).plan, single, rho), 1 - e * e, 1e-12);

    DensityMatrix g = ghz(4);
    auto o = sum_of(4, {{1.0, "ZZII"}, {1.0, "XIII"}});
    auto plan = plan_ldf(o).plan;
    ASSERT_EQ(plan.distribution->entries().size(), 2u);
    double v = variance_grouping(plan, o, g);
    EXPECT_NEAR(v, 2.0 * 1.0 + 2.0 * 1.0 - 1.0, 1e-12);
    expect_variance_matches(plan, o, g, v, 11);
    EXPECT_THROW(variance_grouping(plan_uniform_cs(4), o, g), InvalidArgument);
}

TEST(Variance, product_examples) {
    auto z = sum_of(1, {{1.0, "Z"}});
    auto pv = variance_product_scheme(*plan_uniform_cs(1).distribution, z, maximally_mixed(1));
    EXPECT_NEAR(pv.exact, 3.0, 1e-14);
    EXPECT_NEAR(pv.bound, 3.0, 1e-14);
    auto zzzz = sum_of(4, {{1.0, "ZZZZ"}});
    EXPECT_NEAR(variance_product_scheme(*plan_uniform_cs(4).distribution, zzzz, ghz(4)).bound, 81.0, 1e-12);
    EXPECT_THROW(variance_product_scheme(*plan_l1(z).distribution, z, maximally_mixed(1)), InvalidArgument);
}

TEST(Variance, monte_carlo_cross_checks) {
    std::mt19937_64 rng(6);
    DensityMatrix noisy = admix_white_noise(ghz(4), noise_for_fidelity(4, 0.95));
    auto h = builtin_hamiltonian("lattice4");
    expect_variance_matches(plan_l1(h), h, noisy, variance_l1(h, noisy), 21);
    auto ldf = plan_ldf(h).plan;
    expect_variance_matches(ldf, h, noisy, variance_grouping(ldf, h, noisy), 22);
    auto cs = plan_uniform_cs(4);
    expect_variance_matches(cs, h, noisy, variance_product_scheme(*cs.distribution, h, noisy).exact, 23);
    auto lbcs = plan_lbcs(h);
    expect_variance_matches(lbcs, h, noisy, variance_product_scheme(*lbcs.distribution, h, noisy).exact, 24);
    DensityMatrix r3 = random_mixed_state(3, rng);
    auto o3 = oracle::random_observable(3, 6, rng);
    auto cs3 = plan_uniform_cs(3);
    expect_variance_matches(cs3, o3, r3, variance_product_scheme(*cs3.distribution, o3, r3).exact, 25);
}

TEST(Variance, generic_reproduces_specialized_formulas) {
    std::mt19937_64 rng(8);
    DensityMatrix rho = random_mixed_state(2, rng);
    auto o = disjoint_groups_observable();

    auto single = sum_of(2, {{1.0, "YX"}});
    double e = exact_expectation(rho, single);
    EXPECT_NEAR(variance_generic(*plan_l1(single).distribution, single, rho), 1 - e * e, 1e-12);

    auto incompatible = sum_of(2, {{0.6, "ZZ"}, {-0.3, "XX"}, {0.1, "YX"}});
    auto l1 = plan_l1(incompatible);
    EXPECT_NEAR(variance_generic(*l1.distribution, incompatible, rho), variance_l1(incompatible, rho), 1e-10);

    auto ldf = plan_ldf(o).plan;
    for (const auto &entry : ldf.distribution->entries()) {
        for (std::size_t l = 0; l < o.size(); ++l) {
            bool member = std::find(entry.members.begin(), entry.members.end(), l) != entry.members.end();
            ASSERT_EQ(hits(entry.basis, o[l].pauli), member);
        }
    }
    EXPECT_NEAR(variance_generic(*ldf.distribution, o, rho), variance_grouping(ldf, o, rho), 1e-10);

    // A product law written out as an explicit list gives the product variance.
    auto lbcs = plan_lbcs(o);
    std::vector<ExplicitBasis> expanded;
    for (const auto &b : oracle::all_bases(2)) expanded.push_back({P(b), lbcs.distribution->probability(P(b)), {}});
    auto listed = BasisDistribution::explicit_list(2, expanded);
    EXPECT_NEAR(variance_generic(listed, o, rho), variance_product_scheme(*lbcs.distribution, o, rho).exact, 1e-10);
}

TEST(Variance, generic_monte_carlo_and_coverage) {
    DensityMatrix noisy = admix_white_noise(ghz(4), 0.1);
    auto h = builtin_hamiltonian("lattice4");
    auto ldf = plan_ldf(h).plan;
    double v = variance_generic(*ldf.distribution, h, noisy);
    PauliBasisSampler sampler(noisy);
    EstimateAccumulator acc(ldf, h, ExplicitKernel::Hits);
    std::mt19937_64 rng(31);
    const std::size_t shots = 100000;
    std::vector<double> x(shots);
    double mean = 0.0;
    for (auto &s : x) {
        PauliString b = draw_basis(ldf, rng);
        s = acc.shot_value(b, sampler.draw(b, rng));
        mean += s;
    }
    mean /= double(shots);
    double m2 = 0, m4 = 0;
    for (double s : x) {
        m2 += (s - mean) * (s - mean);
        m4 += std::pow(s - mean, 4);
    }
    m2 /= double(shots);
    m4 /= double(shots);
    EXPECT_LE(std::abs(m2 - v), 3 * std::sqrt((m4 - m2 * m2) / double(shots)));

    auto o = sum_of(2, {{1.0, "ZZ"}, {1.0, "XI"}});
    auto only_z = BasisDistribution::explicit_list(2, {{P("ZZ"), 1.0, {0}}});
    EXPECT_THROW(variance_generic(only_z, o, ghz(2)), CoverageError);
    try {
        variance_generic(only_z, o, ghz(2));
    } catch (const CoverageError &e) {
        EXPECT_NE(std::string(e.what()).find("XI"), std::string::npos);
    }
}

TEST(SampleSize, linear) {
    double raw = 2 * std::log(50.0) * std::log(20.0) * 3 / 0.01;
    EXPECT_NEAR(raw, 7031.6, 0.05);
    EXPECT_EQ(sample_size_linear(50, 0.05, 0.1, 3.0), std::size_t(std::ceil(raw)));
    EXPECT_EQ(sample_size_linear(50, 0.05, 0.1, 3.0), 7032u);
    EXPECT_EQ(sample_size_linear(50, 0.05, 1e9, 3.0), 1u);
    std::size_t one = sample_size_linear(50, 0.05, 0.1, 3.0);
    std::size_t two = sample_size_linear(50, 0.05, 0.1, 6.0);
    EXPECT_TRUE(two == 2 * one || two == 2 * one - 1);
    EXPECT_THROW(sample_size_linear(1, 0.05, 0.1, 3.0), InvalidArgument);
    EXPECT_THROW(sample_size_linear(5, 1.0, 0.1, 3.0), InvalidArgument);
    EXPECT_THROW(sample_size_linear(5, 0.1, 0.0, 3.0), InvalidArgument);
}

TEST(SampleSize, nonlinear) {
    // Swap of two copies of a 2-qubit system: Tr(S^2) = Tr(I) = 2^{2*2}.
    oracle::Mat swap = oracle::Mat::Zero(16, 16);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) swap(b * 4 + a, a * 4 + b) = 1.0;
    }
    double tr = (swap * swap).trace().real();
    EXPECT_DOUBLE_EQ(tr, 16.0);
    EXPECT_EQ(sample_size_nonlinear(2, 2, 0.1, 0.1, tr), std::size_t(std::ceil(16.0 * 16.0 / (0.1 * 0.01))));
    EXPECT_EQ(sample_size_nonlinear(2, 2, 0.1, 1e9, tr), 1u);
    double small = double(sample_size_nonlinear(2, 2, 0.5, 1.0, 1.0));
    double big = double(sample_size_nonlinear(4, 2, 0.5, 1.0, 1.0));
    EXPECT_DOUBLE_EQ(big / 2.0, std::pow(small / 2.0, 2));
    EXPECT_THROW(sample_size_nonlinear(0, 2, 0.1, 0.1, 1.0), InvalidArgument);
}
