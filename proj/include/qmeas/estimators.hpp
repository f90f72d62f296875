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

#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "qmeas/parallel.hpp"
#include "qmeas/pauli.hpp"
#include "qmeas/schemes.hpp"
#include "qmeas/state.hpp"

namespace qmeas {

/// One measurement event. Bit i of `bits` is the outcome on site i
/// (0 means eigenvalue +1). A record with reps = r stands for r identical shots.
struct ShotRecord {
    PauliString basis;
    std::uint32_t bits = 0;
    std::uint32_t reps = 1;

    friend bool operator==(const ShotRecord &, const ShotRecord &) = default;
};

/// Product of outcome signs over the sites in `support`.
inline int parity_sign(std::uint32_t bits, std::uint32_t support) {
    return (std::popcount(bits & support) & 1) ? -1 : 1;
}

struct EstimateReport {
    double value = 0.0;
    /// Unit shots consumed (sum of reps).
    std::size_t n_samples = 0;
    /// Per term of the observable: unit shots whose basis measured it.
    std::vector<std::size_t> hits;
    /// Total |alpha_l| over non-identity terms with no hits.
    double eps0 = 0.0;
    /// Per-term estimate of Tr(rho O_l), without the coefficient; 1 for the identity.
    std::vector<double> term_values;
};

enum class Aggregator { Mean, MedianOfMeans };

/// Kernel choice for explicit distributions: Membership gives each basis
/// credit only for the terms it was planned for; Hits gives it credit for
/// every term it hits, weighted by the total probability of hitting bases.
enum class ExplicitKernel { Membership, Hits };

struct EstimateOptions {
    Aggregator aggregator = Aggregator::Mean;
    std::size_t mom_batches = 10;
    ExplicitKernel kernel = ExplicitKernel::Membership;
};

/// Per-shot kernel evaluation, foldable over disjoint record ranges.
class EstimateAccumulator {
   public:
    EstimateAccumulator(const MeasurementPlan &plan, const WeightedPauliSum &o,
                        ExplicitKernel kernel = ExplicitKernel::Membership);

    void add(const ShotRecord &r);
    void add(std::span<const ShotRecord> records);
    /// Combines a partial fold over a different record range.
    void merge(const EstimateAccumulator &other);
    EstimateReport report() const;

    /// Single-shot value of the estimator, including the identity offset.
    double shot_value(const PauliString &basis, std::uint32_t bits) const;

   private:
    void kernel_values(const PauliString &basis, std::vector<double> &f) const;

    const MeasurementPlan *plan_;
    const WeightedPauliSum *o_;
    ExplicitKernel kernel_;
    std::vector<double> hit_norm_;
    std::size_t shots_ = 0;
    std::vector<NeumaierSum> sums_;
    std::vector<std::size_t> hits_;
    mutable std::vector<double> scratch_;
};

/// Mean (or median of batch means) of the unified single-shot estimator.
EstimateReport estimate(std::span<const ShotRecord> records, const MeasurementPlan &plan,
                        const WeightedPauliSum &o, const EstimateOptions &options = {});

/// Per-term averages of signed outcomes over the shots that hit each term.
/// Records must follow plan.fixed_bases in order; a basis may span several
/// consecutive records.
EstimateReport estimate_derandomized(std::span<const ShotRecord> records, const MeasurementPlan &plan,
                                     const WeightedPauliSum &o);

/// Tr(rho O_a O_b), real part.
double pair_expectation(const DensityMatrix &rho, const PauliString &a, const PauliString &b);

/// Variances below refer to the non-identity part of the observable, since
/// the identity coefficient enters every estimate as an exact constant.

/// ||alpha||_1^2 - Tr(rho O)^2.
double variance_l1(const WeightedPauliSum &o, const DensityMatrix &rho);
/// Single-shot variance of a grouping (or any membership-kernel explicit) plan.
double variance_grouping(const MeasurementPlan &plan, const WeightedPauliSum &o, const DensityMatrix &rho);

struct ProductVariance {
    double exact = 0.0;
    /// 3^{max weight} ||alpha||_1^2.
    double bound = 0.0;
};
ProductVariance variance_product_scheme(const BasisDistribution &dist, const WeightedPauliSum &o,
                                        const DensityMatrix &rho);

/// Variance of the hits kernel over an explicit basis list.
double variance_generic(const BasisDistribution &dist, const WeightedPauliSum &o, const DensityMatrix &rho);

/// ceil(2 ln(L) ln(1/delta) max_var / epsilon^2), at least 1.
std::size_t sample_size_linear(std::size_t num_observables, double delta, double epsilon, double max_var);
/// ceil(2^{order |AB|} Tr(O^2) / (delta epsilon^2)), at least 1.
std::size_t sample_size_nonlinear(int subsys_size, int order, double delta, double epsilon, double trace_o_sq);

}  // namespace qmeas
