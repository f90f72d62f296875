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

// Measurement schemes: which Pauli bases to measure and with what law.
//
// Identity terms of an observable carry no information to measure; every
// planner skips them and the estimators add their coefficient back exactly.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qmeas/pauli.hpp"

namespace qmeas {

enum class Scheme { L1, LDF, UniformCS, LBCS, Derandomized };

/// Short tags used on the command line and in manifests: l1, ldf, cs, lbcs, derand.
std::string_view scheme_tag(Scheme s);
Scheme scheme_from_tag(std::string_view tag);

/// One basis of an explicit distribution. `members` lists the indices (into
/// the planning observable's term list) that this basis is responsible for.
struct ExplicitBasis {
    PauliString basis;
    double prob = 0.0;
    std::vector<std::size_t> members;
};

/// Per-qubit probabilities in X, Y, Z order.
using LetterTriple = std::array<double, 3>;

class BasisDistribution {
   public:
    enum class Kind { Explicit, Product };

    /// Validates positive probabilities summing to 1 and full-weight bases.
    static BasisDistribution explicit_list(int n, std::vector<ExplicitBasis> entries);
    /// Validates each triple is nonnegative and sums to 1.
    static BasisDistribution product(std::vector<LetterTriple> triples);

    Kind kind() const noexcept {
        return kind_;
    }
    int num_qubits() const noexcept {
        return n_;
    }
    const std::vector<ExplicitBasis> &entries() const noexcept {
        return entries_;
    }
    const std::vector<LetterTriple> &triples() const noexcept {
        return triples_;
    }

    /// K(P); zero for bases outside the support.
    double probability(const PauliString &basis) const;
    /// Position of `basis` in the explicit list, if present.
    std::optional<std::size_t> find(const PauliString &basis) const;
    PauliString draw(std::mt19937_64 &rng) const;

   private:
    Kind kind_ = Kind::Product;
    int n_ = 0;
    std::vector<ExplicitBasis> entries_;
    std::vector<double> cumulative_;
    std::unordered_map<PauliString, std::size_t> index_;
    std::vector<LetterTriple> triples_;
};

struct MeasurementPlan {
    Scheme scheme = Scheme::UniformCS;
    int n = 0;
    /// Absent for derandomized plans.
    std::optional<BasisDistribution> distribution;
    /// Derandomized plans only, in measurement order.
    std::vector<PauliString> fixed_bases;
    /// Terms no fixed basis hits (derandomized only).
    std::vector<std::size_t> unhit_terms;
    /// False when the LBCS optimizer ran out of sweeps.
    bool converged = true;

    /// True for the four schemes that draw bases at random.
    bool randomized() const noexcept {
        return scheme != Scheme::Derandomized;
    }
};

struct GroupingReport {
    std::size_t group_count = 0;
    std::vector<double> weights;
    std::vector<PauliString> bases;
};

MeasurementPlan plan_l1(const WeightedPauliSum &o);

struct LdfResult {
    MeasurementPlan plan;
    GroupingReport report;
};
/// Largest-degree-first grouping. With `uniform_weights` every group is drawn
/// with probability 1/G instead of proportionally to its weight.
LdfResult plan_ldf(const WeightedPauliSum &o, bool uniform_weights = false);

MeasurementPlan plan_uniform_cs(int n);

/// sum_l alpha_l^2 prod_{i in supp} 1/K_i(O_{l,i}); identity terms skipped.
double lbcs_cost(const WeightedPauliSum &o, const std::vector<LetterTriple> &triples);

inline constexpr double kLbcsFloor = 1e-6;

/// Locally biased product distribution. When `cost_trace` is given it
/// receives the surrogate cost at the start and after every sweep.
MeasurementPlan plan_lbcs(const WeightedPauliSum &o, int max_sweeps = 200, double tol = 1e-10,
                          std::vector<double> *cost_trace = nullptr);

inline constexpr double kDefaultDerandEpsilon = 0.9;

/// Greedy derandomized bases. When `log_cost_trace` is given it receives
/// log F before the first choice and after each letter choice.
MeasurementPlan plan_derandomized(const WeightedPauliSum &o, std::size_t ns,
                                  double epsilon = kDefaultDerandEpsilon,
                                  std::vector<double> *log_cost_trace = nullptr);

/// One basis from a randomized plan.
PauliString draw_basis(const MeasurementPlan &plan, std::mt19937_64 &rng);
/// `count` i.i.d. bases drawn with a generator seeded by `seed`.
std::vector<PauliString> draw_bases(const MeasurementPlan &plan, std::size_t count, std::uint64_t seed);
/// fixed_bases[index] of a derandomized plan.
const PauliString &fixed_basis(const MeasurementPlan &plan, std::size_t index);

}  // namespace qmeas
