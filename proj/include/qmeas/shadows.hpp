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

// Local-Pauli classical shadows and the nonlinear estimators built on them.

#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qmeas/estimators.hpp"
#include "qmeas/pauli.hpp"
#include "qmeas/state.hpp"

namespace qmeas {

/// Single-qubit snapshot factor (I + 3 s W) / 2 with s = (-1)^bit.
Eigen::Matrix2cd snapshot_factor(Letter w, int bit);

/// Classical snapshot of one full-weight measurement.
class Snapshot {
   public:
    Snapshot(PauliString basis, std::uint32_t bits);

    int num_qubits() const noexcept {
        return basis_.num_qubits();
    }
    const PauliString &basis() const noexcept {
        return basis_;
    }
    std::uint32_t bits() const noexcept {
        return bits_;
    }
    int bit(int site) const noexcept {
        return (bits_ >> site) & 1u;
    }
    Eigen::Matrix2cd factor(int site) const;
    std::vector<Eigen::Matrix2cd> factors() const;
    /// Compact per-site code 2 * (letter - 1) + bit, in [0, 6).
    int code(int site) const noexcept {
        return 2 * (static_cast<int>(basis_[site]) - 1) + bit(site);
    }

   private:
    PauliString basis_;
    std::uint32_t bits_;
};

struct ShadowSet {
    int n = 0;
    std::vector<Snapshot> snapshots;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept {
        return snapshots.size();
    }
};

/// How the random local unitaries are drawn. Both modes induce the same
/// snapshot distribution.
enum class ShadowMode { PauliBasis, Clifford24 };

/// The single-qubit Clifford group modulo phase, generated from H and S.
const std::vector<Eigen::Matrix2cd> &single_qubit_cliffords();

/// Measures `ns` random local bases on the sampler's state.
ShadowSet collect_shadows(const PauliBasisSampler &sampler, std::size_t ns, std::uint64_t seed,
                          ShadowMode mode = ShadowMode::PauliBasis);

ShadowSet shadows_from_records(int n, std::span<const ShotRecord> records);
std::vector<ShotRecord> records_from_shadows(const ShadowSet &shadows);

/// Mean of the tensor-expanded snapshots (not projected to PSD).
ComplexMatrix reconstruct_mean(const ShadowSet &shadows);

/// Mean of Tr(rho_hat O) over snapshots, evaluated factor by factor.
double estimate_observable_from_shadows(const ShadowSet &shadows, const WeightedPauliSum &o);

/// U-statistic over ordered distinct pairs of prod_{i in A} Tr(F_i F'_i).
double purity_ustat(const ShadowSet &shadows, const SubsystemMask &a, int threads = 1);

struct TupleStrategy {
    enum class Kind { Full, MonteCarlo };
    Kind kind = Kind::Full;
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;

    static TupleStrategy full() {
        return {};
    }
    static TupleStrategy monte_carlo(std::uint64_t budget, std::uint64_t seed) {
        return {Kind::MonteCarlo, budget, seed};
    }
};

inline constexpr std::size_t kFullTupleLimitOrder3 = 400;
inline constexpr std::uint64_t kAutoMonteCarloBudget = 10'000'000;

/// Full sums for order 2, and for order 3 up to 400 snapshots; Monte Carlo
/// with a budget of 10^7 tuples beyond that.
TupleStrategy auto_strategy(std::size_t ns, int order, std::uint64_t seed);

/// U-statistic for Tr[(rho^{T_A})^order], order 2 or 3.
double pt_moment_ustat(const ShadowSet &shadows, const SubsystemMask &a, int order,
                       const TupleStrategy &strategy = TupleStrategy::full(), int threads = 1);

struct PptCertificate {
    double p2 = 0.0;
    double p3 = 0.0;
    double margin = 0.0;
    bool entangled = false;
};
PptCertificate p3_ppt_certificate(const ShadowSet &shadows, const SubsystemMask &a,
                                  const TupleStrategy &strategy = TupleStrategy::full(), int threads = 1);

struct PurityCertificate {
    double purity_a = 0.0;
    double purity_full = 0.0;
    bool flag = false;
};
PurityCertificate purity_certificate(const ShadowSet &shadows, const SubsystemMask &a, int threads = 1);

}  // namespace qmeas
