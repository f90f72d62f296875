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

// Exact dense density-matrix simulation for small registers. Everything here
// doubles as the reference oracle the estimators are checked against.
//
// Basis convention: bit i of a computational-basis index is qubit i, which is
// site i (0-based) of a PauliString.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qmeas/pauli.hpp"

namespace qmeas {

using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr int kMaxDenseQubits = 10;

/// Validated n-qubit density matrix: Hermitian, unit trace, PSD.
class DensityMatrix {
   public:
    static constexpr double kHermitianTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kEigenTol = 1e-8;

    /// Checks the invariants; throws InvalidArgument on violation.
    DensityMatrix(int n, ComplexMatrix entries);

    int num_qubits() const noexcept {
        return n_;
    }
    std::size_t dim() const noexcept {
        return std::size_t(1) << n_;
    }
    const ComplexMatrix &matrix() const noexcept {
        return rho_;
    }

   private:
    int n_;
    ComplexMatrix rho_;
};

/// Subset of qubits, stored as a bit mask over sites.
class SubsystemMask {
   public:
    SubsystemMask() = default;
    SubsystemMask(int n, std::uint32_t bits);
    /// From 1-based qubit labels, e.g. {1, 2}.
    static SubsystemMask from_labels(int n, std::span<const int> labels);
    static SubsystemMask all(int n);

    int num_qubits() const noexcept {
        return n_;
    }
    std::uint32_t bits() const noexcept {
        return bits_;
    }
    int size() const noexcept;
    bool empty() const noexcept {
        return bits_ == 0;
    }
    bool contains(int site) const noexcept {
        return (bits_ >> site) & 1u;
    }
    SubsystemMask complement() const;
    /// One character per site, '1' for members, e.g. "1100".
    std::string str() const;

   private:
    int n_ = 0;
    std::uint32_t bits_ = 0;
};

/// Dense 2^n x 2^n matrix of a Pauli string (oracle helper).
ComplexMatrix dense(const PauliString &p);
ComplexMatrix dense(const WeightedPauliSum &o);

DensityMatrix ghz(int n);
DensityMatrix maximally_mixed(int n);
/// Projector onto a computational basis state (bit i = qubit i).
DensityMatrix basis_state(int n, std::uint64_t index);
/// Normalized A A^dagger with complex standard-normal A.
DensityMatrix random_mixed_state(int n, std::mt19937_64 &rng);

/// (1-p) rho + p I / 2^n.
DensityMatrix admix_white_noise(const DensityMatrix &rho, double p);
/// White-noise strength giving fidelity F with a pure target on n qubits.
double noise_for_fidelity(int n, double fidelity);
/// <psi|rho|psi> for the GHZ target.
double ghz_fidelity(const DensityMatrix &rho);

/// Tr(rho O), imaginary residue dropped.
double exact_expectation(const DensityMatrix &rho, const PauliString &p);
double exact_expectation(const DensityMatrix &rho, const WeightedPauliSum &o);

/// Born distribution over the 2^n outcomes of measuring a full-weight basis.
/// Outcome bit i = 0 means eigenvalue +1 on site i.
std::vector<double> born_probabilities(const DensityMatrix &rho, const PauliString &basis);

/// I.i.d. Born draws, encoded as bit masks (bit i = outcome on site i).
std::vector<std::uint32_t> sample_outcomes(const DensityMatrix &rho, const PauliString &basis,
                                           std::size_t shots, std::uint64_t seed);

ComplexMatrix partial_transpose(const DensityMatrix &rho, const SubsystemMask &a);
double exact_pt_moment(const DensityMatrix &rho, const SubsystemMask &a, int order);
double exact_subsystem_purity(const DensityMatrix &rho, const SubsystemMask &a);
/// Reduced state on the qubits of `a` (bit j = j-th member of a).
ComplexMatrix reduced_state(const DensityMatrix &rho, const SubsystemMask &a);

/// Tr[ cyc_A(forward) cyc_B(backward) rho^{(x)order} ] with the copy
/// permutations built explicitly as basis-state maps.
double permutation_moment_oracle(const DensityMatrix &rho, const SubsystemMask &a, int order);

/// Cached Born tables for the 3^n Pauli bases of one state.
///
/// Each table is filled once on first use under std::call_once, so one
/// sampler may be shared across threads.
class PauliBasisSampler {
   public:
    explicit PauliBasisSampler(const DensityMatrix &rho);

    int num_qubits() const noexcept {
        return n_;
    }
    /// Cumulative outcome distribution for a full-weight basis.
    std::span<const double> cumulative(const PauliString &basis) const;
    std::uint32_t draw(const PauliString &basis, std::mt19937_64 &rng) const;

   private:
    std::size_t index_of(const PauliString &basis) const;
    const std::vector<double> &table(const PauliString &basis) const;

    int n_;
    DensityMatrix rho_;
    mutable std::vector<std::vector<double>> cdf_;
    std::unique_ptr<std::once_flag[]> once_;
};

/// Uniform double in [0, 1) from 53 random bits; identical on every platform.
inline double uniform01(std::mt19937_64 &rng) {
    return double(rng() >> 11) * 0x1.0p-53;
}

/// Standard splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qmeas
