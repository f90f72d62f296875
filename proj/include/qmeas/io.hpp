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

// Text formats.
//
// Hamiltonian file:
//     # comment
//     name lattice4          (optional)
//     n 4
//     0.25 ZZII
//
// Record file, one shot record per line:
//     XZYX 0110 5            (bit i is character i; reps defaults to 1)
//
// Plan manifest:
//     scheme ldf
//     n 4
//     basis ZZZZ 0.5 0,1     (explicit list; members are term indices)
//     qubit 0 0.2 0.3 0.5    (product; X Y Z probabilities)
//     fixed XXZZ             (derandomized, in order)
//     unhit 3,4              (optional)
//     converged 0            (optional)

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qmeas/estimators.hpp"
#include "qmeas/schemes.hpp"
#include "qmeas/state.hpp"

namespace qmeas {

struct HamiltonianFile {
    std::string name;
    WeightedPauliSum op;
};

HamiltonianFile parse_hamiltonian(std::istream &in);
HamiltonianFile read_hamiltonian(const std::string &path);
void write_hamiltonian(std::ostream &out, const HamiltonianFile &h);

struct BuiltinParams {
    double j = 0.25;
    double h = 0.25;
    double h1 = 0.25;
    double h2 = 0.25;
};

/// lattice4: J sum_i (Z_i Z_{i+1} + X_i Y_{i+1} + Y_i Z_{i+1} + X_i Z_{i+1}) + h sum_i X_i.
/// cluster4: J sum_j Z_j X_{j+1} Z_{j+2} + h1 sum_j X_j + h2 sum_j Y_j Y_{j+1}.
/// Both on 4 qubits with periodic boundaries; zero-coefficient terms are dropped.
WeightedPauliSum builtin_hamiltonian(std::string_view name, const BuiltinParams &params = {});

/// "builtin:<name>" or a path to a Hamiltonian file.
HamiltonianFile load_hamiltonian(const std::string &spec, const BuiltinParams &params = {});

std::string format_bits(std::uint32_t bits, int n);
std::uint32_t parse_bits(std::string_view text);

/// Reads records; every line must share one qubit count.
std::vector<ShotRecord> parse_records(std::istream &in);
std::vector<ShotRecord> read_records(const std::string &path);
void write_records(std::ostream &out, const std::vector<ShotRecord> &records);

MeasurementPlan parse_plan(std::istream &in);
MeasurementPlan read_plan(const std::string &path);
void write_plan(std::ostream &out, const MeasurementPlan &plan);

/// Every non-identity Pauli string on n qubits acting on at most `max_locality`
/// sites, in a fixed canonical order.
std::vector<PauliString> local_paulis(int n, int max_locality);

inline constexpr std::uint64_t kDefaultPoolSeed = 20210917;

/// `count` distinct strings drawn without replacement from local_paulis.
std::vector<PauliString> observable_pool(int n, std::size_t count, std::uint64_t seed = kDefaultPoolSeed,
                                         int max_locality = 2);

/// One Pauli string per line; '#' comments allowed.
std::vector<PauliString> parse_observable_list(std::istream &in);

/// "1,2" (1-based labels) or a bitstring such as "1100".
SubsystemMask parse_mask(int n, std::string_view text);
/// All 2^n - 2 nonempty proper subsets, by increasing bit value.
std::vector<SubsystemMask> proper_masks(int n);
/// One representative per unordered bipartition {A, B}.
std::vector<SubsystemMask> bipartitions(int n);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace qmeas
