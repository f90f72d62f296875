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

// Simulated benchmark runs on a noisy GHZ state.
//
// Every run is a grid of independent cells (scheme x N_s x repetition). Each
// cell draws from its own generator seeded by mix_seed(seed, cell index), so
// the rows do not depend on how cells are spread over threads.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmeas/schemes.hpp"
#include "qmeas/shadows.hpp"
#include "qmeas/state.hpp"

namespace qmeas {

enum class Task { Observables, Energy, Moment2, Purity, PtMoments, Certify };

std::string_view task_name(Task t);
Task task_from_name(std::string_view name);

struct ExperimentSpec {
    Task task = Task::Observables;
    int n = 4;
    std::vector<Scheme> schemes;
    std::vector<std::size_t> ns_grid;
    /// Shots per basis setting.
    std::size_t nr = 5;
    std::size_t repetitions = 20;
    std::uint64_t seed = 1;
    /// Fidelity of the prepared state with GHZ_n; ignored if `noise` is set.
    double fidelity = 1.0;
    std::optional<double> noise;
    /// Observables task.
    std::vector<PauliString> observables;
    /// Energy and moment tasks.
    WeightedPauliSum hamiltonian;
    /// Entanglement tasks; empty means every nonempty proper subset.
    std::vector<SubsystemMask> masks;
    /// PT-moment order for Task::PtMoments (2 or 3).
    int order = 3;
    /// Tuple strategy for order 3; unset picks one from N_s.
    std::optional<std::uint64_t> mc_budget;
    bool force_full = false;
    double derand_epsilon = kDefaultDerandEpsilon;
    int threads = 1;
};

/// White-noise-admixed GHZ state described by the spec.
DensityMatrix prepared_state(const ExperimentSpec &spec);

/// One record per shot: N_s bases (drawn or fixed), each measured `nr` times.
std::vector<ShotRecord> simulate_records(const PauliBasisSampler &sampler, const MeasurementPlan &plan,
                                         std::size_t ns, std::size_t nr, std::mt19937_64 &rng);

/// Builds the plan a scheme uses for an observable (N_s matters only for derandomized).
MeasurementPlan build_plan(Scheme scheme, const WeightedPauliSum &o, std::size_t ns,
                           double derand_epsilon = kDefaultDerandEpsilon);

/// Estimate from records under any plan kind.
EstimateReport estimate_any(std::span<const ShotRecord> records, const MeasurementPlan &plan,
                            const WeightedPauliSum &o);

struct ObservableRow {
    Scheme scheme;
    std::size_t ns;
    std::size_t repetition;
    double max_abs_error;
    double mean_abs_error;
    double eps0;
};
std::vector<ObservableRow> run_observables_experiment(const ExperimentSpec &spec);

struct EnergyRow {
    Scheme scheme;
    std::size_t ns;
    std::size_t repetition;
    double estimate;
    double exact;
    double abs_error;
    double eps0;
};
/// power 1 estimates <H>, power 2 estimates <H^2> via the collected square.
std::vector<EnergyRow> run_energy_experiment(const ExperimentSpec &spec, int power);

struct EntanglementRow {
    SubsystemMask mask;
    std::size_t ns;
    std::size_t repetition;
    std::optional<double> purity;
    std::optional<double> p2;
    std::optional<double> p3;
    std::optional<double> margin;
};
/// Task::Purity fills purity; Task::PtMoments fills p2 or p3 by spec.order;
/// Task::Certify fills all columns.
std::vector<EntanglementRow> run_entanglement_experiment(const ExperimentSpec &spec);

/// Runs the spec's task and renders CSV with a header row.
std::string run_experiment_csv(const ExperimentSpec &spec);

std::string to_csv(const std::vector<ObservableRow> &rows);
std::string to_csv(const std::vector<EnergyRow> &rows);
std::string to_csv(const std::vector<EntanglementRow> &rows);

}  // namespace qmeas
