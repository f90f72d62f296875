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

#include "qmeas/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "qmeas/error.hpp"
#include "qmeas/io.hpp"
#include "qmeas/parallel.hpp"

namespace qmeas {

namespace {

void validate(const ExperimentSpec &spec) {
    if (spec.ns_grid.empty()) throw InvalidArgument("N_s grid is empty");
    for (auto ns : spec.ns_grid) {
        if (ns < 1) throw InvalidArgument("N_s values must be at least 1");
    }
    if (spec.repetitions < 1) throw InvalidArgument("repetition count must be at least 1");
    if (spec.nr < 1) throw InvalidArgument("shots per setting must be at least 1");
}

std::string fmt_opt(const std::optional<double> &v) {
    return v ? format_double(*v) : std::string();
}

// Plans for every (scheme, N_s) pair, built once up front.
std::map<std::pair<Scheme, std::size_t>, MeasurementPlan> build_plans(const ExperimentSpec &spec,
                                                                       const WeightedPauliSum &o) {
    std::map<std::pair<Scheme, std::size_t>, MeasurementPlan> plans;
    for (Scheme s : spec.schemes) {
        if (s == Scheme::Derandomized) {
            for (auto ns : spec.ns_grid) plans.emplace(std::pair{s, ns}, build_plan(s, o, ns, spec.derand_epsilon));
        } else {
            MeasurementPlan p = build_plan(s, o, 0);
            for (auto ns : spec.ns_grid) plans.emplace(std::pair{s, ns}, p);
        }
    }
    return plans;
}

}  // namespace

std::string_view task_name(Task t) {
    switch (t) {
        case Task::Observables:
            return "observables";
        case Task::Energy:
            return "energy";
        case Task::Moment2:
            return "moment2";
        case Task::Purity:
            return "purity";
        case Task::PtMoments:
            return "ptmoments";
        case Task::Certify:
            return "certify";
    }
    return "?";
}

Task task_from_name(std::string_view name) {
    for (Task t : {Task::Observables, Task::Energy, Task::Moment2, Task::Purity, Task::PtMoments, Task::Certify}) {
        if (task_name(t) == name) return t;
    }
    throw InvalidArgument("unknown task '" + std::string(name) + "'");
}

DensityMatrix prepared_state(const ExperimentSpec &spec) {
    double p = spec.noise ? *spec.noise : noise_for_fidelity(spec.n, spec.fidelity);
    return admix_white_noise(ghz(spec.n), p);
}

std::vector<ShotRecord> simulate_records(const PauliBasisSampler &sampler, const MeasurementPlan &plan,
                                         std::size_t ns, std::size_t nr, std::mt19937_64 &rng) {
    if (plan.n != sampler.num_qubits()) throw DimensionError("plan and state sizes differ");
    std::vector<ShotRecord> out;
    out.reserve(ns * nr);
    for (std::size_t j = 0; j < ns; ++j) {
        PauliString basis = plan.randomized() ? draw_basis(plan, rng) : fixed_basis(plan, j);
        for (std::size_t r = 0; r < nr; ++r) out.push_back({basis, sampler.draw(basis, rng), 1});
    }
    return out;
}

MeasurementPlan build_plan(Scheme scheme, const WeightedPauliSum &o, std::size_t ns, double derand_epsilon) {
    switch (scheme) {
        case Scheme::L1:
            return plan_l1(o);
        case Scheme::LDF:
            return plan_ldf(o).plan;
        case Scheme::UniformCS:
            return plan_uniform_cs(o.num_qubits());
        case Scheme::LBCS:
            return plan_lbcs(o);
        case Scheme::Derandomized:
            return plan_derandomized(o, ns, derand_epsilon);
    }
    throw InvalidArgument("unknown scheme");
}

EstimateReport estimate_any(std::span<const ShotRecord> records, const MeasurementPlan &plan,
                            const WeightedPauliSum &o) {
    return plan.randomized() ? estimate(records, plan, o) : estimate_derandomized(records, plan, o);
}

std::vector<ObservableRow> run_observables_experiment(const ExperimentSpec &spec) {
    validate(spec);
    if (spec.observables.empty()) throw InvalidArgument("observable list is empty");
    std::vector<PauliTerm> terms;
    for (const auto &p : spec.observables) {
        if (p.num_qubits() != spec.n) throw DimensionError("observable " + p.str() + " has the wrong length");
        terms.push_back({1.0, p});
    }
    const WeightedPauliSum o(spec.n, std::move(terms));
    const DensityMatrix rho = prepared_state(spec);
    const PauliBasisSampler sampler(rho);
    std::vector<double> exact;
    for (const auto &t : o.terms()) exact.push_back(exact_expectation(rho, t.pauli));
    const auto plans = build_plans(spec, o);

    const std::size_t grid = spec.ns_grid.size(), reps = spec.repetitions;
    std::vector<ObservableRow> rows(spec.schemes.size() * grid * reps);
    parallel_for(rows.size(), spec.threads, [&](std::size_t cell) {
        const std::size_t s = cell / (grid * reps), g = cell / reps % grid, r = cell % reps;
        const std::size_t ns = spec.ns_grid[g];
        const MeasurementPlan &plan = plans.at({spec.schemes[s], ns});
        std::mt19937_64 rng(mix_seed(spec.seed, cell));
        auto records = simulate_records(sampler, plan, ns, spec.nr, rng);
        EstimateReport rep = estimate_any(records, plan, o);
        double worst = 0.0, total = 0.0;
        for (std::size_t l = 0; l < o.size(); ++l) {
            double err = std::abs(rep.term_values[l] - exact[l]);
            worst = std::max(worst, err);
            total += err;
        }
        rows[cell] = {spec.schemes[s], ns, r, worst, total / double(o.size()), rep.eps0};
    });
    return rows;
}

std::vector<EnergyRow> run_energy_experiment(const ExperimentSpec &spec, int power) {
    validate(spec);
    if (power != 1 && power != 2) throw InvalidArgument("power must be 1 or 2");
    if (spec.hamiltonian.num_qubits() != spec.n) throw DimensionError("Hamiltonian size differs from the state");
    const WeightedPauliSum o = power == 2 ? square(spec.hamiltonian) : spec.hamiltonian;
    const DensityMatrix rho = prepared_state(spec);
    const PauliBasisSampler sampler(rho);
    const double exact = exact_expectation(rho, o);
    const auto plans = build_plans(spec, o);

    const std::size_t grid = spec.ns_grid.size(), reps = spec.repetitions;
    std::vector<EnergyRow> rows(spec.schemes.size() * grid * reps);
    parallel_for(rows.size(), spec.threads, [&](std::size_t cell) {
        const std::size_t s = cell / (grid * reps), g = cell / reps % grid, r = cell % reps;
        const std::size_t ns = spec.ns_grid[g];
        const MeasurementPlan &plan = plans.at({spec.schemes[s], ns});
        std::mt19937_64 rng(mix_seed(spec.seed, cell));
        auto records = simulate_records(sampler, plan, ns, spec.nr, rng);
        EstimateReport rep = estimate_any(records, plan, o);
        rows[cell] = {spec.schemes[s], ns, r, rep.value, exact, std::abs(rep.value - exact), rep.eps0};
    });
    return rows;
}

std::vector<EntanglementRow> run_entanglement_experiment(const ExperimentSpec &spec) {
    validate(spec);
    if (spec.task != Task::Purity && spec.task != Task::PtMoments && spec.task != Task::Certify) {
        throw InvalidArgument("not an entanglement task");
    }
    if (spec.task == Task::PtMoments && spec.order != 2 && spec.order != 3) {
        throw InvalidArgument("PT moment order must be 2 or 3");
    }
    std::vector<SubsystemMask> masks = spec.masks;
    if (masks.empty()) masks = spec.task == Task::Purity ? proper_masks(spec.n) : bipartitions(spec.n);
    for (const auto &m : masks) {
        if (m.num_qubits() != spec.n) throw DimensionError("mask " + m.str() + " has the wrong size");
    }
    const bool want_purity = spec.task != Task::PtMoments;
    const bool want_p2 = spec.task == Task::Certify || (spec.task == Task::PtMoments && spec.order == 2);
    const bool want_p3 = spec.task == Task::Certify || (spec.task == Task::PtMoments && spec.order == 3);

    const DensityMatrix rho = prepared_state(spec);
    const PauliBasisSampler sampler(rho);
    const std::size_t grid = spec.ns_grid.size(), reps = spec.repetitions;
    const std::size_t cells = grid * reps;
    const int outer = cells >= std::size_t(spec.threads) ? spec.threads : 1;
    const int inner = outer == 1 ? spec.threads : 1;
    std::vector<EntanglementRow> rows(cells * masks.size());
    parallel_for(cells, outer, [&](std::size_t cell) {
        const std::size_t g = cell / reps, r = cell % reps;
        const std::size_t ns = spec.ns_grid[g];
        const std::uint64_t cell_seed = mix_seed(spec.seed, cell);
        ShadowSet shadows = collect_shadows(sampler, ns, cell_seed);
        for (std::size_t m = 0; m < masks.size(); ++m) {
            EntanglementRow row{masks[m], ns, r, {}, {}, {}, {}};
            if (want_purity) row.purity = purity_ustat(shadows, masks[m], inner);
            if (want_p2) row.p2 = pt_moment_ustat(shadows, masks[m], 2, TupleStrategy::full(), inner);
            if (want_p3) {
                std::uint64_t mc_seed = mix_seed(cell_seed, m + 1);
                TupleStrategy st = auto_strategy(ns, 3, mc_seed);
                if (spec.force_full) st = TupleStrategy::full();
                if (spec.mc_budget) st = TupleStrategy::monte_carlo(*spec.mc_budget, mc_seed);
                row.p3 = pt_moment_ustat(shadows, masks[m], 3, st, inner);
            }
            if (row.p2 && row.p3) row.margin = *row.p2 * *row.p2 - *row.p3;
            rows[cell * masks.size() + m] = row;
        }
    });
    return rows;
}

std::string to_csv(const std::vector<ObservableRow> &rows) {
    std::string out = "scheme,N_s,repetition,max_abs_error,mean_abs_error,eps0\n";
    for (const auto &r : rows) {
        out += fmt::format("{},{},{},{},{},{}\n", scheme_tag(r.scheme), r.ns, r.repetition,
                           format_double(r.max_abs_error), format_double(r.mean_abs_error), format_double(r.eps0));
    }
    return out;
}

std::string to_csv(const std::vector<EnergyRow> &rows) {
    std::string out = "scheme,N_s,repetition,estimate,exact,abs_error,eps0\n";
    for (const auto &r : rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", scheme_tag(r.scheme), r.ns, r.repetition, format_double(r.estimate),
                           format_double(r.exact), format_double(r.abs_error), format_double(r.eps0));
    }
    return out;
}

std::string to_csv(const std::vector<EntanglementRow> &rows) {
    std::string out = "mask,N_s,repetition,purity,p2,p3,margin\n";
    for (const auto &r : rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.mask.str(), r.ns, r.repetition, fmt_opt(r.purity), fmt_opt(r.p2),
                           fmt_opt(r.p3), fmt_opt(r.margin));
    }
    return out;
}

std::string run_experiment_csv(const ExperimentSpec &spec) {
    switch (spec.task) {
        case Task::Observables:
            return to_csv(run_observables_experiment(spec));
        case Task::Energy:
            return to_csv(run_energy_experiment(spec, 1));
        case Task::Moment2:
            return to_csv(run_energy_experiment(spec, 2));
        default:
            return to_csv(run_entanglement_experiment(spec));
    }
}

}  // namespace qmeas
