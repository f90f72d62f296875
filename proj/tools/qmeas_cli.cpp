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

// Command-line front end. Exit codes: 0 success, 2 input error,
// 3 coverage or degenerate-observable error, 1 anything else.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qmeas/error.hpp"
#include "qmeas/experiments.hpp"
#include "qmeas/io.hpp"

namespace {

using namespace qmeas;

struct Options {
    std::string scheme;
    std::vector<std::string> schemes{"l1", "ldf", "cs", "lbcs", "derand"};
    std::string hamiltonian;
    std::string plan_path;
    std::string records_path;
    std::string observables_path;
    std::string out;
    std::string task = "observables";
    std::string strategy = "auto";
    std::string aggregator = "mean";
    std::string mode = "pauli";
    std::vector<std::size_t> ns{100};
    std::vector<std::string> masks;
    std::size_t nr = 0;
    std::size_t reps = 1;
    std::size_t pool = 50;
    std::size_t batches = 10;
    std::uint64_t seed = 1;
    std::uint64_t pool_seed = kDefaultPoolSeed;
    double fidelity = 1.0;
    double epsilon = kDefaultDerandEpsilon;
    int qubits = 4;
    int order = 3;
    int threads = 1;
    bool uniform_groups = false;
};

void emit(const Options &o, const std::string &text) {
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f) throw InvalidArgument("cannot write '" + o.out + "'");
    f << text;
}

HamiltonianFile require_hamiltonian(const Options &o) {
    if (o.hamiltonian.empty()) throw InvalidArgument("--hamiltonian is required");
    return load_hamiltonian(o.hamiltonian);
}

void apply_strategy(const std::string &text, ExperimentSpec &spec) {
    if (text == "auto") return;
    if (text == "full") {
        spec.force_full = true;
        return;
    }
    if (text.rfind("mc:", 0) == 0) {
        std::size_t used = 0;
        unsigned long long budget = 0;
        try {
            budget = std::stoull(text.substr(3), &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 3 || budget < 1) {
            throw InvalidArgument("bad --strategy '" + text + "' (expected full, auto or mc:<budget>)");
        }
        spec.mc_budget = budget;
        return;
    }
    throw InvalidArgument("bad --strategy '" + text + "' (expected full, auto or mc:<budget>)");
}

std::vector<SubsystemMask> masks_of(const Options &o, int n) {
    std::vector<SubsystemMask> out;
    for (const auto &m : o.masks) out.push_back(parse_mask(n, m));
    return out;
}

int cmd_plan(const Options &o) {
    HamiltonianFile h = require_hamiltonian(o);
    Scheme s = scheme_from_tag(o.scheme);
    MeasurementPlan plan = s == Scheme::LDF ? plan_ldf(h.op, o.uniform_groups).plan
                                            : build_plan(s, h.op, o.ns.front(), o.epsilon);
    std::ostringstream ss;
    write_plan(ss, plan);
    emit(o, ss.str());
    return 0;
}

MeasurementPlan plan_for(const Options &o, int &n) {
    if (!o.plan_path.empty()) {
        MeasurementPlan p = read_plan(o.plan_path);
        n = p.n;
        return p;
    }
    if (o.scheme.empty()) throw InvalidArgument("give --plan or --scheme with --hamiltonian");
    HamiltonianFile h = require_hamiltonian(o);
    n = h.op.num_qubits();
    Scheme s = scheme_from_tag(o.scheme);
    return s == Scheme::LDF ? plan_ldf(h.op, o.uniform_groups).plan : build_plan(s, h.op, o.ns.front(), o.epsilon);
}

int cmd_sample(const Options &o) {
    int n = 0;
    MeasurementPlan plan = plan_for(o, n);
    std::size_t ns = plan.randomized() ? o.ns.front() : plan.fixed_bases.size();
    ExperimentSpec spec;
    spec.n = n;
    spec.fidelity = o.fidelity;
    const DensityMatrix rho = prepared_state(spec);
    const PauliBasisSampler sampler(rho);
    std::mt19937_64 rng(o.seed);
    auto records = simulate_records(sampler, plan, ns, o.nr ? o.nr : 5, rng);
    std::ostringstream ss;
    write_records(ss, records);
    emit(o, ss.str());
    return 0;
}

int cmd_estimate(const Options &o) {
    if (o.plan_path.empty() || o.records_path.empty()) throw InvalidArgument("--plan and --records are required");
    MeasurementPlan plan = read_plan(o.plan_path);
    HamiltonianFile h = require_hamiltonian(o);
    auto records = read_records(o.records_path);
    EstimateReport rep;
    if (plan.randomized()) {
        EstimateOptions opts;
        if (o.aggregator == "mom") {
            opts.aggregator = Aggregator::MedianOfMeans;
            opts.mom_batches = o.batches;
        } else if (o.aggregator != "mean") {
            throw InvalidArgument("--aggregator must be mean or mom");
        }
        rep = estimate(records, plan, h.op, opts);
    } else {
        rep = estimate_derandomized(records, plan, h.op);
    }
    std::string text = fmt::format("value {}\nn_samples {}\neps0 {}\n", format_double(rep.value), rep.n_samples,
                                   format_double(rep.eps0));
    for (std::size_t l = 0; l < h.op.size(); ++l) {
        text += fmt::format("term {} {} hits {} mean {}\n", h.op[l].pauli.str(), format_double(h.op[l].coefficient),
                            rep.hits[l], format_double(rep.term_values[l]));
    }
    emit(o, text);
    return 0;
}

int cmd_shadows(const Options &o) {
    ExperimentSpec spec;
    spec.n = o.qubits;
    spec.fidelity = o.fidelity;
    const DensityMatrix rho = prepared_state(spec);
    const PauliBasisSampler sampler(rho);
    ShadowMode mode = ShadowMode::PauliBasis;
    if (o.mode == "clifford") {
        mode = ShadowMode::Clifford24;
    } else if (o.mode != "pauli") {
        throw InvalidArgument("--mode must be pauli or clifford");
    }
    ShadowSet s = collect_shadows(sampler, o.ns.front(), o.seed, mode);
    std::ostringstream ss;
    write_records(ss, records_from_shadows(s));
    emit(o, ss.str());
    return 0;
}

// purity, ptmoments and certify: either evaluate a record file or run a
// simulated grid of repetitions.
int cmd_entanglement(const Options &o, Task task) {
    ExperimentSpec spec;
    spec.task = task;
    spec.order = o.order;
    apply_strategy(o.strategy, spec);
    if (!o.records_path.empty()) {
        auto records = read_records(o.records_path);
        if (records.empty()) throw InvalidArgument("record file is empty");
        const int n = records.front().basis.num_qubits();
        ShadowSet shadows = shadows_from_records(n, records);
        auto masks = masks_of(o, n);
        if (masks.empty()) masks = task == Task::Purity ? proper_masks(n) : bipartitions(n);
        std::vector<EntanglementRow> rows;
        for (std::size_t m = 0; m < masks.size(); ++m) {
            EntanglementRow row{masks[m], shadows.size(), 0, {}, {}, {}, {}};
            if (task != Task::PtMoments) row.purity = purity_ustat(shadows, masks[m], o.threads);
            bool p2 = task == Task::Certify || o.order == 2;
            bool p3 = task == Task::Certify || (task == Task::PtMoments && o.order == 3);
            if (task == Task::PtMoments && o.order != 2 && o.order != 3) {
                throw InvalidArgument("--order must be 2 or 3");
            }
            if (p2 && task != Task::Purity) {
                row.p2 = pt_moment_ustat(shadows, masks[m], 2, TupleStrategy::full(), o.threads);
            }
            if (p3) {
                std::uint64_t mc_seed = mix_seed(o.seed, m + 1);
                TupleStrategy st = auto_strategy(shadows.size(), 3, mc_seed);
                if (spec.force_full) st = TupleStrategy::full();
                if (spec.mc_budget) st = TupleStrategy::monte_carlo(*spec.mc_budget, mc_seed);
                row.p3 = pt_moment_ustat(shadows, masks[m], 3, st, o.threads);
            }
            if (row.p2 && row.p3) row.margin = *row.p2 * *row.p2 - *row.p3;
            rows.push_back(row);
        }
        emit(o, to_csv(rows));
        return 0;
    }
    spec.n = o.qubits;
    spec.ns_grid = o.ns;
    spec.repetitions = o.reps;
    spec.seed = o.seed;
    spec.fidelity = o.fidelity;
    spec.masks = masks_of(o, o.qubits);
    spec.threads = o.threads;
    emit(o, to_csv(run_entanglement_experiment(spec)));
    return 0;
}

int cmd_bench(const Options &o) {
    ExperimentSpec spec;
    spec.task = task_from_name(o.task);
    spec.ns_grid = o.ns;
    spec.repetitions = o.reps;
    spec.seed = o.seed;
    spec.fidelity = o.fidelity;
    spec.threads = o.threads;
    spec.order = o.order;
    spec.derand_epsilon = o.epsilon;
    apply_strategy(o.strategy, spec);
    const bool entanglement = spec.task == Task::Purity || spec.task == Task::PtMoments || spec.task == Task::Certify;
    spec.nr = o.nr ? o.nr : (entanglement ? 1 : 5);
    for (const auto &s : o.schemes) spec.schemes.push_back(scheme_from_tag(s));
    if (spec.task == Task::Energy || spec.task == Task::Moment2) {
        spec.hamiltonian = require_hamiltonian(o).op;
        spec.n = spec.hamiltonian.num_qubits();
    } else if (spec.task == Task::Observables) {
        if (!o.observables_path.empty()) {
            std::ifstream in(o.observables_path);
            if (!in) throw InvalidArgument("cannot open '" + o.observables_path + "'");
            try {
                spec.observables = parse_observable_list(in);
            } catch (const ParseError &e) {
                throw ParseError(o.observables_path + ": " + e.what(), 0);
            }
            spec.n = spec.observables.front().num_qubits();
        } else {
            spec.n = o.qubits;
            spec.observables = observable_pool(spec.n, o.pool, o.pool_seed);
        }
    } else {
        spec.n = o.qubits;
        spec.masks = masks_of(o, spec.n);
    }
    emit(o, run_experiment_csv(spec));
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Randomized Pauli measurement planning, estimation and classical shadows"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App *c) {
        c->add_option("--out", o.out, "Output file (default stdout)");
        c->add_option("--seed", o.seed, "Master random seed");
        c->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1, 256));
    };
    auto add_state = [&](CLI::App *c) {
        c->add_option("--fidelity", o.fidelity, "Fidelity of the simulated state with GHZ")->check(CLI::Range(0.0, 1.0));
        c->add_option("--qubits", o.qubits, "Qubit count of the simulated GHZ state")->check(CLI::Range(1, 10));
    };

    auto *plan = app.add_subcommand("plan", "Build a measurement plan manifest");
    plan->add_option("--scheme", o.scheme, "l1, ldf, cs, lbcs or derand")->required();
    plan->add_option("--hamiltonian", o.hamiltonian, "Path or builtin:<name>")->required();
    plan->add_option("--ns", o.ns, "Budget for derandomized plans")->delimiter(',');
    plan->add_option("--epsilon", o.epsilon, "Derandomization accuracy parameter");
    plan->add_flag("--uniform-groups", o.uniform_groups, "Draw LDF groups uniformly");
    add_common(plan);

    auto *sample = app.add_subcommand("sample", "Simulate shot records under a plan");
    sample->add_option("--plan", o.plan_path, "Plan manifest");
    sample->add_option("--scheme", o.scheme, "Scheme, when no manifest is given");
    sample->add_option("--hamiltonian", o.hamiltonian, "Path or builtin:<name>");
    sample->add_option("--ns", o.ns, "Number of basis settings")->delimiter(',');
    sample->add_option("--nr", o.nr, "Shots per setting (default 5)");
    sample->add_option("--epsilon", o.epsilon, "Derandomization accuracy parameter");
    add_state(sample);
    add_common(sample);

    auto *est = app.add_subcommand("estimate", "Estimate an observable from shot records");
    est->add_option("--plan", o.plan_path, "Plan manifest")->required();
    est->add_option("--records", o.records_path, "Record file")->required();
    est->add_option("--hamiltonian", o.hamiltonian, "Path or builtin:<name>")->required();
    est->add_option("--aggregator", o.aggregator, "mean or mom");
    est->add_option("--batches", o.batches, "Median-of-means batch count");
    add_common(est);

    auto *shadows = app.add_subcommand("shadows", "Collect classical-shadow records");
    shadows->add_option("--ns", o.ns, "Number of snapshots")->delimiter(',');
    shadows->add_option("--mode", o.mode, "pauli or clifford");
    add_state(shadows);
    add_common(shadows);

    auto add_entanglement = [&](CLI::App *c) {
        c->add_option("--records", o.records_path, "Evaluate this record file instead of simulating");
        c->add_option("--ns", o.ns, "Snapshot counts (comma list)")->delimiter(',');
        c->add_option("--reps", o.reps, "Repetitions per N_s");
        c->add_option("--mask", o.masks, "Subsystem, e.g. 1,2 or 1100 (repeatable)");
        c->add_option("--strategy", o.strategy, "full, auto or mc:<budget> for order-3 sums");
        add_state(c);
        add_common(c);
    };
    auto *purity = app.add_subcommand("purity", "Subsystem purity from shadows");
    add_entanglement(purity);
    auto *pt = app.add_subcommand("ptmoments", "Partial-transpose moments from shadows");
    add_entanglement(pt);
    pt->add_option("--order", o.order, "2 or 3");
    auto *certify = app.add_subcommand("certify", "p3-PPT and purity entanglement certificates");
    add_entanglement(certify);

    auto *bench = app.add_subcommand("bench", "Run a simulated benchmark grid and write CSV");
    bench->add_option("--task", o.task, "observables, energy, moment2, purity, ptmoments or certify");
    bench->add_option("--scheme", o.schemes, "Schemes (comma list)")->delimiter(',');
    bench->add_option("--hamiltonian", o.hamiltonian, "Path or builtin:<name>");
    bench->add_option("--observables", o.observables_path, "File with one Pauli string per line");
    bench->add_option("--pool", o.pool, "Size of the seeded local-observable pool");
    bench->add_option("--pool-seed", o.pool_seed, "Seed of the observable pool");
    bench->add_option("--ns", o.ns, "N_s grid (comma list)")->delimiter(',');
    bench->add_option("--nr", o.nr, "Shots per setting");
    bench->add_option("--reps", o.reps, "Repetitions per grid point");
    bench->add_option("--mask", o.masks, "Subsystem (repeatable)");
    bench->add_option("--order", o.order, "PT moment order");
    bench->add_option("--strategy", o.strategy, "full, auto or mc:<budget>");
    bench->add_option("--epsilon", o.epsilon, "Derandomization accuracy parameter");
    add_state(bench);
    add_common(bench);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (o.ns.empty()) throw InvalidArgument("--ns needs at least one value");
        if (*plan) return cmd_plan(o);
        if (*sample) return cmd_sample(o);
        if (*est) return cmd_estimate(o);
        if (*shadows) return cmd_shadows(o);
        if (*purity) return cmd_entanglement(o, Task::Purity);
        if (*pt) return cmd_entanglement(o, Task::PtMoments);
        if (*certify) return cmd_entanglement(o, Task::Certify);
        if (*bench) return cmd_bench(o);
    } catch (const CoverageError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateObservable &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
