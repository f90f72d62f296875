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

#include "qmeas/io.hpp"

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "oracle.hpp"
#include "qmeas/error.hpp"
#include "qmeas/experiments.hpp"

using namespace qmeas;
namespace fs = std::filesystem;

namespace {

PauliString P(const char *s) {
    return PauliString::parse(s);
}

HamiltonianFile parse_text(const std::string &text) {
    std::istringstream in(text);
    return parse_hamiltonian(in);
}

std::size_t parse_error_line(const std::string &text, bool records) {
    std::istringstream in(text);
    try {
        if (records) {
            parse_records(in);
        } else {
            parse_hamiltonian(in);
        }
    } catch (const ParseError &e) {
        return e.line();
    }
    return 0;
}

void expect_same_plan(const MeasurementPlan &a, const MeasurementPlan &b) {
    EXPECT_EQ(a.scheme, b.scheme);
    EXPECT_EQ(a.n, b.n);
    EXPECT_EQ(a.fixed_bases, b.fixed_bases);
    EXPECT_EQ(a.unhit_terms, b.unhit_terms);
    EXPECT_EQ(a.converged, b.converged);
    ASSERT_EQ(a.distribution.has_value(), b.distribution.has_value());
    if (!a.distribution) return;
    const auto &da = *a.distribution, &db = *b.distribution;
    ASSERT_EQ(da.kind(), db.kind());
    EXPECT_EQ(da.triples(), db.triples());
    ASSERT_EQ(da.entries().size(), db.entries().size());
    for (std::size_t k = 0; k < da.entries().size(); ++k) {
        EXPECT_EQ(da.entries()[k].basis, db.entries()[k].basis);
        EXPECT_EQ(da.entries()[k].prob, db.entries()[k].prob);
        EXPECT_EQ(da.entries()[k].members, db.entries()[k].members);
    }
}

fs::path scratch_dir() {
    fs::path dir = fs::temp_directory_path() / ("qmeas_io_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path &path, const std::string &text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

std::string read_file(const fs::path &path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int run_cli(const std::string &args) {
    std::string cmd = std::string(QMEAS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(HamiltonianFile, parse_write_round_trip) {
    HamiltonianFile h = parse_text("# a comment\nname demo\nn 3\n0.5 XZI\n-0.125 IIY  # trailing\n\n1e-3 ZZZ\n");
    EXPECT_EQ(h.name, "demo");
    ASSERT_EQ(h.op.size(), 3u);
    EXPECT_EQ(h.op[1].pauli.str(), "IIY");
    EXPECT_EQ(h.op[1].coefficient, -0.125);

    std::ostringstream out;
    write_hamiltonian(out, h);
    HamiltonianFile back = parse_text(out.str());
    EXPECT_EQ(back.name, h.name);
    ASSERT_EQ(back.op.size(), h.op.size());
    for (std::size_t l = 0; l < h.op.size(); ++l) {
        EXPECT_EQ(back.op[l].pauli, h.op[l].pauli);
        EXPECT_EQ(back.op[l].coefficient, h.op[l].coefficient);
    }

    std::mt19937_64 rng(3);
    for (int k = 0; k < 20; ++k) {
        std::normal_distribution<double> g;
        WeightedPauliSum o(5);
        for (int t = 0; t < 8; ++t) o.accumulate(PauliString::parse(oracle::random_pauli_text(5, rng)), g(rng) / 7.0);
        if (o.size() == 0) continue;
        std::ostringstream s;
        write_hamiltonian(s, {"r", o});
        HamiltonianFile r = parse_text(s.str());
        ASSERT_EQ(r.op.size(), o.size());
        for (std::size_t l = 0; l < o.size(); ++l) EXPECT_EQ(r.op[l].coefficient, o[l].coefficient);
    }
}

TEST(HamiltonianFile, errors_carry_line_numbers) {
    EXPECT_EQ(parse_error_line("n 2\n0.5 XX\n0.25 XX\n", false), 3u);
    EXPECT_EQ(parse_error_line("n 2\n0.5 XXX\n", false), 2u);
    EXPECT_EQ(parse_error_line("0.5 XX\n", false), 1u);
    EXPECT_EQ(parse_error_line("n 2\n# c\nabc XX\n", false), 3u);
    EXPECT_EQ(parse_error_line("n 2\n0.5 XQ\n", false), 2u);
    EXPECT_EQ(parse_error_line("n 2\n0 XZ\n", false), 2u);
    EXPECT_THROW(parse_text("# nothing\n"), ParseError);
    EXPECT_THROW(read_hamiltonian("/nonexistent/qmeas.txt"), Error);
}

TEST(Records, round_trip_ten_thousand) {
    std::mt19937_64 rng(17);
    std::vector<ShotRecord> recs;
    for (int k = 0; k < 10000; ++k) {
        std::string text;
        for (int i = 0; i < 6; ++i) text += "XYZ"[rng() % 3];
        recs.push_back({PauliString::parse(text), std::uint32_t(rng() % 64), std::uint32_t(1 + rng() % 9)});
    }
    std::ostringstream out;
    write_records(out, recs);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_records(in), recs);
}

TEST(Records, examples_and_errors) {
    std::istringstream in("XZYX 0110 5\nZZZZ 1000\n");
    auto recs = parse_records(in);
    ASSERT_EQ(recs.size(), 2u);
    EXPECT_EQ(recs[0].basis.str(), "XZYX");
    EXPECT_EQ(recs[0].bits, 0b0110u);
    EXPECT_EQ(recs[0].reps, 5u);
    EXPECT_EQ(recs[1].reps, 1u);
    EXPECT_EQ(recs[1].bits, 0b0001u);

    EXPECT_EQ(parse_error_line("XZYX 0110 5\nZZZZ 0000\nXZY 010 5\n", true), 3u);
    EXPECT_EQ(parse_error_line("XZYX 011 5\n", true), 1u);
    EXPECT_EQ(parse_error_line("XZYX 0110 0\n", true), 1u);
    EXPECT_EQ(parse_error_line("XZIX 0110\n", true), 1u);
    EXPECT_EQ(parse_error_line("XZYX 0120\n", true), 1u);
    EXPECT_EQ(parse_error_line("XZYX\n", true), 1u);
}

TEST(PlanManifest, round_trip_every_scheme) {
    const WeightedPauliSum h = builtin_hamiltonian("lattice4");
    std::vector<MeasurementPlan> plans = {plan_l1(h), plan_ldf(h).plan, plan_ldf(h, true).plan, plan_uniform_cs(4),
                                          plan_lbcs(h), plan_lbcs(h, 1), plan_derandomized(h, 30)};
    WeightedPauliSum sparse(4, {{1.0, P("XIII")}, {1.0, P("ZIII")}});
    plans.push_back(plan_derandomized(sparse, 1));
    ASSERT_FALSE(plans.back().unhit_terms.empty());
    for (const auto &plan : plans) {
        std::ostringstream out;
        write_plan(out, plan);
        std::istringstream in(out.str());
        expect_same_plan(parse_plan(in), plan);
    }
    std::istringstream bad("scheme l1\nn 2\nbasis XX 0.5 0\n");
    EXPECT_THROW(parse_plan(bad), Error);
}

TEST(Builtins, term_counts_and_norms) {
    WeightedPauliSum lattice = builtin_hamiltonian("lattice4");
    EXPECT_EQ(lattice.size(), 20u);
    EXPECT_NEAR(lattice.l1_norm(), 5.0, 1e-15);
    std::set<PauliString> distinct;
    for (const auto &t : lattice.terms()) distinct.insert(t.pauli);
    EXPECT_EQ(distinct.size(), 20u);

    WeightedPauliSum cluster = builtin_hamiltonian("cluster4");
    EXPECT_EQ(cluster.size(), 12u);
    EXPECT_NEAR(cluster.l1_norm(), 3.0, 1e-15);

    BuiltinParams zero{0.0, 0.0, 0.0, 0.0};
    WeightedPauliSum empty = builtin_hamiltonian("lattice4", zero);
    EXPECT_EQ(empty.size(), 0u);
    EXPECT_THROW(plan_l1(empty), DegenerateObservable);
    EXPECT_THROW(builtin_hamiltonian("ladder9"), InvalidArgument);
    EXPECT_EQ(load_hamiltonian("builtin:cluster4").op.size(), 12u);
}

TEST(Builtins, lattice_matches_kronecker_construction) {
    // Written out independently: bonds (i, i+1 mod 4) and single-site fields.
    std::vector<std::pair<double, std::string>> terms;
    const char *pairs[4][2] = {{"Z", "Z"}, {"X", "Y"}, {"Y", "Z"}, {"X", "Z"}};
    for (int i = 0; i < 4; ++i) {
        for (auto &pr : pairs) {
            std::string s = "IIII";
            s[i] = pr[0][0];
            s[(i + 1) % 4] = pr[1][0];
            terms.push_back({0.25, s});
        }
        std::string f = "IIII";
        f[i] = 'X';
        terms.push_back({0.25, f});
    }
    oracle::Mat want = oracle::Mat::Zero(16, 16);
    for (const auto &[c, s] : terms) want += c * oracle::pauli_dense(s);
    oracle::Mat got = dense(builtin_hamiltonian("lattice4"));
    EXPECT_LE((want - got).cwiseAbs().maxCoeff(), 1e-12);

    oracle::Mat cluster = oracle::Mat::Zero(16, 16);
    for (int j = 0; j < 4; ++j) {
        std::string zxz = "IIII", x = "IIII", yy = "IIII";
        zxz[j] = 'Z';
        zxz[(j + 1) % 4] = 'X';
        zxz[(j + 2) % 4] = 'Z';
        x[j] = 'X';
        yy[j] = 'Y';
        yy[(j + 1) % 4] = 'Y';
        cluster += 0.25 * (oracle::pauli_dense(zxz) + oracle::pauli_dense(x) + oracle::pauli_dense(yy));
    }
    EXPECT_LE((cluster - dense(builtin_hamiltonian("cluster4"))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Builtins, hydrogen_files_share_ground_energy) {
    for (const char *name : {"h2_jw", "h2_parity", "h2_bk"}) {
        HamiltonianFile h = read_hamiltonian(std::string(QMEAS_DATA_DIR) + "/hydrogen/" + name + ".txt");
        EXPECT_EQ(h.name, name);
        EXPECT_EQ(h.op.num_qubits(), 4);
        Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::observable_dense(h.op));
        EXPECT_NEAR(es.eigenvalues().minCoeff(), -1.137270174625, 1e-9) << name;
    }
}

TEST(ObservablePool, distinct_local_and_seeded) {
    auto pool = observable_pool(4, 50);
    ASSERT_EQ(pool.size(), 50u);
    std::set<PauliString> seen(pool.begin(), pool.end());
    EXPECT_EQ(seen.size(), 50u);
    for (const auto &p : pool) {
        EXPECT_GE(p.weight(), 1);
        EXPECT_LE(p.weight(), 2);
    }
    EXPECT_EQ(observable_pool(4, 50), pool);
    EXPECT_NE(observable_pool(4, 50, 7), pool);
    EXPECT_EQ(local_paulis(4, 2).size(), 12u + 54u);
    EXPECT_THROW(observable_pool(4, 67), InvalidArgument);

    std::istringstream in("# pool\nXXII\nIZIY # c\n");
    auto list = parse_observable_list(in);
    ASSERT_EQ(list.size(), 2u);
    EXPECT_EQ(list[1].str(), "IZIY");
}

TEST(Masks, parse_and_enumerate) {
    EXPECT_EQ(parse_mask(4, "1,2").bits(), 0b0011u);
    EXPECT_EQ(parse_mask(4, "1100").bits(), 0b0011u);
    EXPECT_EQ(parse_mask(4, "0101").bits(), 0b1010u);
    EXPECT_EQ(parse_mask(4, "4").bits(), 0b1000u);
    EXPECT_THROW(parse_mask(4, "5"), Error);
    EXPECT_THROW(parse_mask(4, "0"), Error);
    EXPECT_THROW(parse_mask(4, "110"), Error);

    auto proper = proper_masks(4);
    ASSERT_EQ(proper.size(), 14u);
    for (std::size_t k = 0; k < proper.size(); ++k) EXPECT_EQ(proper[k].bits(), k + 1);

    auto bip = bipartitions(4);
    ASSERT_EQ(bip.size(), 7u);
    std::set<std::uint32_t> seen;
    for (const auto &m : bip) {
        EXPECT_TRUE(seen.insert(std::min(m.bits(), m.complement().bits())).second);
    }
    EXPECT_EQ(bipartitions(2).size(), 1u);
}

TEST(Experiments, single_setting_leaves_terms_uncovered) {
    ExperimentSpec spec;
    spec.schemes = {Scheme::L1, Scheme::LDF, Scheme::UniformCS, Scheme::LBCS, Scheme::Derandomized};
    spec.ns_grid = {1};
    spec.repetitions = 3;
    spec.observables = observable_pool(4, 50);
    auto rows = run_observables_experiment(spec);
    ASSERT_EQ(rows.size(), 15u);
    for (const auto &r : rows) EXPECT_GT(r.eps0, 0.0) << scheme_tag(r.scheme);
}

TEST(Experiments, doubling_budget_mostly_reduces_max_error) {
    // The per-repetition improvement probability is about 0.8, so it is
    // measured as a frequency over many repetitions.
    constexpr std::size_t reps = 300;
    ExperimentSpec spec;
    spec.schemes = {Scheme::L1, Scheme::UniformCS, Scheme::Derandomized};
    spec.ns_grid = {200, 400};
    spec.repetitions = reps;
    spec.seed = 4;
    spec.observables = observable_pool(4, 50);
    auto rows = run_observables_experiment(spec);
    for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
        std::size_t good = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const auto &lo = rows[s * 2 * reps + r], &hi = rows[s * 2 * reps + reps + r];
            ASSERT_EQ(lo.ns, 200u);
            ASSERT_EQ(hi.ns, 400u);
            ASSERT_EQ(lo.repetition, hi.repetition);
            good += hi.max_abs_error <= lo.max_abs_error;
        }
        EXPECT_GE(double(good) / reps, 0.7) << scheme_tag(spec.schemes[s]);
    }
}

TEST(Experiments, energy_reference_is_exact) {
    ExperimentSpec spec;
    spec.schemes = {Scheme::L1, Scheme::Derandomized};
    spec.ns_grid = {50};
    spec.repetitions = 2;
    spec.hamiltonian = builtin_hamiltonian("lattice4");
    const DensityMatrix rho = ghz(4);
    for (int power : {1, 2}) {
        oracle::Mat h = oracle::observable_dense(spec.hamiltonian);
        if (power == 2) h = h * h;
        double want = oracle::expectation(rho, h);
        for (const auto &r : run_energy_experiment(spec, power)) {
            EXPECT_NEAR(r.exact, want, 1e-12);
            EXPECT_NEAR(r.abs_error, std::abs(r.estimate - r.exact), 1e-15);
        }
    }
    EXPECT_THROW(run_energy_experiment(spec, 3), InvalidArgument);
    spec.ns_grid.clear();
    EXPECT_THROW(run_energy_experiment(spec, 1), InvalidArgument);
}

TEST(Experiments, csv_independent_of_thread_count) {
    for (Task task : {Task::Observables, Task::Moment2, Task::Certify}) {
        ExperimentSpec spec;
        spec.task = task;
        spec.schemes = {Scheme::LDF, Scheme::Derandomized};
        spec.ns_grid = {40, 80};
        spec.repetitions = 3;
        spec.seed = 9;
        spec.fidelity = 0.9;
        spec.nr = task == Task::Certify ? 1 : 5;
        spec.observables = observable_pool(4, 10);
        spec.hamiltonian = builtin_hamiltonian("cluster4");
        std::string one = run_experiment_csv(spec);
        spec.threads = 4;
        EXPECT_EQ(run_experiment_csv(spec), one) << task_name(task);
        EXPECT_EQ(run_experiment_csv(spec), one) << task_name(task);
    }
}

TEST(Experiments, entanglement_ghz_examples) {
    ExperimentSpec spec;
    spec.task = Task::Purity;
    spec.ns_grid = {1000};
    spec.repetitions = 9;
    spec.seed = 21;
    auto rows = run_entanglement_experiment(spec);
    ASSERT_EQ(rows.size(), 14u * 9u);
    for (std::size_t m = 0; m < 14; ++m) {
        std::vector<double> v;
        for (std::size_t r = 0; r < 9; ++r) v.push_back(*rows[r * 14 + m].purity);
        std::nth_element(v.begin(), v.begin() + 4, v.end());
        EXPECT_GE(v[4], 0.35) << rows[m].mask.str();
        EXPECT_LE(v[4], 0.65) << rows[m].mask.str();
    }

    spec.task = Task::Certify;
    spec.repetitions = 10;
    spec.mc_budget = 1000000;
    auto cert = run_entanglement_experiment(spec);
    ASSERT_EQ(cert.size(), 7u * 10u);
    for (std::size_t m = 0; m < 7; ++m) {
        int positive = 0;
        for (std::size_t r = 0; r < 10; ++r) {
            const auto &row = cert[r * 7 + m];
            ASSERT_TRUE(row.margin && row.p2 && row.p3 && row.purity);
            EXPECT_NEAR(*row.margin, *row.p2 * *row.p2 - *row.p3, 1e-12);
            positive += *row.margin > 0.0;
        }
        EXPECT_GE(positive, 9) << cert[m].mask.str();
    }
}

TEST(Cli, exit_codes) {
    fs::path dir = scratch_dir();
    write_file(dir / "h.txt", "n 2\n0.5 ZZ\n0.5 XX\n");
    write_file(dir / "bad.txt", "n 2\n0.5 ZZ\n0.5 ZZ\n");
    write_file(dir / "ident.txt", "n 2\n1.0 II\n");
    const std::string d = dir.string();

    EXPECT_EQ(run_cli("plan --scheme ldf --hamiltonian " + d + "/h.txt --out " + d + "/p.txt"), 0);
    EXPECT_EQ(run_cli("sample --plan " + d + "/p.txt --ns 50 --seed 3 --out " + d + "/r.txt"), 0);
    EXPECT_EQ(run_cli("estimate --plan " + d + "/p.txt --records " + d + "/r.txt --hamiltonian " + d +
                      "/h.txt --out " + d + "/e.txt"),
              0);
    EXPECT_NE(read_file(dir / "e.txt").find("value "), std::string::npos);

    EXPECT_EQ(run_cli("plan --scheme ldf --hamiltonian " + d + "/bad.txt"), 2);
    EXPECT_EQ(run_cli("plan --scheme nope --hamiltonian " + d + "/h.txt"), 2);
    EXPECT_EQ(run_cli("plan --scheme ldf --hamiltonian " + d + "/missing.txt"), 2);
    EXPECT_EQ(run_cli("plan --no-such-flag"), 2);
    EXPECT_EQ(run_cli("purity --ns 20 --mask 9"), 2);

    EXPECT_EQ(run_cli("plan --scheme l1 --hamiltonian " + d + "/ident.txt"), 3);
    EXPECT_EQ(run_cli("plan --scheme derand --hamiltonian " + d + "/ident.txt"), 3);
    fs::remove_all(dir);
}

TEST(Cli, bench_output_is_deterministic) {
    fs::path dir = scratch_dir();
    const std::string d = dir.string();
    const std::string base = "bench --task observables --scheme ldf,derand --ns 30,60 --reps 3 --pool 20 --seed 5";
    ASSERT_EQ(run_cli(base + " --threads 1 --out " + d + "/a.csv"), 0);
    ASSERT_EQ(run_cli(base + " --threads 1 --out " + d + "/b.csv"), 0);
    ASSERT_EQ(run_cli(base + " --threads 3 --out " + d + "/c.csv"), 0);
    std::string a = read_file(dir / "a.csv");
    EXPECT_EQ(a.rfind("scheme,N_s,repetition,max_abs_error,mean_abs_error,eps0\n", 0), 0u);
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 2 * 2 * 3);
    EXPECT_EQ(read_file(dir / "b.csv"), a);
    EXPECT_EQ(read_file(dir / "c.csv"), a);
    fs::remove_all(dir);
}
