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

#include "qmeas/schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "qmeas/error.hpp"
#include "qmeas/state.hpp"

namespace qmeas {

namespace {

constexpr double kProbTol = 1e-10;

std::vector<std::size_t> measured_terms(const WeightedPauliSum &o) {
    auto idx = o.non_identity_indices();
    if (idx.empty()) {
        throw DegenerateObservable("observable has no non-identity term to measure");
    }
    return idx;
}

int letter_slot(Letter l) {
    return static_cast<int>(l) - 1;
}

}  // namespace

std::string_view scheme_tag(Scheme s) {
    switch (s) {
        case Scheme::L1:
            return "l1";
        case Scheme::LDF:
            return "ldf";
        case Scheme::UniformCS:
            return "cs";
        case Scheme::LBCS:
            return "lbcs";
        case Scheme::Derandomized:
            return "derand";
    }
    return "?";
}

Scheme scheme_from_tag(std::string_view tag) {
    for (Scheme s : {Scheme::L1, Scheme::LDF, Scheme::UniformCS, Scheme::LBCS, Scheme::Derandomized}) {
        if (scheme_tag(s) == tag) return s;
    }
    throw InvalidArgument("unknown scheme '" + std::string(tag) + "' (expected l1, ldf, cs, lbcs or derand)");
}

BasisDistribution BasisDistribution::explicit_list(int n, std::vector<ExplicitBasis> entries) {
    if (entries.empty()) throw InvalidArgument("explicit distribution needs at least one basis");
    BasisDistribution d;
    d.kind_ = Kind::Explicit;
    d.n_ = n;
    double total = 0.0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto &e = entries[k];
        if (e.basis.num_qubits() != n) throw DimensionError("basis " + e.basis.str() + " has wrong length");
        if (!e.basis.is_full_weight()) {
            throw InvalidArgument("measurement basis " + e.basis.str() + " contains an identity letter");
        }
        if (!(e.prob > 0.0) || !std::isfinite(e.prob)) {
            throw InvalidArgument("basis probability must be positive");
        }
        if (!d.index_.emplace(e.basis, k).second) {
            throw InvalidArgument("duplicate basis " + e.basis.str() + " in explicit distribution");
        }
        total += e.prob;
        d.cumulative_.push_back(total);
    }
    if (std::abs(total - 1.0) > kProbTol) throw InvalidArgument("basis probabilities do not sum to 1");
    d.entries_ = std::move(entries);
    return d;
}

BasisDistribution BasisDistribution::product(std::vector<LetterTriple> triples) {
    if (triples.empty() || static_cast<int>(triples.size()) > kMaxQubits) {
        throw InvalidArgument("product distribution qubit count out of range");
    }
    for (const auto &t : triples) {
        for (double p : t) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("negative letter probability");
        }
        if (std::abs(t[0] + t[1] + t[2] - 1.0) > kProbTol) {
            throw InvalidArgument("letter probabilities do not sum to 1");
        }
    }
    BasisDistribution d;
    d.kind_ = Kind::Product;
    d.n_ = static_cast<int>(triples.size());
    d.triples_ = std::move(triples);
    return d;
}

double BasisDistribution::probability(const PauliString &basis) const {
    if (basis.num_qubits() != n_) throw DimensionError("basis length does not match distribution");
    if (kind_ == Kind::Explicit) {
        auto it = index_.find(basis);
        return it == index_.end() ? 0.0 : entries_[it->second].prob;
    }
    if (!basis.is_full_weight()) return 0.0;
    double p = 1.0;
    for (int i = 0; i < n_; ++i) p *= triples_[i][letter_slot(basis[i])];
    return p;
}

std::optional<std::size_t> BasisDistribution::find(const PauliString &basis) const {
    auto it = index_.find(basis);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

PauliString BasisDistribution::draw(std::mt19937_64 &rng) const {
    if (kind_ == Kind::Explicit) {
        double u = uniform01(rng) * cumulative_.back();
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), entries_.size() - 1);
        return entries_[k].basis;
    }
    PauliString p(n_);
    for (int i = 0; i < n_; ++i) {
        double u = uniform01(rng);
        const auto &t = triples_[i];
        Letter l = u < t[0] ? Letter::X : (u < t[0] + t[1] ? Letter::Y : Letter::Z);
        p.set(i, l);
    }
    return p;
}

MeasurementPlan plan_l1(const WeightedPauliSum &o) {
    const int n = o.num_qubits();
    auto idx = measured_terms(o);
    double norm = 0.0;
    for (auto l : idx) norm += std::abs(o[l].coefficient);

    // Heavier strings have fewer free sites, so they claim their completion first.
    std::vector<std::size_t> order = idx;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return o[a].pauli.weight() > o[b].pauli.weight(); });

    static constexpr Letter kFill[3] = {Letter::Z, Letter::X, Letter::Y};
    struct Slot {
        PauliString basis;
        double prob;
        std::vector<std::size_t> members;
    };
    std::vector<Slot> slots;
    std::unordered_map<PauliString, std::size_t> used;
    for (auto l : order) {
        const PauliString &q = o[l].pauli;
        std::vector<int> free_sites;
        for (int i = 0; i < n; ++i) {
            if (q[i] == Letter::I) free_sites.push_back(i);
        }
        double total_fills = std::pow(3.0, double(free_sites.size()));
        PauliString first = q;
        for (int i : free_sites) first.set(i, Letter::Z);
        std::optional<PauliString> chosen;
        // Fill counters in base 3; the last free site varies fastest.
        for (std::uint64_t t = 0; double(t) < total_fills; ++t) {
            PauliString b = q;
            std::uint64_t rest = t;
            for (auto it = free_sites.rbegin(); it != free_sites.rend(); ++it) {
                b.set(*it, kFill[rest % 3]);
                rest /= 3;
            }
            if (!used.count(b)) {
                chosen = b;
                break;
            }
        }
        double prob = std::abs(o[l].coefficient) / norm;
        if (chosen) {
            used.emplace(*chosen, slots.size());
            slots.push_back({*chosen, prob, {l}});
        } else {
            auto &s = slots[used.at(first)];
            s.prob += prob;
            s.members.push_back(l);
        }
    }
    std::sort(slots.begin(), slots.end(), [](const Slot &a, const Slot &b) {
        return *std::min_element(a.members.begin(), a.members.end()) <
               *std::min_element(b.members.begin(), b.members.end());
    });
    std::vector<ExplicitBasis> entries;
    double total = 0.0;
    for (auto &s : slots) total += s.prob;
    for (auto &s : slots) {
        std::sort(s.members.begin(), s.members.end());
        entries.push_back({s.basis, s.prob / total, std::move(s.members)});
    }
    MeasurementPlan plan;
    plan.scheme = Scheme::L1;
    plan.n = n;
    plan.distribution = BasisDistribution::explicit_list(n, std::move(entries));
    return plan;
}

LdfResult plan_ldf(const WeightedPauliSum &o, bool uniform_weights) {
    const int n = o.num_qubits();
    auto idx = measured_terms(o);
    const std::size_t m = idx.size();

    std::vector<std::vector<bool>> conflict(m, std::vector<bool>(m, false));
    std::vector<std::size_t> degree(m, 0);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            if (!compatible(o[idx[a]].pauli, o[idx[b]].pauli)) {
                conflict[a][b] = conflict[b][a] = true;
                ++degree[a];
                ++degree[b];
            }
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });

    std::vector<std::vector<std::size_t>> classes;
    for (auto v : order) {
        std::size_t c = 0;
        for (; c < classes.size(); ++c) {
            bool clash = std::any_of(classes[c].begin(), classes[c].end(), [&](std::size_t u) { return conflict[u][v]; });
            if (!clash) break;
        }
        if (c == classes.size()) classes.emplace_back();
        classes[c].push_back(v);
    }

    // Sitewise union of member letters.
    std::vector<PauliString> bases;
    for (auto &cls : classes) {
        std::sort(cls.begin(), cls.end());
        PauliString b(n);
        for (auto v : cls) {
            const PauliString &q = o[idx[v]].pauli;
            for (int i = 0; i < n; ++i) {
                if (q[i] != Letter::I) b.set(i, q[i]);
            }
        }
        bases.push_back(b);
    }
    // Free sites take the letter that lets the basis hit the most terms of later groups.
    static constexpr Letter kCandidates[3] = {Letter::Z, Letter::X, Letter::Y};
    for (std::size_t g = 0; g < classes.size(); ++g) {
        PauliString &b = bases[g];
        for (int i = 0; i < n; ++i) {
            if (b[i] != Letter::I) continue;
            Letter best = Letter::Z;
            std::size_t best_score = 0;
            for (Letter w : kCandidates) {
                std::size_t score = 0;
                for (std::size_t h = g + 1; h < classes.size(); ++h) {
                    for (auto v : classes[h]) {
                        const PauliString &q = o[idx[v]].pauli;
                        if (q[i] == w && compatible(q, b)) ++score;
                    }
                }
                if (score > best_score) {
                    best = w;
                    best_score = score;
                }
            }
            b.set(i, best);
        }
    }

    double norm = 0.0;
    for (auto l : idx) norm += std::abs(o[l].coefficient);
    LdfResult out;
    std::vector<ExplicitBasis> entries;
    for (std::size_t g = 0; g < classes.size(); ++g) {
        double w = 0.0;
        std::vector<std::size_t> members;
        for (auto v : classes[g]) {
            w += std::abs(o[idx[v]].coefficient);
            members.push_back(idx[v]);
        }
        out.report.weights.push_back(w);
        out.report.bases.push_back(bases[g]);
        double prob = uniform_weights ? 1.0 / double(classes.size()) : w / norm;
        entries.push_back({bases[g], prob, std::move(members)});
    }
    out.report.group_count = classes.size();
    out.plan.scheme = Scheme::LDF;
    out.plan.n = n;
    out.plan.distribution = BasisDistribution::explicit_list(n, std::move(entries));
    return out;
}

MeasurementPlan plan_uniform_cs(int n) {
    if (n < 1 || n > kMaxQubits) throw InvalidArgument("qubit count out of range");
    MeasurementPlan plan;
    plan.scheme = Scheme::UniformCS;
    plan.n = n;
    plan.distribution = BasisDistribution::product(std::vector<LetterTriple>(n, {1.0 / 3, 1.0 / 3, 1.0 / 3}));
    return plan;
}

double lbcs_cost(const WeightedPauliSum &o, const std::vector<LetterTriple> &triples) {
    if (static_cast<int>(triples.size()) != o.num_qubits()) throw DimensionError("triple count != qubit count");
    double c = 0.0;
    for (const auto &t : o.terms()) {
        if (t.pauli.is_identity()) continue;
        double v = t.coefficient * t.coefficient;
        for (int i = 0; i < o.num_qubits(); ++i) {
            Letter l = t.pauli[i];
            if (l != Letter::I) v /= triples[i][letter_slot(l)];
        }
        c += v;
    }
    return c;
}

namespace {

// argmin sum_W c_W / q_W on the simplex with q_W >= floor.
LetterTriple water_fill(const std::array<double, 3> &c, double floor) {
    std::array<bool, 3> active{};
    int n_active = 0;
    for (int w = 0; w < 3; ++w) {
        active[w] = c[w] > 0.0;
        n_active += active[w];
    }
    LetterTriple q{floor, floor, floor};
    if (n_active == 0) return {1.0 / 3, 1.0 / 3, 1.0 / 3};
    for (;;) {
        double budget = 1.0 - floor * (3 - n_active);
        double s = 0.0;
        for (int w = 0; w < 3; ++w) {
            if (active[w]) s += std::sqrt(c[w]);
        }
        bool changed = false;
        for (int w = 0; w < 3; ++w) {
            if (!active[w]) {
                q[w] = floor;
                continue;
            }
            q[w] = budget * std::sqrt(c[w]) / s;
        }
        for (int w = 0; w < 3; ++w) {
            if (active[w] && q[w] < floor) {
                active[w] = false;
                --n_active;
                changed = true;
            }
        }
        if (!changed) break;
    }
    for (int w = 0; w < 3; ++w) {
        if (!active[w]) q[w] = floor;
    }
    return q;
}

}  // namespace

MeasurementPlan plan_lbcs(const WeightedPauliSum &o, int max_sweeps, double tol, std::vector<double> *cost_trace) {
    const int n = o.num_qubits();
    auto idx = measured_terms(o);
    if (max_sweeps < 0) throw InvalidArgument("max_sweeps must be nonnegative");
    std::vector<LetterTriple> q(n, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    double cost = lbcs_cost(o, q);
    if (cost_trace) cost_trace->push_back(cost);
    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            std::array<double, 3> c{0.0, 0.0, 0.0};
            for (auto l : idx) {
                const PauliString &p = o[l].pauli;
                Letter li = p[i];
                if (li == Letter::I) continue;
                double v = o[l].coefficient * o[l].coefficient;
                for (int j = 0; j < n; ++j) {
                    if (j != i && p[j] != Letter::I) v /= q[j][letter_slot(p[j])];
                }
                c[letter_slot(li)] += v;
            }
            q[i] = water_fill(c, kLbcsFloor);
        }
        double next = lbcs_cost(o, q);
        if (cost_trace) cost_trace->push_back(next);
        double rel = (cost - next) / cost;
        cost = next;
        if (rel < tol) {
            converged = true;
            break;
        }
    }
    MeasurementPlan plan;
    plan.scheme = Scheme::LBCS;
    plan.n = n;
    plan.converged = converged;
    plan.distribution = BasisDistribution::product(std::move(q));
    return plan;
}

MeasurementPlan plan_derandomized(const WeightedPauliSum &o, std::size_t ns, double epsilon,
                                  std::vector<double> *log_cost_trace) {
    const int n = o.num_qubits();
    auto idx = measured_terms(o);
    if (ns < 1) throw InvalidArgument("derandomized budget must be at least 1");
    if (!(epsilon > 0.0) || !(epsilon <= 5.0)) throw InvalidArgument("epsilon must lie in (0, 5]");
    const double eta = -std::expm1(-0.5 * epsilon * epsilon);
    const std::size_t m = idx.size();

    std::vector<double> log_done(m, 0.0);
    std::vector<double> log_future(m);
    std::vector<std::size_t> hit_count(m, 0);
    for (std::size_t t = 0; t < m; ++t) {
        log_future[t] = std::log1p(-eta * std::pow(3.0, -o[idx[t]].pauli.weight()));
    }
    // Per current measurement: whether fixed sites all match, and unfixed support count.
    std::vector<bool> matched(m);
    std::vector<int> unfixed(m);
    auto cur = [&](std::size_t t) { return matched[t] ? std::pow(3.0, -unfixed[t]) : 0.0; };

    MeasurementPlan plan;
    plan.scheme = Scheme::Derandomized;
    plan.n = n;
    static constexpr Letter kLetters[3] = {Letter::X, Letter::Y, Letter::Z};
    std::vector<double> scaled(m);
    for (std::size_t j = 0; j < ns; ++j) {
        for (std::size_t t = 0; t < m; ++t) {
            matched[t] = true;
            unfixed[t] = o[idx[t]].pauli.weight();
        }
        const double rem = double(ns - j - 1);
        double top = -INFINITY;
        for (std::size_t t = 0; t < m; ++t) top = std::max(top, log_done[t] + rem * log_future[t]);
        for (std::size_t t = 0; t < m; ++t) scaled[t] = std::exp(log_done[t] + rem * log_future[t] - top);
        auto log_cost = [&] {
            double f = 0.0;
            for (std::size_t t = 0; t < m; ++t) f += scaled[t] * (1.0 - eta * cur(t));
            return top + std::log(f);
        };
        if (log_cost_trace && j == 0) log_cost_trace->push_back(log_cost());

        PauliString basis(n);
        for (int i = 0; i < n; ++i) {
            double best_f = INFINITY;
            Letter best = Letter::X;
            for (Letter w : kLetters) {
                double f = 0.0;
                for (std::size_t t = 0; t < m; ++t) {
                    const PauliString &p = o[idx[t]].pauli;
                    double c = cur(t);
                    Letter li = p[i];
                    if (li != Letter::I) c = (matched[t] && li == w) ? std::pow(3.0, -(unfixed[t] - 1)) : 0.0;
                    f += scaled[t] * (1.0 - eta * c);
                }
                if (f < best_f * (1.0 - 1e-13)) {
                    best_f = f;
                    best = w;
                }
            }
            basis.set(i, best);
            for (std::size_t t = 0; t < m; ++t) {
                Letter li = o[idx[t]].pauli[i];
                if (li == Letter::I) continue;
                --unfixed[t];
                if (li != best) matched[t] = false;
            }
            if (log_cost_trace) log_cost_trace->push_back(log_cost());
        }
        for (std::size_t t = 0; t < m; ++t) {
            if (matched[t]) {
                log_done[t] += std::log1p(-eta);
                ++hit_count[t];
            }
        }
        plan.fixed_bases.push_back(basis);
    }
    for (std::size_t t = 0; t < m; ++t) {
        if (hit_count[t] == 0) plan.unhit_terms.push_back(idx[t]);
    }
    return plan;
}

PauliString draw_basis(const MeasurementPlan &plan, std::mt19937_64 &rng) {
    if (!plan.distribution) throw InvalidArgument("derandomized plans have no basis distribution");
    return plan.distribution->draw(rng);
}

std::vector<PauliString> draw_bases(const MeasurementPlan &plan, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<PauliString> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(draw_basis(plan, rng));
    return out;
}

const PauliString &fixed_basis(const MeasurementPlan &plan, std::size_t index) {
    if (plan.scheme != Scheme::Derandomized) throw InvalidArgument("plan has no fixed bases");
    if (index >= plan.fixed_bases.size()) {
        throw InvalidArgument("basis index " + std::to_string(index) + " out of range");
    }
    return plan.fixed_bases[index];
}

}  // namespace qmeas
