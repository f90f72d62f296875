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

#include "qmeas/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmeas/error.hpp"

namespace qmeas {

namespace {

int letter_slot(Letter l) {
    return static_cast<int>(l) - 1;
}

void check_observable(const MeasurementPlan &plan, const WeightedPauliSum &o) {
    if (o.num_qubits() != plan.n) {
        throw DimensionError("observable acts on " + std::to_string(o.num_qubits()) + " qubits, plan on " +
                             std::to_string(plan.n));
    }
    if (plan.distribution && plan.distribution->kind() == BasisDistribution::Kind::Explicit) {
        for (const auto &e : plan.distribution->entries()) {
            for (auto l : e.members) {
                if (l >= o.size()) throw InvalidArgument("plan refers to a term the observable does not have");
            }
        }
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t k = v.size();
    return k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

double expectation_squared(const WeightedPauliSum &o, const DensityMatrix &rho) {
    double e = 0.0;
    for (const auto &t : o.terms()) {
        if (!t.pauli.is_identity()) e += t.coefficient * exact_expectation(rho, t.pauli);
    }
    return e * e;
}

}  // namespace

EstimateAccumulator::EstimateAccumulator(const MeasurementPlan &plan, const WeightedPauliSum &o,
                                         ExplicitKernel kernel)
    : plan_(&plan), o_(&o), kernel_(kernel), sums_(o.size()), hits_(o.size(), 0), scratch_(o.size()) {
    if (!plan.randomized() || !plan.distribution) {
        throw InvalidArgument("derandomized plans use estimate_derandomized");
    }
    check_observable(plan, o);
    if (plan.distribution->kind() == BasisDistribution::Kind::Explicit && kernel == ExplicitKernel::Hits) {
        hit_norm_.assign(o.size(), 0.0);
        for (std::size_t l = 0; l < o.size(); ++l) {
            for (const auto &e : plan.distribution->entries()) {
                if (hits(e.basis, o[l].pauli)) hit_norm_[l] += e.prob;
            }
        }
    }
}

void EstimateAccumulator::kernel_values(const PauliString &basis, std::vector<double> &f) const {
    const WeightedPauliSum &o = *o_;
    const BasisDistribution &dist = *plan_->distribution;
    if (basis.num_qubits() != o.num_qubits()) throw DimensionError("record basis has wrong length");
    if (!basis.is_full_weight()) {
        throw ForeignRecord("record basis " + basis.str() + " contains an identity letter");
    }
    std::fill(f.begin(), f.end(), 0.0);
    if (dist.kind() == BasisDistribution::Kind::Product) {
        const auto &triples = dist.triples();
        for (std::size_t l = 0; l < o.size(); ++l) {
            const PauliString &q = o[l].pauli;
            if (!hits(basis, q)) continue;
            double v = 1.0;
            for (int i = 0; i < o.num_qubits(); ++i) {
                if (q[i] != Letter::I) v /= triples[i][letter_slot(q[i])];
            }
            f[l] = v;
        }
        if (dist.probability(basis) <= 0.0) {
            throw ForeignRecord("record basis " + basis.str() + " has zero probability under the plan");
        }
        return;
    }
    auto k = dist.find(basis);
    if (!k) throw ForeignRecord("record basis " + basis.str() + " is not in the plan's basis list");
    const auto &entry = dist.entries()[*k];
    if (kernel_ == ExplicitKernel::Membership) {
        for (auto l : entry.members) f[l] = 1.0 / entry.prob;
    } else {
        for (std::size_t l = 0; l < o.size(); ++l) {
            if (hit_norm_[l] > 0.0 && hits(basis, o[l].pauli)) f[l] = 1.0 / hit_norm_[l];
        }
    }
    for (std::size_t l = 0; l < o.size(); ++l) {
        if (o[l].pauli.is_identity()) f[l] = 1.0;
    }
}

void EstimateAccumulator::add(const ShotRecord &r) {
    if (r.reps < 1) throw InvalidArgument("record reps must be at least 1");
    kernel_values(r.basis, scratch_);
    for (std::size_t l = 0; l < scratch_.size(); ++l) {
        if (scratch_[l] == 0.0) continue;
        const double mu = parity_sign(r.bits, (*o_)[l].pauli.support());
        sums_[l].add(double(r.reps) * scratch_[l] * mu);
        hits_[l] += r.reps;
    }
    shots_ += r.reps;
}

void EstimateAccumulator::add(std::span<const ShotRecord> records) {
    for (const auto &r : records) add(r);
}

void EstimateAccumulator::merge(const EstimateAccumulator &other) {
    if (other.o_ != o_ || other.plan_ != plan_) throw InvalidArgument("cannot merge folds of different estimates");
    for (std::size_t l = 0; l < sums_.size(); ++l) {
        sums_[l].merge(other.sums_[l]);
        hits_[l] += other.hits_[l];
    }
    shots_ += other.shots_;
}

EstimateReport EstimateAccumulator::report() const {
    if (shots_ == 0) throw InvalidArgument("no records to estimate from");
    const WeightedPauliSum &o = *o_;
    EstimateReport rep;
    rep.n_samples = shots_;
    rep.hits = hits_;
    rep.term_values.resize(o.size());
    NeumaierSum value;
    for (std::size_t l = 0; l < o.size(); ++l) {
        rep.term_values[l] = sums_[l].value() / double(shots_);
        value.add(o[l].coefficient * rep.term_values[l]);
        if (hits_[l] == 0 && !o[l].pauli.is_identity()) rep.eps0 += std::abs(o[l].coefficient);
    }
    rep.value = value.value();
    return rep;
}

double EstimateAccumulator::shot_value(const PauliString &basis, std::uint32_t bits) const {
    kernel_values(basis, scratch_);
    double v = 0.0;
    for (std::size_t l = 0; l < scratch_.size(); ++l) {
        if (scratch_[l] == 0.0) continue;
        v += (*o_)[l].coefficient * scratch_[l] * parity_sign(bits, (*o_)[l].pauli.support());
    }
    return v;
}

EstimateReport estimate(std::span<const ShotRecord> records, const MeasurementPlan &plan, const WeightedPauliSum &o,
                        const EstimateOptions &options) {
    if (records.empty()) throw InvalidArgument("no records to estimate from");
    if (options.aggregator == Aggregator::Mean) {
        EstimateAccumulator acc(plan, o, options.kernel);
        acc.add(records);
        return acc.report();
    }
    if (options.mom_batches < 1) throw InvalidArgument("median-of-means needs at least one batch");
    const std::size_t k = std::min(options.mom_batches, records.size());
    EstimateAccumulator total(plan, o, options.kernel);
    std::vector<EstimateReport> batches;
    for (std::size_t b = 0; b < k; ++b) {
        std::size_t lo = records.size() * b / k;
        std::size_t hi = records.size() * (b + 1) / k;
        EstimateAccumulator acc(plan, o, options.kernel);
        acc.add(records.subspan(lo, hi - lo));
        batches.push_back(acc.report());
        total.merge(acc);
    }
    EstimateReport rep = total.report();
    std::vector<double> vals;
    for (const auto &b : batches) vals.push_back(b.value);
    rep.value = median(vals);
    for (std::size_t l = 0; l < o.size(); ++l) {
        vals.clear();
        for (const auto &b : batches) vals.push_back(b.term_values[l]);
        rep.term_values[l] = median(vals);
    }
    return rep;
}

EstimateReport estimate_derandomized(std::span<const ShotRecord> records, const MeasurementPlan &plan,
                                     const WeightedPauliSum &o) {
    if (plan.scheme != Scheme::Derandomized) throw InvalidArgument("plan is not derandomized");
    if (records.empty()) throw InvalidArgument("no records to estimate from");
    check_observable(plan, o);

    // Runs of equal consecutive bases must line up with the plan's runs.
    auto collapse = [](auto begin, auto end, auto basis_of) {
        std::vector<PauliString> out;
        for (auto it = begin; it != end; ++it) {
            const PauliString &b = basis_of(*it);
            if (out.empty() || !(out.back() == b)) out.push_back(b);
        }
        return out;
    };
    auto rec_runs = collapse(records.begin(), records.end(), [](const ShotRecord &r) -> const PauliString & {
        return r.basis;
    });
    auto plan_runs = collapse(plan.fixed_bases.begin(), plan.fixed_bases.end(),
                              [](const PauliString &p) -> const PauliString & { return p; });
    if (rec_runs != plan_runs) {
        throw InvalidArgument("records do not line up with the plan's " + std::to_string(plan.fixed_bases.size()) +
                              " fixed bases");
    }

    std::vector<NeumaierSum> sums(o.size());
    EstimateReport rep;
    rep.hits.assign(o.size(), 0);
    for (const auto &r : records) {
        if (r.reps < 1) throw InvalidArgument("record reps must be at least 1");
        rep.n_samples += r.reps;
        for (std::size_t l = 0; l < o.size(); ++l) {
            const PauliString &q = o[l].pauli;
            if (q.is_identity() || !hits(r.basis, q)) continue;
            sums[l].add(double(r.reps) * parity_sign(r.bits, q.support()));
            rep.hits[l] += r.reps;
        }
    }
    rep.term_values.assign(o.size(), 0.0);
    NeumaierSum value;
    for (std::size_t l = 0; l < o.size(); ++l) {
        if (o[l].pauli.is_identity()) {
            rep.term_values[l] = 1.0;
        } else if (rep.hits[l] > 0) {
            rep.term_values[l] = sums[l].value() / double(rep.hits[l]);
        } else {
            rep.eps0 += std::abs(o[l].coefficient);
        }
        value.add(o[l].coefficient * rep.term_values[l]);
    }
    rep.value = value.value();
    return rep;
}

double pair_expectation(const DensityMatrix &rho, const PauliString &a, const PauliString &b) {
    PhasedPauli p = multiply(a, b);
    // Odd phases make the trace purely imaginary.
    if (p.phase_exponent & 1) return 0.0;
    double e = exact_expectation(rho, p.pauli);
    return p.phase_exponent == 2 ? -e : e;
}

double variance_l1(const WeightedPauliSum &o, const DensityMatrix &rho) {
    if (o.num_qubits() != rho.num_qubits()) throw DimensionError("observable and state sizes differ");
    double norm = 0.0;
    for (const auto &t : o.terms()) {
        if (!t.pauli.is_identity()) norm += std::abs(t.coefficient);
    }
    return norm * norm - expectation_squared(o, rho);
}

double variance_grouping(const MeasurementPlan &plan, const WeightedPauliSum &o, const DensityMatrix &rho) {
    if (!plan.distribution || plan.distribution->kind() != BasisDistribution::Kind::Explicit) {
        throw InvalidArgument("variance_grouping needs a plan with an explicit basis list");
    }
    check_observable(plan, o);
    if (o.num_qubits() != rho.num_qubits()) throw DimensionError("observable and state sizes differ");
    NeumaierSum s;
    for (const auto &e : plan.distribution->entries()) {
        NeumaierSum inner;
        for (auto a : e.members) {
            for (auto b : e.members) {
                inner.add(o[a].coefficient * o[b].coefficient * pair_expectation(rho, o[a].pauli, o[b].pauli));
            }
        }
        s.add(inner.value() / e.prob);
    }
    return s.value() - expectation_squared(o, rho);
}

ProductVariance variance_product_scheme(const BasisDistribution &dist, const WeightedPauliSum &o,
                                        const DensityMatrix &rho) {
    if (dist.kind() != BasisDistribution::Kind::Product) {
        throw InvalidArgument("variance_product_scheme needs a product distribution");
    }
    if (dist.num_qubits() != o.num_qubits() || o.num_qubits() != rho.num_qubits()) {
        throw DimensionError("distribution, observable and state sizes differ");
    }
    const int n = o.num_qubits();
    const auto &triples = dist.triples();
    auto idx = o.non_identity_indices();
    NeumaierSum s;
    double norm = 0.0;
    int max_weight = 0;
    for (auto a : idx) {
        norm += std::abs(o[a].coefficient);
        max_weight = std::max(max_weight, o[a].pauli.weight());
        for (auto b : idx) {
            const PauliString &qa = o[a].pauli;
            const PauliString &qb = o[b].pauli;
            if (!compatible(qa, qb)) continue;
            double g = 1.0;
            for (int i = 0; i < n; ++i) {
                if (qa[i] != Letter::I && qa[i] == qb[i]) g /= triples[i][letter_slot(qa[i])];
            }
            s.add(o[a].coefficient * o[b].coefficient * g * pair_expectation(rho, qa, qb));
        }
    }
    ProductVariance out;
    out.exact = s.value() - expectation_squared(o, rho);
    out.bound = std::pow(3.0, max_weight) * norm * norm;
    return out;
}

double variance_generic(const BasisDistribution &dist, const WeightedPauliSum &o, const DensityMatrix &rho) {
    if (dist.kind() != BasisDistribution::Kind::Explicit) {
        throw InvalidArgument("variance_generic needs an explicit basis list");
    }
    if (dist.num_qubits() != o.num_qubits() || o.num_qubits() != rho.num_qubits()) {
        throw DimensionError("distribution, observable and state sizes differ");
    }
    auto idx = o.non_identity_indices();
    std::vector<double> norm(o.size(), 0.0);
    for (auto l : idx) {
        for (const auto &e : dist.entries()) {
            if (hits(e.basis, o[l].pauli)) norm[l] += e.prob;
        }
        if (norm[l] == 0.0) throw CoverageError("term " + o[l].pauli.str() + " is hit by no basis in the list");
    }
    NeumaierSum s;
    for (auto a : idx) {
        for (auto b : idx) {
            double both = 0.0;
            for (const auto &e : dist.entries()) {
                if (hits(e.basis, o[a].pauli) && hits(e.basis, o[b].pauli)) both += e.prob;
            }
            if (both == 0.0) continue;
            double g = both / (norm[a] * norm[b]);
            s.add(o[a].coefficient * o[b].coefficient * g * pair_expectation(rho, o[a].pauli, o[b].pauli));
        }
    }
    return s.value() - expectation_squared(o, rho);
}

namespace {
std::size_t ceil_count(double v) {
    if (!(v < 1e18)) throw InvalidArgument("sample size bound overflows");
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v)));
}
}  // namespace

std::size_t sample_size_linear(std::size_t num_observables, double delta, double epsilon, double max_var) {
    if (num_observables < 2) throw InvalidArgument("need at least 2 observables");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(max_var >= 0.0) || std::isinf(max_var)) throw InvalidArgument("variance must be finite and nonnegative");
    double v = 2.0 * std::log(double(num_observables)) * std::log(1.0 / delta) * max_var / (epsilon * epsilon);
    return ceil_count(v);
}

std::size_t sample_size_nonlinear(int subsys_size, int order, double delta, double epsilon, double trace_o_sq) {
    if (subsys_size < 1 || subsys_size > kMaxQubits) throw InvalidArgument("subsystem size out of range");
    if (order < 1) throw InvalidArgument("order must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    if (!(trace_o_sq >= 0.0) || std::isinf(trace_o_sq)) throw InvalidArgument("Tr(O^2) must be finite");
    double v = std::ldexp(trace_o_sq, order * subsys_size) / (delta * epsilon * epsilon);
    return ceil_count(v);
}

}  // namespace qmeas
