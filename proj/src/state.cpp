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

#include "qmeas/state.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numeric>

#include "qmeas/error.hpp"

namespace qmeas {

namespace {

using cplx = std::complex<double>;

void require_dense_size(int n) {
    if (n < 1 || n > kMaxDenseQubits) {
        throw InvalidArgument("dense simulation supports 1.." + std::to_string(kMaxDenseQubits) +
                              " qubits, got " + std::to_string(n));
    }
}

void require_match(const DensityMatrix &rho, int n, const char *what) {
    if (rho.num_qubits() != n) {
        throw DimensionError(std::string(what) + " acts on " + std::to_string(n) + " qubits, state has " +
                             std::to_string(rho.num_qubits()));
    }
}

// Scatters the low bits of `value` into the set positions of `mask`.
std::uint64_t deposit(std::uint64_t value, std::uint64_t mask) {
    std::uint64_t out = 0;
    for (std::uint64_t bit = 1; mask; bit <<= 1) {
        std::uint64_t low = mask & (~mask + 1);
        if (value & bit) out |= low;
        mask &= mask - 1;
    }
    return out;
}

// rho <- G rho G^dagger with G acting on one qubit.
void apply_one_qubit(ComplexMatrix &rho, int qubit, const Eigen::Matrix2cd &g) {
    const Eigen::Index dim = rho.rows();
    const Eigen::Index bit = Eigen::Index(1) << qubit;
    for (Eigen::Index r0 = 0; r0 < dim; ++r0) {
        if (r0 & bit) continue;
        Eigen::Index r1 = r0 | bit;
        for (Eigen::Index c = 0; c < dim; ++c) {
            cplx a = rho(r0, c), b = rho(r1, c);
            rho(r0, c) = g(0, 0) * a + g(0, 1) * b;
            rho(r1, c) = g(1, 0) * a + g(1, 1) * b;
        }
    }
    for (Eigen::Index c0 = 0; c0 < dim; ++c0) {
        if (c0 & bit) continue;
        Eigen::Index c1 = c0 | bit;
        for (Eigen::Index r = 0; r < dim; ++r) {
            cplx a = rho(r, c0), b = rho(r, c1);
            rho(r, c0) = a * std::conj(g(0, 0)) + b * std::conj(g(0, 1));
            rho(r, c1) = a * std::conj(g(1, 0)) + b * std::conj(g(1, 1));
        }
    }
}

// Rotation mapping the eigenbasis of W onto the computational basis.
Eigen::Matrix2cd rotation_to_z(Letter w) {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd u;
    switch (w) {
        case Letter::X:
            u << s, s, s, -s;
            break;
        case Letter::Y:  // H S^dagger
            u << s, cplx(0, -s), s, cplx(0, s);
            break;
        default:
            u = Eigen::Matrix2cd::Identity();
    }
    return u;
}

}  // namespace

DensityMatrix::DensityMatrix(int n, ComplexMatrix entries) : n_(n), rho_(std::move(entries)) {
    require_dense_size(n);
    const Eigen::Index dim = Eigen::Index(1) << n;
    if (rho_.rows() != dim || rho_.cols() != dim) {
        throw DimensionError("density matrix must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
        throw InvalidArgument("density matrix is not Hermitian");
    }
    if (std::abs(rho_.trace() - 1.0) > kTraceTol) {
        throw InvalidArgument("density matrix trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kEigenTol) {
        throw InvalidArgument("density matrix is not positive semidefinite");
    }
}

SubsystemMask::SubsystemMask(int n, std::uint32_t bits) : n_(n), bits_(bits) {
    if (n < 1 || n > kMaxQubits) throw InvalidArgument("mask qubit count out of range");
    if (bits >> n) throw InvalidArgument("mask has members beyond qubit " + std::to_string(n));
}

SubsystemMask SubsystemMask::from_labels(int n, std::span<const int> labels) {
    std::uint32_t bits = 0;
    for (int label : labels) {
        if (label < 1 || label > n) {
            throw InvalidArgument("qubit label " + std::to_string(label) + " outside 1.." + std::to_string(n));
        }
        bits |= 1u << (label - 1);
    }
    return SubsystemMask(n, bits);
}

SubsystemMask SubsystemMask::all(int n) {
    return SubsystemMask(n, (1u << n) - 1u);
}

int SubsystemMask::size() const noexcept {
    return std::popcount(bits_);
}

SubsystemMask SubsystemMask::complement() const {
    return SubsystemMask(n_, ~bits_ & ((1u << n_) - 1u));
}

std::string SubsystemMask::str() const {
    std::string s(n_, '0');
    for (int i = 0; i < n_; ++i) {
        if (contains(i)) s[i] = '1';
    }
    return s;
}

ComplexMatrix dense(const PauliString &p) {
    require_dense_size(p.num_qubits());
    static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const std::uint64_t dim = std::uint64_t(1) << p.num_qubits();
    const cplx phase = kPhase[std::popcount(p.x_mask() & p.z_mask()) & 3];
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (std::uint64_t y = 0; y < dim; ++y) {
        double sign = (std::popcount(y & p.z_mask()) & 1) ? -1.0 : 1.0;
        m(y ^ p.x_mask(), y) = phase * sign;
    }
    return m;
}

ComplexMatrix dense(const WeightedPauliSum &o) {
    require_dense_size(o.num_qubits());
    const std::uint64_t dim = std::uint64_t(1) << o.num_qubits();
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (const auto &t : o.terms()) m += t.coefficient * dense(t.pauli);
    return m;
}

DensityMatrix ghz(int n) {
    require_dense_size(n);
    const std::uint64_t dim = std::uint64_t(1) << n;
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(0, 0) = m(0, dim - 1) = m(dim - 1, 0) = m(dim - 1, dim - 1) = 0.5;
    return DensityMatrix(n, std::move(m));
}

DensityMatrix maximally_mixed(int n) {
    require_dense_size(n);
    const std::uint64_t dim = std::uint64_t(1) << n;
    return DensityMatrix(n, ComplexMatrix::Identity(dim, dim) / double(dim));
}

DensityMatrix basis_state(int n, std::uint64_t index) {
    require_dense_size(n);
    const std::uint64_t dim = std::uint64_t(1) << n;
    if (index >= dim) throw InvalidArgument("basis index out of range");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(index, index) = 1.0;
    return DensityMatrix(n, std::move(m));
}

DensityMatrix random_mixed_state(int n, std::mt19937_64 &rng) {
    require_dense_size(n);
    const std::uint64_t dim = std::uint64_t(1) << n;
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexMatrix a(dim, dim);
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) {
            double re = normal(rng);
            double im = normal(rng);
            a(r, c) = cplx(re, im);
        }
    }
    ComplexMatrix rho = a * a.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(n, std::move(rho));
}

DensityMatrix admix_white_noise(const DensityMatrix &rho, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("noise probability outside [0, 1]");
    const auto dim = Eigen::Index(rho.dim());
    ComplexMatrix m = (1.0 - p) * rho.matrix() + (p / double(dim)) * ComplexMatrix::Identity(dim, dim);
    return DensityMatrix(rho.num_qubits(), std::move(m));
}

double noise_for_fidelity(int n, double fidelity) {
    const double dim = std::ldexp(1.0, n);
    if (!(fidelity >= 1.0 / dim && fidelity <= 1.0)) {
        throw InvalidArgument("fidelity outside [2^-n, 1]");
    }
    return (1.0 - fidelity) * dim / (dim - 1.0);
}

double ghz_fidelity(const DensityMatrix &rho) {
    const auto last = Eigen::Index(rho.dim() - 1);
    const auto &m = rho.matrix();
    return 0.5 * (m(0, 0) + m(0, last) + m(last, 0) + m(last, last)).real();
}

double exact_expectation(const DensityMatrix &rho, const PauliString &p) {
    require_match(rho, p.num_qubits(), "observable");
    static const cplx kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const cplx phase = kPhase[std::popcount(p.x_mask() & p.z_mask()) & 3];
    const auto &m = rho.matrix();
    cplx acc = 0.0;
    for (std::uint64_t y = 0; y < rho.dim(); ++y) {
        double sign = (std::popcount(y & p.z_mask()) & 1) ? -1.0 : 1.0;
        acc += m(y, y ^ p.x_mask()) * sign;
    }
    return (acc * phase).real();
}

double exact_expectation(const DensityMatrix &rho, const WeightedPauliSum &o) {
    require_match(rho, o.num_qubits(), "observable");
    double s = 0.0;
    for (const auto &t : o.terms()) s += t.coefficient * exact_expectation(rho, t.pauli);
    return s;
}

std::vector<double> born_probabilities(const DensityMatrix &rho, const PauliString &basis) {
    require_match(rho, basis.num_qubits(), "basis");
    if (!basis.is_full_weight()) {
        throw InvalidArgument("measurement basis " + basis.str() + " contains an identity letter");
    }
    ComplexMatrix m = rho.matrix();
    for (int q = 0; q < basis.num_qubits(); ++q) {
        if (basis[q] != Letter::Z) apply_one_qubit(m, q, rotation_to_z(basis[q]));
    }
    std::vector<double> probs(rho.dim());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::max(0.0, m(i, i).real());
    double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (double &p : probs) p /= total;
    return probs;
}

std::vector<std::uint32_t> sample_outcomes(const DensityMatrix &rho, const PauliString &basis,
                                           std::size_t shots, std::uint64_t seed) {
    if (shots < 1) throw InvalidArgument("shot count must be at least 1");
    std::vector<double> cdf = born_probabilities(rho, basis);
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
    std::mt19937_64 rng(seed);
    std::vector<std::uint32_t> out(shots);
    for (auto &o : out) {
        double u = uniform01(rng) * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        o = static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    }
    return out;
}

ComplexMatrix partial_transpose(const DensityMatrix &rho, const SubsystemMask &a) {
    require_match(rho, a.num_qubits(), "subsystem mask");
    const std::uint64_t mask = a.bits();
    const auto &m = rho.matrix();
    const std::uint64_t dim = rho.dim();
    ComplexMatrix out(dim, dim);
    for (std::uint64_t r = 0; r < dim; ++r) {
        for (std::uint64_t c = 0; c < dim; ++c) {
            std::uint64_t r2 = (r & ~mask) | (c & mask);
            std::uint64_t c2 = (c & ~mask) | (r & mask);
            out(r, c) = m(r2, c2);
        }
    }
    return out;
}

double exact_pt_moment(const DensityMatrix &rho, const SubsystemMask &a, int order) {
    if (order < 1) throw InvalidArgument("moment order must be at least 1");
    ComplexMatrix pt = partial_transpose(rho, a);
    ComplexMatrix power = pt;
    for (int k = 1; k < order; ++k) power = (power * pt).eval();
    return power.trace().real();
}

ComplexMatrix reduced_state(const DensityMatrix &rho, const SubsystemMask &a) {
    require_match(rho, a.num_qubits(), "subsystem mask");
    if (a.empty()) throw InvalidArgument("subsystem must be nonempty");
    const std::uint64_t amask = a.bits();
    const std::uint64_t bmask = a.complement().bits();
    const std::uint64_t da = std::uint64_t(1) << a.size();
    const std::uint64_t db = std::uint64_t(1) << (rho.num_qubits() - a.size());
    const auto &m = rho.matrix();
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (std::uint64_t i = 0; i < da; ++i) {
        std::uint64_t ri = deposit(i, amask);
        for (std::uint64_t j = 0; j < da; ++j) {
            std::uint64_t cj = deposit(j, amask);
            cplx s = 0.0;
            for (std::uint64_t b = 0; b < db; ++b) {
                std::uint64_t rb = deposit(b, bmask);
                s += m(ri | rb, cj | rb);
            }
            out(i, j) = s;
        }
    }
    return out;
}

double exact_subsystem_purity(const DensityMatrix &rho, const SubsystemMask &a) {
    ComplexMatrix r = reduced_state(rho, a);
    return (r * r).trace().real();
}

double permutation_moment_oracle(const DensityMatrix &rho, const SubsystemMask &a, int order) {
    require_match(rho, a.num_qubits(), "subsystem mask");
    const int n = rho.num_qubits();
    if (order < 1) throw InvalidArgument("moment order must be at least 1");
    if (order * n > 12) throw InvalidArgument("order * n exceeds the dense feasibility bound of 12");
    const std::uint64_t copy_mask = (std::uint64_t(1) << n) - 1;
    const std::uint64_t amask = a.bits();
    const std::uint64_t bmask = copy_mask & ~amask;
    const std::uint64_t total = std::uint64_t(1) << (order * n);

    // Explicit operator: image of every basis state of the order-copy space.
    // A-parts move from copy c to copy c+1; B-parts from copy c to copy c-1.
    std::vector<std::uint64_t> image(total);
    for (std::uint64_t v = 0; v < total; ++v) {
        std::uint64_t w = 0;
        for (int c = 0; c < order; ++c) {
            std::uint64_t part = (v >> (c * n)) & copy_mask;
            int fwd = (c + 1) % order;
            int bwd = (c + order - 1) % order;
            w |= (part & amask) << (fwd * n);
            w |= (part & bmask) << (bwd * n);
        }
        image[v] = w;
    }

    // Tr[Pi M] = sum_v M[v, Pi(v)] with M = rho^{(x)order}.
    const auto &m = rho.matrix();
    cplx acc = 0.0;
    for (std::uint64_t v = 0; v < total; ++v) {
        std::uint64_t w = image[v];
        cplx prod = 1.0;
        for (int c = 0; c < order; ++c) {
            prod *= m((v >> (c * n)) & copy_mask, (w >> (c * n)) & copy_mask);
        }
        acc += prod;
    }
    return acc.real();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

PauliBasisSampler::PauliBasisSampler(const DensityMatrix &rho) : n_(rho.num_qubits()), rho_(rho) {
    std::size_t count = 1;
    for (int i = 0; i < n_; ++i) count *= 3;
    cdf_.resize(count);
    once_ = std::make_unique<std::once_flag[]>(count);
}

const std::vector<double> &PauliBasisSampler::table(const PauliString &basis) const {
    const std::size_t idx = index_of(basis);
    std::call_once(once_[idx], [&] {
        auto probs = born_probabilities(rho_, basis);
        std::partial_sum(probs.begin(), probs.end(), probs.begin());
        cdf_[idx] = std::move(probs);
    });
    return cdf_[idx];
}

std::size_t PauliBasisSampler::index_of(const PauliString &basis) const {
    if (basis.num_qubits() != n_) throw DimensionError("basis size does not match the sampled state");
    if (!basis.is_full_weight()) {
        throw InvalidArgument("measurement basis " + basis.str() + " contains an identity letter");
    }
    std::size_t idx = 0;
    for (int i = n_ - 1; i >= 0; --i) idx = idx * 3 + (static_cast<int>(basis[i]) - 1);
    return idx;
}

std::span<const double> PauliBasisSampler::cumulative(const PauliString &basis) const {
    return table(basis);
}

std::uint32_t PauliBasisSampler::draw(const PauliString &basis, std::mt19937_64 &rng) const {
    const auto &cdf = table(basis);
    double u = uniform01(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint32_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
}

}  // namespace qmeas
