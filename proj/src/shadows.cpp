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

#include "qmeas/shadows.hpp"

#include <cmath>
#include <complex>

#include "qmeas/error.hpp"
#include "qmeas/parallel.hpp"

namespace qmeas {

namespace {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

Mat2 pauli_matrix(Letter w) {
    Mat2 m;
    switch (w) {
        case Letter::X:
            m << 0, 1, 1, 0;
            break;
        case Letter::Y:
            m << 0, cplx(0, -1), cplx(0, 1), 0;
            break;
        case Letter::Z:
            m << 1, 0, 0, -1;
            break;
        default:
            m = Mat2::Identity();
    }
    return m;
}

Mat2 factor_of_code(int code) {
    return snapshot_factor(static_cast<Letter>(1 + code / 2), code % 2);
}

void require_shadow_mask(const ShadowSet &s, const SubsystemMask &a) {
    if (a.num_qubits() != s.n) throw DimensionError("subsystem mask size does not match the shadows");
}

// Per-site code table of all snapshots, row-major [snapshot][site].
std::vector<std::uint8_t> code_table(const ShadowSet &s) {
    std::vector<std::uint8_t> codes(s.size() * s.n);
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (int i = 0; i < s.n; ++i) codes[k * s.n + i] = static_cast<std::uint8_t>(s.snapshots[k].code(i));
    }
    return codes;
}

struct CliffordAxis {
    Letter axis;
    int sign;
};

const std::vector<CliffordAxis> &clifford_axes() {
    static const std::vector<CliffordAxis> axes = [] {
        std::vector<CliffordAxis> out;
        for (const auto &u : single_qubit_cliffords()) {
            Mat2 m = u.adjoint() * pauli_matrix(Letter::Z) * u;
            for (Letter w : {Letter::X, Letter::Y, Letter::Z}) {
                double t = 0.5 * (m * pauli_matrix(w)).trace().real();
                if (std::abs(std::abs(t) - 1.0) < 1e-9) out.push_back({w, t > 0 ? 1 : -1});
            }
        }
        return out;
    }();
    return axes;
}

}  // namespace

Mat2 snapshot_factor(Letter w, int bit) {
    if (w == Letter::I) throw InvalidArgument("snapshot basis letter cannot be I");
    const double s = bit ? -1.0 : 1.0;
    return 0.5 * (Mat2::Identity() + 3.0 * s * pauli_matrix(w));
}

Snapshot::Snapshot(PauliString basis, std::uint32_t bits) : basis_(std::move(basis)), bits_(bits) {
    if (!basis_.is_full_weight()) {
        throw InvalidArgument("snapshot basis " + basis_.str() + " contains an identity letter");
    }
    if (basis_.num_qubits() < 32 && (bits_ >> basis_.num_qubits())) {
        throw InvalidArgument("snapshot outcome has bits beyond the qubit count");
    }
}

Mat2 Snapshot::factor(int site) const {
    return snapshot_factor(basis_[site], bit(site));
}

std::vector<Mat2> Snapshot::factors() const {
    std::vector<Mat2> out;
    for (int i = 0; i < num_qubits(); ++i) out.push_back(factor(i));
    return out;
}

const std::vector<Mat2> &single_qubit_cliffords() {
    static const std::vector<Mat2> group = [] {
        const double r = 1.0 / std::sqrt(2.0);
        Mat2 h, s;
        h << r, r, r, -r;
        s << 1, 0, 0, cplx(0, 1);
        // Fix the global phase so the first entry of magnitude > 0.1 is real positive.
        auto canonical = [](Mat2 m) {
            for (int k = 0; k < 4; ++k) {
                cplx v = m(k / 2, k % 2);
                if (std::abs(v) > 0.1) return Mat2(m * (std::abs(v) / v));
            }
            return m;
        };
        auto same = [](const Mat2 &a, const Mat2 &b) { return (a - b).cwiseAbs().maxCoeff() < 1e-9; };
        std::vector<Mat2> out{Mat2::Identity()};
        for (std::size_t k = 0; k < out.size(); ++k) {
            for (const Mat2 &g : {h, s}) {
                Mat2 c = canonical(g * out[k]);
                bool seen = false;
                for (const auto &e : out) seen = seen || same(e, c);
                if (!seen) out.push_back(c);
            }
        }
        return out;
    }();
    return group;
}

ShadowSet collect_shadows(const PauliBasisSampler &sampler, std::size_t ns, std::uint64_t seed, ShadowMode mode) {
    if (ns < 1) throw InvalidArgument("shadow count must be at least 1");
    const int n = sampler.num_qubits();
    ShadowSet out;
    out.n = n;
    out.seed = seed;
    out.snapshots.reserve(ns);
    std::mt19937_64 rng(seed);
    const auto &axes = clifford_axes();
    for (std::size_t k = 0; k < ns; ++k) {
        PauliString basis(n);
        std::uint32_t flips = 0;
        for (int i = 0; i < n; ++i) {
            if (mode == ShadowMode::PauliBasis) {
                int w = std::min(2, static_cast<int>(uniform01(rng) * 3.0));
                basis.set(i, static_cast<Letter>(1 + w));
            } else {
                std::size_t c = std::min<std::size_t>(axes.size() - 1, std::size_t(uniform01(rng) * double(axes.size())));
                basis.set(i, axes[c].axis);
                if (axes[c].sign < 0) flips |= 1u << i;
            }
        }
        // Measuring U rho U^dag in Z gives z = axis outcome XOR sign flip, and
        // 3 U^dag|z><z|U - I = (I + 3 (-1)^z sign W)/2 depends only on the axis outcome.
        std::uint32_t z_bits = sampler.draw(basis, rng) ^ flips;
        out.snapshots.emplace_back(basis, z_bits ^ flips);
    }
    return out;
}

ShadowSet shadows_from_records(int n, std::span<const ShotRecord> records) {
    ShadowSet out;
    out.n = n;
    for (const auto &r : records) {
        if (r.basis.num_qubits() != n) throw DimensionError("record basis has wrong length");
        for (std::uint32_t k = 0; k < r.reps; ++k) out.snapshots.emplace_back(r.basis, r.bits);
    }
    return out;
}

std::vector<ShotRecord> records_from_shadows(const ShadowSet &shadows) {
    std::vector<ShotRecord> out;
    out.reserve(shadows.size());
    for (const auto &s : shadows.snapshots) out.push_back({s.basis(), s.bits(), 1});
    return out;
}

ComplexMatrix reconstruct_mean(const ShadowSet &shadows) {
    if (shadows.snapshots.empty()) throw InvalidArgument("empty shadow set");
    const int n = shadows.n;
    if (n > kMaxDenseQubits) throw InvalidArgument("dense reconstruction is limited to 10 qubits");
    const std::size_t dim = std::size_t(1) << n;
    ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
    std::vector<Mat2> table(6);
    for (int c = 0; c < 6; ++c) table[c] = factor_of_code(c);
    for (const auto &snap : shadows.snapshots) {
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                cplx v = 1.0;
                for (int i = 0; i < n; ++i) v *= table[snap.code(i)]((r >> i) & 1, (c >> i) & 1);
                sum(r, c) += v;
            }
        }
    }
    return sum / double(shadows.size());
}

double estimate_observable_from_shadows(const ShadowSet &shadows, const WeightedPauliSum &o) {
    if (shadows.snapshots.empty()) throw InvalidArgument("empty shadow set");
    if (o.num_qubits() != shadows.n) throw DimensionError("observable size does not match the shadows");
    NeumaierSum total;
    for (const auto &snap : shadows.snapshots) {
        for (const auto &t : o.terms()) {
            // Tr[(I + 3 s W)/2 * V] = 3 s [V == W] for V != I, and 1 for V = I.
            double v = t.coefficient;
            for (int i = 0; i < shadows.n && v != 0.0; ++i) {
                Letter l = t.pauli[i];
                if (l == Letter::I) continue;
                v = l == snap.basis()[i] ? v * (snap.bit(i) ? -3.0 : 3.0) : 0.0;
            }
            total.add(v);
        }
    }
    return total.value() / double(shadows.size());
}

double purity_ustat(const ShadowSet &shadows, const SubsystemMask &a, int threads) {
    require_shadow_mask(shadows, a);
    if (a.empty()) throw InvalidArgument("subsystem must be nonempty");
    const std::size_t ns = shadows.size();
    if (ns < 2) throw InvalidArgument("purity needs at least 2 snapshots");
    // Tr(F F') for single-qubit factors: 5 same basis and outcome, -4 same
    // basis opposite outcome, 1/2 different bases.
    double pair[6][6];
    for (int x = 0; x < 6; ++x) {
        for (int y = 0; y < 6; ++y) pair[x][y] = (x / 2 != y / 2) ? 0.5 : (x == y ? 5.0 : -4.0);
    }
    std::vector<int> sites;
    for (int i = 0; i < shadows.n; ++i) {
        if (a.contains(i)) sites.push_back(i);
    }
    const auto codes = code_table(shadows);
    const int n = shadows.n;
    std::vector<NeumaierSum> partial(ns);
    parallel_for(ns, threads, [&](std::size_t k1) {
        for (std::size_t k2 = k1 + 1; k2 < ns; ++k2) {
            double v = 1.0;
            for (int i : sites) v *= pair[codes[k1 * n + i]][codes[k2 * n + i]];
            partial[k1].add(v);
        }
    });
    NeumaierSum total;
    for (const auto &p : partial) total.merge(p);
    return 2.0 * total.value() / (double(ns) * double(ns - 1));
}

TupleStrategy auto_strategy(std::size_t ns, int order, std::uint64_t seed) {
    if (order >= 3 && ns > kFullTupleLimitOrder3) return TupleStrategy::monte_carlo(kAutoMonteCarloBudget, seed);
    return TupleStrategy::full();
}

double pt_moment_ustat(const ShadowSet &shadows, const SubsystemMask &a, int order, const TupleStrategy &strategy,
                       int threads) {
    require_shadow_mask(shadows, a);
    if (order != 2 && order != 3) throw InvalidArgument("PT moment order must be 2 or 3");
    const std::size_t ns = shadows.size();
    if (ns < std::size_t(order)) throw InvalidArgument("need at least as many snapshots as the moment order");
    if (strategy.kind == TupleStrategy::Kind::MonteCarlo && strategy.budget < 1) {
        throw InvalidArgument("Monte Carlo budget must be at least 1");
    }
    const int n = shadows.n;

    // tables[0] holds Tr(F1 F2 ...), tables[1] the same with every factor transposed.
    const std::size_t width = order == 2 ? 36 : 216;
    std::vector<cplx> tables[2] = {std::vector<cplx>(width), std::vector<cplx>(width)};
    for (std::size_t t = 0; t < width; ++t) {
        int c1 = int(t % 6), c2 = int(t / 6 % 6), c3 = int(t / 36);
        // Index layout: t = c1 + 6 c2 (+ 36 c3).
        Mat2 f1 = factor_of_code(c1), f2 = factor_of_code(c2);
        Mat2 plain = f1 * f2;
        Mat2 trans = f1.transpose() * f2.transpose();
        if (order == 3) {
            Mat2 f3 = factor_of_code(c3);
            plain = plain * f3;
            trans = trans * f3.transpose();
        }
        tables[0][t] = plain.trace();
        tables[1][t] = trans.trace();
    }
    std::vector<const cplx *> site_table(n);
    for (int i = 0; i < n; ++i) site_table[i] = tables[a.contains(i) ? 1 : 0].data();
    const auto codes = code_table(shadows);

    auto tuple_value = [&](std::size_t k1, std::size_t k2, std::size_t k3) {
        cplx v = 1.0;
        for (int i = 0; i < n; ++i) {
            std::size_t t = codes[k1 * n + i] + 6 * codes[k2 * n + i];
            if (order == 3) t += 36 * std::size_t(codes[k3 * n + i]);
            v *= site_table[i][t];
        }
        return v.real();
    };

    if (strategy.kind == TupleStrategy::Kind::Full) {
        std::vector<NeumaierSum> partial(ns);
        parallel_for(ns, threads, [&](std::size_t k1) {
            for (std::size_t k2 = 0; k2 < ns; ++k2) {
                if (k2 == k1) continue;
                if (order == 2) {
                    partial[k1].add(tuple_value(k1, k2, 0));
                    continue;
                }
                for (std::size_t k3 = 0; k3 < ns; ++k3) {
                    if (k3 == k1 || k3 == k2) continue;
                    partial[k1].add(tuple_value(k1, k2, k3));
                }
            }
        });
        NeumaierSum total;
        for (const auto &p : partial) total.merge(p);
        double count = double(ns) * double(ns - 1);
        if (order == 3) count *= double(ns - 2);
        return total.value() / count;
    }

    constexpr std::uint64_t kChunk = 1u << 16;
    const std::uint64_t chunks = (strategy.budget + kChunk - 1) / kChunk;
    std::vector<NeumaierSum> partial(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        std::mt19937_64 rng(mix_seed(strategy.seed, c));
        const std::uint64_t count = std::min(kChunk, strategy.budget - c * kChunk);
        auto below = [&](std::size_t m) { return std::min<std::size_t>(m - 1, std::size_t(uniform01(rng) * double(m))); };
        for (std::uint64_t s = 0; s < count; ++s) {
            std::size_t k1 = below(ns);
            std::size_t k2 = below(ns - 1);
            if (k2 >= k1) ++k2;
            std::size_t k3 = 0;
            if (order == 3) {
                std::size_t lo = std::min(k1, k2), hi = std::max(k1, k2);
                k3 = below(ns - 2);
                if (k3 >= lo) ++k3;
                if (k3 >= hi) ++k3;
            }
            partial[c].add(tuple_value(k1, k2, k3));
        }
    });
    NeumaierSum total;
    for (const auto &p : partial) total.merge(p);
    return total.value() / double(strategy.budget);
}

PptCertificate p3_ppt_certificate(const ShadowSet &shadows, const SubsystemMask &a, const TupleStrategy &strategy,
                                  int threads) {
    PptCertificate c;
    c.p2 = pt_moment_ustat(shadows, a, 2, TupleStrategy::full(), threads);
    c.p3 = pt_moment_ustat(shadows, a, 3, strategy, threads);
    c.margin = c.p2 * c.p2 - c.p3;
    c.entangled = c.margin > 0.0;
    return c;
}

PurityCertificate purity_certificate(const ShadowSet &shadows, const SubsystemMask &a, int threads) {
    PurityCertificate c;
    c.purity_a = purity_ustat(shadows, a, threads);
    c.purity_full = purity_ustat(shadows, SubsystemMask::all(shadows.n), threads);
    c.flag = c.purity_a < c.purity_full;
    return c;
}

}  // namespace qmeas
