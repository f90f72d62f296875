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

#include "qmeas/pauli.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <map>

#include "qmeas/error.hpp"

namespace qmeas {

namespace {

void require_same_size(const PauliString &a, const PauliString &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw DimensionError("Pauli strings of different length: " + a.str() + " vs " + b.str());
    }
}

std::uint32_t full_mask(int n) {
    return n >= 32 ? 0xFFFFFFFFu : ((1u << n) - 1u);
}

// Single-site product table: (phase exponent of i, resulting letter).
struct SiteProduct {
    int phase;
    Letter letter;
};
constexpr SiteProduct kSiteProducts[4][4] = {
    {{0, Letter::I}, {0, Letter::X}, {0, Letter::Y}, {0, Letter::Z}},
    {{0, Letter::X}, {0, Letter::I}, {1, Letter::Z}, {3, Letter::Y}},
    {{0, Letter::Y}, {3, Letter::Z}, {0, Letter::I}, {1, Letter::X}},
    {{0, Letter::Z}, {1, Letter::Y}, {3, Letter::X}, {0, Letter::I}},
};

}  // namespace

char to_char(Letter l) {
    static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
    return kChars[static_cast<int>(l)];
}

Letter letter_from_char(char c) {
    switch (c) {
        case 'I':
            return Letter::I;
        case 'X':
            return Letter::X;
        case 'Y':
            return Letter::Y;
        case 'Z':
            return Letter::Z;
        default:
            throw InvalidArgument(std::string("not a Pauli letter: '") + c + "'");
    }
}

PauliString::PauliString(int n) : n_(n) {
    if (n < 1 || n > kMaxQubits) {
        throw InvalidArgument("qubit count out of range [1, 16]: " + std::to_string(n));
    }
}

PauliString::PauliString(int n, std::uint32_t x_mask, std::uint32_t z_mask) : PauliString(n) {
    if ((x_mask | z_mask) & ~full_mask(n)) {
        throw InvalidArgument("Pauli bit-plane exceeds qubit count");
    }
    x_ = x_mask;
    z_ = z_mask;
}

PauliString PauliString::parse(std::string_view text) {
    PauliString p(static_cast<int>(text.size()));
    for (int i = 0; i < p.n_; ++i) {
        p.set(i, letter_from_char(text[i]));
    }
    return p;
}

int PauliString::weight() const noexcept {
    return std::popcount(support());
}

bool PauliString::is_full_weight() const noexcept {
    return support() == full_mask(n_);
}

Letter PauliString::operator[](int site) const noexcept {
    int xb = (x_ >> site) & 1u;
    int zb = (z_ >> site) & 1u;
    if (xb && zb) return Letter::Y;
    if (xb) return Letter::X;
    if (zb) return Letter::Z;
    return Letter::I;
}

void PauliString::set(int site, Letter l) {
    if (site < 0 || site >= n_) {
        throw InvalidArgument("site index out of range: " + std::to_string(site));
    }
    std::uint32_t bit = 1u << site;
    x_ &= ~bit;
    z_ &= ~bit;
    if (l == Letter::X || l == Letter::Y) x_ |= bit;
    if (l == Letter::Z || l == Letter::Y) z_ |= bit;
}

std::string PauliString::str() const {
    std::string s(n_, 'I');
    for (int i = 0; i < n_; ++i) {
        s[i] = to_char((*this)[i]);
    }
    return s;
}

PhasedPauli multiply(const PauliString &a, const PauliString &b) {
    require_same_size(a, b);
    PhasedPauli out{0, PauliString(a.num_qubits())};
    for (int i = 0; i < a.num_qubits(); ++i) {
        const auto &sp = kSiteProducts[static_cast<int>(a[i])][static_cast<int>(b[i])];
        out.phase_exponent += sp.phase;
        out.pauli.set(i, sp.letter);
    }
    out.phase_exponent &= 3;
    return out;
}

bool hits(const PauliString &basis, const PauliString &obs) {
    require_same_size(basis, obs);
    std::uint32_t diff = (basis.x_mask() ^ obs.x_mask()) | (basis.z_mask() ^ obs.z_mask());
    return (diff & obs.support()) == 0;
}

bool compatible(const PauliString &a, const PauliString &b) {
    require_same_size(a, b);
    std::uint32_t diff = (a.x_mask() ^ b.x_mask()) | (a.z_mask() ^ b.z_mask());
    return (diff & a.support() & b.support()) == 0;
}

WeightedPauliSum::WeightedPauliSum(int n, std::vector<PauliTerm> terms) : n_(n) {
    std::map<std::uint64_t, std::size_t> seen;
    for (auto &t : terms) {
        if (t.pauli.num_qubits() != n) {
            throw DimensionError("term " + t.pauli.str() + " does not act on " + std::to_string(n) + " qubits");
        }
        if (t.coefficient == 0.0 || !std::isfinite(t.coefficient)) {
            throw InvalidArgument("zero or non-finite coefficient on term " + t.pauli.str());
        }
        if (!seen.emplace(t.pauli.key(), terms_.size()).second) {
            throw InvalidArgument("duplicate Pauli term " + t.pauli.str());
        }
        terms_.push_back(std::move(t));
    }
}

void WeightedPauliSum::accumulate(const PauliString &p, double coefficient) {
    if (p.num_qubits() != n_) {
        throw DimensionError("term " + p.str() + " does not act on " + std::to_string(n_) + " qubits");
    }
    for (auto it = terms_.begin(); it != terms_.end(); ++it) {
        if (it->pauli == p) {
            it->coefficient += coefficient;
            if (it->coefficient == 0.0) terms_.erase(it);
            return;
        }
    }
    if (coefficient != 0.0) terms_.push_back({coefficient, p});
}

double WeightedPauliSum::l1_norm() const {
    double s = 0.0;
    for (const auto &t : terms_) s += std::abs(t.coefficient);
    return s;
}

double WeightedPauliSum::identity_coefficient() const {
    for (const auto &t : terms_) {
        if (t.pauli.is_identity()) return t.coefficient;
    }
    return 0.0;
}

std::vector<std::size_t> WeightedPauliSum::non_identity_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!terms_[i].pauli.is_identity()) out.push_back(i);
    }
    return out;
}

WeightedPauliSum square(const WeightedPauliSum &h, double threshold) {
    static const std::complex<double> kPhase[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    // Ordered map keeps the output term order deterministic.
    std::map<std::uint64_t, std::pair<PauliString, std::complex<double>>> acc;
    for (const auto &a : h.terms()) {
        for (const auto &b : h.terms()) {
            PhasedPauli p = multiply(a.pauli, b.pauli);
            auto [it, inserted] = acc.try_emplace(p.pauli.key(), p.pauli, 0.0);
            it->second.second += a.coefficient * b.coefficient * kPhase[p.phase_exponent];
        }
    }
    std::vector<PauliTerm> terms;
    for (const auto &[key, entry] : acc) {
        // Anticommuting pairs contribute +i and -i; only the real part survives.
        double c = entry.second.real();
        if (std::abs(c) >= threshold) terms.push_back({c, entry.first});
    }
    return WeightedPauliSum(h.num_qubits(), std::move(terms));
}

}  // namespace qmeas
