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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace qmeas {

inline constexpr int kMaxQubits = 16;

enum class Letter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Letter l);
Letter letter_from_char(char c);

/// n-qubit tensor product over {I,X,Y,Z}.
///
/// Stored as two bit-planes: site i has its X component in bit i of `x_` and
/// its Z component in bit i of `z_` (Y sets both). Site 0 is the leftmost
/// character of the text form.
class PauliString {
   public:
    PauliString() = default;
    /// Identity on n qubits.
    explicit PauliString(int n);
    PauliString(int n, std::uint32_t x_mask, std::uint32_t z_mask);

    /// Parses uppercase text such as "XZYI". Throws InvalidArgument.
    static PauliString parse(std::string_view text);

    int num_qubits() const noexcept {
        return n_;
    }
    std::uint32_t x_mask() const noexcept {
        return x_;
    }
    std::uint32_t z_mask() const noexcept {
        return z_;
    }
    /// Sites carrying a non-identity letter.
    std::uint32_t support() const noexcept {
        return x_ | z_;
    }
    int weight() const noexcept;
    bool is_identity() const noexcept {
        return support() == 0;
    }
    /// True when no site carries I (a measurable basis).
    bool is_full_weight() const noexcept;

    Letter operator[](int site) const noexcept;
    void set(int site, Letter l);

    std::string str() const;

    /// Packed key, unique per (n, letters).
    std::uint64_t key() const noexcept {
        return (std::uint64_t(n_) << 58) | (std::uint64_t(x_) << 16) | z_;
    }

    friend bool operator==(const PauliString &a, const PauliString &b) noexcept {
        return a.n_ == b.n_ && a.x_ == b.x_ && a.z_ == b.z_;
    }
    friend bool operator<(const PauliString &a, const PauliString &b) noexcept {
        return a.key() < b.key();
    }

   private:
    int n_ = 0;
    std::uint32_t x_ = 0;
    std::uint32_t z_ = 0;
};

/// Pauli string with a fourth-root-of-unity phase, stored as an exponent of i.
struct PhasedPauli {
    int phase_exponent = 0;  // phase = i^phase_exponent, in [0, 4)
    PauliString pauli;
};

/// Product a*b with its phase. Throws DimensionError on length mismatch.
PhasedPauli multiply(const PauliString &a, const PauliString &b);

/// True iff `basis` measures `obs`: each site of obs is I or equals basis.
bool hits(const PauliString &basis, const PauliString &obs);

/// True iff a common hitting basis exists (sitewise equal or identity).
bool compatible(const PauliString &a, const PauliString &b);

struct PauliTerm {
    double coefficient = 0.0;
    PauliString pauli;
};

/// Real-weighted sum of distinct Pauli strings on a common qubit count.
class WeightedPauliSum {
   public:
    WeightedPauliSum() = default;
    explicit WeightedPauliSum(int n) : n_(n) {
    }
    /// Validates: equal n, no duplicates, no zero coefficient.
    WeightedPauliSum(int n, std::vector<PauliTerm> terms);

    /// Adds into an existing term if present; drops it if it collapses to zero.
    void accumulate(const PauliString &p, double coefficient);

    int num_qubits() const noexcept {
        return n_;
    }
    std::size_t size() const noexcept {
        return terms_.size();
    }
    bool empty() const noexcept {
        return terms_.empty();
    }
    const std::vector<PauliTerm> &terms() const noexcept {
        return terms_;
    }
    const PauliTerm &operator[](std::size_t i) const {
        return terms_[i];
    }

    double l1_norm() const;
    /// Coefficient of the all-identity term, 0 if absent.
    double identity_coefficient() const;
    /// Index list of terms with nonempty support.
    std::vector<std::size_t> non_identity_indices() const;

   private:
    int n_ = 0;
    std::vector<PauliTerm> terms_;
};

/// H*H with coefficients collected; terms below `threshold` are dropped.
WeightedPauliSum square(const WeightedPauliSum &h, double threshold = 1e-12);

}  // namespace qmeas

template <>
struct std::hash<qmeas::PauliString> {
    std::size_t operator()(const qmeas::PauliString &p) const noexcept {
        return std::hash<std::uint64_t>{}(p.key());
    }
};
