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

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "qmeas/error.hpp"

namespace qmeas {

namespace {

// Splits a line into whitespace-separated tokens; '#' starts a comment.
std::vector<std::string> tokens_of(const std::string &line) {
    std::string body = line.substr(0, line.find('#'));
    std::istringstream ss(body);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_real(const std::string &text, std::size_t line) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParseError("not a finite number: '" + text + "'", line);
    }
    return v;
}

std::uint64_t parse_unsigned(const std::string &text, std::size_t line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParseError("not a nonnegative integer: '" + text + "'", line);
    }
    return v;
}

PauliString parse_pauli(const std::string &text, std::size_t line) {
    try {
        return PauliString::parse(text);
    } catch (const Error &e) {
        throw ParseError(e.what(), line);
    }
}

std::vector<std::size_t> parse_index_list(const std::string &text, std::size_t line) {
    std::vector<std::size_t> out;
    if (text == "-") return out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        out.push_back(parse_unsigned(text.substr(start, comma - start), line));
        start = comma + 1;
    }
    return out;
}

std::string join_indices(const std::vector<std::size_t> &v) {
    if (v.empty()) return "-";
    return fmt::format("{}", fmt::join(v, ","));
}

std::ifstream open_input(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return in;
}

template <typename Fn>
auto with_path(const std::string &path, Fn &&fn) {
    auto in = open_input(path);
    try {
        return fn(in);
    } catch (const ParseError &e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

}  // namespace

std::string format_double(double v) {
    return fmt::format("{:.17g}", v);
}

HamiltonianFile parse_hamiltonian(std::istream &in) {
    HamiltonianFile out;
    int n = 0;
    std::vector<PauliTerm> terms;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokens_of(line);
        if (tok.empty()) continue;
        if (tok[0] == "name") {
            if (tok.size() != 2) throw ParseError("expected 'name <text>'", lineno);
            out.name = tok[1];
            continue;
        }
        if (tok[0] == "n") {
            if (tok.size() != 2 || n != 0) throw ParseError("expected a single 'n <int>' header", lineno);
            auto v = parse_unsigned(tok[1], lineno);
            if (v < 1 || v > std::uint64_t(kMaxQubits)) throw ParseError("qubit count out of range", lineno);
            n = int(v);
            continue;
        }
        if (n == 0) throw ParseError("term before the 'n <int>' header", lineno);
        if (tok.size() != 2) throw ParseError("expected '<coefficient> <pauli>'", lineno);
        double c = parse_real(tok[0], lineno);
        PauliString p = parse_pauli(tok[1], lineno);
        if (p.num_qubits() != n) {
            throw ParseError("term " + tok[1] + " has " + std::to_string(p.num_qubits()) + " letters, header says " +
                                 std::to_string(n),
                             lineno);
        }
        for (const auto &t : terms) {
            if (t.pauli == p) throw ParseError("duplicate term " + tok[1], lineno);
        }
        if (c == 0.0) throw ParseError("zero coefficient on " + tok[1], lineno);
        terms.push_back({c, p});
    }
    if (n == 0) throw ParseError("missing 'n <int>' header", 0);
    out.op = WeightedPauliSum(n, std::move(terms));
    return out;
}

HamiltonianFile read_hamiltonian(const std::string &path) {
    return with_path(path, [](std::istream &in) { return parse_hamiltonian(in); });
}

void write_hamiltonian(std::ostream &out, const HamiltonianFile &h) {
    if (!h.name.empty()) out << "name " << h.name << "\n";
    out << "n " << h.op.num_qubits() << "\n";
    for (const auto &t : h.op.terms()) out << format_double(t.coefficient) << " " << t.pauli.str() << "\n";
}

WeightedPauliSum builtin_hamiltonian(std::string_view name, const BuiltinParams &p) {
    constexpr int n = 4;
    WeightedPauliSum h(n);
    auto add = [&](std::initializer_list<std::pair<int, Letter>> sites, double c) {
        if (c == 0.0) return;
        PauliString s(n);
        for (auto [i, l] : sites) s.set(i % n, l);
        h.accumulate(s, c);
    };
    if (name == "lattice4") {
        for (int i = 0; i < n; ++i) {
            add({{i, Letter::Z}, {i + 1, Letter::Z}}, p.j);
            add({{i, Letter::X}, {i + 1, Letter::Y}}, p.j);
            add({{i, Letter::Y}, {i + 1, Letter::Z}}, p.j);
            add({{i, Letter::X}, {i + 1, Letter::Z}}, p.j);
        }
        for (int i = 0; i < n; ++i) add({{i, Letter::X}}, p.h);
        return h;
    }
    if (name == "cluster4") {
        for (int i = 0; i < n; ++i) add({{i, Letter::Z}, {i + 1, Letter::X}, {i + 2, Letter::Z}}, p.j);
        for (int i = 0; i < n; ++i) add({{i, Letter::X}}, p.h1);
        for (int i = 0; i < n; ++i) add({{i, Letter::Y}, {i + 1, Letter::Y}}, p.h2);
        return h;
    }
    throw InvalidArgument("unknown builtin Hamiltonian '" + std::string(name) + "' (expected lattice4 or cluster4)");
}

HamiltonianFile load_hamiltonian(const std::string &spec, const BuiltinParams &params) {
    constexpr std::string_view kPrefix = "builtin:";
    if (spec.rfind(kPrefix, 0) == 0) {
        std::string name = spec.substr(kPrefix.size());
        return {name, builtin_hamiltonian(name, params)};
    }
    return read_hamiltonian(spec);
}

std::string format_bits(std::uint32_t bits, int n) {
    std::string s(n, '0');
    for (int i = 0; i < n; ++i) {
        if ((bits >> i) & 1u) s[i] = '1';
    }
    return s;
}

std::uint32_t parse_bits(std::string_view text) {
    if (text.empty() || text.size() > std::size_t(kMaxQubits)) throw InvalidArgument("bad outcome bit-string length");
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1') {
            bits |= 1u << i;
        } else if (text[i] != '0') {
            throw InvalidArgument("outcome bits must be 0 or 1: '" + std::string(text) + "'");
        }
    }
    return bits;
}

std::vector<ShotRecord> parse_records(std::istream &in) {
    std::vector<ShotRecord> out;
    int n = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokens_of(line);
        if (tok.empty()) continue;
        if (tok.size() < 2 || tok.size() > 3) throw ParseError("expected '<pauli> <bits> [reps]'", lineno);
        PauliString basis = parse_pauli(tok[0], lineno);
        if (n == 0) n = basis.num_qubits();
        if (basis.num_qubits() != n || tok[1].size() != std::size_t(n)) {
            throw ParseError("record length differs from the file's " + std::to_string(n) + " qubits", lineno);
        }
        if (!basis.is_full_weight()) throw ParseError("record basis " + tok[0] + " contains an identity letter", lineno);
        ShotRecord r{basis, 0, 1};
        try {
            r.bits = parse_bits(tok[1]);
        } catch (const Error &e) {
            throw ParseError(e.what(), lineno);
        }
        if (tok.size() == 3) {
            auto reps = parse_unsigned(tok[2], lineno);
            if (reps < 1 || reps > 0xFFFFFFFFull) throw ParseError("reps must be at least 1", lineno);
            r.reps = std::uint32_t(reps);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<ShotRecord> read_records(const std::string &path) {
    return with_path(path, [](std::istream &in) { return parse_records(in); });
}

void write_records(std::ostream &out, const std::vector<ShotRecord> &records) {
    for (const auto &r : records) {
        out << r.basis.str() << " " << format_bits(r.bits, r.basis.num_qubits());
        if (r.reps != 1) out << " " << r.reps;
        out << "\n";
    }
}

MeasurementPlan parse_plan(std::istream &in) {
    MeasurementPlan plan;
    bool have_scheme = false;
    std::vector<ExplicitBasis> entries;
    std::vector<LetterTriple> triples;
    std::vector<bool> triple_seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokens_of(line);
        if (tok.empty()) continue;
        const std::string &key = tok[0];
        if (key == "scheme" && tok.size() == 2) {
            try {
                plan.scheme = scheme_from_tag(tok[1]);
            } catch (const Error &e) {
                throw ParseError(e.what(), lineno);
            }
            have_scheme = true;
        } else if (key == "n" && tok.size() == 2) {
            auto v = parse_unsigned(tok[1], lineno);
            if (v < 1 || v > std::uint64_t(kMaxQubits)) throw ParseError("qubit count out of range", lineno);
            plan.n = int(v);
            triples.assign(plan.n, {0.0, 0.0, 0.0});
            triple_seen.assign(plan.n, false);
        } else if (plan.n == 0) {
            throw ParseError("'" + key + "' before the 'n <int>' header", lineno);
        } else if (key == "basis" && tok.size() == 4) {
            entries.push_back({parse_pauli(tok[1], lineno), parse_real(tok[2], lineno), parse_index_list(tok[3], lineno)});
        } else if (key == "qubit" && tok.size() == 5) {
            auto i = parse_unsigned(tok[1], lineno);
            if (i >= std::uint64_t(plan.n) || triple_seen[i]) throw ParseError("bad or repeated qubit index", lineno);
            triples[i] = {parse_real(tok[2], lineno), parse_real(tok[3], lineno), parse_real(tok[4], lineno)};
            triple_seen[i] = true;
        } else if (key == "fixed" && tok.size() == 2) {
            PauliString p = parse_pauli(tok[1], lineno);
            if (p.num_qubits() != plan.n || !p.is_full_weight()) {
                throw ParseError("fixed basis must be full weight on n qubits", lineno);
            }
            plan.fixed_bases.push_back(p);
        } else if (key == "unhit" && tok.size() == 2) {
            plan.unhit_terms = parse_index_list(tok[1], lineno);
        } else if (key == "converged" && tok.size() == 2) {
            plan.converged = parse_unsigned(tok[1], lineno) != 0;
        } else {
            throw ParseError("unrecognized manifest line", lineno);
        }
    }
    if (!have_scheme || plan.n == 0) throw ParseError("manifest needs 'scheme' and 'n' lines", 0);
    try {
        switch (plan.scheme) {
            case Scheme::L1:
            case Scheme::LDF:
                if (entries.empty()) throw ParseError("explicit plan without basis lines", 0);
                plan.distribution = BasisDistribution::explicit_list(plan.n, std::move(entries));
                break;
            case Scheme::UniformCS:
            case Scheme::LBCS:
                for (bool seen : triple_seen) {
                    if (!seen) throw ParseError("product plan is missing a qubit line", 0);
                }
                plan.distribution = BasisDistribution::product(std::move(triples));
                break;
            case Scheme::Derandomized:
                if (plan.fixed_bases.empty()) throw ParseError("derandomized plan without fixed lines", 0);
                break;
        }
    } catch (const ParseError &) {
        throw;
    } catch (const Error &e) {
        throw ParseError(e.what(), 0);
    }
    return plan;
}

MeasurementPlan read_plan(const std::string &path) {
    return with_path(path, [](std::istream &in) { return parse_plan(in); });
}

void write_plan(std::ostream &out, const MeasurementPlan &plan) {
    out << "scheme " << scheme_tag(plan.scheme) << "\n";
    out << "n " << plan.n << "\n";
    if (!plan.converged) out << "converged 0\n";
    if (plan.distribution) {
        const auto &d = *plan.distribution;
        if (d.kind() == BasisDistribution::Kind::Explicit) {
            for (const auto &e : d.entries()) {
                out << "basis " << e.basis.str() << " " << format_double(e.prob) << " " << join_indices(e.members)
                    << "\n";
            }
        } else {
            for (int i = 0; i < d.num_qubits(); ++i) {
                const auto &t = d.triples()[i];
                out << "qubit " << i << " " << format_double(t[0]) << " " << format_double(t[1]) << " "
                    << format_double(t[2]) << "\n";
            }
        }
    }
    for (const auto &b : plan.fixed_bases) out << "fixed " << b.str() << "\n";
    if (!plan.unhit_terms.empty()) out << "unhit " << join_indices(plan.unhit_terms) << "\n";
}

std::vector<PauliString> local_paulis(int n, int max_locality) {
    if (n < 1 || n > kMaxQubits) throw InvalidArgument("qubit count out of range");
    if (max_locality < 1 || max_locality > 2) throw InvalidArgument("locality must be 1 or 2");
    static constexpr Letter kLetters[3] = {Letter::X, Letter::Y, Letter::Z};
    std::vector<PauliString> out;
    for (int i = 0; i < n; ++i) {
        for (Letter a : kLetters) {
            PauliString p(n);
            p.set(i, a);
            out.push_back(p);
        }
    }
    if (max_locality >= 2) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                for (Letter a : kLetters) {
                    for (Letter b : kLetters) {
                        PauliString p(n);
                        p.set(i, a);
                        p.set(j, b);
                        out.push_back(p);
                    }
                }
            }
        }
    }
    return out;
}

std::vector<PauliString> observable_pool(int n, std::size_t count, std::uint64_t seed, int max_locality) {
    auto all = local_paulis(n, max_locality);
    if (count < 1 || count > all.size()) {
        throw InvalidArgument("pool size must lie in 1.." + std::to_string(all.size()));
    }
    // Partial Fisher-Yates with a portable index draw.
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < count; ++k) {
        std::size_t span = all.size() - k;
        std::size_t pick = k + std::min(span - 1, std::size_t(uniform01(rng) * double(span)));
        std::swap(all[k], all[pick]);
    }
    all.resize(count);
    return all;
}

std::vector<PauliString> parse_observable_list(std::istream &in) {
    std::vector<PauliString> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = tokens_of(line);
        if (tok.empty()) continue;
        if (tok.size() != 1) throw ParseError("expected one Pauli string per line", lineno);
        PauliString p = parse_pauli(tok[0], lineno);
        if (!out.empty() && p.num_qubits() != out.front().num_qubits()) {
            throw ParseError("observable length differs from the first line", lineno);
        }
        if (p.is_identity()) throw ParseError("identity is not an observable to estimate", lineno);
        for (const auto &q : out) {
            if (q == p) throw ParseError("duplicate observable " + tok[0], lineno);
        }
        out.push_back(p);
    }
    if (out.empty()) throw ParseError("observable list is empty", 0);
    return out;
}

SubsystemMask parse_mask(int n, std::string_view text) {
    bool bitstring = text.size() == std::size_t(n) && text.find(',') == std::string_view::npos &&
                     text.find_first_not_of("01") == std::string_view::npos;
    if (bitstring && n > 1) {
        return SubsystemMask(n, parse_bits(text));
    }
    std::vector<int> labels;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        std::string_view part = text.substr(start, comma - start);
        int v = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || ptr != part.data() + part.size()) {
            throw InvalidArgument("bad subsystem mask '" + std::string(text) + "'");
        }
        labels.push_back(v);
        start = comma + 1;
    }
    return SubsystemMask::from_labels(n, labels);
}

std::vector<SubsystemMask> proper_masks(int n) {
    std::vector<SubsystemMask> out;
    for (std::uint32_t b = 1; b + 1 < (1u << n); ++b) out.emplace_back(n, b);
    return out;
}

std::vector<SubsystemMask> bipartitions(int n) {
    std::vector<SubsystemMask> out;
    for (std::uint32_t b = 1; b + 1 < (1u << n); ++b) {
        if (b & 1u) out.emplace_back(n, b);
    }
    return out;
}

}  // namespace qmeas
