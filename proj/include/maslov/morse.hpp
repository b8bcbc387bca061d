#pragma once
// Morse-type counts of non-degenerate closed characteristics and the
// multiplicity thresholds.

#include "index_jump.hpp"

#include <map>

namespace maslov {

/// Iterates of one prime orbit in the Ekeland convention:
/// table[m-1] = (i(y^m), nu(y^m)) = (i(y,m) - n, nu(y,m)).
struct MorseOrbit {
    std::string name;
    std::vector<std::pair<long long, int>> table;
    long long next_index = std::numeric_limits<long long>::max(); // i(y^{m_max+1}); max when unknown
};

/// Tabulates iterates until the Ekeland index exceeds q_max (at most
/// m_cap of them) and records the index of the first omitted iterate.
inline MorseOrbit morse_orbit(const OrbitIndexData& o, int n, long long q_max, const std::string& name = "",
                              int m_cap = 100000)
{
    MorseOrbit mo;
    mo.name = name;
    int m = 1;
    for (; m <= m_cap; ++m) {
        long long i = o.index(m) - n;
        if (i > q_max && m > 1) break;
        mo.table.emplace_back(i, o.nullity(m));
    }
    mo.next_index = o.index(m) - n;
    return mo;
}

struct MorseSeries {
    long long q_max = 0;
    std::vector<long long> M; // q = 0..q_max
    std::vector<int> b;
    long long cutoff_safe_q = 0;
    std::vector<std::string> contributions; // "orbit m -> q"

    long long M_at(long long q) const { return q < 0 || q > q_max ? 0 : M[q]; }
    int b_at(long long q) const { return q < 0 || q > q_max ? 0 : b[q]; }
};

struct DegenerateIterateError : Error {
    using Error::Error;
};

/// Betti numbers of the equivariant free loop space quotient: 1 at even q >= 0.
inline int betti_number(long long q) { return q >= 0 && q % 2 == 0 ? 1 : 0; }

/// M_q counts iterates y_j^m with i(y_j^m) = q and
/// (-1)^{i(y_j^m) - i(y_j)} = 1.
inline MorseSeries morse_series(const std::vector<MorseOrbit>& orbits, long long q_max)
{
    if (q_max < 0) throw InputError("q_max must be non-negative");
    MorseSeries s;
    s.q_max = q_max;
    s.M.assign(q_max + 1, 0);
    s.b.resize(q_max + 1);
    for (long long q = 0; q <= q_max; ++q) s.b[q] = betti_number(q);
    s.cutoff_safe_q = q_max;
    for (const auto& o : orbits) {
        if (o.table.empty()) throw InputError("orbit " + o.name + " has an empty index table");
        s.cutoff_safe_q = std::min(s.cutoff_safe_q, o.next_index - 1);
        const long long i1 = o.table.front().first;
        for (size_t k = 0; k < o.table.size(); ++k) {
            auto [i, nu] = o.table[k];
            if (i > q_max) continue;
            if (nu != 1)
                throw DegenerateIterateError("orbit " + o.name + " iterate m = " + std::to_string(k + 1) +
                                             " is degenerate (nullity " + std::to_string(nu) +
                                             "); critical modules of degenerate iterates are not supported");
            if (i < 0) continue;
            if ((i - i1) % 2 == 0) {
                ++s.M[i];
                s.contributions.push_back(o.name + " m=" + std::to_string(k + 1) + " -> q=" + std::to_string(i));
            }
        }
    }
    std::sort(s.contributions.begin(), s.contributions.end());
    return s;
}

struct MorseRow {
    long long q = 0;
    long long M = 0;
    int b = 0;
    long long margin = 0;             // M_q - b_q
    long long alternating_margin = 0; // sum (-1)^{q-k} (M_k - b_k)
    bool perfect = false;             // M_q == b_q
};

struct MorseReport {
    bool holds = true;
    bool perfect_at_even = true;
    long long checked_up_to = -1;
    std::vector<MorseRow> rows;
    std::vector<std::string> violations;
};

/// M_q >= b_q and the alternating-sum inequality for every
/// 0 <= q <= min(q_max, cutoff_safe_q).
inline MorseReport check_morse_inequalities(const MorseSeries& s)
{
    MorseReport r;
    r.checked_up_to = std::min(s.q_max, s.cutoff_safe_q);
    for (long long q = 0; q <= r.checked_up_to; ++q) {
        MorseRow row;
        row.q = q;
        row.M = s.M_at(q);
        row.b = s.b_at(q);
        row.margin = row.M - row.b;
        for (long long k = 0; k <= q; ++k) row.alternating_margin += ((q - k) % 2 ? -1 : 1) * (s.M_at(k) - s.b_at(k));
        row.perfect = row.M == row.b;
        if (row.margin < 0) {
            r.holds = false;
            r.violations.push_back("M_" + std::to_string(q) + " < b_" + std::to_string(q));
        }
        if (row.alternating_margin < 0) {
            r.holds = false;
            r.violations.push_back("alternating sum fails at q = " + std::to_string(q));
        }
        if (q % 2 == 0 && !row.perfect) r.perfect_at_even = false;
        r.rows.push_back(row);
    }
    return r;
}

struct MultiplicityReport {
    int n = 0;
    int distinct = 0;
    int non_hyperbolic = 0;
    int elliptic = 0;
    int threshold_distinct = 0;       // [(n+1)/2] + 1
    int threshold_non_hyperbolic = 0; // [n/2] + 1
    bool distinct_pass = false;
    bool non_hyperbolic_pass = false;
    std::optional<long long> rho;
    bool all_pass() const { return distinct_pass && non_hyperbolic_pass; }
};

struct MultiplicityInput {
    bool prime = true;
    bool hyperbolic = false;
    bool elliptic = false;
    RhoInput rho;
};

inline MultiplicityReport multiplicity_report(const std::vector<MultiplicityInput>& orbits, int n)
{
    if (n < 1) throw InputError("n must be positive");
    MultiplicityReport r;
    r.n = n;
    std::vector<RhoInput> rho_in;
    for (const auto& o : orbits) {
        if (!o.prime) continue;
        ++r.distinct;
        if (!o.hyperbolic) ++r.non_hyperbolic;
        if (o.elliptic) ++r.elliptic;
        rho_in.push_back(o.rho);
    }
    r.threshold_distinct = (n + 1) / 2 + 1;
    r.threshold_non_hyperbolic = n / 2 + 1;
    r.distinct_pass = r.distinct >= r.threshold_distinct;
    r.non_hyperbolic_pass = r.non_hyperbolic >= r.threshold_non_hyperbolic;
    if (!rho_in.empty()) r.rho = rho_n(rho_in, n);
    return r;
}

} // namespace maslov
