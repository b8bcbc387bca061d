#pragma once
// Common index jump search, the rho_n estimator and the iterated index
// sum estimate.

#include "normal_form.hpp"

#include <limits>
#include <optional>

namespace maslov {

/// Closed-form data of one orbit: normal-form data of gamma(tau) plus
/// i(y, 1) and nu(y, 1).
struct OrbitIndexData {
    NormalFormDecomposition d;
    int i1 = 0;
    int nu1 = 0;
    int splus = 0; // S+ of gamma(tau) at 1

    static OrbitIndexData make(const NormalFormDecomposition& d, int i1, int nu1)
    {
        check_parity(d, i1);
        return {d, i1, nu1, splitting_numbers(d, 1.0).s_plus};
    }

    long long index(int m) const { return iteration_index(d, i1, m); }
    int nullity(int m) const { return iteration_nullity(d, nu1, m); }
    double mean() const { return mean_index(d, i1); }
    int e() const { return d.e(); }
    int s_plus() const { return splus; }
};

struct JumpChecks {
    bool lower = false;     // i(2m) >= 2T - e/2
    bool upper = false;     // i(2m) + nu(2m) <= 2T + e/2 - 1
    bool next = false;      // i(2m+1) = 2T + i(1)
    bool previous = false;  // i(2m-1) + nu(2m-1) = 2T - (i(1) + 2S+ - nu(1))
    bool all() const { return lower && upper && next && previous; }
};

struct JumpCertificate {
    bool found = false;
    long long T = 0;
    std::vector<int> m;
    std::vector<JumpChecks> checks;
    int search_bound = 0;
    int window = 0;
};

inline JumpChecks check_jump(const OrbitIndexData& o, long long T, int m)
{
    JumpChecks c;
    if (m < 1) return c;
    const long long e = o.e();
    const long long i2 = o.index(2 * m);
    const long long n2 = o.nullity(2 * m);
    // e is even, so e/2 is exact
    c.lower = i2 >= 2 * T - e / 2;
    c.upper = i2 + n2 <= 2 * T + e / 2 - 1;
    c.next = o.index(2 * m + 1) == 2 * T + o.i1;
    c.previous = o.index(2 * m - 1) + o.nullity(2 * m - 1) == 2 * T - (o.i1 + 2 * o.s_plus() - o.nu1);
    return c;
}

/// Smallest T <= bound for which every orbit has some m_j in a window around
/// T / mean_j satisfying all four conditions.  The window is +-2 and is
/// widened to +-8 if nothing is found.
inline JumpCertificate find_common_jump(const std::vector<OrbitIndexData>& orbits, int bound)
{
    if (orbits.empty()) throw InputError("find_common_jump needs at least one orbit");
    if (bound < 1) throw InputError("search bound must be positive");
    std::vector<double> means;
    for (const auto& o : orbits) {
        double mi = o.mean();
        if (!(mi > 0)) throw InputError("every orbit needs a positive mean index");
        means.push_back(mi);
    }
    for (int window : {2, 8}) {
        for (long long T = 1; T <= bound; ++T) {
            JumpCertificate c;
            bool ok = true;
            for (size_t j = 0; j < orbits.size() && ok; ++j) {
                // 1e-9 guard band only shifts the centre of the candidate window
                long long centre = std::llround(double(T) / means[j] + 1e-9);
                bool hit = false;
                for (long long m = std::max<long long>(1, centre - window); m <= centre + window; ++m) {
                    auto ch = check_jump(orbits[j], T, static_cast<int>(m));
                    if (ch.all()) {
                        c.m.push_back(static_cast<int>(m));
                        c.checks.push_back(ch);
                        hit = true;
                        break;
                    }
                }
                ok = hit;
            }
            if (ok) {
                c.found = true;
                c.T = T;
                c.search_bound = bound;
                c.window = window;
                return c;
            }
        }
    }
    JumpCertificate none;
    none.search_bound = bound;
    none.window = 8;
    return none;
}

/// Re-evaluates every condition of a certificate from the closed forms.
inline bool verify_certificate(const JumpCertificate& c, const std::vector<OrbitIndexData>& orbits)
{
    if (!c.found || c.m.size() != orbits.size()) return false;
    for (size_t j = 0; j < orbits.size(); ++j)
        if (!check_jump(orbits[j], c.T, c.m[j]).all()) return false;
    return true;
}

struct RhoInput {
    int i1 = 0;
    int s_plus = 0;
    int nu1 = 0;
};

/// min over orbits of [(i(x,1) + 2 S+(x) - nu(x,1) + n) / 2].
inline long long rho_n(const std::vector<RhoInput>& orbits, int n)
{
    if (orbits.empty()) throw InputError("rho_n of an empty orbit set is unbounded");
    long long best = std::numeric_limits<long long>::max();
    for (const auto& o : orbits) {
        long long num = static_cast<long long>(o.i1) + 2 * o.s_plus - o.nu1 + n;
        long long v = num >= 0 ? num / 2 : -((-num + 1) / 2);
        best = std::min(best, v);
    }
    return best;
}

struct IndexSumReport {
    bool holds = true;      // i(m) + nu(m) <= i(m+1) - i(1) + e/2 - 1 for all m
    bool weak_holds = true; // i(m) + nu(m) <= i(m+1) - 1 for all m
    int min_margin = std::numeric_limits<int>::max();
    int min_weak_margin = std::numeric_limits<int>::max();
    int first_violation = 0; // m of the first failure, 0 if none
};

/// table[m-1] = (i(y,m), nu(y,m)).
inline IndexSumReport check_index_sum_estimate(const std::vector<std::pair<long long, int>>& table, int e)
{
    IndexSumReport r;
    if (table.size() < 2) return r;
    const long long i1 = table[0].first;
    for (size_t k = 0; k + 1 < table.size(); ++k) {
        long long lhs = table[k].first + table[k].second;
        int margin = static_cast<int>(table[k + 1].first - i1 + e / 2 - 1 - lhs);
        int weak = static_cast<int>(table[k + 1].first - 1 - lhs);
        r.min_margin = std::min(r.min_margin, margin);
        r.min_weak_margin = std::min(r.min_weak_margin, weak);
        if (margin < 0 && r.holds) {
            r.holds = false;
            r.first_violation = static_cast<int>(k + 1);
        }
        if (weak < 0) r.weak_holds = false;
    }
    return r;
}

inline std::vector<std::pair<long long, int>> closed_form_table(const OrbitIndexData& o, int m_max)
{
    std::vector<std::pair<long long, int>> t;
    for (int m = 1; m <= m_max; ++m) t.emplace_back(o.index(m), o.nullity(m));
    return t;
}

} // namespace maslov
