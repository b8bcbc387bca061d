#pragma once
// Cross-validation of the closed-form iteration formulas against the
// crossing engine on seeded random diamond products.

#include "corpus.hpp"
#include "index.hpp"
#include "normal_form.hpp"

#include <chrono>

namespace maslov {

struct OracleMismatch {
    int path = 0;
    int m = 0;
    std::string blocks;
    long long closed_index = 0;
    int closed_nullity = 0;
    int direct_index = 0;
    int direct_nullity = 0;
};

struct OracleReport {
    int paths = 0;
    int comparisons = 0;
    int errors = 0; // engine or classification failures (each counts as a failure)
    std::vector<OracleMismatch> mismatches;
    std::vector<std::string> error_messages;
    double seconds = 0;
    bool passed() const { return mismatches.empty() && errors == 0 && paths > 0; }
};

inline std::string describe(const std::vector<BlockPath>& bl)
{
    std::string s;
    for (const auto& b : bl) s += (s.empty() ? "" : " ") + b.block.label() + "w" + std::to_string(b.winding);
    return s;
}

/// Random corpus shared by the suites: `count` products drawn from one
/// generator seeded with `seed`.
inline std::vector<std::vector<BlockPath>> oracle_corpus(int count, std::uint64_t seed, const CorpusOptions& co = {})
{
    std::mt19937_64 rng(seed);
    std::vector<std::vector<BlockPath>> out;
    for (int k = 0; k < count; ++k) out.push_back(random_blocks(rng, co));
    return out;
}

/// Direct (i_1, nu_1) of every iterate m <= m_max against the closed forms
/// seeded with the direct m = 1 value.
inline OracleReport oracle_equivalence(const std::vector<std::vector<BlockPath>>& corpus, int m_max,
                                       const IndexOptions& opt = {})
{
    auto t0 = std::chrono::steady_clock::now();
    OracleReport rep;
    for (size_t k = 0; k < corpus.size(); ++k) {
        ++rep.paths;
        try {
            auto p = path_to_blocks(corpus[k]);
            auto d = decompose(p.end_value(), opt.tol);
            auto first = index_nullity(p, 1.0, opt);
            check_parity(d, first.index);
            for (int m = 1; m <= m_max; ++m) {
                auto r = m == 1 ? first : index_nullity(iterate_path(p, m), 1.0, opt);
                long long ci = iteration_index(d, first.index, m);
                int cn = iteration_nullity(d, first.nullity, m);
                ++rep.comparisons;
                if (ci != r.index || cn != r.nullity)
                    rep.mismatches.push_back({int(k), m, describe(corpus[k]), ci, cn, r.index, r.nullity});
            }
        } catch (const Error& e) {
            ++rep.errors;
            rep.error_messages.push_back("path " + std::to_string(k) + " (" + describe(corpus[k]) + "): " + e.what());
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

struct MeanIndexRow {
    int path = 0;
    int n = 0;
    double numeric = 0;
    double closed = 0;
    double tolerance = 0;
    bool ok = false;
};

struct MeanIndexReport {
    std::vector<MeanIndexRow> rows;
    std::vector<std::string> error_messages;
    double worst_ratio = 0; // max |numeric - closed| / tolerance
    double seconds = 0;
    bool passed() const
    {
        if (!error_messages.empty() || rows.empty()) return false;
        for (const auto& r : rows)
            if (!r.ok) return false;
        return true;
    }
};

/// Slope fit up to m_max against the closed-form mean index, with tolerance
/// 2n / m_max.
inline MeanIndexReport mean_index_consistency(const std::vector<std::vector<BlockPath>>& corpus, int m_max,
                                              const IndexOptions& opt = {})
{
    auto t0 = std::chrono::steady_clock::now();
    MeanIndexReport rep;
    for (size_t k = 0; k < corpus.size(); ++k) {
        try {
            auto p = path_to_blocks(corpus[k]);
            auto d = decompose(p.end_value(), opt.tol);
            auto est = mean_index_numeric(p, m_max, opt);
            MeanIndexRow row;
            row.path = int(k);
            row.n = p.n();
            row.numeric = est.slope;
            row.closed = mean_index(d, est.samples.front().second);
            row.tolerance = 2.0 * p.n() / m_max;
            row.ok = std::abs(row.numeric - row.closed) <= row.tolerance;
            rep.worst_ratio = std::max(rep.worst_ratio, std::abs(row.numeric - row.closed) / row.tolerance);
            rep.rows.push_back(row);
        } catch (const Error& e) {
            rep.error_messages.push_back("path " + std::to_string(k) + ": " + e.what());
        }
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

} // namespace maslov
