#pragma once
// JSON readers for matrices, paths and bodies, and JSON writers for the
// reports.  Needs nlohmann/json (vendor/json.hpp).

#include "characteristics.hpp"
#include "corpus.hpp"
#include "dual_action.hpp"
#include "morse.hpp"

#include <json.hpp>

namespace maslov {

using json = nlohmann::json;

namespace detail {

inline double num(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key) || !j[key].is_number()) throw InputError(where + ": missing number '" + key + "'");
    return j[key].get<double>();
}

inline Mat rows_to_mat(const json& rows, const std::string& where)
{
    if (!rows.is_array() || rows.empty()) throw InputError(where + ": expected a non-empty array of rows");
    const auto r = rows.size();
    const auto c = rows[0].is_array() ? rows[0].size() : 0;
    if (c == 0) throw InputError(where + ": rows must be arrays");
    Mat M(r, c);
    for (size_t i = 0; i < r; ++i) {
        if (!rows[i].is_array() || rows[i].size() != c)
            throw InputError(where + ": row " + std::to_string(i) + " has the wrong length");
        for (size_t k = 0; k < c; ++k) {
            if (!rows[i][k].is_number())
                throw InputError(where + ": entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
            M(i, k) = rows[i][k].get<double>();
        }
    }
    return M;
}

inline json mat_to_rows(const Mat& M)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
        rows.push_back(r);
    }
    return rows;
}

} // namespace detail

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

/// {"kind":"N1","lambda":1,"b":-1}, {"kind":"D","lambda":2},
/// {"kind":"R","theta":t}, {"kind":"N2","theta":t,"b2":..,"b3":..}
inline BasicNormalForm block_from_json(const json& j, const std::string& where = "block")
{
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw InputError(where + ": expected an object with a string 'kind'");
    const auto k = j["kind"].get<std::string>();
    BasicNormalForm b;
    if (k == "D") b = BasicNormalForm::D(detail::num(j, "lambda", where));
    else if (k == "N1") b = BasicNormalForm::N1(detail::num(j, "lambda", where), detail::num(j, "b", where));
    else if (k == "R") b = BasicNormalForm::R(detail::num(j, "theta", where));
    else if (k == "N2")
        b = BasicNormalForm::N2(detail::num(j, "theta", where), detail::num(j, "b2", where), detail::num(j, "b3", where));
    else throw InputError(where + ": unknown block kind '" + k + "'");
    b.validate();
    return b;
}

inline json block_to_json(const BasicNormalForm& b)
{
    switch (b.kind) {
    case BlockKind::D: return {{"kind", "D"}, {"lambda", b.lambda}};
    case BlockKind::N1: return {{"kind", "N1"}, {"lambda", b.lambda}, {"b", b.b}};
    case BlockKind::R: return {{"kind", "R"}, {"theta", b.theta}};
    case BlockKind::N2: return {{"kind", "N2"}, {"theta", b.theta}, {"b2", b.b2}, {"b3", b.b3}};
    }
    return {};
}

/// {"n":n,"rows":[[...]]}, a bare array of rows, a basic normal form, or
/// {"kind":"diamond","blocks":[...]}.
inline Mat matrix_from_json(const json& j)
{
    Mat M;
    if (j.is_array()) M = detail::rows_to_mat(j, "matrix");
    else if (j.is_object() && j.contains("rows")) {
        M = detail::rows_to_mat(j["rows"], "matrix.rows");
        if (j.contains("n") && (!j["n"].is_number_integer() || 2 * j["n"].get<long>() != M.rows()))
            throw InputError("matrix: 'n' does not match the number of rows");
    } else if (j.is_object() && j.value("kind", "") == "diamond") {
        if (!j.contains("blocks") || !j["blocks"].is_array() || j["blocks"].empty())
            throw InputError("matrix: diamond needs a non-empty 'blocks' array");
        std::vector<BasicNormalForm> bs;
        for (size_t i = 0; i < j["blocks"].size(); ++i)
            bs.push_back(block_from_json(j["blocks"][i], "matrix.blocks[" + std::to_string(i) + "]"));
        M = diamond_of(bs);
    } else if (j.is_object() && j.contains("kind")) {
        M = block_from_json(j, "matrix").matrix();
    } else throw InputError("matrix: unrecognized format");
    if (M.rows() != M.cols() || M.rows() % 2) throw InputError("matrix: must be square of even size");
    return M;
}

inline json matrix_to_json(const Mat& M) { return {{"n", M.rows() / 2}, {"rows", detail::mat_to_rows(M)}}; }

/// {"n":..,"segments":[{"type":"exp","A":rows,"duration":d} |
/// {"type":"samples","times":[..],"matrices":[rows,..]} |
/// {"type":"blocks","blocks":[{...,"winding":k}, ..]}]}.  A "tau" entry is
/// checked against the sum of the durations.
inline SymplecticPath path_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array() || j["segments"].empty())
        throw InputError("path: expected an object with a non-empty 'segments' array");
    SymplecticPath p;
    bool started = false;
    auto ensure = [&](int n) {
        if (!started) {
            p = SymplecticPath(n);
            started = true;
        } else if (p.n() != n)
            throw InputError("path: segment dimensions differ");
    };
    for (size_t i = 0; i < j["segments"].size(); ++i) {
        const auto& s = j["segments"][i];
        const std::string where = "path.segments[" + std::to_string(i) + "]";
        const auto type = s.value("type", "");
        if (type == "exp") {
            if (!s.contains("A")) throw InputError(where + ": missing 'A'");
            Mat A = detail::rows_to_mat(s["A"], where + ".A");
            if (A.rows() != A.cols() || A.rows() % 2) throw InputError(where + ": 'A' must be square of even size");
            ensure(static_cast<int>(A.rows() / 2));
            p.add_exp(A, detail::num(s, "duration", where));
        } else if (type == "samples") {
            if (!s.contains("times") || !s["times"].is_array() || !s.contains("matrices") || !s["matrices"].is_array())
                throw InputError(where + ": needs 'times' and 'matrices' arrays");
            std::vector<double> t;
            std::vector<Mat> ms;
            for (const auto& x : s["times"]) {
                if (!x.is_number()) throw InputError(where + ": times must be numbers");
                t.push_back(x.get<double>());
            }
            for (size_t k = 0; k < s["matrices"].size(); ++k)
                ms.push_back(detail::rows_to_mat(s["matrices"][k], where + ".matrices[" + std::to_string(k) + "]"));
            if (ms.empty()) throw InputError(where + ": no matrices");
            ensure(static_cast<int>(ms[0].rows() / 2));
            p.add_samples(std::move(t), std::move(ms));
        } else if (type == "blocks") {
            if (!s.contains("blocks") || !s["blocks"].is_array() || s["blocks"].empty())
                throw InputError(where + ": needs a non-empty 'blocks' array");
            std::vector<BlockPath> bp;
            for (size_t k = 0; k < s["blocks"].size(); ++k) {
                const auto& b = s["blocks"][k];
                BlockPath x;
                x.block = block_from_json(b, where + ".blocks[" + std::to_string(k) + "]");
                x.winding = b.value("winding", 0);
                bp.push_back(x);
            }
            auto q = path_to_blocks(bp);
            ensure(q.n());
            if (!p.segments().empty()) throw InputError(where + ": a block path must be the only segment");
            p = q;
        } else throw InputError(where + ": unknown segment type '" + type + "'");
    }
    if (j.contains("tau")) {
        if (!j["tau"].is_number()) throw InputError("path: 'tau' must be a number");
        if (std::abs(j["tau"].get<double>() - p.tau()) > 1e-9 * std::max(1.0, p.tau()))
            throw InputError("path: 'tau' differs from the total segment duration");
    }
    return p;
}

/// {"kind":"ellipsoid","r":[...]} or {"kind":"quartic_perturbed","r":[...],"eps":e}
inline ConvexBody body_from_json(const json& j)
{
    if (!j.is_object() || !j.contains("kind") || !j.contains("r") || !j["r"].is_array())
        throw InputError("body: expected an object with 'kind' and 'r'");
    std::vector<double> r;
    for (const auto& x : j["r"]) {
        if (!x.is_number()) throw InputError("body: radii must be numbers");
        r.push_back(x.get<double>());
    }
    const auto kind = j["kind"].get<std::string>();
    if (kind == "ellipsoid") return make_ellipsoid(r);
    if (kind == "quartic_perturbed") return make_quartic_perturbed(r, detail::num(j, "eps", "body"));
    throw InputError("body: unknown kind '" + kind + "'");
}

inline json decomposition_to_json(const NormalFormDecomposition& d)
{
    return {{"p_minus", d.p_minus}, {"p_zero", d.p_zero},   {"p_plus", d.p_plus}, {"q_minus", d.q_minus},
            {"q_zero", d.q_zero},   {"q_plus", d.q_plus},   {"r", d.r},           {"r_star", d.r_star},
            {"r_zero", d.r_zero},   {"thetas", d.thetas},   {"alphas", d.alphas}, {"betas", d.betas},
            {"hyperbolic_dim", d.hyperbolic_dim},           {"e", d.e()}};
}

inline json splitting_to_json(const SplittingPair& s, const std::vector<SplitContribution>& trace)
{
    json t = json::array();
    for (const auto& c : trace)
        t.push_back({{"block", c.block}, {"s_plus", c.s_plus}, {"s_minus", c.s_minus},
                     {"source", to_string(c.source)}});
    return {{"omega", cplx_json(s.omega)}, {"s_plus", s.s_plus}, {"s_minus", s.s_minus}, {"provenance", t},
            {"table_version", split_table::version}};
}

/// Decomposition plus the splitting numbers at every unit eigenvalue.
inline json decomposition_report(const Mat& M, const Tolerances& tol = {})
{
    auto d = decompose(M, tol);
    json out = decomposition_to_json(d);
    auto us = unit_spectrum(M, tol);
    json sp = json::array();
    for (const auto& e : us.entries) {
        std::vector<SplitContribution> trace;
        auto s = splitting_numbers(d, e.omega, &trace);
        json x = splitting_to_json(s, trace);
        x["alg_mult"] = e.alg_mult;
        x["geo_mult"] = e.geo_mult;
        sp.push_back(x);
    }
    out["splitting"] = sp;
    out["ill_conditioned"] = us.ill_conditioned;
    return out;
}

inline json index_pair_to_json(const IndexPair& p)
{
    return {{"index", p.index}, {"nullity", p.nullity}, {"omega", cplx_json(p.omega)},
            {"degenerate_endpoint", p.degenerate_endpoint}, {"crossings", p.crossings}};
}

inline json checks_to_json(const JumpChecks& c)
{
    return {{"lower", c.lower}, {"upper", c.upper}, {"next", c.next}, {"previous", c.previous}};
}

inline json orbit_data_to_json(const OrbitIndexData& o)
{
    return {{"decomposition", decomposition_to_json(o.d)}, {"i1", o.i1}, {"nu1", o.nu1},
            {"s_plus", o.s_plus()}, {"mean_index", o.mean()}, {"e", o.e()}};
}

inline json certificate_to_json(const JumpCertificate& c, const std::vector<OrbitIndexData>& orbits)
{
    json od = json::array();
    for (const auto& o : orbits) od.push_back(orbit_data_to_json(o));
    json checks = json::array();
    for (const auto& ch : c.checks) checks.push_back(checks_to_json(ch));
    json out = {{"found", c.found}, {"search_bound", c.search_bound}, {"window", c.window}, {"orbit_data", od}};
    if (c.found) {
        out["T"] = c.T;
        out["m"] = c.m;
        out["checks"] = checks;
        out["verified"] = verify_certificate(c, orbits);
    }
    return out;
}

inline json flags_to_json(const OrbitFlags& f)
{
    return {{"prime", f.prime},           {"nondegenerate", f.nondegenerate}, {"elliptic", f.elliptic},
            {"hyperbolic", f.hyperbolic}, {"borderline", f.borderline}};
}

inline json orbit_to_json(const ClosedOrbit& o, const OrbitIndexTable* t = nullptr)
{
    json mult = json::array();
    for (auto z : o.multipliers) mult.push_back(cplx_json(z));
    json out = {{"tau", o.tau},
                {"y0", std::vector<double>(o.y0.data(), o.y0.data() + o.y0.size())},
                {"multipliers", mult},
                {"flags", flags_to_json(o.flags)},
                {"multiplicity", o.multiplicity},
                {"source", o.source},
                {"energy_drift", o.energy_drift},
                {"closing_error", o.closing_error}};
    if (t) {
        json tab = json::array();
        for (size_t m = 0; m < t->table.size(); ++m)
            tab.push_back({{"m", m + 1},
                           {"i", t->table[m].first},
                           {"nu", t->table[m].second},
                           {"ekeland_index", t->table[m].first - t->n}});
        out["i1"] = t->i1;
        out["nu1"] = t->nu1;
        out["mean_index"] = t->mean;
        out["s_plus"] = t->s_plus;
        out["decomposition"] = decomposition_to_json(t->d);
        out["index_table"] = tab;
        out["direct_checked_up_to"] = t->direct.size();
        out["mismatches"] = t->mismatches;
    }
    return out;
}

inline std::string orbits_csv(const std::vector<ClosedOrbit>& orbits, const std::vector<OrbitIndexTable>& tables)
{
    std::ostringstream os;
    os.precision(17);
    os << "orbit,tau,m,i,nu,ekeland_index,elliptic,hyperbolic,nondegenerate\n";
    for (size_t j = 0; j < orbits.size(); ++j)
        for (size_t m = 0; m < tables[j].table.size(); ++m)
            os << j + 1 << ',' << orbits[j].tau << ',' << m + 1 << ',' << tables[j].table[m].first << ','
               << tables[j].table[m].second << ',' << tables[j].table[m].first - tables[j].n << ','
               << orbits[j].flags.elliptic << ',' << orbits[j].flags.hyperbolic << ','
               << orbits[j].flags.nondegenerate << '\n';
    return os.str();
}

inline json dual_point_to_json(const DualCriticalPoint& p)
{
    json out = {{"seed", p.seed_label},
                {"K", p.K},
                {"value", p.value},
                {"gradient_norm", p.grad_norm},
                {"hessian_index", p.hessian_index},
                {"hessian_nullity", p.hessian_nullity},
                {"s1_in_kernel", p.s1_in_kernel},
                {"nullity_without_s1", p.nullity_without_s1()},
                {"hess_tol", p.hess_tol},
                {"converged", p.converged}};
    if (p.matched_orbit) out["matched_orbit"] = {{"orbit", p.matched_orbit->first + 1}, {"m", p.matched_orbit->second}};
    return out;
}

inline json morse_to_json(const MorseSeries& s, const MorseReport& r)
{
    json rows = json::array();
    for (const auto& x : r.rows)
        rows.push_back({{"q", x.q}, {"M", x.M}, {"b", x.b}, {"margin", x.margin},
                        {"alternating_margin", x.alternating_margin}, {"perfect", x.perfect}});
    return {{"q_max", s.q_max},       {"cutoff_safe_q", s.cutoff_safe_q}, {"holds", r.holds},
            {"perfect_at_even", r.perfect_at_even}, {"checked_up_to", r.checked_up_to}, {"rows", rows},
            {"violations", r.violations}, {"contributions", s.contributions}};
}

inline std::string morse_csv(const MorseReport& r)
{
    std::ostringstream os;
    os << "q,M_q,b_q,margin\n";
    for (const auto& x : r.rows) os << x.q << ',' << x.M << ',' << x.b << ',' << x.margin << '\n';
    return os.str();
}

inline json multiplicity_to_json(const MultiplicityReport& m)
{
    json out = {{"n", m.n},
                {"distinct", m.distinct},
                {"non_hyperbolic", m.non_hyperbolic},
                {"elliptic", m.elliptic},
                {"threshold_distinct", m.threshold_distinct},
                {"threshold_non_hyperbolic", m.threshold_non_hyperbolic},
                {"distinct_pass", m.distinct_pass},
                {"non_hyperbolic_pass", m.non_hyperbolic_pass}};
    if (m.rho) out["rho_n"] = *m.rho;
    else out["rho_n"] = "unbounded";
    return out;
}

} // namespace maslov
