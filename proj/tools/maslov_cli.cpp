// Command-line front end: maslov <subcommand> [options].
// Exit status: 0 success, 1 a check failed, 2 invalid input.

#include <maslov/json_io.hpp>
#include <maslov/oracle.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace maslov;

namespace {

struct RunConfig {
    double symplectic_tol = 1e-9;
    double eigen_tol = 1e-7;
    double ode_tol = 1e-13;
    double hess_tol = 1e-6;
    std::uint64_t seed = 20240611;
    std::string format = "json";
    std::string out;
    int m_max = 12;
    long long q_max = 30;
    int bound = 100000;
    int K = 64;

    Tolerances tolerances() const
    {
        Tolerances t;
        t.symplectic = symplectic_tol;
        t.eigen = eigen_tol;
        return t;
    }
    IndexOptions index_options() const
    {
        IndexOptions o;
        o.tol = tolerances();
        o.seed = seed;
        return o;
    }
    FlowOptions flow_options() const
    {
        FlowOptions f;
        f.ode_tol = ode_tol;
        return f;
    }
};

struct Result {
    json report;
    std::string csv; // empty when the subcommand has no table form
    bool ok = true;
};

json read_json_arg(const std::string& arg, const std::string& what)
{
    std::string text = arg;
    if (!arg.empty() && arg[0] == '@') {
        std::ifstream in(arg.substr(1));
        if (!in) throw InputError(what + ": cannot open " + arg.substr(1));
        text.assign(std::istreambuf_iterator<char>(in), {});
    }
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(what + ": malformed JSON (" + e.what() + ")");
    }
}

cplx parse_omega(const std::string& s, double angle, bool angle_given)
{
    if (angle_given) return std::polar(1.0, angle);
    auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return cplx(std::stod(s), 0.0);
        cplx z(std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)));
        if (std::abs(std::abs(z) - 1.0) > 1e-12) throw InputError("omega must lie on the unit circle");
        return z / std::abs(z);
    } catch (const std::logic_error&) {
        throw InputError("omega: expected a number or 're,im'");
    }
}

void flatten(const json& j, const std::string& prefix, std::ostringstream& os)
{
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), os);
    } else if (j.is_array() && !j.empty() && (j[0].is_object() || j[0].is_array())) {
        for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", os);
    } else {
        os << prefix << ": " << j.dump() << '\n';
    }
}

std::string render(const Result& r, const std::string& format)
{
    if (format == "json") return r.report.dump(2) + "\n";
    if (format == "csv") {
        if (r.csv.empty()) throw InputError("this subcommand has no csv output");
        return r.csv;
    }
    if (format == "table") {
        std::ostringstream os;
        flatten(r.report, "", os);
        return os.str();
    }
    throw InputError("unknown format '" + format + "'");
}

ConvexBody body_from_args(const std::string& body_arg, const std::vector<double>& r, double eps)
{
    if (!body_arg.empty()) return body_from_json(read_json_arg(body_arg, "body"));
    if (r.empty()) throw InputError("give --body or --r");
    return eps > 0 ? make_quartic_perturbed(r, eps) : make_ellipsoid(r);
}

/// Exact orbits for ellipsoids, shooting search otherwise.
std::vector<ClosedOrbit> orbits_of(const ConvexBody& b, const RunConfig& cfg, std::vector<std::string>* diag)
{
    if (b.kind == BodyKind::Ellipsoid) return ellipsoid_characteristics(b);
    OrbitSearchOptions so;
    so.seed = cfg.seed;
    so.flow = cfg.flow_options();
    auto res = find_periodic_orbits(b, so);
    if (diag) *diag = res.diagnostics;
    return res.orbits;
}

json orbit_checks(const OrbitIndexTable& t, int n)
{
    auto est = check_index_sum_estimate(t.table, t.d.e());
    return {{"i1_at_least_n", t.i1 >= n},
            {"i1_margin", t.i1 - n},
            {"mean_index_above_2", t.mean > 2},
            {"mean_index_margin", t.mean - 2},
            {"index_sum_estimate", est.holds},
            {"index_sum_min_margin", est.min_margin},
            {"direct_mismatches", t.mismatches.size()}};
}

bool orbit_checks_ok(const json& c)
{
    return c["i1_at_least_n"].get<bool>() && c["mean_index_above_2"].get<bool>() &&
           c["index_sum_estimate"].get<bool>() && c["direct_mismatches"].get<size_t>() == 0;
}

Result orbit_report(const ConvexBody& b, const std::vector<ClosedOrbit>& orbits, const RunConfig& cfg,
                    const std::vector<std::string>& diag)
{
    Result r;
    json arr = json::array();
    std::vector<OrbitIndexTable> tables;
    for (const auto& o : orbits) {
        auto t = orbit_indices(o, std::max(cfg.m_max, 1), std::min(cfg.m_max, 12), cfg.index_options(),
                               cfg.tolerances());
        json x = orbit_to_json(o, &t);
        x["checks"] = orbit_checks(t, b.n);
        r.ok = r.ok && orbit_checks_ok(x["checks"]);
        arr.push_back(x);
        tables.push_back(std::move(t));
    }
    r.report = {{"n", b.n}, {"orbit_count", orbits.size()}, {"orbits", arr}, {"warnings", b.warnings},
                {"diagnostics", diag}};
    if (orbits.empty()) {
        r.report["result"] = "none found";
        r.ok = false;
    }
    r.csv = orbits_csv(orbits, tables);
    return r;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Index iteration, normal forms and closed characteristics"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    std::string config_file;

    struct Global {
        CLI::Option* opt;
        std::string key;
    };
    std::vector<Global> globals;
    auto global = [&](const std::string& name, auto& var, const std::string& help) {
        std::string key = name;
        std::replace(key.begin(), key.end(), '-', '_');
        std::string env = "MASLOV_" + key;
        std::transform(env.begin(), env.end(), env.begin(), ::toupper);
        auto* o = app.add_option("--" + name, var, help)->envname(env);
        globals.push_back({o, key});
    };
    global("symplectic-tol", cfg.symplectic_tol, "symplecticity tolerance");
    global("eigen-tol", cfg.eigen_tol, "unit-circle classification tolerance");
    global("ode-tol", cfg.ode_tol, "ODE tolerance");
    global("hess-tol", cfg.hess_tol, "relative Hessian zero threshold");
    global("seed", cfg.seed, "random seed");
    global("format", cfg.format, "json, csv or table");
    global("out", cfg.out, "write the report to this file");
    global("m-max", cfg.m_max, "largest iterate");
    global("q-max", cfg.q_max, "largest Morse degree");
    global("bound", cfg.bound, "jump search bound");
    global("K", cfg.K, "Fourier truncation");
    app.add_option("--config", config_file, "JSON config file")->envname("MASLOV_CONFIG");

    std::string matrix_arg, path_arg, body_arg, omega_arg = "1", orbits_arg;
    double omega_angle = 0, eps = 0;
    std::vector<double> radii;
    int power = 1, count = 200, random_seeds = 6, dual_m = 3, descents = 2;
    bool numeric = false;

    auto* nf = app.add_subcommand("nf", "normal-form decomposition of a matrix");
    nf->add_option("--matrix", matrix_arg, "matrix JSON or @file")->required();

    auto* idx = app.add_subcommand("index", "index and nullity of a path");
    idx->add_option("--path", path_arg, "path JSON or @file")->required();
    idx->add_option("--omega", omega_arg, "unit complex number: x or re,im");
    auto* idx_angle = idx->add_option("--omega-angle", omega_angle, "omega = exp(i angle)");
    idx->add_option("--m", power, "iterate of the path")->check(CLI::PositiveNumber);

    auto* it = app.add_subcommand("iterate", "closed-form index table of a path");
    it->add_option("--path", path_arg, "path JSON or @file")->required();
    it->add_flag("--numeric-mean", numeric, "also fit the mean index numerically (m-max >= 8)");

    auto* sp = app.add_subcommand("split", "splitting numbers");
    sp->add_option("--matrix", matrix_arg, "matrix JSON or @file")->required();
    sp->add_option("--omega", omega_arg, "unit complex number: x or re,im");
    auto* sp_angle = sp->add_option("--omega-angle", omega_angle, "omega = exp(i angle)");
    sp->add_flag("--numeric", numeric, "cross-check with the crossing engine (normal-form inputs)");

    auto* jp = app.add_subcommand("jump", "common index jump certificate");
    jp->add_option("--r", radii, "ellipsoid radii")->delimiter(',');
    jp->add_option("--orbits", orbits_arg, "JSON list of {matrix, i1, nu1} or @file");

    auto* el = app.add_subcommand("ellipsoid", "exact ellipsoid orbits with index tables");
    el->add_option("--r", radii, "radii")->delimiter(',')->required();

    auto* fl = app.add_subcommand("flow", "orbit search on a convex body");
    fl->add_option("--body", body_arg, "body JSON or @file");
    fl->add_option("--r", radii, "radii")->delimiter(',');
    fl->add_option("--eps", eps, "quartic weight (0: ellipsoid)");
    fl->add_option("--random-seeds", random_seeds, "random starting points");

    auto* du = app.add_subcommand("dual", "dual action critical points and Hessian indices");
    du->add_option("--body", body_arg, "body JSON or @file");
    du->add_option("--r", radii, "radii")->delimiter(',');
    du->add_option("--eps", eps, "quartic weight (0: ellipsoid)");
    du->add_option("--iterates", dual_m, "iterates per orbit")->check(CLI::PositiveNumber);
    du->add_option("--descents", descents, "random descent seeds");

    auto* mo = app.add_subcommand("morse", "Morse series, inequalities and multiplicity report");
    mo->add_option("--body", body_arg, "body JSON or @file");
    mo->add_option("--r", radii, "radii")->delimiter(',');
    mo->add_option("--eps", eps, "quartic weight (0: ellipsoid)");

    auto* st = app.add_subcommand("selftest", "oracle-equivalence suite");
    st->add_option("--count", count, "random products")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
    }

    try {
        if (!config_file.empty()) {
            json c = read_json_arg("@" + config_file, "config");
            if (!c.is_object()) throw InputError("config: expected an object");
            for (auto& g : globals) {
                if (g.opt->count() > 0 || !c.contains(g.key)) continue;
                const json& v = c[g.key];
                if (g.key == "format" || g.key == "out") {
                    if (!v.is_string()) throw InputError("config: '" + g.key + "' must be a string");
                    (g.key == "format" ? cfg.format : cfg.out) = v.get<std::string>();
                    continue;
                }
                if (!v.is_number()) throw InputError("config: '" + g.key + "' must be a number");
                if (g.key == "symplectic_tol") cfg.symplectic_tol = v.get<double>();
                else if (g.key == "eigen_tol") cfg.eigen_tol = v.get<double>();
                else if (g.key == "ode_tol") cfg.ode_tol = v.get<double>();
                else if (g.key == "hess_tol") cfg.hess_tol = v.get<double>();
                else if (g.key == "seed") cfg.seed = v.get<std::uint64_t>();
                else if (g.key == "m_max") cfg.m_max = v.get<int>();
                else if (g.key == "q_max") cfg.q_max = v.get<long long>();
                else if (g.key == "bound") cfg.bound = v.get<int>();
                else if (g.key == "K") cfg.K = v.get<int>();
            }
        }
        if (!(cfg.symplectic_tol > 0 && cfg.eigen_tol > 0 && cfg.ode_tol > 0 && cfg.hess_tol > 0))
            throw InputError("tolerances must be positive");
        if (cfg.m_max < 1) throw InputError("m-max must be positive");

        Result res;
        if (nf->parsed()) {
            Mat M = matrix_from_json(read_json_arg(matrix_arg, "matrix"));
            res.report = decomposition_report(M, cfg.tolerances());
            res.report["matrix"] = matrix_to_json(M);
        } else if (idx->parsed()) {
            auto p = path_from_json(read_json_arg(path_arg, "path"));
            cplx w = parse_omega(omega_arg, omega_angle, idx_angle->count() > 0);
            auto pair = index_nullity(power == 1 ? p : iterate_path(p, power), w, cfg.index_options());
            res.report = index_pair_to_json(pair);
            res.report["m"] = power;
            res.report["n"] = p.n();
        } else if (it->parsed()) {
            auto p = path_from_json(read_json_arg(path_arg, "path"));
            auto opt = cfg.index_options();
            auto first = index_nullity(p, 1.0, opt);
            auto d = decompose(p.end_value(), cfg.tolerances());
            check_parity(d, first.index);
            json tab = json::array();
            std::ostringstream csv;
            csv << "m,i,nu,direct_i,direct_nu\n";
            int mism = 0;
            for (int m = 1; m <= cfg.m_max; ++m) {
                long long i = iteration_index(d, first.index, m);
                int nu = iteration_nullity(d, first.nullity, m);
                json row = {{"m", m}, {"i", i}, {"nu", nu}};
                csv << m << ',' << i << ',' << nu;
                if (m <= 12) {
                    auto dp = m == 1 ? first : index_nullity(iterate_path(p, m), 1.0, opt);
                    row["direct_i"] = dp.index;
                    row["direct_nu"] = dp.nullity;
                    csv << ',' << dp.index << ',' << dp.nullity;
                    if (dp.index != i || dp.nullity != nu) ++mism;
                } else {
                    csv << ",,";
                }
                csv << '\n';
                tab.push_back(row);
            }
            res.report = {{"n", p.n()},
                          {"decomposition", decomposition_to_json(d)},
                          {"i1", first.index},
                          {"nu1", first.nullity},
                          {"mean_index", mean_index(d, first.index)},
                          {"table", tab},
                          {"mismatches", mism}};
            if (numeric) {
                auto est = mean_index_numeric(p, cfg.m_max, opt);
                res.report["mean_index_numeric"] = {{"slope", est.slope}, {"half_width", est.half_width}};
            }
            res.csv = csv.str();
            res.ok = mism == 0;
        } else if (sp->parsed()) {
            json mj = read_json_arg(matrix_arg, "matrix");
            Mat M = matrix_from_json(mj);
            cplx w = parse_omega(omega_arg, omega_angle, sp_angle->count() > 0);
            std::vector<SplitContribution> trace;
            auto s = splitting_numbers(M, w, &trace, cfg.tolerances());
            res.report = splitting_to_json(s, trace);
            res.report["nullity"] = nullity_omega(M, w, cfg.tolerances());
            if (numeric) {
                std::vector<BlockPath> bl;
                if (mj.is_object() && mj.value("kind", "") == "diamond")
                    for (const auto& b : mj["blocks"]) bl.push_back({block_from_json(b), 0});
                else if (mj.is_object() && mj.contains("kind") && !mj.contains("rows"))
                    bl.push_back({block_from_json(mj), 0});
                else throw InputError("--numeric needs a normal-form matrix input");
                auto p = path_to_blocks(bl);
                json num = json::array();
                for (double e : {1e-3, 5e-4}) {
                    auto [a, b] = splitting_numbers_numeric(p, w, e, cfg.index_options());
                    num.push_back({{"eps", e}, {"s_plus", a}, {"s_minus", b}});
                    res.ok = res.ok && a == s.s_plus && b == s.s_minus;
                }
                res.report["numeric"] = num;
                res.report["numeric_agrees"] = res.ok;
            }
        } else if (jp->parsed()) {
            std::vector<OrbitIndexData> data;
            if (!radii.empty()) {
                auto b = make_ellipsoid(radii);
                for (const auto& o : ellipsoid_characteristics(b)) {
                    auto t = orbit_indices(o, 1, 1, cfg.index_options(), cfg.tolerances());
                    data.push_back(t.data());
                }
            } else if (!orbits_arg.empty()) {
                json arr = read_json_arg(orbits_arg, "orbits");
                if (!arr.is_array() || arr.empty()) throw InputError("orbits: expected a non-empty array");
                for (size_t k = 0; k < arr.size(); ++k) {
                    const auto& o = arr[k];
                    if (!o.contains("matrix") || !o.contains("i1") || !o.contains("nu1"))
                        throw InputError("orbits[" + std::to_string(k) + "]: needs matrix, i1 and nu1");
                    auto d = decompose(matrix_from_json(o["matrix"]), cfg.tolerances());
                    data.push_back(OrbitIndexData::make(d, o["i1"].get<int>(), o["nu1"].get<int>()));
                }
            } else throw InputError("give --r or --orbits");
            auto c = find_common_jump(data, cfg.bound);
            res.report = certificate_to_json(c, data);
            res.ok = !c.found || verify_certificate(c, data);
        } else if (el->parsed()) {
            auto b = make_ellipsoid(radii);
            res = orbit_report(b, ellipsoid_characteristics(b), cfg, {});
        } else if (fl->parsed()) {
            auto b = body_from_args(body_arg, radii, eps);
            // generic search even for ellipsoids
            OrbitSearchOptions so;
            so.seed = cfg.seed;
            so.flow = cfg.flow_options();
            so.random_seeds = random_seeds;
            auto sr = find_periodic_orbits(b, so);
            auto& orbits = sr.orbits;
            auto& diag = sr.diagnostics;
            res = orbit_report(b, orbits, cfg, diag);
        } else if (du->parsed()) {
            auto b = body_from_args(body_arg, radii, eps);
            std::vector<std::string> diag;
            auto orbits = orbits_of(b, cfg, &diag);
            DualOptions o1;
            o1.K = cfg.K;
            o1.hess_rel_tol = cfg.hess_tol;
            DualOptions o2 = o1;
            o2.K = 2 * cfg.K;
            DualAction da1(b, o1.alpha, o1.K), da2(b, o2.alpha, o2.K);
            json pts = json::array();
            std::ostringstream csv;
            csv << "orbit,m,expected_index,index_K,index_2K,nullity_K,nullity_2K,value\n";
            for (size_t j = 0; j < orbits.size(); ++j) {
                auto t = orbit_indices(orbits[j], dual_m, 0, cfg.index_options(), cfg.tolerances());
                for (int m = 1; m <= dual_m; ++m) {
                    auto s1 = orbit_seed(da1, b, orbits[j], m, o1.alpha, cfg.flow_options());
                    auto s2 = orbit_seed(da2, b, orbits[j], m, o2.alpha, cfg.flow_options());
                    auto c1 = dual_newton(da1, s1.coeffs, o1, s1.label);
                    auto c2 = dual_newton(da2, s2.coeffs, o2, s2.label);
                    match_to_orbits(c1, da1, b, orbits);
                    match_to_orbits(c2, da2, b, orbits);
                    long long expect = t.ekeland_index(m);
                    bool matched = c1.matched_orbit && *c1.matched_orbit == std::make_pair(int(j), m);
                    bool ok = c1.converged && c2.converged && matched && c1.hessian_index == expect &&
                              c2.hessian_index == expect && c1.hessian_nullity == t.ekeland_nullity(m) &&
                              c1.value < 0 && c1.hessian_nullity >= 1 && c1.hessian_nullity <= 2 * b.n - 1;
                    res.ok = res.ok && ok;
                    pts.push_back({{"orbit", j + 1},
                                   {"m", m},
                                   {"expected_ekeland_index", expect},
                                   {"expected_nullity", t.ekeland_nullity(m)},
                                   {"K", dual_point_to_json(c1)},
                                   {"2K", dual_point_to_json(c2)},
                                   {"ok", ok}});
                    csv << j + 1 << ',' << m << ',' << expect << ',' << c1.hessian_index << ',' << c2.hessian_index
                        << ',' << c1.hessian_nullity << ',' << c2.hessian_nullity << ',' << c1.value << '\n';
                }
            }
            json desc = json::array();
            if (descents > 0) {
                auto seeds = random_dual_seeds(da1, b.n, descents, cfg.seed);
                auto sr = dual_action_search(b, seeds, o1, true);
                for (auto& c : sr.points) {
                    match_to_orbits(c, da1, b, orbits);
                    desc.push_back(dual_point_to_json(c));
                }
                for (auto& d : sr.diagnostics) diag.push_back(d);
            }
            res.report = {{"n", b.n}, {"alpha", o1.alpha}, {"K", o1.K}, {"points", pts}, {"descent", desc},
                          {"diagnostics", diag}};
            res.csv = csv.str();
        } else if (mo->parsed()) {
            auto b = body_from_args(body_arg, radii, eps);
            std::vector<std::string> diag;
            auto orbits = orbits_of(b, cfg, &diag);
            std::vector<MorseOrbit> mos;
            std::vector<MultiplicityInput> mins;
            for (size_t j = 0; j < orbits.size(); ++j) {
                auto t = orbit_indices(orbits[j], 1, 1, cfg.index_options(), cfg.tolerances());
                auto d = t.data();
                mos.push_back(morse_orbit(d, b.n, cfg.q_max, "y" + std::to_string(j + 1)));
                mins.push_back({orbits[j].flags.prime, orbits[j].flags.hyperbolic, orbits[j].flags.elliptic,
                                {d.i1, d.s_plus(), d.nu1}});
            }
            auto s = morse_series(mos, cfg.q_max);
            auto rep = check_morse_inequalities(s);
            auto mult = multiplicity_report(mins, b.n);
            res.report = {{"n", b.n}, {"orbit_count", orbits.size()}, {"series", morse_to_json(s, rep)},
                          {"multiplicity", multiplicity_to_json(mult)}, {"diagnostics", diag}};
            res.csv = morse_csv(rep);
            res.ok = rep.holds && mult.all_pass();
        } else if (st->parsed()) {
            auto corpus = oracle_corpus(count, cfg.seed);
            auto rep = oracle_equivalence(corpus, cfg.m_max, cfg.index_options());
            json mm = json::array();
            for (const auto& x : rep.mismatches)
                mm.push_back({{"path", x.path}, {"m", x.m}, {"blocks", x.blocks}, {"closed", {x.closed_index, x.closed_nullity}},
                              {"direct", {x.direct_index, x.direct_nullity}}});
            res.report = {{"paths", rep.paths}, {"m_max", cfg.m_max}, {"comparisons", rep.comparisons},
                          {"mismatches", mm}, {"errors", rep.error_messages}, {"passed", rep.passed()}};
            res.ok = rep.passed();
            std::cerr << "selftest: " << rep.paths << " paths in " << rep.seconds << " s\n";
        }

        std::string text = render(res, cfg.format);
        if (cfg.out.empty()) std::cout << text;
        else {
            std::ofstream f(cfg.out);
            if (!f) throw InputError("cannot write " + cfg.out);
            f << text;
        }
        return res.ok ? 0 : 1;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
