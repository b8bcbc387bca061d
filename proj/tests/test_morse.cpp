#include <maslov/characteristics.hpp>
#include <maslov/morse.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace maslov;

namespace {

const std::vector<double> E2{1.0, std::pow(2.0, 0.25)};
const std::vector<double> E3{1.0, std::pow(2.0, 0.25), std::pow(5.0, 0.25)};

std::vector<OrbitIndexData> ellipsoid_data(const std::vector<double>& r)
{
    std::vector<OrbitIndexData> out;
    int n = int(r.size());
    for (int j = 0; j < n; ++j) {
        auto d = decompose(ellipsoid_monodromy_at(r, j, ellipsoid_period(r, j)));
        int i1 = n;
        for (int i = 0; i < n; ++i)
            if (i != j) i1 += 2 * int(std::floor(r[j] * r[j] / (r[i] * r[i])));
        out.push_back(OrbitIndexData::make(d, i1, 1));
    }
    return out;
}

std::vector<MorseOrbit> morse_orbits(const std::vector<double>& r, long long q_max)
{
    std::vector<MorseOrbit> out;
    auto data = ellipsoid_data(r);
    for (size_t j = 0; j < data.size(); ++j)
        out.push_back(morse_orbit(data[j], int(r.size()), q_max, "y" + std::to_string(j + 1)));
    return out;
}

// the Ekeland indices of all iterates of all orbits, counted by hand
std::vector<long long> all_indices(const std::vector<double>& r, long long q_max)
{
    std::vector<long long> v;
    for (size_t j = 0; j < r.size(); ++j)
        for (int m = 1;; ++m) {
            long long i = 2 * (m - 1);
            for (size_t k = 0; k < r.size(); ++k)
                if (k != j) i += 2 * (long long)std::floor(m * r[j] * r[j] / (r[k] * r[k]));
            if (i > q_max) break;
            v.push_back(i);
        }
    return v;
}

} // namespace

TEST(Morse, BettiNumbers)
{
    EXPECT_EQ(betti_number(0), 1);
    EXPECT_EQ(betti_number(1), 0);
    EXPECT_EQ(betti_number(8), 1);
    EXPECT_EQ(betti_number(-2), 0);
}

TEST(Morse, EllipsoidSeriesIsPerfect)
{
    for (const auto& r : {E2, E3}) {
        const long long q_max = 60;
        auto s = morse_series(morse_orbits(r, q_max), q_max);
        // ellipsoid iterates all have even index, each even q hit exactly once
        auto idx = all_indices(r, q_max);
        for (long long q = 0; q <= q_max; ++q) {
            long long cnt = std::count(idx.begin(), idx.end(), q);
            EXPECT_EQ(s.M_at(q), cnt) << q;
        }
        auto rep = check_morse_inequalities(s);
        EXPECT_TRUE(rep.holds);
        EXPECT_TRUE(rep.perfect_at_even);
        EXPECT_EQ(rep.checked_up_to, q_max);
        EXPECT_TRUE(rep.violations.empty());
    }
}

TEST(Morse, EmptyOrbitListFails)
{
    auto s = morse_series({}, 10);
    auto rep = check_morse_inequalities(s);
    EXPECT_FALSE(rep.holds);
    EXPECT_FALSE(rep.perfect_at_even);
    ASSERT_FALSE(rep.violations.empty());
    EXPECT_EQ(rep.violations.front(), "M_0 < b_0");
}

TEST(Morse, MissingMinimumIsDetected)
{
    // drop the shortest orbit of E2: nothing has index 0
    auto orbits = morse_orbits(E2, 20);
    orbits.erase(orbits.begin());
    auto rep = check_morse_inequalities(morse_series(orbits, 20));
    EXPECT_FALSE(rep.holds);
    EXPECT_EQ(rep.rows[0].M, 0);
    EXPECT_EQ(rep.rows[0].margin, -1);
}

TEST(Morse, OddShiftIterateNotCounted)
{
    MorseOrbit o;
    o.name = "x";
    o.table = {{1, 1}, {2, 1}, {3, 1}};
    o.next_index = 10;
    auto s = morse_series({o}, 5);
    EXPECT_EQ(s.M_at(1), 1);
    EXPECT_EQ(s.M_at(2), 0); // i(x^2) - i(x) odd
    EXPECT_EQ(s.M_at(3), 1);
}

TEST(Morse, DegenerateIterateThrows)
{
    MorseOrbit o;
    o.name = "x";
    o.table = {{0, 1}, {2, 3}};
    EXPECT_THROW(morse_series({o}, 4), DegenerateIterateError);
    EXPECT_THROW(morse_series({o}, -1), InputError);
}

TEST(Morse, CutoffLimitsCheckedRange)
{
    auto orbits = morse_orbits(E2, 20);
    orbits[0].next_index = 7;
    auto s = morse_series(orbits, 20);
    EXPECT_EQ(s.cutoff_safe_q, 6);
    EXPECT_EQ(check_morse_inequalities(s).checked_up_to, 6);
}

TEST(Multiplicity, EllipsoidThresholds)
{
    auto data = ellipsoid_data(E3);
    std::vector<MultiplicityInput> in;
    for (const auto& o : data) in.push_back({true, false, true, {o.i1, o.s_plus(), o.nu1}});
    auto rep = multiplicity_report(in, 3);
    EXPECT_EQ(rep.distinct, 3);
    EXPECT_EQ(rep.threshold_distinct, 3);
    EXPECT_EQ(rep.threshold_non_hyperbolic, 2);
    EXPECT_EQ(rep.elliptic, 3);
    EXPECT_TRUE(rep.all_pass());
    ASSERT_TRUE(rep.rho.has_value());
    EXPECT_EQ(*rep.rho, 3);
}

TEST(Multiplicity, NonPrimeAndHyperbolicExcluded)
{
    std::vector<MultiplicityInput> in{{true, true, false, {}}, {false, false, true, {}}, {true, false, true, {}}};
    auto rep = multiplicity_report(in, 2);
    EXPECT_EQ(rep.distinct, 2);
    EXPECT_EQ(rep.non_hyperbolic, 1);
    EXPECT_TRUE(rep.distinct_pass);
    EXPECT_FALSE(rep.non_hyperbolic_pass);
    EXPECT_FALSE(rep.all_pass());
    EXPECT_THROW(multiplicity_report(in, 0), InputError);
}
