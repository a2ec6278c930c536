#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "core/series.hpp"
#include "core/sir.hpp"
#include "helpers.hpp"

using namespace epf;
using epf_test::TempDir;
using epf_test::thrown_code;
using epf_test::write_file;

namespace
{

HealthSeries make_series(const std::vector<double>& infected, const std::vector<double>& removed, double population)
{
    HealthSeries s;
    s.population = population;
    Date d = Date::from_string("2020-03-01");
    for (std::size_t k = 0; k < infected.size(); ++k)
    {
        s.dates.push_back(d);
        d = d.next();
    }
    s.infected = infected;
    s.removed = removed;
    return s;
}

std::string csv_rows(const std::vector<std::string>& rows)
{
    std::string out = "date,infected,removed\n";
    for (const auto& r : rows)
        out += r + "\n";
    return out;
}

} // namespace

TEST_CASE("Date: ISO round trip and arithmetic")
{
    const Date d = Date::from_string("2020-02-29");
    CHECK(d.to_string() == "2020-02-29");
    CHECK(d.next().to_string() == "2020-03-01");
    CHECK(d.next() - d == 1);
    CHECK(thrown_code([] { Date::from_string("2021-02-29"); }) == ErrorCode::Parse);
    CHECK(thrown_code([] { Date::from_string("not-a-date"); }) == ErrorCode::Parse);
}

TEST_CASE("load_csv: reads rows verbatim")
{
    TempDir dir;
    const std::string path =
        write_file(dir.file("obs.csv"), csv_rows({"2020-03-01,10,0", "2020-03-02,12,1", "2020-03-03,15,2"}));
    const HealthSeries s = load_csv(path, 1e6);
    REQUIRE(s.size() == 3);
    CHECK(s.infected == std::vector<double>{10.0, 12.0, 15.0});
    CHECK(s.removed == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(s.dates.front().to_string() == "2020-03-01");
    CHECK(s.population == doctest::Approx(1e6));
}

TEST_CASE("load_csv: negative value is a parse error")
{
    TempDir dir;
    const std::string path = write_file(dir.file("obs.csv"), csv_rows({"2020-03-01,10,0", "2020-03-02,-1,1"}));
    CHECK(thrown_code([&] { load_csv(path, 1e6); }) == ErrorCode::Parse);
}

TEST_CASE("load_csv: skipped day is a contiguity error")
{
    TempDir dir;
    const std::string path =
        write_file(dir.file("obs.csv"), csv_rows({"2020-03-01,10,0", "2020-03-03,12,1", "2020-03-04,13,1"}));
    try
    {
        load_csv(path, 1e6);
        FAIL("expected a parse error");
    }
    catch (const EpfError& e)
    {
        CHECK(e.code() == ErrorCode::Parse);
        CHECK(std::string(e.what()).find("consecutive") != std::string::npos);
    }
}

TEST_CASE("load_csv: malformed inputs are rejected")
{
    TempDir dir;
    CHECK(thrown_code([&] { load_csv(dir.file("absent.csv"), 1e6); }) == ErrorCode::Io);
    const std::string bad_header = write_file(dir.file("h.csv"), "day,cases\n2020-03-01,1\n");
    CHECK(thrown_code([&] { load_csv(bad_header, 1e6); }) == ErrorCode::Parse);
    const std::string bad_value = write_file(dir.file("v.csv"), csv_rows({"2020-03-01,ten,0", "2020-03-02,11,0"}));
    CHECK(thrown_code([&] { load_csv(bad_value, 1e6); }) == ErrorCode::Parse);
}

TEST_CASE("smooth: constant series is unchanged by any odd window")
{
    const HealthSeries s = make_series(std::vector<double>(12, 40.0), std::vector<double>(12, 7.0), 1e6);
    const HealthSeries out = smooth(s, 7);
    for (int k = 0; k < out.size(); ++k)
    {
        CHECK(out.infected[k] == doctest::Approx(40.0));
        CHECK(out.removed[k] == doctest::Approx(7.0));
    }
}

TEST_CASE("smooth: ramp matches a direct shrinking-window average")
{
    const std::vector<double> ramp = {0, 1, 2, 3, 4, 5, 6};
    const HealthSeries s = make_series(ramp, std::vector<double>(7, 0.0), 1e6);
    const HealthSeries out = smooth(s, 3);

    for (int k = 0; k < 7; ++k)
    {
        const int h = std::min({1, k, 6 - k});
        double sum = 0.0;
        for (int j = k - h; j <= k + h; ++j)
            sum += ramp[static_cast<std::size_t>(j)];
        CHECK(out.infected[k] == doctest::Approx(sum / (2 * h + 1)));
    }
    CHECK(out.size() == s.size());
}

TEST_CASE("smooth: window 1 is the identity")
{
    const HealthSeries s = make_series({5, 8, 2, 9}, {0, 1, 1, 2}, 1e6);
    const HealthSeries out = smooth(s, 1);
    CHECK(out.infected == s.infected);
    CHECK(out.removed == s.removed);
}

TEST_CASE("smooth: even or oversized windows are rejected")
{
    const HealthSeries s = make_series({5, 8, 2, 9}, {0, 1, 1, 2}, 1e6);
    CHECK(thrown_code([&] { smooth(s, 4); }) == ErrorCode::InvalidArgument);
    CHECK(thrown_code([&] { smooth(s, 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("smooth: long ramp keeps its mean within 1 percent")
{
    std::vector<double> ramp(70);
    for (std::size_t k = 0; k < ramp.size(); ++k)
        ramp[k] = 10.0 + static_cast<double>(k);
    const HealthSeries s = make_series(ramp, std::vector<double>(70, 0.0), 1e6);
    const HealthSeries out = smooth(s, 7);
    double mean_in = 0.0, mean_out = 0.0;
    for (int k = 0; k < s.size(); ++k)
    {
        mean_in += s.infected[k];
        mean_out += out.infected[k];
    }
    CHECK(std::abs(mean_out - mean_in) / mean_in <= 0.01);
}

TEST_CASE("apply_adjustment: scales both counts, keeps the population")
{
    const HealthSeries s = make_series({100, 100}, {50, 50}, 12e6);
    const HealthSeries out = apply_adjustment(s, 15.0);
    CHECK(out.infected == std::vector<double>{1500.0, 1500.0});
    CHECK(out.removed == std::vector<double>{750.0, 750.0});
    CHECK(out.population == doctest::Approx(12e6));
}

TEST_CASE("apply_adjustment: factor 1 is the identity")
{
    const HealthSeries s = make_series({100, 120}, {50, 60}, 12e6);
    const HealthSeries out = apply_adjustment(s, 1.0);
    CHECK(out.infected == s.infected);
    CHECK(out.removed == s.removed);
}

TEST_CASE("apply_adjustment: overflowing the population is a domain error")
{
    const HealthSeries s = make_series({400, 400}, {200, 200}, 1000.0);
    CHECK(thrown_code([&] { apply_adjustment(s, 2.0); }) == ErrorCode::Domain);
}

TEST_CASE("apply_adjustment commutes with smooth")
{
    const HealthSeries s = make_series({100, 140, 90, 160, 120, 150, 110}, {10, 12, 15, 15, 18, 22, 30}, 1e6);
    const HealthSeries a = apply_adjustment(smooth(s, 3), 4.0);
    const HealthSeries b = smooth(apply_adjustment(s, 4.0), 3);
    for (int k = 0; k < s.size(); ++k)
    {
        CHECK(a.infected[k] == doctest::Approx(b.infected[k]).epsilon(1e-12));
        CHECK(a.removed[k] == doctest::Approx(b.removed[k]).epsilon(1e-12));
    }
}

TEST_CASE("enforce_monotone_removed: running maximum with repair count")
{
    const HealthSeries s = make_series({10, 10, 10, 10, 10}, {5, 4, 6, 3, 7}, 1e6);
    int repaired = 0;
    const HealthSeries out = enforce_monotone_removed(s, &repaired);
    CHECK(out.removed == std::vector<double>{5, 5, 6, 6, 7});
    CHECK(repaired == 2);
    CHECK(out.infected == s.infected);
}

TEST_CASE("finite_differences: exact for linear data, central interior")
{
    const std::vector<double> linear = {3, 5, 7, 9, 11};
    const std::vector<double> d = finite_differences(linear, 1.0);
    for (double v : d)
        CHECK(v == doctest::Approx(2.0));

    // Central differences are exact on quadratics away from the ends.
    std::vector<double> quad(9);
    for (std::size_t k = 0; k < quad.size(); ++k)
        quad[k] = 0.5 * static_cast<double>(k * k);
    const std::vector<double> dq = finite_differences(quad, 1.0);
    for (std::size_t k = 1; k + 1 < quad.size(); ++k)
        CHECK(dq[k] == doctest::Approx(static_cast<double>(k)));
}

TEST_CASE("observed_rates: static susceptibles mean zero transmission")
{
    const HealthSeries s = make_series(std::vector<double>(10, 100.0), std::vector<double>(10, 50.0), 1e6);
    const ObservedRates r = observed_rates(s);
    for (int k = 0; k < 10; ++k)
    {
        CHECK(r.beta_star.values[k] == doctest::Approx(0.0));
        CHECK(r.gamma_star.values[k] == doctest::Approx(0.0));
    }
}

TEST_CASE("observed_rates: linear removals give gamma = slope over infected")
{
    std::vector<double> removed(12);
    for (std::size_t k = 0; k < removed.size(); ++k)
        removed[k] = 40.0 + 10.0 * static_cast<double>(k);
    const HealthSeries s = make_series(std::vector<double>(12, 200.0), removed, 1e6);
    const ObservedRates r = observed_rates(s);
    for (int k = 0; k < s.size(); ++k)
        CHECK(r.gamma_star.values[k] == doctest::Approx(10.0 / 200.0).epsilon(1e-12));
}

TEST_CASE("observed_rates: recovers constant SIR rates from simulated data")
{
    const double beta0 = 0.3, gamma0 = 0.1, n = 1e6;
    const TimeGrid grid = TimeGrid::daily(0.0, 61);
    const RateFunction beta(grid, std::vector<double>(61, beta0));
    const RateFunction gamma(grid, std::vector<double>(61, gamma0));
    const SirTrajectory traj = simulate_sir_tv(beta, gamma, n - 100.0, 100.0, 0.0, grid);

    HealthSeries s = make_series(traj.i, traj.r, n);
    const ObservedRates r = observed_rates(s);
    for (int k = 1; k + 1 < s.size(); ++k)
    {
        CHECK(r.beta_star.values[k] == doctest::Approx(beta0).epsilon(5e-3));
        CHECK(r.gamma_star.values[k] == doctest::Approx(gamma0).epsilon(5e-3));
    }
    // One-sided endpoint differences are first order; allow a looser band.
    CHECK(r.beta_star.values[0] == doctest::Approx(beta0).epsilon(5e-2));
    CHECK(r.gamma_star.values.back() == doctest::Approx(gamma0).epsilon(5e-2));
}

TEST_CASE("observed_rates: round trip reproduces slow observations")
{
    // The daily truncation bias in the recovered rates compounds with the
    // epidemic growth rate, so the 1e-3 round-trip band applies to slowly
    // varying data.
    // Starting with removals already on the books keeps the pointwise
    // relative error meaningful; at R ≈ 0 the first-order endpoint bias in
    // gamma*(0) dominates any denominator.
    const double beta0 = 0.13, gamma0 = 0.1, n = 1e6;
    const TimeGrid grid = TimeGrid::daily(0.0, 61);
    const RateFunction beta(grid, std::vector<double>(61, beta0));
    const RateFunction gamma(grid, std::vector<double>(61, gamma0));
    const SirTrajectory traj = simulate_sir_tv(beta, gamma, n - 3000.0, 1000.0, 2000.0, grid);

    HealthSeries s = make_series(traj.i, traj.r, n);
    const ObservedRates r = observed_rates(s);
    const SirTrajectory back = simulate_sir_tv(r.beta_star, r.gamma_star, n - s.infected[0] - s.removed[0],
                                               s.infected[0], s.removed[0], grid);
    double worst = 0.0;
    for (int k = 0; k < s.size(); ++k)
    {
        worst = std::max(worst, std::abs(back.i[k] - s.infected[k]) / std::max(s.infected[k], 1.0));
        worst = std::max(worst, std::abs(back.r[k] - s.removed[k]) / std::max(s.removed[k], 1.0));
    }
    CHECK(worst <= 1e-3);
}

TEST_CASE("observed_rates: zero infected names the offending date")
{
    const HealthSeries s = make_series({10, 0, 12}, {1, 2, 3}, 1e6);
    try
    {
        observed_rates(s);
        FAIL("expected a domain error");
    }
    catch (const EpfError& e)
    {
        CHECK(e.code() == ErrorCode::Domain);
        CHECK(std::string(e.what()).find("2020-03-02") != std::string::npos);
    }
}

TEST_CASE("observed_rates: negative finite differences are clamped and counted")
{
    // Infected collapsing faster than removals grow makes S increase, which
    // would give a negative transmission rate.
    const HealthSeries s = make_series({1000, 500, 250, 125, 60}, {10, 11, 12, 13, 14}, 1e6);
    const ObservedRates r = observed_rates(s);
    CHECK(r.clamp_count > 0);
    for (int k = 0; k < s.size(); ++k)
    {
        CHECK(r.beta_star.values[k] >= 0.0);
        CHECK(r.gamma_star.values[k] >= 0.0);
    }
}

TEST_CASE("observed_rates: r0 is the rate ratio where gamma is positive")
{
    std::vector<double> removed(8);
    for (std::size_t k = 0; k < removed.size(); ++k)
        removed[k] = 10.0 * static_cast<double>(k);
    std::vector<double> infected(8);
    for (std::size_t k = 0; k < infected.size(); ++k)
        infected[k] = 500.0 + 30.0 * static_cast<double>(k);
    const HealthSeries s = make_series(infected, removed, 1e6);
    const ObservedRates r = observed_rates(s);
    for (int k = 0; k < s.size(); ++k)
    {
        if (r.gamma_star.values[k] > 0.0)
            CHECK(r.r0[k] == doctest::Approx(r.beta_star.values[k] / r.gamma_star.values[k]));
        else
            CHECK(r.r0[k] == doctest::Approx(0.0));
    }
}

TEST_CASE("HealthSeries: validation rejects impossible counts")
{
    HealthSeries s = make_series({10, 20}, {5, 5}, 1e6);
    s.infected[1] = 2e6;
    CHECK(thrown_code([&] { s.validate(); }) == ErrorCode::Domain);
    const HealthSeries tiny = make_series({10}, {5}, 1e6);
    CHECK(thrown_code([&] { tiny.validate(); }) == ErrorCode::InvalidArgument);
}
