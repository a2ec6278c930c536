#ifndef EPF_CORE_SERIES_HPP
#define EPF_CORE_SERIES_HPP

#include <string>
#include <vector>

#include "core/grid.hpp"

namespace epf
{

/// Calendar day. Stored as a proleptic-Gregorian day count so that date
/// arithmetic and contiguity checks are integer operations.
struct Date
{
    int days_since_epoch = 0; // days since 1970-01-01

    static Date from_string(const std::string& iso); // "YYYY-MM-DD"
    static Date from_ymd(int year, int month, int day);
    std::string to_string() const;

    Date next() const
    {
        return Date{days_since_epoch + 1};
    }
    int operator-(const Date& other) const
    {
        return days_since_epoch - other.days_since_epoch;
    }
    bool operator==(const Date& other) const = default;
};

/// Observed or simulated daily (I, R) counts for one region.
struct HealthSeries
{
    std::vector<Date> dates;
    std::vector<double> infected;
    std::vector<double> removed;
    double population = 0.0;

    int size() const
    {
        return static_cast<int>(infected.size());
    }
    double susceptible(int k) const
    {
        return population - infected[k] - removed[k];
    }
    TimeGrid grid() const
    {
        return TimeGrid::daily(0.0, size());
    }

    void validate() const;
};

/// Exact-fit rates recovered from a HealthSeries by finite differences.
struct ObservedRates
{
    TimeGrid grid;
    RateFunction beta_star;
    RateFunction gamma_star;
    std::vector<double> r0; // beta/gamma where gamma > 0, else 0
    int clamp_count = 0;    // samples raised to 0 to keep rates nonnegative
};

/// Reads a `date,infected,removed` CSV with ISO-8601 dates. Rows must be
/// consecutive days. No smoothing or scaling is applied.
HealthSeries load_csv(const std::string& path, double population);

/// Centered moving average of odd width `window`; boundary samples use the
/// largest symmetric window that fits, so the output has full length.
HealthSeries smooth(const HealthSeries& series, int window);

/// Multiplies infected and removed by `factor` (observation under-reporting
/// correction). Population is unchanged.
HealthSeries apply_adjustment(const HealthSeries& series, double factor);

/// Replaces `removed` by its running maximum. Returns the number of raised
/// samples through `repaired` if given.
HealthSeries enforce_monotone_removed(const HealthSeries& series, int* repaired = nullptr);

/// Recovers (beta*, gamma*) from a smoothed series: beta* = -N/(I*S) dS/dt,
/// gamma* = (1/I) dR/dt with central differences in the interior and one-sided
/// differences at the endpoints. Negative samples are clamped to zero and
/// counted.
ObservedRates observed_rates(const HealthSeries& series);

/// Second-order finite differences on a uniform grid: central interior,
/// first-order one-sided at both ends.
std::vector<double> finite_differences(const std::vector<double>& values, double step);

} // namespace epf

#endif // EPF_CORE_SERIES_HPP
