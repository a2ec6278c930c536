#ifndef EPF_CORE_FORECAST_HPP
#define EPF_CORE_FORECAST_HPP

#include <vector>

#include "core/grid.hpp"
#include "core/series.hpp"

namespace epf
{

/// Predicted case counts on [t_start, t_start + horizon] with daily samples;
/// sample 0 reproduces the propagation anchor, so a forecast of horizon tau
/// holds tau + 1 points. A zero horizon yields no points at all.
struct Forecast
{
    double t_start = 0.0;
    std::vector<double> i_pred;
    std::vector<double> r_pred;
    int negative_rate_points = 0; // rate samples below zero inside the window
    std::size_t size() const
    {
        return i_pred.size();
    }
};

struct ForecastOptions
{
    double substep = 0.1;
    // Clamps negative fitted rates to zero before propagating. Disabling
    // this is a diagnostic mode: the integration runs unchecked, so the
    // returned counts may be non-finite or out of range.
    bool clamp_negative_rates = true;
};

Forecast propagate_forecast(const RateFunction& beta, const RateFunction& gamma, double population, double i0,
                            double r0, double t_start, int horizon, const ForecastOptions& options = {});

/// Pointwise weighted mean of member forecasts; empty weights mean uniform.
/// Member diagnostics are summed.
Forecast combine_forecasts(const std::vector<Forecast>& members, const std::vector<double>& weights = {});

struct ForecastErrors
{
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

/// Deviation norms scaled to be unit-free: each norm is divided by the mean
/// of the truth series (and the l1/l2 sums by the sample count), so a value
/// of 0.1 reads as a 10% typical error.
ForecastErrors forecast_errors(const std::vector<double>& predicted, const std::vector<double>& truth);

/// Errors of the predicted infected counts against `truth`, with forecast
/// sample 0 aligned to `truth_offset`.
ForecastErrors evaluate_infected(const Forecast& forecast, const HealthSeries& truth, int truth_offset);

/// Frozen-rate reference forecast: both rates are held at the mean of their
/// last `tail` recovered values up to t_index, and the observed state at
/// t_index is propagated forward.
Forecast baseline_forecast(const HealthSeries& observed, const ObservedRates& rates, int t_index, int horizon,
                           int tail = 3, double substep = 0.1);

} // namespace epf

#endif // EPF_CORE_FORECAST_HPP
