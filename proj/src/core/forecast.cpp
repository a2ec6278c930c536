#include "core/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "core/common.hpp"
#include "core/sir.hpp"

namespace epf
{

Forecast propagate_forecast(const RateFunction& beta, const RateFunction& gamma, double population, double i0,
                            double r0, double t_start, int horizon, const ForecastOptions& options)
{
    require(horizon >= 0, ErrorCode::InvalidArgument, "forecast horizon must be nonnegative");
    require(population > 0.0, ErrorCode::InvalidArgument, "population must be positive");
    Forecast out;
    out.t_start = t_start;
    if (horizon == 0)
        return out;

    const TimeGrid grid{t_start, 1.0, horizon + 1};
    for (int k = 0; k < grid.count; ++k)
    {
        const double t = grid.time(k);
        if (beta(t) < 0.0)
            ++out.negative_rate_points;
        if (gamma(t) < 0.0)
            ++out.negative_rate_points;
    }

    SirOptions sir_options;
    sir_options.substep = options.substep;
    SirTrajectory traj;
    if (options.clamp_negative_rates)
    {
        const RateFunction beta_c = beta.clamped_nonnegative();
        const RateFunction gamma_c = gamma.clamped_nonnegative();
        traj = simulate_sir_tv(beta_c, gamma_c, population - i0 - r0, i0, r0, grid, sir_options);
    }
    else
    {
        sir_options.allow_negative_rates = true;
        traj = simulate_sir_tv(beta, gamma, population - i0 - r0, i0, r0, grid, sir_options);
    }
    out.i_pred = traj.i;
    out.r_pred = traj.r;
    return out;
}

Forecast combine_forecasts(const std::vector<Forecast>& members, const std::vector<double>& weights)
{
    require(!members.empty(), ErrorCode::InvalidArgument, "no forecasts to combine");
    std::vector<double> w = weights;
    if (w.empty())
        w.assign(members.size(), 1.0);
    require(w.size() == members.size(), ErrorCode::InvalidArgument, "one weight per forecast member required");
    double total = 0.0;
    for (double x : w)
    {
        require(x >= 0.0, ErrorCode::InvalidArgument, "forecast weights must be nonnegative");
        total += x;
    }
    require(total > 0.0, ErrorCode::InvalidArgument, "forecast weights sum to zero");

    Forecast out;
    out.t_start = members.front().t_start;
    out.i_pred.assign(members.front().size(), 0.0);
    out.r_pred.assign(members.front().size(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m)
    {
        const Forecast& f = members[m];
        require(f.size() == out.i_pred.size() && std::abs(f.t_start - out.t_start) <= 1e-9,
                ErrorCode::InvalidArgument, "forecast members cover different windows");
        const double wm = w[m] / total;
        for (std::size_t k = 0; k < f.size(); ++k)
        {
            out.i_pred[k] += wm * f.i_pred[k];
            out.r_pred[k] += wm * f.r_pred[k];
        }
        out.negative_rate_points += f.negative_rate_points;
    }
    return out;
}

ForecastErrors forecast_errors(const std::vector<double>& predicted, const std::vector<double>& truth)
{
    require(!predicted.empty(), ErrorCode::InvalidArgument, "empty prediction window");
    require(predicted.size() == truth.size(), ErrorCode::InvalidArgument,
            "prediction and truth lengths do not match");
    const double q = static_cast<double>(truth.size());
    double mean = 0.0;
    for (double x : truth)
        mean += x;
    mean /= q;
    require(mean > 0.0, ErrorCode::Domain, "truth series has nonpositive mean");

    ForecastErrors e;
    double sum_abs = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
    {
        const double d = std::abs(predicted[k] - truth[k]);
        sum_abs += d;
        sum_sq += d * d;
        e.linf = std::max(e.linf, d);
    }
    e.l1 = sum_abs / (q * mean);
    e.l2 = std::sqrt(sum_sq) / (std::sqrt(q) * mean);
    e.linf /= mean;
    return e;
}

ForecastErrors evaluate_infected(const Forecast& forecast, const HealthSeries& truth, int truth_offset)
{
    require(forecast.size() >= 1, ErrorCode::InvalidArgument, "empty prediction window");
    require(truth_offset >= 0 && truth_offset + forecast.size() <= truth.size(), ErrorCode::InvalidArgument,
            "forecast window extends past the truth series");
    const std::vector<double> slice(truth.infected.begin() + truth_offset,
                                    truth.infected.begin() + truth_offset + static_cast<long>(forecast.size()));
    return forecast_errors(forecast.i_pred, slice);
}

Forecast baseline_forecast(const HealthSeries& observed, const ObservedRates& rates, int t_index, int horizon,
                           int tail, double substep)
{
    require(tail >= 1, ErrorCode::InvalidArgument, "baseline tail must be at least one sample");
    require(t_index >= tail - 1 && t_index < static_cast<int>(observed.size()), ErrorCode::InvalidArgument,
            "baseline window exceeds the observed series");
    require(static_cast<int>(rates.grid.count) == static_cast<int>(observed.size()), ErrorCode::InvalidArgument,
            "recovered rates do not match the observed series");

    double beta_bar = 0.0;
    double gamma_bar = 0.0;
    for (int k = t_index - tail + 1; k <= t_index; ++k)
    {
        beta_bar += rates.beta_star.values[static_cast<std::size_t>(k)];
        gamma_bar += rates.gamma_star.values[static_cast<std::size_t>(k)];
    }
    beta_bar /= static_cast<double>(tail);
    gamma_bar /= static_cast<double>(tail);

    const double t_start = observed.grid().time(t_index);
    Forecast out;
    out.t_start = t_start;
    if (horizon == 0)
        return out;
    const TimeGrid grid{t_start, 1.0, horizon + 1};
    const RateFunction beta{grid, std::vector<double>(static_cast<std::size_t>(grid.count), beta_bar)};
    const RateFunction gamma{grid, std::vector<double>(static_cast<std::size_t>(grid.count), gamma_bar)};
    ForecastOptions options;
    options.substep = substep;
    Forecast f = propagate_forecast(beta, gamma, observed.population,
                                    observed.infected[static_cast<std::size_t>(t_index)],
                                    observed.removed[static_cast<std::size_t>(t_index)], t_start, horizon, options);
    return f;
}

} // namespace epf
