#include "core/sir.hpp"

#include <cmath>

#include "core/rk4.hpp"

namespace epf
{

SirTrajectory simulate_sir_tv(const RateFunction& beta, const RateFunction& gamma, double s0, double i0, double r0,
                              const TimeGrid& grid, const SirOptions& options)
{
    double N = s0 + i0 + r0;
    require(N > 0.0, ErrorCode::InvalidArgument, "simulate_sir_tv: population must be positive");
    require(s0 >= 0.0 && i0 >= 0.0 && r0 >= 0.0, ErrorCode::InvalidArgument,
            "simulate_sir_tv: initial compartments must be nonnegative");
    require(beta.grid.t0 <= grid.t0 + 1e-9 && beta.grid.t_end() >= grid.t_end() - 1e-9, ErrorCode::InvalidArgument,
            "simulate_sir_tv: beta does not cover the grid");
    require(gamma.grid.t0 <= grid.t0 + 1e-9 && gamma.grid.t_end() >= grid.t_end() - 1e-9, ErrorCode::InvalidArgument,
            "simulate_sir_tv: gamma does not cover the grid");
    if (!options.allow_negative_rates) {
        require(beta.min_value() >= 0.0 && gamma.min_value() >= 0.0, ErrorCode::Domain,
                "simulate_sir_tv: negative rate sample (clamp first, or enable the diagnostic mode)");
    }

    SirTrajectory out;
    out.grid = grid;
    out.population = N;
    out.s.resize(grid.count);
    out.i.resize(grid.count);
    out.r.resize(grid.count);

    std::vector<double> y = {s0, i0, r0};
    auto rhs = [&](double t, const std::vector<double>& u, std::vector<double>& du) {
        double infection = beta(t) * u[1] * u[0] / N;
        double recovery = gamma(t) * u[1];
        du[0] = -infection;
        du[1] = infection - recovery;
        du[2] = recovery;
    };

    const bool strict = !options.allow_negative_rates;
    for (int k = 0; k < grid.count; ++k) {
        if (k > 0) {
            rk4_integrate(y, grid.time(k - 1), grid.time(k), options.substep, rhs);
        }
        out.s[k] = y[0];
        out.i[k] = y[1];
        out.r[k] = y[2];
        if (strict) {
            require(std::isfinite(y[0]) && std::isfinite(y[1]) && std::isfinite(y[2]), ErrorCode::Numeric,
                    "simulate_sir_tv: non-finite state at t = " + std::to_string(grid.time(k)));
            require(y[0] >= -1e-12 * N && y[1] >= -1e-12 * N && y[2] >= -1e-12 * N, ErrorCode::Numeric,
                    "simulate_sir_tv: negative compartment at t = " + std::to_string(grid.time(k)));
            require(std::abs(y[0] + y[1] + y[2] - N) <= 1e-9 * N, ErrorCode::Numeric,
                    "simulate_sir_tv: population drift at t = " + std::to_string(grid.time(k)));
        }
    }
    return out;
}

} // namespace epf
