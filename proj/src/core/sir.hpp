#ifndef EPF_CORE_SIR_HPP
#define EPF_CORE_SIR_HPP

#include <vector>

#include "core/grid.hpp"

namespace epf
{

/// Trajectory of the time-dependent SIR model on a TimeGrid.
struct SirTrajectory
{
    TimeGrid grid;
    std::vector<double> s, i, r;
    double population = 0.0;
};

struct SirOptions
{
    double substep = 0.1; // internal RK4 step bound, days
    /// Accept beta/gamma samples below zero instead of raising a domain
    /// error. Only meant for the diagnostic unclamped-forecast mode, where
    /// divergent trajectories are the object of study; nonnegativity checks
    /// are disabled as well.
    bool allow_negative_rates = false;
};

/// Integrates dS/dt = -beta(t) I S / N, dI/dt = beta(t) I S / N - gamma(t) I,
/// dR/dt = gamma(t) I with fixed-step RK4. N = s0+i0+r0 is conserved by the
/// right-hand side; the integration asserts drift <= 1e-9 N.
SirTrajectory simulate_sir_tv(const RateFunction& beta, const RateFunction& gamma, double s0, double i0, double r0,
                              const TimeGrid& grid, const SirOptions& options = {});

} // namespace epf

#endif // EPF_CORE_SIR_HPP
