#ifndef EPF_CORE_COLLAPSE_HPP
#define EPF_CORE_COLLAPSE_HPP

#include <utility>
#include <vector>

#include "core/detailed.hpp"
#include "core/grid.hpp"

namespace epf
{

/// (S, I, R) aggregate of a detailed trajectory.
struct CollapsedTriple
{
    TimeGrid grid;
    std::vector<double> s, i, r;
    double population = 0.0;
};

/// Exact time derivatives of the collapsed aggregates, evaluated from the
/// detailed model right-hand side at each grid state.
struct CollapseDerivatives
{
    std::vector<double> ds, di, dr;
};

/// SEI5CHRD: S+E | Ip+Ia+Ips+Ims+Iss+C+H | R+D.
/// SE2IUR:   S+E1 | E2+I+U | R.
CollapsedTriple collapse_trajectory(const DetailedTrajectory& traj);

CollapseDerivatives collapse_derivatives(const DetailedTrajectory& traj, const std::vector<double>& mu);

/// Recovers the unique exact-fit SIR rates of a collapsed trajectory:
/// beta = -N/(I S) dS/dt, gamma = (1/I) dR/dt. Uses the supplied exact
/// derivatives when present, second-order finite differences otherwise.
/// Throws DegeneracyError (with the earliest index) if I <= 0 on the grid.
std::pair<RateFunction, RateFunction> recover_rates(const CollapsedTriple& col,
                                                    const CollapseDerivatives* exact = nullptr);

/// Index of the first grid point with I >= threshold_fraction * N; -1 if none.
int first_viable_index(const CollapsedTriple& col, double threshold_fraction = 1e-9);

/// Copy of the triple starting at grid index `from`.
CollapsedTriple trim_leading(const CollapsedTriple& col, int from);

} // namespace epf

#endif // EPF_CORE_COLLAPSE_HPP
