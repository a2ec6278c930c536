#ifndef EPF_CORE_GRID_HPP
#define EPF_CORE_GRID_HPP

#include <vector>

#include "core/common.hpp"

namespace epf
{

/// Uniform time grid over [t0, t_end] in days. All sampled quantities in the
/// toolkit share grids of this form; daily output means step == 1.
struct TimeGrid
{
    double t0 = 0.0;
    double step = 1.0;
    int count = 0;

    TimeGrid() = default;
    TimeGrid(double t0_, double step_, int count_);

    /// Daily grid with the given number of points starting at t0.
    static TimeGrid daily(double t0, int count)
    {
        return TimeGrid(t0, 1.0, count);
    }

    double t_end() const
    {
        return t0 + (count - 1) * step;
    }
    double time(int k) const
    {
        return t0 + k * step;
    }
    int size() const
    {
        return count;
    }

    /// Index of the grid point at time t; fails if t is not on the grid.
    int index_of(double t) const;

    bool operator==(const TimeGrid& other) const;
};

/// Nonnegative rate (beta or gamma) sampled on a TimeGrid. Off-grid values
/// are defined by linear interpolation; evaluation outside [t0, t_end] is
/// clamped to the boundary samples (only reachable through integrator
/// round-off at interval ends).
struct RateFunction
{
    TimeGrid grid;
    std::vector<double> values;

    RateFunction() = default;
    RateFunction(TimeGrid g, std::vector<double> v);

    double operator()(double t) const;

    double min_value() const;
    double max_value() const;

    /// Copy with all samples below zero replaced by zero; `clamped` receives
    /// the number of modified samples.
    RateFunction clamped_nonnegative(int* clamped = nullptr) const;
};

} // namespace epf

#endif // EPF_CORE_GRID_HPP
