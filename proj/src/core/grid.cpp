#include "core/grid.hpp"

#include <algorithm>
#include <cmath>

namespace epf
{

TimeGrid::TimeGrid(double t0_, double step_, int count_)
    : t0(t0_)
    , step(step_)
    , count(count_)
{
    require(count_ >= 1, ErrorCode::InvalidArgument, "TimeGrid: count must be >= 1");
    require(step_ > 0.0, ErrorCode::InvalidArgument, "TimeGrid: step must be positive");
}

int TimeGrid::index_of(double t) const
{
    double k = (t - t0) / step;
    int ki = static_cast<int>(std::lround(k));
    require(ki >= 0 && ki < count && std::abs(k - ki) < 1e-9, ErrorCode::InvalidArgument,
            "TimeGrid: time " + std::to_string(t) + " is not a grid point");
    return ki;
}

bool TimeGrid::operator==(const TimeGrid& other) const
{
    return count == other.count && std::abs(t0 - other.t0) < 1e-12 && std::abs(step - other.step) < 1e-12;
}

RateFunction::RateFunction(TimeGrid g, std::vector<double> v)
    : grid(g)
    , values(std::move(v))
{
    require(static_cast<int>(values.size()) == grid.count, ErrorCode::InvalidArgument,
            "RateFunction: value count does not match grid");
}

double RateFunction::operator()(double t) const
{
    double x = (t - grid.t0) / grid.step;
    if (x <= 0.0) {
        return values.front();
    }
    if (x >= grid.count - 1) {
        return values.back();
    }
    int k = static_cast<int>(x);
    double w = x - k;
    return (1.0 - w) * values[k] + w * values[k + 1];
}

double RateFunction::min_value() const
{
    return *std::min_element(values.begin(), values.end());
}

double RateFunction::max_value() const
{
    return *std::max_element(values.begin(), values.end());
}

RateFunction RateFunction::clamped_nonnegative(int* clamped) const
{
    RateFunction out = *this;
    int n = 0;
    for (double& v : out.values) {
        if (v < 0.0) {
            v = 0.0;
            ++n;
        }
    }
    if (clamped != nullptr) {
        *clamped = n;
    }
    return out;
}

} // namespace epf
