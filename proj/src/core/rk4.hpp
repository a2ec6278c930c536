#ifndef EPF_CORE_RK4_HPP
#define EPF_CORE_RK4_HPP

#include <cmath>
#include <vector>

namespace epf
{

/// Classical fixed-step 4th-order Runge-Kutta over one grid interval.
/// Deriv signature: void(double t, const std::vector<double>& y,
/// std::vector<double>& dy). Fixed substepping (no adaptivity) keeps results
/// bit-identical across runs and platforms at this problem size.
template <class Deriv>
void rk4_integrate(std::vector<double>& y, double t_begin, double t_end, double max_substep, Deriv&& rhs)
{
    double span = t_end - t_begin;
    if (span <= 0.0) {
        return;
    }
    int steps = static_cast<int>(std::ceil(span / max_substep - 1e-12));
    if (steps < 1) {
        steps = 1;
    }
    double h = span / steps;
    int d = static_cast<int>(y.size());
    std::vector<double> k1(d), k2(d), k3(d), k4(d), tmp(d);
    for (int s = 0; s < steps; ++s) {
        double t = t_begin + s * h;
        rhs(t, y, k1);
        for (int j = 0; j < d; ++j) {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        rhs(t + 0.5 * h, tmp, k2);
        for (int j = 0; j < d; ++j) {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        rhs(t + 0.5 * h, tmp, k3);
        for (int j = 0; j < d; ++j) {
            tmp[j] = y[j] + h * k3[j];
        }
        rhs(t + h, tmp, k4);
        for (int j = 0; j < d; ++j) {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
}

} // namespace epf

#endif // EPF_CORE_RK4_HPP
