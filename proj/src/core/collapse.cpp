#include "core/collapse.hpp"

#include <cmath>

#include "core/series.hpp"

namespace epf
{

namespace
{

struct CollapseMap
{
    std::vector<int> s_cols, i_cols, r_cols;
};

CollapseMap collapse_map(DetailedModel model)
{
    if (model == DetailedModel::SEI5CHRD) {
        using namespace sei5chrd;
        return {{S, E}, {Ip, Ia, Ips, Ims, Iss, C, H}, {R, D}};
    }
    using namespace se2iur;
    return {{S, E1}, {E2, I, U}, {R}};
}

double sum_columns(const std::vector<std::vector<double>>& comp, const std::vector<int>& cols, int k)
{
    double v = 0.0;
    for (int c : cols) {
        v += comp[c][k];
    }
    return v;
}

double sum_entries(const std::vector<double>& v, const std::vector<int>& cols)
{
    double sum = 0.0;
    for (int c : cols) {
        sum += v[c];
    }
    return sum;
}

} // namespace

CollapsedTriple collapse_trajectory(const DetailedTrajectory& traj)
{
    CollapseMap map = collapse_map(traj.model);
    CollapsedTriple out;
    out.grid = traj.grid;
    out.population = traj.population;
    int n = traj.grid.count;
    out.s.resize(n);
    out.i.resize(n);
    out.r.resize(n);
    for (int k = 0; k < n; ++k) {
        out.s[k] = sum_columns(traj.comp, map.s_cols, k);
        out.i[k] = sum_columns(traj.comp, map.i_cols, k);
        out.r[k] = sum_columns(traj.comp, map.r_cols, k);
    }
    return out;
}

CollapseDerivatives collapse_derivatives(const DetailedTrajectory& traj, const std::vector<double>& mu)
{
    CollapseMap map = collapse_map(traj.model);
    int n = traj.grid.count;
    int d = compartment_count(traj.model);
    CollapseDerivatives out;
    out.ds.resize(n);
    out.di.resize(n);
    out.dr.resize(n);
    std::vector<double> state(d), dstate(d);
    for (int k = 0; k < n; ++k) {
        for (int c = 0; c < d; ++c) {
            state[c] = traj.comp[c][k];
        }
        detailed_rhs(traj.model, mu, state, dstate);
        out.ds[k] = sum_entries(dstate, map.s_cols);
        out.di[k] = sum_entries(dstate, map.i_cols);
        out.dr[k] = sum_entries(dstate, map.r_cols);
    }
    return out;
}

std::pair<RateFunction, RateFunction> recover_rates(const CollapsedTriple& col, const CollapseDerivatives* exact)
{
    int n = col.grid.count;
    double N = col.population;
    for (int k = 0; k < n; ++k) {
        if (col.i[k] <= 0.0) {
            throw DegeneracyError(k, "recover_rates: collapsed I is zero at grid index " + std::to_string(k));
        }
    }

    std::vector<double> ds, dr;
    if (exact != nullptr) {
        require(static_cast<int>(exact->ds.size()) == n && static_cast<int>(exact->dr.size()) == n,
                ErrorCode::InvalidArgument, "recover_rates: exact derivatives do not match the grid");
        ds = exact->ds;
        dr = exact->dr;
    }
    else {
        ds = finite_differences(col.s, col.grid.step);
        dr = finite_differences(col.r, col.grid.step);
    }

    std::vector<double> beta(n), gamma(n);
    for (int k = 0; k < n; ++k) {
        require(col.s[k] > 0.0, ErrorCode::Domain,
                "recover_rates: collapsed S is zero at grid index " + std::to_string(k));
        beta[k] = -N / (col.i[k] * col.s[k]) * ds[k];
        gamma[k] = dr[k] / col.i[k];
    }
    return {RateFunction(col.grid, std::move(beta)), RateFunction(col.grid, std::move(gamma))};
}

int first_viable_index(const CollapsedTriple& col, double threshold_fraction)
{
    double threshold = threshold_fraction * col.population;
    for (int k = 0; k < col.grid.count; ++k) {
        if (col.i[k] >= threshold) {
            return k;
        }
    }
    return -1;
}

CollapsedTriple trim_leading(const CollapsedTriple& col, int from)
{
    require(from >= 0 && from < col.grid.count, ErrorCode::InvalidArgument, "trim_leading: index out of range");
    CollapsedTriple out;
    out.grid = TimeGrid(col.grid.time(from), col.grid.step, col.grid.count - from);
    out.population = col.population;
    out.s.assign(col.s.begin() + from, col.s.end());
    out.i.assign(col.i.begin() + from, col.i.end());
    out.r.assign(col.r.begin() + from, col.r.end());
    return out;
}

} // namespace epf
