#include "core/multiregion.hpp"

#include <cmath>

#include "core/common.hpp"
#include "core/rk4.hpp"
#include "core/series.hpp"

namespace epf
{

namespace
{

void require_coverage(const TimeGrid& inner, const TimeGrid& outer, const char* what)
{
    require(inner.t0 <= outer.t0 + 1e-9 && inner.t_end() >= outer.t_end() - 1e-9, ErrorCode::InvalidArgument,
            std::string(what) + " does not cover the simulation grid");
}

void require_region_inputs(const std::vector<RateFunction>& beta, const std::vector<RateFunction>& gamma,
                           const MobilityField& lambda, const TimeGrid& grid, Eigen::Index p)
{
    require(p >= 1, ErrorCode::InvalidArgument, "at least one region required");
    require(static_cast<Eigen::Index>(beta.size()) == p && static_cast<Eigen::Index>(gamma.size()) == p,
            ErrorCode::InvalidArgument, "one rate function per region required");
    require(lambda.regions() == p, ErrorCode::InvalidArgument, "mobility field does not match the region count");
    for (const auto& f : beta)
        require_coverage(f.grid, grid, "a transmission rate");
    for (const auto& f : gamma)
        require_coverage(f.grid, grid, "a removal rate");
    // Mobility fields clamp outside their grid, so constant-in-time inputs
    // given at a single instant are fine.
}

void require_row_stochastic(const MobilityField& field, const char* what)
{
    for (std::size_t k = 0; k < field.values.size(); ++k)
    {
        const Eigen::MatrixXd& m = field.values[k];
        for (Eigen::Index i = 0; i < m.rows(); ++i)
        {
            require(m.row(i).maxCoeff() <= 1.0 + 1e-9, ErrorCode::InvalidArgument,
                    std::string(what) + ": entries must be probabilities in [0, 1] (row " + std::to_string(i) +
                        ", grid point " + std::to_string(k) + ")");
            require(std::abs(m.row(i).sum() - 1.0) <= 1e-6, ErrorCode::InvalidArgument,
                    std::string(what) + ": row " + std::to_string(i) + " must sum to one at grid point " +
                        std::to_string(k));
        }
    }
}

} // namespace

MobilityField::MobilityField(TimeGrid g, std::vector<Eigen::MatrixXd> v) : grid(g), values(std::move(v))
{
    require(values.size() == grid.count, ErrorCode::InvalidArgument, "one mobility matrix per grid point required");
    const Eigen::Index p = values.front().rows();
    for (const auto& m : values)
    {
        require(m.rows() == p && m.cols() == p, ErrorCode::InvalidArgument, "mobility matrices must be square");
        require(m.minCoeff() >= 0.0, ErrorCode::InvalidArgument, "mobility rates must be nonnegative");
    }
}

Eigen::MatrixXd MobilityField::at(double t) const
{
    require(!values.empty(), ErrorCode::InvalidArgument, "empty mobility field");
    if (t <= grid.t0)
        return values.front();
    if (t >= grid.t_end())
        return values.back();
    const double x = (t - grid.t0) / grid.step;
    const int k = std::min(static_cast<int>(std::floor(x)), static_cast<int>(grid.count) - 2);
    const double frac = x - k;
    return (1.0 - frac) * values[static_cast<std::size_t>(k)] + frac * values[static_cast<std::size_t>(k) + 1];
}

MobilityField scale_mobility_offdiagonal(const MobilityField& field, double factor)
{
    require(factor >= 0.0 && factor <= 1.0, ErrorCode::InvalidArgument, "mobility scale must be in [0, 1]");
    MobilityField out = field;
    for (auto& m : out.values)
    {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
        {
            double moved = 0.0;
            for (Eigen::Index j = 0; j < m.cols(); ++j)
            {
                if (j == i)
                    continue;
                moved += (1.0 - factor) * m(i, j);
                m(i, j) *= factor;
            }
            m(i, i) += moved;
        }
    }
    return out;
}

MultiRegionTrajectory simulate_eulerian(const std::vector<RateFunction>& beta, const std::vector<RateFunction>& gamma,
                                        const MobilityField& lambda, const Eigen::VectorXd& s0,
                                        const Eigen::VectorXd& i0, const Eigen::VectorXd& r0,
                                        const Eigen::VectorXd& n0, const TimeGrid& grid, double substep)
{
    const Eigen::Index p = s0.size();
    require_region_inputs(beta, gamma, lambda, grid, p);
    require_row_stochastic(lambda, "mobility");
    require(i0.size() == p && r0.size() == p && n0.size() == p, ErrorCode::InvalidArgument,
            "initial state does not match the region count");
    require(substep > 0.0, ErrorCode::InvalidArgument, "substep must be positive");
    double total = 0.0;
    for (Eigen::Index a = 0; a < p; ++a)
    {
        require(s0(a) >= 0.0 && i0(a) >= 0.0 && r0(a) >= 0.0, ErrorCode::Domain, "densities must be nonnegative");
        require(std::abs(s0(a) + i0(a) + r0(a) - 1.0) <= 1e-9, ErrorCode::Domain,
                "per-region densities must sum to one");
        require(n0(a) > 0.0, ErrorCode::Domain, "region populations must be positive");
        total += n0(a);
    }

    MultiRegionTrajectory traj;
    traj.grid = grid;
    traj.s.resize(p, grid.count);
    traj.i.resize(p, grid.count);
    traj.r.resize(p, grid.count);
    traj.n.resize(p, grid.count);

    // State layout: [s_1..s_P, i_1..i_P, r_1..r_P, n_1..n_P].
    std::vector<double> y(static_cast<std::size_t>(4 * p));
    for (Eigen::Index a = 0; a < p; ++a)
    {
        y[static_cast<std::size_t>(a)] = s0(a);
        y[static_cast<std::size_t>(p + a)] = i0(a);
        y[static_cast<std::size_t>(2 * p + a)] = r0(a);
        y[static_cast<std::size_t>(3 * p + a)] = n0(a);
    }

    const auto rhs = [&](double t, const std::vector<double>& state, std::vector<double>& d) {
        const Eigen::MatrixXd lam = lambda.at(t);
        for (Eigen::Index a = 0; a < p; ++a)
        {
            // Arrivals from every region j infect locals at rate beta_j.
            double force = 0.0;
            for (Eigen::Index j = 0; j < p; ++j)
                force += beta[static_cast<std::size_t>(j)](t) * lam(j, a) * state[static_cast<std::size_t>(p + j)];
            const double s = state[static_cast<std::size_t>(a)];
            const double i = state[static_cast<std::size_t>(p + a)];
            const double g = gamma[static_cast<std::size_t>(a)](t);
            d[static_cast<std::size_t>(a)] = -s * force;
            d[static_cast<std::size_t>(p + a)] = s * force - g * i;
            d[static_cast<std::size_t>(2 * p + a)] = g * i;
            double dn = 0.0;
            for (Eigen::Index j = 0; j < p; ++j)
            {
                if (j == a)
                    continue;
                dn += lam(j, a) * state[static_cast<std::size_t>(3 * p + j)] -
                      lam(a, j) * state[static_cast<std::size_t>(3 * p + a)];
            }
            d[static_cast<std::size_t>(3 * p + a)] = dn;
        }
    };

    for (std::size_t k = 0; k < grid.count; ++k)
    {
        if (k > 0)
            rk4_integrate(y, grid.time(static_cast<int>(k) - 1), grid.time(static_cast<int>(k)), substep, rhs);
        double running = 0.0;
        for (Eigen::Index a = 0; a < p; ++a)
        {
            const double s = y[static_cast<std::size_t>(a)];
            const double i = y[static_cast<std::size_t>(p + a)];
            const double r = y[static_cast<std::size_t>(2 * p + a)];
            const double n = y[static_cast<std::size_t>(3 * p + a)];
            require(std::isfinite(s) && std::isfinite(i) && std::isfinite(r) && std::isfinite(n), ErrorCode::Numeric,
                    "multiregion integration produced non-finite values");
            require(s >= -1e-12 && i >= -1e-12 && r >= -1e-12, ErrorCode::Numeric,
                    "multiregion integration produced negative densities");
            require(std::abs(s + i + r - 1.0) <= 1e-9, ErrorCode::Numeric, "per-region density sum drifted");
            require(n >= -1e-12 * total, ErrorCode::Numeric, "region population went negative");
            running += n;
            traj.s(a, k) = s;
            traj.i(a, k) = i;
            traj.r(a, k) = r;
            traj.n(a, k) = n;
        }
        require(std::abs(running - total) <= 1e-9 * total, ErrorCode::Numeric, "total population drifted");
    }
    return traj;
}

MultiRegionTrajectory simulate_lagrangian(const std::vector<RateFunction>& beta, const std::vector<RateFunction>& gamma,
                                          const MobilityField& lambda, const MobilityField& mu,
                                          const Eigen::VectorXd& s0, const Eigen::VectorXd& i0,
                                          const Eigen::VectorXd& r0, const TimeGrid& grid, double substep)
{
    const Eigen::Index p = s0.size();
    require_region_inputs(beta, gamma, lambda, grid, p);
    require_row_stochastic(lambda, "susceptible mobility");
    require(mu.regions() == p, ErrorCode::InvalidArgument, "infected mobility does not match the region count");
    require_row_stochastic(mu, "infected mobility");
    require(i0.size() == p && r0.size() == p, ErrorCode::InvalidArgument,
            "initial state does not match the region count");
    require(substep > 0.0, ErrorCode::InvalidArgument, "substep must be positive");

    Eigen::VectorXd home(p);
    double total = 0.0;
    for (Eigen::Index a = 0; a < p; ++a)
    {
        require(s0(a) >= 0.0 && i0(a) >= 0.0 && r0(a) >= 0.0, ErrorCode::Domain, "counts must be nonnegative");
        home(a) = s0(a) + i0(a) + r0(a);
        require(home(a) > 0.0, ErrorCode::Domain, "region populations must be positive");
        total += home(a);
    }

    MultiRegionTrajectory traj;
    traj.grid = grid;
    traj.s.resize(p, grid.count);
    traj.i.resize(p, grid.count);
    traj.r.resize(p, grid.count);
    traj.n.resize(0, 0);

    std::vector<double> y(static_cast<std::size_t>(3 * p));
    for (Eigen::Index a = 0; a < p; ++a)
    {
        y[static_cast<std::size_t>(a)] = s0(a);
        y[static_cast<std::size_t>(p + a)] = i0(a);
        y[static_cast<std::size_t>(2 * p + a)] = r0(a);
    }

    const auto rhs = [&](double t, const std::vector<double>& state, std::vector<double>& d) {
        const Eigen::MatrixXd lam = lambda.at(t);
        const Eigen::MatrixXd mob = mu.at(t);
        // Effective mix at each location: susceptibles and infected commute
        // by their presence fractions, removed individuals stay home.
        Eigen::VectorXd infected_there = Eigen::VectorXd::Zero(p);
        Eigen::VectorXd present_there = Eigen::VectorXd::Zero(p);
        for (Eigen::Index k = 0; k < p; ++k)
        {
            for (Eigen::Index m = 0; m < p; ++m)
            {
                infected_there(k) += mob(m, k) * state[static_cast<std::size_t>(p + m)];
                present_there(k) +=
                    lam(m, k) * state[static_cast<std::size_t>(m)] + mob(m, k) * state[static_cast<std::size_t>(p + m)];
            }
            present_there(k) += state[static_cast<std::size_t>(2 * p + k)];
        }
        for (Eigen::Index a = 0; a < p; ++a)
        {
            double force = 0.0;
            for (Eigen::Index k = 0; k < p; ++k)
            {
                if (present_there(k) <= 1e-12 * total)
                    continue;
                force += lam(a, k) * beta[static_cast<std::size_t>(k)](t) * infected_there(k) / present_there(k);
            }
            const double s = state[static_cast<std::size_t>(a)];
            const double i = state[static_cast<std::size_t>(p + a)];
            const double g = gamma[static_cast<std::size_t>(a)](t);
            d[static_cast<std::size_t>(a)] = -s * force;
            d[static_cast<std::size_t>(p + a)] = s * force - g * i;
            d[static_cast<std::size_t>(2 * p + a)] = g * i;
        }
    };

    for (std::size_t k = 0; k < grid.count; ++k)
    {
        if (k > 0)
            rk4_integrate(y, grid.time(static_cast<int>(k) - 1), grid.time(static_cast<int>(k)), substep, rhs);
        for (Eigen::Index a = 0; a < p; ++a)
        {
            const double s = y[static_cast<std::size_t>(a)];
            const double i = y[static_cast<std::size_t>(p + a)];
            const double r = y[static_cast<std::size_t>(2 * p + a)];
            require(std::isfinite(s) && std::isfinite(i) && std::isfinite(r), ErrorCode::Numeric,
                    "multiregion integration produced non-finite values");
            require(s >= -1e-12 * home(a) && i >= -1e-12 * home(a) && r >= -1e-12 * home(a), ErrorCode::Numeric,
                    "multiregion integration produced negative counts");
            require(std::abs(s + i + r - home(a)) <= 1e-9 * home(a), ErrorCode::Numeric,
                    "per-region resident count drifted");
            traj.s(a, k) = s;
            traj.i(a, k) = i;
            traj.r(a, k) = r;
        }
    }
    return traj;
}

Eigen::MatrixXd eulerian_coupling_matrix(const Eigen::VectorXd& s, const Eigen::VectorXd& i,
                                         const Eigen::MatrixXd& lambda)
{
    const Eigen::Index p = s.size();
    require(i.size() == p && lambda.rows() == p && lambda.cols() == p, ErrorCode::InvalidArgument,
            "state and mobility dimensions do not match");
    Eigen::MatrixXd m(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index j = 0; j < p; ++j)
            m(a, j) = -s(a) * lambda(j, a) * i(j);
    return m;
}

bool coupling_row_dominant(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& i)
{
    const Eigen::Index p = i.size();
    require(lambda.rows() == p && lambda.cols() == p, ErrorCode::InvalidArgument,
            "state and mobility dimensions do not match");
    for (Eigen::Index a = 0; a < p; ++a)
    {
        double off = 0.0;
        for (Eigen::Index j = 0; j < p; ++j)
            if (j != a)
                off += lambda(j, a) * i(j);
        if (!(lambda(a, a) * i(a) > off))
            return false;
    }
    return true;
}

bool coupling_column_dominant(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& s)
{
    const Eigen::Index p = s.size();
    require(lambda.rows() == p && lambda.cols() == p, ErrorCode::InvalidArgument,
            "state and mobility dimensions do not match");
    for (Eigen::Index j = 0; j < p; ++j)
    {
        double off = 0.0;
        for (Eigen::Index a = 0; a < p; ++a)
            if (a != j)
                off += s(a) * lambda(j, a);
        if (!(s(j) * lambda(j, j) > off))
            return false;
    }
    return true;
}

MultiRegionRates recover_rates_multi(const MultiRegionTrajectory& trajectory, const MobilityField& lambda)
{
    const Eigen::Index p = trajectory.s.rows();
    const int q = static_cast<int>(trajectory.grid.count);
    require(p >= 1 && q >= 2, ErrorCode::InvalidArgument, "trajectory too short to differentiate");
    require(lambda.regions() == p, ErrorCode::InvalidArgument, "mobility field does not match the region count");

    Eigen::MatrixXd ds(p, q);
    Eigen::MatrixXd dr(p, q);
    for (Eigen::Index a = 0; a < p; ++a)
    {
        const std::vector<double> s_row(trajectory.s.row(a).begin(), trajectory.s.row(a).end());
        const std::vector<double> r_row(trajectory.r.row(a).begin(), trajectory.r.row(a).end());
        const std::vector<double> dsa = finite_differences(s_row, trajectory.grid.step);
        const std::vector<double> dra = finite_differences(r_row, trajectory.grid.step);
        for (int k = 0; k < q; ++k)
        {
            ds(a, k) = dsa[static_cast<std::size_t>(k)];
            dr(a, k) = dra[static_cast<std::size_t>(k)];
        }
    }

    MultiRegionRates rates;
    rates.grid = trajectory.grid;
    rates.beta.resize(p, q);
    rates.gamma.resize(p, q);
    for (int k = 0; k < q; ++k)
    {
        for (Eigen::Index a = 0; a < p; ++a)
            if (!(trajectory.i(a, k) > 0.0))
                throw DegeneracyError(k, "region has no infected mass; rates are undefined");
        const Eigen::MatrixXd m =
            eulerian_coupling_matrix(trajectory.s.col(k), trajectory.i.col(k), lambda.at(trajectory.grid.time(k)));
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (!(smin > 0.0) || smax / smin > 1e12)
            throw SingularMatrixError(k, "coupling matrix is numerically singular");
        rates.beta.col(k) = svd.solve(ds.col(k));
        for (Eigen::Index a = 0; a < p; ++a)
            rates.gamma(a, k) = dr(a, k) / trajectory.i(a, k);
    }
    return rates;
}

} // namespace epf
