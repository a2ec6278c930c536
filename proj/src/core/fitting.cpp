#include "core/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "core/common.hpp"
#include "core/nnls.hpp"
#include "core/rng.hpp"

namespace epf
{

namespace
{

constexpr double k_inf = std::numeric_limits<double>::infinity();

void require_fit_window(int w0, int w1, int size)
{
    require(w0 >= 0 && w1 > w0 && w1 < size, ErrorCode::InvalidArgument,
            "fit window needs at least two samples inside the series");
}

// Trapezoid weight for local index k of an m-point window.
double trapezoid_weight(int k, int m)
{
    return (k == 0 || k == m - 1) ? 0.5 : 1.0;
}

SirTrajectory propagate_window(const HealthSeries& observed, const RateFunction& beta, const RateFunction& gamma,
                               int w0, int w1, double i0, double r0, double substep)
{
    const TimeGrid window{observed.grid().time(w0), observed.grid().step, w1 - w0 + 1};
    SirOptions options;
    options.substep = substep;
    options.allow_negative_rates = true;
    return simulate_sir_tv(beta, gamma, observed.population - i0 - r0, i0, r0, window, options);
}

double window_loss(const SirTrajectory& sim, const HealthSeries& observed, int w0, int w1)
{
    const int m = w1 - w0 + 1;
    double total = 0.0;
    for (int k = 0; k < m; ++k)
    {
        const double di = sim.i[static_cast<std::size_t>(k)] - observed.infected[static_cast<std::size_t>(w0 + k)];
        const double dr = sim.r[static_cast<std::size_t>(k)] - observed.removed[static_cast<std::size_t>(w0 + k)];
        total += trapezoid_weight(k, m) * (di * di + dr * dr);
    }
    return total * observed.grid().step;
}

} // namespace

double loss_ir(const HealthSeries& observed, const RateFunction& beta, const RateFunction& gamma, int w0, int w1,
               double substep)
{
    require_fit_window(w0, w1, static_cast<int>(observed.size()));
    const double i0 = observed.infected[static_cast<std::size_t>(w0)];
    const double r0 = observed.removed[static_cast<std::size_t>(w0)];
    const SirTrajectory sim = propagate_window(observed, beta, gamma, w0, w1, i0, r0, substep);
    return window_loss(sim, observed, w0, w1);
}

double loss_bg(const ObservedRates& observed, const RateFunction& beta, const RateFunction& gamma, int w0, int w1)
{
    require_fit_window(w0, w1, static_cast<int>(observed.grid.count));
    const int m = w1 - w0 + 1;
    double total = 0.0;
    for (int k = 0; k < m; ++k)
    {
        const double t = observed.grid.time(w0 + k);
        const double db = beta(t) - observed.beta_star.values[static_cast<std::size_t>(w0 + k)];
        const double dg = gamma(t) - observed.gamma_star.values[static_cast<std::size_t>(w0 + k)];
        total += trapezoid_weight(k, m) * (db * db + dg * dg);
    }
    return total * observed.grid.step;
}

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps, double tol, int max_iterations)
{
    const Eigen::Index d = x0.size();
    require(d >= 1, ErrorCode::InvalidArgument, "empty search space");
    require(steps.size() == d, ErrorCode::InvalidArgument, "step vector does not match the dimension");
    require(tol > 0.0 && max_iterations >= 1, ErrorCode::InvalidArgument, "bad simplex settings");

    const auto eval = [&objective](const Eigen::VectorXd& x) {
        const double f = objective(x);
        return std::isnan(f) ? k_inf : f;
    };

    std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(d) + 1, x0);
    std::vector<double> f(static_cast<std::size_t>(d) + 1);
    for (Eigen::Index i = 0; i < d; ++i)
        v[static_cast<std::size_t>(i) + 1](i) += steps(i);
    for (std::size_t i = 0; i < v.size(); ++i)
        f[i] = eval(v[i]);

    std::vector<std::size_t> order(v.size());
    NelderMeadResult result;
    for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations)
    {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&f](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double diameter = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            diameter = std::max(diameter, (v[i] - v[best]).cwiseAbs().maxCoeff());
        if (diameter <= tol * std::max(1.0, v[best].cwiseAbs().maxCoeff()))
        {
            result.converged = true;
            break;
        }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (i != worst)
                centroid += v[i];
        centroid /= static_cast<double>(d);

        const Eigen::VectorXd xr = centroid + (centroid - v[worst]);
        const double fr = eval(xr);
        if (fr < f[best])
        {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - v[worst]);
            const double fe = eval(xe);
            if (fe < fr)
            {
                v[worst] = xe;
                f[worst] = fe;
            }
            else
            {
                v[worst] = xr;
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[second])
        {
            v[worst] = xr;
            f[worst] = fr;
            continue;
        }
        if (fr < f[worst])
        {
            const Eigen::VectorXd xc = centroid + 0.5 * (xr - centroid);
            const double fc = eval(xc);
            if (fc <= fr)
            {
                v[worst] = xc;
                f[worst] = fc;
                continue;
            }
        }
        else
        {
            const Eigen::VectorXd xc = centroid - 0.5 * (centroid - v[worst]);
            const double fc = eval(xc);
            if (fc < f[worst])
            {
                v[worst] = xc;
                f[worst] = fc;
                continue;
            }
        }
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (i == best)
                continue;
            v[i] = v[best] + 0.5 * (v[i] - v[best]);
            f[i] = eval(v[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (f[i] < f[best])
            best = i;
    result.x = v[best];
    result.f = f[best];
    return result;
}

std::string fit_routine_name(FitRoutine routine)
{
    return routine == FitRoutine::BG ? "bg" : "ir";
}

FitRoutine fit_routine_from_name(const std::string& name)
{
    if (name == "bg")
        return FitRoutine::BG;
    if (name == "ir")
        return FitRoutine::IR;
    fail(ErrorCode::Parse, "unknown fit routine '" + name + "'");
}

namespace
{

void require_basis_alignment(const ReducedBasis& basis, int w1)
{
    require(std::abs(basis.grid.t0) <= 1e-9 && std::abs(basis.grid.step - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            "basis grid must start at day 0 with daily steps");
    require(static_cast<int>(basis.grid.count) > w1, ErrorCode::InvalidArgument,
            "basis grid does not cover the fit window");
    require(basis.n_modes() >= 1, ErrorCode::InvalidArgument, "empty basis");
}

// Trapezoid-weighted least squares of the observed rates against the basis
// rows over the window; cone bases keep coefficients nonnegative.
Eigen::VectorXd solve_bg_family(const ReducedBasis& basis, const std::vector<double>& target, int w0, int w1,
                                double* kkt)
{
    const int m = w1 - w0 + 1;
    const int n = basis.n_modes();
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    for (int k = 0; k < m; ++k)
    {
        const double w = std::sqrt(trapezoid_weight(k, m));
        a.row(k) = w * basis.modes.col(w0 + k).transpose();
        b(k) = w * target[static_cast<std::size_t>(w0 + k)];
    }
    if (basis.method == BasisMethod::SVD)
    {
        *kkt = 0.0;
        return a.colPivHouseholderQr().solve(b);
    }
    const NnlsResult res = nnls(a, b);
    *kkt = res.kkt_residual;
    return res.x;
}

} // namespace

FitResult fit_rates(const HealthSeries& observed, const ObservedRates& rates, const ReducedBasis& beta_basis,
                    const ReducedBasis& gamma_basis, const FitOptions& options)
{
    const int size = static_cast<int>(observed.size());
    const int w0 = options.window_begin;
    const int w1 = options.window_end < 0 ? size - 1 : options.window_end;
    require_fit_window(w0, w1, size);
    require(static_cast<int>(rates.grid.count) == size, ErrorCode::InvalidArgument,
            "recovered rates do not match the observed series");
    require_basis_alignment(beta_basis, w1);
    require_basis_alignment(gamma_basis, w1);

    FitResult result;
    result.routine = options.routine;
    result.window_begin = w0;
    result.window_end = w1;
    result.beta_coefficients = solve_bg_family(beta_basis, rates.beta_star.values, w0, w1, &result.kkt_beta);
    result.gamma_coefficients = solve_bg_family(gamma_basis, rates.gamma_star.values, w0, w1, &result.kkt_gamma);

    const auto pair_loss_bg = [&](const Eigen::VectorXd& cb, const Eigen::VectorXd& cg) {
        return loss_bg(rates, basis_combination(beta_basis, cb), basis_combination(gamma_basis, cg), w0, w1);
    };
    const auto pair_loss_ir = [&](const Eigen::VectorXd& cb, const Eigen::VectorXd& cg) {
        try
        {
            return loss_ir(observed, basis_combination(beta_basis, cb), basis_combination(gamma_basis, cg), w0, w1,
                           options.substep);
        }
        catch (const EpfError&)
        {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    if (options.routine == FitRoutine::BG)
    {
        result.loss_bg = pair_loss_bg(result.beta_coefficients, result.gamma_coefficients);
        result.loss_ir = pair_loss_ir(result.beta_coefficients, result.gamma_coefficients);
        result.loss = result.loss_bg;
        return result;
    }

    const int nb = beta_basis.n_modes();
    const int ng = gamma_basis.n_modes();
    const bool beta_cone = beta_basis.method != BasisMethod::SVD;
    const bool gamma_cone = gamma_basis.method != BasisMethod::SVD;
    Eigen::VectorXd seed(nb + ng);
    seed.head(nb) = result.beta_coefficients;
    seed.tail(ng) = result.gamma_coefficients;
    const double amp_b = std::max(seed.head(nb).cwiseAbs().maxCoeff(), 1e-12);
    const double amp_g = std::max(seed.tail(ng).cwiseAbs().maxCoeff(), 1e-12);

    const auto clamp_cones = [&](Eigen::VectorXd x) {
        if (beta_cone)
            x.head(nb) = x.head(nb).cwiseMax(0.0);
        if (gamma_cone)
            x.tail(ng) = x.tail(ng).cwiseMax(0.0);
        return x;
    };
    const double seed_ir = pair_loss_ir(seed.head(nb), seed.tail(ng));
    const double penalty_weight = 1e3 * (1.0 + (std::isnan(seed_ir) ? 1.0 : seed_ir));
    const auto objective = [&](const Eigen::VectorXd& x) {
        const Eigen::VectorXd c = clamp_cones(x);
        double penalty = 0.0;
        if (beta_cone)
            penalty += ((x.head(nb) - c.head(nb)) / amp_b).squaredNorm();
        if (gamma_cone)
            penalty += ((x.tail(ng) - c.tail(ng)) / amp_g).squaredNorm();
        const double f = pair_loss_ir(c.head(nb), c.tail(ng));
        return (std::isnan(f) ? k_inf : f) + penalty_weight * penalty;
    };

    Eigen::VectorXd steps(nb + ng);
    for (int i = 0; i < nb + ng; ++i)
    {
        const double amp = i < nb ? amp_b : amp_g;
        steps(i) = 0.05 * std::max(std::abs(seed(i)), 0.1 * amp);
    }

    Rng rng(options.nm_seed);
    double best_f = k_inf;
    Eigen::VectorXd best_x = seed;
    for (int start = 0; start < std::max(options.nm_starts, 1); ++start)
    {
        Eigen::VectorXd x0 = seed;
        if (start > 0)
        {
            // Restarts jitter the seed multiplicatively and additively so
            // coordinates at zero can still move.
            for (int i = 0; i < nb + ng; ++i)
            {
                const double amp = i < nb ? amp_b : amp_g;
                x0(i) = x0(i) * (1.0 + 0.2 * rng.uniform(-1.0, 1.0)) + 0.05 * amp * rng.uniform(-1.0, 1.0);
            }
        }
        const NelderMeadResult run =
            nelder_mead(objective, x0, steps, options.nm_tolerance, options.nm_max_iterations);
        if (run.f < best_f)
        {
            best_f = run.f;
            best_x = run.x;
            result.nm_iterations = run.iterations;
            result.nm_best_start = start;
        }
    }

    const Eigen::VectorXd final_x = clamp_cones(best_x);
    result.beta_coefficients = final_x.head(nb);
    result.gamma_coefficients = final_x.tail(ng);
    result.loss_ir = pair_loss_ir(result.beta_coefficients, result.gamma_coefficients);
    result.loss_bg = pair_loss_bg(result.beta_coefficients, result.gamma_coefficients);
    result.loss = result.loss_ir;
    return result;
}

InitialState optimize_initial_state(const HealthSeries& observed, const RateFunction& beta, const RateFunction& gamma,
                                    int t_index, int lookback, double substep)
{
    require(lookback >= 1, ErrorCode::InvalidArgument, "lookback must be at least one day");
    const int k0 = t_index - lookback;
    require(k0 >= 0 && t_index < static_cast<int>(observed.size()), ErrorCode::InvalidArgument,
            "lookback window exceeds the observed series");
    const double i_obs = observed.infected[static_cast<std::size_t>(k0)];
    const double r_obs = observed.removed[static_cast<std::size_t>(k0)];
    require(i_obs > 0.0, ErrorCode::Domain, "initial-state search needs a positive infected count");

    const Eigen::Vector2d lo(0.2 * i_obs, 0.2 * r_obs);
    const Eigen::Vector2d hi(5.0 * i_obs, 5.0 * r_obs);
    const auto objective = [&](const Eigen::VectorXd& x) {
        const double i = std::clamp(x(0), lo(0), hi(0));
        const double r = std::clamp(x(1), lo(1), hi(1));
        if (i + r >= observed.population)
            return k_inf;
        const SirTrajectory sim = propagate_window(observed, beta, gamma, k0, t_index, i, r, substep);
        return window_loss(sim, observed, k0, t_index);
    };

    Eigen::Vector2d x0(i_obs, r_obs);
    Eigen::Vector2d steps(0.3 * i_obs, 0.3 * r_obs);
    const NelderMeadResult run = nelder_mead(objective, x0, steps, 1e-8, 500);

    InitialState out;
    out.i = std::clamp(run.x(0), lo(0), hi(0));
    out.r = std::clamp(run.x(1), lo(1), hi(1));
    out.objective = run.f;
    out.iterations = run.iterations;
    return out;
}

} // namespace epf
