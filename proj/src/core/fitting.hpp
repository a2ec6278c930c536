#ifndef EPF_CORE_FITTING_HPP
#define EPF_CORE_FITTING_HPP

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "core/reduction.hpp"
#include "core/series.hpp"
#include "core/sir.hpp"

namespace epf
{

/// Integral of the squared case-count deviation over grid indices [w0, w1]:
/// the trajectory driven by (beta, gamma) from the observed state at w0 is
/// compared against the observed infected/removed counts, and the sampled
/// squared deviation is integrated with the trapezoid rule (exact for its
/// piecewise-linear extension). Rates are taken as given, without sign checks.
double loss_ir(const HealthSeries& observed, const RateFunction& beta, const RateFunction& gamma, int w0, int w1,
               double substep = 0.1);

/// Same quadrature applied to the rate-space deviation against the
/// Prop-style recovered coefficients.
double loss_bg(const ObservedRates& observed, const RateFunction& beta, const RateFunction& gamma, int w0, int w1);

struct NelderMeadResult
{
    Eigen::VectorXd x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimizer (Nelder-Mead). Converges when the
/// simplex diameter drops below tol relative to the best vertex. Objectives
/// may return NaN or infinity for infeasible points.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps, double tol, int max_iterations);

enum class FitRoutine
{
    BG, // least squares against recovered rates
    IR, // simplex search on the case-count loss
};

std::string fit_routine_name(FitRoutine routine);
FitRoutine fit_routine_from_name(const std::string& name);

struct FitOptions
{
    FitRoutine routine = FitRoutine::BG;
    int window_begin = 0;
    int window_end = -1; // -1: last observed sample
    double nm_tolerance = 1e-8;
    int nm_max_iterations = 4000;
    int nm_starts = 5; // rate-space seed plus perturbed restarts
    std::uint64_t nm_seed = 20200817;
    double substep = 0.1;
};

struct FitResult
{
    FitRoutine routine = FitRoutine::BG;
    int window_begin = 0;
    int window_end = 0;
    Eigen::VectorXd beta_coefficients;
    Eigen::VectorXd gamma_coefficients;
    double loss = 0.0; // objective of the selected routine
    // Diagnostics, always filled (loss_ir is NaN if the fitted pair cannot
    // be propagated).
    double loss_bg = 0.0;
    double loss_ir = 0.0;
    double kkt_beta = 0.0; // cone fits: relative KKT residual of the NNLS solve
    double kkt_gamma = 0.0;
    int nm_iterations = 0;
    int nm_best_start = -1;
};

/// Fits basis coefficients for both rate families over the given window.
/// Routine BG solves a trapezoid-weighted least-squares problem in rate
/// space, constrained to nonnegative coefficients for cone bases. Routine IR
/// refines the BG seed with multi-start Nelder-Mead on the case-count loss;
/// restarts and the final answer are deterministic for a fixed seed.
FitResult fit_rates(const HealthSeries& observed, const ObservedRates& rates, const ReducedBasis& beta_basis,
                    const ReducedBasis& gamma_basis, const FitOptions& options = {});

struct InitialState
{
    double i = 0.0;
    double r = 0.0;
    double objective = 0.0;
    int iterations = 0;
};

/// Refines the propagation anchor: searches (i, r) at index t_index - lookback
/// within [0.2x, 5x] of the observed values so that propagating the fitted
/// rates to t_index tracks the observed counts best. The box keeps the search
/// away from degenerate states the loss cannot rank.
InitialState optimize_initial_state(const HealthSeries& observed, const RateFunction& beta, const RateFunction& gamma,
                                    int t_index, int lookback = 3, double substep = 0.1);

} // namespace epf

#endif // EPF_CORE_FITTING_HPP
