#ifndef EPF_CORE_MULTIREGION_HPP
#define EPF_CORE_MULTIREGION_HPP

#include <vector>

#include <Eigen/Dense>

#include "core/grid.hpp"

namespace epf
{

/// Time-dependent mobility probabilities: values[k](i, j) is the fraction of
/// region i's relevant population found moving to (or staying in, for j == i)
/// region j at grid point k, so every row sums to one. Evaluation
/// interpolates linearly and clamps outside the grid, mirroring
/// RateFunction; interpolation preserves row stochasticity.
struct MobilityField
{
    TimeGrid grid;
    std::vector<Eigen::MatrixXd> values;

    MobilityField() = default;
    MobilityField(TimeGrid g, std::vector<Eigen::MatrixXd> v);

    int regions() const
    {
        return values.empty() ? 0 : static_cast<int>(values.front().rows());
    }
    Eigen::MatrixXd at(double t) const;
};

/// Rescales the off-diagonal entries by `factor`, moving the difference onto
/// the diagonal so every row keeps its total rate. Used to derive the
/// infected-mobility field from the susceptible one.
MobilityField scale_mobility_offdiagonal(const MobilityField& field, double factor);

struct MultiRegionTrajectory
{
    TimeGrid grid;
    // One row per region, one column per grid point. For the density
    // formulation s + i + r = 1 per region and n holds head counts; for the
    // count formulation s, i, r are counts and n is unused.
    Eigen::MatrixXd s, i, r, n;

    int regions() const
    {
        return static_cast<int>(s.rows());
    }
};

/// Density formulation on fixed locations: infection couples regions through
/// arrivals (force on region i sums beta_j lambda_{j->i} i_j), and head
/// counts flow along the mobility rates. Total population is conserved; the
/// per-region density sum stays one.
MultiRegionTrajectory simulate_eulerian(const std::vector<RateFunction>& beta, const std::vector<RateFunction>& gamma,
                                        const MobilityField& lambda, const Eigen::VectorXd& s0,
                                        const Eigen::VectorXd& i0, const Eigen::VectorXd& r0,
                                        const Eigen::VectorXd& n0, const TimeGrid& grid, double substep = 0.1);

/// Count formulation anchored to home regions: residents split their presence
/// across regions by the row-stochastic lambda (susceptible) and mu
/// (infected) fractions, and infections happen where people meet. Removed
/// individuals stay home. Per-region resident counts are conserved.
MultiRegionTrajectory simulate_lagrangian(const std::vector<RateFunction>& beta, const std::vector<RateFunction>& gamma,
                                          const MobilityField& lambda, const MobilityField& mu,
                                          const Eigen::VectorXd& s0, const Eigen::VectorXd& i0,
                                          const Eigen::VectorXd& r0, const TimeGrid& grid, double substep = 0.1);

/// Coupling matrix of the density formulation at one state: entry (i, j) is
/// -s_i lambda_{j->i} i_j, so ds/dt = M beta.
Eigen::MatrixXd eulerian_coupling_matrix(const Eigen::VectorXd& s, const Eigen::VectorXd& i,
                                         const Eigen::MatrixXd& lambda);

/// Diagonal dominance tests for the coupling matrix; either one is a
/// sufficient condition for invertibility.
bool coupling_row_dominant(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& i);
bool coupling_column_dominant(const Eigen::MatrixXd& lambda, const Eigen::VectorXd& s);

struct MultiRegionRates
{
    TimeGrid grid;
    Eigen::MatrixXd beta, gamma; // one row per region
};

/// Inverts the density formulation pointwise: finite-difference derivatives,
/// then beta = M^-1 ds/dt per grid point and gamma from the removed flux.
/// Throws DegeneracyError when a region has no infected mass and
/// SingularMatrixError when the coupling matrix is too ill-conditioned to
/// invert (condition number above 1e12).
MultiRegionRates recover_rates_multi(const MultiRegionTrajectory& trajectory, const MobilityField& lambda);

} // namespace epf

#endif // EPF_CORE_MULTIREGION_HPP
