#ifndef EPF_CORE_REDUCTION_HPP
#define EPF_CORE_REDUCTION_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "core/grid.hpp"
#include "core/scenarios.hpp"

namespace epf
{

enum class BasisMethod
{
    SVD,
    NMF,
    ENG,
};

std::string basis_method_name(BasisMethod method);
BasisMethod basis_method_from_name(const std::string& name);

/// Reduced basis for one rate family (betas or gammas). `modes` is n x Q with
/// one basis function per row. For ENG, `modes` holds the cone-enlarged psi
/// functions and `raw_modes` the greedy-selected training rows they derive
/// from. When `has_exp_mode` is set, row 0 of `modes` is the prepended
/// exponential mode and takes part in projections like any other row.
struct ReducedBasis
{
    TimeGrid grid;
    BasisMethod method = BasisMethod::SVD;
    Eigen::MatrixXd modes;

    // SVD: all K eigenvalues of the (1/K)-scaled Gram matrix, descending.
    std::vector<double> eigenvalues;

    // ENG
    Eigen::MatrixXd raw_modes;
    Eigen::MatrixXd cone_sigma; // sigma^i_j, zero diagonal
    std::vector<int> selected_rows;
    std::vector<double> greedy_residuals; // worst squared residual per step
    int cone_cap_hits = 0;

    // exponential augmentation
    bool has_exp_mode = false;
    double exp_xi = 0.0;
    double exp_xi_prime = 0.0;
    bool exp_reversed = false;

    int n_modes() const
    {
        return static_cast<int>(modes.rows());
    }

    /// Sum of eigenvalues with index > n (1-based n), SVD only.
    double eigenvalue_tail(int n) const;
};

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows);

/// Best n-dimensional subspace in the mean-square sense: eigendecomposition
/// of the K x K Gram matrix of training rows; mode i is the normalized
/// row combination with the i-th largest eigenvalue. The stored eigenvalues
/// are scaled by 1/K so that the mean squared projection error of the
/// training rows at dimension n equals the eigenvalue tail exactly.
ReducedBasis svd_basis(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n);

struct NmfFactors
{
    Eigen::MatrixXd W; // K x n coefficients
    Eigen::MatrixXd B; // n x Q modes
    std::vector<double> objective; // ||M - WB||_F^2 per iteration, front = initial
};

/// Multiplicative-update factorization M ~ W B with W, B >= 0 (Lee-Seung
/// Frobenius updates). Deterministic given the seed.
NmfFactors nmf_factorize(const Eigen::MatrixXd& training_rows, int n, int iterations, std::uint64_t seed);

ReducedBasis nmf_basis(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n, int iterations,
                       std::uint64_t seed);

/// Greedy row selection: first the row of maximal squared norm, then
/// repeatedly the row with the worst nonnegative-least-squares residual
/// against the selected ones. Ties break to the lowest row index.
ReducedBasis greedy_select(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n);

/// Cone enlargement: for each mode i, repeatedly subtracts the largest
/// positivity-preserving multiples (halved) of the other modes, widening the
/// cone of nonnegative combinations. Modifies `modes` in place to the psi
/// functions and fills `cone_sigma`. Inner loops are capped at 100 rounds per
/// mode pair; `cone_cap_hits` counts bound hits.
void enlarge_cone(ReducedBasis& basis, double epsilon);

/// Core transform on a plain mode matrix; rows must be nonnegative and not
/// identically zero.
Eigen::MatrixXd enlarge_cone_matrix(const Eigen::MatrixXd& modes, double epsilon, Eigen::MatrixXd* sigma_out = nullptr,
                                    int* cap_hits = nullptr);

/// Nonnegative least-squares projection of `target` onto the basis modes
/// restricted to grid indices [w0, w1]. Returns the coefficients (length
/// n_modes), all >= 0.
Eigen::VectorXd project_cone(const ReducedBasis& basis, const Eigen::VectorXd& target, int w0, int w1,
                             double* kkt_residual = nullptr);

/// Unconstrained least-squares projection (SVD bases).
Eigen::VectorXd project_linear(const ReducedBasis& basis, const Eigen::VectorXd& target, int w0, int w1);

/// Linear reconstruction sum_i c_i mode_i as a RateFunction on the basis grid.
RateFunction basis_combination(const ReducedBasis& basis, const Eigen::VectorXd& coefficients);

/// Exponential-regression augmentation: fits log(observed) over grid indices
/// [0, window_end] and prepends the mode xi * exp(-xi' t). Growing data is
/// handled by the time-reversal convention: the curve is stored as
/// xi * exp(-xi' (t_end - t)) with nonnegative xi', and `exp_reversed` set.
ReducedBasis augment_exponential(const ReducedBasis& basis, const RateFunction& observed, int window_end);

/// Two-sided constraint set guaranteeing 0 <= approximation <= upper
/// pointwise: coefficients must be nonnegative both in the enlarged
/// lower-bound basis (psi, from the raw modes phi) and in the enlarged
/// upper-bound basis (eta, from upper - phi), with the phi coefficients
/// summing to one.
struct DualCone
{
    double upper = 0.0; // +infinity selects the plain nonnegative cone
    TimeGrid grid;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd psi;
    Eigen::MatrixXd eta;
    Eigen::MatrixXd c_map; // a (phi-coords) -> c (psi-coords)
    Eigen::MatrixXd d_map; // a (phi-coords) -> d (eta-coords)
};

DualCone bounded_cone(const ReducedBasis& eng_basis, double upper, double epsilon);

struct DualProjection
{
    Eigen::VectorXd a;      // coefficients in the phi basis
    Eigen::VectorXd values; // approximation on the grid
};

DualProjection project_dual_cone(const DualCone& cone, const Eigen::VectorXd& target);

} // namespace epf

#endif // EPF_CORE_REDUCTION_HPP
