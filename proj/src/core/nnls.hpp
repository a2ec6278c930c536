#ifndef EPF_CORE_NNLS_HPP
#define EPF_CORE_NNLS_HPP

#include <Eigen/Dense>

namespace epf
{

struct NnlsResult
{
    Eigen::VectorXd x;
    double residual_norm = 0.0; // ||A x - b||_2
    /// Dual-feasibility violation max_i max(0, (A^T(b-Ax))_i) over coordinates
    /// at their zero bound, relative to ||A^T b||_inf (dimensionless).
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Nonnegative least squares, min ||A x - b|| s.t. x >= 0, by the active-set
/// method of Lawson and Hanson. `tol` controls the dual-feasibility stopping
/// threshold relative to ||A^T b||_inf.
NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol = 1e-12, int max_iterations = 0);

/// Least distance programming: min ||x|| s.t. G x >= h, solved through one
/// NNLS problem (Lawson & Hanson, ch. 23). Throws if the constraints are
/// infeasible.
Eigen::VectorXd ldp(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double tol = 1e-12);

/// Least squares with linear inequality constraints:
/// min ||A x - b|| s.t. G x >= h, by reduction to LDP. A must have full
/// column rank.
Eigen::VectorXd lsi(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& G,
                    const Eigen::VectorXd& h, double tol = 1e-12);

} // namespace epf

#endif // EPF_CORE_NNLS_HPP
