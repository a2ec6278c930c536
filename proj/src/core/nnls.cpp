#include "core/nnls.hpp"

#include <cmath>
#include <vector>

#include "core/common.hpp"

namespace epf
{

NnlsResult nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol, int max_iterations)
{
    int m = static_cast<int>(A.rows());
    int n = static_cast<int>(A.cols());
    require(b.size() == m, ErrorCode::InvalidArgument, "nnls: dimension mismatch");
    if (max_iterations <= 0) {
        max_iterations = 3 * n + 30;
    }

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    Eigen::VectorXd w(n);

    double scale = (A.transpose() * b).cwiseAbs().maxCoeff();
    if (scale <= 0.0) {
        scale = 1.0;
    }
    double threshold = tol * scale;

    // Solves the unconstrained least squares restricted to the passive set.
    auto solve_passive = [&](const std::vector<bool>& set, Eigen::VectorXd& z) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j) {
            if (set[j]) {
                idx.push_back(j);
            }
        }
        z = Eigen::VectorXd::Zero(n);
        if (idx.empty()) {
            return;
        }
        Eigen::MatrixXd Ap(m, idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) {
            Ap.col(c) = A.col(idx[c]);
        }
        Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        for (std::size_t c = 0; c < idx.size(); ++c) {
            z[idx[c]] = zp[c];
        }
    };

    NnlsResult result;
    Eigen::VectorXd z(n);
    int outer = 0;
    for (; outer < max_iterations; ++outer) {
        Eigen::VectorXd residual = b - A * x;
        w = A.transpose() * residual;

        int best = -1;
        double best_w = threshold;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w[j] > best_w) {
                best_w = w[j];
                best = j;
            }
        }
        if (best < 0) {
            break; // dual feasible: done
        }
        passive[best] = true;

        solve_passive(passive, z);
        // Inner loop: back off along x -> z until the passive-set solution is
        // feasible, moving each blocking variable to the active set.
        while (true) {
            bool feasible = true;
            for (int j = 0; j < n; ++j) {
                if (passive[j] && z[j] <= 0.0) {
                    feasible = false;
                    break;
                }
            }
            if (feasible) {
                break;
            }
            double alpha = 2.0;
            int blocker = -1;
            for (int j = 0; j < n; ++j) {
                if (passive[j] && z[j] <= 0.0) {
                    double step = x[j] / (x[j] - z[j]);
                    if (step < alpha) {
                        alpha = step;
                        blocker = j;
                    }
                }
            }
            x += alpha * (z - x);
            // The blocking coordinate reaches its bound by construction;
            // removing it explicitly guarantees inner-loop termination.
            passive[blocker] = false;
            x[blocker] = 0.0;
            double xmax = std::max(1e-300, x.cwiseAbs().maxCoeff());
            for (int j = 0; j < n; ++j) {
                if (passive[j] && z[j] <= 0.0 && x[j] <= 1e-12 * xmax) {
                    passive[j] = false;
                    x[j] = 0.0;
                }
            }
            solve_passive(passive, z);
        }
        x = z;
    }

    Eigen::VectorXd residual = b - A * x;
    w = A.transpose() * residual;
    double kkt = 0.0;
    for (int j = 0; j < n; ++j) {
        if (!passive[j] || x[j] <= 0.0) {
            kkt = std::max(kkt, w[j]); // gradient must not be ascent at the bound
        }
        else {
            kkt = std::max(kkt, std::abs(w[j]));
        }
    }
    result.x = x;
    result.residual_norm = residual.norm();
    result.kkt_residual = std::max(0.0, kkt) / scale;
    result.iterations = outer;
    return result;
}

Eigen::VectorXd ldp(const Eigen::MatrixXd& G, const Eigen::VectorXd& h, double tol)
{
    int mg = static_cast<int>(G.rows());
    int n = static_cast<int>(G.cols());
    require(h.size() == mg, ErrorCode::InvalidArgument, "ldp: dimension mismatch");

    // E = [G^T; h^T] (n+1 x mg), f = e_{n+1}; u solves NNLS(E, f), and
    // x_j = -r_j / r_{n+1} with r = E u - f.
    Eigen::MatrixXd E(n + 1, mg);
    E.topRows(n) = G.transpose();
    E.row(n) = h.transpose();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
    f[n] = 1.0;

    NnlsResult sub = nnls(E, f, tol);
    Eigen::VectorXd r = E * sub.x - f;
    require(std::abs(r[n]) > 1e-12, ErrorCode::Numeric, "ldp: incompatible inequality constraints");
    Eigen::VectorXd x(n);
    for (int j = 0; j < n; ++j) {
        x[j] = -r[j] / r[n];
    }
    return x;
}

Eigen::VectorXd lsi(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::MatrixXd& G,
                    const Eigen::VectorXd& h, double tol)
{
    int n = static_cast<int>(A.cols());
    require(A.rows() >= n, ErrorCode::InvalidArgument, "lsi: A must have at least as many rows as columns");

    // Orthogonal transformation to least-distance form: A = Q R, y = R x - Q^T b.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::VectorXd qtb = (qr.householderQ().transpose() * b).head(n);
    for (int j = 0; j < n; ++j) {
        require(std::abs(R(j, j)) > 1e-12 * std::abs(R(0, 0)) + 1e-300, ErrorCode::Numeric,
                "lsi: A is rank deficient");
    }

    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd Gy = G * Rinv;
    Eigen::VectorXd hy = h - Gy * qtb;

    Eigen::VectorXd y = ldp(Gy, hy, tol);
    return Rinv * (y + qtb);
}

} // namespace epf
