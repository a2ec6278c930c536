#include "core/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/common.hpp"
#include "core/nnls.hpp"
#include "core/rng.hpp"

namespace epf
{

namespace
{

constexpr double k_zero_margin = 1e-12;

void require_window(const ReducedBasis& basis, const Eigen::VectorXd& target, int w0, int w1)
{
    const int q = static_cast<int>(basis.grid.count);
    require(target.size() == q, ErrorCode::InvalidArgument, "projection target length does not match the basis grid");
    require(w0 >= 0 && w1 >= w0 && w1 < q, ErrorCode::InvalidArgument, "projection window out of range");
}

} // namespace

std::string basis_method_name(BasisMethod method)
{
    switch (method)
    {
    case BasisMethod::SVD:
        return "svd";
    case BasisMethod::NMF:
        return "nmf";
    case BasisMethod::ENG:
        return "eng";
    }
    fail(ErrorCode::InvalidArgument, "unknown basis method");
}

BasisMethod basis_method_from_name(const std::string& name)
{
    if (name == "svd")
        return BasisMethod::SVD;
    if (name == "nmf")
        return BasisMethod::NMF;
    if (name == "eng")
        return BasisMethod::ENG;
    fail(ErrorCode::Parse, "unknown basis method '" + name + "'");
}

double ReducedBasis::eigenvalue_tail(int n) const
{
    require(method == BasisMethod::SVD, ErrorCode::InvalidArgument, "eigenvalue tail is defined for SVD bases only");
    require(n >= 0 && n <= static_cast<int>(eigenvalues.size()), ErrorCode::InvalidArgument,
            "eigenvalue tail index out of range");
    double tail = 0.0;
    for (std::size_t i = static_cast<std::size_t>(n); i < eigenvalues.size(); ++i)
        tail += eigenvalues[i];
    return tail;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows)
{
    require(!rows.empty(), ErrorCode::InvalidArgument, "empty training set");
    const Eigen::Index q = static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), q);
    for (Eigen::Index k = 0; k < m.rows(); ++k)
    {
        require(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)].size()) == q, ErrorCode::InvalidArgument,
                "training rows have unequal lengths");
        for (Eigen::Index t = 0; t < q; ++t)
            m(k, t) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
    }
    return m;
}

ReducedBasis svd_basis(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n)
{
    const Eigen::Index k_rows = training_rows.rows();
    const Eigen::Index q = training_rows.cols();
    require(k_rows >= 1, ErrorCode::InvalidArgument, "empty training set");
    require(q == static_cast<Eigen::Index>(grid.count), ErrorCode::InvalidArgument,
            "training rows do not match the grid length");
    require(n >= 1 && n <= k_rows, ErrorCode::InvalidArgument, "basis dimension must be in [1, K]");
    // No q-point grid carries more than q orthonormal modes, whatever K is.
    require(n <= q, ErrorCode::InvalidArgument, "basis dimension exceeds the grid length");

    // SVD of the snapshot matrix itself, not of its Gram matrix: the smooth
    // rate families here decay below 1e-14 in relative eigenvalue within ~15
    // modes, where Gram eigenvectors lose orthogonality entirely. Jacobi keeps
    // the right singular vectors orthonormal to machine precision at any sigma.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(training_rows, Eigen::ComputeThinV);

    ReducedBasis basis;
    basis.grid = grid;
    basis.method = BasisMethod::SVD;
    // Scale by 1/K so the mean squared training error at dimension n equals
    // the eigenvalue tail; rows beyond the ambient dimension contribute exact
    // zeros so tails stay well defined for every n <= K.
    basis.eigenvalues.assign(static_cast<std::size_t>(k_rows), 0.0);
    const Eigen::Index rank_cap = std::min(k_rows, q);
    for (Eigen::Index i = 0; i < rank_cap; ++i)
    {
        const double sigma = svd.singularValues()(i);
        basis.eigenvalues[static_cast<std::size_t>(i)] = sigma * sigma / static_cast<double>(k_rows);
    }

    basis.modes.resize(n, q);
    for (int i = 0; i < n; ++i)
    {
        Eigen::VectorXd mode = svd.matrixV().col(i);
        // Singular vector signs are arbitrary; make the largest component
        // positive so bases are reproducible across runs.
        Eigen::Index at = 0;
        mode.cwiseAbs().maxCoeff(&at);
        if (mode(at) < 0.0)
            mode = -mode;
        basis.modes.row(i) = mode.transpose();
    }
    return basis;
}

NmfFactors nmf_factorize(const Eigen::MatrixXd& training_rows, int n, int iterations, std::uint64_t seed)
{
    const Eigen::Index k_rows = training_rows.rows();
    const Eigen::Index q = training_rows.cols();
    require(k_rows >= 1 && q >= 1, ErrorCode::InvalidArgument, "empty training set");
    require(n >= 1 && n <= std::min(k_rows, q), ErrorCode::InvalidArgument, "factorization rank out of range");
    require(iterations >= 1, ErrorCode::InvalidArgument, "iteration count must be positive");
    require(training_rows.minCoeff() >= 0.0, ErrorCode::InvalidArgument,
            "nonnegative factorization needs nonnegative data");

    const double mean = training_rows.mean();
    require(mean > 0.0, ErrorCode::InvalidArgument, "training set is identically zero");
    const double init_scale = std::sqrt(mean / static_cast<double>(n));

    NmfFactors f;
    f.W.resize(k_rows, n);
    f.B.resize(n, q);
    Rng rng(seed);
    // Fill order (W row-major, then B row-major) is part of the reproducible
    // output; do not reorder.
    for (Eigen::Index r = 0; r < k_rows; ++r)
        for (Eigen::Index c = 0; c < n; ++c)
            f.W(r, c) = init_scale * rng.uniform();
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < q; ++c)
            f.B(r, c) = init_scale * rng.uniform();

    constexpr double delta = 1e-12; // keeps denominators positive
    f.objective.reserve(static_cast<std::size_t>(iterations) + 1);
    f.objective.push_back((training_rows - f.W * f.B).squaredNorm());
    for (int it = 0; it < iterations; ++it)
    {
        const Eigen::MatrixXd wt_m = f.W.transpose() * training_rows;
        const Eigen::MatrixXd wt_w_b = f.W.transpose() * f.W * f.B;
        f.B = f.B.cwiseProduct(wt_m.cwiseQuotient(wt_w_b.array().max(delta).matrix()));

        const Eigen::MatrixXd m_bt = training_rows * f.B.transpose();
        const Eigen::MatrixXd w_b_bt = f.W * (f.B * f.B.transpose());
        f.W = f.W.cwiseProduct(m_bt.cwiseQuotient(w_b_bt.array().max(delta).matrix()));

        f.objective.push_back((training_rows - f.W * f.B).squaredNorm());
    }
    return f;
}

ReducedBasis nmf_basis(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n, int iterations,
                       std::uint64_t seed)
{
    require(training_rows.cols() == static_cast<Eigen::Index>(grid.count), ErrorCode::InvalidArgument,
            "training rows do not match the grid length");
    NmfFactors f = nmf_factorize(training_rows, n, iterations, seed);
    ReducedBasis basis;
    basis.grid = grid;
    basis.method = BasisMethod::NMF;
    basis.modes = f.B;
    return basis;
}

ReducedBasis greedy_select(const Eigen::MatrixXd& training_rows, const TimeGrid& grid, int n)
{
    const Eigen::Index k_rows = training_rows.rows();
    require(k_rows >= 1, ErrorCode::InvalidArgument, "empty training set");
    require(training_rows.cols() == static_cast<Eigen::Index>(grid.count), ErrorCode::InvalidArgument,
            "training rows do not match the grid length");
    require(n >= 1 && n <= k_rows, ErrorCode::InvalidArgument, "basis dimension must be in [1, K]");

    ReducedBasis basis;
    basis.grid = grid;
    basis.method = BasisMethod::ENG;
    basis.raw_modes.resize(n, training_rows.cols());

    std::vector<double> norms(static_cast<std::size_t>(k_rows));
    for (Eigen::Index k = 0; k < k_rows; ++k)
        norms[static_cast<std::size_t>(k)] = training_rows.row(k).squaredNorm();
    int first = 0;
    for (Eigen::Index k = 1; k < k_rows; ++k)
        if (norms[static_cast<std::size_t>(k)] > norms[static_cast<std::size_t>(first)])
            first = static_cast<int>(k);
    const double norm_scale = norms[static_cast<std::size_t>(first)];
    require(norm_scale > 0.0, ErrorCode::InvalidArgument, "training set is identically zero");

    basis.selected_rows.push_back(first);
    basis.greedy_residuals.push_back(norm_scale);
    basis.raw_modes.row(0) = training_rows.row(first);

    for (int step = 1; step < n; ++step)
    {
        const Eigen::MatrixXd selected_t = basis.raw_modes.topRows(step).transpose();
        int worst = -1;
        double worst_residual = -1.0;
        for (Eigen::Index k = 0; k < k_rows; ++k)
        {
            const NnlsResult res = nnls(selected_t, training_rows.row(k).transpose());
            const double r2 = res.residual_norm * res.residual_norm;
            if (r2 > worst_residual)
            {
                worst_residual = r2;
                worst = static_cast<int>(k);
            }
        }
        if (worst_residual <= 1e-14 * norm_scale)
            throw DegeneracyError(step, "training set spans fewer nonnegative directions than the requested dimension");
        basis.selected_rows.push_back(worst);
        basis.greedy_residuals.push_back(worst_residual);
        basis.raw_modes.row(step) = training_rows.row(worst);
    }
    basis.modes = basis.raw_modes;
    return basis;
}

Eigen::MatrixXd enlarge_cone_matrix(const Eigen::MatrixXd& modes, double epsilon, Eigen::MatrixXd* sigma_out,
                                    int* cap_hits)
{
    const Eigen::Index m = modes.rows();
    const Eigen::Index q = modes.cols();
    require(m >= 1 && q >= 1, ErrorCode::InvalidArgument, "empty mode matrix");
    require(epsilon > 0.0, ErrorCode::InvalidArgument, "enlargement threshold must be positive");

    // Work on max-normalized copies so epsilon means the same thing for every
    // mode regardless of amplitude; scales are mapped back into sigma below.
    Eigen::VectorXd scale(m);
    Eigen::MatrixXd hat(m, q);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        const double lo = modes.row(i).minCoeff();
        const double hi = modes.row(i).maxCoeff();
        require(lo >= -k_zero_margin * std::max(hi, 0.0), ErrorCode::InvalidArgument,
                "cone enlargement needs nonnegative modes (row " + std::to_string(i) + ")");
        require(hi > 0.0, ErrorCode::InvalidArgument,
                "cone enlargement given an identically zero mode (row " + std::to_string(i) + ")");
        scale(i) = hi;
        hat.row(i) = (modes.row(i) / hi).cwiseMax(0.0);
    }

    Eigen::MatrixXd sigma_hat = Eigen::MatrixXd::Zero(m, m);
    int hits = 0;
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index l = 0; l < m; ++l)
        {
            if (l == i)
                continue;
            for (int round = 0;; ++round)
            {
                if (round >= 100)
                {
                    ++hits;
                    break;
                }
                Eigen::VectorXd residual = hat.row(i).transpose();
                for (Eigen::Index j = 0; j < m; ++j)
                    if (j != i && sigma_hat(i, j) != 0.0)
                        residual -= sigma_hat(i, j) * hat.row(j).transpose();
                // Largest alpha keeping residual - alpha * hat_l nonnegative.
                double alpha = std::numeric_limits<double>::infinity();
                for (Eigen::Index t = 0; t < q; ++t)
                    if (hat(l, t) > k_zero_margin)
                        alpha = std::min(alpha, residual(t) / hat(l, t));
                alpha = std::max(alpha, 0.0);
                if (!(alpha >= epsilon) || !std::isfinite(alpha))
                    break;
                sigma_hat(i, l) += 0.5 * alpha;
            }
        }
    }

    Eigen::MatrixXd psi(m, q);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i)
                sigma(i, j) = sigma_hat(i, j) * scale(i) / scale(j);
        Eigen::VectorXd row = modes.row(i).transpose();
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i)
                row -= sigma(i, j) * modes.row(j).transpose();
        const double floor = row.minCoeff();
        require(floor >= -1e-9 * scale(i), ErrorCode::Numeric, "cone enlargement lost pointwise nonnegativity");
        psi.row(i) = row.cwiseMax(0.0).transpose();
    }

    if (sigma_out != nullptr)
        *sigma_out = sigma;
    if (cap_hits != nullptr)
        *cap_hits = hits;
    return psi;
}

void enlarge_cone(ReducedBasis& basis, double epsilon)
{
    require(basis.method == BasisMethod::ENG || basis.method == BasisMethod::NMF, ErrorCode::InvalidArgument,
            "cone enlargement applies to nonnegative bases");
    require(!basis.has_exp_mode, ErrorCode::InvalidArgument, "enlarge before augmenting with the exponential mode");
    if (basis.method == BasisMethod::ENG)
        basis.raw_modes = basis.modes;
    basis.modes = enlarge_cone_matrix(basis.modes, epsilon, &basis.cone_sigma, &basis.cone_cap_hits);
}

Eigen::VectorXd project_cone(const ReducedBasis& basis, const Eigen::VectorXd& target, int w0, int w1,
                             double* kkt_residual)
{
    require_window(basis, target, w0, w1);
    const int rows = w1 - w0 + 1;
    const Eigen::MatrixXd a = basis.modes.middleCols(w0, rows).transpose();
    const Eigen::VectorXd b = target.segment(w0, rows);
    const NnlsResult res = nnls(a, b);
    if (kkt_residual != nullptr)
        *kkt_residual = res.kkt_residual;
    return res.x;
}

Eigen::VectorXd project_linear(const ReducedBasis& basis, const Eigen::VectorXd& target, int w0, int w1)
{
    require_window(basis, target, w0, w1);
    const int rows = w1 - w0 + 1;
    const Eigen::MatrixXd a = basis.modes.middleCols(w0, rows).transpose();
    const Eigen::VectorXd b = target.segment(w0, rows);
    return a.colPivHouseholderQr().solve(b);
}

RateFunction basis_combination(const ReducedBasis& basis, const Eigen::VectorXd& coefficients)
{
    require(coefficients.size() == basis.modes.rows(), ErrorCode::InvalidArgument,
            "coefficient count does not match the basis dimension");
    const Eigen::VectorXd values = basis.modes.transpose() * coefficients;
    return RateFunction{basis.grid, std::vector<double>(values.data(), values.data() + values.size())};
}

ReducedBasis augment_exponential(const ReducedBasis& basis, const RateFunction& observed, int window_end)
{
    require(!basis.has_exp_mode, ErrorCode::InvalidArgument, "basis already carries an exponential mode");
    require(window_end >= 0 && window_end < static_cast<int>(observed.grid.count), ErrorCode::InvalidArgument,
            "regression window exceeds the observed series");
    require(std::abs(observed.grid.t0 - basis.grid.t0) <= 1e-9 &&
                std::abs(observed.grid.step - basis.grid.step) <= 1e-9,
            ErrorCode::InvalidArgument, "observed rates are not aligned with the basis grid");

    // Least-squares line through (t_k, log v_k) over the positive samples.
    int positives = 0;
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (int k = 0; k <= window_end; ++k)
    {
        const double v = observed.values[static_cast<std::size_t>(k)];
        if (v <= 0.0)
            continue;
        const double t = observed.grid.time(k);
        const double y = std::log(v);
        ++positives;
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    require(positives >= 3, ErrorCode::InvalidArgument, "exponential regression needs at least 3 positive samples");
    require(2 * positives > window_end + 1, ErrorCode::InvalidArgument,
            "exponential regression needs positive values on a majority of the window");
    const double denom = positives * stt - st * st;
    require(std::abs(denom) > 1e-12, ErrorCode::Numeric, "degenerate time samples in exponential regression");
    const double slope = (positives * sty - st * sy) / denom;
    const double intercept = (sy - slope * st) / positives;

    ReducedBasis out = basis;
    out.has_exp_mode = true;
    const double t_end = basis.grid.t_end();
    Eigen::RowVectorXd mode(basis.grid.count);
    if (slope <= 0.0)
    {
        out.exp_reversed = false;
        out.exp_xi = std::exp(intercept);
        out.exp_xi_prime = -slope;
        for (int k = 0; k < static_cast<int>(basis.grid.count); ++k)
            mode(k) = out.exp_xi * std::exp(-out.exp_xi_prime * basis.grid.time(k));
    }
    else
    {
        // Growing data: store the same fitted curve anchored at the far end of
        // the grid so both parameters stay nonnegative.
        out.exp_reversed = true;
        out.exp_xi = std::exp(intercept + slope * t_end);
        out.exp_xi_prime = slope;
        for (int k = 0; k < static_cast<int>(basis.grid.count); ++k)
            mode(k) = out.exp_xi * std::exp(-out.exp_xi_prime * (t_end - basis.grid.time(k)));
    }
    out.modes.resize(basis.modes.rows() + 1, basis.modes.cols());
    out.modes.row(0) = mode;
    out.modes.bottomRows(basis.modes.rows()) = basis.modes;
    return out;
}

DualCone bounded_cone(const ReducedBasis& eng_basis, double upper, double epsilon)
{
    require(eng_basis.method == BasisMethod::ENG, ErrorCode::InvalidArgument,
            "bounded cones are built from greedy bases");
    require(!eng_basis.has_exp_mode, ErrorCode::InvalidArgument, "bound the cone before exponential augmentation");
    require(eng_basis.raw_modes.rows() >= 1, ErrorCode::InvalidArgument, "basis carries no raw modes");

    DualCone cone;
    cone.grid = eng_basis.grid;
    cone.upper = upper;
    cone.phi = eng_basis.raw_modes;
    if (std::isinf(upper))
    {
        cone.psi = eng_basis.modes;
        return cone;
    }
    require(upper > 0.0, ErrorCode::InvalidArgument, "upper bound must be positive");
    require(eng_basis.raw_modes.maxCoeff() <= upper, ErrorCode::InvalidArgument,
            "training modes exceed the requested upper bound");

    const Eigen::Index n = cone.phi.rows();
    Eigen::MatrixXd sigma1, sigma2;
    cone.psi = enlarge_cone_matrix(cone.phi, epsilon, &sigma1);
    const Eigen::MatrixXd mirrored =
        (Eigen::MatrixXd::Constant(n, cone.phi.cols(), upper) - cone.phi).cwiseMax(0.0);
    cone.eta = enlarge_cone_matrix(mirrored, epsilon, &sigma2);

    // psi = (I - sigma1) phi, so phi-coefficients a map to psi-coefficients
    // via c = (I - sigma1)^-T a; likewise for the mirrored side.
    const Eigen::MatrixXd s1 = Eigen::MatrixXd::Identity(n, n) - sigma1;
    const Eigen::MatrixXd s2 = Eigen::MatrixXd::Identity(n, n) - sigma2;
    Eigen::FullPivLU<Eigen::MatrixXd> lu1(s1.transpose());
    Eigen::FullPivLU<Eigen::MatrixXd> lu2(s2.transpose());
    require(lu1.isInvertible() && lu2.isInvertible(), ErrorCode::Numeric,
            "cone enlargement produced a singular coefficient map");
    cone.c_map = lu1.inverse();
    cone.d_map = lu2.inverse();
    return cone;
}

DualProjection project_dual_cone(const DualCone& cone, const Eigen::VectorXd& target)
{
    const Eigen::Index q = cone.phi.cols();
    require(target.size() == q, ErrorCode::InvalidArgument, "projection target length does not match the basis grid");

    DualProjection out;
    if (std::isinf(cone.upper))
    {
        const NnlsResult res = nnls(cone.psi.transpose(), target);
        out.a = res.x; // psi-basis coefficients: the plain nonnegative cone
        out.values = cone.psi.transpose() * res.x;
        return out;
    }

    const Eigen::Index n = cone.phi.rows();
    const Eigen::VectorXd a0 = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    if (n == 1)
    {
        out.a = a0;
        out.values = cone.phi.transpose() * a0;
        return out;
    }

    // Eliminate the sum-to-one equality: a = a0 + Z y with Z spanning the
    // kernel of the all-ones row. a0 itself is feasible for both cones since
    // the inverse maps are entrywise nonnegative.
    Eigen::MatrixXd ones_row = Eigen::MatrixXd::Ones(1, n);
    const Eigen::MatrixXd z = Eigen::FullPivLU<Eigen::MatrixXd>(ones_row).kernel();

    const Eigen::MatrixXd a_mat = cone.phi.transpose() * z;
    const Eigen::VectorXd b = target - cone.phi.transpose() * a0;
    Eigen::MatrixXd g(2 * n, z.cols());
    Eigen::VectorXd h(2 * n);
    g.topRows(n) = cone.c_map * z;
    g.bottomRows(n) = cone.d_map * z;
    h.head(n) = -(cone.c_map * a0);
    h.tail(n) = -(cone.d_map * a0);

    const Eigen::VectorXd y = lsi(a_mat, b, g, h);
    out.a = a0 + z * y;
    out.values = cone.phi.transpose() * out.a;
    return out;
}

} // namespace epf
