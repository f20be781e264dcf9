#include <cmath>
#include <cstdio>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include "spinn/errors.hpp"
#include "spinn/reference.hpp"

namespace spinn {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Negative 7-point Laplacian on the interior nodes, zero Dirichlet data folded in.
SpMat negative_laplacian(Index m, double h)
{
    const double s = 1.0 / (h * h);
    auto id = [m](Index i, Index j, Index k) { return (i * m + j) * m + k; };
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(7 * m * m * m));
    for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < m; ++j) {
            for (Index k = 0; k < m; ++k) {
                const Index r = id(i, j, k);
                trip.emplace_back(r, r, 6.0 * s);
                if (i > 0) trip.emplace_back(r, id(i - 1, j, k), -s);
                if (i + 1 < m) trip.emplace_back(r, id(i + 1, j, k), -s);
                if (j > 0) trip.emplace_back(r, id(i, j - 1, k), -s);
                if (j + 1 < m) trip.emplace_back(r, id(i, j + 1, k), -s);
                if (k > 0) trip.emplace_back(r, id(i, j, k - 1), -s);
                if (k + 1 < m) trip.emplace_back(r, id(i, j, k + 1), -s);
            }
        }
    }
    SpMat A(m * m * m, m * m * m);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

} // namespace

ReferenceGrid bratu_reference(const BratuReferenceSpec& spec)
{
    if (spec.points < 3) throw ConfigError("Bratu grid needs at least 3 points per direction");
    const Index N = spec.points, m = N - 2;
    const double h = 1.0 / static_cast<double>(N - 1);
    const SpMat A = negative_laplacian(m, h);

    // F(u) = -A u + C e^u, Newton on the lower branch starting from u = 0.
    // Convergence is measured on h^2 F, the stencil-scaled discrete equations.
    auto residual = [&](const Vector& u) -> Vector { return -(A * u) + spec.C * u.array().exp().matrix(); };
    auto scaled_norm = [h](const Vector& r) { return h * h * r.cwiseAbs().maxCoeff(); };
    Vector u = Vector::Zero(m * m * m);
    Vector F = residual(u);
    double norm = scaled_norm(F);
    int iters = 0;
    Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(20 * static_cast<int>(N) + 200);
    while (norm > spec.newton_tol) {
        if (iters++ >= spec.max_newton) {
            throw NumericalError("Bratu Newton did not converge, residual " + std::to_string(norm));
        }
        // -J = A - C diag(e^u) is SPD below the fold.
        SpMat M = A;
        const Vector eu = u.array().exp().matrix();
        for (Index r = 0; r < M.rows(); ++r) M.coeffRef(r, r) -= spec.C * eu[r];
        cg.compute(M);
        const Vector delta = cg.solve(F);
        double step = 1.0, trial_norm = 0.0;
        Vector trial;
        for (int back = 0; back < 30; ++back) {
            trial = u + step * delta;
            trial_norm = scaled_norm(residual(trial));
            if (std::isfinite(trial_norm) && trial_norm < (1.0 - 1e-4 * step) * norm) break;
            step *= 0.5;
        }
        if (!(trial_norm < norm)) {
            char msg[96];
            std::snprintf(msg, sizeof msg, "Bratu Newton stalled, residual %.3e", norm);
            throw NumericalError(msg);
        }
        u = trial;
        F = residual(u);
        norm = scaled_norm(F);
    }

    ReferenceGrid g;
    Vector axis(N);
    for (Index i = 0; i < N; ++i) axis[i] = h * static_cast<double>(i);
    g.axes = {axis, axis, axis};
    g.values.assign(static_cast<std::size_t>(N * N * N), 0.0);
    for (Index i = 1; i <= m; ++i)
        for (Index j = 1; j <= m; ++j)
            for (Index k = 1; k <= m; ++k)
                g.values[static_cast<std::size_t>((i * N + j) * N + k)] = u[((i - 1) * m + (j - 1)) * m + (k - 1)];

    g.solver = "seven-point-newton";
    g.parameters = {{"points", static_cast<double>(N)}, {"C", spec.C}};
    g.diagnostics = {{"newton_iterations", iters}, {"newton_residual_scaled", norm},
                     {"newton_residual", F.cwiseAbs().maxCoeff()}};
    g.validate();
    return g;
}

} // namespace spinn
