#include <cmath>
#include <limits>

#include "spinn/errors.hpp"
#include "spinn/optim.hpp"

namespace spinn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

void LMConfig::validate() const
{
    if (max_iters < 0) throw ConfigError("LM max_iters must be non-negative");
    if (!(kappa0 > 0.0)) throw ConfigError("LM kappa0 must be positive");
    if (!(nu > 1.0)) throw ConfigError("LM nu must exceed 1");
    if (!(kappa_min > 0.0) || !(kappa_max >= kappa_min)) throw ConfigError("LM damping clamps are inconsistent");
    if (max_rejects < 1) throw ConfigError("LM max_rejects must be at least 1");
}

std::optional<Vector> lm_step_normal(const Matrix& JtJ, const Vector& JtF, double kappa)
{
    Matrix M = JtJ;
    M.diagonal().array() += kappa;
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) return std::nullopt;
    Vector d = llt.solve(JtF);
    if (!d.allFinite()) return std::nullopt;
    return d;
}

std::optional<Vector> lm_step(const RowMatrix& J, const Vector& F, double kappa)
{
    if (J.rows() != F.size()) throw ShapeError("Jacobian rows differ from residual length");
    if (!(kappa > 0.0)) throw ConfigError("damping must be positive");
    Matrix JtJ = Matrix::Zero(J.cols(), J.cols());
    JtJ.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
    JtJ.triangularView<Eigen::StrictlyUpper>() = JtJ.transpose();
    return lm_step_normal(JtJ, J.transpose() * F, kappa);
}

SolveResult lm_solve(const LeastSquaresProblem& problem, Vector W0, const LMConfig& cfg,
                     const IterationCallback& on_iteration)
{
    cfg.validate();
    SolveResult out;
    out.W = std::move(W0);
    long n_res = 0, n_jac = 0;
    const auto snapshot = [&](const Vector& W) { return problem.lambda_of ? problem.lambda_of(W) : Vector(); };

    Vector F;
    RowMatrix J;
    problem.residual_jacobian(out.W, F, J);
    ++n_res;
    ++n_jac;
    double sq = F.squaredNorm();
    const auto record = [&](int iter, double kappa, double step, bool accepted, int rejects) {
        IterationRecord r;
        r.iter = iter;
        r.loss = problem.loss_scale * sq;
        r.residual_norm = std::sqrt(sq);
        r.grad_norm = kNaN;
        r.kappa = kappa;
        r.step_norm = step;
        r.accepted = accepted;
        r.rejects = rejects;
        r.lambda = snapshot(out.W);
        r.residual_evals = n_res;
        r.jacobian_evals = n_jac;
        r.gradient_evals = 0;
        r.step_length = r.phi0 = r.dphi0 = r.phi = r.dphi = kNaN;
        out.history.records.push_back(r);
        if (on_iteration) on_iteration(r);
    };

    if (!std::isfinite(sq) || !J.allFinite()) {
        out.status = StopReason::NonFiniteStart;
        out.message = "residual or Jacobian is not finite at the initial parameters";
        out.final_loss = problem.loss_scale * sq;
        return out;
    }

    double kappa = cfg.kappa0;
    record(0, kappa, 0.0, true, 0);
    out.status = StopReason::MaxIterations;

    Matrix JtJ(J.cols(), J.cols());
    Vector JtF;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        if (std::sqrt(sq) <= cfg.tol_F) {
            out.status = StopReason::ResidualTolerance;
            break;
        }
        JtJ.setZero();
        JtJ.selfadjointView<Eigen::Lower>().rankUpdate(J.transpose());
        JtJ.triangularView<Eigen::StrictlyUpper>() = JtJ.transpose();
        JtF = J.transpose() * F;

        int rejects = 0;
        bool accepted = false;
        double step = 0.0;
        Vector trial;
        Vector Ft;
        while (true) {
            const auto d = lm_step_normal(JtJ, JtF, kappa);
            if (d) {
                trial = out.W - *d;
                Ft = problem.residual(trial);
                ++n_res;
                const double sq_t = Ft.squaredNorm();
                if (std::isfinite(sq_t) && sq_t < sq) {
                    step = d->norm();
                    accepted = true;
                    kappa = std::max(kappa / cfg.nu, cfg.kappa_min);
                    break;
                }
            }
            kappa = std::min(kappa * cfg.nu, cfg.kappa_max);
            if (++rejects >= cfg.max_rejects) break;
        }

        if (!accepted) {
            record(iter, kappa, 0.0, false, rejects);
            out.status = StopReason::RejectLimit;
            out.message = "no decrease after " + std::to_string(rejects) + " damping increases";
            break;
        }
        out.W = std::move(trial);
        if (step <= cfg.tol_step) {
            F = std::move(Ft);
            sq = F.squaredNorm();
            record(iter, kappa, step, true, rejects);
            out.status = StopReason::StepTolerance;
            break;
        }
        problem.residual_jacobian(out.W, F, J);
        ++n_res;
        ++n_jac;
        sq = F.squaredNorm();
        record(iter, kappa, step, true, rejects);
    }

    out.iterations = out.history.records.empty() ? 0 : out.history.records.back().iter;
    out.final_loss = problem.loss_scale * sq;
    return out;
}

} // namespace spinn
