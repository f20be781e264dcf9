#include <cmath>
#include <limits>

#include "spinn/errors.hpp"
#include "spinn/optim.hpp"

namespace spinn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Probe {
    double alpha = 0.0;
    double phi = 0.0;
    double dphi = 0.0;
    Vector grad;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
double cubic_min(double a, double fa, double da, double b, double fb, double db)
{
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (!(disc >= 0.0)) return kNaN;
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return kNaN;
    return b - (b - a) * (db + d2 - d1) / denom;
}

class LineSearch {
public:
    LineSearch(const Objective& obj, const Vector& W, const Vector& p, double phi0, double dphi0,
               const BFGSConfig& cfg, long& evals)
        : obj_(obj), W_(W), p_(p), phi0_(phi0), dphi0_(dphi0), cfg_(cfg), evals_(evals)
    {
    }

    // Strong-Wolfe search; empty when the trial budget runs out.
    std::optional<Probe> run(double alpha)
    {
        Probe prev{0.0, phi0_, dphi0_, {}};
        for (int i = 0; trials_ < cfg_.max_line_search; ++i) {
            Probe cur = probe(alpha);
            if (!std::isfinite(cur.phi) || cur.phi > phi0_ + cfg_.c1 * alpha * dphi0_ || (i > 0 && cur.phi >= prev.phi)) {
                return zoom(prev, cur);
            }
            if (std::abs(cur.dphi) <= -cfg_.c2 * dphi0_) return cur;
            if (cur.dphi >= 0.0) return zoom(cur, prev);
            prev = std::move(cur);
            alpha *= 2.0;
        }
        return std::nullopt;
    }

private:
    Probe probe(double alpha)
    {
        ++trials_;
        ++evals_;
        Probe pr;
        pr.alpha = alpha;
        pr.phi = obj_.value_and_gradient(W_ + alpha * p_, pr.grad);
        pr.dphi = pr.grad.dot(p_);
        if (!std::isfinite(pr.dphi)) pr.phi = std::numeric_limits<double>::infinity();
        return pr;
    }

    std::optional<Probe> zoom(Probe lo, Probe hi)
    {
        while (trials_ < cfg_.max_line_search) {
            const double a = lo.alpha, b = hi.alpha;
            const double width = std::abs(b - a);
            if (width <= 1e-16 * std::max(1.0, std::abs(a))) return std::nullopt;
            double alpha = kNaN;
            if (std::isfinite(hi.phi)) alpha = cubic_min(a, lo.phi, lo.dphi, b, hi.phi, hi.dphi);
            const double left = std::min(a, b) + 0.1 * width, right = std::max(a, b) - 0.1 * width;
            if (!(alpha >= left && alpha <= right)) alpha = 0.5 * (a + b);

            Probe cur = probe(alpha);
            if (!std::isfinite(cur.phi) || cur.phi > phi0_ + cfg_.c1 * alpha * dphi0_ || cur.phi >= lo.phi) {
                hi = std::move(cur);
                continue;
            }
            if (std::abs(cur.dphi) <= -cfg_.c2 * dphi0_) return cur;
            if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
            lo = std::move(cur);
        }
        return std::nullopt;
    }

    const Objective& obj_;
    const Vector& W_;
    const Vector& p_;
    double phi0_, dphi0_;
    const BFGSConfig& cfg_;
    long& evals_;
    int trials_ = 0;
};

} // namespace

void BFGSConfig::validate() const
{
    if (max_iters < 0) throw ConfigError("BFGS max_iters must be non-negative");
    if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("BFGS Wolfe constants need 0 < c1 < c2 < 1");
    if (max_line_search < 1) throw ConfigError("BFGS line search needs at least one trial");
    if (!(grad_tol >= 0.0)) throw ConfigError("BFGS gradient tolerance must be non-negative");
}

SolveResult bfgs_solve(const Objective& objective, Vector W0, const BFGSConfig& cfg, const IterationCallback& on_iteration)
{
    cfg.validate();
    SolveResult out;
    out.W = std::move(W0);
    long evals = 0;
    Vector g;
    double f = objective.value_and_gradient(out.W, g);
    ++evals;

    const auto record = [&](int iter, double step, const Probe* pr, double phi0, double dphi0) {
        IterationRecord r;
        r.iter = iter;
        r.loss = f;
        r.residual_norm = kNaN;
        r.grad_norm = g.norm();
        r.kappa = kNaN;
        r.step_norm = step;
        r.accepted = true;
        r.rejects = 0;
        r.lambda = objective.lambda_of ? objective.lambda_of(out.W) : Vector();
        r.residual_evals = evals;
        r.jacobian_evals = 0;
        r.gradient_evals = evals;
        r.step_length = pr ? pr->alpha : kNaN;
        r.phi0 = pr ? phi0 : kNaN;
        r.dphi0 = pr ? dphi0 : kNaN;
        r.phi = pr ? pr->phi : kNaN;
        r.dphi = pr ? pr->dphi : kNaN;
        out.history.records.push_back(r);
        if (on_iteration) on_iteration(r);
    };

    if (!std::isfinite(f) || !g.allFinite()) {
        out.status = StopReason::NonFiniteStart;
        out.message = "loss or gradient is not finite at the initial parameters";
        out.final_loss = f;
        return out;
    }
    record(0, 0.0, nullptr, 0.0, 0.0);

    const Index m = out.W.size();
    Matrix H = Matrix::Identity(m, m);
    bool scaled = false;
    out.status = StopReason::MaxIterations;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        if (g.norm() <= cfg.grad_tol) {
            out.status = StopReason::GradientTolerance;
            break;
        }
        Vector p = -(H * g);
        double dphi0 = g.dot(p);
        if (!(dphi0 < 0.0)) {
            H.setIdentity();
            scaled = false;
            p = -g;
            dphi0 = g.dot(p);
        }
        const double alpha0 = scaled ? 1.0 : std::min(1.0, 1.0 / g.norm());
        LineSearch ls(objective, out.W, p, f, dphi0, cfg, evals);
        const auto found = ls.run(alpha0);
        if (!found) {
            out.status = StopReason::LineSearchFailure;
            out.message = "no strong-Wolfe step within " + std::to_string(cfg.max_line_search) + " trials";
            break;
        }

        const Vector s = found->alpha * p;
        const Vector y = found->grad - g;
        const double sy = s.dot(y);
        const double phi0 = f;
        out.W += s;
        f = found->phi;
        g = found->grad;

        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                H *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vector Hy = H * y;
            const double yHy = y.dot(Hy);
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
            H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
        }
        record(iter, s.norm(), &*found, phi0, dphi0);
    }

    out.iterations = out.history.records.back().iter;
    out.final_loss = f;
    return out;
}

} // namespace spinn
