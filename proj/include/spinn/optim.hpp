#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spinn/network.hpp"

namespace spinn {

enum class StopReason {
    MaxIterations,
    ResidualTolerance,
    StepTolerance,
    GradientTolerance,
    RejectLimit,
    LineSearchFailure,
    NonFiniteStart,
};

[[nodiscard]] std::string_view stop_reason_name(StopReason r) noexcept;

// One optimizer iteration. Fields that do not apply to a method hold NaN.
struct IterationRecord {
    int iter = 0;
    double loss = 0.0;
    double residual_norm = 0.0;
    double grad_norm = 0.0;
    double kappa = 0.0;
    double step_norm = 0.0;
    bool accepted = false;
    int rejects = 0;
    Vector lambda;
    long residual_evals = 0;
    long jacobian_evals = 0;
    long gradient_evals = 0;
    // line-search data of the accepted step: phi(0), phi'(0), phi(alpha), phi'(alpha)
    double step_length = 0.0;
    double phi0 = 0.0, dphi0 = 0.0, phi = 0.0, dphi = 0.0;

    friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

class RunHistory {
public:
    std::vector<IterationRecord> records;

    // One JSON object per line; every `stride`-th record plus the last one.
    void write_jsonl(std::ostream& out, int stride = 1) const;
    [[nodiscard]] static RunHistory read_jsonl(std::istream& in);

    friend bool operator==(const RunHistory& a, const RunHistory& b)
    {
        // NaN placeholders compare by bit pattern through the serialized form.
        return a.serialized() == b.serialized();
    }

    [[nodiscard]] std::string serialized() const;
};

struct SolveResult {
    Vector W;
    RunHistory history;
    StopReason status = StopReason::MaxIterations;
    std::string message;
    double final_loss = 0.0;
    int iterations = 0;
};

using IterationCallback = std::function<void(const IterationRecord&)>;

// ---------------------------------------------------------------------------

struct LMConfig {
    int max_iters = 4000;
    double kappa0 = 1e-3;
    double nu = 10.0;
    double kappa_min = 1e-12;
    double kappa_max = 1e12;
    double tol_F = 1e-12;
    double tol_step = 1e-12;
    int max_rejects = 20;

    void validate() const;
};

struct LeastSquaresProblem {
    std::function<Vector(const Vector&)> residual;
    std::function<void(const Vector& W, Vector& F, RowMatrix& J)> residual_jacobian;
    // loss = loss_scale * ||F||^2
    double loss_scale = 1.0;
    // optional snapshot of identified coefficients stored in every record
    std::function<Vector(const Vector&)> lambda_of;
};

// Solves (J^T J + kappa I) dW = J^T F; empty when the factorization fails.
[[nodiscard]] std::optional<Vector> lm_step(const RowMatrix& J, const Vector& F, double kappa);
[[nodiscard]] std::optional<Vector> lm_step_normal(const Matrix& JtJ, const Vector& JtF, double kappa);

// W <- W - dW while ||F||^2 strictly decreases; kappa / nu on acceptance,
// kappa * nu on rejection.
[[nodiscard]] SolveResult lm_solve(const LeastSquaresProblem& problem, Vector W0, const LMConfig& cfg,
                                   const IterationCallback& on_iteration = {});

// ---------------------------------------------------------------------------

struct BFGSConfig {
    int max_iters = 20000;
    double c1 = 1e-4;
    double c2 = 0.9;
    int max_line_search = 40;
    double grad_tol = 1e-10;

    void validate() const;
};

struct Objective {
    // Returns the value and writes the gradient.
    std::function<double(const Vector& W, Vector& grad)> value_and_gradient;
    std::function<Vector(const Vector&)> lambda_of;
};

// Dense inverse-Hessian BFGS with a strong-Wolfe line search.
[[nodiscard]] SolveResult bfgs_solve(const Objective& objective, Vector W0, const BFGSConfig& cfg,
                                     const IterationCallback& on_iteration = {});

} // namespace spinn
