#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "spinn/param_jacobian.hpp"
#include "spinn/problems.hpp"

namespace spinn {

// A problem, an architecture and a fixed collocation set, viewed as a map from
// the flat parameter vector W = [net 0 | net 1 | ... | lambda] to the stacked
// residual F(W). Loss is ||F||^2 / n with n the number of collocation points.
class PinnSystem {
public:
    PinnSystem(ProblemSpec spec, Architecture arch, CollocationSet points);

    [[nodiscard]] const ProblemSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Architecture& arch() const noexcept { return arch_; }
    [[nodiscard]] const CollocationSet& points() const noexcept { return points_; }

    [[nodiscard]] Index num_points() const noexcept { return points_.points.rows(); }
    [[nodiscard]] Index num_params() const noexcept;
    [[nodiscard]] Index num_residuals() const noexcept;
    [[nodiscard]] Index n_lambda() const noexcept { return spec_.n_lambda(); }
    [[nodiscard]] bool inverse() const noexcept { return spec_.mode == Mode::Inverse; }

    struct Split {
        std::vector<ParamVector> nets;
        Vector lambda;
    };
    [[nodiscard]] Split split(const Vector& W) const;
    [[nodiscard]] Vector join(std::span<const ParamVector> nets, const Vector& lambda) const;

    // One Glorot-initialized network per field; lambda block set to lambda0.
    [[nodiscard]] Vector initial_params(std::uint64_t seed, const Vector& lambda0) const;

    [[nodiscard]] std::vector<FieldEval> evaluate(const Vector& W, bool with_kernel) const;

    [[nodiscard]] Vector residual(const Vector& W) const;
    [[nodiscard]] ResidualJacobian residual_jacobian(const Vector& W) const;
    [[nodiscard]] double loss(const Vector& W) const;
    [[nodiscard]] double loss_of_residual(const Vector& F) const;
    // (2/n) J^T F computed without forming J.
    [[nodiscard]] Vector gradient(const Vector& W) const;
    [[nodiscard]] double loss_and_gradient(const Vector& W, Vector& grad) const;

private:
    ProblemSpec spec_;
    Architecture arch_;
    CollocationSet points_;
    std::vector<Channel> channels_;
    std::vector<std::shared_ptr<const EnforcementSample>> enf_;
};

} // namespace spinn
