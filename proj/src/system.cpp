#include "spinn/system.hpp"

#include "spinn/errors.hpp"

namespace spinn {

PinnSystem::PinnSystem(ProblemSpec spec, Architecture arch, CollocationSet points)
    : spec_(std::move(spec)), arch_(arch), points_(std::move(points))
{
    arch_.validate();
    if (arch_.inputs != spec_.features.feature_dims()) {
        throw ShapeError("problem '" + spec_.name + "' feeds " + std::to_string(spec_.features.feature_dims()) +
                         " network inputs, architecture has " + std::to_string(arch_.inputs));
    }
    if (points_.points.cols() != spec_.raw_dims()) throw ShapeError("collocation points have the wrong dimension");
    if (points_.points.rows() == 0) throw ConfigError("collocation set is empty");
    if (inverse() && points_.observed.size() != points_.points.rows()) {
        throw ConfigError("inverse problem needs one observed value per collocation point");
    }
    channels_ = close_channels(spec_.channels);
    for (const auto& e : spec_.enforcement) {
        enf_.push_back(std::make_shared<const EnforcementSample>(sample_enforcement(e, points_.points, channels_)));
    }
}

Index PinnSystem::num_params() const noexcept { return spec_.fields() * arch_.param_count() + n_lambda(); }

Index PinnSystem::num_residuals() const noexcept
{
    return num_points() * (spec_.equations + (inverse() ? 1 : 0));
}

PinnSystem::Split PinnSystem::split(const Vector& W) const
{
    if (W.size() != num_params()) {
        throw ShapeError("parameter vector has " + std::to_string(W.size()) + " entries, system needs " +
                         std::to_string(num_params()));
    }
    Split s;
    const Index m = arch_.param_count();
    for (int f = 0; f < spec_.fields(); ++f) s.nets.push_back(ParamVector::unflatten(arch_, 0, W.segment(f * m, m)));
    s.lambda = W.tail(n_lambda());
    return s;
}

Vector PinnSystem::join(std::span<const ParamVector> nets, const Vector& lambda) const
{
    if (static_cast<int>(nets.size()) != spec_.fields() || lambda.size() != n_lambda()) {
        throw ShapeError("pieces do not match the system layout");
    }
    Vector W(num_params());
    const Index m = arch_.param_count();
    for (std::size_t f = 0; f < nets.size(); ++f) {
        if (nets[f].arch() != arch_) throw ShapeError("network architecture differs from the system's");
        W.segment(static_cast<Index>(f) * m, m) = nets[f].flatten();
    }
    W.tail(n_lambda()) = lambda;
    return W;
}

Vector PinnSystem::initial_params(std::uint64_t seed, const Vector& lambda0) const
{
    if (lambda0.size() != n_lambda()) throw ShapeError("initial lambda has the wrong length");
    std::vector<ParamVector> nets;
    for (int f = 0; f < spec_.fields(); ++f) {
        nets.push_back(init_params(arch_, 0, Vector(), seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(f)));
    }
    return join(nets, lambda0);
}

std::vector<FieldEval> PinnSystem::evaluate(const Vector& W, bool with_kernel) const
{
    const Split s = split(W);
    std::vector<FieldEval> out;
    for (int f = 0; f < spec_.fields(); ++f) {
        out.push_back(evaluate_network(s.nets[static_cast<std::size_t>(f)], spec_.features, points_.points,
                                       enf_[static_cast<std::size_t>(f)], channels_, with_kernel));
    }
    return out;
}

Vector PinnSystem::residual(const Vector& W) const
{
    const auto fields = evaluate(W, false);
    return assemble_residual(spec_, fields, W.tail(n_lambda()), inverse() ? &points_.observed : nullptr);
}

ResidualJacobian PinnSystem::residual_jacobian(const Vector& W) const
{
    const auto fields = evaluate(W, true);
    if (inverse()) return assemble_inverse_jacobian(spec_, fields, W.tail(n_lambda()), points_.observed);
    return assemble_forward_jacobian(spec_, fields);
}

double PinnSystem::loss_of_residual(const Vector& F) const
{
    return F.squaredNorm() / static_cast<double>(num_points());
}

double PinnSystem::loss(const Vector& W) const { return loss_of_residual(residual(W)); }

double PinnSystem::loss_and_gradient(const Vector& W, Vector& grad) const
{
    const auto fields = evaluate(W, true);
    const Vector lambda = W.tail(n_lambda());
    const Vector* obs = inverse() ? &points_.observed : nullptr;
    const Vector F = assemble_residual(spec_, fields, lambda, obs);
    grad = assemble_gradient(spec_, fields, lambda, obs, F, num_points());
    return loss_of_residual(F);
}

Vector PinnSystem::gradient(const Vector& W) const
{
    Vector g;
    (void)loss_and_gradient(W, g);
    return g;
}

} // namespace spinn
