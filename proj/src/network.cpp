#include "spinn/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "spinn/errors.hpp"

namespace spinn {

void Architecture::validate() const
{
    if (inputs < 1 || hidden1 < 1 || hidden2 < 1) {
        throw ShapeError("architecture NN(" + std::to_string(inputs) + "," + std::to_string(hidden1) +
                         "," + std::to_string(hidden2) + ",1) needs every layer width >= 1");
    }
}

std::string_view block_name(Block b) noexcept
{
    switch (b) {
    case Block::W1: return "W1";
    case Block::B1: return "B1";
    case Block::W2: return "W2";
    case Block::B2: return "B2";
    case Block::W3: return "W3";
    case Block::B3: return "B3";
    case Block::Lambda: return "lambda";
    }
    return "?";
}

BlockRange block_range(const Architecture& arch, Block b, Index n_lambda)
{
    const Index a = arch.inputs, m1 = arch.hidden1, m2 = arch.hidden2;
    const Index w1 = 0;
    const Index b1 = w1 + a * m1;
    const Index w2 = b1 + m1;
    const Index b2 = w2 + m1 * m2;
    const Index w3 = b2 + m2;
    const Index b3 = w3 + m2;
    const Index lam = b3 + 1;
    switch (b) {
    case Block::W1: return {w1, a * m1};
    case Block::B1: return {b1, m1};
    case Block::W2: return {w2, m1 * m2};
    case Block::B2: return {b2, m2};
    case Block::W3: return {w3, m2};
    case Block::B3: return {b3, 1};
    case Block::Lambda: return {lam, n_lambda};
    }
    return {};
}

ParamVector::ParamVector(const Architecture& arch, Index n_lambda)
    : arch_(arch), n_lambda_(n_lambda), values_(Vector::Zero(arch.param_count() + n_lambda))
{
    arch.validate();
    if (n_lambda < 0) throw ShapeError("negative lambda count");
}

ParamVector ParamVector::unflatten(const Architecture& arch, Index n_lambda,
                                   const Eigen::Ref<const Vector>& flat)
{
    ParamVector p(arch, n_lambda);
    if (flat.size() != p.size()) {
        throw ShapeError("flat parameter vector has length " + std::to_string(flat.size()) +
                         ", expected " + std::to_string(p.size()));
    }
    p.values_ = flat;
    return p;
}

ParamVector init_params(const Architecture& arch, Index n_lambda, const Vector& lambda0,
                        std::uint64_t seed)
{
    if (lambda0.size() != n_lambda) {
        throw ShapeError("lambda0 has length " + std::to_string(lambda0.size()) + ", expected " +
                         std::to_string(n_lambda));
    }
    ParamVector p(arch, n_lambda);
    std::mt19937_64 rng(seed);
    auto fill = [&](auto&& block, Index fan_in, Index fan_out) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Index i = 0; i < block.rows(); ++i)
            for (Index j = 0; j < block.cols(); ++j) block(i, j) = dist(rng);
    };
    fill(p.w1(), arch.inputs, arch.hidden1);
    fill(p.w2(), arch.hidden1, arch.hidden2);
    fill(p.w3(), arch.hidden2, 1);
    p.lambda() = lambda0;
    return p;
}

ActivationEval activation_eval(const Matrix& h, int max_order)
{
    if (max_order < 0 || max_order > 3) {
        throw UnsupportedOrder("activation derivatives are available up to order 3, requested " +
                               std::to_string(max_order));
    }
    return activation_from_output(h.array().tanh().matrix(), max_order);
}

ActivationEval activation_from_output(const Matrix& s0, int max_order)
{
    if (max_order < 0 || max_order > 3) {
        throw UnsupportedOrder("activation derivatives are available up to order 3, requested " +
                               std::to_string(max_order));
    }
    ActivationEval e;
    e.order = max_order;
    e.s0 = s0;
    if (max_order >= 1) e.s1 = (1.0 - e.s0.array().square()).matrix();
    if (max_order >= 2) e.s2 = (-2.0 * e.s0.array() * e.s1.array()).matrix();
    if (max_order >= 3) {
        e.s3 = (-2.0 * e.s1.array().square() - 2.0 * e.s0.array() * e.s2.array()).matrix();
    }
    return e;
}

ForwardTrace forward_trace(const ParamVector& params, const Matrix& X)
{
    const auto& arch = params.arch();
    if (X.cols() != arch.inputs) {
        throw ShapeError("W1: input matrix has " + std::to_string(X.cols()) + " columns, network expects " +
                         std::to_string(arch.inputs));
    }
    if (X.rows() < 1) throw ShapeError("input matrix has no rows");

    ForwardTrace t;
    t.X = X;
    t.h1 = X * params.w1();
    t.h1.rowwise() += params.b1().transpose();
    t.H1 = t.h1.array().tanh().matrix();
    t.h2 = t.H1 * params.w2();
    t.h2.rowwise() += params.b2().transpose();
    t.H2 = t.h2.array().tanh().matrix();
    t.u_tilde = t.H2 * params.w3();
    t.u_tilde.array() += params.b3();
    return t;
}

} // namespace spinn
