#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "spinn/input_diff.hpp"
#include "spinn/network.hpp"
#include "spinn/problems.hpp"

namespace spinn {

// Per-row weights on derivative channels, indexed by channel slot. An empty
// vector stands for an identically zero weight.
using ChannelWeights = std::vector<Vector>;

// Maps weights on the enforced channels (u, u_c, u_cc) to the equivalent
// weights on the raw network channels (u~, u~_c, u~_cc).
[[nodiscard]] ChannelWeights enforce_weights(const EnforcementSample& enf, const ChannelWeights& enforced);

// Derivatives of u~ and its input derivatives with respect to every network
// parameter. Shared subexpressions are built once; the kernel then produces
// weighted Jacobian rows sum_ch w_ch * d(u~_ch)/dW or their transpose product.
class ParamDerivKernel {
public:
    ParamDerivKernel(ForwardTrace trace, std::vector<InputDerivTrace> derivs, const ParamVector& params);

    [[nodiscard]] Index rows() const noexcept { return trace_.X.rows(); }
    [[nodiscard]] Index cols() const noexcept { return arch_.param_count(); }
    [[nodiscard]] int raw_dims() const noexcept { return raw_dims_; }
    [[nodiscard]] const Architecture& arch() const noexcept { return arch_; }
    [[nodiscard]] const ForwardTrace& trace() const noexcept { return trace_; }

    // n x m matrix with row i = sum_ch w_ch(i) * d(u~_ch)(x_i)/dW.
    [[nodiscard]] RowMatrix weighted_rows(const ChannelWeights& raw_weights) const;
    // sum_i sum_ch w_ch(i) * d(u~_ch)(x_i)/dW, equal to weighted_rows(w)^T 1.
    [[nodiscard]] Vector weighted_sum(const ChannelWeights& raw_weights) const;

private:
    struct CoordTerms {
        int coord = 0;
        int order = 1;
        Matrix Xd, Xdd;
        Matrix H1d, H1dd, H2d, H2dd;
        Matrix Ah, Bh, Bhd;  // n x m2, W3 folded in
        Matrix T1, T2;       // n x m1 layer-1 factors
    };
    struct Contractions;

    [[nodiscard]] Contractions contract(const ChannelWeights& w) const;
    [[nodiscard]] const CoordTerms* terms_for(int coord) const;

    Architecture arch_;
    int raw_dims_ = 0;
    ForwardTrace trace_;
    Matrix W2_;
    Matrix s1a_, s2a_, s3a_;  // layer 1 activation derivatives
    Matrix A0_;               // s1(h2) o W3^T
    std::vector<CoordTerms> coords_;
};

// Per-channel derivative matrices d(u_ch)/dW, one n x m row-major matrix per
// requested channel, columns in parameter-vector order.
class ParamDerivs {
public:
    ParamDerivs() = default;
    ParamDerivs(Architecture arch, int raw_dims);

    [[nodiscard]] const Architecture& arch() const noexcept { return arch_; }
    [[nodiscard]] bool has(Channel c) const;
    [[nodiscard]] const RowMatrix& operator[](Channel c) const;
    // Columns of one parameter block (W1, B1, W2, B2, W3 or B3).
    [[nodiscard]] Eigen::Block<const RowMatrix> block(Channel c, Block b) const;
    void set(Channel c, RowMatrix m);

private:
    Architecture arch_{};
    std::vector<std::optional<RowMatrix>> slots_;
};

// Enforced derivatives; with `enf` null the raw network derivatives are returned.
[[nodiscard]] ParamDerivs param_derivs(const ParamDerivKernel& kernel, const EnforcementSample* enf,
                                       std::span<const Channel> channels);

[[nodiscard]] ParamDerivs param_derivs(const ForwardTrace& trace, std::span<const InputDerivTrace> derivs,
                                       const ParamVector& params, const EnforcementSample& enf,
                                       std::span<const Channel> channels);

// Everything the assembly needs about one network at the collocation points.
struct FieldEval {
    ParamVector net;
    std::shared_ptr<const EnforcementSample> enf;
    DerivBundle bundle;
    std::optional<ParamDerivKernel> kernel;
};

[[nodiscard]] FieldEval evaluate_network(const ParamVector& net, const FeatureMap& map, const Matrix& raw,
                                         std::shared_ptr<const EnforcementSample> enf,
                                         std::span<const Channel> channels, bool with_kernel);

struct ResidualJacobian {
    Vector F;
    RowMatrix J;
};

// Residual vector of the stacked system: [equation rows...] and, when `observed`
// is given, the data rows u - u*.
[[nodiscard]] Vector assemble_residual(const ProblemSpec& spec, std::span<const FieldEval> fields,
                                       const Vector& lambda, const Vector* observed);

// Rows [eq 0; eq 1; ...], columns [net 0 | net 1 | ...].
[[nodiscard]] ResidualJacobian assemble_forward_jacobian(const ProblemSpec& spec,
                                                         std::span<const FieldEval> fields);

// Rows [PDE rows; data rows], columns [network | lambda]; block [J1 J3; J2 0].
[[nodiscard]] ResidualJacobian assemble_inverse_jacobian(const ProblemSpec& spec,
                                                         std::span<const FieldEval> fields,
                                                         const Vector& lambda, const Vector& observed);

// (2/n) J^T F.
[[nodiscard]] Vector gradient_from_jacobian(const RowMatrix& J, const Vector& F, Index n);

// [(2/n)(J1^T F1 + J2^T F2); (2/n) J3^T F1] for the inverse block layout.
[[nodiscard]] Vector gradient_from_blocks(const RowMatrix& J, const Vector& F, Index n, Index pde_rows,
                                          Index n_lambda);

// (2/n) J^T F without forming J.
[[nodiscard]] Vector assemble_gradient(const ProblemSpec& spec, std::span<const FieldEval> fields,
                                       const Vector& lambda, const Vector* observed, const Vector& F, Index n);

// Row-major dumps with a shape header.
void write_jacobian_csv(const RowMatrix& J, const std::filesystem::path& path);
void write_jacobian_binary(const RowMatrix& J, const std::filesystem::path& path);
[[nodiscard]] RowMatrix read_jacobian_binary(const std::filesystem::path& path);

} // namespace spinn
