#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace spinn {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Shallow network NN(a, m1, m2, 1).
struct Architecture {
    Index inputs = 0;
    Index hidden1 = 0;
    Index hidden2 = 0;

    // a*m1 + m1 + m1*m2 + m2 + m2 + 1
    [[nodiscard]] Index param_count() const noexcept
    {
        return inputs * hidden1 + hidden1 + hidden1 * hidden2 + hidden2 + hidden2 + 1;
    }
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

enum class Block { W1, B1, W2, B2, W3, B3, Lambda };

[[nodiscard]] std::string_view block_name(Block b) noexcept;

struct BlockRange {
    Index offset = 0;
    Index size = 0;
};

// Location of a block inside the flat vector [W1 | B1 | W2 | B2 | W3 | B3 | lambda].
// Weight matrices are stored row-major.
[[nodiscard]] BlockRange block_range(const Architecture& arch, Block b, Index n_lambda = 0);

class ParamVector {
public:
    using ConstMatMap = Eigen::Map<const RowMatrix>;
    using MatMap = Eigen::Map<RowMatrix>;
    using ConstVecMap = Eigen::Map<const Vector>;
    using VecMap = Eigen::Map<Vector>;

    ParamVector() = default;
    // All-zero parameters.
    explicit ParamVector(const Architecture& arch, Index n_lambda = 0);

    [[nodiscard]] static ParamVector unflatten(const Architecture& arch, Index n_lambda,
                                               const Eigen::Ref<const Vector>& flat);
    [[nodiscard]] const Vector& flatten() const noexcept { return values_; }
    [[nodiscard]] Vector& values() noexcept { return values_; }

    [[nodiscard]] const Architecture& arch() const noexcept { return arch_; }
    [[nodiscard]] Index n_lambda() const noexcept { return n_lambda_; }
    [[nodiscard]] Index size() const noexcept { return values_.size(); }
    [[nodiscard]] Index network_size() const noexcept { return arch_.param_count(); }

    [[nodiscard]] ConstMatMap w1() const { return mat(Block::W1, arch_.inputs, arch_.hidden1); }
    [[nodiscard]] ConstVecMap b1() const { return vec(Block::B1); }
    [[nodiscard]] ConstMatMap w2() const { return mat(Block::W2, arch_.hidden1, arch_.hidden2); }
    [[nodiscard]] ConstVecMap b2() const { return vec(Block::B2); }
    [[nodiscard]] ConstVecMap w3() const { return vec(Block::W3); }
    [[nodiscard]] double b3() const { return values_[block_range(arch_, Block::B3).offset]; }
    [[nodiscard]] ConstVecMap lambda() const { return vec(Block::Lambda); }

    [[nodiscard]] MatMap w1() { return mat(Block::W1, arch_.inputs, arch_.hidden1); }
    [[nodiscard]] VecMap b1() { return vec(Block::B1); }
    [[nodiscard]] MatMap w2() { return mat(Block::W2, arch_.hidden1, arch_.hidden2); }
    [[nodiscard]] VecMap b2() { return vec(Block::B2); }
    [[nodiscard]] VecMap w3() { return vec(Block::W3); }
    [[nodiscard]] double& b3() { return values_[block_range(arch_, Block::B3).offset]; }
    [[nodiscard]] VecMap lambda() { return vec(Block::Lambda); }

    friend bool operator==(const ParamVector& a, const ParamVector& b)
    {
        return a.arch_ == b.arch_ && a.n_lambda_ == b.n_lambda_ && a.values_ == b.values_;
    }

private:
    ConstMatMap mat(Block b, Index rows, Index cols) const
    {
        return ConstMatMap(values_.data() + block_range(arch_, b, n_lambda_).offset, rows, cols);
    }
    MatMap mat(Block b, Index rows, Index cols)
    {
        return MatMap(values_.data() + block_range(arch_, b, n_lambda_).offset, rows, cols);
    }
    ConstVecMap vec(Block b) const
    {
        const auto r = block_range(arch_, b, n_lambda_);
        return ConstVecMap(values_.data() + r.offset, r.size);
    }
    VecMap vec(Block b)
    {
        const auto r = block_range(arch_, b, n_lambda_);
        return VecMap(values_.data() + r.offset, r.size);
    }

    Architecture arch_{};
    Index n_lambda_ = 0;
    Vector values_;
};

// Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out)) per block), zero
// biases, lambda block set to lambda0. Deterministic in (arch, seed).
[[nodiscard]] ParamVector init_params(const Architecture& arch, Index n_lambda,
                                      const Vector& lambda0, std::uint64_t seed);

// tanh and its derivatives up to third order, elementwise.
struct ActivationEval {
    int order = 0;
    Matrix s0, s1, s2, s3;
};

[[nodiscard]] ActivationEval activation_eval(const Matrix& h, int max_order);
// Same, starting from s0 = tanh(h) already at hand.
[[nodiscard]] ActivationEval activation_from_output(const Matrix& s0, int max_order);

// Layer quantities for a batch of n feature rows.
struct ForwardTrace {
    Matrix X;       // n x a
    Matrix h1, H1;  // n x m1
    Matrix h2, H2;  // n x m2
    Vector u_tilde; // n
};

[[nodiscard]] ForwardTrace forward_trace(const ParamVector& params, const Matrix& X);

} // namespace spinn
