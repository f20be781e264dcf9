#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spinn/input_diff.hpp"
#include "spinn/network.hpp"

namespace spinn {

struct ReferenceGrid;

enum class Mode { Forward, Inverse };

// Residuals of every equation and their linearization at a set of points.
struct OperatorEval {
    std::vector<Vector> residual;  // [equation] -> n
    // [equation][field][channel slot] -> n; an empty vector means identically zero
    std::vector<std::vector<std::vector<Vector>>> partial;
    // [equation][lambda index] -> n
    std::vector<std::vector<Vector>> lambda_partial;
};

using PdeOperator =
    std::function<OperatorEval(std::span<const DerivBundle> fields, const Vector& lambda, bool with_partials)>;

// A prescribed initial/boundary condition on one field. Dirichlet conditions set
// `value`; periodic ones set `partner`, the point whose channel must agree.
struct FieldCondition {
    std::string name;
    int field = 0;
    Channel channel = Channel::value();
    std::function<Matrix(Index n, std::mt19937_64& rng)> sample;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> partner;
};

struct ProblemSpec {
    std::string name;
    Mode mode = Mode::Forward;
    std::vector<std::string> coord_names;
    Vector lower;
    Vector upper;
    int time_coord = -1;
    FeatureMap features;
    std::vector<std::string> field_names;
    std::vector<Enforcement> enforcement;  // per field
    std::vector<Channel> channels;         // derivatives the operator consumes, every field
    int equations = 1;
    Vector lambda_true;
    std::vector<std::string> lambda_names;
    PdeOperator op;
    std::vector<FieldCondition> conditions;
    // Operator written with the given coefficients, e.g. "u_t - 0.000100000u_xx + ...".
    std::function<std::string(const Vector& lambda)> describe;

    [[nodiscard]] int raw_dims() const noexcept { return static_cast<int>(coord_names.size()); }
    [[nodiscard]] int fields() const noexcept { return static_cast<int>(field_names.size()); }
    [[nodiscard]] Index n_lambda() const noexcept { return mode == Mode::Inverse ? lambda_true.size() : 0; }
};

[[nodiscard]] ProblemSpec burgers_forward();
[[nodiscard]] ProblemSpec nls_forward();
[[nodiscard]] ProblemSpec allen_cahn_inverse();
[[nodiscard]] ProblemSpec bratu_inverse();

// "burgers", "nls", "allen-cahn-inverse", "bratu3d-inverse"
[[nodiscard]] ProblemSpec make_problem(std::string_view name);
[[nodiscard]] std::vector<std::string> problem_names();

// Burgers viscosity 0.01/pi.
[[nodiscard]] double burgers_viscosity() noexcept;

struct CollocationSet {
    Matrix points;    // n x d
    Vector observed;  // n, inverse mode only
    std::uint64_t seed = 0;
};

// Uniform i.i.d. points in the domain box. Inverse problems need `reference` to
// fill the observed values by multilinear interpolation.
[[nodiscard]] CollocationSet sample_collocation(const ProblemSpec& spec, Index n, std::uint64_t seed,
                                                const ReferenceGrid* reference = nullptr);

// Enforced field (and requested derivatives) of one network at raw points.
[[nodiscard]] DerivBundle evaluate_field(const ProblemSpec& spec, int field, const ParamVector& net,
                                         const Matrix& raw, std::span<const Channel> channels);

// Largest violation of the prescribed conditions over n sampled points per condition.
[[nodiscard]] double max_condition_violation(const ProblemSpec& spec, std::span<const ParamVector> nets,
                                             Index n, std::uint64_t seed);

// Identified-equation string with a fixed number of significant digits.
[[nodiscard]] std::string format_coefficient(double value, int significant);

} // namespace spinn
