#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spinn/network.hpp"

namespace spinn {

inline constexpr int kMaxRawDims = 4;

// A derivative of a field with respect to one raw coordinate. order 0 is the
// field value itself (coord ignored). Mixed derivatives are not represented.
struct Channel {
    int coord = -1;
    int order = 0;

    [[nodiscard]] static constexpr Channel value() noexcept { return {-1, 0}; }
    [[nodiscard]] static constexpr Channel d(int c) noexcept { return {c, 1}; }
    [[nodiscard]] static constexpr Channel dd(int c) noexcept { return {c, 2}; }

    friend constexpr bool operator==(Channel a, Channel b) noexcept
    {
        return a.order == b.order && (a.order == 0 || a.coord == b.coord);
    }
};

// Dense slot of a channel: 0 for the value, then (d, dd) per coordinate.
[[nodiscard]] constexpr int channel_index(Channel c) noexcept
{
    return c.order == 0 ? 0 : 1 + 2 * c.coord + (c.order - 1);
}
[[nodiscard]] constexpr int channel_count(int raw_dims) noexcept { return 1 + 2 * raw_dims; }
[[nodiscard]] constexpr Channel channel_at(int index) noexcept
{
    return index == 0 ? Channel::value() : Channel{(index - 1) / 2, (index - 1) % 2 + 1};
}

[[nodiscard]] std::string channel_name(Channel c, std::span<const std::string> coord_names);

// Adds the first-order channel implied by each second-order one and the value,
// then sorts by slot.
[[nodiscard]] std::vector<Channel> close_channels(std::span<const Channel> channels);

enum class FeatureKind { Identity, Periodic };

// Transformation of raw coordinates into network inputs. The periodic map sends
// coordinate k to [sin(2 pi x_k / P), cos(2 pi x_k / P)] followed by the other
// coordinates in their original order.
class FeatureMap {
public:
    [[nodiscard]] static FeatureMap identity(int raw_dims);
    [[nodiscard]] static FeatureMap periodic(int raw_dims, int coord, double period);

    [[nodiscard]] FeatureKind kind() const noexcept { return kind_; }
    [[nodiscard]] int raw_dims() const noexcept { return raw_dims_; }
    [[nodiscard]] int feature_dims() const noexcept
    {
        return kind_ == FeatureKind::Identity ? raw_dims_ : raw_dims_ + 1;
    }
    [[nodiscard]] int periodic_coord() const noexcept { return coord_; }
    [[nodiscard]] double period() const noexcept { return period_; }

    [[nodiscard]] Matrix features(const Matrix& raw) const;
    // Rows of dX/dx_coord (order 1) or d^2X/dx_coord^2 (order 2).
    [[nodiscard]] Matrix feature_rows(const Matrix& raw, int coord, int order) const;

private:
    FeatureKind kind_ = FeatureKind::Identity;
    int raw_dims_ = 0;
    int coord_ = -1;
    double period_ = 0.0;
};

// Derivatives of the layer quantities along one raw coordinate.
struct InputDerivTrace {
    int coord = 0;
    int order = 1;
    Matrix X_d, h1_d, H1_d, h2_d, H2_d;
    Vector u_d;
    // order 2 only
    Matrix X_dd, h1_dd, H1_dd, h2_dd, H2_dd;
    Vector u_dd;
};

[[nodiscard]] InputDerivTrace input_derivative(const ForwardTrace& trace, const ParamVector& params,
                                               const FeatureMap& map, const Matrix& raw, int coord,
                                               int order);

// One trace per coordinate that appears in `channels`, at the highest order requested.
[[nodiscard]] std::vector<InputDerivTrace> input_derivatives(const ForwardTrace& trace,
                                                             const ParamVector& params,
                                                             const FeatureMap& map, const Matrix& raw,
                                                             std::span<const Channel> channels);

// Value, gradient and unmixed second derivatives of a scalar field at a point.
struct Jet {
    double value = 0.0;
    std::array<double, kMaxRawDims> d{};
    std::array<double, kMaxRawDims> dd{};

    [[nodiscard]] double at(Channel c) const noexcept
    {
        return c.order == 0 ? value : (c.order == 1 ? d[c.coord] : dd[c.coord]);
    }
};

using ScalarField = std::function<Jet(std::span<const double>)>;

// u = u_tilde * p + q. `provided` lists the partials both closures fill in.
struct Enforcement {
    ScalarField p;
    ScalarField q;
    std::vector<Channel> provided;

    [[nodiscard]] static Enforcement none(int raw_dims);
};

// p and q jets at every row, one column per channel slot.
struct EnforcementSample {
    Matrix p;
    Matrix q;
};

[[nodiscard]] EnforcementSample sample_enforcement(const Enforcement& enf, const Matrix& raw,
                                                   std::span<const Channel> required);

// Enforced field u and its input derivatives at every collocation row.
class DerivBundle {
public:
    DerivBundle() = default;
    explicit DerivBundle(int raw_dims);

    [[nodiscard]] int raw_dims() const noexcept { return raw_dims_; }
    [[nodiscard]] bool has(Channel c) const;
    [[nodiscard]] const Vector& operator[](Channel c) const;
    void set(Channel c, Vector v);

private:
    int raw_dims_ = 0;
    std::vector<Vector> fields_;
    std::vector<bool> present_;
};

[[nodiscard]] DerivBundle enforce_bundle(const ForwardTrace& trace,
                                         std::span<const InputDerivTrace> derivs,
                                         const EnforcementSample& enf, std::span<const Channel> required);

[[nodiscard]] DerivBundle enforce_bundle(const ForwardTrace& trace,
                                         std::span<const InputDerivTrace> derivs, const Enforcement& enf,
                                         const Matrix& raw, std::span<const Channel> required);

} // namespace spinn
