#include "spinn/input_diff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spinn/errors.hpp"

namespace spinn {

std::string channel_name(Channel c, std::span<const std::string> coord_names)
{
    if (c.order == 0) return "u";
    const std::string& n = coord_names[static_cast<std::size_t>(c.coord)];
    return c.order == 1 ? "u_" + n : "u_" + n + n;
}

std::vector<Channel> close_channels(std::span<const Channel> channels)
{
    std::vector<int> slots{0};
    for (Channel c : channels) {
        slots.push_back(channel_index(c));
        if (c.order == 2) slots.push_back(channel_index(Channel::d(c.coord)));
    }
    std::sort(slots.begin(), slots.end());
    slots.erase(std::unique(slots.begin(), slots.end()), slots.end());
    std::vector<Channel> out;
    for (int s : slots) out.push_back(channel_at(s));
    return out;
}

FeatureMap FeatureMap::identity(int raw_dims)
{
    if (raw_dims < 1 || raw_dims > kMaxRawDims) throw ConfigError("raw dimension out of range");
    FeatureMap m;
    m.raw_dims_ = raw_dims;
    return m;
}

FeatureMap FeatureMap::periodic(int raw_dims, int coord, double period)
{
    FeatureMap m = identity(raw_dims);
    if (coord < 0 || coord >= raw_dims) throw ConfigError("periodic coordinate out of range");
    if (!(period > 0.0)) throw ConfigError("period must be positive");
    m.kind_ = FeatureKind::Periodic;
    m.coord_ = coord;
    m.period_ = period;
    return m;
}

Matrix FeatureMap::features(const Matrix& raw) const
{
    if (raw.cols() != raw_dims_) throw ShapeError("raw points have the wrong number of coordinates");
    if (kind_ == FeatureKind::Identity) return raw;

    const double w = 2.0 * std::numbers::pi / period_;
    Matrix X(raw.rows(), feature_dims());
    X.col(0) = (w * raw.col(coord_)).array().sin().matrix();
    X.col(1) = (w * raw.col(coord_)).array().cos().matrix();
    Index col = 2;
    for (int c = 0; c < raw_dims_; ++c) {
        if (c != coord_) X.col(col++) = raw.col(c);
    }
    return X;
}

Matrix FeatureMap::feature_rows(const Matrix& raw, int coord, int order) const
{
    if (order < 1 || order > 2) {
        throw UnsupportedOrder("feature derivatives are available for order 1 and 2, requested " +
                               std::to_string(order));
    }
    if (coord < 0 || coord >= raw_dims_) throw ConfigError("coordinate out of range");
    if (raw.cols() != raw_dims_) throw ShapeError("raw points have the wrong number of coordinates");

    Matrix Xd = Matrix::Zero(raw.rows(), feature_dims());
    if (kind_ == FeatureKind::Identity) {
        if (order == 1) Xd.col(coord).setOnes();
        return Xd;
    }
    if (coord == coord_) {
        const double w = 2.0 * std::numbers::pi / period_;
        const auto s = (w * raw.col(coord_)).array().sin();
        const auto c = (w * raw.col(coord_)).array().cos();
        if (order == 1) {
            Xd.col(0) = (w * c).matrix();
            Xd.col(1) = (-w * s).matrix();
        } else {
            Xd.col(0) = (-w * w * s).matrix();
            Xd.col(1) = (-w * w * c).matrix();
        }
        return Xd;
    }
    if (order == 1) {
        const int col = 2 + (coord < coord_ ? coord : coord - 1);
        Xd.col(col).setOnes();
    }
    return Xd;
}

namespace {

void check_trace(const ForwardTrace& trace, const ParamVector& params, const FeatureMap& map, const Matrix& raw)
{
    const auto& arch = params.arch();
    if (trace.X.rows() != raw.rows() || trace.h1.cols() != arch.hidden1 || trace.h2.cols() != arch.hidden2 ||
        trace.X.cols() != map.feature_dims()) {
        throw ConsistencyError("forward trace does not match the parameters or points");
    }
    if (map.features(raw) != trace.X) {
        throw ConsistencyError("forward trace was built from different input points");
    }
}

InputDerivTrace derive(const ActivationEval& a1, const ActivationEval& a2, const ParamVector& params,
                       const FeatureMap& map, const Matrix& raw, int coord, int order)
{
    InputDerivTrace d;
    d.coord = coord;
    d.order = order;
    d.X_d = map.feature_rows(raw, coord, 1);
    d.h1_d = d.X_d * params.w1();
    d.H1_d = a1.s1.cwiseProduct(d.h1_d);
    d.h2_d = d.H1_d * params.w2();
    d.H2_d = a2.s1.cwiseProduct(d.h2_d);
    d.u_d = d.H2_d * params.w3();
    if (order == 2) {
        d.X_dd = map.feature_rows(raw, coord, 2);
        d.h1_dd = d.X_dd * params.w1();
        d.H1_dd = (a1.s2.array() * d.h1_d.array().square() + a1.s1.array() * d.h1_dd.array()).matrix();
        d.h2_dd = d.H1_dd * params.w2();
        d.H2_dd = (a2.s2.array() * d.h2_d.array().square() + a2.s1.array() * d.h2_dd.array()).matrix();
        d.u_dd = d.H2_dd * params.w3();
    }
    return d;
}

void check_order(int order)
{
    if (order < 1 || order > 2) {
        throw UnsupportedOrder("input derivatives are available for order 1 and 2, requested " +
                               std::to_string(order));
    }
}

} // namespace

InputDerivTrace input_derivative(const ForwardTrace& trace, const ParamVector& params,
                                 const FeatureMap& map, const Matrix& raw, int coord, int order)
{
    check_order(order);
    check_trace(trace, params, map, raw);
    return derive(activation_from_output(trace.H1, order), activation_from_output(trace.H2, order), params, map,
                  raw, coord, order);
}

std::vector<InputDerivTrace> input_derivatives(const ForwardTrace& trace, const ParamVector& params,
                                               const FeatureMap& map, const Matrix& raw,
                                               std::span<const Channel> channels)
{
    std::array<int, kMaxRawDims> max_order{};
    int top = 0;
    for (Channel c : channels) {
        if (c.order == 0) continue;
        check_order(c.order);
        if (c.coord < 0 || c.coord >= map.raw_dims()) throw ConfigError("coordinate out of range");
        auto& o = max_order[static_cast<std::size_t>(c.coord)];
        o = std::max(o, c.order);
        top = std::max(top, c.order);
    }
    std::vector<InputDerivTrace> out;
    if (top == 0) return out;
    check_trace(trace, params, map, raw);
    const auto a1 = activation_from_output(trace.H1, top);
    const auto a2 = activation_from_output(trace.H2, top);
    for (int c = 0; c < map.raw_dims(); ++c) {
        const int o = max_order[static_cast<std::size_t>(c)];
        if (o > 0) out.push_back(derive(a1, a2, params, map, raw, c, o));
    }
    return out;
}

Enforcement Enforcement::none(int raw_dims)
{
    Enforcement e;
    e.p = [](std::span<const double>) { return Jet{1.0, {}, {}}; };
    e.q = [](std::span<const double>) { return Jet{}; };
    for (int c = 0; c < raw_dims; ++c) {
        e.provided.push_back(Channel::d(c));
        e.provided.push_back(Channel::dd(c));
    }
    return e;
}

EnforcementSample sample_enforcement(const Enforcement& enf, const Matrix& raw,
                                     std::span<const Channel> required)
{
    std::string missing;
    for (Channel c : required) {
        if (c.order == 0) continue;
        if (std::find(enf.provided.begin(), enf.provided.end(), c) == enf.provided.end()) {
            missing += (missing.empty() ? "" : ", ") + std::string(c.order == 1 ? "d/dx" : "d2/dx") +
                       std::to_string(c.coord) + (c.order == 2 ? "^2" : "");
        }
    }
    if (!missing.empty()) throw ConfigError("enforcement functions lack partials: " + missing);
    if (!enf.p || !enf.q) throw ConfigError("enforcement functions p and q must both be set");

    const int dims = static_cast<int>(raw.cols());
    const int slots = channel_count(dims);
    EnforcementSample s{Matrix::Zero(raw.rows(), slots), Matrix::Zero(raw.rows(), slots)};
    std::array<double, kMaxRawDims> pt{};
    for (Index i = 0; i < raw.rows(); ++i) {
        for (int c = 0; c < dims; ++c) pt[static_cast<std::size_t>(c)] = raw(i, c);
        const std::span<const double> x(pt.data(), static_cast<std::size_t>(dims));
        const Jet p = enf.p(x);
        const Jet q = enf.q(x);
        for (int k = 0; k < slots; ++k) {
            s.p(i, k) = p.at(channel_at(k));
            s.q(i, k) = q.at(channel_at(k));
        }
    }
    return s;
}

DerivBundle::DerivBundle(int raw_dims)
    : raw_dims_(raw_dims),
      fields_(static_cast<std::size_t>(channel_count(raw_dims))),
      present_(static_cast<std::size_t>(channel_count(raw_dims)), false)
{
}

bool DerivBundle::has(Channel c) const
{
    const auto k = static_cast<std::size_t>(channel_index(c));
    return k < present_.size() && present_[k];
}

const Vector& DerivBundle::operator[](Channel c) const
{
    if (!has(c)) throw ConfigError("derivative bundle lacks channel slot " + std::to_string(channel_index(c)));
    return fields_[static_cast<std::size_t>(channel_index(c))];
}

void DerivBundle::set(Channel c, Vector v)
{
    const auto k = static_cast<std::size_t>(channel_index(c));
    fields_.at(k) = std::move(v);
    present_.at(k) = true;
}

namespace {

const InputDerivTrace* find_trace(std::span<const InputDerivTrace> derivs, int coord, int order)
{
    for (const auto& d : derivs) {
        if (d.coord == coord && d.order >= order) return &d;
    }
    return nullptr;
}

} // namespace

DerivBundle enforce_bundle(const ForwardTrace& trace, std::span<const InputDerivTrace> derivs,
                           const EnforcementSample& enf, std::span<const Channel> required)
{
    const int dims = static_cast<int>(enf.p.cols() - 1) / 2;
    const auto col = [](Channel c) { return static_cast<Index>(channel_index(c)); };
    const auto p = enf.p.col(0).array();
    const Vector& ut = trace.u_tilde;

    DerivBundle b(dims);
    b.set(Channel::value(), (ut.array() * p + enf.q.col(0).array()).matrix());

    for (Channel c : required) {
        if (c.order == 0) continue;
        const auto* d = find_trace(derivs, c.coord, c.order);
        if (d == nullptr) {
            throw ConfigError("no order-" + std::to_string(c.order) + " input derivative for coordinate " +
                              std::to_string(c.coord));
        }
        const Channel first = Channel::d(c.coord);
        if (!b.has(first)) {
            b.set(first, (d->u_d.array() * p + ut.array() * enf.p.col(col(first)).array() +
                          enf.q.col(col(first)).array())
                             .matrix());
        }
        if (c.order == 2) {
            b.set(c, (d->u_dd.array() * p + 2.0 * d->u_d.array() * enf.p.col(col(first)).array() +
                      ut.array() * enf.p.col(col(c)).array() + enf.q.col(col(c)).array())
                         .matrix());
        }
    }
    return b;
}

DerivBundle enforce_bundle(const ForwardTrace& trace, std::span<const InputDerivTrace> derivs,
                           const Enforcement& enf, const Matrix& raw, std::span<const Channel> required)
{
    const auto closed = close_channels(required);
    return enforce_bundle(trace, derivs, sample_enforcement(enf, raw, closed), closed);
}

} // namespace spinn
