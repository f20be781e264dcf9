#include "spinn/problems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "spinn/errors.hpp"

namespace spinn {

namespace {

using std::numbers::pi;

OperatorEval empty_eval(int equations, int fields, int dims, Index n_lambda)
{
    OperatorEval e;
    e.residual.resize(static_cast<std::size_t>(equations));
    e.partial.assign(static_cast<std::size_t>(equations),
                     std::vector<std::vector<Vector>>(static_cast<std::size_t>(fields),
                                                      std::vector<Vector>(static_cast<std::size_t>(channel_count(dims)))));
    e.lambda_partial.assign(static_cast<std::size_t>(equations),
                            std::vector<Vector>(static_cast<std::size_t>(n_lambda)));
    return e;
}

Vector& slot(OperatorEval& e, int eq, int field, Channel c)
{
    return e.partial[static_cast<std::size_t>(eq)][static_cast<std::size_t>(field)]
                    [static_cast<std::size_t>(channel_index(c))];
}

Vector constant(Index n, double v) { return Vector::Constant(n, v); }

// Points with coordinate `coord` pinned to `value`, the others uniform in the box.
std::function<Matrix(Index, std::mt19937_64&)> face_sampler(Vector lower, Vector upper, int coord, double value)
{
    return [lower = std::move(lower), upper = std::move(upper), coord, value](Index n, std::mt19937_64& rng) {
        Matrix pts(n, lower.size());
        for (Index i = 0; i < n; ++i) {
            for (Index c = 0; c < lower.size(); ++c) {
                std::uniform_real_distribution<double> d(lower[c], upper[c]);
                pts(i, c) = (c == coord) ? value : d(rng);
            }
        }
        return pts;
    };
}

// (1 - x^2) t with x = coord 0, t = coord 1.
Jet space_time_multiplier(std::span<const double> r)
{
    const double x = r[0], t = r[1];
    Jet p;
    p.value = (1.0 - x * x) * t;
    p.d[0] = -2.0 * x * t;
    p.dd[0] = -2.0 * t;
    p.d[1] = 1.0 - x * x;
    p.dd[1] = 0.0;
    return p;
}

std::vector<Channel> all_unmixed(int dims)
{
    std::vector<Channel> v;
    for (int c = 0; c < dims; ++c) {
        v.push_back(Channel::d(c));
        v.push_back(Channel::dd(c));
    }
    return v;
}

std::string signed_term(double v, int digits, const std::string& tail)
{
    return (v < 0 ? " - " : " + ") + format_coefficient(std::abs(v), digits) + tail;
}

} // namespace

std::string format_coefficient(double value, int significant)
{
    if (value == 0.0) return "0";
    const int mag = static_cast<int>(std::floor(std::log10(std::abs(value))));
    const int decimals = std::max(0, significant - 1 - mag);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

double burgers_viscosity() noexcept { return 0.01 / pi; }

ProblemSpec burgers_forward()
{
    ProblemSpec s;
    s.name = "burgers";
    s.mode = Mode::Forward;
    s.coord_names = {"x", "t"};
    s.lower = Eigen::Vector2d(-1.0, 0.0);
    s.upper = Eigen::Vector2d(1.0, 1.0);
    s.time_coord = 1;
    s.features = FeatureMap::identity(2);
    s.field_names = {"u"};

    Enforcement enf;
    enf.p = space_time_multiplier;
    enf.q = [](std::span<const double> r) {
        const double x = r[0];
        Jet q;
        q.value = -std::sin(pi * x);
        q.d[0] = -pi * std::cos(pi * x);
        q.dd[0] = pi * pi * std::sin(pi * x);
        return q;
    };
    enf.provided = all_unmixed(2);
    s.enforcement = {enf};
    s.channels = {Channel::d(1), Channel::d(0), Channel::dd(0)};

    const double nu = burgers_viscosity();
    s.op = [nu](std::span<const DerivBundle> f, const Vector&, bool with_partials) {
        const DerivBundle& b = f[0];
        const Vector& u = b[Channel::value()];
        const Vector& ux = b[Channel::d(0)];
        OperatorEval e = empty_eval(1, 1, 2, 0);
        e.residual[0] = b[Channel::d(1)] + u.cwiseProduct(ux) - nu * b[Channel::dd(0)];
        if (with_partials) {
            slot(e, 0, 0, Channel::value()) = ux;
            slot(e, 0, 0, Channel::d(1)) = constant(u.size(), 1.0);
            slot(e, 0, 0, Channel::d(0)) = u;
            slot(e, 0, 0, Channel::dd(0)) = constant(u.size(), -nu);
        }
        return e;
    };
    s.describe = [nu](const Vector&) { return "u_t + u u_x" + signed_term(-nu, 6, "u_xx"); };

    s.conditions.push_back({"initial u(x,0) = -sin(pi x)", 0, Channel::value(),
                            face_sampler(s.lower, s.upper, 1, 0.0),
                            [](std::span<const double> r) { return -std::sin(pi * r[0]); }, {}});
    s.conditions.push_back({"boundary u(-1,t) = 0", 0, Channel::value(), face_sampler(s.lower, s.upper, 0, -1.0),
                            [](std::span<const double>) { return 0.0; }, {}});
    s.conditions.push_back({"boundary u(1,t) = 0", 0, Channel::value(), face_sampler(s.lower, s.upper, 0, 1.0),
                            [](std::span<const double>) { return 0.0; }, {}});
    return s;
}

ProblemSpec nls_forward()
{
    ProblemSpec s;
    s.name = "nls";
    s.mode = Mode::Forward;
    s.coord_names = {"x", "t"};
    s.lower = Eigen::Vector2d(-5.0, 0.0);
    s.upper = Eigen::Vector2d(5.0, pi / 2.0);
    s.time_coord = 1;
    s.features = FeatureMap::periodic(2, 0, 10.0);
    s.field_names = {"v", "w"};

    const ScalarField p_time = [](std::span<const double> r) {
        Jet p;
        p.value = r[1];
        p.d[1] = 1.0;
        return p;
    };
    // 2 sech(x) cos^2(pi x / 10)
    const ScalarField q_v = [](std::span<const double> r) {
        const double x = r[0], a = pi / 10.0;
        const double sech = 1.0 / std::cosh(x), th = std::tanh(x);
        const double s0 = sech, s1 = -sech * th, s2 = sech * (th * th - sech * sech);
        const double c2 = std::cos(a * x) * std::cos(a * x);
        const double c2_1 = -a * std::sin(2.0 * a * x);
        const double c2_2 = -2.0 * a * a * std::cos(2.0 * a * x);
        Jet q;
        q.value = 2.0 * s0 * c2;
        q.d[0] = 2.0 * (s1 * c2 + s0 * c2_1);
        q.dd[0] = 2.0 * (s2 * c2 + 2.0 * s1 * c2_1 + s0 * c2_2);
        return q;
    };
    const ScalarField zero = [](std::span<const double>) { return Jet{}; };
    s.enforcement = {Enforcement{p_time, q_v, all_unmixed(2)}, Enforcement{p_time, zero, all_unmixed(2)}};
    s.channels = {Channel::d(1), Channel::dd(0)};
    s.equations = 2;

    s.op = [](std::span<const DerivBundle> f, const Vector&, bool with_partials) {
        const Vector& v = f[0][Channel::value()];
        const Vector& w = f[1][Channel::value()];
        const Vector mod2 = v.cwiseAbs2() + w.cwiseAbs2();
        OperatorEval e = empty_eval(2, 2, 2, 0);
        e.residual[0] = -f[1][Channel::d(1)] + 0.5 * f[0][Channel::dd(0)] + mod2.cwiseProduct(v);
        e.residual[1] = f[0][Channel::d(1)] + 0.5 * f[1][Channel::dd(0)] + mod2.cwiseProduct(w);
        if (with_partials) {
            const Index n = v.size();
            const Vector vw2 = 2.0 * v.cwiseProduct(w);
            slot(e, 0, 0, Channel::value()) = 3.0 * v.cwiseAbs2() + w.cwiseAbs2();
            slot(e, 0, 0, Channel::dd(0)) = constant(n, 0.5);
            slot(e, 0, 1, Channel::value()) = vw2;
            slot(e, 0, 1, Channel::d(1)) = constant(n, -1.0);
            slot(e, 1, 0, Channel::value()) = vw2;
            slot(e, 1, 0, Channel::d(1)) = constant(n, 1.0);
            slot(e, 1, 1, Channel::value()) = v.cwiseAbs2() + 3.0 * w.cwiseAbs2();
            slot(e, 1, 1, Channel::dd(0)) = constant(n, 0.5);
        }
        return e;
    };
    s.describe = [](const Vector&) { return std::string("i h_t + 0.5 h_xx + |h|^2 h"); };

    const auto initial = face_sampler(s.lower, s.upper, 1, 0.0);
    s.conditions.push_back({"initial v(x,0) = 2 sech(x) cos^2(pi x/10)", 0, Channel::value(), initial,
                            [q_v](std::span<const double> r) { return q_v(r).value; }, {}});
    s.conditions.push_back({"initial w(x,0) = 0", 1, Channel::value(), initial,
                            [](std::span<const double>) { return 0.0; }, {}});
    const auto left = face_sampler(s.lower, s.upper, 0, -5.0);
    const auto mirror = [](std::span<const double> r, std::span<double> out) {
        out[0] = r[0] + 10.0;
        out[1] = r[1];
    };
    for (int field = 0; field < 2; ++field) {
        const std::string n = field == 0 ? "v" : "w";
        s.conditions.push_back({"periodic " + n + "(-5,t) = " + n + "(5,t)", field, Channel::value(), left, {}, mirror});
        s.conditions.push_back({"periodic " + n + "_x(-5,t) = " + n + "_x(5,t)", field, Channel::d(0), left, {}, mirror});
    }
    return s;
}

ProblemSpec allen_cahn_inverse()
{
    ProblemSpec s;
    s.name = "allen-cahn-inverse";
    s.mode = Mode::Inverse;
    s.coord_names = {"x", "t"};
    s.lower = Eigen::Vector2d(-1.0, 0.0);
    s.upper = Eigen::Vector2d(1.0, 1.0);
    s.time_coord = 1;
    s.features = FeatureMap::identity(2);
    s.field_names = {"u"};

    Enforcement enf;
    enf.p = space_time_multiplier;
    // x^2 cos(pi x)
    enf.q = [](std::span<const double> r) {
        const double x = r[0], c = std::cos(pi * x), sn = std::sin(pi * x);
        Jet q;
        q.value = x * x * c;
        q.d[0] = 2.0 * x * c - pi * x * x * sn;
        q.dd[0] = 2.0 * c - 4.0 * pi * x * sn - pi * pi * x * x * c;
        return q;
    };
    enf.provided = all_unmixed(2);
    s.enforcement = {enf};
    s.channels = {Channel::d(1), Channel::dd(0)};
    s.lambda_true = Eigen::Vector3d(-0.0001, 5.0, -5.0);
    s.lambda_names = {"lambda1", "lambda2", "lambda3"};

    s.op = [](std::span<const DerivBundle> f, const Vector& lam, bool with_partials) {
        const DerivBundle& b = f[0];
        const Vector& u = b[Channel::value()];
        const Vector& uxx = b[Channel::dd(0)];
        const Vector u3 = u.array().cube().matrix();
        OperatorEval e = empty_eval(1, 1, 2, 3);
        e.residual[0] = b[Channel::d(1)] + lam[0] * uxx + lam[1] * u3 + lam[2] * u;
        if (with_partials) {
            slot(e, 0, 0, Channel::value()) = (3.0 * lam[1] * u.array().square() + lam[2]).matrix();
            slot(e, 0, 0, Channel::d(1)) = constant(u.size(), 1.0);
            slot(e, 0, 0, Channel::dd(0)) = constant(u.size(), lam[0]);
            e.lambda_partial[0] = {uxx, u3, u};
        }
        return e;
    };
    s.describe = [](const Vector& lam) {
        return "u_t" + signed_term(lam[0], 6, "u_xx") + signed_term(lam[1], 6, "u^3") + signed_term(lam[2], 6, "u");
    };

    const auto ic = [](std::span<const double> r) { return r[0] * r[0] * std::cos(pi * r[0]); };
    s.conditions.push_back({"initial u(x,0) = x^2 cos(pi x)", 0, Channel::value(),
                            face_sampler(s.lower, s.upper, 1, 0.0), ic, {}});
    s.conditions.push_back({"boundary u(-1,t) = -1", 0, Channel::value(), face_sampler(s.lower, s.upper, 0, -1.0),
                            [](std::span<const double>) { return -1.0; }, {}});
    s.conditions.push_back({"boundary u(1,t) = -1", 0, Channel::value(), face_sampler(s.lower, s.upper, 0, 1.0),
                            [](std::span<const double>) { return -1.0; }, {}});
    s.conditions.push_back({"corners u(+-1,0) = -1", 0, Channel::value(),
                            [](Index n, std::mt19937_64&) {
                                Matrix pts = Matrix::Zero(n, 2);
                                for (Index i = 0; i < n; ++i) pts(i, 0) = (i % 2 == 0) ? -1.0 : 1.0;
                                return pts;
                            },
                            [](std::span<const double>) { return -1.0; }, {}});
    return s;
}

ProblemSpec bratu_inverse()
{
    ProblemSpec s;
    s.name = "bratu3d-inverse";
    s.mode = Mode::Inverse;
    s.coord_names = {"x", "y", "z"};
    s.lower = Eigen::Vector3d::Zero();
    s.upper = Eigen::Vector3d::Ones();
    s.time_coord = -1;
    s.features = FeatureMap::identity(3);
    s.field_names = {"u"};

    Enforcement enf;
    // (x - x^2)(y - y^2)(z - z^2)
    enf.p = [](std::span<const double> r) {
        std::array<double, 3> f{}, f1{};
        for (int c = 0; c < 3; ++c) {
            f[c] = r[c] - r[c] * r[c];
            f1[c] = 1.0 - 2.0 * r[c];
        }
        Jet p;
        p.value = f[0] * f[1] * f[2];
        for (int c = 0; c < 3; ++c) {
            const double rest = f[(c + 1) % 3] * f[(c + 2) % 3];
            p.d[c] = f1[c] * rest;
            p.dd[c] = -2.0 * rest;
        }
        return p;
    };
    enf.q = [](std::span<const double>) { return Jet{}; };
    enf.provided = all_unmixed(3);
    s.enforcement = {enf};
    s.channels = {Channel::dd(0), Channel::dd(1), Channel::dd(2)};
    s.lambda_true = Eigen::Vector2d(2.0, 1.0);
    s.lambda_names = {"lambda1", "lambda2"};

    s.op = [](std::span<const DerivBundle> f, const Vector& lam, bool with_partials) {
        const DerivBundle& b = f[0];
        const Vector& u = b[Channel::value()];
        const Vector ex = (lam[1] * u).array().exp().matrix();
        OperatorEval e = empty_eval(1, 1, 3, 2);
        e.residual[0] = b[Channel::dd(0)] + b[Channel::dd(1)] + b[Channel::dd(2)] + lam[0] * ex;
        if (with_partials) {
            slot(e, 0, 0, Channel::value()) = lam[0] * lam[1] * ex;
            for (int c = 0; c < 3; ++c) slot(e, 0, 0, Channel::dd(c)) = constant(u.size(), 1.0);
            e.lambda_partial[0] = {ex, lam[0] * u.cwiseProduct(ex)};
        }
        return e;
    };
    s.describe = [](const Vector& lam) {
        return "Δu" + signed_term(lam[0], 6, " e^{") + format_coefficient(lam[1], 6) + " u}";
    };

    const auto zero = [](std::span<const double>) { return 0.0; };
    for (int c = 0; c < 3; ++c) {
        for (double side : {0.0, 1.0}) {
            s.conditions.push_back({"boundary " + s.coord_names[static_cast<std::size_t>(c)] + " = " +
                                        std::to_string(static_cast<int>(side)),
                                    0, Channel::value(), face_sampler(s.lower, s.upper, c, side), zero, {}});
        }
    }
    return s;
}

ProblemSpec make_problem(std::string_view name)
{
    if (name == "burgers") return burgers_forward();
    if (name == "nls") return nls_forward();
    if (name == "allen-cahn-inverse") return allen_cahn_inverse();
    if (name == "bratu3d-inverse") return bratu_inverse();
    throw ConfigError("unknown problem '" + std::string(name) + "'");
}

std::vector<std::string> problem_names() { return {"burgers", "nls", "allen-cahn-inverse", "bratu3d-inverse"}; }

DerivBundle evaluate_field(const ProblemSpec& spec, int field, const ParamVector& net, const Matrix& raw,
                           std::span<const Channel> channels)
{
    const auto closed = close_channels(channels);
    const Matrix X = spec.features.features(raw);
    const ForwardTrace trace = forward_trace(net, X);
    const auto derivs = input_derivatives(trace, net, spec.features, raw, closed);
    return enforce_bundle(trace, derivs, spec.enforcement.at(static_cast<std::size_t>(field)), raw, closed);
}

double max_condition_violation(const ProblemSpec& spec, std::span<const ParamVector> nets, Index n,
                               std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    const auto d = static_cast<std::size_t>(spec.raw_dims());
    for (const auto& cond : spec.conditions) {
        const Matrix pts = cond.sample(n, rng);
        const std::array<Channel, 1> ch{cond.channel};
        const ParamVector& net = nets[static_cast<std::size_t>(cond.field)];
        const Vector got = evaluate_field(spec, cond.field, net, pts, ch)[cond.channel];
        if (cond.partner) {
            Matrix other(pts.rows(), pts.cols());
            std::vector<double> in(d), out(d);
            for (Index i = 0; i < pts.rows(); ++i) {
                for (std::size_t c = 0; c < d; ++c) in[c] = pts(i, static_cast<Index>(c));
                cond.partner(in, out);
                for (std::size_t c = 0; c < d; ++c) other(i, static_cast<Index>(c)) = out[c];
            }
            const Vector ref = evaluate_field(spec, cond.field, net, other, ch)[cond.channel];
            worst = std::max(worst, (got - ref).cwiseAbs().maxCoeff());
        } else {
            std::vector<double> in(d);
            for (Index i = 0; i < pts.rows(); ++i) {
                for (std::size_t c = 0; c < d; ++c) in[c] = pts(i, static_cast<Index>(c));
                worst = std::max(worst, std::abs(got[i] - cond.value(in)));
            }
        }
    }
    return worst;
}

} // namespace spinn
