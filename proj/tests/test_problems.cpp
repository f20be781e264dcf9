#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "spinn/errors.hpp"
#include "spinn/problems.hpp"
#include "spinn/reference.hpp"
#include "spinn/system.hpp"

using namespace spinn;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<DerivBundle> random_bundles(const ProblemSpec& spec, Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<DerivBundle> out;
    for (int f = 0; f < spec.fields(); ++f) {
        DerivBundle b(spec.raw_dims());
        for (Channel c : close_channels(spec.channels)) b.set(c, Vector::NullaryExpr(n, [&] { return U(rng); }));
        out.push_back(std::move(b));
    }
    return out;
}

DerivBundle constant_bundle(const ProblemSpec& spec, Index n, double u)
{
    DerivBundle b(spec.raw_dims());
    for (Channel c : close_channels(spec.channels)) b.set(c, Vector::Constant(n, c.order == 0 ? u : 0.0));
    return b;
}

} // namespace

TEST_CASE("problem catalogue")
{
    CHECK(problem_names().size() == 4);
    CHECK_THROWS_AS((void)make_problem("heat"), ConfigError);
    const auto ac = make_problem("allen-cahn-inverse");
    CHECK(ac.lambda_true == Vector::Map(std::array{-0.0001, 5.0, -5.0}.data(), 3));
    const auto br = make_problem("bratu3d-inverse");
    CHECK(br.lambda_true == Vector::Map(std::array{2.0, 1.0}.data(), 2));
    CHECK(br.features.feature_dims() == 3);
    CHECK(make_problem("burgers").n_lambda() == 0);
    CHECK(burgers_viscosity() == doctest::Approx(3.1831e-3).epsilon(1e-4));
}

TEST_CASE("operator partials match finite differences")
{
    for (const auto& name : problem_names()) {
        const auto spec = make_problem(name);
        const Index n = 40;
        const auto bundles = random_bundles(spec, n, 5);
        const Vector lambda = spec.n_lambda() ? Vector(spec.lambda_true) : Vector();
        const auto e = spec.op(bundles, lambda, true);
        // Richardson-extrapolated central differences: exact for the cubic terms.
        const auto deriv = [&](const std::function<Vector(double)>& r) {
            const double h = 1e-3;
            const Vector d1 = (r(h) - r(-h)) / (2 * h), d2 = (r(h / 2) - r(-h / 2)) / h;
            return Vector((4 * d2 - d1) / 3);
        };
        for (int eq = 0; eq < spec.equations; ++eq) {
            const auto e_ = static_cast<std::size_t>(eq);
            for (int f = 0; f < spec.fields(); ++f) {
                const auto f_ = static_cast<std::size_t>(f);
                for (Channel c : close_channels(spec.channels)) {
                    const Vector fd = deriv([&](double h) {
                        auto moved = bundles;
                        moved[f_].set(c, bundles[f_][c].array() + h);
                        return spec.op(moved, lambda, false).residual[e_];
                    });
                    const Vector& an = e.partial[static_cast<std::size_t>(eq)][static_cast<std::size_t>(f)]
                                                [static_cast<std::size_t>(channel_index(c))];
                    const Vector dense = an.size() ? an : Vector::Zero(n);
                    CHECK_MESSAGE(oracle::rel_err(dense, fd) <= 1e-7, name << " eq " << eq << " field " << f);
                }
            }
            for (Index k = 0; k < spec.n_lambda(); ++k) {
                const Vector fd = deriv([&](double h) {
                    Vector l = lambda;
                    l[k] += h;
                    return spec.op(bundles, l, false).residual[e_];
                });
                CHECK(oracle::rel_err(e.lambda_partial[static_cast<std::size_t>(eq)][static_cast<std::size_t>(k)], fd) <=
                      1e-8);
            }
        }
    }
}

TEST_CASE("operator special cases")
{
    const auto br = make_problem("bratu3d-inverse");
    const std::vector<DerivBundle> zero{constant_bundle(br, 6, 0.0)};
    CHECK((br.op(zero, br.lambda_true, false).residual[0].array() == 2.0).all());

    const auto ac = make_problem("allen-cahn-inverse");
    const auto b = random_bundles(ac, 8, 2);
    CHECK(ac.op(b, Vector::Zero(3), false).residual[0] == b[0][Channel::d(1)]);

    const auto bu = make_problem("burgers");
    const auto e = bu.op(random_bundles(bu, 3, 1), Vector(), true);
    CHECK(e.partial[0][0][static_cast<std::size_t>(channel_index(Channel::dd(0)))][0] == -burgers_viscosity());
}

TEST_CASE("NLS initial amplitude and periodic identification")
{
    const auto spec = make_problem("nls");
    const auto v0 = oracle::random_params({3, 5, 5}, 4);
    Matrix origin = Matrix::Zero(1, 2);
    CHECK(evaluate_field(spec, 0, v0, origin, {})[Channel::value()][0] == doctest::Approx(2.0).epsilon(1e-15));

    Matrix left(50, 2), right(50, 2);
    left.col(0).setConstant(-5.0);
    right.col(0).setConstant(5.0);
    left.col(1) = right.col(1) = Vector::LinSpaced(50, 0.0, kPi / 2);
    for (int f = 0; f < 2; ++f) {
        const auto p = oracle::random_params({3, 5, 5}, 10 + f, 2.0);
        const std::vector<Channel> ch{Channel::dd(0)};
        const auto a = evaluate_field(spec, f, p, left, ch), b = evaluate_field(spec, f, p, right, ch);
        CHECK((a[Channel::value()] - b[Channel::value()]).cwiseAbs().maxCoeff() <= 1e-13);
        CHECK((a[Channel::d(0)] - b[Channel::d(0)]).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CollocationSet cs;
    cs.points = Matrix::Zero(1, 2);
    CHECK(PinnSystem(spec, {3, 25, 25}, cs).num_params() == 1552);
}

TEST_CASE("enforcement exactness on sampled initial and boundary points")
{
    for (const auto& name : problem_names()) {
        const auto spec = make_problem(name);
        for (std::uint64_t s = 1; s <= 3; ++s) {
            std::vector<ParamVector> nets;
            for (int f = 0; f < spec.fields(); ++f)
                nets.push_back(oracle::random_params({spec.features.feature_dims(), 6, 6}, 31 * s + f, 1.5));
            CHECK_MESSAGE(max_condition_violation(spec, nets, 1000, s) <= 1e-13, name);
        }
    }
}

TEST_CASE("collocation sampling")
{
    const auto spec = make_problem("burgers");
    const auto a = sample_collocation(spec, 5, 1), b = sample_collocation(spec, 5, 1);
    CHECK(a.points == b.points);
    CHECK_FALSE(sample_collocation(spec, 5, 2).points == a.points);
    const auto big = sample_collocation(spec, 10000, 3);
    CHECK(big.points.rows() == 10000);
    CHECK((big.points.col(0).array() >= -1.0).all());
    CHECK((big.points.col(0).array() <= 1.0).all());
    CHECK((big.points.col(1).array() >= 0.0).all());
    CHECK((big.points.col(1).array() <= 1.0).all());
    CHECK(big.observed.size() == 0);
    CHECK_THROWS_AS((void)sample_collocation(make_problem("allen-cahn-inverse"), 10, 1), ConfigError);
    CHECK_THROWS_AS((void)sample_collocation(spec, 0, 1), ConfigError);
}

TEST_CASE("Allen-Cahn data stay in the physical range and satisfy the equation")
{
    AllenCahnReferenceSpec rs;
    rs.dx = 2e-3;
    const auto ref = allen_cahn_reference(rs);
    const auto spec = make_problem("allen-cahn-inverse");
    const auto cs = sample_collocation(spec, 2000, 1, &ref);
    CHECK(cs.observed.allFinite());
    CHECK(cs.observed.cwiseAbs().maxCoeff() <= 1.05);

    // residual of the generalized operator at lambda_true on the grid, by differences
    const Index nx = ref.axes[0].size(), nt = ref.axes[1].size();
    const double dx = ref.axes[0][1] - ref.axes[0][0], dt = ref.axes[1][1] - ref.axes[1][0];
    const auto u = [&](Index i, Index k) { return ref.values[static_cast<std::size_t>(i * nt + k)]; };
    double sum = 0.0;
    Index count = 0;
    for (Index i = 1; i + 1 < nx; ++i) {
        for (Index k = 1; k + 1 < nt; ++k) {
            const double ut = (u(i, k + 1) - u(i, k - 1)) / (2 * dt);
            const double uxx = (u(i + 1, k) - 2 * u(i, k) + u(i - 1, k)) / (dx * dx);
            const double v = u(i, k);
            sum += std::abs(ut - 1e-4 * uxx + 5 * v * v * v - 5 * v);
            ++count;
        }
    }
    CHECK(sum / static_cast<double>(count) <= 2e-3);
}

TEST_CASE("Bratu reference satisfies the discrete equation at the true coefficients")
{
    BratuReferenceSpec rs;
    rs.points = 21;
    const auto ref = bratu_reference(rs);
    const Index N = 21;
    const double h = 1.0 / (N - 1);
    const auto u = [&](Index i, Index j, Index k) { return ref.values[static_cast<std::size_t>((i * N + j) * N + k)]; };
    double worst = 0.0;
    for (Index i = 1; i + 1 < N; ++i)
        for (Index j = 1; j + 1 < N; ++j)
            for (Index k = 1; k + 1 < N; ++k) {
                const double lap = (u(i + 1, j, k) + u(i - 1, j, k) + u(i, j + 1, k) + u(i, j - 1, k) + u(i, j, k + 1) +
                                    u(i, j, k - 1) - 6 * u(i, j, k)) /
                                   (h * h);
                worst = std::max(worst, std::abs(lap + 2.0 * std::exp(u(i, j, k))));
            }
    CHECK(worst <= 1e-9);
}

TEST_CASE("Burgers reference nearly satisfies the equation at smooth points")
{
    const Vector x = Vector::LinSpaced(401, -1.0, 1.0), t = Vector::LinSpaced(101, 0.0, 1.0);
    const auto ref = burgers_reference(x, t);
    const double dx = x[1] - x[0], dt = t[1] - t[0], nu = burgers_viscosity();
    const auto u = [&](Index i, Index k) { return ref.values[static_cast<std::size_t>(i * 101 + k)]; };
    double worst = 0.0;
    for (Index i = 1; i < 400; i += 7) {
        if (std::abs(x[i]) < 0.2) continue;  // steep front near x = 0
        for (Index k = 1; k < 30; ++k) {
            const double ut = (u(i, k + 1) - u(i, k - 1)) / (2 * dt);
            const double ux = (u(i + 1, k) - u(i - 1, k)) / (2 * dx);
            const double uxx = (u(i + 1, k) - 2 * u(i, k) + u(i - 1, k)) / (dx * dx);
            worst = std::max(worst, std::abs(ut + u(i, k) * ux - nu * uxx));
        }
    }
    CHECK(worst <= 1e-2);
}

TEST_CASE("identified equation strings")
{
    const auto ac = make_problem("allen-cahn-inverse");
    Vector l(3);
    l << -0.000100003, 4.99983, -4.99984;
    const auto s = ac.describe(l);
    CHECK(s == "u_t - 0.000100003u_xx + 4.99983u^3 - 4.99984u");
    CHECK(s.find("4.99983") != std::string::npos);
    CHECK(s.find(" - 4.99984") != std::string::npos);
    const auto br = make_problem("bratu3d-inverse");
    Vector m(2);
    m << 1.99992, 1.00040;
    CHECK(br.describe(m).find("1.99992") != std::string::npos);
    CHECK(br.describe(m).find("1.00040") != std::string::npos);
}

TEST_CASE("Allen-Cahn corners satisfy both the initial and boundary conditions")
{
    const auto spec = make_problem("allen-cahn-inverse");
    Matrix corners(4, 2);
    corners << -1, 0, 1, 0, -1, 1, 1, 1;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        const auto p = oracle::random_params({2, 5, 5}, s, 2.0);
        const Vector u = evaluate_field(spec, 0, p, corners, {})[Channel::value()];
        CHECK((u.array() + 1.0).abs().maxCoeff() <= 1e-15);
    }
}
