#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fft.hpp"
#include "spinn/errors.hpp"
#include "spinn/problems.hpp"
#include "spinn/reference.hpp"

namespace spinn {

namespace {

using std::numbers::pi;

// Gauss-Hermite rule for weight exp(-z^2), weights kept as logarithms so the
// far nodes stay usable when the integrand grows like exp(+100).
struct HermiteRule {
    std::vector<double> nodes;
    std::vector<double> log_weights;
};

// log|phi_{n-1}(z)| and phi_n(z)/phi_{n-1}(z) for the normalized Hermite
// polynomials phi_k = H_k / sqrt(2^k k! sqrt(pi)).
void hermite_tail(int n, double z, double& log_prev, double& ratio)
{
    double p0 = std::pow(pi, -0.25), p1 = 0.0, log_scale = 0.0;
    // p0 = phi_k, p1 = phi_{k-1}
    for (int k = 0; k < n; ++k) {
        const double next = std::sqrt(2.0 / (k + 1)) * z * p0 - std::sqrt(static_cast<double>(k) / (k + 1)) * p1;
        p1 = p0;
        p0 = next;
        const double mag = std::abs(p0);
        if (mag > 1e100) {
            p0 /= mag;
            p1 /= mag;
            log_scale += std::log(mag);
        }
    }
    log_prev = std::log(std::abs(p1)) + log_scale;
    ratio = p0 / p1;
}

HermiteRule make_rule(int n)
{
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

    HermiteRule r;
    for (int i = 0; i < n; ++i) {
        double z = es.eigenvalues()[i];
        double log_prev = 0.0, ratio = 0.0;
        for (int it = 0; it < 3; ++it) {
            hermite_tail(n, z, log_prev, ratio);
            z -= ratio / std::sqrt(2.0 * n);
        }
        hermite_tail(n, z, log_prev, ratio);
        r.nodes.push_back(z);
        r.log_weights.push_back(-std::log(static_cast<double>(n)) - 2.0 * log_prev);
    }
    return r;
}

const HermiteRule& rule(int n)
{
    static std::mutex m;
    static std::map<int, HermiteRule> cache;
    std::lock_guard lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

double cole_hopf_quadrature(double x, double t, int n)
{
    const double nu = burgers_viscosity();
    const double s = std::sqrt(4.0 * nu * t);
    const HermiteRule& r = rule(n);
    std::vector<double> expo(static_cast<std::size_t>(n));
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < expo.size(); ++i) {
        expo[i] = r.log_weights[i] - std::cos(pi * (x - s * r.nodes[i])) / (2.0 * pi * nu);
        top = std::max(top, expo[i]);
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < expo.size(); ++i) {
        const double w = std::exp(expo[i] - top);
        num += w * std::sin(pi * (x - s * r.nodes[i]));
        den += w;
    }
    return -num / den;
}

} // namespace

ColeHopfResult burgers_cole_hopf(double x, double t, double tol)
{
    if (t <= 0.0) return {-std::sin(pi * x), 0, true};
    int n = 32;
    double prev = cole_hopf_quadrature(x, t, n);
    for (n = 64; n <= 2048; n *= 2) {
        const double cur = cole_hopf_quadrature(x, t, n);
        if (std::abs(cur - prev) <= tol) return {cur, n, true};
        prev = cur;
    }
    return {prev, 2048, false};
}

ReferenceGrid burgers_reference(const Vector& x, const Vector& t)
{
    ReferenceGrid g;
    g.axes = {x, t};
    g.values.resize(static_cast<std::size_t>(x.size() * t.size()));
    double unconverged = 0.0;
    int max_nodes = 0;
    for (Index i = 0; i < x.size(); ++i) {
        for (Index j = 0; j < t.size(); ++j) {
            const auto r = burgers_cole_hopf(x[i], t[j]);
            g.values[static_cast<std::size_t>(i * t.size() + j)] = r.value;
            if (!r.converged) unconverged += 1.0;
            max_nodes = std::max(max_nodes, r.nodes);
        }
    }
    g.solver = "cole-hopf-gauss-hermite";
    g.parameters = {{"nu", burgers_viscosity()}, {"nx", static_cast<double>(x.size())},
                    {"nt", static_cast<double>(t.size())}};
    g.diagnostics = {{"unconverged_points", unconverged}, {"max_hermite_nodes", static_cast<double>(max_nodes)}};
    g.validate();
    return g;
}

SpectralSlice burgers_spectral(int modes, double dt, double t_end)
{
    const double nu = burgers_viscosity();
    const double length = 2.0;
    detail::ComplexFft fft(modes);
    auto k = detail::wavenumbers(modes, length);
    std::vector<double> k1 = k;
    k1[static_cast<std::size_t>(modes / 2)] = 0.0;

    SpectralSlice out;
    out.x.resize(modes);
    Vector u(modes);
    for (int j = 0; j < modes; ++j) {
        out.x[j] = -1.0 + length * j / modes;
        u[j] = -std::sin(pi * out.x[j]);
    }

    auto& buf = fft.buffer();
    std::vector<std::complex<double>> hat(static_cast<std::size_t>(modes));
    const std::complex<double> I(0.0, 1.0);
    auto rhs = [&](const Vector& v) {
        for (int j = 0; j < modes; ++j) buf[static_cast<std::size_t>(j)] = v[j];
        fft.forward();
        hat = buf;
        for (int j = 0; j < modes; ++j) buf[static_cast<std::size_t>(j)] = I * k1[static_cast<std::size_t>(j)] * hat[static_cast<std::size_t>(j)];
        fft.inverse();
        Vector ux(modes);
        for (int j = 0; j < modes; ++j) ux[j] = buf[static_cast<std::size_t>(j)].real();
        for (int j = 0; j < modes; ++j) {
            const double kk = k[static_cast<std::size_t>(j)];
            buf[static_cast<std::size_t>(j)] = -kk * kk * hat[static_cast<std::size_t>(j)];
        }
        fft.inverse();
        Vector r(modes);
        for (int j = 0; j < modes; ++j) r[j] = -v[j] * ux[j] + nu * buf[static_cast<std::size_t>(j)].real();
        return r;
    };

    const auto steps = static_cast<long>(std::llround(t_end / dt));
    for (long s = 0; s < steps; ++s) {
        const Vector r1 = rhs(u);
        const Vector r2 = rhs(u + 0.5 * dt * r1);
        const Vector r3 = rhs(u + 0.5 * dt * r2);
        const Vector r4 = rhs(u + dt * r3);
        u += dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
        if (!u.allFinite()) throw NumericalError("spectral Burgers integration blew up");
    }
    out.u = u;
    return out;
}

} // namespace spinn
