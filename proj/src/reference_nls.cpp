#include <cmath>
#include <complex>
#include <numbers>

#include "fft.hpp"
#include "spinn/errors.hpp"
#include "spinn/reference.hpp"

namespace spinn {

ReferenceGrid nls_reference(const NlsReferenceSpec& spec)
{
    using cd = std::complex<double>;
    using std::numbers::pi;
    const int N = spec.modes;
    const double length = 10.0, t_end = pi / 2.0, dx = length / N;
    const auto steps = static_cast<long>(std::llround(t_end / spec.dt));
    const long intervals = spec.time_samples - 1;
    if (intervals < 1 || steps % intervals != 0) {
        throw ConfigError("NLS time step does not divide the sample interval evenly");
    }
    const long stride = steps / intervals;
    const double dt = t_end / static_cast<double>(steps);

    detail::ComplexFft fft(N);
    const auto k = detail::wavenumbers(N, length);
    auto& buf = fft.buffer();

    using State = std::vector<cd>;
    State h(static_cast<std::size_t>(N));
    Vector x(N + 1);
    for (int j = 0; j <= N; ++j) x[j] = -5.0 + dx * j;
    for (int j = 0; j < N; ++j) {
        const double c = std::cos(pi * x[j] / 10.0);
        h[static_cast<std::size_t>(j)] = 2.0 / std::cosh(x[j]) * c * c;
    }

    const cd I(0.0, 1.0);
    // h_t = i (0.5 h_xx + |h|^2 h)
    auto rhs = [&](const State& s, State& out) {
        buf = s;
        fft.forward();
        for (int j = 0; j < N; ++j) buf[static_cast<std::size_t>(j)] *= -k[static_cast<std::size_t>(j)] * k[static_cast<std::size_t>(j)];
        fft.inverse();
        for (std::size_t j = 0; j < s.size(); ++j) out[j] = I * (0.5 * buf[j] + std::norm(s[j]) * s[j]);
    };
    auto mass = [&](const State& s) {
        double m = 0.0;
        for (const auto& c : s) m += std::norm(c);
        return m * dx;
    };

    ReferenceGrid g;
    Vector t(spec.time_samples);
    for (int i = 0; i < spec.time_samples; ++i) t[i] = t_end * i / intervals;
    g.axes = {x, t};
    g.components = 2;
    g.values.assign(static_cast<std::size_t>((N + 1) * spec.time_samples * 2), 0.0);
    auto store = [&](int ti) {
        for (int j = 0; j <= N; ++j) {
            const cd v = h[static_cast<std::size_t>(j % N)];
            const auto base = static_cast<std::size_t>((j * spec.time_samples + ti) * 2);
            g.values[base] = v.real();
            g.values[base + 1] = v.imag();
        }
    };

    const double m0 = mass(h);
    double drift = 0.0;
    State k1(h.size()), k2(h.size()), k3(h.size()), k4(h.size()), tmp(h.size());
    store(0);
    for (long s = 1; s <= steps; ++s) {
        rhs(h, k1);
        for (std::size_t j = 0; j < h.size(); ++j) tmp[j] = h[j] + 0.5 * dt * k1[j];
        rhs(tmp, k2);
        for (std::size_t j = 0; j < h.size(); ++j) tmp[j] = h[j] + 0.5 * dt * k2[j];
        rhs(tmp, k3);
        for (std::size_t j = 0; j < h.size(); ++j) tmp[j] = h[j] + dt * k3[j];
        rhs(tmp, k4);
        double peak = 0.0;
        for (std::size_t j = 0; j < h.size(); ++j) {
            h[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            peak = std::max(peak, std::abs(h[j]));
        }
        if (!std::isfinite(peak) || peak > 1e3) {
            throw NumericalError("NLS integration unstable at step " + std::to_string(s) + " (max |h| = " +
                                 std::to_string(peak) + ")");
        }
        if (s % stride == 0) {
            store(static_cast<int>(s / stride));
            drift = std::max(drift, std::abs(mass(h) - m0) / m0);
        }
    }

    g.solver = "fourier-spectral-rk4";
    g.parameters = {{"modes", N}, {"dt", dt}, {"length", length}};
    g.diagnostics = {{"mass_initial", m0}, {"mass_relative_drift", drift}};
    g.validate();
    return g;
}

} // namespace spinn
