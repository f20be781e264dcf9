#include <cmath>
#include <numbers>

#include "spinn/errors.hpp"
#include "spinn/reference.hpp"

namespace spinn {

ReferenceGrid allen_cahn_reference(const AllenCahnReferenceSpec& spec)
{
    using std::numbers::pi;
    const auto cells = static_cast<Index>(std::llround(2.0 / spec.dx));
    const double dx = 2.0 / static_cast<double>(cells);
    const auto steps = static_cast<long>(std::llround(spec.t_end / spec.dt));
    const long intervals = spec.time_samples - 1;
    if (intervals < 1 || steps % intervals != 0) {
        throw ConfigError("Allen-Cahn time step does not divide the sample interval evenly");
    }
    const long stride = steps / intervals;
    const double dt = spec.t_end / static_cast<double>(steps);
    const double diff = 1e-4 / (dx * dx);

    Vector x(cells + 1), u(cells + 1);
    for (Index j = 0; j <= cells; ++j) {
        x[j] = -1.0 + dx * static_cast<double>(j);
        u[j] = x[j] * x[j] * std::cos(pi * x[j]);
    }
    u[0] = u[cells] = -1.0;

    // u_t = 1e-4 u_xx - 5 u^3 + 5 u on the interior, Dirichlet ends untouched
    auto rhs = [&](const Vector& v, Vector& out) {
        out[0] = out[cells] = 0.0;
        for (Index j = 1; j < cells; ++j) {
            out[j] = diff * (v[j - 1] - 2.0 * v[j] + v[j + 1]) - 5.0 * v[j] * v[j] * v[j] + 5.0 * v[j];
        }
    };

    ReferenceGrid g;
    Vector t(spec.time_samples);
    for (int i = 0; i < spec.time_samples; ++i) t[i] = spec.t_end * i / static_cast<double>(intervals);
    g.axes = {x, t};
    g.values.assign(static_cast<std::size_t>((cells + 1) * spec.time_samples), 0.0);
    auto store = [&](Index ti) {
        for (Index j = 0; j <= cells; ++j) g.values[static_cast<std::size_t>(j * spec.time_samples + ti)] = u[j];
    };

    Vector k1(cells + 1), k2(cells + 1), k3(cells + 1), k4(cells + 1);
    store(0);
    for (long s = 1; s <= steps; ++s) {
        rhs(u, k1);
        rhs(u + 0.5 * dt * k1, k2);
        rhs(u + 0.5 * dt * k2, k3);
        rhs(u + dt * k3, k4);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (s % stride == 0) {
            if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 10.0) {
                throw NumericalError("Allen-Cahn integration blew up before t = " + std::to_string(s * dt));
            }
            store(s / stride);
        }
    }

    g.solver = "central-difference-rk4";
    g.parameters = {{"dx", dx}, {"dt", dt}, {"t_end", spec.t_end}};
    g.validate();
    return g;
}

} // namespace spinn
