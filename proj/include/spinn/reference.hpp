#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spinn/network.hpp"

namespace spinn {

// Solution values on a tensor grid. Values are stored with the last axis
// varying fastest and, for multi-component fields, the component innermost.
struct ReferenceGrid {
    std::vector<Vector> axes;
    int components = 1;
    std::vector<double> values;
    std::string solver;
    std::map<std::string, double> parameters;
    std::map<std::string, double> diagnostics;

    [[nodiscard]] Index points() const;
    [[nodiscard]] Index flat_index(std::span<const Index> idx) const;
    [[nodiscard]] double at(std::span<const Index> idx, int component = 0) const;
    // Axes strictly increasing and value count matching the shape.
    void validate() const;
};

// Multilinear interpolation; exact at nodes. Throws ConfigError naming the first
// point outside the grid hull.
[[nodiscard]] Vector interpolate(const ReferenceGrid& grid, const Matrix& points, int component = 0);

// Every grid node as an (N x d) matrix of raw coordinates, in storage order.
[[nodiscard]] Matrix grid_points(const ReferenceGrid& grid);
[[nodiscard]] Vector grid_component(const ReferenceGrid& grid, int component);

// Binary payload (<base>.grid) plus JSON sidecar (<base>.json).
void save_grid(const ReferenceGrid& grid, const std::filesystem::path& base);
[[nodiscard]] ReferenceGrid load_grid(const std::filesystem::path& base);

// ---------------------------------------------------------------------------
// Viscous Burgers u_t + u u_x = nu u_xx on [-1,1], u(x,0) = -sin(pi x), u(+-1,t) = 0.

struct ColeHopfResult {
    double value = 0.0;
    int nodes = 0;
    bool converged = true;
};

// Cole-Hopf quotient evaluated with Gauss-Hermite quadrature; the node count is
// doubled until two successive estimates agree to `tol`.
[[nodiscard]] ColeHopfResult burgers_cole_hopf(double x, double t, double tol = 1e-13);

[[nodiscard]] ReferenceGrid burgers_reference(const Vector& x, const Vector& t);

// Independent check: Fourier pseudospectral in x (periodic on [-1,1)) with RK4
// in time. Returns u at the `modes` equispaced nodes at time t_end.
struct SpectralSlice {
    Vector x;
    Vector u;
};
[[nodiscard]] SpectralSlice burgers_spectral(int modes, double dt, double t_end);

// ---------------------------------------------------------------------------
// Nonlinear Schrodinger i h_t + 0.5 h_xx + |h|^2 h = 0 on [-5,5) periodic,
// h(x,0) = 2 sech(x) cos^2(pi x / 10). Components (v, w) = (Re h, Im h).

struct NlsReferenceSpec {
    int modes = 256;
    double dt = 1.5707963267948966e-4;
    int time_samples = 201;
};

// x axis holds the spectral nodes plus the periodic image x = 5.
[[nodiscard]] ReferenceGrid nls_reference(const NlsReferenceSpec& spec);

// ---------------------------------------------------------------------------
// Allen-Cahn u_t = 1e-4 u_xx - 5 u^3 + 5 u on [-1,1], u(x,0) = x^2 cos(pi x),
// u(+-1,t) = -1. Central differences in space, RK4 in time.

struct AllenCahnReferenceSpec {
    double dx = 5e-4;
    double dt = 1e-5;
    int time_samples = 201;
    double t_end = 1.0;
};

[[nodiscard]] ReferenceGrid allen_cahn_reference(const AllenCahnReferenceSpec& spec);

// ---------------------------------------------------------------------------
// 3D Bratu  Delta u + C e^u = 0 on [0,1]^3, u = 0 on the boundary. 7-point
// Laplacian, damped Newton from u = 0 (lower branch).

struct BratuReferenceSpec {
    int points = 51;  // per direction, boundary included
    double C = 2.0;
    double newton_tol = 1e-12;  // on h^2-scaled residual, max norm
    int max_newton = 30;
};

[[nodiscard]] ReferenceGrid bratu_reference(const BratuReferenceSpec& spec);

} // namespace spinn
