#include "spinn/reference.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "spinn/errors.hpp"

namespace spinn {

Index ReferenceGrid::points() const
{
    Index n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

Index ReferenceGrid::flat_index(std::span<const Index> idx) const
{
    Index flat = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) flat = flat * axes[k].size() + idx[k];
    return flat;
}

double ReferenceGrid::at(std::span<const Index> idx, int component) const
{
    return values[static_cast<std::size_t>(flat_index(idx) * components + component)];
}

void ReferenceGrid::validate() const
{
    if (axes.empty()) throw ConfigError("reference grid has no axes");
    for (std::size_t k = 0; k < axes.size(); ++k) {
        if (axes[k].size() < 2) throw ConfigError("reference axis " + std::to_string(k) + " has fewer than 2 nodes");
        for (Index i = 1; i < axes[k].size(); ++i) {
            if (!(axes[k][i] > axes[k][i - 1])) {
                throw ConfigError("reference axis " + std::to_string(k) + " is not strictly increasing");
            }
        }
    }
    if (static_cast<Index>(values.size()) != points() * components) {
        throw ConfigError("reference grid holds " + std::to_string(values.size()) + " values, shape needs " +
                          std::to_string(points() * components));
    }
}

Vector interpolate(const ReferenceGrid& grid, const Matrix& points, int component)
{
    const auto d = grid.axes.size();
    if (static_cast<std::size_t>(points.cols()) != d) throw ShapeError("query points have the wrong dimension");
    if (component < 0 || component >= grid.components) throw ConfigError("no such grid component");

    Vector out(points.rows());
    std::vector<Index> lo(d), idx(d);
    std::vector<double> frac(d);
    for (Index i = 0; i < points.rows(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const Vector& ax = grid.axes[k];
            const double p = points(i, static_cast<Index>(k));
            if (!(p >= ax[0] && p <= ax[ax.size() - 1])) {
                throw ConfigError("point " + std::to_string(i) + " lies outside the reference grid");
            }
            const auto it = std::upper_bound(ax.data(), ax.data() + ax.size(), p);
            Index j = std::clamp<Index>(static_cast<Index>(it - ax.data()) - 1, 0, ax.size() - 2);
            lo[k] = j;
            frac[k] = (p - ax[j]) / (ax[j + 1] - ax[j]);
        }
        double acc = 0.0;
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
            double w = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                const bool up = (corner >> k) & 1u;
                w *= up ? frac[k] : 1.0 - frac[k];
                idx[k] = lo[k] + (up ? 1 : 0);
            }
            if (w != 0.0) acc += w * grid.at(idx, component);
        }
        out[i] = acc;
    }
    return out;
}

Matrix grid_points(const ReferenceGrid& grid)
{
    const auto d = grid.axes.size();
    Matrix pts(grid.points(), static_cast<Index>(d));
    std::vector<Index> idx(d, 0);
    for (Index r = 0; r < pts.rows(); ++r) {
        for (std::size_t k = 0; k < d; ++k) pts(r, static_cast<Index>(k)) = grid.axes[k][idx[k]];
        for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < grid.axes[k].size()) break;
            idx[k] = 0;
        }
    }
    return pts;
}

Vector grid_component(const ReferenceGrid& grid, int component)
{
    Vector v(grid.points());
    for (Index i = 0; i < v.size(); ++i) v[i] = grid.values[static_cast<std::size_t>(i * grid.components + component)];
    return v;
}

void save_grid(const ReferenceGrid& grid, const std::filesystem::path& base)
{
    grid.validate();
    if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());

    nlohmann::json meta;
    meta["solver"] = grid.solver;
    meta["components"] = grid.components;
    meta["parameters"] = grid.parameters;
    meta["diagnostics"] = grid.diagnostics;
    meta["shape"] = nlohmann::json::array();
    meta["axes"] = nlohmann::json::array();
    for (const auto& a : grid.axes) {
        meta["shape"].push_back(a.size());
        meta["axes"].push_back(std::vector<double>(a.data(), a.data() + a.size()));
    }
    std::ofstream js(base.string() + ".json");
    js << meta.dump(2) << '\n';

    std::ofstream bin(base.string() + ".grid", std::ios::binary);
    const char magic[8] = {'S', 'P', 'I', 'N', 'N', 'G', 'R', '1'};
    bin.write(magic, sizeof magic);
    const std::uint64_t count = grid.values.size();
    bin.write(reinterpret_cast<const char*>(&count), sizeof count);
    bin.write(reinterpret_cast<const char*>(grid.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!bin) throw ConfigError("could not write " + base.string() + ".grid");
}

ReferenceGrid load_grid(const std::filesystem::path& base)
{
    std::ifstream js(base.string() + ".json");
    if (!js) throw ConfigError("missing reference sidecar " + base.string() + ".json");
    const auto meta = nlohmann::json::parse(js);

    ReferenceGrid g;
    g.solver = meta.at("solver").get<std::string>();
    g.components = meta.at("components").get<int>();
    g.parameters = meta.at("parameters").get<std::map<std::string, double>>();
    g.diagnostics = meta.at("diagnostics").get<std::map<std::string, double>>();
    for (const auto& a : meta.at("axes")) {
        const auto v = a.get<std::vector<double>>();
        g.axes.emplace_back(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
    }

    std::ifstream bin(base.string() + ".grid", std::ios::binary);
    char magic[8];
    std::uint64_t count = 0;
    bin.read(magic, sizeof magic);
    bin.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!bin || std::string(magic, 8) != "SPINNGR1") throw ConfigError("bad reference payload " + base.string() + ".grid");
    g.values.resize(count);
    bin.read(reinterpret_cast<char*>(g.values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!bin) throw ConfigError("truncated reference payload " + base.string() + ".grid");
    g.validate();
    return g;
}

} // namespace spinn
