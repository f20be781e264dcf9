#include <random>

#include "spinn/errors.hpp"
#include "spinn/problems.hpp"
#include "spinn/reference.hpp"

namespace spinn {

CollocationSet sample_collocation(const ProblemSpec& spec, Index n, std::uint64_t seed, const ReferenceGrid* reference)
{
    if (n <= 0) throw ConfigError("collocation count must be positive");
    const Index d = spec.raw_dims();
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> dist;
    for (Index c = 0; c < d; ++c) dist.emplace_back(spec.lower[c], spec.upper[c]);

    CollocationSet s;
    s.seed = seed;
    s.points.resize(n, d);
    for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < d; ++c) s.points(i, c) = dist[static_cast<std::size_t>(c)](rng);
    }
    if (spec.mode == Mode::Inverse) {
        if (reference == nullptr) {
            throw ConfigError("inverse problem '" + spec.name + "' needs a reference grid for its observations");
        }
        s.observed = interpolate(*reference, s.points, 0);
    }
    return s;
}

} // namespace spinn
