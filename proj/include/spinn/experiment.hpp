#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spinn/network.hpp"
#include "spinn/optim.hpp"
#include "spinn/problems.hpp"
#include "spinn/reference.hpp"
#include "spinn/system.hpp"

namespace spinn {

struct OptimizerSettings {
    std::string method = "lm";  // "lm" or "bfgs"
    LMConfig lm;
    BFGSConfig bfgs;
};

struct ExperimentConfig {
    std::string problem;
    Index hidden1 = 15;
    Index hidden2 = 15;
    Index collocation = 10000;
    std::uint64_t seed = 1;                       // network initialization
    std::optional<std::uint64_t> collocation_seed; // defaults to `seed`
    OptimizerSettings optimizer;
    std::vector<Index> evaluation_grid;           // empty: problem default
    std::map<std::string, double> reference;      // solver overrides (dx, dt, time_samples)
    std::optional<Vector> lambda0;                // inverse mode; defaults to zeros
    std::filesystem::path output_dir;             // empty: no artifacts
    std::filesystem::path ref_cache = "ref";
    int history_stride = 1;
    int log_every = 0;                            // progress lines on stderr; 0 = silent

    // Rejects unknown keys, wrong types and out-of-range values with ConfigError.
    [[nodiscard]] static ExperimentConfig from_json(const nlohmann::json& j);
    [[nodiscard]] static ExperimentConfig load(const std::filesystem::path& path);
    [[nodiscard]] nlohmann::json to_json() const;

    [[nodiscard]] std::uint64_t points_seed() const noexcept { return collocation_seed.value_or(seed); }
};

// Keys accepted at each level of the configuration object.
[[nodiscard]] const std::map<std::string, std::vector<std::string>>& config_keys();

[[nodiscard]] std::uint64_t fnv1a(std::string_view data) noexcept;
[[nodiscard]] std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// Reference data

struct ReferenceRequest {
    std::string problem;
    std::vector<Index> evaluation_grid;
    std::map<std::string, double> overrides;
};

[[nodiscard]] std::vector<Index> default_evaluation_grid(std::string_view problem);
// Canonical description of the solve; its hash names the cache entry.
[[nodiscard]] std::string reference_key(const ReferenceRequest& req);
[[nodiscard]] ReferenceGrid compute_reference(const ReferenceRequest& req);
// Loads ref/<problem>/<hash>.grid if present, otherwise solves and stores it.
[[nodiscard]] ReferenceGrid obtain_reference(const ReferenceRequest& req, const std::filesystem::path& cache,
                                             std::filesystem::path* stored_at = nullptr);

// Evaluation points (rows, raw coordinates) and the reference values there
// (one column per field).
struct EvaluationSet {
    std::vector<Vector> axes;
    Matrix points;
    Matrix reference;
};

[[nodiscard]] EvaluationSet evaluation_set(const ProblemSpec& spec, const ReferenceGrid& ref,
                                           const std::vector<Index>& grid);

// ||pred - ref||_2 / ||ref||_2 over all entries (all field columns together).
[[nodiscard]] double relative_l2(const Matrix& pred, const Matrix& ref);
// Same, on the pointwise modulus |row| of multi-field (complex) solutions.
[[nodiscard]] double relative_l2_modulus(const Matrix& pred, const Matrix& ref);
// 100 |lambda - truth| / |truth| per entry.
[[nodiscard]] Vector absolute_percentage_error(const Vector& lambda, const Vector& truth);

// Field values (one column per field) of trained networks at raw points.
[[nodiscard]] Matrix predict(const ProblemSpec& spec, std::span<const ParamVector> nets, const Matrix& raw);

// ---------------------------------------------------------------------------

struct RunReport {
    ExperimentConfig config;
    std::string status;
    std::string message;
    int iterations = 0;
    double final_loss = 0.0;
    double recomputed_loss = 0.0;
    std::optional<double> rel_l2;
    // multi-field problems: rel_l2 is taken on the modulus, this on the components
    std::optional<double> rel_l2_components;
    Vector lambda;
    Vector lambda_true;
    Vector ape;
    std::string identified_pde;
    double condition_violation = 0.0;
    double wall_seconds = 0.0;
    std::string config_hash;
    std::string reference_file;
    RunHistory history;
    Vector W;

    [[nodiscard]] nlohmann::json to_json() const;
};

// Trains one configuration; writes report.json, history.jsonl and solution.csv
// under config.output_dir when it is set.
[[nodiscard]] RunReport run_experiment(const ExperimentConfig& cfg);

// One run per hidden width (m1 = m2 = size); writes table.csv in output_dir.
[[nodiscard]] std::vector<RunReport> size_sweep(const ExperimentConfig& cfg, std::span<const Index> sizes);

void write_table(const std::vector<RunReport>& rows, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Finite-difference self-checks of the analytic derivatives at toy size.

struct DerivCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
    double tolerance = 0.0;
    [[nodiscard]] bool pass() const noexcept { return max_rel_err <= tolerance; }
};

struct DerivCheckOptions {
    std::vector<std::string> problems;   // empty: all
    std::vector<std::uint64_t> seeds{1, 2, 3};
    Index hidden = 4;
    Index points = 30;
    double step = 1e-6;
};

struct DerivCheckReport {
    std::vector<DerivCheckEntry> entries;
    [[nodiscard]] bool pass() const noexcept;
};

[[nodiscard]] DerivCheckReport check_derivatives(const DerivCheckOptions& opt);

} // namespace spinn
