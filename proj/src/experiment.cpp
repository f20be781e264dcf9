#include "spinn/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "spinn/errors.hpp"

namespace spinn {

namespace {

using nlohmann::json;

constexpr std::string_view kCodeVersion = "spinn-1.1";

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

void reject_unknown(const json& obj, const std::string& where)
{
    if (!obj.is_object()) bad("'" + where + "' must be an object");
    const auto& allowed = config_keys().at(where);
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            bad("unknown key '" + key + "' in " + (where == "" ? std::string("top level") : "'" + where + "'"));
        }
    }
}

template <class T>
T get_num(const json& obj, const char* key, T fallback, const std::string& where)
{
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) bad("'" + where + key + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (v.get<long long>() < 0) bad("'" + where + key + "' must be non-negative");
        }
    } else {
        if (!v.is_number()) bad("'" + where + key + "' must be a number");
    }
    return v.get<T>();
}

std::string get_str(const json& obj, const char* key, std::string fallback)
{
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) bad(std::string("'") + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

std::vector<double> linspace(double a, double b, Index n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

Matrix tensor_points(const std::vector<Vector>& axes)
{
    ReferenceGrid g;
    g.axes = axes;
    return grid_points(g);
}

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

const std::map<std::string, std::vector<std::string>>& config_keys()
{
    static const std::map<std::string, std::vector<std::string>> keys{
        {"",
         {"problem", "architecture", "collocation", "seed", "collocation_seed", "optimizer", "evaluation_grid",
          "reference", "lambda0", "output_dir", "ref_cache", "history_stride", "log_every"}},
        {"architecture", {"hidden1", "hidden2"}},
        {"optimizer",
         {"method", "max_iters", "kappa0", "nu", "kappa_min", "kappa_max", "tol_F", "tol_step", "max_rejects", "c1",
          "c2", "max_line_search", "grad_tol"}},
        {"reference", {"dx", "dt", "time_samples"}},
    };
    return keys;
}

ExperimentConfig ExperimentConfig::from_json(const json& j)
{
    reject_unknown(j, "");
    ExperimentConfig c;
    if (!j.contains("problem")) bad("'problem' is required");
    c.problem = get_str(j, "problem", "");
    const auto names = problem_names();
    if (std::find(names.begin(), names.end(), c.problem) == names.end()) bad("unknown problem '" + c.problem + "'");

    if (j.contains("architecture")) {
        const json& a = j.at("architecture");
        reject_unknown(a, "architecture");
        c.hidden1 = get_num<Index>(a, "hidden1", c.hidden1, "architecture.");
        c.hidden2 = get_num<Index>(a, "hidden2", c.hidden2, "architecture.");
    }
    if (c.hidden1 < 1 || c.hidden2 < 1) bad("hidden widths must be at least 1");
    c.collocation = get_num<Index>(j, "collocation", c.collocation, "");
    if (c.collocation < 1) bad("'collocation' must be at least 1");
    c.seed = get_num<std::uint64_t>(j, "seed", c.seed, "");
    if (j.contains("collocation_seed")) c.collocation_seed = get_num<std::uint64_t>(j, "collocation_seed", 0, "");

    if (j.contains("optimizer")) {
        const json& o = j.at("optimizer");
        reject_unknown(o, "optimizer");
        c.optimizer.method = get_str(o, "method", "lm");
        if (c.optimizer.method != "lm" && c.optimizer.method != "bfgs") bad("optimizer.method must be 'lm' or 'bfgs'");
        auto& lm = c.optimizer.lm;
        auto& bf = c.optimizer.bfgs;
        lm.max_iters = get_num<int>(o, "max_iters", lm.max_iters, "optimizer.");
        bf.max_iters = get_num<int>(o, "max_iters", bf.max_iters, "optimizer.");
        lm.kappa0 = get_num<double>(o, "kappa0", lm.kappa0, "optimizer.");
        lm.nu = get_num<double>(o, "nu", lm.nu, "optimizer.");
        lm.kappa_min = get_num<double>(o, "kappa_min", lm.kappa_min, "optimizer.");
        lm.kappa_max = get_num<double>(o, "kappa_max", lm.kappa_max, "optimizer.");
        lm.tol_F = get_num<double>(o, "tol_F", lm.tol_F, "optimizer.");
        lm.tol_step = get_num<double>(o, "tol_step", lm.tol_step, "optimizer.");
        lm.max_rejects = get_num<int>(o, "max_rejects", lm.max_rejects, "optimizer.");
        bf.c1 = get_num<double>(o, "c1", bf.c1, "optimizer.");
        bf.c2 = get_num<double>(o, "c2", bf.c2, "optimizer.");
        bf.max_line_search = get_num<int>(o, "max_line_search", bf.max_line_search, "optimizer.");
        bf.grad_tol = get_num<double>(o, "grad_tol", bf.grad_tol, "optimizer.");
    }
    c.optimizer.lm.validate();
    c.optimizer.bfgs.validate();

    if (j.contains("evaluation_grid")) {
        const json& g = j.at("evaluation_grid");
        if (!g.is_array()) bad("'evaluation_grid' must be an array of node counts");
        for (const auto& v : g) {
            if (!v.is_number_integer() || v.get<long long>() < 2) bad("'evaluation_grid' entries must be integers >= 2");
            c.evaluation_grid.push_back(v.get<Index>());
        }
        const auto spec = make_problem(c.problem);
        if (static_cast<int>(c.evaluation_grid.size()) != spec.raw_dims()) {
            bad("'evaluation_grid' needs " + std::to_string(spec.raw_dims()) + " entries for " + c.problem);
        }
    }
    if (j.contains("reference")) {
        const json& r = j.at("reference");
        reject_unknown(r, "reference");
        for (const auto& [key, v] : r.items()) {
            if (!v.is_number() || !(v.get<double>() > 0.0)) bad("'reference." + key + "' must be a positive number");
            c.reference[key] = v.get<double>();
        }
    }
    if (j.contains("lambda0")) {
        const json& l = j.at("lambda0");
        if (!l.is_array()) bad("'lambda0' must be an array");
        std::vector<double> v;
        for (const auto& e : l) {
            if (!e.is_number()) bad("'lambda0' entries must be numbers");
            v.push_back(e.get<double>());
        }
        const auto spec = make_problem(c.problem);
        if (static_cast<Index>(v.size()) != spec.n_lambda()) {
            bad("'lambda0' needs " + std::to_string(spec.n_lambda()) + " entries for " + c.problem);
        }
        c.lambda0 = to_vector(v);
    }
    c.output_dir = get_str(j, "output_dir", "");
    c.ref_cache = get_str(j, "ref_cache", c.ref_cache.string());
    c.history_stride = get_num<int>(j, "history_stride", c.history_stride, "");
    if (c.history_stride < 1) bad("'history_stride' must be at least 1");
    c.log_every = get_num<int>(j, "log_every", c.log_every, "");
    if (c.log_every < 0) bad("'log_every' must be non-negative");
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const
{
    json j;
    j["problem"] = problem;
    j["architecture"] = {{"hidden1", hidden1}, {"hidden2", hidden2}};
    j["collocation"] = collocation;
    j["seed"] = seed;
    if (collocation_seed) j["collocation_seed"] = *collocation_seed;
    json o;
    o["method"] = optimizer.method;
    if (optimizer.method == "lm") {
        const auto& lm = optimizer.lm;
        o["max_iters"] = lm.max_iters;
        o["kappa0"] = lm.kappa0;
        o["nu"] = lm.nu;
        o["kappa_min"] = lm.kappa_min;
        o["kappa_max"] = lm.kappa_max;
        o["tol_F"] = lm.tol_F;
        o["tol_step"] = lm.tol_step;
        o["max_rejects"] = lm.max_rejects;
    } else {
        const auto& bf = optimizer.bfgs;
        o["max_iters"] = bf.max_iters;
        o["c1"] = bf.c1;
        o["c2"] = bf.c2;
        o["max_line_search"] = bf.max_line_search;
        o["grad_tol"] = bf.grad_tol;
    }
    j["optimizer"] = o;
    j["evaluation_grid"] = evaluation_grid.empty() ? default_evaluation_grid(problem) : evaluation_grid;
    if (!reference.empty()) j["reference"] = reference;
    if (lambda0) j["lambda0"] = as_std(*lambda0);
    j["output_dir"] = output_dir.string();
    j["ref_cache"] = ref_cache.string();
    j["history_stride"] = history_stride;
    j["log_every"] = log_every;
    return j;
}

std::uint64_t fnv1a(std::string_view data) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------------------

std::vector<Index> default_evaluation_grid(std::string_view problem)
{
    if (problem == "burgers" || problem == "allen-cahn-inverse") return {201, 201};
    if (problem == "nls") return {256, 201};
    if (problem == "bratu3d-inverse") return {51, 51, 51};
    throw ConfigError("unknown problem '" + std::string(problem) + "'");
}

namespace {

const std::map<std::string, std::vector<std::string>>& reference_overrides()
{
    static const std::map<std::string, std::vector<std::string>> m{
        {"burgers", {}},
        {"nls", {"dt"}},
        {"allen-cahn-inverse", {"dx", "dt", "time_samples"}},
        {"bratu3d-inverse", {}},
    };
    return m;
}

std::vector<Index> resolved_grid(const ReferenceRequest& req)
{
    return req.evaluation_grid.empty() ? default_evaluation_grid(req.problem) : req.evaluation_grid;
}

double override_or(const ReferenceRequest& req, const std::string& key, double fallback)
{
    const auto it = req.overrides.find(key);
    return it == req.overrides.end() ? fallback : it->second;
}

void check_overrides(const ReferenceRequest& req)
{
    const auto& allowed = reference_overrides().at(req.problem);
    for (const auto& [key, _] : req.overrides) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("reference setting '" + key + "' does not apply to " + req.problem);
        }
    }
}

} // namespace

std::string reference_key(const ReferenceRequest& req)
{
    check_overrides(req);
    const auto grid = resolved_grid(req);
    std::ostringstream s;
    s << std::setprecision(17) << "problem=" << req.problem << ";grid=";
    for (std::size_t k = 0; k < grid.size(); ++k) s << (k ? "x" : "") << grid[k];
    if (req.problem == "burgers") {
        s << ";solver=cole-hopf;nu=" << burgers_viscosity();
    } else if (req.problem == "nls") {
        const NlsReferenceSpec d;
        s << ";solver=spectral-rk4;dt=" << override_or(req, "dt", d.dt);
    } else if (req.problem == "allen-cahn-inverse") {
        const AllenCahnReferenceSpec d;
        s << ";solver=mol-rk4;dx=" << override_or(req, "dx", d.dx) << ";dt=" << override_or(req, "dt", d.dt)
          << ";time_samples=" << override_or(req, "time_samples", static_cast<double>(grid[1]));
    } else {
        const BratuReferenceSpec d;
        s << ";solver=seven-point-newton;C=" << d.C << ";tol=" << d.newton_tol;
    }
    return s.str();
}

ReferenceGrid compute_reference(const ReferenceRequest& req)
{
    check_overrides(req);
    const auto grid = resolved_grid(req);
    if (req.problem == "burgers") {
        return burgers_reference(to_vector(linspace(-1.0, 1.0, grid[0])), to_vector(linspace(0.0, 1.0, grid[1])));
    }
    if (req.problem == "nls") {
        NlsReferenceSpec s;
        s.modes = static_cast<int>(grid[0]);
        s.time_samples = static_cast<int>(grid[1]);
        s.dt = override_or(req, "dt", s.dt);
        return nls_reference(s);
    }
    if (req.problem == "allen-cahn-inverse") {
        AllenCahnReferenceSpec s;
        s.dx = override_or(req, "dx", s.dx);
        s.dt = override_or(req, "dt", s.dt);
        s.time_samples = static_cast<int>(override_or(req, "time_samples", static_cast<double>(grid[1])));
        return allen_cahn_reference(s);
    }
    if (req.problem == "bratu3d-inverse") {
        if (grid[0] != grid[1] || grid[0] != grid[2]) throw ConfigError("Bratu reference grid must be a cube");
        BratuReferenceSpec s;
        s.points = static_cast<int>(grid[0]);
        return bratu_reference(s);
    }
    throw ConfigError("unknown problem '" + req.problem + "'");
}

ReferenceGrid obtain_reference(const ReferenceRequest& req, const std::filesystem::path& cache,
                               std::filesystem::path* stored_at)
{
    const std::string key = reference_key(req);
    const auto base = cache / req.problem / hex64(fnv1a(key));
    if (stored_at != nullptr) *stored_at = base;
    if (std::filesystem::exists(base.string() + ".json") && std::filesystem::exists(base.string() + ".grid")) {
        return load_grid(base);
    }
    ReferenceGrid g = compute_reference(req);
    // Write under a private name, then move into place so readers never see a partial file.
    const auto tmp = cache / req.problem / (hex64(fnv1a(key)) + ".tmp" + std::to_string(::getpid()));
    save_grid(g, tmp);
    std::filesystem::rename(tmp.string() + ".grid", base.string() + ".grid");
    std::filesystem::rename(tmp.string() + ".json", base.string() + ".json");
    return g;
}

EvaluationSet evaluation_set(const ProblemSpec& spec, const ReferenceGrid& ref, const std::vector<Index>& grid)
{
    EvaluationSet e;
    if (spec.name == "allen-cahn-inverse") {
        for (int c = 0; c < spec.raw_dims(); ++c) {
            e.axes.push_back(to_vector(linspace(spec.lower[c], spec.upper[c], grid[static_cast<std::size_t>(c)])));
        }
    } else if (spec.name == "nls") {
        // periodic image x = +5 dropped
        e.axes = {ref.axes[0].head(ref.axes[0].size() - 1), ref.axes[1]};
    } else {
        e.axes = ref.axes;
    }
    e.points = tensor_points(e.axes);
    e.reference.resize(e.points.rows(), ref.components);
    for (int k = 0; k < ref.components; ++k) e.reference.col(k) = interpolate(ref, e.points, k);
    return e;
}

double relative_l2(const Matrix& pred, const Matrix& ref)
{
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) throw ShapeError("prediction and reference differ in shape");
    const double den = ref.norm();
    if (den == 0.0) throw NumericalError("reference field is identically zero");
    return (pred - ref).norm() / den;
}

double relative_l2_modulus(const Matrix& pred, const Matrix& ref)
{
    if (pred.rows() != ref.rows() || pred.cols() != ref.cols()) throw ShapeError("prediction and reference differ in shape");
    return relative_l2(pred.rowwise().norm(), ref.rowwise().norm());
}

Vector absolute_percentage_error(const Vector& lambda, const Vector& truth)
{
    if (lambda.size() != truth.size()) throw ShapeError("lambda and truth differ in length");
    return (100.0 * (lambda - truth).array().abs() / truth.array().abs()).matrix();
}

Matrix predict(const ProblemSpec& spec, std::span<const ParamVector> nets, const Matrix& raw)
{
    Matrix out(raw.rows(), spec.fields());
    for (int f = 0; f < spec.fields(); ++f) {
        out.col(f) = evaluate_field(spec, f, nets[static_cast<std::size_t>(f)], raw, {})[Channel::value()];
    }
    return out;
}

// ---------------------------------------------------------------------------

json RunReport::to_json() const
{
    json j;
    j["problem"] = config.problem;
    const auto spec = make_problem(config.problem);
    j["network"] = "NN(" + std::to_string(spec.features.feature_dims()) + "," + std::to_string(config.hidden1) + "," +
                   std::to_string(config.hidden2) + ",1)";
    j["status"] = status;
    j["message"] = message;
    j["iterations"] = iterations;
    j["final_loss"] = final_loss;
    j["recomputed_loss"] = recomputed_loss;
    j["relative_l2"] = rel_l2 ? json(*rel_l2) : json(nullptr);
    if (rel_l2_components) j["relative_l2_components"] = *rel_l2_components;
    if (lambda.size() > 0) {
        j["lambda"] = as_std(lambda);
        j["lambda_true"] = as_std(lambda_true);
        j["lambda_names"] = spec.lambda_names;
        j["ape_percent"] = as_std(ape);
        j["identified_pde"] = identified_pde;
    }
    j["condition_violation"] = condition_violation;
    j["wall_seconds"] = wall_seconds;
    j["config"] = config.to_json();
    j["config_hash"] = config_hash;
    j["reference_file"] = reference_file;
    j["history_records"] = history.records.size();
    return j;
}

namespace {

void write_solution(const std::filesystem::path& path, const ProblemSpec& spec, const EvaluationSet& ev,
                    const Matrix& pred)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& c : spec.coord_names) out << c << ',';
    for (int f = 0; f < spec.fields(); ++f) out << spec.field_names[static_cast<std::size_t>(f)] << (f + 1 < spec.fields() ? "," : "\n");
    out << std::setprecision(12);
    for (Index i = 0; i < ev.points.rows(); ++i) {
        for (Index c = 0; c < ev.points.cols(); ++c) out << ev.points(i, c) << ',';
        for (Index f = 0; f < pred.cols(); ++f) out << pred(i, f) << (f + 1 < pred.cols() ? "," : "\n");
    }
}

void write_artifacts(const RunReport& r, const ProblemSpec& spec, const EvaluationSet* ev, const Matrix* pred)
{
    const auto& dir = r.config.output_dir;
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        out << r.to_json().dump(2) << '\n';
    }
    {
        std::ofstream out(dir / "history.jsonl");
        r.history.write_jsonl(out, r.config.history_stride);
    }
    if (ev != nullptr && pred != nullptr) write_solution(dir / "solution.csv", spec, *ev, *pred);
}

} // namespace

RunReport run_experiment(const ExperimentConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    RunReport r;
    r.config = cfg;
    // Output locations do not change the computation, so they stay out of the hash.
    auto hashed = cfg.to_json();
    for (const char* k : {"output_dir", "ref_cache", "history_stride", "log_every"}) hashed.erase(k);
    r.config_hash = hex64(fnv1a(std::string(kCodeVersion) + hashed.dump()));

    const ProblemSpec spec = make_problem(cfg.problem);
    const Architecture arch{spec.features.feature_dims(), cfg.hidden1, cfg.hidden2};
    const ReferenceRequest req{cfg.problem, cfg.evaluation_grid, cfg.reference};
    std::filesystem::path ref_path;
    const ReferenceGrid ref = obtain_reference(req, cfg.ref_cache, &ref_path);
    r.reference_file = ref_path.string() + ".grid";

    const CollocationSet cs = sample_collocation(spec, cfg.collocation, cfg.points_seed(), &ref);
    const PinnSystem sys(spec, arch, cs);
    const Vector lambda0 = cfg.lambda0.value_or(Vector::Zero(spec.n_lambda()));
    const Vector W0 = sys.initial_params(cfg.seed, lambda0);
    const auto lambda_of = [&sys](const Vector& W) { return Vector(W.tail(sys.n_lambda())); };

    const auto progress = [&](const IterationRecord& rec) {
        if (cfg.log_every > 0 && rec.iter % cfg.log_every == 0) {
            std::cerr << cfg.problem << " " << cfg.optimizer.method << " iter " << rec.iter << " loss "
                      << std::scientific << std::setprecision(3) << rec.loss << std::defaultfloat << " t "
                      << std::fixed << std::setprecision(1) << seconds_since(t0) << "s" << std::defaultfloat << '\n';
        }
    };

    SolveResult res;
    try {
        if (cfg.optimizer.method == "lm") {
            LeastSquaresProblem p;
            p.residual = [&sys](const Vector& W) { return sys.residual(W); };
            p.residual_jacobian = [&sys](const Vector& W, Vector& F, RowMatrix& J) {
                auto rj = sys.residual_jacobian(W);
                F = std::move(rj.F);
                J = std::move(rj.J);
            };
            p.loss_scale = 1.0 / static_cast<double>(sys.num_points());
            if (sys.inverse()) p.lambda_of = lambda_of;
            res = lm_solve(p, W0, cfg.optimizer.lm, progress);
        } else {
            Objective o;
            o.value_and_gradient = [&sys](const Vector& W, Vector& g) { return sys.loss_and_gradient(W, g); };
            if (sys.inverse()) o.lambda_of = lambda_of;
            res = bfgs_solve(o, W0, cfg.optimizer.bfgs, progress);
        }
        r.status = std::string(stop_reason_name(res.status));
        r.message = res.message;
    } catch (const std::exception& e) {
        res.W = W0;
        res.final_loss = sys.loss(W0);
        r.status = "error";
        r.message = e.what();
    }

    r.W = res.W;
    r.history = std::move(res.history);
    r.iterations = res.iterations;
    r.final_loss = res.final_loss;
    r.recomputed_loss = sys.loss(res.W);
    const auto parts = sys.split(res.W);
    if (sys.inverse()) {
        r.lambda = parts.lambda;
        r.lambda_true = spec.lambda_true;
        r.ape = absolute_percentage_error(parts.lambda, spec.lambda_true);
        r.identified_pde = spec.describe(parts.lambda);
    }
    r.condition_violation = max_condition_violation(spec, parts.nets, 1000, cfg.seed);

    const auto grid = cfg.evaluation_grid.empty() ? default_evaluation_grid(cfg.problem) : cfg.evaluation_grid;
    const EvaluationSet ev = evaluation_set(spec, ref, grid);
    const Matrix pred = predict(spec, parts.nets, ev.points);
    if (pred.cols() > 1) {
        r.rel_l2 = relative_l2_modulus(pred, ev.reference);
        r.rel_l2_components = relative_l2(pred, ev.reference);
    } else {
        r.rel_l2 = relative_l2(pred, ev.reference);
    }
    r.wall_seconds = seconds_since(t0);
    write_artifacts(r, spec, &ev, &pred);
    return r;
}

std::vector<RunReport> size_sweep(const ExperimentConfig& cfg, std::span<const Index> sizes)
{
    if (sizes.empty()) throw ConfigError("size sweep needs at least one size");
    const auto spec = make_problem(cfg.problem);
    std::vector<RunReport> rows;
    for (Index s : sizes) {
        ExperimentConfig c = cfg;
        c.hidden1 = c.hidden2 = s;
        const std::string tag = "NN_" + std::to_string(spec.features.feature_dims()) + "_" + std::to_string(s) + "_" +
                                std::to_string(s) + "_1";
        if (!cfg.output_dir.empty()) c.output_dir = cfg.output_dir / tag;
        try {
            rows.push_back(run_experiment(c));
        } catch (const std::exception& e) {
            RunReport failed;
            failed.config = c;
            failed.status = "error";
            failed.message = e.what();
            rows.push_back(std::move(failed));
        }
    }
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        write_table(rows, cfg.output_dir / "table.csv");
    }
    return rows;
}

void write_table(const std::vector<RunReport>& rows, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    if (rows.empty()) return;
    const auto spec = make_problem(rows.front().config.problem);
    const bool inverse = spec.mode == Mode::Inverse;
    out << "network,loss,relative_l2";
    if (inverse) {
        for (const auto& n : spec.lambda_names) out << ',' << n << ",ape_" << n;
    }
    out << ",iterations,time_s,status\n";
    for (const auto& r : rows) {
        out << "NN(" << spec.features.feature_dims() << ';' << r.config.hidden1 << ';' << r.config.hidden2 << ";1)";
        out << std::setprecision(6) << ',' << r.final_loss << ',';
        if (r.rel_l2) out << *r.rel_l2;
        if (inverse) {
            for (Index k = 0; k < spec.n_lambda(); ++k) {
                if (r.lambda.size() == spec.n_lambda()) {
                    out << ',' << std::setprecision(9) << r.lambda[k] << ',' << std::setprecision(4) << r.ape[k];
                } else {
                    out << ",,";
                }
            }
        }
        out << ',' << r.iterations << ',' << std::fixed << std::setprecision(1) << r.wall_seconds << std::defaultfloat
            << ',' << r.status << '\n';
    }
}

} // namespace spinn
