#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "spinn/errors.hpp"
#include "spinn/experiment.hpp"

using namespace spinn;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("spinn_exp_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

json small_inverse(const std::filesystem::path& dir)
{
    return json{{"problem", "allen-cahn-inverse"},
                {"architecture", {{"hidden1", 5}, {"hidden2", 5}}},
                {"collocation", 150},
                {"seed", 4},
                {"optimizer", {{"method", "lm"}, {"max_iters", 25}}},
                {"evaluation_grid", {21, 11}},
                {"reference", {{"dx", 4e-3}}},
                {"output_dir", (dir / "out").string()},
                {"ref_cache", (dir / "ref").string()}};
}

json small_forward(const std::filesystem::path& dir)
{
    return json{{"problem", "burgers"},
                {"architecture", {{"hidden1", 4}, {"hidden2", 4}}},
                {"collocation", 120},
                {"optimizer", {{"method", "lm"}, {"max_iters", 15}}},
                {"evaluation_grid", {21, 11}},
                {"output_dir", (dir / "out").string()},
                {"ref_cache", (dir / "ref").string()}};
}

std::vector<std::string> lines(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string s; std::getline(in, s);) out.push_back(s);
    return out;
}

} // namespace

TEST_CASE("configuration parsing rejects bad input")
{
    const json ok{{"problem", "burgers"}};
    CHECK(ExperimentConfig::from_json(ok).hidden1 == 15);
    CHECK(ExperimentConfig::from_json(ok).optimizer.method == "lm");

    auto bad = ok;
    bad["colocation"] = 10;
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["architecture"] = {{"hidden3", 4}};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["optimizer"] = {{"method", "adam"}};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["optimizer"] = {{"max_iters", "many"}};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["collocation"] = 0;
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["evaluation_grid"] = {10, 10, 10};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = ok;
    bad["problem"] = "wave";
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = json{{"problem", "allen-cahn-inverse"}, {"lambda0", {1.0}}};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    bad = json{{"problem", "burgers"}, {"reference", {{"dy", 1.0}}}};
    CHECK_THROWS_AS((void)ExperimentConfig::from_json(bad), ConfigError);
    CHECK_THROWS_AS((void)ExperimentConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("configuration round trip")
{
    const auto dir = scratch("roundtrip");
    auto j = small_inverse(dir);
    j["lambda0"] = {0.1, 0.2, 0.3};
    j["collocation_seed"] = 9;
    const auto c = ExperimentConfig::from_json(j);
    CHECK(c.points_seed() == 9);
    CHECK(ExperimentConfig::from_json(c.to_json()).to_json() == c.to_json());
    const auto b = ExperimentConfig::from_json(json{{"problem", "burgers"}, {"optimizer", {{"method", "bfgs"}}}});
    CHECK(b.optimizer.bfgs.max_iters == 20000);
    CHECK(b.to_json()["optimizer"]["max_iters"] == 20000);
}

TEST_CASE("reference settings that do not apply are refused")
{
    CHECK_THROWS_AS((void)reference_key({"burgers", {}, {{"dx", 1e-3}}}), ConfigError);
    CHECK(reference_key({"nls", {}, {}}) != reference_key({"nls", {}, {{"dt", 1e-4}}}));
    CHECK(default_evaluation_grid("bratu3d-inverse") == std::vector<Index>{51, 51, 51});
}

TEST_CASE("reference cache stores and reuses solves")
{
    const auto dir = scratch("cache");
    const ReferenceRequest req{"burgers", {21, 11}, {}};
    std::filesystem::path where;
    const auto a = obtain_reference(req, dir, &where);
    CHECK(where.parent_path() == dir / "burgers");
    CHECK(where.filename().string() == hex64(fnv1a(reference_key(req))));
    CHECK(std::filesystem::exists(where.string() + ".grid"));
    CHECK(std::filesystem::exists(where.string() + ".json"));
    const auto b = obtain_reference(req, dir);
    CHECK(a.values == b.values);
    CHECK(std::distance(std::filesystem::directory_iterator(dir / "burgers"), {}) == 2);
}

TEST_CASE("metrics")
{
    Matrix ref(3, 2), pred(3, 2);
    ref << 3, 0, 0, 4, 0, 0;
    pred << 3, 0, 0, 4, 0, 1;
    CHECK(relative_l2(pred, ref) == doctest::Approx(0.2));
    CHECK(relative_l2(ref, ref) == 0.0);
    // a phase rotation leaves the modulus untouched
    Matrix rot(3, 2);
    rot << 0, 3, -4, 0, 0, 0;
    CHECK(relative_l2_modulus(rot, ref) == 0.0);
    CHECK(relative_l2(rot, ref) > 1.0);
    CHECK(relative_l2_modulus(pred, ref) == doctest::Approx(0.2));
    Vector lam(2), truth(2);
    lam << 2.01, -0.9;
    truth << 2.0, -1.0;
    const Vector ape = absolute_percentage_error(lam, truth);
    CHECK(ape[0] == doctest::Approx(0.5));
    CHECK(ape[1] == doctest::Approx(10.0));
}

TEST_CASE("an inverse run writes consistent, deterministic artifacts")
{
    const auto dir = scratch("inverse");
    const auto cfg = ExperimentConfig::from_json(small_inverse(dir));
    const auto r = run_experiment(cfg);
    CHECK(r.status == "max_iterations");
    CHECK(r.iterations == 25);
    CHECK(std::abs(r.recomputed_loss - r.final_loss) <= 1e-14 * r.final_loss);
    REQUIRE(r.lambda.size() == 3);
    for (Index k = 0; k < 3; ++k)
        CHECK(r.ape[k] == doctest::Approx(100.0 * std::abs(r.lambda[k] - r.lambda_true[k]) / std::abs(r.lambda_true[k])));
    CHECK(r.identified_pde == make_problem("allen-cahn-inverse").describe(r.lambda));
    CHECK(r.condition_violation <= 1e-13);
    REQUIRE(r.rel_l2.has_value());

    double last = std::numeric_limits<double>::infinity();
    for (const auto& rec : r.history.records) {
        if (!rec.accepted) continue;
        CHECK(rec.residual_norm < last);
        last = rec.residual_norm;
    }

    const auto out = dir / "out";
    const auto report = json::parse(std::ifstream(out / "report.json"));
    CHECK(report["final_loss"] == r.final_loss);
    CHECK(report["identified_pde"] == r.identified_pde);
    CHECK(lines(out / "history.jsonl").size() == 26);
    const auto sol = lines(out / "solution.csv");
    CHECK(sol.front() == "x,t,u");
    CHECK(sol.size() == 1 + 21 * 11);

    auto again = ExperimentConfig::from_json(small_inverse(dir));
    again.output_dir = dir / "out2";
    const auto r2 = run_experiment(again);
    CHECK(r2.history == r.history);
    CHECK(r2.W == r.W);
    CHECK(*r2.rel_l2 == *r.rel_l2);
    CHECK(r2.config_hash == r.config_hash);
}

TEST_CASE("a BFGS run records strong-Wolfe steps")
{
    const auto dir = scratch("bfgs");
    auto j = small_forward(dir);
    j["optimizer"] = {{"method", "bfgs"}, {"max_iters", 30}};
    const auto r = run_experiment(ExperimentConfig::from_json(j));
    CHECK(std::abs(r.recomputed_loss - r.final_loss) <= 1e-14 * r.final_loss);
    const BFGSConfig c;
    for (const auto& rec : r.history.records) {
        if (rec.iter == 0) continue;
        CHECK(rec.phi <= rec.phi0 + c.c1 * rec.step_length * rec.dphi0);
        CHECK(std::abs(rec.dphi) <= -c.c2 * rec.dphi0);
    }
}

TEST_CASE("NLS artifacts list both fields")
{
    const auto dir = scratch("nls");
    auto j = small_forward(dir);
    j["problem"] = "nls";
    j["architecture"] = {{"hidden1", 3}, {"hidden2", 3}};
    j["evaluation_grid"] = {32, 5};
    j["reference"] = {{"dt", 1.5707963267948966e-3}};
    j["optimizer"]["max_iters"] = 3;
    const auto r = run_experiment(ExperimentConfig::from_json(j));
    const auto sol = lines(dir / "out" / "solution.csv");
    CHECK(sol.front() == "x,t,v,w");
    CHECK(sol.size() == 1 + 32 * 5);
    CHECK(r.condition_violation <= 1e-13);
}

TEST_CASE("size sweep")
{
    const auto dir = scratch("sweep");
    const auto cfg = ExperimentConfig::from_json(small_forward(dir));
    const std::vector<Index> sizes{3, 4};
    const auto rows = size_sweep(cfg, sizes);
    REQUIRE(rows.size() == 2);
    const auto table = lines(dir / "out" / "table.csv");
    CHECK(table.size() == 3);
    CHECK(table[0] == "network,loss,relative_l2,iterations,time_s,status");
    CHECK(table[1].rfind("NN(2;3;3;1),", 0) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "NN_2_4_4_1" / "report.json"));

    auto single = cfg;
    single.output_dir.clear();
    CHECK(run_experiment(single).final_loss == rows[1].final_loss);

    CHECK_THROWS_AS((void)size_sweep(cfg, std::vector<Index>{}), ConfigError);
}

TEST_CASE("a failing size is recorded and the sweep continues")
{
    const auto dir = scratch("sweepfail");
    auto cfg = ExperimentConfig::from_json(small_forward(dir));
    const std::vector<Index> sizes{0, 3};
    const auto rows = size_sweep(cfg, sizes);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "error");
    CHECK_FALSE(rows[0].message.empty());
    CHECK(rows[1].status == "max_iterations");
    CHECK(lines(dir / "out" / "table.csv").size() == 3);
}

TEST_CASE("derivative self-check")
{
    DerivCheckOptions o;
    o.problems = {"burgers", "allen-cahn-inverse"};
    o.seeds = {1};
    const auto rep = check_derivatives(o);
    CHECK(rep.pass());
    bool saw_lambda = false;
    for (const auto& e : rep.entries) saw_lambda |= e.name.find("coefficient columns") != std::string::npos;
    CHECK(saw_lambda);
}
