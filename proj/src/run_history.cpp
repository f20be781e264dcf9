#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "spinn/errors.hpp"
#include "spinn/optim.hpp"

namespace spinn {

std::string_view stop_reason_name(StopReason r) noexcept
{
    switch (r) {
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::ResidualTolerance: return "residual_tolerance";
    case StopReason::StepTolerance: return "step_tolerance";
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::RejectLimit: return "reject_limit";
    case StopReason::LineSearchFailure: return "line_search_failure";
    case StopReason::NonFiniteStart: return "non_finite_start";
    }
    return "unknown";
}

namespace {

nlohmann::json number(double v)
{
    if (std::isfinite(v)) return v;
    return nullptr;
}

double read_number(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    return v.is_null() ? std::nan("") : v.get<double>();
}

nlohmann::json to_json(const IterationRecord& r)
{
    nlohmann::json j;
    j["iter"] = r.iter;
    j["loss"] = number(r.loss);
    j["residual_norm"] = number(r.residual_norm);
    j["grad_norm"] = number(r.grad_norm);
    j["kappa"] = number(r.kappa);
    j["step_norm"] = number(r.step_norm);
    j["accepted"] = r.accepted;
    j["rejects"] = r.rejects;
    j["lambda"] = std::vector<double>(r.lambda.data(), r.lambda.data() + r.lambda.size());
    j["residual_evals"] = r.residual_evals;
    j["jacobian_evals"] = r.jacobian_evals;
    j["gradient_evals"] = r.gradient_evals;
    j["step_length"] = number(r.step_length);
    j["phi0"] = number(r.phi0);
    j["dphi0"] = number(r.dphi0);
    j["phi"] = number(r.phi);
    j["dphi"] = number(r.dphi);
    return j;
}

IterationRecord from_json(const nlohmann::json& j)
{
    IterationRecord r;
    r.iter = j.at("iter").get<int>();
    r.loss = read_number(j, "loss");
    r.residual_norm = read_number(j, "residual_norm");
    r.grad_norm = read_number(j, "grad_norm");
    r.kappa = read_number(j, "kappa");
    r.step_norm = read_number(j, "step_norm");
    r.accepted = j.at("accepted").get<bool>();
    r.rejects = j.at("rejects").get<int>();
    const auto lam = j.at("lambda").get<std::vector<double>>();
    r.lambda = Eigen::Map<const Vector>(lam.data(), static_cast<Index>(lam.size()));
    r.residual_evals = j.at("residual_evals").get<long>();
    r.jacobian_evals = j.at("jacobian_evals").get<long>();
    r.gradient_evals = j.at("gradient_evals").get<long>();
    r.step_length = read_number(j, "step_length");
    r.phi0 = read_number(j, "phi0");
    r.dphi0 = read_number(j, "dphi0");
    r.phi = read_number(j, "phi");
    r.dphi = read_number(j, "dphi");
    return r;
}

} // namespace

void RunHistory::write_jsonl(std::ostream& out, int stride) const
{
    if (stride < 1) throw ConfigError("history stride must be at least 1");
    for (std::size_t k = 0; k < records.size(); ++k) {
        if (k % static_cast<std::size_t>(stride) == 0 || k + 1 == records.size()) out << to_json(records[k]).dump() << '\n';
    }
}

RunHistory RunHistory::read_jsonl(std::istream& in)
{
    RunHistory h;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        h.records.push_back(from_json(nlohmann::json::parse(line)));
    }
    return h;
}

std::string RunHistory::serialized() const
{
    std::ostringstream s;
    s.precision(17);
    write_jsonl(s);
    return s.str();
}

} // namespace spinn
