#include <algorithm>
#include <map>
#include <random>

#include "spinn/experiment.hpp"

namespace spinn {

bool DerivCheckReport::pass() const noexcept
{
    return std::all_of(entries.begin(), entries.end(), [](const DerivCheckEntry& e) { return e.pass(); });
}

namespace {

// max |a - b| / max |b| over all entries.
double rel_err(const Eigen::Ref<const Matrix>& analytic, const Eigen::Ref<const Matrix>& fd)
{
    const double scale = fd.cwiseAbs().maxCoeff();
    const double diff = (analytic - fd).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

class Collector {
public:
    void add(const std::string& name, double err, double tol)
    {
        auto [it, fresh] = index_.try_emplace(name, entries_.size());
        if (fresh) entries_.push_back({name, err, tol});
        else entries_[it->second].max_rel_err = std::max(entries_[it->second].max_rel_err, err);
    }
    std::vector<DerivCheckEntry> take() { return std::move(entries_); }

private:
    std::map<std::string, std::size_t> index_;
    std::vector<DerivCheckEntry> entries_;
};

Matrix random_points(const ProblemSpec& spec, Index n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    Matrix X(n, spec.raw_dims());
    for (Index i = 0; i < n; ++i) {
        for (int c = 0; c < spec.raw_dims(); ++c) X(i, c) = spec.lower[c] + (spec.upper[c] - spec.lower[c]) * U(rng);
    }
    return X;
}

template <class F>
Matrix fd_columns(const Vector& W, double h, Index rows, F&& f)
{
    Matrix out(rows, W.size());
    Vector Wp = W;
    for (Index k = 0; k < W.size(); ++k) {
        Wp[k] = W[k] + h;
        const Vector fp = f(Wp);
        Wp[k] = W[k] - h;
        const Vector fm = f(Wp);
        Wp[k] = W[k];
        out.col(k) = (fp - fm) / (2.0 * h);
    }
    return out;
}

void check_problem(const std::string& name, std::uint64_t seed, const DerivCheckOptions& opt, Collector& out)
{
    const ProblemSpec spec = make_problem(name);
    const Architecture arch{spec.features.feature_dims(), opt.hidden, opt.hidden};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    CollocationSet cs;
    cs.points = random_points(spec, opt.points, rng);
    cs.seed = seed;
    if (spec.mode == Mode::Inverse) cs.observed = Vector::NullaryExpr(opt.points, [&] { return U(rng); });
    const PinnSystem sys(spec, arch, cs);

    // Glorot start plus a shake so the biases are not all zero.
    const Vector lambda0 = spec.n_lambda() > 0 ? Vector(1.3 * spec.lambda_true) : Vector();
    Vector W = sys.initial_params(seed, lambda0);
    W += 0.3 * Vector::NullaryExpr(W.size(), [&] { return U(rng); });
    const auto parts = sys.split(W);
    const Matrix& raw = cs.points;
    const auto channels = close_channels(spec.channels);

    for (int f = 0; f < spec.fields(); ++f) {
        const ParamVector& net = parts.nets[static_cast<std::size_t>(f)];
        const ForwardTrace trace = forward_trace(net, spec.features.features(raw));
        const auto raw_value = [&](const Matrix& pts) { return forward_trace(net, spec.features.features(pts)).u_tilde; };

        for (int c = 0; c < spec.raw_dims(); ++c) {
            const InputDerivTrace d = input_derivative(trace, net, spec.features, raw, c, 2);
            Matrix plus = raw, minus = raw;
            plus.col(c).array() += opt.step;
            minus.col(c).array() -= opt.step;
            const Vector fd1 = (raw_value(plus) - raw_value(minus)) / (2.0 * opt.step);
            const double h2 = 1e-4;
            plus = raw;
            minus = raw;
            plus.col(c).array() += h2;
            minus.col(c).array() -= h2;
            const Vector fd2 = (raw_value(plus) - 2.0 * trace.u_tilde + raw_value(minus)) / (h2 * h2);
            out.add(name + ": input derivative, first order", rel_err(d.u_d, fd1), 1e-7);
            out.add(name + ": input derivative, second order", rel_err(d.u_dd, fd2), 1e-5);
        }

        const auto derivs = input_derivatives(trace, net, spec.features, raw, channels);
        const EnforcementSample enf = sample_enforcement(spec.enforcement[static_cast<std::size_t>(f)], raw, channels);
        const ParamDerivs pd = param_derivs(trace, derivs, net, enf, channels);
        for (const Channel ch : channels) {
            const Matrix fd = fd_columns(net.flatten(), opt.step, opt.points, [&](const Vector& v) {
                const auto p = ParamVector::unflatten(arch, 0, v);
                return Vector(evaluate_field(spec, f, p, raw, channels)[ch]);
            });
            const std::string field = spec.fields() > 1 ? " of " + spec.field_names[static_cast<std::size_t>(f)] : "";
            out.add(name + ": parameter derivative " + channel_name(ch, spec.coord_names) + field, rel_err(pd[ch], fd),
                    1e-5);
        }
    }

    const auto rj = sys.residual_jacobian(W);
    const Matrix fdJ = fd_columns(W, opt.step, rj.F.size(), [&](const Vector& v) { return sys.residual(v); });
    const Index m_net = W.size() - sys.n_lambda();
    out.add(name + ": residual Jacobian, network columns", rel_err(rj.J.leftCols(m_net), fdJ.leftCols(m_net)), 1e-5);
    if (sys.inverse()) {
        out.add(name + ": residual Jacobian, coefficient columns",
                rel_err(rj.J.rightCols(sys.n_lambda()), fdJ.rightCols(sys.n_lambda())), 1e-5);
    }

    const Matrix fdg = fd_columns(W, opt.step, 1, [&](const Vector& v) { return Vector::Constant(1, sys.loss(v)); });
    out.add(name + ": loss gradient", rel_err(sys.gradient(W).transpose(), fdg), 1e-6);
}

} // namespace

DerivCheckReport check_derivatives(const DerivCheckOptions& opt)
{
    const auto problems = opt.problems.empty() ? problem_names() : opt.problems;
    Collector c;
    for (const auto& p : problems) {
        for (const auto seed : opt.seeds) check_problem(p, seed, opt, c);
    }
    return {c.take()};
}

} // namespace spinn
