#include "spinn/param_jacobian.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>

#include "spinn/errors.hpp"

namespace spinn {

namespace {

bool present(const ChannelWeights& w, Channel c)
{
    const auto k = static_cast<std::size_t>(channel_index(c));
    return k < w.size() && w[k].size() > 0;
}

const Vector& weight(const ChannelWeights& w, Channel c) { return w[static_cast<std::size_t>(channel_index(c))]; }

Matrix scale_rows(const Matrix& m, const Vector& w) { return (m.array().colwise() * w.array()).matrix(); }

void add_scaled_rows(Matrix& acc, const Matrix& m, const Vector& w)
{
    if (acc.size() == 0) {
        acc = scale_rows(m, w);
    } else {
        acc.array() += m.array().colwise() * w.array();
    }
}

Vector flatten_row_major(const Matrix& m)
{
    const RowMatrix r = m;
    return Eigen::Map<const Vector>(r.data(), r.size());
}

} // namespace

ChannelWeights enforce_weights(const EnforcementSample& enf, const ChannelWeights& enforced)
{
    const int dims = static_cast<int>(enf.p.cols() - 1) / 2;
    const auto p = [&](Channel c) { return enf.p.col(channel_index(c)).array(); };
    ChannelWeights raw(static_cast<std::size_t>(channel_count(dims)));
    const auto accumulate = [&](Channel target, const Eigen::ArrayXd& term) {
        Vector& slot = raw[static_cast<std::size_t>(channel_index(target))];
        if (slot.size() == 0) {
            slot = term.matrix();
        } else {
            slot.array() += term;
        }
    };

    if (present(enforced, Channel::value())) {
        accumulate(Channel::value(), p(Channel::value()) * weight(enforced, Channel::value()).array());
    }
    for (int c = 0; c < dims; ++c) {
        const Channel d = Channel::d(c), dd = Channel::dd(c);
        // u_c = p u~_c + p_c u~ + q_c
        if (present(enforced, d)) {
            const Eigen::ArrayXd w = weight(enforced, d).array();
            accumulate(d, p(Channel::value()) * w);
            accumulate(Channel::value(), p(d) * w);
        }
        // u_cc = p u~_cc + 2 p_c u~_c + p_cc u~ + q_cc
        if (present(enforced, dd)) {
            const Eigen::ArrayXd w = weight(enforced, dd).array();
            accumulate(dd, p(Channel::value()) * w);
            accumulate(d, 2.0 * p(d) * w);
            accumulate(Channel::value(), p(dd) * w);
        }
    }
    return raw;
}

// Row weights pushed back to each layer. For a single row, the contribution to
// the W2 block is H1 (x) P0 + sum_c [H1d_c (x) P1_c + H1dd_c (x) P2_c] and to
// the W1 block X (x) Q + sum_c [Xd_c (x) R1_c + Xdd_c (x) R2_c].
struct ParamDerivKernel::Contractions {
    struct Term {
        const CoordTerms* t = nullptr;
        bool second = false;
        RowMatrix P1, P2, R1, R2;
    };
    RowMatrix P0;  // n x m2
    RowMatrix Q;   // n x m1
    std::vector<Term> terms;
};

ParamDerivKernel::ParamDerivKernel(ForwardTrace trace, std::vector<InputDerivTrace> derivs,
                                   const ParamVector& params)
    : arch_(params.arch()), trace_(std::move(trace)), W2_(params.w2())
{
    const Index n = trace_.X.rows();
    if (trace_.X.cols() != arch_.inputs || trace_.h1.cols() != arch_.hidden1 || trace_.h2.cols() != arch_.hidden2) {
        throw ConsistencyError("forward trace does not match the network architecture");
    }
    for (const auto& d : derivs) {
        if (d.X_d.rows() != n || d.h1_d.cols() != arch_.hidden1 || d.h2_d.cols() != arch_.hidden2) {
            throw ConsistencyError("input-derivative trace does not match the forward trace");
        }
        raw_dims_ = std::max(raw_dims_, d.coord + 1);
    }

    const auto a1 = activation_from_output(trace_.H1, 3);
    const auto a2 = activation_from_output(trace_.H2, 3);
    s1a_ = a1.s1;
    s2a_ = a1.s2;
    s3a_ = a1.s3;
    const Eigen::RowVectorXd w3 = params.w3().transpose();
    A0_ = (a2.s1.array().rowwise() * w3.array()).matrix();

    for (auto& d : derivs) {
        CoordTerms t;
        t.coord = d.coord;
        t.order = d.order;
        t.T1 = s2a_.cwiseProduct(d.h1_d);
        t.Ah = ((a2.s2.array() * d.h2_d.array()).rowwise() * w3.array()).matrix();
        if (d.order == 2) {
            t.T2 = (s3a_.array() * d.h1_d.array().square() + s2a_.array() * d.h1_dd.array()).matrix();
            t.Bh = ((a2.s3.array() * d.h2_d.array().square() + a2.s2.array() * d.h2_dd.array()).rowwise() *
                    w3.array())
                       .matrix();
            t.Bhd = ((2.0 * a2.s2.array() * d.h2_d.array()).rowwise() * w3.array()).matrix();
            t.Xdd = std::move(d.X_dd);
            t.H1dd = std::move(d.H1_dd);
            t.H2dd = std::move(d.H2_dd);
        }
        t.Xd = std::move(d.X_d);
        t.H1d = std::move(d.H1_d);
        t.H2d = std::move(d.H2_d);
        coords_.push_back(std::move(t));
    }
}

const ParamDerivKernel::CoordTerms* ParamDerivKernel::terms_for(int coord) const
{
    for (const auto& t : coords_) {
        if (t.coord == coord) return &t;
    }
    return nullptr;
}

ParamDerivKernel::Contractions ParamDerivKernel::contract(const ChannelWeights& w) const
{
    const Index n = rows();
    for (const auto& v : w) {
        if (v.size() != 0 && v.size() != n) throw ShapeError("channel weight length differs from the row count");
    }
    for (std::size_t k = 1; k < w.size(); ++k) {
        if (w[k].size() == 0) continue;
        const Channel c = channel_at(static_cast<int>(k));
        const CoordTerms* t = terms_for(c.coord);
        if (t == nullptr || t->order < c.order) {
            throw ConfigError("parameter derivatives need an order-" + std::to_string(c.order) +
                              " input trace for coordinate " + std::to_string(c.coord));
        }
    }

    Contractions r;
    Matrix P0;
    if (present(w, Channel::value())) P0 = scale_rows(A0_, weight(w, Channel::value()));
    for (const auto& t : coords_) {
        const Channel d = Channel::d(t.coord), dd = Channel::dd(t.coord);
        const bool has_d = present(w, d);
        const bool has_dd = t.order == 2 && present(w, dd);
        if (!has_d && !has_dd) continue;
        Contractions::Term term;
        term.t = &t;
        term.second = has_dd;
        Matrix p1;
        if (has_d) {
            add_scaled_rows(P0, t.Ah, weight(w, d));
            add_scaled_rows(p1, A0_, weight(w, d));
        }
        if (has_dd) {
            add_scaled_rows(P0, t.Bh, weight(w, dd));
            add_scaled_rows(p1, t.Bhd, weight(w, dd));
            term.P2 = scale_rows(A0_, weight(w, dd));
        }
        term.P1 = p1;
        r.terms.push_back(std::move(term));
    }
    if (P0.size() == 0) P0 = Matrix::Zero(n, arch_.hidden2);

    // Back through W2 (E = P W2^T), then through the layer-1 activation.
    const Matrix W2t = W2_.transpose();
    Matrix Q = (P0 * W2t).cwiseProduct(s1a_);
    for (auto& term : r.terms) {
        const Matrix E1 = term.P1 * W2t;
        Q += E1.cwiseProduct(term.t->T1);
        Matrix R1 = E1.cwiseProduct(s1a_);
        if (term.second) {
            const Matrix E2 = term.P2 * W2t;
            Q += E2.cwiseProduct(term.t->T2);
            R1 += 2.0 * E2.cwiseProduct(term.t->T1);
            term.R2 = E2.cwiseProduct(s1a_);
        }
        term.R1 = R1;
    }
    r.P0 = P0;
    r.Q = Q;
    return r;
}

RowMatrix ParamDerivKernel::weighted_rows(const ChannelWeights& w) const
{
    const Index n = rows(), a = arch_.inputs, m1 = arch_.hidden1, m2 = arch_.hidden2;
    const Contractions c = contract(w);

    Matrix W3rows;
    if (present(w, Channel::value())) W3rows = scale_rows(trace_.H2, weight(w, Channel::value()));
    for (const auto& term : c.terms) {
        const int k = term.t->coord;
        if (present(w, Channel::d(k))) add_scaled_rows(W3rows, term.t->H2d, weight(w, Channel::d(k)));
        if (term.second) add_scaled_rows(W3rows, term.t->H2dd, weight(w, Channel::dd(k)));
    }
    if (W3rows.size() == 0) W3rows = Matrix::Zero(n, m2);

    const Index oB1 = a * m1, oW2 = oB1 + m1, oB2 = oW2 + m1 * m2, oW3 = oB2 + m2, oB3 = oW3 + m2;
    const bool has_value = present(w, Channel::value());
    RowMatrix J(n, cols());

#pragma omp parallel for schedule(static)
    for (Index i = 0; i < n; ++i) {
        auto row = J.row(i);
        for (Index l = 0; l < a; ++l) {
            auto seg = row.segment(l * m1, m1);
            seg = trace_.X(i, l) * c.Q.row(i);
            for (const auto& term : c.terms) {
                const double xd = term.t->Xd(i, l);
                if (xd != 0.0) seg += xd * term.R1.row(i);
                if (term.second) {
                    const double xdd = term.t->Xdd(i, l);
                    if (xdd != 0.0) seg += xdd * term.R2.row(i);
                }
            }
        }
        row.segment(oB1, m1) = c.Q.row(i);
        for (Index j = 0; j < m1; ++j) {
            auto seg = row.segment(oW2 + j * m2, m2);
            seg = trace_.H1(i, j) * c.P0.row(i);
            for (const auto& term : c.terms) {
                seg += term.t->H1d(i, j) * term.P1.row(i);
                if (term.second) seg += term.t->H1dd(i, j) * term.P2.row(i);
            }
        }
        row.segment(oB2, m2) = c.P0.row(i);
        row.segment(oW3, m2) = W3rows.row(i);
        row[oB3] = has_value ? weight(w, Channel::value())[i] : 0.0;
    }
    return J;
}

Vector ParamDerivKernel::weighted_sum(const ChannelWeights& w) const
{
    const Index a = arch_.inputs, m1 = arch_.hidden1, m2 = arch_.hidden2;
    const Contractions c = contract(w);

    Matrix gW1 = trace_.X.transpose() * c.Q;
    Matrix gW2 = trace_.H1.transpose() * c.P0;
    Vector gW3 = Vector::Zero(m2);
    double gB3 = 0.0;
    if (present(w, Channel::value())) {
        gW3 += trace_.H2.transpose() * weight(w, Channel::value());
        gB3 = weight(w, Channel::value()).sum();
    }
    for (const auto& term : c.terms) {
        const int k = term.t->coord;
        gW1 += term.t->Xd.transpose() * term.R1;
        gW2 += term.t->H1d.transpose() * term.P1;
        if (present(w, Channel::d(k))) gW3 += term.t->H2d.transpose() * weight(w, Channel::d(k));
        if (term.second) {
            gW1 += term.t->Xdd.transpose() * term.R2;
            gW2 += term.t->H1dd.transpose() * term.P2;
            gW3 += term.t->H2dd.transpose() * weight(w, Channel::dd(k));
        }
    }

    Vector g(cols());
    Index o = 0;
    g.segment(o, a * m1) = flatten_row_major(gW1);
    o += a * m1;
    g.segment(o, m1) = c.Q.colwise().sum().transpose();
    o += m1;
    g.segment(o, m1 * m2) = flatten_row_major(gW2);
    o += m1 * m2;
    g.segment(o, m2) = c.P0.colwise().sum().transpose();
    o += m2;
    g.segment(o, m2) = gW3;
    o += m2;
    g[o] = gB3;
    return g;
}

ParamDerivs::ParamDerivs(Architecture arch, int raw_dims)
    : arch_(arch), slots_(static_cast<std::size_t>(channel_count(raw_dims)))
{
}

bool ParamDerivs::has(Channel c) const
{
    const auto k = static_cast<std::size_t>(channel_index(c));
    return k < slots_.size() && slots_[k].has_value();
}

const RowMatrix& ParamDerivs::operator[](Channel c) const
{
    if (!has(c)) throw ConfigError("parameter derivatives lack channel slot " + std::to_string(channel_index(c)));
    return *slots_[static_cast<std::size_t>(channel_index(c))];
}

Eigen::Block<const RowMatrix> ParamDerivs::block(Channel c, Block b) const
{
    if (b == Block::Lambda) throw ConfigError("network derivatives carry no lambda block");
    const RowMatrix& m = (*this)[c];
    const auto r = block_range(arch_, b);
    return m.middleCols(r.offset, r.size);
}

void ParamDerivs::set(Channel c, RowMatrix m) { slots_.at(static_cast<std::size_t>(channel_index(c))) = std::move(m); }

ParamDerivs param_derivs(const ParamDerivKernel& kernel, const EnforcementSample* enf, std::span<const Channel> channels)
{
    const auto closed = close_channels(channels);
    int dims = kernel.raw_dims();
    if (enf != nullptr) dims = static_cast<int>(enf->p.cols() - 1) / 2;
    for (Channel c : closed) dims = std::max(dims, c.order == 0 ? 0 : c.coord + 1);

    ParamDerivs out(kernel.arch(), dims);
    for (Channel c : closed) {
        ChannelWeights one(static_cast<std::size_t>(channel_count(dims)));
        one[static_cast<std::size_t>(channel_index(c))] = Vector::Ones(kernel.rows());
        out.set(c, kernel.weighted_rows(enf != nullptr ? enforce_weights(*enf, one) : one));
    }
    return out;
}

ParamDerivs param_derivs(const ForwardTrace& trace, std::span<const InputDerivTrace> derivs,
                         const ParamVector& params, const EnforcementSample& enf, std::span<const Channel> channels)
{
    const ParamDerivKernel kernel(trace, std::vector<InputDerivTrace>(derivs.begin(), derivs.end()), params);
    return param_derivs(kernel, &enf, channels);
}

FieldEval evaluate_network(const ParamVector& net, const FeatureMap& map, const Matrix& raw,
                           std::shared_ptr<const EnforcementSample> enf, std::span<const Channel> channels,
                           bool with_kernel)
{
    if (!enf) throw ConfigError("enforcement sample missing");
    if (enf->p.rows() != raw.rows()) throw ShapeError("enforcement sample was taken at a different point set");
    const auto closed = close_channels(channels);
    ForwardTrace trace = forward_trace(net, map.features(raw));
    auto derivs = input_derivatives(trace, net, map, raw, closed);

    FieldEval f;
    f.net = net;
    f.bundle = enforce_bundle(trace, derivs, *enf, closed);
    f.enf = std::move(enf);
    if (with_kernel) f.kernel.emplace(std::move(trace), std::move(derivs), net);
    return f;
}

namespace {

std::vector<DerivBundle> bundles_of(std::span<const FieldEval> fields)
{
    std::vector<DerivBundle> b;
    b.reserve(fields.size());
    for (const auto& f : fields) b.push_back(f.bundle);
    return b;
}

bool any_weight(const ChannelWeights& w)
{
    for (const auto& v : w) {
        if (v.size() != 0) return true;
    }
    return false;
}

void check_fields(const ProblemSpec& spec, std::span<const FieldEval> fields, bool need_kernel)
{
    if (static_cast<int>(fields.size()) != spec.fields()) {
        throw ShapeError("problem has " + std::to_string(spec.fields()) + " fields, got " +
                         std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
        if (need_kernel && !f.kernel) throw ConfigError("field evaluation lacks parameter derivatives");
        if (f.bundle.raw_dims() != spec.raw_dims()) throw ShapeError("field evaluation has the wrong dimension");
    }
}

Index row_count(const FieldEval& f) { return f.bundle[Channel::value()].size(); }

} // namespace

Vector assemble_residual(const ProblemSpec& spec, std::span<const FieldEval> fields, const Vector& lambda,
                         const Vector* observed)
{
    check_fields(spec, fields, false);
    const Index n = row_count(fields[0]);
    const auto bundles = bundles_of(fields);
    const OperatorEval e = spec.op(bundles, lambda, false);
    const Index rows = n * spec.equations + (observed != nullptr ? n : 0);
    Vector F(rows);
    for (int q = 0; q < spec.equations; ++q) F.segment(q * n, n) = e.residual[static_cast<std::size_t>(q)];
    if (observed != nullptr) {
        if (observed->size() != n) throw ShapeError("observed data length differs from the point count");
        F.segment(spec.equations * n, n) = bundles[0][Channel::value()] - *observed;
    }
    return F;
}

namespace {

ResidualJacobian assemble(const ProblemSpec& spec, std::span<const FieldEval> fields, const Vector& lambda,
                          const Vector* observed)
{
    check_fields(spec, fields, true);
    const Index n = row_count(fields[0]);
    const Index n_lambda = observed != nullptr ? lambda.size() : 0;
    std::vector<Index> offset{0};
    for (const auto& f : fields) offset.push_back(offset.back() + f.net.size());
    const Index net_cols = offset.back();
    const Index pde_rows = n * spec.equations;
    const Index rows = pde_rows + (observed != nullptr ? n : 0);

    const auto bundles = bundles_of(fields);
    const OperatorEval e = spec.op(bundles, lambda, true);

    ResidualJacobian out;
    out.F.resize(rows);
    out.J = RowMatrix::Zero(rows, net_cols + n_lambda);
    for (int q = 0; q < spec.equations; ++q) {
        const auto qs = static_cast<std::size_t>(q);
        out.F.segment(q * n, n) = e.residual[qs];
        for (std::size_t f = 0; f < fields.size(); ++f) {
            const ChannelWeights& partial = e.partial[qs][f];
            if (!any_weight(partial)) continue;
            const auto& fe = fields[f];
            out.J.block(q * n, offset[f], n, offset[f + 1] - offset[f]) =
                fe.kernel->weighted_rows(enforce_weights(*fe.enf, partial));
        }
        for (Index r = 0; r < n_lambda; ++r) {
            const Vector& col = e.lambda_partial[qs][static_cast<std::size_t>(r)];
            if (col.size() != 0) out.J.block(q * n, net_cols + r, n, 1) = col;
        }
    }
    if (observed != nullptr) {
        if (observed->size() != n) throw ShapeError("observed data length differs from the point count");
        const auto& fe = fields[0];
        ChannelWeights value(static_cast<std::size_t>(channel_count(spec.raw_dims())));
        value[0] = Vector::Ones(n);
        out.F.segment(pde_rows, n) = bundles[0][Channel::value()] - *observed;
        out.J.block(pde_rows, 0, n, offset[1]) = fe.kernel->weighted_rows(enforce_weights(*fe.enf, value));
    }
    return out;
}

} // namespace

ResidualJacobian assemble_forward_jacobian(const ProblemSpec& spec, std::span<const FieldEval> fields)
{
    return assemble(spec, fields, Vector(), nullptr);
}

ResidualJacobian assemble_inverse_jacobian(const ProblemSpec& spec, std::span<const FieldEval> fields,
                                           const Vector& lambda, const Vector& observed)
{
    if (lambda.size() != spec.lambda_true.size()) throw ShapeError("lambda has the wrong length");
    return assemble(spec, fields, lambda, &observed);
}

Vector gradient_from_jacobian(const RowMatrix& J, const Vector& F, Index n)
{
    if (J.rows() != F.size()) throw ShapeError("Jacobian rows differ from residual length");
    if (n <= 0) throw ShapeError("point count must be positive");
    return (2.0 / static_cast<double>(n)) * (J.transpose() * F);
}

Vector gradient_from_blocks(const RowMatrix& J, const Vector& F, Index n, Index pde_rows, Index n_lambda)
{
    if (J.rows() != F.size() || pde_rows > J.rows() || n_lambda > J.cols()) {
        throw ShapeError("block layout does not fit the Jacobian");
    }
    const double s = 2.0 / static_cast<double>(n);
    const Index m = J.cols() - n_lambda, data_rows = J.rows() - pde_rows;
    Vector G(J.cols());
    const auto F1 = F.head(pde_rows);
    const auto F2 = F.tail(data_rows);
    G.head(m) = s * (J.topLeftCorner(pde_rows, m).transpose() * F1 + J.bottomLeftCorner(data_rows, m).transpose() * F2);
    G.tail(n_lambda) = s * (J.topRightCorner(pde_rows, n_lambda).transpose() * F1);
    return G;
}

Vector assemble_gradient(const ProblemSpec& spec, std::span<const FieldEval> fields, const Vector& lambda,
                         const Vector* observed, const Vector& F, Index n)
{
    check_fields(spec, fields, true);
    const Index pts = row_count(fields[0]);
    const Index n_lambda = observed != nullptr ? lambda.size() : 0;
    Index total = n_lambda;
    for (const auto& f : fields) total += f.net.size();
    const Index expected = pts * spec.equations + (observed != nullptr ? pts : 0);
    if (F.size() != expected) throw ShapeError("residual vector has the wrong length");

    const auto bundles = bundles_of(fields);
    const OperatorEval e = spec.op(bundles, lambda, true);
    Vector G = Vector::Zero(total);
    Index off = 0;
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto& fe = fields[f];
        const Index m = fe.net.size();
        ChannelWeights acc(static_cast<std::size_t>(channel_count(spec.raw_dims())));
        for (int q = 0; q < spec.equations; ++q) {
            const auto qs = static_cast<std::size_t>(q);
            const auto Fq = F.segment(q * pts, pts);
            for (std::size_t k = 0; k < acc.size(); ++k) {
                const Vector& p = e.partial[qs][f][k];
                if (p.size() == 0) continue;
                if (acc[k].size() == 0) {
                    acc[k] = p.cwiseProduct(Fq);
                } else {
                    acc[k] += p.cwiseProduct(Fq);
                }
            }
        }
        if (observed != nullptr && f == 0) {
            const auto F2 = F.segment(spec.equations * pts, pts);
            if (acc[0].size() == 0) {
                acc[0] = F2;
            } else {
                acc[0] += F2;
            }
        }
        if (any_weight(acc)) G.segment(off, m) = fe.kernel->weighted_sum(enforce_weights(*fe.enf, acc));
        off += m;
    }
    for (Index r = 0; r < n_lambda; ++r) {
        double s = 0.0;
        for (int q = 0; q < spec.equations; ++q) {
            const Vector& col = e.lambda_partial[static_cast<std::size_t>(q)][static_cast<std::size_t>(r)];
            if (col.size() != 0) s += col.dot(F.segment(q * pts, pts));
        }
        G[off + r] = s;
    }
    return (2.0 / static_cast<double>(n)) * G;
}

void write_jacobian_csv(const RowMatrix& J, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path.string());
    out << "# rows=" << J.rows() << " cols=" << J.cols() << '\n' << std::setprecision(17);
    for (Index i = 0; i < J.rows(); ++i) {
        for (Index j = 0; j < J.cols(); ++j) out << (j ? "," : "") << J(i, j);
        out << '\n';
    }
}

void write_jacobian_binary(const RowMatrix& J, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string());
    const char magic[8] = {'S', 'P', 'I', 'N', 'N', 'J', 'A', 'C'};
    const std::uint64_t shape[2] = {static_cast<std::uint64_t>(J.rows()), static_cast<std::uint64_t>(J.cols())};
    out.write(magic, sizeof magic);
    out.write(reinterpret_cast<const char*>(shape), sizeof shape);
    out.write(reinterpret_cast<const char*>(J.data()), static_cast<std::streamsize>(J.size() * sizeof(double)));
}

RowMatrix read_jacobian_binary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    char magic[8];
    std::uint64_t shape[2] = {0, 0};
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(shape), sizeof shape);
    if (!in || std::string(magic, 8) != "SPINNJAC") throw ConfigError("not a Jacobian dump: " + path.string());
    RowMatrix J(static_cast<Index>(shape[0]), static_cast<Index>(shape[1]));
    in.read(reinterpret_cast<char*>(J.data()), static_cast<std::streamsize>(J.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated Jacobian dump: " + path.string());
    return J;
}

} // namespace spinn
