#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "spinn/errors.hpp"
#include "spinn/network.hpp"

using namespace spinn;

TEST_CASE("parameter counts of the benchmark architectures")
{
    CHECK(Architecture{2, 25, 25}.param_count() == 751);
    CHECK(Architecture{3, 25, 25}.param_count() == 776);
    CHECK(ParamVector(Architecture{3, 25, 25}, 2).size() == 778);
    CHECK(ParamVector(Architecture{2, 25, 25}, 3).size() == 754);
    CHECK(2 * Architecture{3, 25, 25}.param_count() == 1552);
    CHECK(init_params({2, 25, 25}, 0, Vector(), 7).size() == 751);
}

TEST_CASE("block ranges tile the parameter vector in order")
{
    const Architecture a{3, 4, 5};
    Index next = 0;
    for (Block b : {Block::W1, Block::B1, Block::W2, Block::B2, Block::W3, Block::B3, Block::Lambda}) {
        const auto r = block_range(a, b, 2);
        CHECK(r.offset == next);
        next += r.size;
    }
    CHECK(next == a.param_count() + 2);
    CHECK(block_range(a, Block::W2).size == 20);
}

TEST_CASE("init_params is deterministic, Glorot-bounded, zero-bias")
{
    const Architecture a{2, 6, 7};
    const Vector lam0 = Vector::LinSpaced(3, 1.0, 3.0);
    const auto p = init_params(a, 3, lam0, 11);
    CHECK(p == init_params(a, 3, lam0, 11));
    CHECK_FALSE(p == init_params(a, 3, lam0, 12));
    CHECK(p.b1().isZero());
    CHECK(p.b2().isZero());
    CHECK(p.b3() == 0.0);
    CHECK(p.lambda() == lam0);
    CHECK(p.w1().cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 8.0));
    CHECK(p.w2().cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 13.0));
    CHECK(p.w3().cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 8.0));
    CHECK_THROWS_AS((void)init_params(a, 3, Vector::Zero(2), 1), ShapeError);
}

TEST_CASE("flatten and unflatten round-trip exactly")
{
    std::mt19937_64 rng(5);
    for (int k = 0; k < 1000; ++k) {
        const Architecture a{1 + Index(rng() % 4), 1 + Index(rng() % 6), 1 + Index(rng() % 6)};
        const Index nl = Index(rng() % 4);
        const auto p = oracle::random_params(a, rng(), 3.0, nl);
        const auto q = ParamVector::unflatten(a, nl, p.flatten());
        REQUIRE(q == p);
    }
}

TEST_CASE("row-major block views")
{
    const Architecture a{2, 3, 2};
    ParamVector p(a);
    std::iota(p.values().data(), p.values().data() + p.size(), 0.0);
    CHECK(p.w1()(0, 1) == 1.0);
    CHECK(p.w1()(1, 0) == 3.0);
    CHECK(p.b1()[0] == 6.0);
    CHECK(p.w2()(2, 1) == 14.0);
    CHECK(p.b3() == p.size() - 1.0);
}

TEST_CASE("forward_trace on trivial networks")
{
    const Architecture a{2, 3, 4};
    ParamVector p(a);
    p.b3() = 0.7;
    const Matrix X = Matrix::Random(9, 2);
    CHECK((forward_trace(p, X).u_tilde.array() == 0.7).all());

    auto q = oracle::random_params(a, 3);
    q.w3().setZero();
    q.b3() = 0.0;
    CHECK(forward_trace(q, X).u_tilde.isZero(0.0));
}

TEST_CASE("forward_trace matches a scalar-loop evaluation")
{
    const Architecture a{2, 3, 3};
    const auto p = oracle::random_params(a, 17);
    const Matrix X = Matrix::Random(50, 2);
    const auto tr = forward_trace(p, X);
    for (Index i = 0; i < X.rows(); ++i) {
        const Eigen::RowVectorXd row = X.row(i);
        CHECK(std::abs(tr.u_tilde[i] - oracle::scalar_network(p, row.data())) <= 1e-14);
    }
    CHECK(tr.H1.isApprox(tr.h1.array().tanh().matrix()));
}

TEST_CASE("forward_trace is row-separable")
{
    const Architecture a{3, 5, 4};
    const auto p = oracle::random_params(a, 2);
    const Matrix X = Matrix::Random(40, 3);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(40);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 40, std::mt19937(3));
    const auto t0 = forward_trace(p, X);
    const auto t1 = forward_trace(p, perm * X);
    CHECK(t1.h1 == perm * t0.h1);
    CHECK(t1.H2 == perm * t0.H2);
    CHECK(t1.u_tilde == perm * t0.u_tilde);
}

TEST_CASE("forward_trace rejects mismatched input width")
{
    const auto p = oracle::random_params({2, 3, 3}, 1);
    CHECK_THROWS_AS((void)forward_trace(p, Matrix::Zero(4, 3)), ShapeError);
    CHECK_THROWS_AS(Architecture({0, 3, 3}).validate(), ShapeError);
}

TEST_CASE("activation derivatives")
{
    const auto e = activation_eval(Matrix::Zero(1, 1), 3);
    CHECK(e.s0(0, 0) == 0.0);
    CHECK(e.s1(0, 0) == 1.0);
    CHECK(e.s2(0, 0) == 0.0);
    CHECK(e.s3(0, 0) == -2.0);

    const Matrix h = 2.0 * Matrix::Random(100, 1);
    const double dh = 1e-6;
    const auto c = activation_eval(h, 3);
    const auto p = activation_eval(h.array() + dh, 3);
    const auto m = activation_eval(h.array() - dh, 3);
    CHECK(oracle::rel_err(c.s1, (p.s0 - m.s0) / (2 * dh)) <= 1e-8);
    CHECK(oracle::rel_err(c.s2, (p.s1 - m.s1) / (2 * dh)) <= 1e-8);
    CHECK(oracle::rel_err(c.s3, (p.s2 - m.s2) / (2 * dh)) <= 1e-6);
    CHECK(c.s1.isApprox((1.0 - c.s0.array().square()).matrix()));

    const auto f = activation_from_output(c.s0, 3);
    CHECK(f.s3 == c.s3);
    CHECK_THROWS_AS((void)activation_eval(h, 4), UnsupportedOrder);
}
