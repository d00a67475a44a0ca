#include "doctest.h"

#include <cmath>
#include <random>

#include "mfld/complexity.hpp"
#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/graphs.hpp"
#include "mfld/parallel.hpp"
#include "oracles/oracles.hpp"

using namespace mfld;

TEST_CASE("Gaussian width of simple sets") {
    const auto zero = gw_monte_carlo(GradientSet::explicit_points(Matrix::Zero(1, 3)), 500, 1);
    CHECK(zero.mean == 0.0);
    CHECK(zero.std_error == 0.0);

    Matrix pm(2, 1);
    pm << 1.0, -1.0;
    const auto e = gw_monte_carlo(GradientSet::explicit_points(pm), 100000, 2);
    CHECK(std::abs(e.mean - oracle::half_normal_mean()) <= 3 * e.std_error);
    CHECK(oracle::half_normal_mean() == doctest::Approx(std::sqrt(2.0 / 3.141592653589793)).epsilon(1e-9));

    CHECK_THROWS_AS(gw_monte_carlo(GradientSet::explicit_points(pm), 1, 2), Error);
}

TEST_CASE("complexity of constant and linear functions") {
    CHECK(complexity_of(CubeFunction::constant(5, 1.0), 1000, 3).mean == 0.0);
    Vector theta(3);
    theta << 1.0, -2.0, 0.5;
    const auto e = complexity_of(CubeFunction::linear(theta), 100000, 4);
    // {theta, 0}: E max(<theta, G>, 0) = |theta| E G_+ = |theta| / sqrt(2 pi)
    CHECK(std::abs(e.mean - theta.norm() * 0.3989422804014327) <= 3 * e.std_error);
}

TEST_CASE("complexity agrees with a long reference run") {
    std::mt19937_64 rng(5);
    const CubeFunction f(4, oracle::random_log_density(4, rng));
    const auto a = complexity_of(f, 20000, 11);
    const auto ref = complexity_of(f, 2000000, 12);
    CHECK(std::abs(a.mean - ref.mean) <= 3 * std::hypot(a.std_error, ref.std_error));
}

TEST_CASE("Gaussian width is deterministic and thread independent") {
    std::mt19937_64 rng(6);
    const CubeFunction f(6, oracle::random_log_density(6, rng));
    set_thread_count(1);
    const auto a = complexity_of(f, 3000, 9);
    set_thread_count(3);
    const auto b = complexity_of(f, 3000, 9);
    set_thread_count(0);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("monotone under set inclusion, per draw") {
    std::mt19937_64 rng(7);
    Matrix big = Matrix::Random(30, 4);
    GwOptions opt;
    opt.samples = 2000;
    opt.seed = 77;
    const auto small = gw_per_sample(GradientSet::explicit_points(big.topRows(10)), opt);
    const auto all = gw_per_sample(GradientSet::explicit_points(big), opt);
    for (std::size_t s = 0; s < small.size(); ++s) CHECK(small[s] <= all[s]);
}

TEST_CASE("centered estimator has the same mean") {
    Matrix pts(3, 2);
    pts << 3.0, 3.0, 3.5, 2.5, 2.0, 4.0;
    GwOptions a, b;
    a.samples = b.samples = 200000;
    a.seed = b.seed = 5;
    b.centered = true;
    const auto ea = gw_monte_carlo(GradientSet::explicit_points(pts, false), a);
    const auto eb = gw_monte_carlo(GradientSet::explicit_points(pts, false), b);
    CHECK(std::abs(ea.mean - eb.mean) <= 3 * std::hypot(ea.std_error, eb.std_error));
    CHECK(eb.std_error < ea.std_error);
}

TEST_CASE("subsample mode is labelled a lower estimate") {
    std::mt19937_64 rng(8);
    const CubeFunction f(8, oracle::random_log_density(8, rng));
    GwOptions opt;
    opt.samples = 500;
    opt.seed = 3;
    opt.subsample = 16;
    const auto e = gw_monte_carlo(GradientSet::of_function(f), opt);
    CHECK(e.lower_estimate);
    const auto full = complexity_of(f, 500, 3);
    CHECK(e.mean <= full.mean + 1e-12);
}

TEST_CASE("analytic bounds") {
    CHECK(subgraph_complexity_bound(SimpleGraph::complete(3), 100) == doctest::Approx(3000.0));
    CHECK(subgraph_complexity_bound(SimpleGraph::single_edge(), 4) == doctest::Approx(8.0));
    CHECK(subgraph_complexity_bound(SimpleGraph::complete(4), 9) == doctest::Approx(162.0));

    CHECK(ising_complexity_bound(Matrix::Zero(3, 3), Vector::Zero(3)) == 0.0);
    const IsingModel cw = IsingModel::curie_weiss(10, 1.0);
    CHECK(ising_complexity_bound(cw.A, cw.b) == doctest::Approx(3.0));
    Vector b = Vector::Zero(4);
    b[0] = 2.0;
    CHECK(ising_complexity_bound(Matrix::Zero(4, 4), b) == doctest::Approx(4.0));

    CHECK(ising_lip_bound(Matrix::Zero(3, 3), Vector::Zero(3)) == 0.0);
    CHECK(ising_lip_bound(cw.A, cw.b) == doctest::Approx(0.9));
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    Matrix A = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) A(i, j) = A(j, i) = nd(rng);
    Vector bb(4);
    for (int i = 0; i < 4; ++i) bb[i] = nd(rng);
    double rows = 0;
    for (int i = 0; i < 4; ++i) rows = std::max(rows, A.row(i).cwiseAbs().sum());
    CHECK(ising_lip_bound(A, bb) == doctest::Approx(rows + bb.cwiseAbs().maxCoeff()));

    Matrix diag = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(ising_complexity_bound(diag, Vector::Zero(3)), Error);
}

TEST_CASE("Ising gradient convention and complexity bound") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 4 + rep % 9;
        Matrix A = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) A(i, j) = A(j, i) = nd(rng) / std::sqrt(n);
        Vector b(n);
        for (int i = 0; i < n; ++i) b[i] = 0.5 * nd(rng);
        const IsingModel m{A, b};
        const CubeFunction f = m.table();
        // discrete gradient is A s + b exactly, given the zero diagonal
        for (Vertex y : {Vertex{0}, Vertex{5}, static_cast<Vertex>(cube_size(n) - 1)}) {
            const Vector s = vertex_vector(y, n);
            CHECK((discrete_gradient(f, y) - (A * s + b)).cwiseAbs().maxCoeff() < 1e-12);
        }
        const auto e = complexity_of(f, 1000, 100 + rep);
        CHECK(e.mean <= ising_complexity_bound(A, b) + 3 * e.std_error);
    }
}

TEST_CASE("Sudakov-Fernique direction with shared draws") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 5;
        const auto vals = oracle::random_log_density(n, rng, 1.5);
        const CubeMeasure nu = CubeMeasure::from_log_density(n, vals);
        const CubeFunction f(n, std::vector<double>(nu.log_density().begin(), nu.log_density().end()));
        GwOptions opt;
        opt.samples = 5000;
        opt.seed = 500 + rep;
        const auto a = gw_per_sample(GradientSet::explicit_points(g_table(nu)), opt);
        const auto b = gw_per_sample(GradientSet::of_function(f), opt);
        std::vector<double> d(a.size());
        for (std::size_t s = 0; s < a.size(); ++s) d[s] = a[s] - b[s];
        const auto e = summarize(d);
        CHECK(e.mean <= 3 * e.std_error);
    }
}
