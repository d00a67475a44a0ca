#include "doctest.h"

#include <cmath>
#include <memory>
#include <random>

#include "mfld/complexity.hpp"
#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/graphs.hpp"
#include "mfld/meanfield.hpp"
#include "oracles/oracles.hpp"

using namespace mfld;

namespace {

MeanFieldProblem table_problem(const CubeFunction& f, double p, std::uint64_t seed = 1, int restarts = 8) {
    MeanFieldProblem prob;
    prob.f = std::make_shared<TableObjective>(f);
    prob.p = p;
    prob.options.seed = seed;
    prob.options.restarts = restarts;
    return prob;
}

CubeFunction sum_function(int n) {
    return CubeFunction::tabulate(n, [n](Vertex y) {
        double s = 0;
        for (int i = 0; i < n; ++i) s += spin(y, i);
        return s;
    });
}

// E[T(G)/N] for independent edges with probabilities q, by listing triangles
double triangle_mean(int N, const std::vector<double>& q) {
    double s = 0;
    for (int a = 0; a < N; ++a)
        for (int b = a + 1; b < N; ++b)
            for (int c = b + 1; c < N; ++c) s += q[edge_index(N, a, b)] * q[edge_index(N, a, c)] * q[edge_index(N, b, c)];
    return s / N;
}

}  // namespace

TEST_CASE("expectation under a product measure") {
    std::mt19937_64 rng(1);
    const CubeFunction f(5, oracle::random_log_density(5, rng));
    for (Vertex y : {Vertex{0}, Vertex{7}, Vertex{31}}) CHECK(expect_under_product(f, vertex_vector(y, 5)) == doctest::Approx(f(y)));
    double mean = 0;
    for (double v : f.values()) mean += v / 32;
    CHECK(expect_under_product(f, Vector::Zero(5)) == doctest::Approx(mean));

    // triangle f at N = 4 against product sampling
    const CubeFunction tri = model_table(SubgraphModel::triangle(4));
    const Vector m = Vector::Constant(6, 0.3);
    std::bernoulli_distribution coin(0.65);
    double s = 0, s2 = 0;
    const int draws = 200000;
    for (int k = 0; k < draws; ++k) {
        Vertex y = 0;
        for (int e = 0; e < 6; ++e)
            if (coin(rng)) y |= Vertex{1} << e;
        s += tri(y);
        s2 += tri(y) * tri(y);
    }
    const double mc = s / draws, se = std::sqrt((s2 / draws - mc * mc) / draws);
    CHECK(std::abs(expect_under_product(tri, m) - mc) <= 3 * se);
}

TEST_CASE("KL of a product against mu_p") {
    CHECK(kl_product_to_mup(Vector::Constant(4, 2 * 0.3 - 1), 0.3) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(kl_product_to_mup(Vector::Ones(6), 0.5) == doctest::Approx(6 * std::log(2.0)));
    CHECK(kl_product_to_mup(Vector::Constant(1, 0.5), 0.5) == doctest::Approx(0.13081203594113694));
    CHECK(kl_product_to_mup(Vector::Constant(1, 0.5), 0.5) == doctest::Approx(oracle::binary_kl(0.5, 0.5)));
}

TEST_CASE("Gibbs solver closed forms") {
    const auto zero = solve_gibbs(table_problem(CubeFunction::constant(4, 0.0), 0.3));
    CHECK(std::abs(zero.objective) < 1e-10);
    CHECK((zero.mean - Vector::Constant(4, -0.4)).cwiseAbs().maxCoeff() < 1e-6);

    Vector theta(3);
    theta << 0.5, -1.2, 0.1;
    const auto lin = solve_gibbs(table_problem(CubeFunction::linear(theta), 0.5));
    double want = 0;
    for (int i = 0; i < 3; ++i) want += std::log(std::cosh(theta[i]));
    CHECK(lin.objective == doctest::Approx(want).epsilon(1e-9));
    CHECK((lin.mean - theta.array().tanh().matrix()).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(lin.converged);
}

TEST_CASE("Curie-Weiss against the scalar ansatz") {
    for (double field : {0.0, 0.3}) {
        const int n = 12;
        const double beta = 0.5;
        const IsingModel cw = IsingModel::curie_weiss(n, beta, field);
        const auto res = solve_gibbs(table_problem(cw.table(), 0.5, 3));
        // constant mean m: E f = beta (n-1) m^2 / 2 + field n m
        const double oracle_value = oracle::golden_max(
            [&](double m) { return 0.5 * beta * (n - 1) * m * m + field * n * m - n * oracle::binary_kl(m, 0.5); }, -1 + 1e-12, 1 - 1e-12);
        CHECK(std::abs(res.objective - oracle_value) < 1e-6);
    }
}

TEST_CASE("Gibbs domination") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 8; ++rep) {
        const int n = 4 + rep;
        const CubeFunction f(n, oracle::random_log_density(n, rng));
        for (double p : {0.2, 0.5, 0.8}) {
            const auto r = solve_gibbs(table_problem(f, p, 10 + rep, 4));
            CHECK(r.objective <= log_partition(f, p) + 1e-10);
        }
    }
}

TEST_CASE("log partition by direct summation") {
    std::mt19937_64 rng(5);
    const CubeFunction f(4, oracle::random_log_density(4, rng));
    const double p = 0.3;
    double z = 0;
    for (Vertex y = 0; y < 16; ++y) {
        const int k = std::popcount(y);
        z += std::pow(p, k) * std::pow(1 - p, 4 - k) * std::exp(f(y));
    }
    CHECK(log_partition(f, p) == doctest::Approx(std::log(z)).epsilon(1e-13));
}

TEST_CASE("rate function basics") {
    const CubeFunction s = sum_function(6);
    CHECK(rate_function_phi(table_problem(s, 0.5), -0.1).phi == 0.0);
    CHECK(rate_function_phi(table_problem(s, 0.5), 0.0).phi == 0.0);
    const auto half = rate_function_phi(table_problem(s, 0.5), 0.5);
    CHECK(half.phi == doctest::Approx(6 * 0.13081203594113694).epsilon(1e-6));
    CHECK(half.feasible);

    const auto over = rate_function_phi(table_problem(s, 0.5), 1.2);
    CHECK(std::isinf(over.phi));
    CHECK(!over.feasible);

    const auto edge = rate_function_phi(table_problem(s, 0.3), 1.0);
    CHECK(edge.boundary);
    CHECK(edge.phi == doctest::Approx(-6 * std::log(0.3)));

    double prev = -1;
    for (double t = -0.5; t <= 0.9; t += 0.1) {
        const double v = rate_function_phi(table_problem(s, 0.4), t).phi;
        CHECK(v >= prev - 1e-7);
        prev = v;
    }
}

TEST_CASE("triangle rate function against the planted-clique ansatz") {
    const int N = 5, n = 10;
    const double p = 0.5, t = 0.04;
    MeanFieldProblem prob;
    prob.f = std::make_shared<SubgraphObjective>(SubgraphModel::triangle(N));
    prob.p = p;
    prob.options.seed = 9;
    prob.options.restarts = 16;
    const auto res = rate_function_phi(prob, t);
    REQUIRE(res.feasible);

    // clique on the first k vertices with edge probability a, elsewhere b
    double best = kInf;
    for (int k = 0; k <= N; ++k) {
        for (int i = 0; i <= 200; ++i) {
            for (int j = 0; j <= 200; ++j) {
                const double a = i / 200.0, b = j / 200.0;
                std::vector<double> q(n);
                double klv = 0;
                for (int u = 0; u < N; ++u)
                    for (int v = u + 1; v < N; ++v) {
                        const double qe = (v < k) ? a : b;
                        q[edge_index(N, u, v)] = qe;
                        klv += oracle::binary_kl(2 * qe - 1, p);
                    }
                if (triangle_mean(N, q) >= t * n) best = std::min(best, klv);
            }
        }
    }
    CHECK(res.phi <= best * 1.02 + 1e-9);
    // and never below the certified Chernoff bound
    CHECK(res.phi >= phi_chernoff_lower(model_table(SubgraphModel::triangle(N)), p, t) - 1e-9);
}

TEST_CASE("Chernoff lower bound sits below a brute-force product grid") {
    std::mt19937_64 rng(6);
    const CubeFunction f(2, oracle::random_log_density(2, rng));
    const double p = 0.4;
    const double fmax = *std::max_element(f.values().begin(), f.values().end());
    for (double frac : {0.2, 0.5, 0.9}) {
        const double t = frac * fmax / 2;
        double grid = kInf;
        for (int i = 0; i <= 400; ++i)
            for (int j = 0; j <= 400; ++j) {
                Vector m(2);
                m << -1 + i / 200.0, -1 + j / 200.0;
                if (expect_under_product(f, m) >= t * 2) grid = std::min(grid, kl_product_to_mup(m, p));
            }
        if (std::isfinite(grid)) CHECK(phi_chernoff_lower(f, p, t) <= grid + 1e-9);
    }
}

TEST_CASE("subgraph objective matches the dense table") {
    SubgraphModel m;
    m.N = 4;
    m.terms.push_back({SimpleGraph::complete(3), 0.7});
    m.terms.push_back({SimpleGraph(3, {{0, 1}, {1, 2}}), -0.4});
    const SubgraphObjective so(m);
    const TableObjective to(model_table(m));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 10; ++k) {
        Vector x(6);
        for (int i = 0; i < 6; ++i) x[i] = U(rng);
        CHECK(so.value(x) == doctest::Approx(to.value(x)).epsilon(1e-12));
        Vector g1, g2;
        so.value_grad(x, g1);
        to.value_grad(x, g2);
        CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("mean-field corollary bound on random Lipschitz-normalized functions") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 5 + rep;
        auto v = oracle::random_log_density(n, rng);
        const double l = lip(CubeFunction(n, v));
        for (double& x : v) x /= l;
        const CubeFunction f(n, v);
        const auto r = solve_gibbs(table_problem(f, 0.5, rep, 4));
        const auto d = complexity_of(f, 2000, 40 + rep);
        const double gap = log_partition(f, 0.5) - r.objective;
        CHECK(gap >= -1e-10);
        CHECK(gap <= 64 * std::cbrt(d.mean + 3 * d.std_error) * std::pow(n, 2.0 / 3.0));
    }
}

TEST_CASE("Lubetzky-Zhao reference") {
    CHECK(lz_reference(1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(lz_reference(8.0) == doctest::Approx(4.0));
    CHECK(lz_reference(1e-3) == doctest::Approx(2e-3 / 3));
    CHECK_THROWS_AS(lz_reference(0.0), Error);
}

TEST_CASE("problem validation") {
    MeanFieldProblem prob;
    CHECK_THROWS_AS(prob.validate(), Error);
    prob = table_problem(CubeFunction::constant(2, 0.0), 1.0);
    CHECK_THROWS_AS(solve_gibbs(prob), Error);
}

TEST_CASE("Ising objective matches the dense table") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    const int n = 7;
    Matrix A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) A(i, j) = A(j, i) = nd(rng) / 3;
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = nd(rng) / 4;
    const IsingModel m{A, b};
    const IsingObjective io(m);
    const TableObjective to(m.table());
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 10; ++k) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = U(rng);
        CHECK(io.value(x) == doctest::Approx(to.value(x)).epsilon(1e-12));
        Vector g1, g2;
        CHECK(io.value_grad(x, g1) == doctest::Approx(io.value(x)).epsilon(1e-14));
        to.value_grad(x, g2);
        CHECK((g1 - g2).cwiseAbs().maxCoeff() < 1e-11);
    }
    bool e1 = false, e2 = false;
    CHECK(io.max_value(e1) == doctest::Approx(to.max_value(e2)));
    CHECK(e1);

    // Curie-Weiss at n = 20 through the closed form
    const int N = 20;
    MeanFieldProblem prob;
    prob.f = std::make_shared<IsingObjective>(IsingModel::curie_weiss(N, 0.5, 0.2));
    prob.options.seed = 4;
    const double want = oracle::golden_max(
        [&](double x) { return 0.25 * (N - 1) * x * x + 0.2 * N * x - N * oracle::binary_kl(x, 0.5); }, -1 + 1e-12, 1 - 1e-12);
    CHECK(std::abs(solve_gibbs(prob).objective - want) < 1e-6);
}
