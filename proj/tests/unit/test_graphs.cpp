#include "doctest.h"

#include <cmath>
#include <random>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/graphs.hpp"
#include "mfld/meanfield.hpp"

using namespace mfld;

namespace {

// homomorphisms by enumerating all maps V(H) -> [N]
double brute_hom(const SimpleGraph& h, const Adjacency& g) {
    const int k = h.vertices, N = g.N;
    std::vector<int> phi(k, 0);
    double count = 0;
    for (;;) {
        bool ok = true;
        for (const auto& [u, v] : h.edges)
            if (!g(phi[u], phi[v])) {
                ok = false;
                break;
            }
        count += ok ? 1 : 0;
        int i = 0;
        while (i < k && ++phi[i] == N) phi[i++] = 0;
        if (i == k) break;
    }
    return count;
}

int triangles(const Adjacency& g) {
    int t = 0;
    for (int a = 0; a < g.N; ++a)
        for (int b = a + 1; b < g.N; ++b)
            for (int c = b + 1; c < g.N; ++c) t += g(a, b) && g(a, c) && g(b, c);
    return t;
}

}  // namespace

TEST_CASE("edge indexing") {
    for (int N = 2; N <= 7; ++N) {
        int e = 0;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                CHECK(edge_index(N, i, j) == e);
                CHECK(edge_endpoints(N, e) == std::make_pair(i, j));
                ++e;
            }
    }
}

TEST_CASE("homomorphism counts by enumeration") {
    std::mt19937_64 rng(1);
    const std::vector<SimpleGraph> hs = {SimpleGraph::single_edge(), SimpleGraph::complete(3), SimpleGraph(3, {{0, 1}, {1, 2}}),
                                         SimpleGraph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}), SimpleGraph::complete(4)};
    for (int N = 3; N <= 6; ++N) {
        const int n = N * (N - 1) / 2;
        for (int rep = 0; rep < 4; ++rep) {
            const Vertex y = static_cast<Vertex>(rng() & ((Vertex{1} << n) - 1));
            const Adjacency g = adjacency_from_vertex(N, y);
            for (const auto& h : hs) {
                CHECK(hom_count(h, g) == brute_hom(h, g));
                CHECK(hom_density(h, g) == doctest::Approx(brute_hom(h, g) / std::pow(N, h.vertices)));
            }
            CHECK(hom_count(SimpleGraph::complete(3), g) == 6 * triangles(g));
        }
    }
}

TEST_CASE("triangle normalization") {
    // f = N^2 * (1/6) t(K3, G) = T(G) / N
    for (int N = 3; N <= 6; ++N) {
        const SubgraphModel m = SubgraphModel::triangle(N);
        const int n = m.dim();
        std::mt19937_64 rng(N);
        for (int rep = 0; rep < 10; ++rep) {
            const Vertex y = static_cast<Vertex>(rng() & ((Vertex{1} << n) - 1));
            const double want = triangles(adjacency_from_vertex(N, y)) / static_cast<double>(N);
            CHECK(triangle_f(N, y) == doctest::Approx(want));
            CHECK(subgraph_f(m, y) == doctest::Approx(want));
        }
        const Vertex full = static_cast<Vertex>((Vertex{1} << n) - 1);
        CHECK(triangle_f(N, full) == doctest::Approx((N - 1) * (N - 2) / 6.0));
    }
    const Adjacency k4 = adjacency_from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    CHECK(triangles(k4) == 4);
}

TEST_CASE("gradients are half the toggle jump") {
    for (int N = 3; N <= 5; ++N) {
        const SubgraphModel m = SubgraphModel::triangle(N);
        const CubeFunction f = model_table(m);
        std::mt19937_64 rng(10 + N);
        for (int rep = 0; rep < 10; ++rep) {
            const Vertex y = static_cast<Vertex>(rng() % f.size());
            const Vector d = discrete_gradient(f, y);
            CHECK((subgraph_grad(m, y) - d).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((triangle_grad(N, y) / 2 - d).cwiseAbs().maxCoeff() < 1e-12);
            // codegree over N
            const Adjacency g = adjacency_from_vertex(N, y);
            for (int e = 0; e < m.dim(); ++e) {
                const auto [i, j] = edge_endpoints(N, e);
                int co = 0;
                for (int k = 0; k < N; ++k) co += g(i, k) && g(j, k);
                CHECK(triangle_grad(N, y)[e] == doctest::Approx(co / static_cast<double>(N)));
            }
        }
        CHECK(lip(f) <= 1.0);
    }
}

TEST_CASE("product moments against the table") {
    SubgraphModel m;
    m.N = 5;
    m.terms.push_back({SimpleGraph::complete(3), 0.5});
    m.terms.push_back({SimpleGraph(3, {{0, 1}, {1, 2}}), -0.3});
    m.terms.push_back({SimpleGraph::single_edge(), 0.2});
    const CubeFunction f = model_table(m);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(0, 1);
    for (int rep = 0; rep < 5; ++rep) {
        Vector q(10);
        for (int e = 0; e < 10; ++e) q[e] = U(rng);
        CHECK(subgraph_product_mean(m, q) == doctest::Approx(expect_under_product(f, (2 * q.array() - 1).matrix())).epsilon(1e-12));
        Vector g;
        subgraph_product_mean_grad(m, q, g);
        for (int e = 0; e < 10; ++e) {
            Vector qp = q, qm = q;
            qp[e] += 1e-6;
            qm[e] -= 1e-6;
            CHECK(g[e] == doctest::Approx((subgraph_product_mean(m, qp) - subgraph_product_mean(m, qm)) / 2e-6).epsilon(1e-6));
        }
    }
}

TEST_CASE("edge-list parsing") {
    const SimpleGraph h = SimpleGraph::parse_edge_list("# a path\n1 2\n2 3\n\n3 4 # last\n");
    CHECK(h.vertices == 4);
    CHECK(h.num_edges() == 3);
    CHECK(h.edges[0] == std::make_pair(0, 1));
    CHECK_THROWS_AS(SimpleGraph::parse_edge_list("1 1\n"), Error);
    CHECK_THROWS_AS(SimpleGraph::parse_edge_list("1 x\n"), Error);
    CHECK_THROWS_AS(SimpleGraph(2, {{0, 5}}), Error);
}

TEST_CASE("model validation") {
    SubgraphModel m;
    m.N = 1;
    CHECK_THROWS_AS(m.validate(), Error);
    m.N = 4;
    m.terms.push_back({SimpleGraph::complete(3), NAN});
    CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("closed-form K3 moments match map enumeration") {
    // an isolated extra vertex multiplies hom by N and forces the generic path
    const int N = 12;
    SubgraphModel fast{N, {{SimpleGraph::complete(3), 1.0}}};
    SubgraphModel slow{N, {{SimpleGraph(4, {{0, 1}, {1, 2}, {0, 2}}), 1.0}}};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0, 1);
    Vector q(fast.dim());
    for (int e = 0; e < q.size(); ++e) q[e] = U(rng);
    Vector ga, gb;
    const double a = subgraph_product_mean_grad(fast, q, ga);
    const double b = subgraph_product_mean_grad(slow, q, gb);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    CHECK((ga - gb).cwiseAbs().maxCoeff() <= 1e-12 * ga.cwiseAbs().maxCoeff());
}
