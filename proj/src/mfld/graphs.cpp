#include "mfld/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mfld/error.hpp"
#include "mfld/parallel.hpp"

namespace mfld {

namespace {
constexpr double kMapCap = 1e8;

void check_map_cap(int N, int m) {
    require(std::pow(static_cast<double>(N), m) <= kMapCap, ErrorCode::Capacity,
            "homomorphism enumeration needs N^m <= 1e8 (N=" + std::to_string(N) + ", m=" + std::to_string(m) +
                "); use a smaller N");
}

// Enumerates maps q: [m] -> [N] with q[0] fixed; calls visit(q) for each.
template <class Visit>
void for_each_map(int N, int m, int first, Visit&& visit) {
    std::vector<int> q(m, 0);
    q[0] = first;
    if (m == 1) {
        visit(q);
        return;
    }
    for (;;) {
        visit(q);
        int k = m - 1;
        while (k >= 1 && ++q[k] == N) q[k--] = 0;
        if (k == 0) break;
    }
}

// Distinct G-edge indices hit by q; false if some H-edge collapses to a loop.
bool hit_edges(const SimpleGraph& h, int N, const std::vector<int>& q, std::vector<int>& out) {
    out.clear();
    for (auto [a, b] : h.edges) {
        int u = q[a], v = q[b];
        if (u == v) return false;
        if (u > v) std::swap(u, v);
        int e = edge_index(N, u, v);
        if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
    }
    return true;
}
}  // namespace

SimpleGraph::SimpleGraph(int v, std::vector<std::pair<int, int>> e) : vertices(v), edges(std::move(e)) {
    require(v >= 1, ErrorCode::InvalidArgument, "graph needs at least one vertex");
    std::set<std::pair<int, int>> seen;
    for (auto& [a, b] : edges) {
        require(a >= 0 && b >= 0 && a < v && b < v, ErrorCode::InvalidArgument, "edge endpoint out of range");
        require(a != b, ErrorCode::InvalidArgument, "graph must be simple: loop at vertex " + std::to_string(a + 1));
        if (a > b) std::swap(a, b);
        require(seen.insert({a, b}).second, ErrorCode::InvalidArgument, "graph must be simple: repeated edge");
    }
}

SimpleGraph SimpleGraph::complete(int k) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) e.push_back({i, j});
    return SimpleGraph(k, std::move(e));
}

SimpleGraph SimpleGraph::parse_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<int, int>> e;
    int maxv = 0, lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::istringstream ls(line);
        int u, v;
        if (!(ls >> u)) continue;
        require(static_cast<bool>(ls >> v), ErrorCode::InvalidArgument, "edge list line " + std::to_string(lineno) + ": expected 'u v'");
        require(u >= 1 && v >= 1, ErrorCode::InvalidArgument, "edge list labels are 1-based");
        e.push_back({u - 1, v - 1});
        maxv = std::max({maxv, u, v});
    }
    require(!e.empty(), ErrorCode::InvalidArgument, "edge list is empty");
    return SimpleGraph(maxv, std::move(e));
}

void SubgraphModel::validate() const {
    require(N >= 2, ErrorCode::InvalidArgument, "model needs N >= 2");
    for (const auto& t : terms) {
        require(t.h.vertices <= N, ErrorCode::InvalidArgument, "H has more vertices than N");
        require(std::isfinite(t.beta), ErrorCode::InvalidArgument, "beta must be finite");
    }
}

SubgraphModel SubgraphModel::triangle(int N) { return SubgraphModel{N, {{SimpleGraph::complete(3), 1.0 / 6.0}}}; }

int edge_index(int N, int i, int j) {
    // rows 0..i-1 contribute (N-1) + ... + (N-i) pairs
    return i * (2 * N - i - 1) / 2 + (j - i - 1);
}

std::pair<int, int> edge_endpoints(int N, int e) {
    int i = 0;
    while (e >= N - 1 - i) {
        e -= N - 1 - i;
        ++i;
    }
    return {i, i + 1 + e};
}

Adjacency adjacency_from_vertex(int N, Vertex y) {
    Adjacency g{N, std::vector<std::uint8_t>(static_cast<std::size_t>(N) * N, 0)};
    int e = 0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j, ++e)
            if ((y >> e) & 1u) g.a[i * N + j] = g.a[j * N + i] = 1;
    return g;
}

Adjacency adjacency_from_edges(int N, const std::vector<std::pair<int, int>>& edges) {
    Adjacency g{N, std::vector<std::uint8_t>(static_cast<std::size_t>(N) * N, 0)};
    for (auto [a, b] : edges) {
        require(a >= 0 && b >= 0 && a < N && b < N && a != b, ErrorCode::InvalidArgument, "bad edge for adjacency");
        g.a[a * N + b] = g.a[b * N + a] = 1;
    }
    return g;
}

double hom_count(const SimpleGraph& h, const Adjacency& g) {
    const int N = g.N, m = h.vertices;
    check_map_cap(N, m);
    std::vector<double> partial(N, 0.0);
    parallel_for(0, N, [&](std::int64_t first) {
        double c = 0.0;
        for_each_map(N, m, static_cast<int>(first), [&](const std::vector<int>& q) {
            for (auto [a, b] : h.edges)
                if (!g(q[a], q[b])) return;
            c += 1.0;
        });
        partial[first] = c;
    });
    double total = 0.0;
    for (double c : partial) total += c;
    return total;
}

double hom_density(const SimpleGraph& h, const Adjacency& g) {
    return hom_count(h, g) / std::pow(static_cast<double>(g.N), h.vertices);
}

double triangle_f(int N, Vertex y) {
    const Adjacency g = adjacency_from_vertex(N, y);
    long count = 0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (g(i, j))
                for (int k = j + 1; k < N; ++k)
                    if (g(i, k) && g(j, k)) ++count;
    return static_cast<double>(count) / N;
}

Vector triangle_grad(int N, Vertex y) {
    const Adjacency g = adjacency_from_vertex(N, y);
    Vector d(N * (N - 1) / 2);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            int common = 0;
            for (int k = 0; k < N; ++k) common += g(i, k) && g(j, k);
            d[edge_index(N, i, j)] = static_cast<double>(common) / N;
        }
    return d;
}

double subgraph_f(const SubgraphModel& model, Vertex y) {
    const Adjacency g = adjacency_from_vertex(model.N, y);
    const double N = model.N;
    double f = 0.0;
    for (const auto& t : model.terms)
        if (t.beta != 0.0) f += N * N * t.beta * hom_density(t.h, g);
    return f;
}

Vector subgraph_grad(const SubgraphModel& model, Vertex y) {
    model.validate();
    const int N = model.N, n = model.dim();
    Vector grad = Vector::Zero(n);
    for (const auto& t : model.terms) {
        if (t.beta == 0.0) continue;
        const int m = t.h.vertices;
        check_map_cap(N, m);
        // a map contributes to coordinate e when every other distinct edge it hits is present
        std::vector<Vector> partial(N, Vector::Zero(n));
        parallel_for(0, N, [&](std::int64_t first) {
            std::vector<int> hit;
            Vector& acc = partial[first];
            for_each_map(N, m, static_cast<int>(first), [&](const std::vector<int>& q) {
                if (!hit_edges(t.h, N, q, hit)) return;
                int missing = -1, nmissing = 0;
                for (int e : hit)
                    if (!((y >> e) & 1u)) {
                        missing = e;
                        if (++nmissing > 1) return;
                    }
                if (nmissing == 1) acc[missing] += 1.0;
                else
                    for (int e : hit) acc[e] += 1.0;
            });
        });
        Vector sum = Vector::Zero(n);
        for (const auto& p : partial) sum += p;
        grad += 0.5 * t.beta * static_cast<double>(N) * N / std::pow(static_cast<double>(N), m) * sum;
    }
    return grad;
}

CubeFunction model_table(const SubgraphModel& model) {
    model.validate();
    const int n = model.dim();
    check_cube_dim(n);
    std::vector<double> v(cube_size(n));
    parallel_for(0, static_cast<std::int64_t>(v.size()), [&](std::int64_t y) { v[y] = subgraph_f(model, static_cast<Vertex>(y)); });
    return CubeFunction(n, std::move(v));
}

double subgraph_product_mean_grad(const SubgraphModel& model, const Vector& q, Vector& grad) {
    model.validate();
    const int N = model.N, n = model.dim();
    require(q.size() == n, ErrorCode::InvalidArgument, "edge probability vector has wrong length");
    grad = Vector::Zero(n);
    double value = 0.0;
    for (const auto& t : model.terms) {
        if (t.beta == 0.0) continue;
        const int m = t.h.vertices;
        if (m <= 3 && t.h.num_edges() == m * (m - 1) / 2) {
            // K2 and K3 in closed form: hom = sum_ij Q_ij, resp. tr(Q^3), Q the symmetric edge-probability matrix
            const double scale = t.beta * static_cast<double>(N) * N / std::pow(static_cast<double>(N), m);
            if (m == 2) {
                value += scale * 2.0 * q.sum();
                grad.array() += scale * 2.0;
                continue;
            }
            if (m == 3) {
                Matrix Q = Matrix::Zero(N, N);
                for (int e = 0; e < n; ++e) {
                    const auto [i, j] = edge_endpoints(N, e);
                    Q(i, j) = Q(j, i) = q[e];
                }
                const Matrix Q2 = Q * Q;
                value += scale * Q2.cwiseProduct(Q).sum();
                for (int e = 0; e < n; ++e) {
                    const auto [i, j] = edge_endpoints(N, e);
                    grad[e] += scale * 6.0 * Q2(i, j);
                }
                continue;
            }
        }
        if (m <= 3 && t.h.num_edges() == m * (m - 1) / 2) {
            // K2 and K3 in closed form: hom = sum_ij Q_ij, resp. tr(Q^3), Q the symmetric edge-probability matrix
            const double scale = t.beta * static_cast<double>(N) * N / std::pow(static_cast<double>(N), m);
            if (m == 2) {
                value += scale * 2.0 * q.sum();
                grad.array() += scale * 2.0;
                continue;
            }
            if (m == 3) {
                Matrix Q = Matrix::Zero(N, N);
                for (int e = 0; e < n; ++e) {
                    const auto [i, j] = edge_endpoints(N, e);
                    Q(i, j) = Q(j, i) = q[e];
                }
                const Matrix Q2 = Q * Q;
                value += scale * Q2.cwiseProduct(Q).sum();
                for (int e = 0; e < n; ++e) {
                    const auto [i, j] = edge_endpoints(N, e);
                    grad[e] += scale * 6.0 * Q2(i, j);
                }
                continue;
            }
        }
        check_map_cap(N, m);
        std::vector<double> pv(N, 0.0);
        std::vector<Vector> pg(N, Vector::Zero(n));
        parallel_for(0, N, [&](std::int64_t first) {
            std::vector<int> hit;
            double v = 0.0;
            Vector& acc = pg[first];
            for_each_map(N, m, static_cast<int>(first), [&](const std::vector<int>& qm) {
                if (!hit_edges(t.h, N, qm, hit)) return;
                double prod = 1.0;
                for (int e : hit) prod *= q[e];
                v += prod;
                // derivative of the product w.r.t. each factor
                for (std::size_t a = 0; a < hit.size(); ++a) {
                    double others = 1.0;
                    for (std::size_t b = 0; b < hit.size(); ++b)
                        if (b != a) others *= q[hit[b]];
                    acc[hit[a]] += others;
                }
            });
            pv[first] = v;
        });
        const double scale = t.beta * static_cast<double>(N) * N / std::pow(static_cast<double>(N), m);
        double v = 0.0;
        Vector gsum = Vector::Zero(n);
        for (int i = 0; i < N; ++i) {
            v += pv[i];
            gsum += pg[i];
        }
        value += scale * v;
        grad += scale * gsum;
    }
    return value;
}

double subgraph_product_mean(const SubgraphModel& model, const Vector& q) {
    Vector g;
    return subgraph_product_mean_grad(model, q, g);
}

}  // namespace mfld
