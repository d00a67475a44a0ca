#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mfld/cube.hpp"

namespace mfld {

// Simple undirected graph on vertices 0..vertices-1.
struct SimpleGraph {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;

    SimpleGraph() = default;
    SimpleGraph(int v, std::vector<std::pair<int, int>> e);

    static SimpleGraph complete(int k);
    static SimpleGraph single_edge() { return complete(2); }
    // "u v" per line, 1-based labels; '#' starts a comment
    static SimpleGraph parse_edge_list(const std::string& text);
    int num_edges() const { return static_cast<int>(edges.size()); }
};

struct SubgraphTerm {
    SimpleGraph h;
    double beta = 0.0;
};

// f(y) = N^2 sum_k beta_k t(H_k, G_y); coordinate e of y is +1 iff edge e is present.
struct SubgraphModel {
    int N = 0;
    std::vector<SubgraphTerm> terms;

    int dim() const { return N * (N - 1) / 2; }
    void validate() const;
    // T(G)/N, i.e. a single K3 term with beta = 1/6
    static SubgraphModel triangle(int N);
};

// Pair index for i<j in lexicographic order.
int edge_index(int N, int i, int j);
std::pair<int, int> edge_endpoints(int N, int e);

// Row-major N x N 0/1 adjacency.
struct Adjacency {
    int N = 0;
    std::vector<std::uint8_t> a;
    bool operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * N + j] != 0; }
};
Adjacency adjacency_from_vertex(int N, Vertex y);
Adjacency adjacency_from_edges(int N, const std::vector<std::pair<int, int>>& edges);

// Number of maps V(H) -> [N] sending every edge of H onto an edge of G.
double hom_count(const SimpleGraph& h, const Adjacency& g);
double hom_density(const SimpleGraph& h, const Adjacency& g);

// T(G_y)/N and the derivative in the 0/1 edge indicators, (A^2)_{ij}/N.
// The +-1 cube gradient is half of triangle_grad.
double triangle_f(int N, Vertex y);
Vector triangle_grad(int N, Vertex y);

double subgraph_f(const SubgraphModel& model, Vertex y);
// exact discrete gradient on the +-1 cube (coordinate e: half the jump when edge e is toggled)
Vector subgraph_grad(const SubgraphModel& model, Vertex y);
CubeFunction model_table(const SubgraphModel& model);

// Independent edges with probabilities q (length n): E f and d(E f)/dq.
double subgraph_product_mean(const SubgraphModel& model, const Vector& q);
double subgraph_product_mean_grad(const SubgraphModel& model, const Vector& q, Vector& grad);

}  // namespace mfld
