#include "mfld/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "mfld/error.hpp"
#include "mfld/parallel.hpp"
#include "mfld/random.hpp"
#include "mfld/sampler.hpp"

namespace mfld {

namespace {

constexpr double kPrune = 1e-15;
constexpr double kZero = 1e-16;  // residuals at or below this are treated as empty

std::vector<double> pruned(const CubeMeasure& nu, double& removed) {
    auto p = nu.probabilities();
    double kept = 0.0;
    for (double& v : p) {
        if (v < kPrune) {
            removed += v;
            v = 0.0;
        }
        kept += v;
    }
    for (double& v : p) v /= kept;
    return p;
}

// Primal-dual min-cost flow on the n-cube with unit arc costs and unbounded
// arc capacities. Supplies come from a virtual source S, demands drain to T.
class CubeFlow {
public:
    CubeFlow(int n, std::vector<double> supply, std::vector<double> demand)
        : n_(n), V_(std::size_t{1} << n), supply_(std::move(supply)), demand_(std::move(demand)),
          flow_(V_ * n, 0.0), pot_(V_, 0) {}

    void solve() {
        for (;;) {
            if (!shortest_paths()) break;
            blocking_flow();
        }
    }

    double flow(Vertex y, int i) const { return flow_[y * n_ + i]; }
    long potential(Vertex y) const { return pot_[y]; }
    double residual_supply(Vertex y) const { return supply_[y]; }
    double residual_demand(Vertex y) const { return demand_[y]; }

private:
    static constexpr long kFar = std::numeric_limits<long>::max() / 4;

    int n_;
    std::size_t V_;
    std::vector<double> supply_, demand_;
    std::vector<double> flow_;  // flow on arc y -> y^bit(i)
    std::vector<long> pot_;
    std::vector<long> dist_;
    std::vector<int> level_;
    std::vector<int> iter_;

    // reduced cost of moving along coordinate i from y; reverse = cancel opposite flow
    long reduced(Vertex y, int i, bool reverse) const {
        const Vertex z = flip(y, i);
        return (reverse ? -1 : 1) + pot_[y] - pot_[z];
    }
    bool has_reverse(Vertex y, int i) const { return flow_[flip(y, i) * n_ + i] > kZero; }

    // Dijkstra from S over reduced costs; updates potentials. False when T is unreachable.
    bool shortest_paths() {
        dist_.assign(V_, kFar);
        using Item = std::pair<long, Vertex>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        for (Vertex y = 0; y < V_; ++y)
            if (supply_[y] > kZero) {
                dist_[y] = 0;
                pq.push({0, y});
            }
        if (pq.empty()) return false;
        long dT = kFar;
        while (!pq.empty()) {
            auto [d, y] = pq.top();
            pq.pop();
            if (d != dist_[y]) continue;
            if (d >= dT) break;
            if (demand_[y] > kZero) dT = std::min(dT, d);
            for (int i = 0; i < n_; ++i) {
                const Vertex z = flip(y, i);
                long c = reduced(y, i, false);
                if (has_reverse(y, i)) c = std::min(c, reduced(y, i, true));
                if (d + c < dist_[z]) {
                    dist_[z] = d + c;
                    pq.push({dist_[z], z});
                }
            }
        }
        if (dT == kFar) return false;
        for (Vertex y = 0; y < V_; ++y) pot_[y] += std::min(dist_[y], dT);
        return true;
    }

    bool admissible(Vertex y, int i, bool reverse) const {
        if (reverse) return has_reverse(y, i) && reduced(y, i, true) == 0;
        return reduced(y, i, false) == 0;
    }

    // BFS levels on the admissible subgraph (level 0 = supply nodes)
    bool build_levels() {
        level_.assign(V_, -1);
        std::queue<Vertex> q;
        for (Vertex y = 0; y < V_; ++y)
            if (supply_[y] > kZero) {
                level_[y] = 0;
                q.push(y);
            }
        bool reach = false;
        while (!q.empty()) {
            Vertex y = q.front();
            q.pop();
            if (demand_[y] > kZero) reach = true;
            for (int i = 0; i < n_; ++i) {
                const Vertex z = flip(y, i);
                if (level_[z] >= 0) continue;
                if (admissible(y, i, false) || admissible(y, i, true)) {
                    level_[z] = level_[y] + 1;
                    q.push(z);
                }
            }
        }
        return reach;
    }

    double push(Vertex y, double amount) {
        if (demand_[y] > kZero) {
            const double d = std::min(amount, demand_[y]);
            demand_[y] -= d;
            return d;
        }
        // arcs 0..n-1 cancel opposite flow, n..2n-1 add forward flow
        for (int& k = iter_[y]; k < 2 * n_; ++k) {
            const bool reverse = k < n_;
            const int i = reverse ? k : k - n_;
            const Vertex z = flip(y, i);
            if (level_[z] != level_[y] + 1 || !admissible(y, i, reverse)) continue;
            const double cap = reverse ? flow_[z * n_ + i] : amount;
            const double got = push(z, std::min(amount, cap));
            if (got > 0.0) {
                if (reverse) {
                    double& f = flow_[z * n_ + i];
                    f = (got >= f) ? 0.0 : f - got;
                } else {
                    flow_[y * n_ + i] += got;
                }
                return got;
            }
        }
        return 0.0;
    }

    void blocking_flow() {
        while (build_levels()) {
            iter_.assign(V_, 0);
            bool progress = false;
            for (Vertex s = 0; s < V_; ++s) {
                while (supply_[s] > kZero) {
                    const double got = push(s, supply_[s]);
                    if (got <= 0.0) break;
                    supply_[s] = (got >= supply_[s]) ? 0.0 : supply_[s] - got;
                    progress = true;
                }
            }
            if (!progress) break;
        }
    }
};

}  // namespace

std::vector<double> TransportPlan::source_marginal() const {
    std::vector<double> m(std::size_t{1} << n, 0.0);
    for (const auto& e : flow) m[e.src] += e.mass;
    return m;
}

std::vector<double> TransportPlan::target_marginal() const {
    std::vector<double> m(std::size_t{1} << n, 0.0);
    for (const auto& e : flow) m[e.dst] += e.mass;
    return m;
}

std::string TransportPlan::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "src,dst,mass,hamming\n";
    for (const auto& e : flow) os << e.src << ',' << e.dst << ',' << e.mass << ',' << e.hamming << '\n';
    return os.str();
}

W1Result w1_exact(const CubeMeasure& nu1, const CubeMeasure& nu2) {
    require(nu1.dim() == nu2.dim(), ErrorCode::InvalidArgument, "w1: dimension mismatch");
    const int n = nu1.dim();
    require(n <= kMaxTransportDim, ErrorCode::Capacity,
            "w1_exact supports n <= 10; use w1_upper_coupling for larger cubes");
    const std::size_t V = nu1.size();
    W1Result res;
    const auto p = pruned(nu1, res.pruned_mass);
    const auto q = pruned(nu2, res.pruned_mass);

    std::vector<double> supply(V), demand(V);
    for (std::size_t y = 0; y < V; ++y) {
        const double b = p[y] - q[y];
        supply[y] = b > 0 ? b : 0.0;
        demand[y] = b < 0 ? -b : 0.0;
    }
    CubeFlow flow(n, supply, demand);
    flow.solve();

    double cost = 0.0;
    for (Vertex y = 0; y < V; ++y)
        for (int i = 0; i < n; ++i) cost += flow.flow(y, i);

    res.potential.resize(V);
    double dual = 0.0;
    for (Vertex y = 0; y < V; ++y) {
        res.potential[y] = -static_cast<double>(flow.potential(y) - flow.potential(0));
        dual += res.potential[y] * (p[y] - q[y]);
    }
    res.dual_value = dual;
    res.value = cost;

    // path decomposition of the arc flow
    std::vector<double> arc(V * n);
    for (Vertex y = 0; y < V; ++y)
        for (int i = 0; i < n; ++i) arc[y * n + i] = flow.flow(y, i);
    std::vector<double> left = supply, need = demand;
    std::map<std::pair<Vertex, Vertex>, double> moved;
    for (Vertex y = 0; y < V; ++y)
        if (std::min(p[y], q[y]) > 0.0) moved[{y, y}] += std::min(p[y], q[y]);
    for (Vertex s = 0; s < V; ++s) {
        int guard = 0;
        while (left[s] > 1e-16 && guard++ < 1 << 20) {
            std::vector<std::pair<Vertex, int>> path;
            std::vector<char> on_path(V, 0);
            Vertex y = s;
            on_path[y] = 1;
            double amount = left[s];
            bool dead = false;
            while (!(need[y] > 1e-16 && y != s)) {
                int best = -1;
                for (int i = 0; i < n; ++i)
                    if (arc[y * n + i] > 1e-16 && (best < 0 || arc[y * n + i] > arc[y * n + best])) best = i;
                if (best < 0) {
                    dead = true;
                    break;
                }
                path.push_back({y, best});
                amount = std::min(amount, arc[y * n + best]);
                y = flip(y, best);
                if (on_path[y]) {
                    // numerical cycle: cancel it and restart from s
                    double c = arc[path.back().first * n + path.back().second];
                    std::size_t k = path.size();
                    while (k > 0 && path[k - 1].first != y) --k;
                    for (std::size_t j = k - 1; j < path.size(); ++j) c = std::min(c, arc[path[j].first * n + path[j].second]);
                    for (std::size_t j = k - 1; j < path.size(); ++j) arc[path[j].first * n + path[j].second] -= c;
                    dead = true;
                    break;
                }
                on_path[y] = 1;
            }
            if (dead) {
                if (path.empty()) break;
                continue;
            }
            amount = std::min(amount, need[y]);
            for (auto [u, i] : path) arc[u * n + i] -= amount;
            left[s] -= amount;
            need[y] -= amount;
            moved[{s, y}] += amount;
        }
    }
    res.plan.n = n;
    for (const auto& [key, mass] : moved) {
        if (mass <= 0.0) continue;
        res.plan.flow.push_back({key.first, key.second, mass, hamming(key.first, key.second)});
        res.plan.cost += mass * hamming(key.first, key.second);
    }
    return res;
}

GwEstimate w1_upper_coupling(const CubeMeasure& nu, std::int64_t samples, std::uint64_t seed) {
    require(samples >= 2, ErrorCode::InvalidArgument, "coupling estimate needs at least 2 samples");
    const SequentialSampler sampler(nu);
    const int n = nu.dim();
    std::vector<double> d(static_cast<std::size_t>(samples));
    constexpr std::int64_t kBlock = 4096;
    parallel_for(0, (samples + kBlock - 1) / kBlock, [&](std::int64_t b) {
        Rng rng = stream_rng(seed, static_cast<std::uint64_t>(b));
        UniformDist unif(-1.0, 1.0);
        std::vector<double> u(n);
        for (std::int64_t s = b * kBlock; s < std::min(samples, (b + 1) * kBlock); ++s) {
            for (auto& v : u) v = unif(rng);
            auto [z, y] = sampler.coupled(u);
            d[s] = hamming(z, y);
        }
    });
    return summarize(d);
}

double step1_bound(const CubeMeasure& nu) { return std::sqrt(nu.dim() * std::max(0.0, h_matrix(nu).trace())); }

double tv_distance(std::span<const double> p, std::span<const double> q) {
    require(p.size() == q.size(), ErrorCode::InvalidArgument, "tv: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return std::min(1.0, 0.5 * s);
}

double tv_distance(const CubeMeasure& a, const CubeMeasure& b) {
    require(a.dim() == b.dim(), ErrorCode::InvalidArgument, "tv: dimension mismatch");
    return tv_distance(a.probabilities(), b.probabilities());
}

}  // namespace mfld
