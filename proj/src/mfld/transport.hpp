#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"

namespace mfld {

inline constexpr int kMaxTransportDim = 10;

struct TransportPlan {
    struct Entry {
        Vertex src;
        Vertex dst;
        double mass;
        int hamming;
    };
    int n = 0;
    std::vector<Entry> flow;
    double cost = 0.0;

    std::vector<double> source_marginal() const;
    std::vector<double> target_marginal() const;
    std::string to_csv() const;
};

struct W1Result {
    double value = 0.0;
    TransportPlan plan;
    // 1-Lipschitz Kantorovich potential; dual_value = sum phi (nu1 - nu2)
    std::vector<double> potential;
    double dual_value = 0.0;
    double pruned_mass = 0.0;
};

W1Result w1_exact(const CubeMeasure& nu1, const CubeMeasure& nu2);
// Hamming distance of the threshold coupling between nu and its product fit
GwEstimate w1_upper_coupling(const CubeMeasure& nu, std::int64_t samples, std::uint64_t seed);
double step1_bound(const CubeMeasure& nu);

double tv_distance(const CubeMeasure& a, const CubeMeasure& b);
double tv_distance(std::span<const double> p, std::span<const double> q);

}  // namespace mfld
