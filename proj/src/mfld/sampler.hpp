#pragma once

#include <span>
#include <utility>
#include <vector>

#include "mfld/cube.hpp"

namespace mfld {

// Sequential threshold sampler. Coordinates are fixed in index order; the
// conditional mean of coordinate i given the earlier ones is read off a
// prefix-marginal tree, so a draw costs O(n) after O(2^n) setup.
class SequentialSampler {
public:
    explicit SequentialSampler(const CubeMeasure& nu);

    int dim() const { return n_; }
    // u in [-1,1]^n; coordinate i is +1 iff u_i <= threshold
    Vertex sample(std::span<const double> u) const;
    // (Z, Y): Z as above, Y thresholds at the center of mass
    std::pair<Vertex, Vertex> coupled(std::span<const double> u) const;
    // conditional mean of coordinate i given the first i coordinates (bits of prefix)
    double threshold(int i, Vertex prefix) const;
    // law of sample() for uniform u: product of the conditional probabilities
    std::vector<double> exact_law() const;
    const Vector& center() const { return gbar_; }

private:
    int n_;
    // level j occupies [2^j - 1, 2^{j+1} - 1): mass of vertices whose low j bits equal k
    std::vector<double> tree_;
    Vector gbar_;
    double mass(int j, Vertex k) const { return tree_[(std::size_t{1} << j) - 1 + k]; }
};

Vertex sequential_sample(const CubeMeasure& nu, std::span<const double> u);
std::pair<Vertex, Vertex> coupled_sample(const CubeMeasure& nu, std::span<const double> u);

}  // namespace mfld
