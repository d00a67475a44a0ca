#include "mfld/sampler.hpp"

#include <algorithm>

#include "mfld/error.hpp"

namespace mfld {

SequentialSampler::SequentialSampler(const CubeMeasure& nu) : n_(nu.dim()), gbar_(center_of_mass(nu)) {
    const std::size_t N = nu.size();
    tree_.assign(2 * N - 1, 0.0);
    const auto p = nu.probabilities();
    std::copy(p.begin(), p.end(), tree_.begin() + (N - 1));
    for (int j = n_ - 1; j >= 0; --j) {
        const std::size_t len = std::size_t{1} << j;
        for (std::size_t k = 0; k < len; ++k)
            tree_[len - 1 + k] = mass(j + 1, static_cast<Vertex>(k)) + mass(j + 1, static_cast<Vertex>(k + len));
    }
}

double SequentialSampler::threshold(int i, Vertex prefix) const {
    const double total = mass(i, prefix);
    if (!(total > 0.0)) return 0.0;
    const double up = mass(i + 1, prefix | (Vertex{1} << i));
    const double dn = mass(i + 1, prefix);
    return std::clamp((up - dn) / total, -1.0, 1.0);
}

Vertex SequentialSampler::sample(std::span<const double> u) const {
    require(static_cast<int>(u.size()) == n_, ErrorCode::InvalidArgument, "sampler: u has wrong dimension");
    Vertex z = 0;
    for (int i = 0; i < n_; ++i) {
        const Vertex up = z | (Vertex{1} << i);
        bool plus = u[i] <= threshold(i, z);
        // u on the boundary of [-1,1] must not select a null branch
        if (plus && !(mass(i + 1, up) > 0.0)) plus = false;
        else if (!plus && !(mass(i + 1, z) > 0.0)) plus = true;
        if (plus) z = up;
    }
    return z;
}

std::pair<Vertex, Vertex> SequentialSampler::coupled(std::span<const double> u) const {
    const Vertex z = sample(u);
    Vertex y = 0;
    for (int i = 0; i < n_; ++i)
        if (u[i] <= gbar_[i]) y |= Vertex{1} << i;
    return {z, y};
}

std::vector<double> SequentialSampler::exact_law() const {
    const std::size_t N = std::size_t{1} << n_;
    std::vector<double> law(N);
    for (std::size_t y = 0; y < N; ++y) {
        double p = 1.0;
        for (int i = 0; i < n_ && p > 0.0; ++i) {
            const Vertex prefix = static_cast<Vertex>(y & ((std::size_t{1} << i) - 1));
            p *= 0.5 * (1.0 + spin(static_cast<Vertex>(y), i) * threshold(i, prefix));
        }
        law[y] = p;
    }
    return law;
}

Vertex sequential_sample(const CubeMeasure& nu, std::span<const double> u) { return SequentialSampler(nu).sample(u); }

std::pair<Vertex, Vertex> coupled_sample(const CubeMeasure& nu, std::span<const double> u) {
    return SequentialSampler(nu).coupled(u);
}

}  // namespace mfld
