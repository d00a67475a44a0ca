#pragma once

#include <cstdint>

#include "mfld/complexity.hpp"
#include "mfld/graphs.hpp"
#include "mfld/localization.hpp"

namespace mfld {

inline constexpr int kMaxErgmVertices = 6;

struct ErgmOptions {
    double eps = 0.1;                 // target epsilon of the mixture
    std::int64_t paths = 400;         // atoms of the decomposition
    std::uint64_t seed = 0;
    double dt = 1e-4;
    double alpha = 2.0;
    double threshold_override = -1.0;
    std::int64_t hamming_samples = 16;  // coupled draws per atom
};

struct ErgmReport {
    TiltMixture mixture;
    double eps_localization = 0.0;    // epsilon handed to the localization run
    double entropy = 0.0;             // Ent(G), nats
    double mixture_edge_entropy = 0.0;  // sum_k w_k I(p(theta_k))
    double entropy_budget = 0.0;      // eps * C(N,2)
    bool entropy_ok = false;
    GwEstimate hamming;               // E d_H(G, G') of the threshold coupling
    double hamming_bound = 0.0;       // 20 C(N,2)^{11/12} eps^{-1/3} (sum |beta| |E|)^{1/3}
    bool hamming_ok = false;
};

double ergm_hamming_bound(const SubgraphModel& model, double eps);
ErgmReport ergm_decompose(const SubgraphModel& model, const ErgmOptions& opt);

}  // namespace mfld
