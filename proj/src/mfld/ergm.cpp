#include "mfld/ergm.hpp"

#include <algorithm>
#include <cmath>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/parallel.hpp"
#include "mfld/random.hpp"
#include "mfld/sampler.hpp"

namespace mfld {

double ergm_hamming_bound(const SubgraphModel& model, double eps) {
    double mass = 0.0;
    for (const auto& term : model.terms) mass += std::abs(term.beta) * term.h.num_edges();
    const double pairs = model.dim();
    return 20.0 * std::pow(pairs, 11.0 / 12.0) * std::pow(eps, -1.0 / 3.0) * std::cbrt(mass);
}

namespace {
double binary_entropy(double q) { return -xlogx(q) - xlogx(1.0 - q); }
}  // namespace

ErgmReport ergm_decompose(const SubgraphModel& model, const ErgmOptions& opt) {
    model.validate();
    require(model.N <= kMaxErgmVertices, ErrorCode::Capacity,
            "ergm: N = " + std::to_string(model.N) + " exceeds the dense-table cap of " + std::to_string(kMaxErgmVertices));
    require(opt.eps > 0.0 && opt.eps <= 1.0, ErrorCode::InvalidArgument, "ergm: eps must lie in (0, 1]");
    require(opt.paths >= 1 && opt.hamming_samples >= 1, ErrorCode::InvalidArgument, "ergm: counts must be positive");
    const int n = model.dim();

    ErgmReport rep;
    const CubeMeasure nu = CubeMeasure::from_function(model_table(model));
    // entropy bookkeeping of the localization loses at most 2 eps' n
    rep.eps_localization = std::min(0.5 * opt.eps, std::nextafter(1.0 / 16.0, 0.0));

    SdeConfig cfg;
    cfg.nu = nu;
    cfg.dt = opt.dt;
    cfg.seed = opt.seed;
    cfg.eps = rep.eps_localization;
    cfg.alpha = opt.alpha;
    cfg.check_every = 1;
    cfg.threshold_override = opt.threshold_override;
    rep.mixture = decompose(cfg, opt.paths);

    rep.entropy = n * std::log(2.0) - kl_to_uniform(nu);
    const auto& atoms = rep.mixture.atoms;
    std::vector<double> edge_entropy(atoms.size()), ham_sum(atoms.size()), ham_sq(atoms.size());
    parallel_for(0, static_cast<std::int64_t>(atoms.size()), [&](std::int64_t a) {
        const CubeMeasure tilted = tilt(nu, atoms[a].theta);
        const SequentialSampler sampler(tilted);
        const Vector m = sampler.center();
        double ent = 0.0;
        for (int e = 0; e < n; ++e) ent += binary_entropy(std::clamp(0.5 * (1.0 + m[e]), 0.0, 1.0));
        edge_entropy[a] = ent;
        Rng rng = stream_rng(opt.seed ^ 0xc2b2ae3d27d4eb4fULL, static_cast<std::uint64_t>(a));
        UniformDist unif(-1.0, 1.0);
        std::vector<double> u(n);
        double s = 0.0, s2 = 0.0;
        for (std::int64_t k = 0; k < opt.hamming_samples; ++k) {
            for (auto& v : u) v = unif(rng);
            const auto [z, y] = sampler.coupled(u);
            const double d = hamming(z, y);
            s += d;
            s2 += d * d;
        }
        ham_sum[a] = s;
        ham_sq[a] = s2;
    });

    double mixed = 0.0, s = 0.0, s2 = 0.0;
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        mixed += atoms[a].weight * edge_entropy[a];
        s += ham_sum[a];
        s2 += ham_sq[a];
    }
    rep.mixture_edge_entropy = mixed;
    rep.entropy_budget = opt.eps * n;
    rep.entropy_ok = rep.entropy - mixed <= rep.entropy_budget + 1e-9;

    const double total = static_cast<double>(atoms.size()) * static_cast<double>(opt.hamming_samples);
    rep.hamming.samples = static_cast<std::int64_t>(total);
    rep.hamming.mean = s / total;
    const double var = total > 1 ? std::max(0.0, (s2 - s * s / total) / (total - 1)) : 0.0;
    rep.hamming.std_error = std::sqrt(var / total);
    rep.hamming_bound = ergm_hamming_bound(model, opt.eps);
    rep.hamming_ok = rep.hamming.mean <= rep.hamming_bound;
    return rep;
}

}  // namespace mfld
