#include "mfld/ld_bounds.hpp"

#include <cmath>
#include <string>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"

namespace mfld {

double ld_L(double lip, double complexity, double p, double delta) {
    require(delta > 0.0, ErrorCode::Domain, "delta must be positive");
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    require(lip >= 0.0 && complexity >= 0.0, ErrorCode::InvalidArgument, "Lip and D must be nonnegative");
    const double a = 2.0 * lip + std::abs(std::log(p * (1.0 - p)));
    const double b = 2.0 * complexity + lip * lip / delta;
    return std::cbrt(a * a) * std::cbrt(b) / delta;
}

LdUpper ld_upper(double phi, double lip, double complexity, int n, double p, double t, double delta) {
    (void)t;
    require(n >= 1, ErrorCode::InvalidArgument, "n must be positive");
    require(delta > 0.0, ErrorCode::Domain, "hypothesis 0 < delta violated");
    require(delta < phi / n, ErrorCode::Domain,
            "hypothesis delta < phi_p(t - delta) / n violated (delta=" + std::to_string(delta) +
                ", phi/n=" + std::to_string(phi / n) + ")");
    LdUpper r;
    r.L = ld_L(lip, complexity, p, delta);
    const double factor = 1.0 - 64.0 * r.L / std::cbrt(static_cast<double>(n));
    r.vacuous = factor <= 0.0;
    r.bound = r.vacuous ? 0.0 : -phi * factor;
    return r;
}

LdLower ld_lower(double phi, double lip, int n, double t, double delta) {
    (void)t;
    require(n >= 1, ErrorCode::InvalidArgument, "n must be positive");
    require(delta > 0.0, ErrorCode::Domain, "delta must be positive");
    LdLower r;
    const double ratio = lip * lip / (n * delta * delta);
    r.hypothesis_ok = ratio <= 0.5;
    r.bound = -phi * (1.0 + 2.0 * ratio) - 2.0;
    return r;
}

double exact_tail(const CubeFunction& f, double p, double t) {
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    const int n = f.dim();
    const double tn = t * n, lp = std::log(p), lq = std::log1p(-p);
    std::vector<double> a;
    a.reserve(f.size());
    for (Vertex y = 0; y < f.size(); ++y) {
        if (f(y) < tn) continue;
        const int k = std::popcount(y);
        a.push_back(k * lp + (n - k) * lq);
    }
    return a.empty() ? kNegInf : std::min(0.0, log_sum_exp(a));
}

LdBoundReport ld_report(double phi_t_minus_delta, double phi_t, double lip, double complexity, int n, double p, double t,
                        double delta) {
    LdBoundReport r;
    r.t = t;
    r.delta = delta;
    r.p = p;
    r.phi_lower_arg = phi_t_minus_delta;
    r.phi_at_t = phi_t;
    r.L = ld_L(lip, complexity, p, delta);
    r.upper_hypothesis_ok = delta > 0.0 && delta < phi_t_minus_delta / n;
    if (r.upper_hypothesis_ok) {
        const LdUpper u = ld_upper(phi_t_minus_delta, lip, complexity, n, p, t, delta);
        r.upper_bound = u.bound;
        r.vacuous_upper = u.vacuous;
    } else {
        r.vacuous_upper = true;
    }
    const LdLower l = ld_lower(phi_t, lip, n, t, delta);
    r.lower_bound = l.bound;
    r.hypothesis_ok_lower = l.hypothesis_ok;
    return r;
}

}  // namespace mfld
