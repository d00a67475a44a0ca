#pragma once

#include "mfld/cube.hpp"

namespace mfld {

// (1/delta)(2 Lip + |log p(1-p)|)^{2/3} (2 D + Lip^2 / delta)^{1/3}
double ld_L(double lip, double complexity, double p, double delta);

struct LdUpper {
    double bound = 0.0;  // on log P(f >= t n); 0 when vacuous
    double L = 0.0;
    bool vacuous = false;
};
// phi is phi_p(t - delta); requires 0 < delta < phi / n
LdUpper ld_upper(double phi, double lip, double complexity, int n, double p, double t, double delta);

struct LdLower {
    double bound = 0.0;  // on log P(f >= (t - delta) n)
    bool hypothesis_ok = false;
};
// phi is phi_p(t); hypothesis Lip^2 / (n delta^2) <= 1/2
LdLower ld_lower(double phi, double lip, int n, double t, double delta);

// log mu_p({f >= t n}); -inf when the event is empty
double exact_tail(const CubeFunction& f, double p, double t);

struct LdBoundReport {
    double t = 0.0, delta = 0.0, p = 0.0;
    double phi_lower_arg = 0.0;  // phi_p(t - delta)
    double phi_at_t = 0.0;
    double L = 0.0;
    double upper_bound = 0.0;
    double lower_bound = 0.0;
    bool vacuous_upper = false;
    bool upper_hypothesis_ok = false;
    bool hypothesis_ok_lower = false;
};

LdBoundReport ld_report(double phi_t_minus_delta, double phi_t, double lip, double complexity, int n, double p, double t,
                        double delta);

}  // namespace mfld
