#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"
#include "mfld/random.hpp"

namespace mfld {

// Discrete stochastic localization:
//   dX = sigma^{1/2} dB + sigma v(X) dt,  v = grad h / h,
// sigma_i = 1 while |x_i| < 1/2 (t < 1) or |x_i| < 1 (t >= 1), else 0.
struct SdeConfig {
    CubeMeasure nu;
    double dt = 1e-3;
    double t_max = 20.0;
    std::uint64_t seed = 0;
    double eps = 0.06;
    double alpha = 2.0;
    int check_every = 10;   // exact conditional moments every k steps
    int record_every = 10;  // path samples kept every k steps
    // Gaussian width of {g_nu(y)} used by tau; negative -> Monte-Carlo estimate + 3 sigma
    double gw = -1.0;
    std::int64_t gw_samples = 4000;
    // replaces 16 alpha GW / eps when positive
    double threshold_override = -1.0;

    void validate() const;
};

struct ConditionalMoments {
    double h = 0.0;   // harmonic extension of the density at x
    Vector g;         // g_t = q / h
    Vector v;         // v_t = grad h / h
    Matrix H;         // Cov(g_inf | x)
    Matrix A;         // E[g_inf (x) v_inf | x] - g_t (x) v_t
    Matrix Gamma;     // grad q / h - g_t (x) v_t; row i = gradient of q_i
};

// Precomputed tables of one measure: densities, g(y) and v(y) = grad e^f(y) / e^f(y).
class LocalizationField {
public:
    explicit LocalizationField(const CubeMeasure& nu);

    int dim() const { return n_; }
    const CubeMeasure& measure() const { return nu_; }
    const std::vector<double>& densities() const { return dens_; }
    const Matrix& g_rows() const { return g_; }
    const Matrix& v_rows() const { return v_; }

    // conditional law y -> w(x,y) e^{f(y)} / h(x), as probabilities
    std::vector<double> conditional_weights(const Vector& x) const;
    double h(const Vector& x) const;
    // zero vector when h(x) = 0
    Vector drift(const Vector& x) const;
    ConditionalMoments moments(const Vector& x, bool with_gamma = true) const;
    // sum over active coordinates of Var(g_i | x)
    double trace_sigma_h(const Vector& x, double t) const;

private:
    int n_;
    CubeMeasure nu_;
    std::vector<double> dens_;
    Matrix g_, v_;
};

// sigma_i(x, t) in {0, 1}
inline bool coordinate_active(double xi, double t) { return std::abs(xi) < (t < 1.0 ? 0.5 : 1.0); }

CubeMeasure conditional_law(const CubeMeasure& nu, const Vector& x);
Vector g_process(const CubeMeasure& nu, const Vector& x);
Matrix a_matrix(const CubeMeasure& nu, const Vector& x);
Matrix h_t_matrix(const CubeMeasure& nu, const Vector& x);
Matrix gamma_matrix(const CubeMeasure& nu, const Vector& x);

struct SdeSample {
    double t = 0.0;
    Vector x;
    std::vector<std::uint8_t> frozen;
    Vector v;
    Vector g;
};

struct SdeCheck {
    double t = 0.0;
    Vector x;
    double tr_h = 0.0;      // Tr(sigma^{1/2} H_t)
    double tr_a = 0.0;      // Tr(sigma^{1/2} A_t)
    double tr_gamma = 0.0;  // Tr(sigma^{1/2} Gamma_t)
    double hull_excess = 0.0;  // max over test directions of <g_t,u> - max_y <g(y),u>
};

struct SdePath {
    std::vector<SdeSample> samples;
    std::vector<SdeCheck> checks;
    Vertex endpoint = 0;
    bool completed = false;   // every coordinate reached +-1 before t_max
    double t_end = 0.0;
    double t_eps = 1.0;               // T_eps (capped at 1)
    std::string t_eps_reason = "horizon";  // norm | frozen | horizon
    double tau = -1.0;                // first checked time with trace below threshold, min T_eps; -1 if unknown
};

// Conservative GW({g_nu(y)}) (mean + 3 std errors) and the tau threshold.
double conservative_gw(const LocalizationField& field, std::int64_t samples, std::uint64_t seed);
double tau_threshold(const SdeConfig& cfg, double gw);

// Full trace of path `index` (seeded by cfg.seed and index).
SdePath simulate_path(const SdeConfig& cfg, std::uint64_t index = 0);
SdePath simulate_path(const LocalizationField& field, const SdeConfig& cfg, std::uint64_t index, double threshold);

// Endpoint only, with tables shrunk as coordinates settle. Same noise stream as simulate_path.
struct EndpointStats {
    std::int64_t paths = 0;
    std::int64_t truncated = 0;  // t_max reached; remaining coordinates drawn from the exact conditional law
    double mean_steps = 0.0;
};
Vertex simulate_endpoint(const LocalizationField& field, const SdeConfig& cfg, std::uint64_t index, bool* truncated = nullptr,
                         std::int64_t* steps = nullptr);
std::vector<double> endpoint_law(const SdeConfig& cfg, std::int64_t paths, EndpointStats* stats = nullptr);

struct TiltAtom {
    Vector theta;
    double weight = 0.0;
    double tau = 0.0;
    double trace = 0.0;  // Tr(sigma^{1/2} H) at the stopping point
    std::string reason;  // trace | norm | frozen | horizon
};

struct MixtureDiagnostics {
    double gw = 0.0;
    double threshold = 0.0;
    double fraction_below_threshold = 0.0;
    double target_fraction = 0.0;  // 1 - 1/alpha - 1/n
    std::int64_t stopped_trace = 0, stopped_norm = 0, stopped_frozen = 0, stopped_horizon = 0;
    double max_theta_norm = 0.0;
    double max_theta_inf = 0.0;
};

struct TiltMixture {
    int n = 0;
    double eps = 0.0;
    std::vector<TiltAtom> atoms;
    MixtureDiagnostics diagnostics;
};

TiltMixture decompose(const SdeConfig& cfg, std::int64_t num_atoms);

// sum_k w_k tilt(nu, theta_k), as probabilities
std::vector<double> mixture_law(const CubeMeasure& nu, const TiltMixture& mix);
// sum_k w_k KL(tilt(nu, theta_k) || mu)
double mixture_average_kl(const CubeMeasure& nu, const TiltMixture& mix);

// Invariant checks along simulated paths.
struct PathReport {
    std::int64_t paths = 0;
    std::int64_t states = 0;
    std::int64_t htat_violations = 0;  // Tr(sH) > 4 Tr(sA) + 1e-9
    double max_htat_ratio = 0.0;
    double max_trace_gap = 0.0;        // |Tr(s Gamma) - Tr(s A)|
    std::int64_t hull_violations = 0;
    double max_hull_excess = 0.0;
    double gw = 0.0;
    struct Divergence {
        double alpha, t, fraction, std_error;
    };
    std::vector<Divergence> divergence;
    // martingale checks
    double max_ito_drift = 0.0;       // |drift of g_t| from finite differences, max over states
    double max_mean_g_dev_sigma = 0.0;  // max over t, i of |mean g_t - g_0| / std error
};
PathReport along_path_report(const SdeConfig& cfg, std::int64_t paths, const std::vector<double>& alphas,
                             const std::vector<double>& times);

}  // namespace mfld
