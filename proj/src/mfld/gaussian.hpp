#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"

namespace mfld {

inline constexpr int kMaxGaussianDim = 3;

// sum_k w_k N(theta_k, I); d nu / d gamma (x) = sum_k w_k exp(<theta_k, x> - |theta_k|^2 / 2).
class GaussianMixture {
public:
    GaussianMixture() = default;
    // weights must sum to 1 (within 1e-6; then renormalized); rows of `centers` are the theta_k
    GaussianMixture(std::vector<double> weights, Matrix centers);

    int dim() const { return static_cast<int>(centers_.cols()); }
    int components() const { return static_cast<int>(centers_.rows()); }
    const std::vector<double>& weights() const { return w_; }
    const Matrix& centers() const { return centers_; }

    static GaussianMixture single(const Vector& theta);
    static GaussianMixture symmetric(const Vector& theta);  // (N(theta) + N(-theta)) / 2

private:
    std::vector<double> w_;
    Matrix centers_;
};

// f = log d nu / d gamma and its gradient (softmax average of the centers)
std::pair<double, Vector> mixture_f_grad(const GaussianMixture& nu, const Vector& x);
double mixture_laplacian(const GaussianMixture& nu, const Vector& x);

// Probabilists' Gauss-Hermite rule: nodes and weights summing to 1.
struct GaussHermite {
    std::vector<double> nodes, weights;
};
GaussHermite gauss_hermite(int points);

// Orthonormal basis of span{theta_k} (columns); zero columns when all centers vanish.
Matrix center_span(const GaussianMixture& nu);

// inf over R^d of the Laplacian of f, by refined grid search
double infimum_laplacian(const GaussianMixture& nu);

// Gaussian width of conv{theta_k}
GwEstimate mixture_complexity(const GaussianMixture& nu, std::int64_t samples, std::uint64_t seed);

struct LsiReport {
    double fisher = 0.0;
    double kl = 0.0;
    double gw = 0.0;
    double gw_std_error = 0.0;
    double m_term = 0.0;  // max(-inf Laplacian f, 0)
    double lhs = 0.0;     // I - 2 KL
    double rhs = 0.0;     // 2 gw^{2/3} I^{1/3} + m_term
    bool satisfied = false;   // lhs <= rhs at gw + 3 std errors
    bool converged = true;    // quadrature refinement agreed within 1e-6
    double quadrature_delta = 0.0;
};

struct QuadratureMoments {
    double fisher = 0.0, kl = 0.0;
};
QuadratureMoments mixture_fisher_kl(const GaussianMixture& nu, int points_per_dim);

LsiReport reverse_lsi_check(const GaussianMixture& nu, int quadrature_points, std::int64_t gw_samples, std::uint64_t seed);

struct TiltReport {
    Vector x0;
    double tr_nabla_v = 0.0;
    double w2_sq = 0.0;      // W2(nu_{x0}, gamma_u)^2
    double gw = 0.0;
    double gw_std_error = 0.0;
    double inf_laplacian = 0.0;
    double rhs = 0.0;        // 2 sqrt(d) / r * (gw + 3 se) - inf Laplacian
    double slack = 0.0;
    bool satisfied = false;
};
// 1D W2 between sum_k w_k N(m_k, 1) and N(u, 1), u the mixture mean
double w2_sq_mixture_to_gaussian_1d(const std::vector<double>& w, const std::vector<double>& m);
TiltReport gaussian_tilt_search(const GaussianMixture& nu, double r, int grid, std::int64_t gw_samples, std::uint64_t seed);

struct FollmerStats {
    std::int64_t paths = 0;
    double dt = 0.0;
    double energy = 0.0;  // E int_0^1 |v_t|^2 dt
    double energy_std_error = 0.0;
    double two_kl = 0.0;  // quadrature
    bool representation_ok = false;
    std::vector<double> ks;  // KS distance of <X_1, e> to the exact marginal, per span direction
    double ks_critical = 0.0;
    struct Curve {
        double t, mean_tr_h, std_error, bound;
        bool ok;
    };
    std::vector<Curve> curve;  // E Tr H_t against GW / sqrt(t) + M
    double gw = 0.0;
    double m_term = 0.0;
    double max_v_drift_sigma = 0.0;  // |E v_t - v_0| / std error, max over checkpoints and coordinates
};
FollmerStats gaussian_follmer_simulate(const GaussianMixture& nu, double dt, std::int64_t paths, std::uint64_t seed);

}  // namespace mfld
