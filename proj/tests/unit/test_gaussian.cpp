#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/gaussian.hpp"

using namespace mfld;

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// 1D mixture sum w_k N(m_k, 1): Fisher and KL against N(0,1) by trapezoid
void trapezoid_fisher_kl(const std::vector<double>& w, const std::vector<double>& m, double& fisher, double& kl) {
    fisher = kl = 0;
    const double a = -30, b = 30;
    const int K = 300000;
    const double h = (b - a) / K;
    for (int k = 0; k <= K; ++k) {
        const double x = a + k * h;
        double dens = 0, ratio = 0, dratio = 0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            dens += w[j] * normal_pdf(x - m[j]);
            const double e = std::exp(m[j] * x - 0.5 * m[j] * m[j]);
            ratio += w[j] * e;
            dratio += w[j] * m[j] * e;
        }
        const double c = (k == 0 || k == K) ? 0.5 : 1.0;
        const double grad = dratio / ratio;
        fisher += c * h * dens * grad * grad;
        kl += c * h * dens * std::log(ratio);
    }
}

// W2^2 between a 1D mixture and N(u, 1) through quantiles, bisection on the CDF
double quantile_w2(const std::vector<double>& w, const std::vector<double>& m) {
    double u = 0;
    for (std::size_t j = 0; j < w.size(); ++j) u += w[j] * m[j];
    const int S = 20000;
    double s = 0;
    for (int k = 0; k < S; ++k) {
        const double q = (k + 0.5) / S;
        double lo = -40, hi = 40;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            double c = 0;
            for (std::size_t j = 0; j < w.size(); ++j) c += w[j] * normal_cdf(mid - m[j]);
            (c < q ? lo : hi) = mid;
        }
        // Gaussian quantile by the same bisection
        double glo = -40, ghi = 40;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (glo + ghi);
            (normal_cdf(mid) < q ? glo : ghi) = mid;
        }
        const double d = 0.5 * (lo + hi) - (u + 0.5 * (glo + ghi));
        s += d * d / S;
    }
    return s;
}

}  // namespace

TEST_CASE("Gauss-Hermite moments") {
    const auto gh = gauss_hermite(40);
    double s0 = 0, s2 = 0, s4 = 0, s1 = 0;
    for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
        const double x = gh.nodes[k];
        s0 += gh.weights[k];
        s1 += gh.weights[k] * x;
        s2 += gh.weights[k] * x * x;
        s4 += gh.weights[k] * x * x * x * x;
    }
    CHECK(s0 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(s1) < 1e-12);
    CHECK(s2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s4 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("f and its derivatives") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Matrix c(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) c(i, j) = nd(rng);
    const GaussianMixture nu({0.2, 0.5, 0.3}, c);
    for (int k = 0; k < 5; ++k) {
        Vector x(2);
        x << nd(rng), nd(rng);
        double want = 0;
        for (int i = 0; i < 3; ++i) want += nu.weights()[i] * std::exp(c.row(i).dot(x) - 0.5 * c.row(i).squaredNorm());
        const auto [f, g] = mixture_f_grad(nu, x);
        CHECK(f == doctest::Approx(std::log(want)).epsilon(1e-13));
        double lap = 0;
        for (int j = 0; j < 2; ++j) {
            Vector xp = x, xm = x;
            xp[j] += 1e-5;
            xm[j] -= 1e-5;
            const double fp = mixture_f_grad(nu, xp).first, fm = mixture_f_grad(nu, xm).first;
            CHECK(g[j] == doctest::Approx((fp - fm) / 2e-5).epsilon(1e-7));
            lap += (fp - 2 * f + fm) / 1e-10;
        }
        CHECK(mixture_laplacian(nu, x) == doctest::Approx(lap).epsilon(1e-4));
    }
}

TEST_CASE("single Gaussian: LSI holds with equality") {
    Vector theta(2);
    theta << 0.7, -1.1;
    const auto q = mixture_fisher_kl(GaussianMixture::single(theta), 20);
    CHECK(q.fisher == doctest::Approx(theta.squaredNorm()).epsilon(1e-12));
    CHECK(q.kl == doctest::Approx(0.5 * theta.squaredNorm()).epsilon(1e-12));
    const auto r = reverse_lsi_check(GaussianMixture::single(theta), 20, 2000, 3);
    CHECK(std::abs(r.lhs) < 1e-10);
    CHECK(r.gw == 0.0);
    CHECK(r.satisfied);
}

TEST_CASE("Fisher information and KL against trapezoid integration") {
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
        {{0.5, 0.5}, {1.5, -1.5}}, {{0.3, 0.7}, {2.0, -0.5}}, {{0.2, 0.3, 0.5}, {-2.0, 0.0, 1.0}}};
    for (const auto& [w, m] : cases) {
        Matrix c(static_cast<int>(m.size()), 1);
        for (std::size_t k = 0; k < m.size(); ++k) c(k, 0) = m[k];
        const GaussianMixture nu(w, c);
        double fi, kl;
        trapezoid_fisher_kl(w, m, fi, kl);
        const auto q = mixture_fisher_kl(nu, 150);
        INFO("fisher " << q.fisher - fi << " kl " << q.kl - kl);
        CHECK(q.fisher == doctest::Approx(fi).epsilon(1e-6));
        CHECK(q.kl == doctest::Approx(kl).epsilon(1e-6));
    }
}

TEST_CASE("Laplacian infimum") {
    // symmetric pair: Laplacian theta^2 sech^2(theta x) > 0, infimum 0 at infinity
    Vector t(1);
    t << 1.3;
    CHECK(std::abs(infimum_laplacian(GaussianMixture::symmetric(t))) < 1e-6);
    CHECK(infimum_laplacian(GaussianMixture::single(t)) == doctest::Approx(0.0).scale(1.0));
    // any mixture: the Laplacian is a covariance trace, never negative
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    Matrix c(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) c(i, j) = 2 * nd(rng);
    const GaussianMixture nu({1.0 / 3, 1.0 / 3, 1.0 / 3}, c);
    CHECK(infimum_laplacian(nu) >= -1e-12);
    for (int k = 0; k < 20; ++k) {
        Vector x(2);
        x << 3 * nd(rng), 3 * nd(rng);
        CHECK(mixture_laplacian(nu, x) >= infimum_laplacian(nu) - 1e-9);
    }
}

TEST_CASE("span and width of the centers") {
    Matrix c(2, 3);
    c << 1, 2, 0, 2, 4, 0;
    const Matrix Q = center_span(GaussianMixture({0.5, 0.5}, c));
    CHECK(Q.cols() == 1);
    CHECK(Q.col(0).norm() == doctest::Approx(1.0));
    CHECK(std::abs(Q.col(0).dot(Vector::Unit(3, 2))) < 1e-14);

    Vector t(2);
    t << 3, 4;
    const auto e = mixture_complexity(GaussianMixture::symmetric(t), 200000, 4);
    CHECK(std::abs(e.mean - 5 * std::sqrt(2 / std::numbers::pi)) <= 3 * e.std_error);
}

TEST_CASE("one-dimensional W2 through quantiles") {
    CHECK(w2_sq_mixture_to_gaussian_1d({1.0}, {0.8}) < 1e-12);
    for (const auto& [w, m] : std::vector<std::pair<std::vector<double>, std::vector<double>>>{
             {{0.5, 0.5}, {1.0, -1.0}}, {{0.3, 0.7}, {2.0, -0.5}}}) {
        CHECK(w2_sq_mixture_to_gaussian_1d(w, m) == doctest::Approx(quantile_w2(w, m)).epsilon(2e-3));
    }
}

TEST_CASE("reverse LSI on random mixtures") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 6; ++rep) {
        const int d = 1 + rep % 3, k = 2 + rep % 3;
        Matrix c(k, d);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < d; ++j) c(i, j) = 1.5 * nd(rng);
        std::vector<double> w(k);
        double ws = 0;
        for (double& v : w) ws += (v = std::abs(nd(rng)) + 0.1);
        for (double& v : w) v /= ws;
        const auto r = reverse_lsi_check(GaussianMixture(w, c), d == 3 ? 16 : 30, 5000, 10 + rep);
        CHECK(r.satisfied);
        CHECK(r.lhs <= r.rhs);
        CHECK(r.fisher >= 0.0);
        CHECK(r.kl >= 0.0);
    }
}

TEST_CASE("tilt search on a symmetric pair") {
    Vector t(1);
    t << 1.0;
    const auto r = gaussian_tilt_search(GaussianMixture::symmetric(t), 1.0, 101, 5000, 6);
    CHECK(r.satisfied);
    CHECK(r.w2_sq >= 0.0);
    CHECK(r.slack >= 0.0);
}

TEST_CASE("Follmer energy matches twice the KL") {
    Vector t(1);
    t << 1.2;
    const auto s = gaussian_follmer_simulate(GaussianMixture::symmetric(t), 1e-2, 4000, 7);
    CHECK(s.paths == 4000);
    CHECK(std::abs(s.energy - s.two_kl) <= 4 * s.energy_std_error + 0.03 * s.two_kl);
}

TEST_CASE("mixture validation") {
    CHECK_THROWS_AS(GaussianMixture({1.0, -1.0}, Matrix::Zero(2, 1)), Error);
    CHECK_THROWS_AS(GaussianMixture({1.0}, Matrix::Zero(2, 1)), Error);
    CHECK_THROWS_AS(GaussianMixture({1.0}, Matrix::Zero(1, kMaxGaussianDim + 1)), Error);
    CHECK_THROWS_AS(GaussianMixture({1.0, 3.0}, Matrix::Zero(2, 1)), Error);
}
