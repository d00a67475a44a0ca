#include "doctest.h"

#include <cmath>
#include <random>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/localization.hpp"
#include "mfld/transport.hpp"
#include "oracles/oracles.hpp"

using namespace mfld;

namespace {

CubeMeasure random_measure(int n, std::mt19937_64& rng, double scale = 1.0) {
    return CubeMeasure::from_log_density(n, oracle::random_log_density(n, rng, scale));
}

Vector random_point(int n, std::mt19937_64& rng, double r = 0.9) {
    std::uniform_real_distribution<double> U(-r, r);
    Vector x(n);
    for (int i = 0; i < n; ++i) x[i] = U(rng);
    return x;
}

// conditional law of the endpoint given x, straight from w(x, y) = prod (1 + x_i y_i) / 2
std::vector<double> conditional_direct(const std::vector<double>& p, const Vector& x) {
    const int n = static_cast<int>(x.size());
    std::vector<double> w(p.size());
    double z = 0;
    for (std::size_t y = 0; y < p.size(); ++y) {
        double a = p[y];
        for (int i = 0; i < n; ++i) a *= 0.5 * (1 + x[i] * oracle::sgn(static_cast<std::uint32_t>(y), i));
        z += (w[y] = a);
    }
    for (double& v : w) v /= z;
    return w;
}

}  // namespace

TEST_CASE("conditional law is the eta tilt") {
    std::mt19937_64 rng(1);
    const CubeMeasure nu = random_measure(4, rng);
    for (int k = 0; k < 10; ++k) {
        const Vector x = random_point(4, rng);
        const auto want = conditional_direct(nu.probabilities(), x);
        const auto got = conditional_law(nu, x).probabilities();
        const auto viaeta = tilt(nu, eta(x)).probabilities();
        const auto w = LocalizationField(nu).conditional_weights(x);
        for (std::size_t y = 0; y < 16; ++y) {
            CHECK(got[y] == doctest::Approx(want[y]).epsilon(1e-12));
            CHECK(viaeta[y] == doctest::Approx(want[y]).epsilon(1e-12));
            CHECK(w[y] == doctest::Approx(want[y]).epsilon(1e-12));
        }
    }
}

TEST_CASE("conditional moments") {
    std::mt19937_64 rng(2);
    const int n = 4;
    const CubeMeasure nu = random_measure(n, rng);
    const LocalizationField field(nu);

    // at the origin the process sits at its initial values
    CHECK((g_process(nu, Vector::Zero(n)) - center_of_mass(nu)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((h_t_matrix(nu, Vector::Zero(n)) - h_matrix(nu)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(field.h(Vector::Zero(n)) == doctest::Approx(1.0));

    for (int k = 0; k < 5; ++k) {
        const Vector x = random_point(n, rng);
        const auto c = conditional_direct(nu.probabilities(), x);
        // g_t = E[g(Y) | x], H_t = Cov(g(Y) | x)
        const Vector g = g_process(nu, x);
        Vector eg = Vector::Zero(n);
        Matrix s = Matrix::Zero(n, n);
        for (Vertex y = 0; y < 16; ++y) {
            const Vector gy = g_map(nu, y);
            eg += c[y] * gy;
            s += c[y] * gy * gy.transpose();
        }
        CHECK((g - eg).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((h_t_matrix(nu, x) - (s - eg * eg.transpose())).cwiseAbs().maxCoeff() < 1e-10);

        // drift is grad log h, by finite differences
        const Vector v = field.drift(x);
        for (int i = 0; i < n; ++i) {
            Vector xp = x, xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            CHECK(v[i] == doctest::Approx((std::log(field.h(xp)) - std::log(field.h(xm))) / 2e-6).epsilon(1e-6));
        }
        CHECK((v - v_map(nu, x)).cwiseAbs().maxCoeff() < 1e-10);

        // Gamma: row i is the gradient of q_i = g_i h, over h, minus g_t v_t^T
        const Matrix G = gamma_matrix(nu, x);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Vector xp = x, xm = x;
                xp[j] += 1e-6;
                xm[j] -= 1e-6;
                const double qp = g_process(nu, xp)[i] * field.h(xp), qm = g_process(nu, xm)[i] * field.h(xm);
                const double want = (qp - qm) / 2e-6 / field.h(x) - g[i] * v[j];
                CHECK(G(i, j) == doctest::Approx(want).epsilon(1e-5).scale(1.0));
            }

        // Tr H <= 4 Tr A
        CHECK(h_t_matrix(nu, x).trace() <= 4 * a_matrix(nu, x).trace() + 1e-9);
    }
}

TEST_CASE("paths are deterministic and end on vertices") {
    std::mt19937_64 rng(3);
    SdeConfig cfg;
    cfg.nu = random_measure(3, rng);
    cfg.seed = 42;
    cfg.dt = 2e-3;
    const auto a = simulate_path(cfg, 5), b = simulate_path(cfg, 5);
    CHECK(a.endpoint == b.endpoint);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK((a.samples.back().x - b.samples.back().x).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.completed);
    for (const auto& s : a.samples) CHECK(s.x.cwiseAbs().maxCoeff() <= 1.0);
    // before t = 1 nothing leaves [-1/2, 1/2]
    for (const auto& s : a.samples)
        if (s.t < 1.0) CHECK(s.x.cwiseAbs().maxCoeff() <= 0.5);

    const LocalizationField field(cfg.nu);
    for (std::uint64_t i = 0; i < 20; ++i) CHECK(simulate_endpoint(field, cfg, i) == simulate_path(cfg, i).endpoint);
}

TEST_CASE("endpoint law matches the measure") {
    std::mt19937_64 rng(4);
    SdeConfig cfg;
    cfg.nu = random_measure(3, rng);
    cfg.seed = 7;
    cfg.dt = 2e-3;
    EndpointStats st;
    const auto law = endpoint_law(cfg, 20000, &st);
    CHECK(st.paths == 20000);
    CHECK(tv_distance(law, cfg.nu.probabilities()) < 0.03);
}

TEST_CASE("tilt decomposition reconstructs the measure") {
    std::mt19937_64 rng(5);
    SdeConfig cfg;
    cfg.nu = random_measure(4, rng, 0.8);
    cfg.seed = 11;
    cfg.dt = 2e-3;
    cfg.eps = 0.05;
    const auto mix = decompose(cfg, 3000);
    double wsum = 0;
    for (const auto& a : mix.atoms) {
        wsum += a.weight;
        CHECK(a.theta.norm() <= cfg.eps * 2 + 1e-6);  // stopped at ||eta|| = eps sqrt(n)
    }
    CHECK(wsum == doctest::Approx(1.0));
    const auto law = mixture_law(cfg.nu, mix);
    CHECK(tv_distance(law, cfg.nu.probabilities()) < 0.03);

    // Jensen: KL of the mixture to uniform is at most the average of the atoms'
    const double avg = mixture_average_kl(cfg.nu, mix);
    std::vector<double> u(16, 1.0 / 16);
    CHECK(oracle::kl_direct(law, u) <= avg + 1e-12);

    const auto& d = mix.diagnostics;
    CHECK(d.stopped_trace + d.stopped_norm + d.stopped_frozen + d.stopped_horizon == 3000);
    CHECK(d.target_fraction == doctest::Approx(1 - 0.5 - 0.25));
}

TEST_CASE("mixture law of explicit atoms") {
    std::mt19937_64 rng(6);
    const CubeMeasure nu = random_measure(3, rng);
    TiltMixture mix;
    mix.n = 3;
    Vector t1(3), t2(3);
    t1 << 0.5, 0, -1;
    t2 << -0.2, 0.3, 0.1;
    mix.atoms.push_back({t1, 0.25, 0, 0, "trace"});
    mix.atoms.push_back({t2, 0.75, 0, 0, "trace"});
    const auto got = mixture_law(nu, mix);
    const auto a = tilt(nu, t1).probabilities(), b = tilt(nu, t2).probabilities();
    for (int y = 0; y < 8; ++y) CHECK(got[y] == doctest::Approx(0.25 * a[y] + 0.75 * b[y]).epsilon(1e-12));
    const double want = 0.25 * kl_to_uniform(tilt(nu, t1)) + 0.75 * kl_to_uniform(tilt(nu, t2));
    CHECK(mixture_average_kl(nu, mix) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("tau threshold") {
    SdeConfig cfg;
    cfg.nu = CubeMeasure::uniform(3);
    cfg.eps = 0.05;
    cfg.alpha = 2;
    CHECK(tau_threshold(cfg, 0.5) == doctest::Approx(16 * 2 * 0.5 / 0.05));
    cfg.threshold_override = 0.3;
    CHECK(tau_threshold(cfg, 0.5) == 0.3);
}

TEST_CASE("config validation") {
    SdeConfig cfg;
    cfg.nu = CubeMeasure::uniform(3);
    cfg.dt = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.dt = 1e-3;
    cfg.eps = -1;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
