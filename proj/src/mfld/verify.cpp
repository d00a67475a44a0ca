#include "mfld/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"
#include "mfld/error.hpp"
#include "mfld/gaussian.hpp"
#include "mfld/graphs.hpp"
#include "mfld/ld_bounds.hpp"
#include "mfld/localization.hpp"
#include "mfld/meanfield.hpp"
#include "mfld/numeric.hpp"
#include "mfld/random.hpp"
#include "mfld/sampler.hpp"
#include "mfld/transport.hpp"

namespace mfld {

bool VerifyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

namespace {

struct Ctx {
    Rng rng;
    std::uint64_t seed;
    std::vector<VerifyCheck>* out;
    std::string module;

    // value <= limit
    void le(const std::string& name, double value, double limit) { out->push_back({module, name, value <= limit, value, limit}); }
    void flag(const std::string& name, bool ok) { out->push_back({module, name, ok, ok ? 1.0 : 0.0, 1.0}); }

    CubeMeasure measure(int n, double scale = 1.0) {
        NormalDist nd;
        std::vector<double> f(cube_size(n));
        for (double& v : f) v = scale * nd(rng);
        return CubeMeasure::from_log_density(n, std::move(f));
    }
    Vector gaussian(int n, double scale = 1.0) {
        NormalDist nd;
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = scale * nd(rng);
        return v;
    }
    Vector box(int n, double r) {
        UniformDist u(-r, r);
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = u(rng);
        return v;
    }
};

void cube_checks(Ctx& c) {
    double gcom = 0.0, tanh_err = 0.0, htilt = 0.0, law = 0.0, chain = 0.0, eta_err = 0.0, partial = 0.0;
    double v_half = 0.0, xv = -kInf;
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 3 + rep % 4;
        const CubeMeasure nu = c.measure(n);
        const Matrix G = g_table(nu);
        const auto p = nu.probabilities();
        Vector avg = Vector::Zero(n);
        for (std::size_t y = 0; y < p.size(); ++y) avg += p[y] * G.row(static_cast<Eigen::Index>(y)).transpose();
        gcom = std::max(gcom, (avg - center_of_mass(nu)).cwiseAbs().maxCoeff());

        const CubeFunction f(n, std::vector<double>(nu.log_density().begin(), nu.log_density().end()));
        for (Vertex y = 0; y < cube_size(n); ++y) {
            const Vector d = discrete_gradient(f, y);
            tanh_err = std::max(tanh_err, (G.row(y).transpose() - d.array().tanh().matrix()).cwiseAbs().maxCoeff());
        }

        htilt = std::max(htilt, h_matrix(tilt(CubeMeasure::uniform(n), c.gaussian(n))).cwiseAbs().maxCoeff());

        const auto exact = SequentialSampler(nu).exact_law();
        for (std::size_t y = 0; y < p.size(); ++y) law = std::max(law, std::abs(exact[y] - p[y]));

        chain = std::max(chain, kl_to_uniform(product_fit(nu).to_measure()) - kl_to_uniform(nu));

        const Vector x = c.box(n, 0.99);
        eta_err = std::max(eta_err, (eta(x).array().tanh().matrix() - x).cwiseAbs().maxCoeff());

        // d_i q_i(y) = e^{f(y)} g_i(y) v_i(y) at vertices, q the extension of g e^f
        const auto dens = nu.densities();
        std::vector<double> tab(cube_size(n)), grad(n);
        for (int i = 0; i < n; ++i) {
            for (std::size_t y = 0; y < tab.size(); ++y) tab[y] = G(static_cast<Eigen::Index>(y), i) * dens[y];
            for (Vertex y = 0; y < cube_size(n); ++y) {
                const Vector yv = vertex_vector(y, n);
                harmonic_extension_grad(tab, n, yv.data(), grad.data());
                const Vertex yp = y | (Vertex{1} << i), ym = y & ~(Vertex{1} << i);
                const double vi = 0.5 * (dens[yp] - dens[ym]) / dens[y];
                partial = std::max(partial, std::abs(grad[i] - dens[y] * G(y, i) * vi));
            }
        }

        for (int k = 0; k < 20; ++k) {
            const Vector xh = c.box(n, 0.5);
            v_half = std::max(v_half, v_map(nu, xh).cwiseAbs().maxCoeff());
            const Vector xf = c.box(n, 1.0);
            xv = std::max(xv, xf.cwiseProduct(v_map(nu, xf)).maxCoeff());
        }
    }
    c.le("gcom identity", gcom, 1e-10);
    c.le("g = tanh(grad f)", tanh_err, 1e-12);
    c.le("H(tilt of uniform) = 0", htilt, 1e-12);
    c.le("sampler exact law", law, 1e-12);
    c.le("chain rule KL(product fit) <= KL", chain, 1e-12);
    c.le("tanh(eta(x)) = x", eta_err, 1e-14);
    c.le("partial identity at vertices", partial, 1e-10);
    c.le("|v_i| on the half cube", v_half, 2.0);
    c.le("x_i v_i on the cube", xv, 1.0 + 1e-12);

    // diagonal sandwich between g-covariances of nu and its tilt under a third measure
    double sandwich = 0.0;
    for (int rep = 0; rep < 6; ++rep) {
        const int n = 3 + rep % 3;
        const CubeMeasure nu = c.measure(n), other = c.measure(n);
        const Vector theta = c.gaussian(n, 0.5);
        const auto q = other.probabilities();
        auto cov_diag = [&](const Matrix& G) {
            Vector m = Vector::Zero(n), s = Vector::Zero(n);
            for (std::size_t y = 0; y < q.size(); ++y) {
                m += q[y] * G.row(static_cast<Eigen::Index>(y)).transpose();
                s += q[y] * G.row(static_cast<Eigen::Index>(y)).transpose().cwiseAbs2();
            }
            return Vector(s - m.cwiseAbs2());
        };
        const Vector A = cov_diag(g_table(nu)), B = cov_diag(g_table(tilt(nu, theta)));
        const double k = std::exp(4.0 * theta.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i)
            sandwich = std::max({sandwich, B[i] / k - A[i], A[i] - k * B[i]});
    }
    c.le("tilt sandwich of H diagonals", sandwich, 1e-12);
}

void complexity_checks(Ctx& c) {
    Matrix pm(2, 1);
    pm << 1.0, -1.0;
    const auto half = gw_monte_carlo(GradientSet::explicit_points(pm), 20000, c.seed);
    c.le("E|G| half-normal mean", std::abs(half.mean - std::sqrt(2.0 / std::numbers::pi)), 3.0 * half.std_error);

    const Vector theta = c.gaussian(3);
    const auto lin = complexity_of(CubeFunction::linear(theta), 20000, c.seed + 1);
    c.le("linear f: |theta| E G_+", std::abs(lin.mean - theta.norm() / std::sqrt(2.0 * std::numbers::pi)), 3.0 * lin.std_error);
    c.le("constant f complexity", complexity_of(CubeFunction::constant(4, 2.0), 100, c.seed).mean, 0.0);

    double worst = -kInf;
    for (int rep = 0; rep < 5; ++rep) {
        const int n = 4 + rep;
        Matrix A = Matrix::Zero(n, n);
        NormalDist nd;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) A(i, j) = A(j, i) = 0.3 * nd(c.rng);
        const IsingModel m{A, c.gaussian(n, 0.5)};
        const auto est = complexity_of(m.table(), 2000, c.seed + 10 + rep);
        worst = std::max(worst, est.mean - 3.0 * est.std_error - ising_complexity_bound(m.A, m.b));
    }
    c.le("Ising complexity bound", worst, 0.0);

    // shared draws: sup over {g(y)} below sup over {grad f(y)} on average
    const CubeMeasure nu = c.measure(5);
    const CubeFunction f(5, std::vector<double>(nu.log_density().begin(), nu.log_density().end()));
    GwOptions opt;
    opt.samples = 4000;
    opt.seed = c.seed + 99;
    const auto a = gw_per_sample(GradientSet::explicit_points(g_table(nu)), opt);
    const auto b = gw_per_sample(GradientSet::of_function(f), opt);
    std::vector<double> diff(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) diff[s] = a[s] - b[s];
    const auto d = summarize(diff);
    c.le("GW{g} <= GW{grad f} (shared draws)", d.mean, 3.0 * d.std_error);

    // inclusion monotonicity, per draw
    Matrix small = g_table(nu).topRows(8), big = g_table(nu);
    const auto s1 = gw_per_sample(GradientSet::explicit_points(small), opt);
    const auto s2 = gw_per_sample(GradientSet::explicit_points(big), opt);
    double mono = 0.0;
    for (std::size_t s = 0; s < s1.size(); ++s) mono = std::max(mono, s1[s] - s2[s]);
    c.le("monotone under inclusion", mono, 0.0);
}

void meanfield_checks(Ctx& c) {
    auto problem = [&](const CubeFunction& f, double p) {
        MeanFieldProblem prob;
        prob.f = std::make_shared<TableObjective>(f);
        prob.p = p;
        prob.options.seed = c.seed;
        prob.options.restarts = 6;
        return prob;
    };
    const auto zero = solve_gibbs(problem(CubeFunction::constant(4, 0.0), 0.3));
    c.le("f = 0 objective", std::abs(zero.objective), 1e-9);

    const Vector theta = c.gaussian(4, 0.7);
    const auto lin = solve_gibbs(problem(CubeFunction::linear(theta), 0.5));
    double want = 0.0;
    for (int i = 0; i < 4; ++i) want += std::log(std::cosh(theta[i]));
    c.le("linear f: sum log cosh", std::abs(lin.objective - want), 1e-7);

    double dom = -kInf;
    for (int rep = 0; rep < 4; ++rep) {
        const int n = 5 + rep;
        std::vector<double> v(cube_size(n));
        NormalDist nd;
        for (double& x : v) x = nd(c.rng);
        const CubeFunction f(n, std::move(v));
        const double p = 0.2 + 0.15 * rep;
        dom = std::max(dom, solve_gibbs(problem(f, p)).objective - log_partition(f, p));
    }
    c.le("Gibbs domination", dom, 1e-9);

    const CubeFunction s = CubeFunction::tabulate(5, [](Vertex y) {
        double a = 0.0;
        for (int i = 0; i < 5; ++i) a += spin(y, i);
        return a;
    });
    const auto phi = rate_function_phi(problem(s, 0.5), 0.5);
    c.le("phi for the sum at t = 1/2", std::abs(phi.phi - 5 * 0.130812035941137), 1e-6);
    double prev = -1.0, drop = 0.0;
    for (double t : {-0.2, 0.0, 0.2, 0.4, 0.6, 0.8}) {
        const double v = rate_function_phi(problem(s, 0.5), t).phi;
        drop = std::max(drop, prev - v);
        prev = v;
    }
    c.le("phi nondecreasing in t", drop, 1e-7);
}

void transport_checks(Ctx& c) {
    double excess = -kInf, asym = 0.0, marg = 0.0, tri = -kInf;
    for (int rep = 0; rep < 8; ++rep) {
        const int n = 4 + rep % 3;
        const CubeMeasure nu = c.measure(n);
        const auto w = w1_exact(nu, product_fit(nu).to_measure());
        excess = std::max(excess, w.value - step1_bound(nu));
        const CubeMeasure a = c.measure(n), b = c.measure(n);
        const auto ab = w1_exact(a, b), ba = w1_exact(b, a), an = w1_exact(a, nu), nb = w1_exact(nu, b);
        asym = std::max(asym, std::abs(ab.value - ba.value));
        tri = std::max(tri, ab.value - an.value - nb.value);
        const auto src = ab.plan.source_marginal(), dst = ab.plan.target_marginal();
        const auto pa = a.probabilities(), pb = b.probabilities();
        for (std::size_t y = 0; y < pa.size(); ++y) marg = std::max({marg, std::abs(src[y] - pa[y]), std::abs(dst[y] - pb[y])});
    }
    c.le("W1(nu, product fit) <= sqrt(n Tr H)", excess, 1e-9);
    c.le("W1 symmetry", asym, 1e-9);
    c.le("W1 triangle inequality", tri, 1e-8);
    c.le("plan marginals", marg, 1e-10);
    const double anti = w1_exact(CubeMeasure::point_mass(5, 0), CubeMeasure::point_mass(5, 31)).value;
    c.le("antipodal point masses", std::abs(anti - 5.0), 1e-12);
}

void ld_checks(Ctx& c) {
    // L monotone: decreasing in delta, increasing in D and Lip
    bool mono = true;
    for (double d : {0.05, 0.1, 0.2}) {
        mono = mono && ld_L(1.0, 2.0, 0.3, d) > ld_L(1.0, 2.0, 0.3, 2 * d);
        mono = mono && ld_L(1.0, 2.0, 0.3, d) < ld_L(1.0, 4.0, 0.3, d);
        mono = mono && ld_L(1.0, 2.0, 0.3, d) < ld_L(2.0, 2.0, 0.3, d);
    }
    c.flag("L monotonicity", mono);
    c.le("lower bound formula", std::abs(ld_lower(3.0, 1.0, 16, 0.0, 0.5).bound + 6.5), 1e-12);

    // sandwich with certified phi values on a random Lipschitz-1 function
    const int n = 8;
    std::vector<double> v(cube_size(n));
    NormalDist nd;
    for (double& x : v) x = nd(c.rng);
    CubeFunction raw(n, v);
    const double l = lip(raw);
    for (double& x : v) x /= l;
    const CubeFunction f(n, std::move(v));
    int bad = 0;
    for (double p : {0.3, 0.5}) {
        for (double t : {0.05, 0.1, 0.2}) {
            for (double delta : {0.5, 0.8}) {
                const double tail = exact_tail(f, p, t), tail_lo = exact_tail(f, p, t - delta);
                // Chernoff gives a certified lower bound on phi; use it for the upper side
                const double phi_lo = phi_chernoff_lower(f, p, t - delta);
                if (delta < phi_lo / n) {
                    const auto up = ld_upper(phi_lo, 1.0, 5.0, n, p, t, delta);
                    if (!up.vacuous && tail > up.bound + 1e-12) ++bad;
                    if (up.vacuous != (64.0 * up.L * std::cbrt(1.0 / n) >= 1.0)) ++bad;
                }
                MeanFieldProblem prob;
                prob.f = std::make_shared<TableObjective>(f);
                prob.p = p;
                prob.options.seed = c.seed;
                prob.options.restarts = 4;
                const auto phi = rate_function_phi(prob, t);  // an upper bound on the inf: safe for the lower side
                if (phi.feasible) {
                    const auto lo = ld_lower(phi.phi, 1.0, n, t, delta);
                    if (lo.hypothesis_ok && tail_lo < lo.bound - 1e-12) ++bad;
                }
            }
        }
    }
    c.le("tail sandwich violations", bad, 0.0);
}

void localization_checks(Ctx& c) {
    const CubeMeasure nu = c.measure(5);
    double law = 0.0, h0 = 0.0;
    for (int k = 0; k < 5; ++k) {
        const Vector x = c.box(5, 0.9);
        const auto a = conditional_law(nu, x).probabilities(), b = tilt(nu, eta(x)).probabilities();
        for (std::size_t y = 0; y < a.size(); ++y) law = std::max(law, std::abs(a[y] - b[y]));
    }
    h0 = (h_t_matrix(nu, Vector::Zero(5)) - h_matrix(nu)).cwiseAbs().maxCoeff();
    c.le("conditional law = tilt by eta(x)", law, 1e-12);
    c.le("H_0 = H(nu)", h0, 1e-12);
    c.le("g_0 = mean of g", (g_process(nu, Vector::Zero(5)) - center_of_mass(nu)).cwiseAbs().maxCoeff(), 1e-10);

    SdeConfig cfg;
    cfg.nu = c.measure(4);
    cfg.seed = c.seed;
    cfg.dt = 2e-3;
    cfg.gw_samples = 2000;
    const auto rep = along_path_report(cfg, 24, {2.0, 4.0, 8.0}, {0.25, 0.5, 1.0});
    c.le("Tr(sH) <= 4 Tr(sA) violations", static_cast<double>(rep.htat_violations), 0.0);
    c.le("|Tr(s Gamma) - Tr(s A)|", rep.max_trace_gap, 1e-9);
    c.le("g_t outside conv{g(y)}", static_cast<double>(rep.hull_violations), 0.0);
    for (const auto& d : rep.divergence)
        c.le("divergence tail alpha=" + std::to_string(static_cast<int>(d.alpha)), d.fraction, 1.0 / d.alpha + 3.0 * d.std_error);
    c.le("Ito drift of g_t", rep.max_ito_drift, 1e-6);
}

void gaussian_checks(Ctx& c) {
    const auto single = reverse_lsi_check(GaussianMixture::single(c.gaussian(2)), 24, 200, c.seed);
    c.le("single Gaussian lhs", std::abs(single.lhs), 1e-10);
    c.le("single Gaussian rhs", std::abs(single.rhs), 1e-10);

    int viol = 0, floor = 0;
    double fd = 0.0, hull = 0.0;
    for (int rep = 0; rep < 4; ++rep) {
        const int d = 1 + rep % 2, K = 2 + rep % 2;
        std::vector<double> w(K);
        UniformDist u(0.2, 1.0);
        double s = 0.0;
        for (double& x : w) s += (x = u(c.rng));
        for (double& x : w) x /= s;
        Matrix centers(K, d);
        for (int k = 0; k < K; ++k) centers.row(k) = c.gaussian(d).transpose();
        const GaussianMixture nu(w, centers);
        const auto r = reverse_lsi_check(nu, 40, 4000, c.seed + rep);
        if (!r.satisfied) ++viol;
        if (r.fisher < 2.0 * r.kl - 1e-9) ++floor;
        const Vector x = c.gaussian(d);
        const Vector g = mixture_f_grad(nu, x).second;
        for (int i = 0; i < d; ++i) {
            Vector xp = x, xm = x;
            xp[i] += 1e-6;
            xm[i] -= 1e-6;
            fd = std::max(fd, std::abs((mixture_f_grad(nu, xp).first - mixture_f_grad(nu, xm).first) / 2e-6 - g[i]));
        }
        // support function test: <grad f, u> <= max_k <theta_k, u>
        for (int k = 0; k < 10; ++k) {
            const Vector dir = c.gaussian(d);
            hull = std::max(hull, g.dot(dir) - (centers * dir).maxCoeff());
        }
    }
    c.le("reverse LSI violations", viol, 0.0);
    c.le("log-Sobolev floor violations", floor, 0.0);
    c.le("grad f vs finite differences", fd, 1e-6);
    c.le("grad f in conv{theta_k}", hull, 1e-9);

    const auto tilt_rep = gaussian_tilt_search(GaussianMixture::symmetric(Vector::Constant(1, 1.0)), 1.0, 201, 4000, c.seed);
    c.flag("tilt theorem, symmetric pair", tilt_rep.satisfied);
}

void graph_checks(Ctx& c) {
    double err = 0.0;
    const SubgraphModel tri = SubgraphModel::triangle(5);
    const CubeFunction f = model_table(tri);
    UniformDist u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        const Vertex y = static_cast<Vertex>(u(c.rng) * static_cast<double>(cube_size(10))) % cube_size(10);
        err = std::max(err, (subgraph_grad(tri, y) - discrete_gradient(f, y)).cwiseAbs().maxCoeff());
        err = std::max(err, (0.5 * triangle_grad(5, y) - discrete_gradient(f, y)).cwiseAbs().maxCoeff());
        err = std::max(err, std::abs(triangle_f(5, y) - f(y)));
    }
    c.le("triangle gradients vs discrete gradient", err, 1e-12);

    // t(edge, G) = 2|E| / N^2
    double edge = 0.0;
    for (int k = 0; k < 10; ++k) {
        const Vertex y = static_cast<Vertex>(u(c.rng) * 64.0) % 64;
        const Adjacency g = adjacency_from_vertex(4, y);
        edge = std::max(edge, std::abs(hom_density(SimpleGraph::single_edge(), g) - 2.0 * std::popcount(y) / 16.0));
    }
    c.le("edge homomorphism density", edge, 1e-15);
    const auto gw = complexity_of(f, 3000, c.seed);
    c.le("triangle complexity vs 5 n^{3/4}", gw.mean - 3.0 * gw.std_error, 5.0 * std::pow(10.0, 0.75));
    c.le("Lip(triangle f)", lip(f), 1.0);
}

const std::map<std::string, std::function<void(Ctx&)>>& table() {
    static const std::map<std::string, std::function<void(Ctx&)>> t = {
        {"cube_core", cube_checks},           {"complexity", complexity_checks},
        {"meanfield", meanfield_checks},      {"transport", transport_checks},
        {"ld_bounds", ld_checks},             {"localization_sim", localization_checks},
        {"gaussian_lsi", gaussian_checks},    {"graphs", graph_checks},
    };
    return t;
}

}  // namespace

const std::vector<std::string>& verify_modules() {
    static const std::vector<std::string> m = {"cube_core", "complexity", "meanfield", "transport",
                                               "ld_bounds", "localization_sim", "gaussian_lsi", "graphs"};
    return m;
}

VerifyReport verify(const std::string& module, std::uint64_t seed) {
    const bool all = module == "all";
    require(all || table().count(module), ErrorCode::InvalidArgument, "unknown module '" + module + "'");
    VerifyReport rep;
    const auto& mods = verify_modules();
    for (std::size_t k = 0; k < mods.size(); ++k) {
        const auto& name = mods[k];
        if (!all && name != module) continue;
        Ctx c{stream_rng(seed, k), seed, &rep.checks, name};
        table().at(name)(c);
    }
    return rep;
}

}  // namespace mfld
