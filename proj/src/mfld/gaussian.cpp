#include "mfld/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/parallel.hpp"
#include "mfld/random.hpp"

namespace mfld {

GaussianMixture::GaussianMixture(std::vector<double> weights, Matrix centers) : w_(std::move(weights)), centers_(std::move(centers)) {
    require(!w_.empty(), ErrorCode::InvalidArgument, "mixture needs at least one component");
    require(static_cast<Eigen::Index>(w_.size()) == centers_.rows(), ErrorCode::InvalidArgument,
            "mixture: one center per weight");
    require(centers_.cols() >= 1 && centers_.cols() <= kMaxGaussianDim, ErrorCode::Capacity,
            "mixture dimension must lie in 1.." + std::to_string(kMaxGaussianDim));
    double s = 0.0;
    for (double w : w_) {
        require(std::isfinite(w) && w > 0.0, ErrorCode::InvalidArgument, "mixture weights must be positive");
        s += w;
    }
    require(std::abs(s - 1.0) <= 1e-6, ErrorCode::InvalidArgument, "mixture weights must sum to 1");
    for (double& w : w_) w /= s;
    for (Eigen::Index i = 0; i < centers_.size(); ++i)
        require(std::isfinite(centers_.data()[i]), ErrorCode::InvalidArgument, "mixture centers must be finite");
}

GaussianMixture GaussianMixture::single(const Vector& theta) { return GaussianMixture({1.0}, theta.transpose()); }

GaussianMixture GaussianMixture::symmetric(const Vector& theta) {
    Matrix c(2, theta.size());
    c.row(0) = theta.transpose();
    c.row(1) = -theta.transpose();
    return GaussianMixture({0.5, 0.5}, c);
}

namespace {

// softmax weights p_k proportional to w_k exp(<theta_k, x> - s |theta_k|^2 / 2); returns the log normalizer
double softmax(const GaussianMixture& nu, const double* x, double s, double* p) {
    const int K = nu.components(), d = nu.dim();
    const Matrix& c = nu.centers();
    double mx = kNegInf;
    for (int k = 0; k < K; ++k) {
        double a = std::log(nu.weights()[k]), sq = 0.0;
        for (int i = 0; i < d; ++i) {
            a += c(k, i) * x[i];
            sq += c(k, i) * c(k, i);
        }
        p[k] = a - 0.5 * s * sq;
        mx = std::max(mx, p[k]);
    }
    double z = 0.0;
    for (int k = 0; k < K; ++k) z += (p[k] = std::exp(p[k] - mx));
    for (int k = 0; k < K; ++k) p[k] /= z;
    return mx + std::log(z);
}

}  // namespace

std::pair<double, Vector> mixture_f_grad(const GaussianMixture& nu, const Vector& x) {
    require(x.size() == nu.dim(), ErrorCode::InvalidArgument, "point dimension mismatch");
    std::vector<double> p(nu.components());
    const double f = softmax(nu, x.data(), 1.0, p.data());
    Vector g = Vector::Zero(nu.dim());
    for (int k = 0; k < nu.components(); ++k) g += p[k] * nu.centers().row(k).transpose();
    return {f, g};
}

double mixture_laplacian(const GaussianMixture& nu, const Vector& x) {
    // Hessian of f is the softmax covariance of the centers
    std::vector<double> p(nu.components());
    softmax(nu, x.data(), 1.0, p.data());
    Vector m = Vector::Zero(nu.dim());
    double second = 0.0;
    for (int k = 0; k < nu.components(); ++k) {
        m += p[k] * nu.centers().row(k).transpose();
        second += p[k] * nu.centers().row(k).squaredNorm();
    }
    return std::max(0.0, second - m.squaredNorm());
}

GaussHermite gauss_hermite(int points) {
    require(points >= 1 && points <= 400, ErrorCode::InvalidArgument, "Gauss-Hermite order must lie in 1..400");
    // Golub-Welsch on the Jacobi matrix of the monic probabilists' Hermite polynomials
    Matrix J = Matrix::Zero(points, points);
    for (int k = 1; k < points; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Matrix> es(J);
    require(es.info() == Eigen::Success, ErrorCode::Numerical, "Gauss-Hermite eigen-decomposition failed");
    GaussHermite gh;
    gh.nodes.resize(points);
    gh.weights.resize(points);
    double s = 0.0;
    for (int k = 0; k < points; ++k) {
        gh.nodes[k] = es.eigenvalues()[k];
        gh.weights[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
        s += gh.weights[k];
    }
    for (double& w : gh.weights) w /= s;
    // symmetrize to remove eigen-solver noise
    for (int k = 0; k < points / 2; ++k) {
        const int j = points - 1 - k;
        const double x = 0.5 * (gh.nodes[j] - gh.nodes[k]), w = 0.5 * (gh.weights[j] + gh.weights[k]);
        gh.nodes[k] = -x;
        gh.nodes[j] = x;
        gh.weights[k] = gh.weights[j] = w;
    }
    if (points % 2) gh.nodes[points / 2] = 0.0;
    return gh;
}

Matrix center_span(const GaussianMixture& nu) {
    const Matrix ct = nu.centers().transpose();  // d x K
    Eigen::ColPivHouseholderQR<Matrix> qr(ct);
    qr.setThreshold(1e-10);
    const int r = static_cast<int>(qr.rank());
    if (r == 0) return Matrix::Zero(nu.dim(), 0);
    const Matrix Q = qr.householderQ() * Matrix::Identity(nu.dim(), r);
    return Q;
}

namespace {

// Integrates F(y) against nu, where F depends on y only through its span coordinates.
// F receives the full point y (d coordinates, zero off the span).
template <class F>
double integrate_span(const GaussianMixture& nu, const Matrix& Q, const GaussHermite& gh, F&& fn) {
    const int d = nu.dim(), r = static_cast<int>(Q.cols()), K = nu.components();
    const int q = static_cast<int>(gh.nodes.size());
    std::int64_t total = 1;
    for (int j = 0; j < r; ++j) total *= q;
    double acc = 0.0;
    Vector y(d), z(r);
    std::vector<int> idx(r);
    for (int k = 0; k < K; ++k) {
        const Vector c = Q.transpose() * nu.centers().row(k).transpose();
        double part = 0.0;
        for (std::int64_t m = 0; m < total; ++m) {
            std::int64_t rem = m;
            double w = 1.0;
            for (int j = 0; j < r; ++j) {
                const int a = static_cast<int>(rem % q);
                rem /= q;
                z[j] = c[j] + gh.nodes[a];
                w *= gh.weights[a];
            }
            if (w < 1e-300) continue;
            y = Q * z;
            part += w * fn(y);
        }
        acc += nu.weights()[k] * part;
    }
    return acc;
}

}  // namespace

QuadratureMoments mixture_fisher_kl(const GaussianMixture& nu, int points_per_dim) {
    const Matrix Q = center_span(nu);
    QuadratureMoments out;
    if (Q.cols() == 0) return out;  // nu = gamma
    const GaussHermite gh = gauss_hermite(points_per_dim);
    out.fisher = integrate_span(nu, Q, gh, [&](const Vector& y) { return mixture_f_grad(nu, y).second.squaredNorm(); });
    out.kl = integrate_span(nu, Q, gh, [&](const Vector& y) { return mixture_f_grad(nu, y).first; });
    return out;
}

double infimum_laplacian(const GaussianMixture& nu) {
    const Matrix Q = center_span(nu);
    const int r = static_cast<int>(Q.cols());
    if (r == 0) return 0.0;
    double R = 0.0;
    for (int k = 0; k < nu.components(); ++k) R = std::max(R, nu.centers().row(k).norm());
    R += 6.0;
    // the Laplacian is constant off the span, so search the span only
    const int coarse = r == 1 ? 256 : (r == 2 ? 64 : 32);
    Vector lo = Vector::Constant(r, -R), hi = Vector::Constant(r, R);
    double best = kInf;
    Vector best_z = Vector::Zero(r);
    for (int round = 0; round < 4; ++round) {
        const int g = coarse;
        std::int64_t total = 1;
        for (int j = 0; j < r; ++j) total *= g;
        Vector z(r);
        for (std::int64_t m = 0; m < total; ++m) {
            std::int64_t rem = m;
            for (int j = 0; j < r; ++j) {
                const int a = static_cast<int>(rem % g);
                rem /= g;
                z[j] = lo[j] + (hi[j] - lo[j]) * a / (g - 1);
            }
            const double v = mixture_laplacian(nu, Q * z);
            if (v < best) {
                best = v;
                best_z = z;
            }
        }
        // zoom in around the incumbent
        const Vector half = (hi - lo) / (g - 1) * 2.0;
        lo = best_z - half;
        hi = best_z + half;
    }
    return best;
}

GwEstimate mixture_complexity(const GaussianMixture& nu, std::int64_t samples, std::uint64_t seed) {
    const Matrix& c = nu.centers();
    bool same = true;
    for (int k = 1; k < nu.components(); ++k) same = same && (c.row(k) - c.row(0)).norm() == 0.0;
    if (same) {
        // a single point has width exactly zero
        GwEstimate e;
        e.samples = samples;
        return e;
    }
    GwOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    opt.centered = true;
    return gw_monte_carlo(GradientSet::explicit_points(c, false), opt);
}

LsiReport reverse_lsi_check(const GaussianMixture& nu, int quadrature_points, std::int64_t gw_samples, std::uint64_t seed) {
    require(quadrature_points >= 4, ErrorCode::InvalidArgument, "quadrature needs at least 4 points per dimension");
    const int r = static_cast<int>(center_span(nu).cols());
    // coarser rule in 3D to keep the tensor grid manageable
    const int q = r >= 3 ? std::max(4, quadrature_points / 2) : quadrature_points;
    const auto lo = mixture_fisher_kl(nu, q);
    const auto hi = mixture_fisher_kl(nu, 2 * q);
    LsiReport rep;
    rep.fisher = hi.fisher;
    rep.kl = hi.kl;
    rep.quadrature_delta = std::max(std::abs(hi.fisher - lo.fisher), std::abs(hi.kl - lo.kl));
    rep.converged = rep.quadrature_delta <= 1e-6;
    const auto gw = mixture_complexity(nu, gw_samples, seed);
    rep.gw = gw.mean;
    rep.gw_std_error = gw.std_error;
    rep.m_term = std::max(-infimum_laplacian(nu), 0.0);
    rep.lhs = rep.fisher - 2.0 * rep.kl;
    const double cbrt_i = std::cbrt(std::max(rep.fisher, 0.0));
    rep.rhs = 2.0 * std::pow(std::max(rep.gw, 0.0), 2.0 / 3.0) * cbrt_i + rep.m_term;
    const double rhs_tol = 2.0 * std::pow(std::max(rep.gw + 3.0 * rep.gw_std_error, 0.0), 2.0 / 3.0) * cbrt_i + rep.m_term;
    rep.satisfied = rep.lhs <= rhs_tol + 1e-9;
    return rep;
}

namespace {

double log_phi(double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); }
double log_phic(double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); }

// F^{-1}(Phi(z)) for F the CDF of sum_k w_k N(m_k, 1)
double mixture_quantile_at(const std::vector<double>& w, const std::vector<double>& m, double z) {
    const double mlo = *std::min_element(m.begin(), m.end()), mhi = *std::max_element(m.begin(), m.end());
    if (mhi - mlo < 1e-15) return mlo + z;
    const bool upper = z > 0.0;
    const double target = upper ? log_phic(z) : log_phi(z);
    auto g = [&](double y) {
        double acc = kNegInf;
        for (std::size_t k = 0; k < w.size(); ++k)
            acc = log_add_exp(acc, std::log(w[k]) + (upper ? log_phic(y - m[k]) : log_phi(y - m[k])));
        return upper ? target - acc : acc - target;  // increasing in y either way
    };
    double a = mlo + z, b = mhi + z;
    const double ga = g(a), gb = g(b);
    if (ga >= 0.0) return a;
    if (gb <= 0.0) return b;
    std::uintmax_t iters = 200;
    const auto res = boost::math::tools::toms748_solve(g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (res.first + res.second);
}

}  // namespace

double w2_sq_mixture_to_gaussian_1d(const std::vector<double>& w, const std::vector<double>& m) {
    require(!w.empty() && w.size() == m.size(), ErrorCode::InvalidArgument, "w2: weights and means must match");
    double u = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) u += w[k] * m[k];
    // W2^2 = E[(F^{-1}(Phi(Z)) - u - Z)^2], Z standard normal
    const GaussHermite gh = gauss_hermite(160);
    double s = 0.0;
    for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
        if (gh.weights[j] < 1e-300) continue;
        const double z = gh.nodes[j];
        const double d = mixture_quantile_at(w, m, z) - u - z;
        s += gh.weights[j] * d * d;
    }
    return s;
}

TiltReport gaussian_tilt_search(const GaussianMixture& nu, double r, int grid, std::int64_t gw_samples, std::uint64_t seed) {
    require(r > 0.0, ErrorCode::InvalidArgument, "tilt search radius must be positive");
    require(grid >= 2, ErrorCode::InvalidArgument, "tilt search grid needs at least 2 points");
    const int d = nu.dim(), K = nu.components();
    const Matrix Q = center_span(nu);
    require(Q.cols() <= 1, ErrorCode::Domain, "tilt search supports collinear centers only");
    Vector e = Vector::Zero(d);
    if (Q.cols() == 1) e = Q.col(0);
    else e[0] = 1.0;
    std::vector<double> c(K);
    for (int k = 0; k < K; ++k) c[k] = nu.centers().row(k).dot(e);

    // v(x) = grad log h, h(x) = sum_k w_k exp(<theta_k, x>)
    auto v_of = [&](const Vector& x) {
        std::vector<double> p(K);
        softmax(nu, x.data(), 0.0, p.data());
        Vector v = Vector::Zero(d);
        for (int k = 0; k < K; ++k) v += p[k] * nu.centers().row(k).transpose();
        return v;
    };
    auto trace_grad_v = [&](const Vector& x) {
        const double hs = 1e-5;
        double tr = 0.0;
        for (int i = 0; i < d; ++i) {
            Vector xp = x, xm = x;
            xp[i] += hs;
            xm[i] -= hs;
            tr += (v_of(xp)[i] - v_of(xm)[i]) / (2 * hs);
        }
        return tr;
    };

    TiltReport rep;
    double best = kInf, best_s = 0.0;
    for (int j = 0; j < grid; ++j) {
        const double s = -r + 2.0 * r * j / (grid - 1);
        const double tr = trace_grad_v(s * e);
        if (tr < best) {
            best = tr;
            best_s = s;
        }
    }
    rep.x0 = best_s * e;
    rep.tr_nabla_v = best;

    // nu_{x0} = sum_k w'_k N(theta_k + x0, I), w'_k proportional to w_k e^{<theta_k, x0>}
    std::vector<double> wp(K), mp(K);
    softmax(nu, rep.x0.data(), 0.0, wp.data());
    for (int k = 0; k < K; ++k) mp[k] = c[k] + best_s;
    rep.w2_sq = w2_sq_mixture_to_gaussian_1d(wp, mp);

    const auto gw = mixture_complexity(nu, gw_samples, seed);
    rep.gw = gw.mean;
    rep.gw_std_error = gw.std_error;
    rep.inf_laplacian = infimum_laplacian(nu);
    rep.rhs = 2.0 * std::sqrt(static_cast<double>(d)) / r * (rep.gw + 3.0 * rep.gw_std_error) - rep.inf_laplacian;
    rep.slack = rep.rhs - rep.w2_sq;
    rep.satisfied = rep.w2_sq <= rep.rhs + 1e-9;
    return rep;
}

FollmerStats gaussian_follmer_simulate(const GaussianMixture& nu, double dt, std::int64_t paths, std::uint64_t seed) {
    require(dt > 0.0 && dt <= 0.1, ErrorCode::InvalidArgument, "follmer: dt must lie in (0, 0.1]");
    require(paths >= 2, ErrorCode::InvalidArgument, "follmer: need at least two paths");
    const int d = nu.dim(), K = nu.components();
    const std::int64_t steps = std::max<std::int64_t>(1, std::llround(1.0 / dt));
    const double h = 1.0 / static_cast<double>(steps), sq = std::sqrt(h);
    const std::vector<double> checkpoints = {0.25, 0.5, 0.75};
    std::vector<std::int64_t> check_steps;
    for (double t : checkpoints) check_steps.push_back(std::llround(t / h));

    struct PathOut {
        double energy = 0.0;
        Vector x1;
        std::vector<Vector> v_at;
    };
    std::vector<PathOut> out(static_cast<std::size_t>(paths));
    auto drift = [&](const Vector& x, double t, Vector& v, std::vector<double>& p) {
        softmax(nu, x.data(), t, p.data());
        v.setZero();
        for (int k = 0; k < K; ++k) v += p[k] * nu.centers().row(k).transpose();
    };
    constexpr std::int64_t kBlock = 512;
    parallel_for(0, (paths + kBlock - 1) / kBlock, [&](std::int64_t b) {
        std::vector<double> p(K);
        Vector x(d), v(d);
        for (std::int64_t path = b * kBlock; path < std::min(paths, (b + 1) * kBlock); ++path) {
            Rng rng = stream_rng(seed, static_cast<std::uint64_t>(path));
            NormalDist normal;
            x.setZero();
            PathOut& o = out[path];
            o.v_at.resize(checkpoints.size());
            drift(x, 0.0, v, p);
            double prev = v.squaredNorm(), energy = 0.0;
            for (std::int64_t s = 0; s < steps; ++s) {
                for (std::size_t c = 0; c < check_steps.size(); ++c)
                    if (check_steps[c] == s) o.v_at[c] = v;
                for (int i = 0; i < d; ++i) x[i] += v[i] * h + sq * normal(rng);
                drift(x, static_cast<double>(s + 1) * h, v, p);
                const double cur = v.squaredNorm();
                energy += 0.5 * (prev + cur) * h;  // trapezoid in time
                prev = cur;
            }
            o.energy = energy;
            o.x1 = x;
        }
    });

    FollmerStats st;
    st.paths = paths;
    st.dt = h;
    const double P = static_cast<double>(paths);
    double s = 0.0, s2 = 0.0;
    for (const auto& o : out) {
        s += o.energy;
        s2 += o.energy * o.energy;
    }
    st.energy = s / P;
    st.energy_std_error = std::sqrt(std::max(0.0, (s2 - s * s / P) / (P - 1)) / P);
    const int q = center_span(nu).cols() >= 3 ? 40 : 120;
    const auto mom = mixture_fisher_kl(nu, q);
    st.two_kl = 2.0 * mom.kl;
    st.representation_ok = std::abs(st.energy - st.two_kl) <= 3.0 * st.energy_std_error + 1e-12;

    // Kolmogorov-Smirnov along each span direction against the exact marginal
    const Matrix Q = center_span(nu);
    for (int j = 0; j < Q.cols(); ++j) {
        std::vector<double> proj(out.size());
        for (std::size_t p = 0; p < out.size(); ++p) proj[p] = Q.col(j).dot(out[p].x1);
        std::sort(proj.begin(), proj.end());
        double ks = 0.0;
        for (std::size_t p = 0; p < proj.size(); ++p) {
            double F = 0.0;
            for (int k = 0; k < K; ++k) {
                const double m = Q.col(j).dot(nu.centers().row(k).transpose());
                F += nu.weights()[k] * 0.5 * std::erfc(-(proj[p] - m) / std::sqrt(2.0));
            }
            ks = std::max({ks, std::abs(F - static_cast<double>(p) / P), std::abs(F - static_cast<double>(p + 1) / P)});
        }
        st.ks.push_back(ks);
    }
    st.ks_critical = 1.63 / std::sqrt(P);  // 1% level

    // E Tr H_t = E|v_1|^2 - E|v_t|^2 = I - E|v_t|^2 (tower property)
    const auto gw = mixture_complexity(nu, 20000, seed ^ 0x2545f4914f6cdd1dULL);
    st.gw = gw.mean + 3.0 * gw.std_error;
    st.m_term = std::max(-infimum_laplacian(nu), 0.0);
    Vector v0(d);
    {
        std::vector<double> p(K);
        drift(Vector::Zero(d), 0.0, v0, p);
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        double a = 0.0, a2 = 0.0;
        Vector mean = Vector::Zero(d), msq = Vector::Zero(d);
        for (const auto& o : out) {
            const double n2 = o.v_at[c].squaredNorm();
            a += n2;
            a2 += n2 * n2;
            mean += o.v_at[c];
            msq += o.v_at[c].cwiseAbs2();
        }
        const double mean_n2 = a / P;
        const double se = std::sqrt(std::max(0.0, (a2 - a * a / P) / (P - 1)) / P);
        FollmerStats::Curve cv;
        cv.t = checkpoints[c];
        cv.mean_tr_h = mom.fisher - mean_n2;
        cv.std_error = se;
        cv.bound = st.gw / std::sqrt(cv.t) + st.m_term;
        cv.ok = cv.mean_tr_h <= cv.bound + 3.0 * se;
        st.curve.push_back(cv);
        mean /= P;
        for (int i = 0; i < d; ++i) {
            const double var = std::max(0.0, msq[i] / P - mean[i] * mean[i]) * P / (P - 1);
            const double sei = std::sqrt(var / P);
            if (sei > 0) st.max_v_drift_sigma = std::max(st.max_v_drift_sigma, std::abs(mean[i] - v0[i]) / sei);
        }
    }
    return st;
}

}  // namespace mfld
