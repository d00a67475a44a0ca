#include "mfld/localization.hpp"

#include <algorithm>
#include <cmath>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/parallel.hpp"

namespace mfld {

void SdeConfig::validate() const {
    require(nu.dim() > 0, ErrorCode::InvalidArgument, "sde: measure is empty");
    require(dt > 0.0 && dt <= 0.1, ErrorCode::InvalidArgument, "sde: dt must lie in (0, 0.1]");
    require(t_max > 0.0, ErrorCode::InvalidArgument, "sde: t_max must be positive");
    require(eps > 0.0 && eps < 1.0 / 16.0, ErrorCode::InvalidArgument, "sde: eps must lie in (0, 1/16)");
    require(alpha > 1.0, ErrorCode::InvalidArgument, "sde: alpha must exceed 1");
    require(check_every >= 1 && record_every >= 1, ErrorCode::InvalidArgument, "sde: cadences must be positive");
}

LocalizationField::LocalizationField(const CubeMeasure& nu) : n_(nu.dim()), nu_(nu), dens_(nu.densities()) {
    const std::size_t N = nu.size();
    g_ = g_table(nu);
    v_.setZero(static_cast<Eigen::Index>(N), n_);
    for (Vertex y = 0; y < N; ++y) {
        if (!(dens_[y] > 0.0)) continue;
        for (int i = 0; i < n_; ++i) {
            const Vertex up = y | (Vertex{1} << i), dn = y & ~(Vertex{1} << i);
            v_(y, i) = (dens_[up] - dens_[dn]) / (2.0 * dens_[y]);
        }
    }
}

namespace {

void check_point(const Vector& x, int n) {
    require(x.size() == n, ErrorCode::InvalidArgument, "point dimension mismatch");
    for (int i = 0; i < n; ++i)
        require(x[i] >= -1.0 && x[i] <= 1.0, ErrorCode::InvalidArgument, "point outside the solid cube");
}

// w(x, y) for all y, by doubling
void fill_weights(const double* x, int k, std::vector<double>& w) {
    w.assign(std::size_t{1} << k, 0.0);
    w[0] = 1.0;
    for (int i = 0; i < k; ++i) {
        const double a = 0.5 * (1.0 - x[i]), b = 0.5 * (1.0 + x[i]);
        const std::size_t half = std::size_t{1} << i;
        for (std::size_t m = 0; m < half; ++m) {
            w[m + half] = w[m] * b;
            w[m] *= a;
        }
    }
}

// Multilinear extension of a 2^k table and its gradient.
// lev needs 2^k doubles, adj 2^(k-1) (at least one).
double ext_grad(const double* tab, int k, const double* x, double* grad, double* lev, double* adj) {
    if (k == 0) return tab[0];
    const double* lp[kMaxCubeDim + 1];
    lp[0] = tab;
    std::size_t len = std::size_t{1} << k;
    double* out = lev;
    for (int j = 0; j < k; ++j) {
        const double a = 0.5 * (1.0 - x[j]), b = 0.5 * (1.0 + x[j]);
        const double* prev = lp[j];
        len >>= 1;
        for (std::size_t m = 0; m < len; ++m) out[m] = a * prev[2 * m] + b * prev[2 * m + 1];
        lp[j + 1] = out;
        out += len;
    }
    const double value = lp[k][0];
    adj[0] = 1.0;
    std::size_t size = 1;
    for (int j = k - 1; j >= 0; --j) {
        const double* l = lp[j];
        double d = 0.0;
        for (std::size_t m = 0; m < size; ++m) d += adj[m] * (l[2 * m + 1] - l[2 * m]);
        grad[j] = 0.5 * d;
        if (j == 0) break;
        const double a = 0.5 * (1.0 - x[j]), b = 0.5 * (1.0 + x[j]);
        for (std::size_t m = size; m-- > 0;) {
            const double t = adj[m];
            adj[2 * m + 1] = t * b;
            adj[2 * m] = t * a;
        }
        size *= 2;
    }
    return value;
}

// Draw a vertex index from the weights w(x, .) * table over k coordinates.
std::size_t draw_conditional(const double* tab, int k, const double* x, Rng& rng) {
    std::vector<double> w;
    fill_weights(x, k, w);
    double total = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) total += (w[m] *= tab[m]);
    require(total > 0.0, ErrorCode::Numerical, "sde: conditional law has zero mass");
    double u = UniformDist(0.0, total)(rng);
    for (std::size_t m = 0; m < w.size(); ++m) {
        if (u < w[m]) return m;
        u -= w[m];
    }
    for (std::size_t m = w.size(); m-- > 0;)
        if (w[m] > 0.0) return m;
    return 0;
}

}  // namespace

std::vector<double> LocalizationField::conditional_weights(const Vector& x) const {
    check_point(x, n_);
    std::vector<double> w;
    fill_weights(x.data(), n_, w);
    double total = 0.0;
    for (std::size_t y = 0; y < w.size(); ++y) total += (w[y] *= dens_[y]);
    require(total > 0.0, ErrorCode::Domain, "conditional law undefined: h(x) = 0");
    for (double& v : w) v /= total;
    return w;
}

double LocalizationField::h(const Vector& x) const {
    check_point(x, n_);
    return harmonic_extension(dens_, n_, x);
}

Vector LocalizationField::drift(const Vector& x) const {
    check_point(x, n_);
    Vector grad(n_);
    const double hx = harmonic_extension_grad(dens_, n_, x.data(), grad.data());
    if (!(hx > 0.0)) return Vector::Zero(n_);
    return grad / hx;
}

ConditionalMoments LocalizationField::moments(const Vector& x, bool with_gamma) const {
    const auto pi = conditional_weights(x);
    const Eigen::Map<const Vector> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
    ConditionalMoments m;
    m.h = harmonic_extension(dens_, n_, x);
    m.g = g_.transpose() * p;
    m.v = v_.transpose() * p;
    const Matrix gc = g_.rowwise() - m.g.transpose();
    const Matrix vc = v_.rowwise() - m.v.transpose();
    const Matrix wg = gc.array().colwise() * p.array();
    m.H = wg.transpose() * gc;
    m.H = 0.5 * (m.H + m.H.transpose());
    m.A = wg.transpose() * vc;
    if (with_gamma) {
        m.Gamma.resize(n_, n_);
        std::vector<double> q(dens_.size());
        Vector row(n_);
        for (int i = 0; i < n_; ++i) {
            for (std::size_t y = 0; y < q.size(); ++y) q[y] = g_(static_cast<Eigen::Index>(y), i) * dens_[y];
            harmonic_extension_grad(q, n_, x.data(), row.data());
            m.Gamma.row(i) = row.transpose() / m.h;
        }
        m.Gamma -= m.g * m.v.transpose();
    }
    return m;
}

double LocalizationField::trace_sigma_h(const Vector& x, double t) const {
    const auto pi = conditional_weights(x);
    double tr = 0.0;
    for (int i = 0; i < n_; ++i) {
        if (!coordinate_active(x[i], t)) continue;
        double mean = 0.0;
        for (std::size_t y = 0; y < pi.size(); ++y) mean += pi[y] * g_(static_cast<Eigen::Index>(y), i);
        double var = 0.0;
        for (std::size_t y = 0; y < pi.size(); ++y) {
            const double d = g_(static_cast<Eigen::Index>(y), i) - mean;
            var += pi[y] * d * d;
        }
        tr += var;
    }
    return tr;
}

CubeMeasure conditional_law(const CubeMeasure& nu, const Vector& x) {
    check_point(x, nu.dim());
    std::vector<double> w;
    fill_weights(x.data(), nu.dim(), w);
    const auto p = nu.probabilities();
    double total = 0.0;
    for (std::size_t y = 0; y < w.size(); ++y) total += (w[y] *= p[y]);
    require(total > 0.0, ErrorCode::Domain, "conditional law undefined: h(x) = 0");
    return CubeMeasure::from_probabilities(nu.dim(), w);
}

Vector g_process(const CubeMeasure& nu, const Vector& x) { return LocalizationField(nu).moments(x, false).g; }
Matrix a_matrix(const CubeMeasure& nu, const Vector& x) { return LocalizationField(nu).moments(x, false).A; }
Matrix h_t_matrix(const CubeMeasure& nu, const Vector& x) { return LocalizationField(nu).moments(x, false).H; }
Matrix gamma_matrix(const CubeMeasure& nu, const Vector& x) { return LocalizationField(nu).moments(x, true).Gamma; }

double conservative_gw(const LocalizationField& field, std::int64_t samples, std::uint64_t seed) {
    GwOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    opt.centered = true;
    const auto est = gw_monte_carlo(GradientSet::explicit_points(field.g_rows(), false), opt);
    return est.mean + 3.0 * est.std_error;
}

double tau_threshold(const SdeConfig& cfg, double gw) {
    if (cfg.threshold_override > 0.0) return cfg.threshold_override;
    return 16.0 * cfg.alpha * gw / cfg.eps;
}

namespace {

double frozen_threshold(double eps, int n) { return 2.0 * std::exp(-1.0 / (32.0 * eps * eps)) * n; }

double eta_norm(const Vector& x) {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double e = std::atanh(x[i]);
        s += e * e;
    }
    return std::sqrt(s);
}

// One Euler step of the stopped SDE at time t; coordinates crossing the
// current threshold are clamped onto it.
void euler_step(const LocalizationField& field, Vector& x, double t, double dt, Rng& rng, NormalDist& normal) {
    const Vector v = field.drift(x);
    const double sq = std::sqrt(dt), bound = t < 1.0 ? 0.5 : 1.0;
    for (int i = 0; i < x.size(); ++i) {
        if (!coordinate_active(x[i], t)) continue;
        double xi = x[i] + v[i] * dt + sq * normal(rng);
        if (xi >= bound) xi = bound;
        if (xi <= -bound) xi = -bound;
        x[i] = xi;
    }
}

bool any_active(const Vector& x, double t) {
    for (int i = 0; i < x.size(); ++i)
        if (coordinate_active(x[i], t)) return true;
    return false;
}

int frozen_count(const Vector& x, double t) {
    int c = 0;
    for (int i = 0; i < x.size(); ++i) c += coordinate_active(x[i], t) ? 0 : 1;
    return c;
}

std::vector<std::uint8_t> frozen_mask(const Vector& x, double t) {
    std::vector<std::uint8_t> m(static_cast<std::size_t>(x.size()));
    for (int i = 0; i < x.size(); ++i) m[i] = coordinate_active(x[i], t) ? 0 : 1;
    return m;
}

struct Directions {
    Matrix u;        // one direction per row
    Vector support;  // max_y <g(y), u>
};

Directions hull_directions(const LocalizationField& field, Rng& rng, int count) {
    NormalDist normal;
    Directions d;
    d.u.resize(count, field.dim());
    for (int r = 0; r < count; ++r)
        for (int i = 0; i < field.dim(); ++i) d.u(r, i) = normal(rng);
    d.support = (field.g_rows() * d.u.transpose()).colwise().maxCoeff().transpose();
    return d;
}

}  // namespace

SdePath simulate_path(const SdeConfig& cfg, std::uint64_t index) {
    cfg.validate();
    LocalizationField field(cfg.nu);
    double threshold = -1.0;
    if (cfg.gw >= 0.0 || cfg.threshold_override > 0.0)
        threshold = tau_threshold(cfg, cfg.gw >= 0.0 ? cfg.gw : 0.0);
    return simulate_path(field, cfg, index, threshold);
}

SdePath simulate_path(const LocalizationField& field, const SdeConfig& cfg, std::uint64_t index, double threshold) {
    cfg.validate();
    const int n = field.dim();
    Rng rng = stream_rng(cfg.seed, index);
    NormalDist normal;
    Rng dir_rng = stream_rng(cfg.seed ^ 0x5bd1e995ULL, index);
    const Directions dirs = hull_directions(field, dir_rng, 20);

    SdePath path;
    Vector x = Vector::Zero(n);
    double t_base = 0.0;
    std::int64_t step = 0;
    const double radius = cfg.eps * std::sqrt(static_cast<double>(n));
    const double frozen_limit = frozen_threshold(cfg.eps, n);
    bool eps_hit = false;
    double trace_time = -1.0;

    auto record = [&](double t) {
        SdeSample s;
        s.t = t;
        s.x = x;
        s.frozen = frozen_mask(x, t);
        s.v = field.drift(x);
        s.g = field.moments(x, false).g;
        path.samples.push_back(std::move(s));
    };
    auto check = [&](double t) {
        const auto m = field.moments(x, true);
        SdeCheck c;
        c.t = t;
        c.x = x;
        for (int i = 0; i < n; ++i) {
            if (!coordinate_active(x[i], t)) continue;
            c.tr_h += m.H(i, i);
            c.tr_a += m.A(i, i);
            c.tr_gamma += m.Gamma(i, i);
        }
        c.hull_excess = ((dirs.u * m.g) - dirs.support).maxCoeff();
        if (threshold >= 0.0 && trace_time < 0.0 && !eps_hit && c.tr_h <= threshold) trace_time = t;
        path.checks.push_back(std::move(c));
    };

    record(0.0);
    for (;;) {
        const double t = t_base + static_cast<double>(step) * cfg.dt;
        if (step % cfg.check_every == 0) check(t);
        if ((x.array().abs() == 1.0).all()) {
            path.completed = true;
            path.t_end = t;
            break;
        }
        if (t >= cfg.t_max) {
            path.t_end = t;
            break;
        }
        euler_step(field, x, t, cfg.dt, rng, normal);
        ++step;
        double tn = t_base + static_cast<double>(step) * cfg.dt;
        if (tn < 1.0 && !any_active(x, tn)) {
            // nothing moves until the threshold relaxes
            t_base = 1.0;
            step = 0;
            tn = 1.0;
        }
        if (!eps_hit) {
            const double tc = std::min(tn, 1.0);
            if (t < 1.0 && eta_norm(x) >= radius) {
                eps_hit = true;
                path.t_eps = tc;
                path.t_eps_reason = "norm";
            } else if (t < 1.0 && frozen_count(x, std::min(tn, std::nextafter(1.0, 0.0))) >= frozen_limit) {
                eps_hit = true;
                path.t_eps = tc;
                path.t_eps_reason = "frozen";
            } else if (tn >= 1.0) {
                eps_hit = true;
                path.t_eps = 1.0;
                path.t_eps_reason = "horizon";
            }
        }
        if (step % cfg.record_every == 0) record(tn);
    }
    if (!eps_hit) {
        path.t_eps = std::min(path.t_end, 1.0);
        path.t_eps_reason = "horizon";
    }
    if (!path.completed) {
        // settle the remaining coordinates from the exact conditional law
        const auto w = field.conditional_weights(x);
        double u = UniformDist(0.0, 1.0)(rng);
        Vertex y = static_cast<Vertex>(w.size() - 1);
        for (std::size_t k = 0; k < w.size(); ++k) {
            if (u < w[k]) {
                y = static_cast<Vertex>(k);
                break;
            }
            u -= w[k];
        }
        path.endpoint = y;
    } else {
        path.endpoint = vertex_from_signs(x);
    }
    record(path.t_end);
    if (threshold >= 0.0) path.tau = trace_time >= 0.0 ? std::min(trace_time, path.t_eps) : path.t_eps;
    return path;
}

Vertex simulate_endpoint(const LocalizationField& field, const SdeConfig& cfg, std::uint64_t index, bool* truncated,
                         std::int64_t* steps) {
    const int n = field.dim();
    thread_local std::vector<double> tab, lev, adj;
    const auto& dens = field.densities();
    tab.assign(dens.begin(), dens.end());
    lev.resize(tab.size());
    adj.resize(std::max<std::size_t>(1, tab.size() / 2));

    int k = n;
    int origin[kMaxCubeDim];
    double xt[kMaxCubeDim], grad[kMaxCubeDim];
    for (int j = 0; j < n; ++j) {
        origin[j] = j;
        xt[j] = 0.0;
    }
    Vertex endpoint = 0;
    Rng rng = stream_rng(cfg.seed, index);
    NormalDist normal;
    const double dt = cfg.dt, sq = std::sqrt(dt);
    double t_base = 0.0;
    std::int64_t step = 0, total_steps = 0;
    bool cut = false;

    while (k > 0) {
        const double t = t_base + static_cast<double>(step) * dt;
        if (t >= cfg.t_max) {
            const std::size_t m = draw_conditional(tab.data(), k, xt, rng);
            for (int j = 0; j < k; ++j)
                if ((m >> j) & 1u) endpoint |= Vertex{1} << origin[j];
            cut = true;
            break;
        }
        const double hx = ext_grad(tab.data(), k, xt, grad, lev.data(), adj.data());
        require(hx > 0.0, ErrorCode::Numerical, "sde: h vanished along a path");
        const double inv = 1.0 / hx, bound = t < 1.0 ? 0.5 : 1.0;
        bool settled = false;
        for (int j = 0; j < k; ++j) {
            if (!(std::abs(xt[j]) < bound)) continue;
            double xi = xt[j] + grad[j] * inv * dt + sq * normal(rng);
            if (xi >= bound) xi = bound;
            if (xi <= -bound) xi = -bound;
            xt[j] = xi;
            settled |= std::abs(xi) == 1.0;
        }
        ++step;
        ++total_steps;
        if (settled) {
            // drop settled coordinates, highest position first
            for (int j = k - 1; j >= 0; --j) {
                if (std::abs(xt[j]) != 1.0) continue;
                const std::size_t bit = xt[j] > 0.0 ? 1 : 0;
                if (bit) endpoint |= Vertex{1} << origin[j];
                const std::size_t len = std::size_t{1} << (k - 1), low = (std::size_t{1} << j) - 1;
                for (std::size_t m = 0; m < len; ++m)
                    tab[m] = tab[(m & low) | (bit << j) | ((m >> j) << (j + 1))];
                for (int r = j; r < k - 1; ++r) {
                    xt[r] = xt[r + 1];
                    origin[r] = origin[r + 1];
                }
                --k;
            }
        }
        const double tn = t_base + static_cast<double>(step) * dt;
        if (tn < 1.0) {
            bool moving = false;
            for (int j = 0; j < k; ++j) moving |= std::abs(xt[j]) < 0.5;
            if (!moving) {
                t_base = 1.0;
                step = 0;
            }
        }
    }
    if (truncated) *truncated = cut;
    if (steps) *steps = total_steps;
    return endpoint;
}

std::vector<double> endpoint_law(const SdeConfig& cfg, std::int64_t paths, EndpointStats* stats) {
    cfg.validate();
    require(paths >= 1, ErrorCode::InvalidArgument, "sde: need at least one path");
    const LocalizationField field(cfg.nu);
    std::vector<Vertex> ends(static_cast<std::size_t>(paths));
    std::vector<std::uint8_t> cut(ends.size());
    std::vector<std::int64_t> steps(ends.size());
    constexpr std::int64_t kBlock = 256;
    parallel_for(0, (paths + kBlock - 1) / kBlock, [&](std::int64_t b) {
        for (std::int64_t p = b * kBlock; p < std::min(paths, (b + 1) * kBlock); ++p) {
            bool c = false;
            ends[p] = simulate_endpoint(field, cfg, static_cast<std::uint64_t>(p), &c, &steps[p]);
            cut[p] = c;
        }
    });
    std::vector<double> law(cfg.nu.size(), 0.0);
    for (Vertex y : ends) law[y] += 1.0;
    for (double& v : law) v /= static_cast<double>(paths);
    if (stats) {
        stats->paths = paths;
        stats->truncated = 0;
        double s = 0.0;
        for (std::size_t p = 0; p < ends.size(); ++p) {
            stats->truncated += cut[p];
            s += static_cast<double>(steps[p]);
        }
        stats->mean_steps = s / static_cast<double>(paths);
    }
    return law;
}

TiltMixture decompose(const SdeConfig& cfg, std::int64_t num_atoms) {
    cfg.validate();
    require(num_atoms >= 1, ErrorCode::InvalidArgument, "decompose: need at least one atom");
    const int n = cfg.nu.dim();
    const LocalizationField field(cfg.nu);
    const double gw = cfg.gw >= 0.0 ? cfg.gw : conservative_gw(field, cfg.gw_samples, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    const double threshold = tau_threshold(cfg, gw);
    const double radius = cfg.eps * std::sqrt(static_cast<double>(n));
    const double frozen_limit = frozen_threshold(cfg.eps, n);

    TiltMixture mix;
    mix.n = n;
    mix.eps = cfg.eps;
    mix.atoms.resize(static_cast<std::size_t>(num_atoms));
    parallel_for(0, num_atoms, [&](std::int64_t a) {
        Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(a));
        NormalDist normal;
        Vector x = Vector::Zero(n);
        std::int64_t step = 0;
        TiltAtom atom;
        atom.reason.clear();
        for (;;) {
            const double t = static_cast<double>(step) * cfg.dt;
            if (step % cfg.check_every == 0 && field.trace_sigma_h(x, t) <= threshold) {
                atom.reason = "trace";
                atom.tau = t;
                break;
            }
            const Vector prev = x;
            euler_step(field, x, t, cfg.dt, rng, normal);
            ++step;
            const double tn = std::min(1.0, static_cast<double>(step) * cfg.dt);
            if (eta_norm(x) >= radius) {
                // back up along the step onto the sphere ||eta|| = eps sqrt(n)
                double lo = 0.0, hi = 1.0;
                for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (eta_norm(prev + mid * (x - prev)) >= radius ? hi : lo) = mid;
                }
                x = prev + lo * (x - prev);
                atom.reason = "norm";
                atom.tau = t + lo * cfg.dt;
                break;
            }
            if (frozen_count(x, std::min(tn, std::nextafter(1.0, 0.0))) >= frozen_limit) {
                atom.reason = "frozen";
                atom.tau = tn;
                break;
            }
            if (tn >= 1.0) {
                atom.reason = "horizon";
                atom.tau = 1.0;
                break;
            }
        }
        atom.trace = field.trace_sigma_h(x, std::min(atom.tau, std::nextafter(1.0, 0.0)));
        atom.theta = eta(x);
        atom.weight = 1.0 / static_cast<double>(num_atoms);
        mix.atoms[a] = std::move(atom);
    });

    auto& d = mix.diagnostics;
    d.gw = gw;
    d.threshold = threshold;
    d.target_fraction = 1.0 - 1.0 / cfg.alpha - 1.0 / n;
    std::int64_t below = 0;
    for (const auto& atom : mix.atoms) {
        below += atom.trace <= threshold ? 1 : 0;
        if (atom.reason == "trace") ++d.stopped_trace;
        else if (atom.reason == "norm") ++d.stopped_norm;
        else if (atom.reason == "frozen") ++d.stopped_frozen;
        else ++d.stopped_horizon;
        d.max_theta_norm = std::max(d.max_theta_norm, atom.theta.norm());
        d.max_theta_inf = std::max(d.max_theta_inf, atom.theta.lpNorm<Eigen::Infinity>());
    }
    d.fraction_below_threshold = static_cast<double>(below) / static_cast<double>(num_atoms);
    return mix;
}

namespace {
// log-probabilities of tilt(nu, theta) given log nu
void tilt_logp(std::span<const double> logp, int n, const Vector& theta, std::vector<double>& out) {
    out.resize(logp.size());
    for (std::size_t y = 0; y < logp.size(); ++y) {
        if (logp[y] == kNegInf) {
            out[y] = kNegInf;
            continue;
        }
        double s = logp[y];
        for (int i = 0; i < n; ++i) s += theta[i] * spin(static_cast<Vertex>(y), i);
        out[y] = s;
    }
    const double z = log_sum_exp(out);
    for (double& v : out) v -= z;
}
}  // namespace

std::vector<double> mixture_law(const CubeMeasure& nu, const TiltMixture& mix) {
    const int n = nu.dim();
    require(mix.n == n, ErrorCode::InvalidArgument, "mixture dimension mismatch");
    std::vector<double> logp(nu.size());
    const double shift = n * std::log(2.0);
    for (Vertex y = 0; y < nu.size(); ++y) logp[y] = nu.log_density(y) - shift;
    std::vector<double> law(nu.size(), 0.0), lt;
    for (const auto& atom : mix.atoms) {
        tilt_logp(logp, n, atom.theta, lt);
        for (std::size_t y = 0; y < law.size(); ++y) law[y] += atom.weight * std::exp(lt[y]);
    }
    return law;
}

double mixture_average_kl(const CubeMeasure& nu, const TiltMixture& mix) {
    const int n = nu.dim();
    require(mix.n == n, ErrorCode::InvalidArgument, "mixture dimension mismatch");
    std::vector<double> logp(nu.size());
    const double shift = n * std::log(2.0);
    for (Vertex y = 0; y < nu.size(); ++y) logp[y] = nu.log_density(y) - shift;
    std::vector<double> lt;
    double s = 0.0;
    for (const auto& atom : mix.atoms) {
        tilt_logp(logp, n, atom.theta, lt);
        double k = 0.0;
        for (double v : lt)
            if (v != kNegInf) k += std::exp(v) * (v + shift);
        s += atom.weight * std::max(k, 0.0);
    }
    return s;
}

PathReport along_path_report(const SdeConfig& cfg, std::int64_t paths, const std::vector<double>& alphas,
                             const std::vector<double>& times) {
    cfg.validate();
    require(paths >= 2, ErrorCode::InvalidArgument, "path report needs at least two paths");
    const LocalizationField field(cfg.nu);
    const int n = field.dim();
    PathReport rep;
    rep.paths = paths;
    rep.gw = conservative_gw(field, cfg.gw_samples, cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    struct PerPath {
        std::int64_t states = 0, htat_bad = 0, hull_bad = 0;
        double htat_ratio = 0.0, trace_gap = 0.0, hull_excess = -kInf, ito = 0.0;
        std::vector<double> min_gamma;  // per entry of `times`
        std::vector<Vector> g_at;       // g at each entry of `times`
    };
    std::vector<PerPath> out(static_cast<std::size_t>(paths));
    parallel_for(0, paths, [&](std::int64_t p) {
        const SdePath path = simulate_path(field, cfg, static_cast<std::uint64_t>(p), -1.0);
        PerPath& r = out[p];
        r.min_gamma.assign(times.size(), kInf);
        for (const auto& c : path.checks) {
            ++r.states;
            if (c.tr_h > 4.0 * c.tr_a + 1e-9) ++r.htat_bad;
            if (c.tr_a > 1e-12) r.htat_ratio = std::max(r.htat_ratio, c.tr_h / c.tr_a);
            r.trace_gap = std::max(r.trace_gap, std::abs(c.tr_gamma - c.tr_a));
            r.hull_excess = std::max(r.hull_excess, c.hull_excess);
            if (c.hull_excess > 1e-9) ++r.hull_bad;
            for (std::size_t k = 0; k < times.size(); ++k)
                if (c.t <= times[k]) r.min_gamma[k] = std::min(r.min_gamma[k], c.tr_gamma);

            // Ito drift of x -> E[g | x] by central differences; zero for a martingale
            const double hstep = 1e-4;
            Vector drift = Vector::Zero(n);
            const Vector v = field.drift(c.x);
            const Vector g0 = field.moments(c.x, false).g;
            bool ok = true;
            for (int j = 0; j < n && ok; ++j) {
                if (!coordinate_active(c.x[j], c.t)) continue;
                if (std::abs(c.x[j]) > 1.0 - 2 * hstep) {
                    ok = false;
                    break;
                }
                Vector xp = c.x, xm = c.x;
                xp[j] += hstep;
                xm[j] -= hstep;
                const Vector gp = field.moments(xp, false).g, gm = field.moments(xm, false).g;
                drift += v[j] * (gp - gm) / (2 * hstep) + 0.5 * (gp - 2 * g0 + gm) / (hstep * hstep);
            }
            if (ok) r.ito = std::max(r.ito, drift.lpNorm<Eigen::Infinity>());
        }
        r.g_at.resize(times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            const SdeSample* best = &path.samples.front();
            for (const auto& s : path.samples)
                if (s.t <= times[k] + 1e-12) best = &s;
            r.g_at[k] = best->g;
        }
    });

    for (const auto& r : out) {
        rep.states += r.states;
        rep.htat_violations += r.htat_bad;
        rep.max_htat_ratio = std::max(rep.max_htat_ratio, r.htat_ratio);
        rep.max_trace_gap = std::max(rep.max_trace_gap, r.trace_gap);
        rep.hull_violations += r.hull_bad;
        rep.max_hull_excess = std::max(rep.max_hull_excess, r.hull_excess);
        rep.max_ito_drift = std::max(rep.max_ito_drift, r.ito);
    }
    const double P = static_cast<double>(paths);
    for (double a : alphas)
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double level = a * rep.gw / std::sqrt(times[k]);
            double hits = 0.0;
            for (const auto& r : out) hits += r.min_gamma[k] > level ? 1.0 : 0.0;
            const double f = hits / P;
            rep.divergence.push_back({a, times[k], f, std::sqrt(f * (1 - f) / P)});
        }
    const Vector g0 = field.moments(Vector::Zero(n), false).g;
    for (std::size_t k = 0; k < times.size(); ++k) {
        Vector mean = Vector::Zero(n), sq = Vector::Zero(n);
        for (const auto& r : out) {
            mean += r.g_at[k];
            sq += r.g_at[k].cwiseAbs2();
        }
        mean /= P;
        const Vector var = (sq / P - mean.cwiseAbs2()).cwiseMax(0.0) * (P / (P - 1));
        for (int i = 0; i < n; ++i) {
            const double se = std::sqrt(var[i] / P);
            const double dev = std::abs(mean[i] - g0[i]);
            if (se > 0) rep.max_mean_g_dev_sigma = std::max(rep.max_mean_g_dev_sigma, dev / se);
            else if (dev > 1e-12) rep.max_mean_g_dev_sigma = kInf;
        }
    }
    return rep;
}

}  // namespace mfld
