#include "mfld/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/random/sobol.hpp>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/parallel.hpp"
#include "mfld/random.hpp"

namespace mfld {

namespace {
const double kOneMinus = std::nextafter(1.0, 0.0);

double clamp_mean(double m) { return std::clamp(m, -kOneMinus, kOneMinus); }

// d/dm_i of the multilinear extension: contract every bit but i, difference on bit i
double table_partial(std::span<const double> table, int n, const Vector& m, int i) {
    thread_local std::vector<double> buf;
    buf.assign(table.begin(), table.end());
    std::size_t len = buf.size();
    for (int j = 0; j < n; ++j) {
        double a, b;
        if (j == i) {
            a = -0.5;
            b = 0.5;
        } else {
            a = 0.5 * (1.0 - m[j]);
            b = 0.5 * (1.0 + m[j]);
        }
        len >>= 1;
        for (std::size_t k = 0; k < len; ++k) buf[k] = a * buf[2 * k] + b * buf[2 * k + 1];
    }
    return buf[0];
}

double binary_kl(double m, double p) {
    const double a = 0.5 * (1.0 + m), b = 0.5 * (1.0 - m);
    return xlogxy(a, p) + xlogxy(b, 1.0 - p);
}

std::vector<Vector> sobol_starts(int n, int count, std::uint64_t seed) {
    std::vector<Vector> out;
    if (count <= 0) return out;
    Rng rng = stream_rng(seed, 0x50b01);
    std::vector<std::uint64_t> shift(n);
    for (auto& s : shift) s = rng();
    try {
        boost::random::sobol gen(static_cast<std::size_t>(n));
        gen.discard(static_cast<std::uintmax_t>(n));  // skip the origin
        for (int k = 0; k < count; ++k) {
            Vector m(n);
            for (int i = 0; i < n; ++i) {
                const std::uint64_t v = static_cast<std::uint64_t>(gen()) ^ shift[i];
                const double u = static_cast<double>(v >> 11) * 0x1.0p-53;
                m[i] = 0.95 * (2.0 * u - 1.0);
            }
            out.push_back(std::move(m));
        }
    } catch (const std::exception&) {
        // dimension beyond the direction-number table: plain pseudo-random starts
        out.clear();
        UniformDist unif(-0.95, 0.95);
        for (int k = 0; k < count; ++k) {
            Vector m(n);
            for (int i = 0; i < n; ++i) m[i] = unif(rng);
            out.push_back(std::move(m));
        }
    }
    return out;
}

struct Ascent {
    Vector mean;
    double objective;
    bool converged;
    int iterations;
};

double lagrangian(const ProductObjective& f, double lambda, double p, const Vector& m) {
    return lambda * f.value(m) - kl_product_to_mup(m, p);
}

// Gauss-Seidel: each coordinate set to its exact conditional maximizer.
Ascent coordinate_ascent(const ProductObjective& f, double lambda, double p, Vector m, const SolverOptions& opt) {
    const int n = f.dim();
    const double h0 = std::atanh(2.0 * p - 1.0);
    Ascent r{m, 0.0, false, 0};
    for (int it = 1; it <= opt.max_iterations; ++it) {
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            const double mi = clamp_mean(std::tanh(lambda * f.partial(m, i) + h0));
            delta = std::max(delta, std::abs(mi - m[i]));
            m[i] = mi;
        }
        r.iterations = it;
        if (delta < opt.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.mean = m;
    r.objective = lagrangian(f, lambda, p, m);
    return r;
}

// Damped Jacobi step in arctanh coordinates with monotone acceptance.
Ascent mirror_ascent(const ProductObjective& f, double lambda, double p, Vector m, const SolverOptions& opt) {
    const int n = f.dim();
    const double h0 = std::atanh(2.0 * p - 1.0);
    for (int i = 0; i < n; ++i) m[i] = clamp_mean(m[i]);
    Vector u = m.unaryExpr([](double v) { return std::atanh(v); });
    Vector grad;
    double F = f.value_grad(m, grad);
    double obj = lambda * F - kl_product_to_mup(m, p);
    double step = 1.0;
    Ascent r{m, obj, false, 0};
    for (int it = 1; it <= opt.max_iterations; ++it) {
        r.iterations = it;
        const Vector dir = (lambda * grad).array() + h0 - u.array();
        if (dir.cwiseAbs().maxCoeff() < opt.tolerance) {
            r.converged = true;
            break;
        }
        bool accepted = false;
        while (step > 1e-14) {
            const Vector un = u + step * dir;
            Vector mn = un.unaryExpr([](double v) { return clamp_mean(std::tanh(v)); });
            Vector gn;
            const double Fn = f.value_grad(mn, gn);
            const double on = lambda * Fn - kl_product_to_mup(mn, p);
            if (on >= obj - 1e-15 * std::abs(obj)) {
                const double gain = on - obj;
                u = un;
                m = mn;
                grad = gn;
                obj = on;
                accepted = true;
                step = std::min(1.0, 1.5 * step);
                if (gain <= 1e-15 * std::max(1.0, std::abs(obj)) && dir.cwiseAbs().maxCoeff() < 1e3 * opt.tolerance)
                    r.converged = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || r.converged) {
            r.converged = r.converged || !accepted;
            break;
        }
    }
    r.mean = m;
    r.objective = obj;
    return r;
}

Ascent ascend(const ProductObjective& f, double lambda, double p, const Vector& start, const SolverOptions& opt) {
    return f.cheap_partials() ? coordinate_ascent(f, lambda, p, start, opt) : mirror_ascent(f, lambda, p, start, opt);
}
}  // namespace

// ------------------------------------------------------------ objectives

double ProductObjective::partial(const Vector& m, int i) const {
    Vector g;
    value_grad(m, g);
    return g[i];
}

TableObjective::TableObjective(CubeFunction f) : f_(std::move(f)), lip_(lip(f_)) {}

double TableObjective::value(const Vector& m) const { return harmonic_extension(f_, m); }

double TableObjective::value_grad(const Vector& m, Vector& grad) const {
    grad.resize(f_.dim());
    return harmonic_extension_grad(f_.values(), f_.dim(), m.data(), grad.data());
}

double TableObjective::partial(const Vector& m, int i) const { return table_partial(f_.values(), f_.dim(), m, i); }

double TableObjective::max_value(bool& exact) const {
    exact = true;
    return *std::max_element(f_.values().begin(), f_.values().end());
}

SubgraphObjective::SubgraphObjective(SubgraphModel model) : model_(std::move(model)) { model_.validate(); }

double SubgraphObjective::value(const Vector& m) const {
    const Vector q = 0.5 * (m.array() + 1.0);
    return subgraph_product_mean(model_, q);
}

double SubgraphObjective::value_grad(const Vector& m, Vector& grad) const {
    const Vector q = 0.5 * (m.array() + 1.0);
    Vector gq;
    const double v = subgraph_product_mean_grad(model_, q, gq);
    grad = 0.5 * gq;
    return v;
}

double SubgraphObjective::max_value(bool& exact) const {
    // hom densities are monotone in the edge set: with beta >= 0 the complete graph is optimal
    bool nonneg = true;
    double bound = 0.0;
    for (const auto& t : model_.terms) {
        nonneg = nonneg && t.beta >= 0.0;
        bound += std::max(t.beta, 0.0) * model_.N * model_.N;
    }
    exact = nonneg;
    if (nonneg) return value(Vector::Ones(model_.dim()));
    return bound;
}

double SubgraphObjective::lip_scale() const {
    double s = 0.0;
    for (const auto& t : model_.terms) s += std::abs(t.beta) * t.h.num_edges();
    return s;
}

IsingObjective::IsingObjective(IsingModel model) : model_(std::move(model)) { model_.validate(); }

double IsingObjective::value(const Vector& m) const { return 0.5 * m.dot(model_.A * m) + model_.b.dot(m); }

double IsingObjective::value_grad(const Vector& m, Vector& grad) const {
    grad = model_.A * m + model_.b;
    return 0.5 * m.dot(grad - model_.b) + model_.b.dot(m);
}

double IsingObjective::max_value(bool& exact) const {
    const int n = model_.dim();
    if (n <= 20) {
        exact = true;
        const CubeFunction f = model_.table();
        return *std::max_element(f.values().begin(), f.values().end());
    }
    exact = false;
    return 0.5 * model_.A.cwiseAbs().sum() + model_.b.cwiseAbs().sum();
}

double IsingObjective::lip_scale() const { return ising_lip_bound(model_.A, model_.b); }

// ------------------------------------------------------------ problems

void MeanFieldProblem::validate() const {
    require(static_cast<bool>(f), ErrorCode::InvalidArgument, "mean-field problem has no objective");
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    require(options.max_iterations > 0, ErrorCode::InvalidArgument, "max_iterations must be positive");
    require(options.restarts >= 0, ErrorCode::InvalidArgument, "restarts must be >= 0");
}

double expect_under_product(const CubeFunction& f, const Vector& m) { return harmonic_extension(f, m); }

double kl_product_to_mup(const Vector& m, double p) {
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    double s = 0.0;
    for (int i = 0; i < m.size(); ++i) {
        require(m[i] >= -1.0 && m[i] <= 1.0, ErrorCode::InvalidArgument, "mean outside [-1,1]");
        s += binary_kl(m[i], p);
    }
    return std::max(s, 0.0);
}

double log_partition(const CubeFunction& f, double p) {
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    const int n = f.dim();
    const double lp = std::log(p), lq = std::log1p(-p);
    std::vector<double> a(f.size());
    for (Vertex y = 0; y < f.size(); ++y) {
        const int k = std::popcount(y);
        a[y] = f(y) + k * lp + (n - k) * lq;
    }
    return log_sum_exp(a);
}

SolveResult maximize_lagrangian(const MeanFieldProblem& prob, double lambda, const std::vector<Vector>& warm_starts,
                                int restarts) {
    prob.validate();
    const int n = prob.f->dim();
    std::vector<Vector> starts = warm_starts;
    starts.push_back(Vector::Constant(n, 2.0 * prob.p - 1.0));
    for (auto& s : sobol_starts(n, restarts, prob.options.seed)) starts.push_back(std::move(s));
    for (const auto& s : starts) require(s.size() == n, ErrorCode::InvalidArgument, "start vector has wrong dimension");

    std::vector<Ascent> runs(starts.size());
    parallel_for(0, static_cast<std::int64_t>(starts.size()),
                 [&](std::int64_t k) { runs[k] = ascend(*prob.f, lambda, prob.p, starts[k], prob.options); });
    std::size_t best = 0;
    for (std::size_t k = 1; k < runs.size(); ++k)
        if (runs[k].objective > runs[best].objective) best = k;
    SolveResult r;
    r.mean = runs[best].mean;
    r.objective = runs[best].objective;
    r.converged = runs[best].converged;
    r.iterations = runs[best].iterations;
    r.restarts_used = static_cast<int>(starts.size());
    return r;
}

SolveResult solve_gibbs(const MeanFieldProblem& prob) { return maximize_lagrangian(prob, 1.0, {}, prob.options.restarts); }

PhiResult rate_function_phi(const MeanFieldProblem& prob, double t) {
    prob.validate();
    const ProductObjective& f = *prob.f;
    const int n = f.dim();
    const double tn = t * n, p = prob.p;
    const Vector m0 = Vector::Constant(n, 2.0 * p - 1.0);
    PhiResult r;

    const double F0 = f.value(m0);
    if (F0 >= tn) {
        r.mean = m0;
        r.constraint_value = F0 - tn;
        r.note = "mu_p already satisfies the constraint";
        return r;
    }
    bool exact = false;
    const double fmax = f.max_value(exact);
    const double tol = 1e-6 * n * std::max(f.lip_scale(), 1e-12);
    if (tn > fmax + 1e-12 * std::max(1.0, std::abs(fmax))) {
        if (exact) {
            r.phi = kInf;
            r.feasible = false;
            r.note = "t exceeds max f / n";
            return r;
        }
    } else if (exact && tn >= fmax - 1e-12 * std::max(1.0, std::abs(fmax))) {
        // only point masses on maximizers are feasible
        r.boundary = true;
        r.phi = kInf;
        const double lp = -std::log(p), lq = -std::log1p(-p);
        if (auto* tf = dynamic_cast<const TableObjective*>(&f)) {
            const auto& tab = tf->function();
            for (Vertex y = 0; y < tab.size(); ++y) {
                if (tab(y) < fmax - 1e-12 * std::max(1.0, std::abs(fmax))) continue;
                const int k = std::popcount(y);
                const double v = k * lp + (n - k) * lq;
                if (v < r.phi) {
                    r.phi = v;
                    r.mean = vertex_vector(y, n);
                }
            }
        } else {
            r.phi = n * lp;
            r.mean = Vector::Ones(n);
        }
        r.constraint_value = 0.0;
        r.note = "t at max f / n: point-mass limit over maximizing vertices";
        return r;
    }

    // bracket lambda by doubling
    double lam_lo = 0.0, lam = 1.0;
    Vector m_lo = m0;
    SolveResult s = maximize_lagrangian(prob, lam, {m0}, prob.options.restarts);
    while (f.value(s.mean) < tn && lam < 1e9) {
        lam_lo = lam;
        m_lo = s.mean;
        lam *= 2.0;
        s = maximize_lagrangian(prob, lam, {m_lo}, prob.options.restarts);
    }
    if (f.value(s.mean) < tn) {
        r.phi = kInf;
        r.feasible = false;
        r.converged = false;
        r.upper_bound_only = true;
        r.mean = s.mean;
        r.note = "no feasible product found";
        return r;
    }
    double lam_hi = lam;
    Vector m_hi = s.mean;
    for (int it = 0; it < 60 && f.value(m_hi) - tn > tol; ++it) {
        const double mid = 0.5 * (lam_lo + lam_hi);
        SolveResult sm = maximize_lagrangian(prob, mid, {m_lo, m_hi}, 0);
        if (f.value(sm.mean) >= tn) {
            lam_hi = mid;
            m_hi = sm.mean;
        } else {
            lam_lo = mid;
            m_lo = sm.mean;
        }
        if (lam_hi - lam_lo <= 1e-14 * lam_hi) break;
    }
    // the segment from mu_p toward m_hi may cross the constraint at lower cost
    double a = 0.0, b = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double c = 0.5 * (a + b);
        if (f.value(m0 + c * (m_hi - m0)) >= tn) b = c;
        else a = c;
    }
    const Vector m_seg = m0 + b * (m_hi - m0);
    const double kl_hi = kl_product_to_mup(m_hi, p), kl_seg = kl_product_to_mup(m_seg, p);
    r.lambda = lam_hi;
    if (kl_seg < kl_hi && f.value(m_seg) >= tn) {
        r.phi = kl_seg;
        r.mean = m_seg;
    } else {
        r.phi = kl_hi;
        r.mean = m_hi;
    }
    r.constraint_value = f.value(r.mean) - tn;
    r.converged = r.constraint_value <= tol;
    r.upper_bound_only = !r.converged;
    if (!r.converged) r.note = "constraint not active within tolerance; value is a feasible upper bound";
    return r;
}

double phi_chernoff_lower(const CubeFunction& f, double p, double t) {
    require(p > 0.0 && p < 1.0, ErrorCode::InvalidArgument, "p must lie in (0,1)");
    const int n = f.dim();
    const double tn = t * n;
    const double lp = std::log(p), lq = std::log1p(-p);
    std::vector<double> base(f.size());
    for (Vertex y = 0; y < f.size(); ++y) {
        const int k = std::popcount(y);
        base[y] = k * lp + (n - k) * lq;
    }
    const double fmax = *std::max_element(f.values().begin(), f.values().end());
    if (tn > fmax + 1e-12 * std::max(1.0, std::abs(fmax))) return kInf;

    std::vector<double> a(f.size());
    // psi(lambda) = lambda t n - log E e^{lambda f}, and psi' = t n - (tilted mean of f)
    auto eval = [&](double lam, double& deriv) {
        for (Vertex y = 0; y < f.size(); ++y) a[y] = base[y] + lam * f(y);
        const double lse = log_sum_exp(a);
        double mean = 0.0;
        for (Vertex y = 0; y < f.size(); ++y) mean += std::exp(a[y] - lse) * f(y);
        deriv = tn - mean;
        return lam * tn - lse;
    };
    double d;
    double best = std::max(0.0, eval(0.0, d));
    if (d <= 0.0) return best;
    double lo = 0.0, hi = 1.0;
    for (double v = eval(hi, d); d > 0.0 && hi < 1e12; v = eval(hi, d)) {
        best = std::max(best, v);
        lo = hi;
        hi *= 2.0;
    }
    best = std::max(best, eval(hi, d));
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        best = std::max(best, eval(mid, d));
        if (d > 0.0) lo = mid;
        else hi = mid;
    }
    return best;
}

double lz_reference(double alpha) {
    require(alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
    return std::min(std::cbrt(alpha * alpha), 2.0 * alpha / 3.0);
}

}  // namespace mfld
