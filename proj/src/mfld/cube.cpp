#include "mfld/cube.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"

namespace mfld {

void check_cube_dim(int n) {
    require(n >= 1, ErrorCode::InvalidArgument, "cube dimension must be positive, got " + std::to_string(n));
    require(n <= kMaxCubeDim, ErrorCode::Capacity,
            "cube dimension " + std::to_string(n) + " exceeds the dense-table cap of 20");
}

Vector vertex_vector(Vertex y, int n) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = spin(y, i);
    return v;
}

Vertex vertex_from_signs(const Vector& s) {
    Vertex y = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > 0) y |= Vertex{1} << i;
    return y;
}

CubeFunction::CubeFunction(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    check_cube_dim(n);
    require(values_.size() == cube_size(n), ErrorCode::InvalidArgument,
            "function table has " + std::to_string(values_.size()) + " entries, expected 2^" + std::to_string(n));
    for (double v : values_) require(std::isfinite(v), ErrorCode::InvalidArgument, "function table entries must be finite");
}

CubeFunction CubeFunction::constant(int n, double c) {
    check_cube_dim(n);
    return CubeFunction(n, std::vector<double>(cube_size(n), c));
}

CubeFunction CubeFunction::linear(const Vector& theta) {
    const int n = static_cast<int>(theta.size());
    return tabulate(n, [&](Vertex y) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += theta[i] * spin(y, i);
        return s;
    });
}

// ---------------------------------------------------------------- measures

CubeMeasure CubeMeasure::from_log_density(int n, std::vector<double> f) {
    check_cube_dim(n);
    require(f.size() == cube_size(n), ErrorCode::InvalidArgument,
            "log-density table has " + std::to_string(f.size()) + " entries, expected 2^" + std::to_string(n));
    for (double v : f)
        require(!std::isnan(v) && v != kInf, ErrorCode::InvalidArgument, "log-density entries must be finite or -inf");
    CubeMeasure m;
    m.n_ = n;
    const double lse = log_sum_exp(f);
    require(lse != kNegInf, ErrorCode::InvalidArgument, "measure has zero total mass");
    m.log_z_ = lse - n * std::log(2.0);
    for (double& v : f) v -= m.log_z_;
    m.f_ = std::move(f);
    return m;
}

CubeMeasure CubeMeasure::from_function(const CubeFunction& f) {
    return from_log_density(f.dim(), std::vector<double>(f.values().begin(), f.values().end()));
}

CubeMeasure CubeMeasure::uniform(int n) {
    check_cube_dim(n);
    return from_log_density(n, std::vector<double>(cube_size(n), 0.0));
}

CubeMeasure CubeMeasure::point_mass(int n, Vertex y) {
    check_cube_dim(n);
    require(y < cube_size(n), ErrorCode::InvalidArgument, "vertex index out of range");
    std::vector<double> f(cube_size(n), kNegInf);
    f[y] = 0.0;
    return from_log_density(n, std::move(f));
}

CubeMeasure CubeMeasure::product(const Vector& mean) {
    const int n = static_cast<int>(mean.size());
    check_cube_dim(n);
    for (int i = 0; i < n; ++i)
        require(mean[i] >= -1.0 && mean[i] <= 1.0, ErrorCode::InvalidArgument, "product mean outside [-1,1]");
    std::vector<double> f(cube_size(n), 0.0);
    for (std::size_t y = 0; y < f.size(); ++y) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            double w = 1.0 + mean[i] * spin(static_cast<Vertex>(y), i);
            if (w <= 0.0) {
                s = kNegInf;
                break;
            }
            s += std::log(w);
        }
        f[y] = s;
    }
    return from_log_density(n, std::move(f));
}

CubeMeasure CubeMeasure::from_probabilities(int n, std::span<const double> mass) {
    check_cube_dim(n);
    require(mass.size() == cube_size(n), ErrorCode::InvalidArgument, "probability table has wrong length");
    std::vector<double> f(mass.size());
    for (std::size_t y = 0; y < mass.size(); ++y) {
        require(mass[y] >= 0.0 && std::isfinite(mass[y]), ErrorCode::InvalidArgument, "masses must be finite and >= 0");
        f[y] = mass[y] > 0.0 ? std::log(mass[y]) : kNegInf;
    }
    return from_log_density(n, std::move(f));
}

double CubeMeasure::density(Vertex y) const { return std::exp(f_[y]); }

double CubeMeasure::prob(Vertex y) const { return std::exp(f_[y] - n_ * std::log(2.0)); }

std::vector<double> CubeMeasure::probabilities() const {
    std::vector<double> p(f_.size());
    const double shift = n_ * std::log(2.0);
    for (std::size_t y = 0; y < p.size(); ++y) p[y] = std::exp(f_[y] - shift);
    return p;
}

std::vector<double> CubeMeasure::densities() const {
    std::vector<double> d(f_.size());
    for (std::size_t y = 0; y < d.size(); ++y) d[y] = std::exp(f_[y]);
    return d;
}

ProductMeasure::ProductMeasure(Vector m) : mean(std::move(m)) {
    for (int i = 0; i < mean.size(); ++i)
        require(mean[i] >= -1.0 && mean[i] <= 1.0, ErrorCode::InvalidArgument, "product mean outside [-1,1]");
}

double ProductMeasure::prob(Vertex y) const {
    double p = 1.0;
    for (int i = 0; i < mean.size(); ++i) p *= 0.5 * (1.0 + mean[i] * spin(y, i));
    return p;
}

// ------------------------------------------------------------- operations

Vector discrete_gradient(const CubeFunction& f, Vertex y) {
    const int n = f.dim();
    Vector g(n);
    for (int i = 0; i < n; ++i) {
        const Vertex up = y | (Vertex{1} << i), dn = y & ~(Vertex{1} << i);
        g[i] = 0.5 * (f(up) - f(dn));
    }
    return g;
}

double lip(const CubeFunction& f) {
    const int n = f.dim();
    double best = 0.0;
    for (Vertex y = 0; y < f.size(); ++y)
        for (int i = 0; i < n; ++i) {
            if (!((y >> i) & 1u)) continue;  // each edge once
            best = std::max(best, 0.5 * std::abs(f(y) - f(flip(y, i))));
        }
    return best;
}

double harmonic_extension(std::span<const double> table, int n, const Vector& x) {
    require(static_cast<int>(x.size()) == n, ErrorCode::InvalidArgument, "point dimension mismatch");
    std::vector<double> buf(table.begin(), table.end());
    std::size_t len = buf.size();
    for (int j = 0; j < n; ++j) {
        const double a = 0.5 * (1.0 - x[j]), b = 0.5 * (1.0 + x[j]);
        len >>= 1;
        for (std::size_t k = 0; k < len; ++k) buf[k] = a * buf[2 * k] + b * buf[2 * k + 1];
    }
    return buf[0];
}

double harmonic_extension(const CubeFunction& f, const Vector& x) { return harmonic_extension(f.values(), f.dim(), x); }

double harmonic_extension_grad(std::span<const double> table, int n, const double* x, double* grad) {
    // levels[j] holds the table after contracting bits 0..j-1 (level 0 is the input)
    thread_local std::vector<double> levels;
    thread_local std::vector<double> adj, adj_next;
    const std::size_t total = table.size();
    levels.resize(total);  // sizes 2^{n-1} + ... + 1 = 2^n - 1
    std::vector<std::size_t> offset(n + 1);
    const double* prev = table.data();
    std::size_t len = total, off = 0;
    for (int j = 0; j < n; ++j) {
        const double a = 0.5 * (1.0 - x[j]), b = 0.5 * (1.0 + x[j]);
        len >>= 1;
        offset[j + 1] = off;
        double* cur = levels.data() + off;
        for (std::size_t k = 0; k < len; ++k) cur[k] = a * prev[2 * k] + b * prev[2 * k + 1];
        prev = cur;
        off += len;
    }
    const double value = prev[0];
    if (!grad) return value;

    adj.assign(1, 1.0);
    for (int j = n - 1; j >= 0; --j) {
        const double* lj = j == 0 ? table.data() : levels.data() + offset[j];
        const std::size_t half = adj.size();
        double d = 0.0;
        for (std::size_t k = 0; k < half; ++k) d += adj[k] * (lj[2 * k + 1] - lj[2 * k]);
        grad[j] = 0.5 * d;
        if (j == 0) break;
        const double a = 0.5 * (1.0 - x[j]), b = 0.5 * (1.0 + x[j]);
        adj_next.resize(2 * half);
        for (std::size_t k = 0; k < half; ++k) {
            adj_next[2 * k] = adj[k] * a;
            adj_next[2 * k + 1] = adj[k] * b;
        }
        std::swap(adj, adj_next);
    }
    return value;
}

CubeMeasure tilt(const CubeMeasure& nu, const Vector& theta) {
    const int n = nu.dim();
    require(theta.size() == n, ErrorCode::InvalidArgument, "tilt vector dimension mismatch");
    for (int i = 0; i < n; ++i) require(std::isfinite(theta[i]), ErrorCode::InvalidArgument, "tilt vector must be finite");
    std::vector<double> f(nu.log_density().begin(), nu.log_density().end());
    for (std::size_t y = 0; y < f.size(); ++y) {
        if (f[y] == kNegInf) continue;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += theta[i] * spin(static_cast<Vertex>(y), i);
        f[y] += s;
    }
    return CubeMeasure::from_log_density(n, std::move(f));
}

double kl(const CubeMeasure& nu1, const CubeMeasure& nu2) {
    require(nu1.dim() == nu2.dim(), ErrorCode::InvalidArgument, "kl: dimension mismatch");
    const auto f1 = nu1.log_density(), f2 = nu2.log_density();
    const double shift = nu1.dim() * std::log(2.0);
    double s = 0.0;
    for (std::size_t y = 0; y < f1.size(); ++y) {
        if (f1[y] == kNegInf) continue;
        if (f2[y] == kNegInf) return kInf;
        s += std::exp(f1[y] - shift) * (f1[y] - f2[y]);
    }
    return std::max(s, 0.0);
}

double kl_to_uniform(const CubeMeasure& nu) {
    const auto f = nu.log_density();
    const double shift = nu.dim() * std::log(2.0);
    double s = 0.0;
    for (double v : f)
        if (v != kNegInf) s += std::exp(v - shift) * v;
    return std::max(s, 0.0);
}

namespace {
inline double g_coord(double up, double dn) {
    if (up == kNegInf && dn == kNegInf) return 0.0;
    if (dn == kNegInf) return 1.0;
    if (up == kNegInf) return -1.0;
    return std::tanh(0.5 * (up - dn));
}
}  // namespace

Vector g_map(const CubeMeasure& nu, Vertex y) {
    const int n = nu.dim();
    Vector g(n);
    for (int i = 0; i < n; ++i) {
        const Vertex up = y | (Vertex{1} << i), dn = y & ~(Vertex{1} << i);
        g[i] = g_coord(nu.log_density(up), nu.log_density(dn));
    }
    return g;
}

Matrix g_table(const CubeMeasure& nu) {
    const int n = nu.dim();
    Matrix g(static_cast<Eigen::Index>(nu.size()), n);
    for (Vertex y = 0; y < nu.size(); ++y) g.row(y) = g_map(nu, y).transpose();
    return g;
}

Vector v_map(const CubeMeasure& nu, const Vector& x) {
    const int n = nu.dim();
    require(x.size() == n, ErrorCode::InvalidArgument, "v_map: point dimension mismatch");
    for (int i = 0; i < n; ++i) require(x[i] >= -1.0 && x[i] <= 1.0, ErrorCode::InvalidArgument, "v_map: point outside the cube");
    const auto dens = nu.densities();
    Vector grad(n);
    const double h = harmonic_extension_grad(dens, n, x.data(), grad.data());
    if (!(h > 0.0)) return Vector::Zero(n);
    return grad / h;
}

Matrix h_matrix(const CubeMeasure& nu) {
    const int n = nu.dim();
    const auto p = nu.probabilities();
    const Matrix g = g_table(nu);
    Vector mean = Vector::Zero(n);
    for (Vertex y = 0; y < nu.size(); ++y)
        if (p[y] > 0.0) mean += p[y] * g.row(y).transpose();
    Matrix cov = Matrix::Zero(n, n);
    for (Vertex y = 0; y < nu.size(); ++y) {
        if (p[y] <= 0.0) continue;
        const Vector d = g.row(y).transpose() - mean;
        cov.noalias() += p[y] * d * d.transpose();
    }
    return 0.5 * (cov + cov.transpose());
}

Vector center_of_mass(const CubeMeasure& nu) {
    const int n = nu.dim();
    const auto p = nu.probabilities();
    Vector m = Vector::Zero(n);
    for (Vertex y = 0; y < nu.size(); ++y) {
        if (p[y] <= 0.0) continue;
        for (int i = 0; i < n; ++i) m[i] += p[y] * spin(y, i);
    }
    for (int i = 0; i < n; ++i) m[i] = std::clamp(m[i], -1.0, 1.0);
    return m;
}

ProductMeasure product_fit(const CubeMeasure& nu) { return ProductMeasure(center_of_mass(nu)); }

Vector eta(const Vector& x) {
    Vector e(x.size());
    for (int i = 0; i < x.size(); ++i) {
        require(std::abs(x[i]) < 1.0, ErrorCode::Domain, "eta: coordinate " + std::to_string(i) + " is on the boundary");
        e[i] = std::atanh(x[i]);
    }
    return e;
}

double trace_tail(const Matrix& a, double k) {
    require(a.rows() == a.cols(), ErrorCode::InvalidArgument, "trace_tail: matrix must be square");
    const auto n = a.rows();
    std::vector<double> d(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d[i] = a(i, i);  // diagonal() has a stride, no raw copy
    std::sort(d.begin(), d.end(), std::greater<>());
    const double start = std::max(1.0, std::ceil(k));
    if (start > static_cast<double>(n)) return 0.0;
    double s = 0.0;
    for (auto i = static_cast<Eigen::Index>(start) - 1; i < n; ++i) s += d[i];
    return s;
}

}  // namespace mfld
