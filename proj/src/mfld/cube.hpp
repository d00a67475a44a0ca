#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mfld {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Bit i of a vertex index is set <=> coordinate i equals +1.
using Vertex = std::uint32_t;

inline constexpr int kMaxCubeDim = 20;

inline double spin(Vertex y, int i) { return ((y >> i) & 1u) ? 1.0 : -1.0; }
inline Vertex flip(Vertex y, int i) { return y ^ (Vertex{1} << i); }
inline int hamming(Vertex a, Vertex b) { return std::popcount(a ^ b); }
inline std::size_t cube_size(int n) { return std::size_t{1} << n; }

Vector vertex_vector(Vertex y, int n);
// +1 where the coordinate is positive
Vertex vertex_from_signs(const Vector& s);

void check_cube_dim(int n);

class CubeFunction {
public:
    CubeFunction() = default;
    CubeFunction(int n, std::vector<double> values);

    template <class F>
    static CubeFunction tabulate(int n, F&& f) {
        check_cube_dim(n);
        std::vector<double> v(cube_size(n));
        for (std::size_t y = 0; y < v.size(); ++y) v[y] = f(static_cast<Vertex>(y));
        return CubeFunction(n, std::move(v));
    }
    static CubeFunction constant(int n, double c);
    static CubeFunction linear(const Vector& theta);

    int dim() const { return n_; }
    std::size_t size() const { return values_.size(); }
    double operator()(Vertex y) const { return values_[y]; }
    std::span<const double> values() const { return values_; }

private:
    int n_ = 0;
    std::vector<double> values_;
};

// Probability measure on {-1,1}^n given by a log-density relative to the
// uniform measure. The stored table is normalized (mean of e^f is 1); entries
// equal to -inf mark atoms of zero mass.
class CubeMeasure {
public:
    CubeMeasure() = default;

    static CubeMeasure from_log_density(int n, std::vector<double> f);
    static CubeMeasure from_function(const CubeFunction& f);
    static CubeMeasure uniform(int n);
    static CubeMeasure point_mass(int n, Vertex y);
    // independent coordinates with the given means (entries may be +-1)
    static CubeMeasure product(const Vector& mean);
    // measure with nu(y) proportional to the given masses (nonnegative)
    static CubeMeasure from_probabilities(int n, std::span<const double> mass);

    int dim() const { return n_; }
    std::size_t size() const { return f_.size(); }
    // log(2^-n sum_y e^{f(y)}) of the unnormalized input
    double log_z() const { return log_z_; }
    std::span<const double> log_density() const { return f_; }
    double log_density(Vertex y) const { return f_[y]; }
    double density(Vertex y) const;  // d nu / d mu
    double prob(Vertex y) const;     // nu({y})
    std::vector<double> probabilities() const;
    std::vector<double> densities() const;

private:
    int n_ = 0;
    std::vector<double> f_;
    double log_z_ = 0.0;
};

struct ProductMeasure {
    Vector mean;

    explicit ProductMeasure(Vector m);
    int dim() const { return static_cast<int>(mean.size()); }
    double prob(Vertex y) const;
    CubeMeasure to_measure() const { return CubeMeasure::product(mean); }
};

Vector discrete_gradient(const CubeFunction& f, Vertex y);
double lip(const CubeFunction& f);

// Multilinear extension sum_y w(x,y) table[y], w(x,y) = prod (1 + x_i y_i)/2.
double harmonic_extension(std::span<const double> table, int n, const Vector& x);
double harmonic_extension(const CubeFunction& f, const Vector& x);
// Same value plus its gradient (reverse-mode through the bit contraction, O(2^n)).
double harmonic_extension_grad(std::span<const double> table, int n, const double* x, double* grad);

CubeMeasure tilt(const CubeMeasure& nu, const Vector& theta);
// +inf when nu1 is not absolutely continuous w.r.t. nu2
double kl(const CubeMeasure& nu1, const CubeMeasure& nu2);
double kl_to_uniform(const CubeMeasure& nu);

Vector g_map(const CubeMeasure& nu, Vertex y);
// all g vectors, row y = g_nu(y)
Matrix g_table(const CubeMeasure& nu);
Vector v_map(const CubeMeasure& nu, const Vector& x);
Matrix h_matrix(const CubeMeasure& nu);
Vector center_of_mass(const CubeMeasure& nu);
ProductMeasure product_fit(const CubeMeasure& nu);

// atanh, coordinatewise; throws at boundary points
Vector eta(const Vector& x);
// sum of the diagonal sorted decreasingly, from position ceil(k) (1-based)
double trace_tail(const Matrix& a, double k);

}  // namespace mfld
