#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "mfld/cube.hpp"
#include "mfld/graphs.hpp"

namespace mfld {

struct GwEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    bool lower_estimate = false;  // set in vertex-subsample mode
};

// A finite point set in R^dim, produced in row blocks so that 2^20-point
// gradient sets never need to be materialized at once.
class GradientSet {
public:
    using RowFill = std::function<void(std::size_t first, std::size_t rows, Matrix& out)>;

    static GradientSet explicit_points(Matrix rows, bool with_zero = true);
    static GradientSet from_oracle(int dim, std::size_t count, RowFill fill, bool with_zero = true);
    // all discrete gradients of f
    static GradientSet of_function(const CubeFunction& f);

    int dim() const { return dim_; }
    std::size_t count() const { return count_; }
    bool with_zero() const { return with_zero_; }
    void fill(std::size_t first, std::size_t rows, Matrix& out) const { fill_(first, rows, out); }
    // centroid of the listed points (not including the injected zero)
    Vector centroid() const;

private:
    int dim_ = 0;
    std::size_t count_ = 0;
    bool with_zero_ = true;
    RowFill fill_;
};

struct GwOptions {
    std::int64_t samples = 1000;
    std::uint64_t seed = 0;
    // >0: sup over that many random points per draw (a lower estimate)
    std::size_t subsample = 0;
    // subtract <centroid, Gamma> per draw; same mean, smaller variance
    bool centered = false;
};

// sup_{x in K} <x, Gamma_s> for s = 0..samples-1; Gamma_s depends only on (seed, s)
std::vector<double> gw_per_sample(const GradientSet& K, const GwOptions& opt);
GwEstimate gw_monte_carlo(const GradientSet& K, std::int64_t samples, std::uint64_t seed);
GwEstimate gw_monte_carlo(const GradientSet& K, const GwOptions& opt);
GwEstimate summarize(const std::vector<double>& values);

GwEstimate complexity_of(const CubeFunction& f, std::int64_t samples, std::uint64_t seed);

double subgraph_complexity_bound(const SimpleGraph& h, int N);

// f(s) = 1/2 <s, A s> + <b, s> with A symmetric, zero diagonal; grad f = A s + b.
struct IsingModel {
    Matrix A;
    Vector b;
    void validate() const;
    int dim() const { return static_cast<int>(A.rows()); }
    CubeFunction table() const;
    static IsingModel curie_weiss(int n, double beta, double field = 0.0);
};

double ising_complexity_bound(const Matrix& A, const Vector& b);
double ising_lip_bound(const Matrix& A, const Vector& b);

}  // namespace mfld
