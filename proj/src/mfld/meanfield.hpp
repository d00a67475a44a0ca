#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mfld/complexity.hpp"
#include "mfld/cube.hpp"
#include "mfld/graphs.hpp"

namespace mfld {

// m -> integral of f against the product measure with mean m.
class ProductObjective {
public:
    virtual ~ProductObjective() = default;
    virtual int dim() const = 0;
    virtual double value(const Vector& m) const = 0;
    virtual double value_grad(const Vector& m, Vector& grad) const = 0;
    // true when a single partial derivative costs one table pass
    virtual bool cheap_partials() const { return false; }
    virtual double partial(const Vector& m, int i) const;
    // max over vertices of f; `exact` false means it is only an upper bound
    virtual double max_value(bool& exact) const = 0;
    // a Lipschitz constant (or bound) used to scale tolerances
    virtual double lip_scale() const = 0;
};

class TableObjective final : public ProductObjective {
public:
    explicit TableObjective(CubeFunction f);
    int dim() const override { return f_.dim(); }
    double value(const Vector& m) const override;
    double value_grad(const Vector& m, Vector& grad) const override;
    bool cheap_partials() const override { return true; }
    double partial(const Vector& m, int i) const override;
    double max_value(bool& exact) const override;
    double lip_scale() const override { return lip_; }
    const CubeFunction& function() const { return f_; }

private:
    CubeFunction f_;
    double lip_;
};

// Closed-form product moments of homomorphism densities over independent edges.
class SubgraphObjective final : public ProductObjective {
public:
    explicit SubgraphObjective(SubgraphModel model);
    int dim() const override { return model_.dim(); }
    double value(const Vector& m) const override;
    double value_grad(const Vector& m, Vector& grad) const override;
    double max_value(bool& exact) const override;
    double lip_scale() const override;
    const SubgraphModel& model() const { return model_; }

private:
    SubgraphModel model_;
};

// E_m f = m^T A m / 2 + b^T m for f(s) = s^T A s / 2 + b^T s with zero diagonal.
class IsingObjective final : public ProductObjective {
public:
    explicit IsingObjective(IsingModel model);
    int dim() const override { return model_.dim(); }
    double value(const Vector& m) const override;
    double value_grad(const Vector& m, Vector& grad) const override;
    // exact by enumeration up to n = 20, else sum |A_ij| / 2 + sum |b_i|
    double max_value(bool& exact) const override;
    double lip_scale() const override;
    const IsingModel& model() const { return model_; }

private:
    IsingModel model_;
};

struct SolverOptions {
    int max_iterations = 2000;
    double tolerance = 1e-10;
    int restarts = 16;
    std::uint64_t seed = 0;
};

struct MeanFieldProblem {
    std::shared_ptr<const ProductObjective> f;
    double p = 0.5;
    SolverOptions options;
    void validate() const;
};

struct SolveResult {
    Vector mean;
    double objective = 0.0;
    bool converged = false;
    int iterations = 0;
    int restarts_used = 0;
};

double expect_under_product(const CubeFunction& f, const Vector& m);
double kl_product_to_mup(const Vector& m, double p);
// exact log of the integral of e^f against mu_p (dense tables)
double log_partition(const CubeFunction& f, double p);

// Best local maximizer of lambda * E_m f - KL(m || mu_p) over restarts.
SolveResult maximize_lagrangian(const MeanFieldProblem& prob, double lambda, const std::vector<Vector>& warm_starts,
                                int restarts);
SolveResult solve_gibbs(const MeanFieldProblem& prob);

struct PhiResult {
    double phi = 0.0;          // +inf when infeasible
    double lambda = 0.0;
    bool feasible = true;
    bool converged = true;
    bool boundary = false;     // t at max f / n, point-mass limit
    bool upper_bound_only = false;  // value is the best feasible point found, not certified optimal
    Vector mean;
    double constraint_value = 0.0;  // E f under the returned product, minus t n
    std::string note;
};

PhiResult rate_function_phi(const MeanFieldProblem& prob, double t);

// Certified lower bound on phi_p(t) for a dense table:
// sup_{lambda >= 0} lambda t n - log E_{mu_p} e^{lambda f}.
double phi_chernoff_lower(const CubeFunction& f, double p, double t);

double lz_reference(double alpha);

}  // namespace mfld
