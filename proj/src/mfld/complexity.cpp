#include "mfld/complexity.hpp"

#include <algorithm>
#include <cmath>

#include "mfld/error.hpp"
#include "mfld/numeric.hpp"
#include "mfld/parallel.hpp"
#include "mfld/random.hpp"

namespace mfld {

namespace {
constexpr std::size_t kBlock = 128;   // Gaussian draws per work item
constexpr std::size_t kChunk = 4096;  // points per row block
}  // namespace

GradientSet GradientSet::explicit_points(Matrix rows, bool with_zero) {
    for (Eigen::Index i = 0; i < rows.size(); ++i)
        require(std::isfinite(rows.data()[i]), ErrorCode::InvalidArgument, "gradient set entries must be finite");
    GradientSet k;
    k.dim_ = static_cast<int>(rows.cols());
    k.count_ = static_cast<std::size_t>(rows.rows());
    k.with_zero_ = with_zero;
    auto shared = std::make_shared<Matrix>(std::move(rows));
    k.fill_ = [shared](std::size_t first, std::size_t n, Matrix& out) {
        out = shared->middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(n));
    };
    return k;
}

GradientSet GradientSet::from_oracle(int dim, std::size_t count, RowFill fill, bool with_zero) {
    GradientSet k;
    k.dim_ = dim;
    k.count_ = count;
    k.with_zero_ = with_zero;
    k.fill_ = std::move(fill);
    return k;
}

GradientSet GradientSet::of_function(const CubeFunction& f) {
    const int n = f.dim();
    // the closure owns a copy of the table
    auto table = std::make_shared<CubeFunction>(f);
    return from_oracle(n, f.size(), [table, n](std::size_t first, std::size_t rows, Matrix& out) {
        out.resize(static_cast<Eigen::Index>(rows), n);
        for (std::size_t r = 0; r < rows; ++r) {
            const Vertex y = static_cast<Vertex>(first + r);
            for (int i = 0; i < n; ++i) {
                const Vertex up = y | (Vertex{1} << i), dn = y & ~(Vertex{1} << i);
                out(static_cast<Eigen::Index>(r), i) = 0.5 * ((*table)(up) - (*table)(dn));
            }
        }
    });
}

Vector GradientSet::centroid() const {
    Vector c = Vector::Zero(dim_);
    if (count_ == 0) return c;
    Matrix chunk;
    for (std::size_t first = 0; first < count_; first += kChunk) {
        const std::size_t rows = std::min(kChunk, count_ - first);
        fill(first, rows, chunk);
        c += chunk.colwise().sum().transpose();
    }
    return c / static_cast<double>(count_);
}

std::vector<double> gw_per_sample(const GradientSet& K, const GwOptions& opt) {
    require(opt.samples >= 2, ErrorCode::InvalidArgument, "Gaussian width needs at least 2 samples");
    require(K.count() > 0 || K.with_zero(), ErrorCode::InvalidArgument, "Gaussian width of an empty set");
    const int d = K.dim();
    const std::size_t S = static_cast<std::size_t>(opt.samples);
    std::vector<double> out(S);
    const Vector c = opt.centered ? K.centroid() : Vector::Zero(d);
    const std::int64_t blocks = static_cast<std::int64_t>((S + kBlock - 1) / kBlock);

    parallel_for(0, blocks, [&](std::int64_t blk) {
        const std::size_t s0 = static_cast<std::size_t>(blk) * kBlock;
        const std::size_t B = std::min(kBlock, S - s0);
        Matrix gamma(d, static_cast<Eigen::Index>(B));
        for (std::size_t s = 0; s < B; ++s)
            for (int j = 0; j < d; ++j) gamma(j, static_cast<Eigen::Index>(s)) = counter_normal(opt.seed, s0 + s, j);
        std::vector<double> best(B, K.with_zero() ? 0.0 : kNegInf);
        Matrix chunk;
        if (opt.subsample > 0 && opt.subsample < K.count()) {
            for (std::size_t s = 0; s < B; ++s) {
                for (std::size_t k = 0; k < opt.subsample; ++k) {
                    const std::uint64_t r = mix64(opt.seed ^ mix64((s0 + s) * 0x9e3779b97f4a7c15ULL + k + 1));
                    K.fill(r % K.count(), 1, chunk);
                    best[s] = std::max(best[s], chunk.row(0).dot(gamma.col(static_cast<Eigen::Index>(s))));
                }
            }
        } else {
            for (std::size_t first = 0; first < K.count(); first += kChunk) {
                const std::size_t rows = std::min(kChunk, K.count() - first);
                K.fill(first, rows, chunk);
                const Matrix prod = chunk * gamma;
                const Eigen::RowVectorXd mx = prod.colwise().maxCoeff();
                for (std::size_t s = 0; s < B; ++s) best[s] = std::max(best[s], mx[static_cast<Eigen::Index>(s)]);
            }
        }
        for (std::size_t s = 0; s < B; ++s) {
            double v = best[s];
            if (opt.centered) v -= c.dot(gamma.col(static_cast<Eigen::Index>(s)));
            out[s0 + s] = v;
        }
    });
    return out;
}

GwEstimate summarize(const std::vector<double>& values) {
    GwEstimate e;
    e.samples = static_cast<std::int64_t>(values.size());
    if (values.empty()) return e;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    e.mean = mean;
    if (values.size() > 1) e.std_error = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
    return e;
}

GwEstimate gw_monte_carlo(const GradientSet& K, const GwOptions& opt) {
    GwEstimate e = summarize(gw_per_sample(K, opt));
    e.lower_estimate = opt.subsample > 0 && opt.subsample < K.count();
    return e;
}

GwEstimate gw_monte_carlo(const GradientSet& K, std::int64_t samples, std::uint64_t seed) {
    GwOptions opt;
    opt.samples = samples;
    opt.seed = seed;
    return gw_monte_carlo(K, opt);
}

GwEstimate complexity_of(const CubeFunction& f, std::int64_t samples, std::uint64_t seed) {
    return gw_monte_carlo(GradientSet::of_function(f), samples, seed);
}

double subgraph_complexity_bound(const SimpleGraph& h, int N) {
    require(N >= h.vertices, ErrorCode::InvalidArgument, "N must be at least the number of vertices of H");
    return h.num_edges() * std::pow(static_cast<double>(N), 1.5);
}

// ------------------------------------------------------------------ Ising

void IsingModel::validate() const {
    require(A.rows() == A.cols(), ErrorCode::InvalidArgument, "coupling matrix must be square");
    require(b.size() == A.rows(), ErrorCode::InvalidArgument, "field length must match the coupling matrix");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        require(A(i, i) == 0.0, ErrorCode::InvalidArgument, "coupling matrix must have zero diagonal");
        for (Eigen::Index j = 0; j < i; ++j)
            require(std::abs(A(i, j) - A(j, i)) <= 1e-12 * scale, ErrorCode::InvalidArgument, "coupling matrix must be symmetric");
    }
    for (Eigen::Index i = 0; i < A.size(); ++i) require(std::isfinite(A.data()[i]), ErrorCode::InvalidArgument, "couplings must be finite");
}

CubeFunction IsingModel::table() const {
    validate();
    const int n = dim();
    return CubeFunction::tabulate(n, [&](Vertex y) {
        const Vector s = vertex_vector(y, n);
        return 0.5 * s.dot(A * s) + b.dot(s);
    });
}

IsingModel IsingModel::curie_weiss(int n, double beta, double field) {
    Matrix A = Matrix::Constant(n, n, beta / n);
    A.diagonal().setZero();
    return IsingModel{A, Vector::Constant(n, field)};
}

double ising_complexity_bound(const Matrix& A, const Vector& b) {
    IsingModel{A, b}.validate();
    const double n = static_cast<double>(A.rows());
    const double bmax2 = b.size() ? b.cwiseAbs2().maxCoeff() : 0.0;
    return std::sqrt(n * (A.squaredNorm() + bmax2));
}

double ising_lip_bound(const Matrix& A, const Vector& b) {
    IsingModel{A, b}.validate();
    const double u = A.rows() ? A.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
    return u + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0);
}

}  // namespace mfld
