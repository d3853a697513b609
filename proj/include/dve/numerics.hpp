#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dve {

using Vec = std::vector<double>;

bool all_finite(const Vec& v);

/// Euclidean inner product. Throws std::invalid_argument on dimension mismatch.
double dot(const Vec& a, const Vec& b);

/// Euclidean norm; exactly 0 for the zero vector.
double norm(const Vec& a);

// y += alpha * x
void axpy(double alpha, const Vec& x, Vec& y);

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double alpha, const Vec& a);

/// Dense row-major matrix.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    static Mat identity(int n);
    Vec matvec(const Vec& x) const;
    Mat transpose() const;
    double frob() const;
};

Mat matmul(const Mat& a, const Mat& b);

/// Deterministic seeded random stream. Identical (seed, stream_id) yields an
/// identical scalar sequence on every platform: the mt19937_64 engine output
/// is fully specified by the standard and the uniform/normal transforms below
/// avoid the implementation-defined std distributions.
class RngStream {
  public:
    RngStream(uint64_t seed, uint64_t stream_id);

    /// Uniform draw in [0, 1) with 53 bits of precision.
    double uniform01();

    /// Standard normal via Box-Muller (one engine pair per draw, no cached spare).
    double normal();

    /// Integer in [0, n).
    uint64_t below(uint64_t n);

    uint64_t seed() const { return seed_; }
    uint64_t stream_id() const { return stream_id_; }

  private:
    uint64_t seed_;
    uint64_t stream_id_;
    std::mt19937_64 engine_;
};

/// Child stream at a salted id; used to hand out independent per-task streams.
RngStream derive_stream(const RngStream& base, uint64_t salt);
RngStream derive_stream(uint64_t seed, uint64_t stream_id, uint64_t salt);

/// FNV-1a 64-bit, used to turn role names into stream ids and to hash files.
uint64_t fnv1a64(const void* bytes, size_t len, uint64_t basis = 0xcbf29ce484222325ull);
uint64_t fnv1a64(const std::string& s);
uint64_t mix64(uint64_t a, uint64_t b);

/// Draw from N(mean, diag(diag_cov)). Nonpositive variance entries are a hard error.
Vec gaussian_sample(RngStream& rng, const Vec& mean, const Vec& diag_cov);

/// Standard normal vector of dimension d.
Vec standard_normal(RngStream& rng, int d);

struct EigResult {
    Vec values;   // descending
    Mat vectors;  // column j is the eigenvector for values[j]
};

/// Full spectral decomposition of a symmetric matrix (cyclic Jacobi,
/// <= 100 sweeps, off-diagonal mass threshold 1e-12 relative).
/// Asymmetric input (beyond 1e-10) is a hard error. Intended for d <= 64.
EigResult symmetric_eig(const Mat& m);

struct Pca2 {
    Mat components;  // 2 x d, rows orthonormal, first nonzero coordinate positive
    Vec variances;   // top-2 eigenvalues of the sample covariance, descending
};

/// Top-2 principal components of the centered sample covariance (1/(n-1)).
/// Requires >= 3 points and d >= 2; all-identical points are an error.
Pca2 pca_top2(const std::vector<Vec>& points);

}  // namespace dve
