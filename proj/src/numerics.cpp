#include "dve/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dve {

bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) {
    return std::sqrt(dot(a, a));
}

void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vec operator+(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec+: dimension mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

Vec operator-(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec-: dimension mismatch");
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

Vec operator*(double alpha, const Vec& a) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = alpha * a[i];
    return r;
}

Mat Mat::identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Vec Mat::matvec(const Vec& x) const {
    if (static_cast<int>(x.size()) != cols) throw std::invalid_argument("matvec: dimension mismatch");
    Vec y(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < cols; ++j) s += at(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

Mat Mat::transpose() const {
    Mat t(cols, rows);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) t.at(j, i) = at(i, j);
    return t;
}

double Mat::frob() const {
    double s = 0.0;
    for (double x : data) s += x * x;
    return std::sqrt(s);
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    Mat c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i)
        for (int k = 0; k < a.cols; ++k) {
            double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

static uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

RngStream::RngStream(uint64_t seed, uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(splitmix64(seed) ^ stream_id)) {}

double RngStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t RngStream::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
    return static_cast<uint64_t>(uniform01() * static_cast<double>(n)) % n;
}

RngStream derive_stream(const RngStream& base, uint64_t salt) {
    return derive_stream(base.seed(), base.stream_id(), salt);
}

RngStream derive_stream(uint64_t seed, uint64_t stream_id, uint64_t salt) {
    return RngStream(seed, mix64(stream_id, salt));
}

uint64_t fnv1a64(const void* bytes, size_t len, uint64_t basis) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    uint64_t h = basis;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t fnv1a64(const std::string& s) {
    return fnv1a64(s.data(), s.size());
}

uint64_t mix64(uint64_t a, uint64_t b) {
    return splitmix64(splitmix64(a) ^ (b + 0x9e3779b97f4a7c15ull));
}

Vec gaussian_sample(RngStream& rng, const Vec& mean, const Vec& diag_cov) {
    if (mean.size() != diag_cov.size())
        throw std::invalid_argument("gaussian_sample: mean/cov dimension mismatch");
    Vec x(mean.size());
    for (size_t i = 0; i < mean.size(); ++i) {
        if (!(diag_cov[i] > 0.0))
            throw std::invalid_argument("gaussian_sample: nonpositive variance at index " +
                                        std::to_string(i));
        x[i] = mean[i] + std::sqrt(diag_cov[i]) * rng.normal();
    }
    return x;
}

Vec standard_normal(RngStream& rng, int d) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = rng.normal();
    return x;
}

static void check_symmetric(const Mat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("symmetric_eig: matrix not square");
    double scale = 0.0;
    for (double x : m.data) scale = std::max(scale, std::abs(x));
    double tol = 1e-10 * std::max(1.0, scale);
    for (int i = 0; i < m.rows; ++i)
        for (int j = i + 1; j < m.cols; ++j)
            if (std::abs(m.at(i, j) - m.at(j, i)) > tol)
                throw std::invalid_argument("symmetric_eig: input not symmetric");
}

static double offdiag_mass(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j)
            if (i != j) s += a.at(i, j) * a.at(i, j);
    return std::sqrt(s);
}

EigResult symmetric_eig(const Mat& m) {
    check_symmetric(m);
    const int n = m.rows;
    Mat a = m;
    Mat v = Mat::identity(n);
    const double stop = 1e-12 * std::max(1.0, m.frob());

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (offdiag_mass(a) <= stop) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (int k = 0; k < n; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a.at(i, i) > a.at(j, j); });

    EigResult r;
    r.values.resize(n);
    r.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        r.values[j] = a.at(order[j], order[j]);
        for (int i = 0; i < n; ++i) r.vectors.at(i, j) = v.at(i, order[j]);
    }
    return r;
}

Pca2 pca_top2(const std::vector<Vec>& points) {
    if (points.size() < 3) throw std::invalid_argument("pca_top2: need at least 3 points");
    const int d = static_cast<int>(points[0].size());
    if (d < 2) throw std::invalid_argument("pca_top2: need dimension >= 2");
    const double n = static_cast<double>(points.size());

    Vec mean(d, 0.0);
    for (const Vec& p : points) {
        if (static_cast<int>(p.size()) != d)
            throw std::invalid_argument("pca_top2: inconsistent point dimensions");
        axpy(1.0, p, mean);
    }
    for (double& m : mean) m /= n;

    Mat cov(d, d);
    for (const Vec& p : points) {
        Vec c = p - mean;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) cov.at(i, j) += c[i] * c[j];
    }
    for (double& x : cov.data) x /= (n - 1.0);

    double mean_sq = dot(mean, mean);
    if (cov.frob() <= 1e-20 * std::max(1.0, mean_sq))
        throw std::invalid_argument("pca_top2: degenerate input (all points identical)");

    EigResult eig = symmetric_eig(cov);

    Pca2 out;
    out.components = Mat(2, d);
    out.variances = {eig.values[0], eig.values[1]};
    for (int r = 0; r < 2; ++r) {
        // Sign convention: first coordinate with magnitude above 1e-12 is positive.
        double flip = 1.0;
        for (int i = 0; i < d; ++i) {
            double x = eig.vectors.at(i, r);
            if (std::abs(x) > 1e-12) {
                flip = (x < 0) ? -1.0 : 1.0;
                break;
            }
        }
        for (int i = 0; i < d; ++i) out.components.at(r, i) = flip * eig.vectors.at(i, r);
    }
    return out;
}

}  // namespace dve
