#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "helmetid/matrix.hpp"
#include "helmetid/types.hpp"

namespace helmetid {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    double norm() const { return std::hypot(x, y); }
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

// p -> scale * R(rotation) * p + translation
struct SimilarityTransform {
    double scale = 1.0;      // > 0
    double rotation = 0.0;   // radians
    Point2 translation{};

    Point2 apply(Point2 p) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {scale * (c * p.x - s * p.y) + translation.x,
                scale * (s * p.x + c * p.y) + translation.y};
    }

    SimilarityTransform inverse() const {
        SimilarityTransform inv;
        inv.scale = 1.0 / scale;
        inv.rotation = -rotation;
        inv.translation = -1.0 * inv.apply_linear(translation);
        return inv;
    }

    // this ∘ other: applies `other` first.
    SimilarityTransform compose(const SimilarityTransform& other) const {
        SimilarityTransform out;
        out.scale = scale * other.scale;
        out.rotation = rotation + other.rotation;
        out.translation = apply(other.translation);
        return out;
    }

private:
    Point2 apply_linear(Point2 p) const {
        const double c = std::cos(rotation), s = std::sin(rotation);
        return {scale * (c * p.x - s * p.y), scale * (s * p.x + c * p.y)};
    }
};

struct SimilarityFit {
    SimilarityTransform transform;
    double rms_residual = 0.0;
};

// Closed-form least-squares similarity: minimizes sum ||T(src_i) - dst_i||^2
// over scale, rotation and translation. Points correspond by index.
inline SimilarityFit fit_similarity(std::span<const Point2> src, std::span<const Point2> dst) {
    const std::size_t n = src.size();
    if (n < 2 || dst.size() != n)
        throw std::invalid_argument("fit_similarity: need >= 2 corresponding point pairs");

    Point2 mu_s{0, 0}, mu_d{0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        mu_s = mu_s + src[i];
        mu_d = mu_d + dst[i];
    }
    mu_s = (1.0 / n) * mu_s;
    mu_d = (1.0 / n) * mu_d;

    double sxx = 0.0, a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 s = src[i] - mu_s;
        const Point2 d = dst[i] - mu_d;
        sxx += s.x * s.x + s.y * s.y;
        a += s.x * d.x + s.y * d.y;
        b += s.x * d.y - s.y * d.x;
    }
    if (sxx <= 1e-30)
        throw std::domain_error("fit_similarity: source points are coincident (rank-deficient)");

    SimilarityTransform t;
    t.rotation = std::atan2(b, a);
    t.scale = std::hypot(a, b) / sxx;
    if (!(t.scale > 0.0))
        throw std::domain_error("fit_similarity: destination points are coincident (zero scale)");
    const double c = std::cos(t.rotation), s = std::sin(t.rotation);
    t.translation = {mu_d.x - t.scale * (c * mu_s.x - s * mu_s.y),
                     mu_d.y - t.scale * (s * mu_s.x + c * mu_s.y)};

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 r = t.apply(src[i]) - dst[i];
        sq += r.x * r.x + r.y * r.y;
    }
    return {t, std::sqrt(sq / n)};
}

struct IcpResult {
    SimilarityTransform transform;
    double residual = 0.0;             // RMS point-to-correspondent distance
    std::vector<int> correspondences;  // per source index -> target index
    int iterations = 0;
    bool degenerate = false;           // fit failed; best-so-far returned
};

namespace detail {

// Each source point matches its nearest target under T (ties -> lowest index).
inline double icp_correspond(std::span<const Point2> source, std::span<const Point2> target,
                             const SimilarityTransform& t, std::vector<int>& corr) {
    corr.resize(source.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < source.size(); ++i) {
        const Point2 p = t.apply(source[i]);
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < target.size(); ++j) {
            const double d = (p - target[j]).norm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(j);
            }
        }
        corr[i] = best;
        sq += best_d * best_d;
    }
    return std::sqrt(sq / source.size());
}

}  // namespace detail

// Classic point-to-point ICP between two 2D clouds: alternate nearest-neighbor
// correspondence (source -> target; detections are a subset of players, so
// every source point gets a partner) with the closed-form similarity fit.
// The residual sequence is non-increasing; iteration stops when the
// improvement drops below tol or max_iters is reached.
inline IcpResult icp_register(std::span<const Point2> source, std::span<const Point2> target,
                              const SimilarityTransform& init = {}, int max_iters = 50,
                              double tol = 1e-6) {
    if (source.size() < 2 || target.size() < 2)
        throw std::invalid_argument("icp_register: need >= 2 points in source and target");
    if (max_iters < 1 || !(tol > 0.0))
        throw std::invalid_argument("icp_register: max_iters >= 1 and tol > 0 required");

    IcpResult out;
    out.transform = init;
    out.residual = detail::icp_correspond(source, target, out.transform, out.correspondences);

    std::vector<Point2> matched(source.size());
    for (int iter = 1; iter <= max_iters; ++iter) {
        out.iterations = iter;
        for (std::size_t i = 0; i < source.size(); ++i)
            matched[i] = target[out.correspondences[i]];

        SimilarityTransform refined;
        try {
            refined = fit_similarity(source, matched).transform;
        } catch (const std::domain_error&) {
            out.degenerate = true;
            return out;
        }

        std::vector<int> corr;
        const double residual = detail::icp_correspond(source, target, refined, corr);
        const double improvement = out.residual - residual;
        if (residual <= out.residual) {
            out.transform = refined;
            out.residual = residual;
            out.correspondences = std::move(corr);
        }
        if (improvement < tol) break;
    }
    return out;
}

// Log-polar histogram of neighbor positions relative to one reference point.
struct ShapeContext {
    int n_radial = 0;
    int n_angular = 0;
    std::vector<double> histogram;  // radial-major: [r * n_angular + a]

    double total() const {
        double s = 0.0;
        for (double v : histogram) s += v;
        return s;
    }
};

// Radial bins are geometric between r_min and r_max (closer neighbors clamp
// to the inner bin, farther to the outer); angular bins are uniform on [0, 2pi).
inline ShapeContext shape_context(std::span<const Point2> points, std::size_t index,
                                  int n_radial, int n_angular, double r_min, double r_max) {
    if (points.size() < 2)
        throw std::invalid_argument("shape_context: need >= 2 points");
    if (index >= points.size())
        throw std::invalid_argument("shape_context: reference index out of range");
    if (n_radial < 1 || n_angular < 1 || !(r_min > 0.0) || !(r_max > r_min))
        throw std::invalid_argument("shape_context: invalid bin parameters");

    ShapeContext sc;
    sc.n_radial = n_radial;
    sc.n_angular = n_angular;
    sc.histogram.assign(static_cast<std::size_t>(n_radial) * n_angular, 0.0);

    const Point2 ref = points[index];
    const double log_span = std::log(r_max / r_min);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (j == index) continue;
        const Point2 d = points[j] - ref;
        const double r = d.norm();
        int rbin = 0;
        if (r > r_min)
            rbin = std::clamp(static_cast<int>(std::floor(n_radial * std::log(r / r_min) / log_span)),
                              0, n_radial - 1);
        double theta = std::atan2(d.y, d.x);
        if (theta < 0.0) theta += two_pi;
        const int abin = std::clamp(static_cast<int>(std::floor(theta / two_pi * n_angular)),
                                    0, n_angular - 1);
        sc.histogram[static_cast<std::size_t>(rbin) * n_angular + abin] += 1.0;
    }
    return sc;
}

// Entry (i, j) = 1 - cosine_similarity(a_i, b_j); all entries in [0, 2].
inline Mat cosine_cost_matrix(std::span<const ShapeContext> a, std::span<const ShapeContext> b) {
    auto norm_of = [](const ShapeContext& sc, const char* side, std::size_t idx) {
        double sq = 0.0;
        for (double v : sc.histogram) sq += v * v;
        if (sq <= 0.0)
            throw std::domain_error("cosine_cost_matrix: zero-norm descriptor at " + std::string(side)
                                    + "[" + std::to_string(idx) + "]");
        return std::sqrt(sq);
    };

    if (!a.empty() && !b.empty()) {
        const int nr = a[0].n_radial, na = a[0].n_angular;
        for (const auto& sc : a)
            if (sc.n_radial != nr || sc.n_angular != na)
                throw std::invalid_argument("cosine_cost_matrix: descriptors disagree on bin layout");
        for (const auto& sc : b)
            if (sc.n_radial != nr || sc.n_angular != na)
                throw std::invalid_argument("cosine_cost_matrix: descriptors disagree on bin layout");
    }

    Mat cost(static_cast<int>(a.size()), static_cast<int>(b.size()));
    std::vector<double> nb(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) nb[j] = norm_of(b[j], "b", j);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double na = norm_of(a[i], "a", i);
        for (std::size_t j = 0; j < b.size(); ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < a[i].histogram.size(); ++k)
                dot += a[i].histogram[k] * b[j].histogram[k];
            cost.at(static_cast<int>(i), static_cast<int>(j)) =
                std::clamp(1.0 - dot / (na * nb[j]), 0.0, 2.0);
        }
    }
    return cost;
}

// 3x3 projective map, Frobenius-normalized with h(2,2) >= 0 when nonzero.
struct Homography {
    Eigen::Matrix3d h = Eigen::Matrix3d::Identity();

    void normalize() {
        const double f = h.norm();
        if (!(f > 0.0)) throw std::domain_error("Homography: zero matrix");
        h /= f;
        double pivot = h(2, 2);
        if (std::abs(pivot) < 1e-12) {
            pivot = 0.0;
            for (int r = 0; r < 3 && pivot == 0.0; ++r)
                for (int c = 0; c < 3 && pivot == 0.0; ++c)
                    if (std::abs(h(r, c)) >= 1e-12) pivot = h(r, c);
        }
        if (pivot < 0.0) h = -h;
    }

    static Homography from_similarity(const SimilarityTransform& t) {
        const double c = std::cos(t.rotation), s = std::sin(t.rotation);
        Homography out;
        out.h << t.scale * c, -t.scale * s, t.translation.x,
                 t.scale * s,  t.scale * c, t.translation.y,
                 0.0,          0.0,         1.0;
        out.normalize();
        return out;
    }
};

inline Point2 apply_homography(const Homography& hg, Point2 p) {
    const Eigen::Vector3d v = hg.h * Eigen::Vector3d(p.x, p.y, 1.0);
    if (std::abs(v.z()) < 1e-12)
        throw std::domain_error("apply_homography: point maps to infinity (w ~ 0)");
    return {v.x() / v.z(), v.y() / v.z()};
}

namespace detail {

struct HartleyNorm {
    Eigen::Matrix3d t;              // conditioning transform
    std::vector<Point2> points;     // transformed points
};

// Translate centroid to the origin and scale the mean distance to sqrt(2).
inline HartleyNorm hartley_normalize(std::span<const Point2> pts) {
    Point2 mu{0, 0};
    for (const Point2& p : pts) mu = mu + p;
    mu = (1.0 / pts.size()) * mu;
    double mean_dist = 0.0;
    for (const Point2& p : pts) mean_dist += (p - mu).norm();
    mean_dist /= pts.size();
    if (mean_dist <= 1e-12)
        throw std::domain_error("estimate_homography: coincident points (rank-deficient)");
    const double s = std::numbers::sqrt2 / mean_dist;

    HartleyNorm out;
    out.t << s, 0, -s * mu.x,
             0, s, -s * mu.y,
             0, 0, 1;
    out.points.reserve(pts.size());
    for (const Point2& p : pts) out.points.push_back({s * (p.x - mu.x), s * (p.y - mu.y)});
    return out;
}

}  // namespace detail

// Direct linear transform with Hartley conditioning; exact (reprojection
// error ~ machine epsilon) on noiseless correspondences.
inline Homography estimate_homography(std::span<const Point2> src, std::span<const Point2> dst) {
    const std::size_t n = src.size();
    if (n < 4 || dst.size() != n)
        throw std::invalid_argument("estimate_homography: need >= 4 corresponding point pairs");

    const auto ns = detail::hartley_normalize(src);
    const auto nd = detail::hartley_normalize(dst);

    Eigen::MatrixXd a(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = ns.points[i];
        const auto& q = nd.points[i];
        a.row(2 * i)     << -p.x, -p.y, -1, 0, 0, 0, q.x * p.x, q.x * p.y, q.x;
        a.row(2 * i + 1) << 0, 0, 0, -p.x, -p.y, -1, q.y * p.x, q.y * p.y, q.y;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // With 8 well-posed constraints the 8th singular value is well separated
    // from zero; collinear/duplicate configurations collapse it.
    if (sv(7) <= 1e-10 * sv(0))
        throw std::domain_error("estimate_homography: degenerate point configuration (rank < 8)");

    const Eigen::VectorXd hvec = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << hvec(0), hvec(1), hvec(2),
          hvec(3), hvec(4), hvec(5),
          hvec(6), hvec(7), hvec(8);

    Homography out;
    out.h = nd.t.inverse() * hn * ns.t;
    if (std::abs(out.h.determinant()) < 1e-15)
        throw std::domain_error("estimate_homography: singular result");
    out.normalize();
    return out;
}

// Intersection area over union area; 0 for disjoint boxes, 1 for identical.
inline double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double ix = std::max(0.0, std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left));
    const double iy = std::max(0.0, std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace helmetid
