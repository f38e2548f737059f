#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "helmetid/geometry.hpp"
#include "helmetid/matrix.hpp"
#include "helmetid/types.hpp"

namespace helmetid {

using CostMatrix = Mat;

struct AssignmentResult {
    std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
    double total_cost = 0.0;
    std::vector<int> unassigned_rows;
    std::vector<int> unassigned_cols;
};

namespace detail {

struct SquareSolution {
    std::vector<int> col_of_row;
    std::vector<double> u, v;  // optimal duals: u[r] + v[c] <= a(r,c), tight on matches
    double cost = 0.0;
};

// Shortest-augmenting-path Hungarian on a square matrix.
inline SquareSolution hungarian_square(const Mat& a) {
    const int n = a.rows;
    SquareSolution sol;
    sol.col_of_row.assign(n, -1);
    sol.u.assign(n + 1, 0.0);
    sol.v.assign(n + 1, 0.0);
    if (n == 0) return sol;

    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<int> match(n + 1, 0);  // match[col 1..n] = row (1-based), 0 = free
    std::vector<int> way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a.at(i0 - 1, j - 1) - sol.u[i0] - sol.v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    sol.u[match[j]] += delta;
                    sol.v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    for (int j = 1; j <= n; ++j)
        if (match[j] > 0) sol.col_of_row[match[j] - 1] = j - 1;
    for (int r = 0; r < n; ++r) sol.cost += a.at(r, sol.col_of_row[r]);
    // Re-index duals to 0-based.
    sol.u.erase(sol.u.begin());
    sol.v.erase(sol.v.begin());
    return sol;
}

// Pads an R x C matrix to square with zero rows or columns. Zero padding
// leaves the optimal matching cost over the real entries unchanged.
inline Mat pad_square(const Mat& c) {
    const int n = std::max(c.rows, c.cols);
    Mat p(n, n, 0.0);
    for (int r = 0; r < c.rows; ++r)
        for (int j = 0; j < c.cols; ++j)
            p.at(r, j) = c.at(r, j);
    return p;
}

inline double optimal_cost(const Mat& c) {
    if (c.rows == 0 || c.cols == 0) return 0.0;
    return hungarian_square(pad_square(c)).cost;
}

// Optimal cost of the square problem restricted to non-excluded rows/cols.
inline double sub_cost(const Mat& sq, const std::vector<char>& row_gone,
                       const std::vector<char>& col_gone, int n_gone) {
    const int m = sq.rows - n_gone;
    if (m == 0) return 0.0;
    Mat sub(m, m);
    int rr = 0;
    for (int r = 0; r < sq.rows; ++r) {
        if (row_gone[r]) continue;
        int cc = 0;
        for (int c = 0; c < sq.cols; ++c) {
            if (col_gone[c]) continue;
            sub.at(rr, cc++) = sq.at(r, c);
        }
        ++rr;
    }
    return hungarian_square(sub).cost;
}

}  // namespace detail

// Optimal (not heuristic) minimum-cost maximum matching. Among equal-cost
// optima the pairing that is lexicographically smallest as a sorted (row, col)
// list is returned, so results are reproducible across runs and platforms.
inline AssignmentResult solve_assignment(const CostMatrix& c) {
    if (!c.all_finite())
        throw std::invalid_argument("solve_assignment: cost entries must be finite");

    AssignmentResult out;
    if (c.rows == 0 || c.cols == 0) {
        out.unassigned_rows.resize(c.rows);
        std::iota(out.unassigned_rows.begin(), out.unassigned_rows.end(), 0);
        out.unassigned_cols.resize(c.cols);
        std::iota(out.unassigned_cols.begin(), out.unassigned_cols.end(), 0);
        return out;
    }

    const Mat sq = detail::pad_square(c);
    const int n = sq.rows;
    auto sol = detail::hungarian_square(sq);

    double scale = 0.0;
    for (double v : c.data) scale = std::max(scale, std::abs(v));
    const double tol = 1e-9 * (1.0 + scale);

    // Canonicalize: for each real row in order, swap its column for the
    // smallest alternative that some optimal solution uses. Candidates must
    // be tight edges (complementary slackness); each is verified by solving
    // the reduced problem and comparing against the optimal total.
    std::vector<char> row_fixed(n, 0), col_fixed(n, 0);
    std::vector<int> working = sol.col_of_row;
    double fixed_cost = 0.0;
    int n_fixed = 0;
    for (int r = 0; r < c.rows; ++r) {
        const int current = working[r];
        int chosen = current;
        for (int cand = 0; cand < current; ++cand) {
            if (col_fixed[cand]) continue;
            if (sq.at(r, cand) - sol.u[r] - sol.v[cand] > tol) continue;  // not tight
            row_fixed[r] = 1;
            col_fixed[cand] = 1;
            const double rest = detail::sub_cost(sq, row_fixed, col_fixed, n_fixed + 1);
            row_fixed[r] = 0;
            col_fixed[cand] = 0;
            if (fixed_cost + sq.at(r, cand) + rest <= sol.cost + tol) {
                chosen = cand;
                break;
            }
        }
        row_fixed[r] = 1;
        col_fixed[chosen] = 1;
        ++n_fixed;
        fixed_cost += sq.at(r, chosen);
        if (chosen != current) {
            // Re-derive the working matching for the remaining rows.
            const int m = n - n_fixed;
            std::vector<int> rows_left, cols_left;
            rows_left.reserve(m);
            cols_left.reserve(m);
            for (int i = 0; i < n; ++i) {
                if (!row_fixed[i]) rows_left.push_back(i);
                if (!col_fixed[i]) cols_left.push_back(i);
            }
            Mat sub(m, m);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    sub.at(i, j) = sq.at(rows_left[i], cols_left[j]);
            auto subsol = detail::hungarian_square(sub);
            for (int i = 0; i < m; ++i) working[rows_left[i]] = cols_left[subsol.col_of_row[i]];
        }
        working[r] = chosen;
    }

    std::vector<char> col_used(c.cols, 0);
    for (int r = 0; r < c.rows; ++r) {
        const int col = working[r];
        if (col < c.cols) {  // a real column; dummy columns mean "row unmatched"
            out.pairs.emplace_back(r, col);
            out.total_cost += c.at(r, col);
            col_used[col] = 1;
        } else {
            out.unassigned_rows.push_back(r);
        }
    }
    for (int j = 0; j < c.cols; ++j)
        if (!col_used[j]) out.unassigned_cols.push_back(j);
    return out;
}

enum class DummyAxis { Rows, Cols };

// Augments the matrix with all-zero rows (or columns) so that n_ignore
// detections can be matched to a dummy at zero cost instead of being forced
// onto a real player. Original entries are untouched.
inline CostMatrix ignore_false_positives(const CostMatrix& c, int n_ignore,
                                         DummyAxis axis = DummyAxis::Rows) {
    if (n_ignore < 0)
        throw std::invalid_argument("ignore_false_positives: n_ignore must be >= 0");
    const int limit = axis == DummyAxis::Rows ? c.cols : c.rows;
    if (n_ignore > limit)
        throw std::invalid_argument("ignore_false_positives: n_ignore exceeds the absorbable count ("
                                    + std::to_string(limit) + ")");
    if (n_ignore == 0) return c;
    if (axis == DummyAxis::Rows) {
        Mat out(c.rows + n_ignore, c.cols, 0.0);
        for (int r = 0; r < c.rows; ++r)
            for (int j = 0; j < c.cols; ++j)
                out.at(r, j) = c.at(r, j);
        return out;
    }
    Mat out(c.rows, c.cols + n_ignore, 0.0);
    for (int r = 0; r < c.rows; ++r)
        for (int j = 0; j < c.cols; ++j)
            out.at(r, j) = c.at(r, j);
    return out;
}

struct AdaptiveIgnoreResult {
    AssignmentResult assignment;  // dummy pairs stripped; indices refer to the input matrix
    int n_ignore = 0;
    std::vector<double> cost_history;  // optimal cost at each tried n_ignore
};

// Raises the dummy count while each extra dummy lowers the optimal cost by at
// least improvement_threshold, and stops at the first rejected increment.
inline AdaptiveIgnoreResult adaptive_ignore(const CostMatrix& c, double improvement_threshold = 10.0,
                                            DummyAxis axis = DummyAxis::Rows) {
    if (!(improvement_threshold > 0.0))
        throw std::invalid_argument("adaptive_ignore: improvement_threshold must be > 0");
    if (!c.all_finite())
        throw std::invalid_argument("adaptive_ignore: cost entries must be finite");

    const int limit = axis == DummyAxis::Rows ? c.cols : c.rows;
    AdaptiveIgnoreResult out;
    double cost = detail::optimal_cost(c);
    out.cost_history.push_back(cost);
    int n = 0;
    while (n < limit) {
        const double next = detail::optimal_cost(ignore_false_positives(c, n + 1, axis));
        if (next <= cost - improvement_threshold) {
            cost = next;
            out.cost_history.push_back(cost);
            ++n;
        } else {
            break;
        }
    }
    out.n_ignore = n;

    AssignmentResult full = solve_assignment(ignore_false_positives(c, n, axis));
    // Strip dummy pairs back to the original matrix's indexing.
    AssignmentResult& res = out.assignment;
    std::vector<char> row_used(c.rows, 0), col_used(c.cols, 0);
    for (const auto& [r, j] : full.pairs) {
        if (r < c.rows && j < c.cols) {
            res.pairs.emplace_back(r, j);
            res.total_cost += c.at(r, j);
            row_used[r] = 1;
            col_used[j] = 1;
        }
    }
    for (int r = 0; r < c.rows; ++r)
        if (!row_used[r]) res.unassigned_rows.push_back(r);
    for (int j = 0; j < c.cols; ++j)
        if (!col_used[j]) res.unassigned_cols.push_back(j);
    return out;
}

namespace detail {

inline void prune_candidates(const std::vector<Point2>& pts, std::vector<char>& removed,
                             int to_remove, std::vector<std::vector<int>>& out,
                             std::set<std::vector<int>>& seen) {
    if (to_remove == 0) {
        std::vector<int> kept;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (!removed[i]) kept.push_back(static_cast<int>(i));
        if (seen.insert(kept).second) out.push_back(std::move(kept));
        return;
    }
    // The four directional extremes among the remaining points.
    int min_x = -1, max_x = -1, min_y = -1, max_y = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (removed[i]) continue;
        const int ii = static_cast<int>(i);
        if (min_x < 0 || pts[i].x < pts[min_x].x) min_x = ii;
        if (max_x < 0 || pts[i].x > pts[max_x].x) max_x = ii;
        if (min_y < 0 || pts[i].y < pts[min_y].y) min_y = ii;
        if (max_y < 0 || pts[i].y > pts[max_y].y) max_y = ii;
    }
    std::vector<int> choices{min_x, max_x, min_y, max_y};
    std::vector<int> uniq;
    for (int ch : choices)
        if (std::find(uniq.begin(), uniq.end(), ch) == uniq.end()) uniq.push_back(ch);
    for (int ch : uniq) {
        removed[ch] = 1;
        prune_candidates(pts, removed, to_remove - 1, out, seen);
        removed[ch] = 0;
    }
}

}  // namespace detail

// Crops the tracking roster down to n_keep players by peeling players off the
// four directional extremes, and keeps the crop whose points register best
// against the detected cloud (lowest total assignment distance after a
// similarity ICP registration).
inline std::vector<std::pair<PlayerLabel, Point2>> prune_to_player_count(
    std::span<const std::pair<PlayerLabel, Point2>> track_points, int n_keep,
    std::span<const Point2> det_points) {
    const int n = static_cast<int>(track_points.size());
    if (n_keep < 1 || n_keep > n)
        throw std::invalid_argument("prune_to_player_count: need 1 <= n_keep <= |track_points|");
    if (n_keep == n)
        return {track_points.begin(), track_points.end()};

    std::vector<Point2> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = track_points[i].second;

    std::vector<std::vector<int>> candidates;
    std::set<std::vector<int>> seen;
    std::vector<char> removed(n, 0);
    detail::prune_candidates(pts, removed, n - n_keep, candidates, seen);

    // Detection-space registration cost of one candidate crop.
    Point2 det_mu{0, 0};
    for (const Point2& p : det_points) det_mu = det_mu + p;
    det_mu = (1.0 / std::max<std::size_t>(det_points.size(), 1)) * det_mu;
    double det_var = 0.0;
    for (const Point2& p : det_points) {
        const Point2 d = p - det_mu;
        det_var += d.x * d.x + d.y * d.y;
    }
    const double det_sigma = std::sqrt(det_var / std::max<std::size_t>(det_points.size(), 1));

    auto crop_cost = [&](const std::vector<int>& kept) -> double {
        if (kept.size() < 2 || det_points.size() < 2 || det_sigma <= 0.0)
            return std::numeric_limits<double>::infinity();
        Point2 mu{0, 0};
        for (int i : kept) mu = mu + pts[i];
        mu = (1.0 / kept.size()) * mu;
        double var = 0.0;
        for (int i : kept) {
            const Point2 d = pts[i] - mu;
            var += d.x * d.x + d.y * d.y;
        }
        const double sigma = std::sqrt(var / kept.size());
        if (sigma <= 0.0) return std::numeric_limits<double>::infinity();

        std::vector<Point2> cand_n(kept.size()), det_n(det_points.size());
        for (std::size_t i = 0; i < kept.size(); ++i)
            cand_n[i] = {(pts[kept[i]].x - mu.x) / sigma, (pts[kept[i]].y - mu.y) / sigma};
        for (std::size_t j = 0; j < det_points.size(); ++j)
            det_n[j] = {(det_points[j].x - det_mu.x) / det_sigma, (det_points[j].y - det_mu.y) / det_sigma};

        const IcpResult icp = icp_register(det_n, cand_n);
        if (icp.degenerate) return std::numeric_limits<double>::infinity();

        // Pixel-scale distances keep crops of different spatial extent comparable.
        const double px_scale = det_sigma / icp.transform.scale;
        Mat d(static_cast<int>(kept.size()), static_cast<int>(det_n.size()));
        for (std::size_t i = 0; i < kept.size(); ++i)
            for (std::size_t j = 0; j < det_n.size(); ++j)
                d.at(static_cast<int>(i), static_cast<int>(j)) =
                    px_scale * (cand_n[i] - icp.transform.apply(det_n[j])).norm();
        return detail::optimal_cost(d);
    };

    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const double cost = crop_cost(candidates[k]);
        if (cost < best_cost) {
            best_cost = cost;
            best = k;
        }
    }

    std::vector<std::pair<PlayerLabel, Point2>> out;
    out.reserve(n_keep);
    for (int i : candidates[best]) out.push_back(track_points[i]);
    return out;
}

}  // namespace helmetid
