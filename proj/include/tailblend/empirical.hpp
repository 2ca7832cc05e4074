#pragma once

// Rank machinery: pseudo-observations, the empirical copula and its
// survival-region counts, TDC trajectories and the five nonparametric tail
// dependence estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "tailblend/errors.hpp"

namespace tailblend {

enum class Tail { lower, upper };

// Ranked bivariate sample mapped to the unit square. Ranks are average
// ranks (so ties may repeat and ranks may be half-integers); pseudo values
// use the /(N+1) convention and stay strictly inside (0,1).
struct PseudoSample {
    std::size_t n = 0;
    std::vector<double> rank1, rank2;
    std::vector<double> u, v;

    // sorted per-point max(rank1,rank2) and min(rank1,rank2); these turn
    // diagonal and survival counts of the empirical copula into binary
    // searches
    std::vector<double> max_rank_sorted, min_rank_sorted;

    void build_caches() {
        max_rank_sorted.resize(n);
        min_rank_sorted.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            max_rank_sorted[i] = std::max(rank1[i], rank2[i]);
            min_rank_sorted[i] = std::min(rank1[i], rank2[i]);
        }
        std::sort(max_rank_sorted.begin(), max_rank_sorted.end());
        std::sort(min_rank_sorted.begin(), min_rank_sorted.end());
    }
};

namespace empirical_detail {

inline std::vector<double> average_ranks(const std::vector<double>& x) {
    std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0; // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

} // namespace empirical_detail

inline PseudoSample pseudo_observations(const std::vector<double>& y1,
                                        const std::vector<double>& y2) {
    if (y1.size() != y2.size()) throw std::invalid_argument("pseudo_observations: length mismatch");
    if (y1.size() < 2) throw DataError("pseudo_observations: need at least 2 observations");
    PseudoSample ps;
    ps.n = y1.size();
    ps.rank1 = empirical_detail::average_ranks(y1);
    ps.rank2 = empirical_detail::average_ranks(y2);
    ps.u.resize(ps.n);
    ps.v.resize(ps.n);
    double denom = static_cast<double>(ps.n) + 1.0;
    for (std::size_t i = 0; i < ps.n; ++i) {
        ps.u[i] = ps.rank1[i] / denom;
        ps.v[i] = ps.rank2[i] / denom;
    }
    ps.build_caches();
    return ps;
}

inline PseudoSample pseudo_observations(const std::vector<std::pair<double, double>>& pts) {
    std::vector<double> a(pts.size()), b(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a[i] = pts[i].first;
        b[i] = pts[i].second;
    }
    return pseudo_observations(a, b);
}

// 180-degree rotation in rank space: ranks map to N+1-R, which flips both
// tails; used to derive every lower-tail estimate from its upper-tail form.
inline PseudoSample rotate180(const PseudoSample& ps) {
    PseudoSample out;
    out.n = ps.n;
    double np1 = static_cast<double>(ps.n) + 1.0;
    out.rank1.resize(ps.n);
    out.rank2.resize(ps.n);
    out.u.resize(ps.n);
    out.v.resize(ps.n);
    for (std::size_t i = 0; i < ps.n; ++i) {
        out.rank1[i] = np1 - ps.rank1[i];
        out.rank2[i] = np1 - ps.rank2[i];
        out.u[i] = out.rank1[i] / np1;
        out.v[i] = out.rank2[i] / np1;
    }
    out.build_caches();
    return out;
}

// Empirical copula of Eq.-(3) form: counts use ranks over N (not N+1).
inline double empirical_copula(const PseudoSample& ps, double u, double v) {
    double n = static_cast<double>(ps.n);
    double t1 = u * n, t2 = v * n;
    std::size_t count = 0;
    for (std::size_t i = 0; i < ps.n; ++i)
        if (ps.rank1[i] <= t1 && ps.rank2[i] <= t2) ++count;
    return static_cast<double>(count) / n;
}

// diagonal value C((t/N, t/N)) for a real threshold t in rank units
inline double empirical_copula_diag(const PseudoSample& ps, double t) {
    auto it = std::upper_bound(ps.max_rank_sorted.begin(), ps.max_rank_sorted.end(), t);
    return static_cast<double>(it - ps.max_rank_sorted.begin()) / static_cast<double>(ps.n);
}

// survival-region mass C((a,1] x (a,1]) with a = t/N in rank units: the
// fraction of points with both ranks strictly above t
inline double empirical_survival_diag(const PseudoSample& ps, double t) {
    auto it = std::upper_bound(ps.min_rank_sorted.begin(), ps.min_rank_sorted.end(), t);
    return static_cast<double>(ps.n - (it - ps.min_rank_sorted.begin())) /
           static_cast<double>(ps.n);
}

struct TdcTrajectory {
    std::vector<double> grid;   // i/N for i = 1..N-1
    std::vector<double> lower;  // C(i/N,i/N)/(i/N)
    std::vector<double> upper;  // (1-2i/N+C(i/N,i/N))/(1-i/N)
};

inline TdcTrajectory tdc_trajectory(const PseudoSample& ps) {
    if (ps.n < 3) throw DataError("tdc_trajectory: need at least 3 observations");
    double n = static_cast<double>(ps.n);
    TdcTrajectory t;
    t.grid.resize(ps.n - 1);
    t.lower.resize(ps.n - 1);
    t.upper.resize(ps.n - 1);
    for (std::size_t i = 1; i < ps.n; ++i) {
        double q = static_cast<double>(i) / n;
        double c = empirical_copula_diag(ps, static_cast<double>(i));
        t.grid[i - 1] = q;
        t.lower[i - 1] = c / q;
        t.upper[i - 1] = (1.0 - 2.0 * q + c) / (1.0 - q);
    }
    return t;
}

struct TdcEstimate {
    int estimator_id = 0;
    Tail tail = Tail::upper;
    double value = 0.0; // clamped to [0,1]
    double raw = 0.0;   // pre-clamp value
    std::size_t k_used = 0;
};

namespace empirical_detail {

inline std::size_t cutoff_k(std::size_t n) {
    auto k = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
    return std::max<std::size_t>(4, k);
}

// Upper-tail forms of the five estimators; lower-tail estimates evaluate the
// same forms on the 180-degree rotated sample.
inline double estimator_upper_raw(const PseudoSample& ps, int id, std::size_t& k_used) {
    double n = static_cast<double>(ps.n);
    std::size_t k = cutoff_k(ps.n);
    k_used = k;
    switch (id) {
        case 1: {
            // survival mass over its diagonal width
            double s = empirical_survival_diag(ps, n - static_cast<double>(k));
            return s / (static_cast<double>(k) / n);
        }
        case 2: {
            double q = 1.0 - static_cast<double>(k) / n;
            double c = empirical_copula_diag(ps, n - static_cast<double>(k));
            if (c <= 0.0) return 0.0;
            return 2.0 - std::log(c) / std::log(q);
        }
        case 3: {
            // no-intercept least squares of survival mass on i/N, i = 1..k
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 1; i <= k; ++i) {
                double x = static_cast<double>(i) / n;
                double y = empirical_survival_diag(ps, n - static_cast<double>(i));
                sxy += x * y;
                sxx += x * x;
            }
            return sxy / sxx;
        }
        case 4: {
            // last index (scanning inward from the tail) where the upper
            // trajectory is still monotone non-increasing across a window
            auto traj = tdc_trajectory(ps);
            std::size_t w = std::max<std::size_t>(
                2, static_cast<std::size_t>(std::ceil(std::sqrt(n))) / 2);
            std::size_t m = traj.upper.size();
            std::size_t i0 = 0;
            for (std::size_t end = m; end >= w; --end) {
                bool mono = true;
                for (std::size_t j = end - w + 1; j < end; ++j) {
                    if (traj.upper[j] > traj.upper[j - 1]) {
                        mono = false;
                        break;
                    }
                }
                if (mono) {
                    i0 = end; // 1-based trajectory index
                    break;
                }
            }
            if (i0 == 0) i0 = ps.n - k; // no monotone window: fall back to the k cutoff
            k_used = i0;
            return traj.upper[i0 - 1];
        }
        case 5: {
            // empirical upper tail copula at (1,1)
            double s = empirical_survival_diag(ps, n - static_cast<double>(k));
            return s * n / static_cast<double>(k);
        }
        default:
            throw std::invalid_argument("estimate_tdc_empirical: estimator_id must be 1..5");
    }
}

} // namespace empirical_detail

inline TdcEstimate estimate_tdc_empirical(const PseudoSample& ps, int estimator_id, Tail tail) {
    if (ps.n < 16) throw DataError("estimate_tdc_empirical: need at least 16 observations");
    TdcEstimate e;
    e.estimator_id = estimator_id;
    e.tail = tail;
    if (tail == Tail::upper) {
        e.raw = empirical_detail::estimator_upper_raw(ps, estimator_id, e.k_used);
    } else {
        PseudoSample rot = rotate180(ps);
        e.raw = empirical_detail::estimator_upper_raw(rot, estimator_id, e.k_used);
        if (estimator_id == 4) e.k_used = ps.n - e.k_used; // mirror the trajectory index back
    }
    e.value = std::min(1.0, std::max(0.0, e.raw));
    return e;
}

// Knight's O(n log n) concordance count; used to check samplers against
// analytic tau values.
inline double kendall_tau_empirical(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    if (y.size() != n || n < 2) throw std::invalid_argument("kendall_tau_empirical: bad input");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
    // merge sort counting inversions
    std::vector<double> tmp(n);
    std::uint64_t swaps = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            std::size_t mid = lo + width, hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, o = lo;
            while (i < mid && j < hi) {
                if (ys[j] < ys[i]) {
                    swaps += mid - i;
                    tmp[o++] = ys[j++];
                } else {
                    tmp[o++] = ys[i++];
                }
            }
            while (i < mid) tmp[o++] = ys[i++];
            while (j < hi) tmp[o++] = ys[j++];
            std::copy(tmp.begin() + lo, tmp.begin() + hi, ys.begin() + lo);
        }
    }
    double n0 = 0.5 * static_cast<double>(n) * (n - 1.0);
    return (n0 - 2.0 * static_cast<double>(swaps)) / n0; // no-ties form
}

inline double kendall_tau_empirical(const std::vector<std::pair<double, double>>& pts) {
    std::vector<double> a(pts.size()), b(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        a[i] = pts[i].first;
        b[i] = pts[i].second;
    }
    return kendall_tau_empirical(a, b);
}

} // namespace tailblend
