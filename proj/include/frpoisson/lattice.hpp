#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace frp {

/// Real-valued function of a point in R^d.
using ScalarField = std::function<double(const double*)>;

enum class DomainKind { Interval, Box, Disk };

/// Flat list of points in R^dim, stored point-major.
struct PointSet {
    int dim = 1;
    std::vector<double> xs;

    PointSet() = default;
    explicit PointSet(int d) : dim(d) {}

    std::size_t size() const { return dim > 0 ? xs.size() / static_cast<std::size_t>(dim) : 0; }
    const double* operator[](std::size_t i) const { return xs.data() + i * static_cast<std::size_t>(dim); }
    void push(const double* p) { xs.insert(xs.end(), p, p + dim); }
};

/// Open bounded region: an interval, an axis-aligned box or a disk (ball).
class Domain {
public:
    static Domain interval(double a, double b) {
        if (!(a < b)) throw UsageError("interval: need a < b");
        Domain d;
        d.kind_ = DomainKind::Interval;
        d.lo_ = {a};
        d.hi_ = {b};
        return d;
    }

    static Domain box(const std::vector<std::pair<double, double>>& axes) {
        if (axes.empty()) throw UsageError("box: needs at least one axis");
        Domain d;
        d.kind_ = axes.size() == 1 ? DomainKind::Interval : DomainKind::Box;
        for (auto [a, b] : axes) {
            if (!(a < b)) throw UsageError("box: need lo < hi on every axis");
            d.lo_.push_back(a);
            d.hi_.push_back(b);
        }
        return d;
    }

    /// Cube (a, b)^dim.
    static Domain cube(double a, double b, int dim) {
        return box(std::vector<std::pair<double, double>>(static_cast<std::size_t>(dim), {a, b}));
    }

    static Domain disk(std::vector<double> center, double radius) {
        if (!(radius > 0.0)) throw UsageError("disk: radius must be positive");
        if (center.empty()) throw UsageError("disk: empty center");
        Domain d;
        d.kind_ = DomainKind::Disk;
        d.center_ = std::move(center);
        d.radius_ = radius;
        for (double c : d.center_) {
            d.lo_.push_back(c - radius);
            d.hi_.push_back(c + radius);
        }
        return d;
    }

    DomainKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(lo_.size()); }
    const std::vector<double>& lower() const { return lo_; }
    const std::vector<double>& upper() const { return hi_; }
    const std::vector<double>& center() const { return center_; }
    double radius() const { return radius_; }

    double diameter() const {
        if (kind_ == DomainKind::Disk) return 2.0 * radius_;
        double s = 0.0;
        for (int i = 0; i < dim(); ++i) s += (hi_[i] - lo_[i]) * (hi_[i] - lo_[i]);
        return std::sqrt(s);
    }

    /// Points closer than this to the boundary count as boundary points.
    double boundary_tol() const { return 1e-12 * diameter(); }

    /// Strict membership; boundary ties are broken toward exclusion.
    bool contains(const double* x) const {
        const double tol = boundary_tol();
        if (kind_ == DomainKind::Disk) return dist_center(x) < radius_ - tol;
        for (int i = 0; i < dim(); ++i)
            if (!(x[i] > lo_[i] + tol && x[i] < hi_[i] - tol)) return false;
        return true;
    }

    /// Membership in the closure.
    bool contains_closed(const double* x) const {
        const double tol = boundary_tol();
        if (kind_ == DomainKind::Disk) return dist_center(x) <= radius_ + tol;
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
        return true;
    }

    /// Distance from an interior point to the boundary.
    double distance_to_boundary(const double* x) const {
        if (kind_ == DomainKind::Disk) return radius_ - dist_center(x);
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim(); ++i) m = std::min({m, x[i] - lo_[i], hi_[i] - x[i]});
        return m;
    }

    std::string describe() const {
        std::string s;
        if (kind_ == DomainKind::Disk) {
            s = "disk(";
            for (double c : center_) s += std::to_string(c) + ",";
            return s + std::to_string(radius_) + ")";
        }
        s = kind_ == DomainKind::Interval ? "interval(" : "box(";
        for (int i = 0; i < dim(); ++i) s += std::to_string(lo_[i]) + ":" + std::to_string(hi_[i]) + (i + 1 < dim() ? "," : "");
        return s + ")";
    }

private:
    double dist_center(const double* x) const {
        double s = 0.0;
        for (int i = 0; i < dim(); ++i) s += (x[i] - center_[i]) * (x[i] - center_[i]);
        return std::sqrt(s);
    }

    DomainKind kind_ = DomainKind::Interval;
    std::vector<double> lo_, hi_, center_;
    double radius_ = 0.0;
};

/// Uniform lattice points offset + h k strictly inside a domain. The points
/// also define a rectangular index block (the bounding block) used by the
/// Toeplitz representation; block positions are row-major, axis 0 slowest.
struct LatticeGrid {
    int dim = 1;
    double h = 1.0;
    std::vector<double> offset;
    std::vector<long> block_lo;
    std::vector<long> extents;
    std::vector<long> indices;            // size() * dim absolute multi-indices
    std::vector<std::size_t> block_pos;   // position of each point in the block

    std::size_t size() const { return indices.size() / static_cast<std::size_t>(dim); }
    const long* index(std::size_t i) const { return indices.data() + i * static_cast<std::size_t>(dim); }
    double coord(std::size_t i, int axis) const { return offset[axis] + h * static_cast<double>(index(i)[axis]); }

    std::size_t block_size() const {
        std::size_t n = 1;
        for (long e : extents) n *= static_cast<std::size_t>(e);
        return n;
    }

    bool full_block() const { return block_size() == size(); }

    PointSet points() const {
        PointSet p(dim);
        p.xs.reserve(indices.size());
        for (std::size_t i = 0; i < size(); ++i)
            for (int a = 0; a < dim; ++a) p.xs.push_back(coord(i, a));
        return p;
    }
};

/// c* = eps h held fixed while h varies; gamma = (c*)^2.
struct ShapeCoupling {
    double c_star = 0.5;
    double gamma() const { return c_star * c_star; }
    double eps(double h) const { return c_star / h; }
};

namespace detail {

inline LatticeGrid finish_grid(int dim, double h, std::vector<double> offset, const std::vector<long>& candidates) {
    LatticeGrid g;
    g.dim = dim;
    g.h = h;
    g.offset = std::move(offset);
    const std::size_t n = candidates.size() / static_cast<std::size_t>(dim);
    if (n == 0) throw UsageError("generate_centers: no lattice point inside the domain (h too large?)");
    g.block_lo.assign(dim, 0);
    std::vector<long> hi(dim, 0);
    for (int a = 0; a < dim; ++a) {
        long lo = candidates[a], up = candidates[a];
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, candidates[i * dim + a]);
            up = std::max(up, candidates[i * dim + a]);
        }
        g.block_lo[a] = lo;
        hi[a] = up;
    }
    g.extents.resize(dim);
    for (int a = 0; a < dim; ++a) g.extents[a] = hi[a] - g.block_lo[a] + 1;
    g.indices = candidates;
    g.block_pos.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t pos = 0;
        for (int a = 0; a < dim; ++a)
            pos = pos * static_cast<std::size_t>(g.extents[a]) + static_cast<std::size_t>(candidates[i * dim + a] - g.block_lo[a]);
        g.block_pos[i] = pos;
    }
    return g;
}

/// Calls f(multi_index) over the box [lo, hi] (inclusive) in row-major order.
template <class F>
void for_each_index(const std::vector<long>& lo, const std::vector<long>& hi, F&& f) {
    const int dim = static_cast<int>(lo.size());
    std::vector<long> k = lo;
    for (int a = 0; a < dim; ++a)
        if (hi[a] < lo[a]) return;
    while (true) {
        f(k);
        int a = dim - 1;
        while (a >= 0 && k[a] == hi[a]) {
            k[a] = lo[a];
            --a;
        }
        if (a < 0) return;
        ++k[a];
    }
}

}  // namespace detail

/// Lattice centers strictly inside the domain. Intervals and boxes use the
/// lattice lower corner + h k (so h = L/(N+1) gives the N interior points);
/// disks use the lattice anchored at the disk center.
inline LatticeGrid generate_centers(const Domain& dom, double h) {
    if (!(h > 0.0)) throw UsageError("generate_centers: h must be positive");
    if (!(h < dom.diameter())) throw UsageError("generate_centers: h must be smaller than the domain diameter");
    const int dim = dom.dim();
    std::vector<double> offset = dom.kind() == DomainKind::Disk ? dom.center() : dom.lower();
    std::vector<long> lo(dim), hi(dim);
    for (int a = 0; a < dim; ++a) {
        lo[a] = static_cast<long>(std::floor((dom.lower()[a] - offset[a]) / h)) - 1;
        hi[a] = static_cast<long>(std::ceil((dom.upper()[a] - offset[a]) / h)) + 1;
    }
    std::vector<long> cand;
    std::vector<double> x(dim);
    detail::for_each_index(lo, hi, [&](const std::vector<long>& k) {
        for (int a = 0; a < dim; ++a) x[a] = offset[a] + h * static_cast<double>(k[a]);
        if (dom.contains(x.data())) cand.insert(cand.end(), k.begin(), k.end());
    });
    return detail::finish_grid(dim, h, std::move(offset), cand);
}

/// Points of a uniform grid over the closure of a domain. The grid is a
/// filtered tensor product; axes and tensor positions are kept so that
/// separable evaluators can work axis by axis.
struct EvalGrid {
    PointSet points;
    std::vector<std::vector<double>> axes;
    std::vector<std::size_t> tensor_pos;
};

/// Grid of spacing h / refine over the closed domain (lower-corner anchored
/// for boxes, center anchored for disks).
inline EvalGrid evaluation_grid(const Domain& dom, double h, int refine) {
    if (refine < 2) throw UsageError("evaluation_grid: refine must be >= 2");
    if (!(h > 0.0)) throw UsageError("evaluation_grid: h must be positive");
    const int dim = dom.dim();
    const double s = h / refine;
    const double tol = dom.boundary_tol();
    EvalGrid g;
    g.points = PointSet(dim);
    g.axes.resize(dim);
    for (int a = 0; a < dim; ++a) {
        if (dom.kind() == DomainKind::Disk) {
            const double c = dom.center()[a];
            const long J = static_cast<long>(std::floor((dom.radius() + tol) / s));
            for (long j = -J; j <= J; ++j) g.axes[a].push_back(c + s * static_cast<double>(j));
        } else {
            const double lo = dom.lower()[a], up = dom.upper()[a];
            for (long j = 0;; ++j) {
                double v = lo + s * static_cast<double>(j);
                if (v > up + tol) break;
                g.axes[a].push_back(v);
            }
        }
    }
    std::vector<long> lo(dim, 0), hi(dim);
    for (int a = 0; a < dim; ++a) hi[a] = static_cast<long>(g.axes[a].size()) - 1;
    std::vector<double> x(dim);
    detail::for_each_index(lo, hi, [&](const std::vector<long>& k) {
        std::size_t pos = 0;
        for (int a = 0; a < dim; ++a) {
            x[a] = g.axes[a][k[a]];
            pos = pos * g.axes[a].size() + static_cast<std::size_t>(k[a]);
        }
        if (dom.contains_closed(x.data())) {
            g.points.push(x.data());
            g.tensor_pos.push_back(pos);
        }
    });
    return g;
}

inline EvalGrid evaluation_grid(const Domain& dom, const LatticeGrid& grid, int refine) {
    return evaluation_grid(dom, grid.h, refine);
}

}  // namespace frp
