#pragma once

// Discrete and lattice-discretized locally compact groups with right Haar
// measure. Every element is stored as an integer tuple; lattice models scale
// coordinates by the cell width when a real coordinate is needed, so all
// group arithmetic is exact.

#include "error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace orlicz_dyn {

inline constexpr std::size_t kMaxDim = 8;

class Element {
public:
    Element() = default;

    explicit Element(std::span<const std::int64_t> coords) : dim_(static_cast<std::uint8_t>(coords.size())) {
        if (coords.size() > kMaxDim) {
            throw Error(ErrorCode::InvalidParameter, "element dimension exceeds " + std::to_string(kMaxDim));
        }
        std::copy(coords.begin(), coords.end(), c_.begin());
    }

    Element(std::initializer_list<std::int64_t> coords)
        : Element(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

    static Element zeros(std::size_t dim) {
        Element e;
        e.dim_ = static_cast<std::uint8_t>(dim);
        return e;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::int64_t operator[](std::size_t i) const noexcept { return c_[i]; }
    std::int64_t& operator[](std::size_t i) noexcept { return c_[i]; }
    std::span<const std::int64_t> coords() const noexcept { return {c_.data(), dim_}; }

    friend bool operator==(const Element&, const Element&) = default;
    friend auto operator<=>(const Element& a, const Element& b) {
        if (auto cmp = a.dim_ <=> b.dim_; cmp != 0) return cmp;
        return a.c_ <=> b.c_;
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < dim_; ++i) {
            if (i) s += ",";
            s += std::to_string(c_[i]);
        }
        return s + ")";
    }

private:
    std::array<std::int64_t, kMaxDim> c_{};
    std::uint8_t dim_ = 0;
};

struct ElementHash {
    std::size_t operator()(const Element& e) const noexcept {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ e.dim();
        for (auto v : e.coords()) {
            h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return static_cast<std::size_t>(h);
    }
};

enum class GroupKind { IntLine, IntLattice, HeisenbergInt, LatticeLine, HeisenbergLattice };

class GroupModel {
public:
    static GroupModel int_line() { return GroupModel(GroupKind::IntLine, 1, 1.0); }

    static GroupModel int_lattice(std::size_t d) {
        if (d < 1 || d > kMaxDim) {
            throw Error(ErrorCode::InvalidParameter, "int_lattice dimension must be in [1, 8]");
        }
        return GroupModel(GroupKind::IntLattice, d, 1.0);
    }

    static GroupModel heisenberg_int() { return GroupModel(GroupKind::HeisenbergInt, 3, 1.0); }

    static GroupModel lattice_line(double h) {
        check_cell(h);
        return GroupModel(GroupKind::LatticeLine, 1, h);
    }

    /// Heisenberg law on the lattice hZ x hZ x h^2 Z. Index triples (i, j, k)
    /// stand for (h i, h j, h^2 k), which keeps the twist term x y' on the
    /// lattice for every cell width.
    static GroupModel heisenberg_lattice(double h) {
        check_cell(h);
        return GroupModel(GroupKind::HeisenbergLattice, 3, h);
    }

    GroupKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    double cell_width() const noexcept { return h_; }
    bool is_counting() const noexcept {
        return kind_ == GroupKind::IntLine || kind_ == GroupKind::IntLattice || kind_ == GroupKind::HeisenbergInt;
    }
    bool is_heisenberg() const noexcept {
        return kind_ == GroupKind::HeisenbergInt || kind_ == GroupKind::HeisenbergLattice;
    }

    /// Haar mass of one lattice cell (1 for counting measure).
    double haar_cell_mass() const noexcept {
        switch (kind_) {
        case GroupKind::LatticeLine: return h_;
        case GroupKind::HeisenbergLattice: return h_ * h_ * h_ * h_;
        default: return 1.0;
        }
    }

    std::string name() const {
        switch (kind_) {
        case GroupKind::IntLine: return "int_line";
        case GroupKind::IntLattice: return "int_lattice";
        case GroupKind::HeisenbergInt: return "heisenberg_int";
        case GroupKind::LatticeLine: return "lattice_line";
        case GroupKind::HeisenbergLattice: return "heisenberg_lattice";
        }
        return "unknown";
    }

    friend bool operator==(const GroupModel&, const GroupModel&) = default;

    Element identity() const { return Element::zeros(dim_); }

    void require_member(const Element& g) const {
        if (g.dim() != dim_) {
            throw Error(ErrorCode::ModelMismatch,
                        "element " + g.to_string() + " does not belong to " + name() + " of dimension " +
                            std::to_string(dim_));
        }
    }

    Element mul(const Element& g, const Element& h) const {
        require_member(g);
        require_member(h);
        return mul_unchecked(g, h);
    }

    Element mul_unchecked(const Element& g, const Element& h) const noexcept {
        Element out = Element::zeros(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = g[i] + h[i];
        if (is_heisenberg()) out[2] += g[0] * h[1];
        return out;
    }

    Element inv(const Element& g) const {
        require_member(g);
        Element out = Element::zeros(dim_);
        for (std::size_t i = 0; i < dim_; ++i) out[i] = -g[i];
        if (is_heisenberg()) out[2] = g[0] * g[1] - g[2];
        return out;
    }

    Element power(const Element& a, std::int64_t n) const {
        require_member(a);
        const Element base = n < 0 ? inv(a) : a;
        const std::int64_t count = n < 0 ? -n : n;
        Element out = identity();
        for (std::int64_t i = 0; i < count; ++i) out = mul_unchecked(out, base);
        return out;
    }

    /// Real coordinate j of g.
    double coord(const Element& g, std::size_t j) const noexcept {
        const auto v = static_cast<double>(g[j]);
        switch (kind_) {
        case GroupKind::LatticeLine: return v * h_;
        case GroupKind::HeisenbergLattice: return j == 2 ? v * h_ * h_ : v * h_;
        default: return v;
        }
    }

    double coord_scale(std::size_t j) const noexcept {
        switch (kind_) {
        case GroupKind::LatticeLine: return h_;
        case GroupKind::HeisenbergLattice: return j == 2 ? h_ * h_ : h_;
        default: return 1.0;
        }
    }

    std::vector<double> real_coords(const Element& g) const {
        std::vector<double> out(dim_);
        for (std::size_t j = 0; j < dim_; ++j) out[j] = coord(g, j);
        return out;
    }

    /// Maps real coordinates onto the lattice; throws unless every coordinate
    /// is an integer multiple of its cell scale.
    Element element_from_coords(std::span<const double> coords) const {
        if (coords.size() != dim_) {
            throw Error(ErrorCode::ModelMismatch, "expected " + std::to_string(dim_) + " coordinates for " + name() +
                                                      ", got " + std::to_string(coords.size()));
        }
        Element out = Element::zeros(dim_);
        for (std::size_t j = 0; j < dim_; ++j) {
            const double idx = coords[j] / coord_scale(j);
            const double rounded = std::round(idx);
            if (!std::isfinite(idx) || std::fabs(idx - rounded) > 1e-9 * (1.0 + std::fabs(rounded))) {
                throw Error(ErrorCode::InvalidParameter, "coordinate " + std::to_string(coords[j]) +
                                                             " is not on the lattice of " + name());
            }
            out[j] = static_cast<std::int64_t>(rounded);
        }
        return out;
    }

private:
    GroupModel(GroupKind kind, std::size_t dim, double h) : kind_(kind), dim_(dim), h_(h) {}

    static void check_cell(double h) {
        if (!(h > 0.0) || !std::isfinite(h)) {
            throw Error(ErrorCode::InvalidParameter, "cell width must be positive, got " + std::to_string(h));
        }
    }

    GroupKind kind_;
    std::size_t dim_;
    double h_;
};

/// Finite explicit set of group elements, sorted and duplicate-free.
class CompactSet {
public:
    CompactSet() = default;

    explicit CompactSet(std::vector<Element> pts) : points_(std::move(pts)) {
        std::sort(points_.begin(), points_.end());
        points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
        index_.insert(points_.begin(), points_.end());
    }

    /// All lattice points of the model whose real coordinates lie in [lo, hi].
    static CompactSet box(const GroupModel& model, std::span<const double> lo, std::span<const double> hi) {
        if (lo.size() != model.dim() || hi.size() != model.dim()) {
            throw Error(ErrorCode::ModelMismatch, "box bounds must have " + std::to_string(model.dim()) + " entries");
        }
        std::vector<std::int64_t> first(model.dim());
        std::vector<std::int64_t> last(model.dim());
        for (std::size_t j = 0; j < model.dim(); ++j) {
            const double s = model.coord_scale(j);
            first[j] = static_cast<std::int64_t>(std::ceil(lo[j] / s - 1e-9));
            last[j] = static_cast<std::int64_t>(std::floor(hi[j] / s + 1e-9));
            if (last[j] < first[j]) return CompactSet();
        }
        std::vector<Element> pts;
        Element cur = Element::zeros(model.dim());
        for (std::size_t j = 0; j < model.dim(); ++j) cur[j] = first[j];
        for (;;) {
            pts.push_back(cur);
            std::size_t j = 0;
            for (; j < model.dim(); ++j) {
                if (cur[j] < last[j]) {
                    ++cur[j];
                    break;
                }
                cur[j] = first[j];
            }
            if (j == model.dim()) break;
        }
        return CompactSet(std::move(pts));
    }

    /// Integer interval {lo, ..., hi} on a one-dimensional model.
    static CompactSet interval(std::int64_t lo, std::int64_t hi) {
        std::vector<Element> pts;
        for (std::int64_t i = lo; i <= hi; ++i) pts.push_back(Element{i});
        return CompactSet(std::move(pts));
    }

    bool empty() const noexcept { return points_.empty(); }
    std::size_t size() const noexcept { return points_.size(); }
    bool contains(const Element& g) const { return index_.contains(g); }
    const std::vector<Element>& points() const noexcept { return points_; }
    auto begin() const noexcept { return points_.begin(); }
    auto end() const noexcept { return points_.end(); }

    /// Right translate K a.
    CompactSet translate(const GroupModel& model, const Element& a) const {
        std::vector<Element> pts;
        pts.reserve(points_.size());
        for (const auto& k : points_) pts.push_back(model.mul(k, a));
        return CompactSet(std::move(pts));
    }

    bool intersects(const CompactSet& other) const {
        const auto& small = size() <= other.size() ? *this : other;
        const auto& large = size() <= other.size() ? other : *this;
        return std::any_of(small.begin(), small.end(), [&](const Element& g) { return large.contains(g); });
    }

    friend bool operator==(const CompactSet& a, const CompactSet& b) { return a.points_ == b.points_; }

private:
    std::vector<Element> points_;
    std::unordered_set<Element, ElementHash> index_;
};

inline double haar(const GroupModel& model, const CompactSet& k) {
    return static_cast<double>(k.size()) * model.haar_cell_mass();
}

struct AperiodicityResult {
    enum class Status { Bounded, NotAperiodicWithinBound, Periodic };
    Status status;
    std::int64_t m = 0;        // least M with K and K a^{+-n} disjoint on (M, n_max]
    std::int64_t order = 0;    // detected finite order, when Periodic
    std::int64_t n_max = 0;

    bool certified() const noexcept { return status == Status::Bounded; }
};

/// Finite certificate of aperiodicity of a on K: the least M <= n_max with
/// K cap K a^{+-n} empty for all M < n <= n_max.
inline AperiodicityResult aperiodicity_bound(const GroupModel& model, const Element& a, const CompactSet& k,
                                             std::int64_t n_max) {
    if (k.empty()) throw Error(ErrorCode::EmptySet, "aperiodicity_bound needs a nonempty compact set");
    if (n_max < 1) throw Error(ErrorCode::InvalidParameter, "aperiodicity_bound needs n_max >= 1");
    model.require_member(a);
    const Element e = model.identity();
    if (a == e) return {AperiodicityResult::Status::Periodic, 0, 1, n_max};

    const Element a_inv = model.inv(a);
    Element fwd = e;
    Element bwd = e;
    std::int64_t last_hit = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        fwd = model.mul_unchecked(fwd, a);
        bwd = model.mul_unchecked(bwd, a_inv);
        if (fwd == e) return {AperiodicityResult::Status::Periodic, 0, n, n_max};
        const bool hit = std::any_of(k.begin(), k.end(), [&](const Element& g) {
            return k.contains(model.mul_unchecked(g, fwd)) || k.contains(model.mul_unchecked(g, bwd));
        });
        if (hit) last_hit = n;
    }
    if (last_hit == n_max) return {AperiodicityResult::Status::NotAperiodicWithinBound, n_max, 0, n_max};
    return {AperiodicityResult::Status::Bounded, last_hit, 0, n_max};
}

} // namespace orlicz_dyn
