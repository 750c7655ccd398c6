#pragma once

// Finitely supported functions on a group, with the Orlicz modular and the
// Luxemburg norm N(f) = inf{k > 0 : sum Phi(|f|/k) * cell_mass <= 1}.

#include "error.hpp"
#include "group.hpp"
#include "young.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <utility>

namespace orlicz_dyn {

class OrliczVector {
public:
    using Map = std::map<Element, double>;

    explicit OrliczVector(GroupModel model) : model_(std::move(model)) {}

    OrliczVector(GroupModel model, std::initializer_list<std::pair<Element, double>> entries)
        : model_(std::move(model)) {
        for (const auto& [g, v] : entries) add(g, v);
    }

    const GroupModel& model() const noexcept { return model_; }
    const Map& support() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool is_zero() const noexcept { return entries_.empty(); }
    auto begin() const noexcept { return entries_.begin(); }
    auto end() const noexcept { return entries_.end(); }

    double at(const Element& g) const {
        const auto it = entries_.find(g);
        return it == entries_.end() ? 0.0 : it->second;
    }

    void set(const Element& g, double v) {
        model_.require_member(g);
        if (v == 0.0) {
            entries_.erase(g);
        } else {
            entries_[g] = v;
        }
    }

    void add(const Element& g, double v) {
        model_.require_member(g);
        if (v == 0.0) return;
        auto [it, inserted] = entries_.try_emplace(g, v);
        if (!inserted) {
            it->second += v;
            if (it->second == 0.0) entries_.erase(it);
        }
    }

    double sup_abs() const noexcept {
        double m = 0.0;
        for (const auto& [g, v] : entries_) m = std::max(m, std::fabs(v));
        return m;
    }

    /// Pointwise product with a function of the group element.
    template <class Fn>
    OrliczVector multiply(Fn&& fn) const {
        OrliczVector out(model_);
        for (const auto& [g, v] : entries_) out.set(g, v * fn(g));
        return out;
    }

    /// f * chi_E
    OrliczVector restrict_to(const CompactSet& e) const {
        OrliczVector out(model_);
        for (const auto& [g, v] : entries_) {
            if (e.contains(g)) out.entries_.emplace_hint(out.entries_.end(), g, v);
        }
        return out;
    }

    /// f * chi_{G \ E}
    OrliczVector restrict_outside(const CompactSet& e) const {
        OrliczVector out(model_);
        for (const auto& [g, v] : entries_) {
            if (!e.contains(g)) out.entries_.emplace_hint(out.entries_.end(), g, v);
        }
        return out;
    }

    bool supported_in(const CompactSet& k) const {
        for (const auto& [g, v] : entries_) {
            if (!k.contains(g)) return false;
        }
        return true;
    }

    OrliczVector& operator+=(const OrliczVector& other) {
        require_same_model(other);
        for (const auto& [g, v] : other.entries_) add(g, v);
        return *this;
    }

    OrliczVector& operator-=(const OrliczVector& other) {
        require_same_model(other);
        for (const auto& [g, v] : other.entries_) add(g, -v);
        return *this;
    }

    OrliczVector& operator*=(double c) {
        if (c == 0.0) {
            entries_.clear();
            return *this;
        }
        for (auto& [g, v] : entries_) v *= c;
        return *this;
    }

    friend OrliczVector operator+(OrliczVector a, const OrliczVector& b) { return a += b; }
    friend OrliczVector operator-(OrliczVector a, const OrliczVector& b) { return a -= b; }
    friend OrliczVector operator*(double c, OrliczVector a) { return a *= c; }

    friend bool operator==(const OrliczVector& a, const OrliczVector& b) {
        return a.model_ == b.model_ && a.entries_ == b.entries_;
    }

    void require_same_model(const OrliczVector& other) const {
        if (!(model_ == other.model_)) {
            throw Error(ErrorCode::ModelMismatch, "vectors live on different group models");
        }
    }

private:
    GroupModel model_;
    Map entries_;
};

inline OrliczVector indicator(const GroupModel& model, const CompactSet& k) {
    OrliczVector out(model);
    for (const auto& g : k) out.set(g, 1.0);
    return out;
}

/// Sum of Phi(|f(x)|/k) * cell_mass over the support.
inline double modular(const OrliczVector& f, double k, const YoungFunction& phi) {
    if (!(k > 0.0)) throw Error(ErrorCode::InvalidParameter, "modular requires k > 0");
    double sum = 0.0;
    for (const auto& [g, v] : f) sum += phi.eval(std::fabs(v) / k);
    return sum * f.model().haar_cell_mass();
}

/// Luxemburg norm by bisection on k; k -> modular(f, k) is nonincreasing and
/// continuous for finitely supported f.
inline double luxemburg_norm(const OrliczVector& f, const YoungFunction& phi) {
    if (f.is_zero()) return 0.0;
    const double peak = f.sup_abs();
    // the peak entry alone already forces modular > 1 for any k below this
    double lo = peak / phi.inverse(1.0 / f.model().haar_cell_mass());
    double hi = lo;
    while (modular(f, hi, phi) > 1.0) {
        lo = hi;
        hi *= 2.0;
    }
    if (hi == lo) return hi;
    for (int iter = 0; iter < 2000; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        if (modular(f, mid, phi) <= 1.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

/// (f * delta_a)(x) = f(x a^{-1}): the support is translated on the right by a.
inline OrliczVector convolve_point_mass(const OrliczVector& f, const Element& a) {
    const auto& model = f.model();
    model.require_member(a);
    OrliczVector out(model);
    for (const auto& [g, v] : f) out.set(model.mul_unchecked(g, a), v);
    return out;
}

} // namespace orlicz_dyn
