#pragma once

// Weighted translations T f = w * (f * delta_a), i.e. (T f)(x) = w(x) f(x a^{-1}),
// their right inverses S h = (h / w) * delta_{a^{-1}}, and the weight cocycles
//
//   phi_n(x)       = prod_{j=1}^{n}   w(x a^j)
//   phi_tilde_n(x) = 1 / prod_{j=0}^{n-1} w(x a^{-j})
//
// that govern the dynamics of T along the orbit of a.

#include "error.hpp"
#include "group.hpp"
#include "orlicz.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <variant>

namespace orlicz_dyn {

/// Product of many positive factors kept as mantissa * 2^exponent, so long
/// products neither underflow nor overflow. Scaling by powers of two is exact,
/// hence the mantissa carries the same rounding as a plain running product.
class ScaledProduct {
public:
    ScaledProduct() = default;

    ScaledProduct& operator*=(double factor) noexcept {
        mant_ *= factor;
        renormalize();
        return *this;
    }

    ScaledProduct& operator*=(const ScaledProduct& o) noexcept {
        mant_ *= o.mant_;
        exp_ += o.exp_;
        renormalize();
        return *this;
    }

    ScaledProduct& operator/=(const ScaledProduct& o) noexcept {
        mant_ /= o.mant_;
        exp_ -= o.exp_;
        renormalize();
        return *this;
    }

    friend ScaledProduct operator*(ScaledProduct a, const ScaledProduct& b) noexcept { return a *= b; }
    friend ScaledProduct operator/(ScaledProduct a, const ScaledProduct& b) noexcept { return a /= b; }

    ScaledProduct reciprocal() const noexcept {
        ScaledProduct one;
        return one /= *this;
    }

    double value() const noexcept {
        if (exp_ > 4096) return mant_ == 0.0 ? 0.0 : HUGE_VAL;
        if (exp_ < -4096) return 0.0;
        return std::ldexp(mant_, static_cast<int>(exp_));
    }

    double log() const noexcept { return std::log(mant_) + static_cast<double>(exp_) * M_LN2; }

private:
    void renormalize() noexcept {
        if (mant_ == 0.0 || !std::isfinite(mant_)) return;
        int e = 0;
        mant_ = std::frexp(mant_, &e);
        exp_ += e;
    }

    double mant_ = 1.0;
    long exp_ = 0;
};

struct ConstantWeight {
    double c;
    friend bool operator==(const ConstantWeight&, const ConstantWeight&) = default;
};

/// w(x) = base^{-clamp(x_coord, lo, hi)}
struct ClampExpWeight {
    double base;
    std::size_t coord;
    double lo;
    double hi;
    friend bool operator==(const ClampExpWeight&, const ClampExpWeight&) = default;
};

struct TableWeight {
    std::map<Element, double> values;
    double fallback;
    friend bool operator==(const TableWeight&, const TableWeight&) = default;
};

class Weight {
public:
    using Rule = std::variant<ConstantWeight, ClampExpWeight, TableWeight>;

    static Weight constant(double c) {
        if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidParameter, "constant weight must be > 0");
        return Weight(ConstantWeight{c});
    }

    static Weight clamp_exp(double base, std::size_t coord, double lo, double hi) {
        if (!(base > 0.0) || base == 1.0 || !std::isfinite(base)) {
            throw Error(ErrorCode::InvalidParameter, "clamp_exp base must be positive and != 1");
        }
        if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw Error(ErrorCode::InvalidParameter, "clamp_exp requires finite lo <= hi");
        }
        if (coord >= kMaxDim) throw Error(ErrorCode::InvalidParameter, "clamp_exp coordinate out of range");
        return Weight(ClampExpWeight{base, coord, lo, hi});
    }

    static Weight table(std::map<Element, double> values, double fallback) {
        if (!(fallback > 0.0) || !std::isfinite(fallback)) {
            throw Error(ErrorCode::InvalidParameter, "table default must be > 0");
        }
        for (const auto& [g, v] : values) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw Error(ErrorCode::InvalidParameter, "table weight at " + g.to_string() + " must be > 0");
            }
        }
        return Weight(TableWeight{std::move(values), fallback});
    }

    const Rule& rule() const noexcept { return rule_; }

    double operator()(const GroupModel& model, const Element& x) const {
        return std::visit(
            [&](const auto& r) -> double {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, ConstantWeight>) {
                    return r.c;
                } else if constexpr (std::is_same_v<R, ClampExpWeight>) {
                    const double z = std::clamp(model.coord(x, r.coord), r.lo, r.hi);
                    if (r.base == 2.0) return std::exp2(-z);
                    return std::pow(r.base, -z);
                } else {
                    const auto it = r.values.find(x);
                    return it == r.values.end() ? r.fallback : it->second;
                }
            },
            rule_);
    }

    /// Global sup of w; every rule attains it on a bounded set of values.
    double sup() const {
        return std::visit(
            [](const auto& r) -> double {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, ConstantWeight>) {
                    return r.c;
                } else if constexpr (std::is_same_v<R, ClampExpWeight>) {
                    return std::max(std::pow(r.base, -r.lo), std::pow(r.base, -r.hi));
                } else {
                    double m = r.fallback;
                    for (const auto& [g, v] : r.values) m = std::max(m, v);
                    return m;
                }
            },
            rule_);
    }

    /// Global inf of w.
    double inf() const {
        return std::visit(
            [](const auto& r) -> double {
                using R = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<R, ConstantWeight>) {
                    return r.c;
                } else if constexpr (std::is_same_v<R, ClampExpWeight>) {
                    return std::min(std::pow(r.base, -r.lo), std::pow(r.base, -r.hi));
                } else {
                    double m = r.fallback;
                    for (const auto& [g, v] : r.values) m = std::min(m, v);
                    return m;
                }
            },
            rule_);
    }

    friend bool operator==(const Weight&, const Weight&) = default;

private:
    explicit Weight(Rule r) : rule_(std::move(r)) {}
    Rule rule_;
};

class WeightedTranslation {
public:
    WeightedTranslation(GroupModel model, Element a, Weight w)
        : model_(std::move(model)), a_(a), w_(std::move(w)) {
        model_.require_member(a_);
        a_inv_ = model_.inv(a_);
    }

    const GroupModel& model() const noexcept { return model_; }
    const Element& a() const noexcept { return a_; }
    const Element& a_inv() const noexcept { return a_inv_; }
    const Weight& weight() const noexcept { return w_; }

    double w(const Element& x) const { return w_(model_, x); }

    /// T^n f, with (T f)(x) = w(x) f(x a^{-1}).
    OrliczVector apply_T(const OrliczVector& f, std::int64_t n) const {
        check_input(f, n);
        OrliczVector cur = f;
        for (std::int64_t step = 0; step < n; ++step) {
            OrliczVector next(model_);
            for (const auto& [y, v] : cur) {
                const Element x = model_.mul_unchecked(y, a_);
                next.set(x, w(x) * v);
            }
            cur = std::move(next);
        }
        return cur;
    }

    /// S^n h, with (S h)(x) = h(x a) / w(x a).
    OrliczVector apply_S(const OrliczVector& h, std::int64_t n) const {
        check_input(h, n);
        OrliczVector cur = h;
        for (std::int64_t step = 0; step < n; ++step) {
            OrliczVector next(model_);
            for (const auto& [y, v] : cur) next.set(model_.mul_unchecked(y, a_inv_), v / w(y));
            cur = std::move(next);
        }
        return cur;
    }

    /// phi_n(x) = prod_{j=1}^{n} w(x a^j).
    double phi_seq(std::int64_t n, const Element& x) const { return phi_product(n, x).value(); }

    /// phi_tilde_n(x) = 1 / prod_{j=0}^{n-1} w(x a^{-j}).
    double phi_tilde_seq(std::int64_t n, const Element& x) const {
        return phi_tilde_product(n, x).reciprocal().value();
    }

    ScaledProduct phi_product(std::int64_t n, const Element& x) const {
        model_.require_member(x);
        if (n < 0) throw Error(ErrorCode::InvalidParameter, "phi_seq requires n >= 0");
        ScaledProduct prod;
        Element y = x;
        for (std::int64_t j = 1; j <= n; ++j) {
            y = model_.mul_unchecked(y, a_);
            prod *= w(y);
        }
        return prod;
    }

    /// prod_{j=0}^{n-1} w(x a^{-j}), the reciprocal of phi_tilde_n(x).
    ScaledProduct phi_tilde_product(std::int64_t n, const Element& x) const {
        model_.require_member(x);
        if (n < 0) throw Error(ErrorCode::InvalidParameter, "phi_tilde_seq requires n >= 0");
        ScaledProduct prod;
        Element y = x;
        for (std::int64_t j = 0; j < n; ++j) {
            prod *= w(y);
            y = model_.mul_unchecked(y, a_inv_);
        }
        return prod;
    }

private:
    void check_input(const OrliczVector& f, std::int64_t n) const {
        if (n < 0) throw Error(ErrorCode::InvalidParameter, "iteration count must be >= 0");
        if (!(f.model() == model_)) throw Error(ErrorCode::ModelMismatch, "vector and operator models differ");
    }

    GroupModel model_;
    Element a_;
    Element a_inv_;
    Weight w_;
};

/// Exact max of |values(x)| over the finite set E.
template <class Fn>
double sup_on_set(Fn&& values, const CompactSet& e) {
    if (e.empty()) throw Error(ErrorCode::EmptySet, "sup over an empty set");
    double m = 0.0;
    for (const auto& x : e) m = std::max(m, std::fabs(values(x)));
    return m;
}

} // namespace orlicz_dyn
