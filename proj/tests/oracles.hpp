#pragma once

// Independent reference computations used only by the tests. Nothing here
// goes through the prefix-product tables or bisection code under test.

#include <orlicz_dyn/group.hpp>
#include <orlicz_dyn/orlicz.hpp>
#include <orlicz_dyn/translation.hpp>
#include <orlicz_dyn/young.hpp>

#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using namespace orlicz_dyn;

/// max of x|y| - Phi(x) over a uniform grid of [0, x_max].
inline double grid_conjugate(const YoungFunction& phi, double y, double x_max, std::size_t steps) {
    double best = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const double x = x_max * static_cast<double>(i) / static_cast<double>(steps);
        best = std::max(best, x * std::fabs(y) - phi.eval(x));
    }
    return best;
}

/// prod_{j=1}^{n} w(x a^j) by a plain running product in doubles.
inline double phi_direct(const GroupModel& m, const Element& a, const Weight& w, std::int64_t n, const Element& x) {
    double prod = 1.0;
    Element y = x;
    for (std::int64_t j = 1; j <= n; ++j) {
        y = m.mul(y, a);
        prod *= w(m, y);
    }
    return prod;
}

/// 1 / prod_{j=0}^{n-1} w(x a^{-j}).
inline double phi_tilde_direct(const GroupModel& m, const Element& a, const Weight& w, std::int64_t n,
                               const Element& x) {
    const Element a_inv = m.inv(a);
    double prod = 1.0;
    Element y = x;
    for (std::int64_t j = 0; j < n; ++j) {
        prod *= w(m, y);
        y = m.mul(y, a_inv);
    }
    return 1.0 / prod;
}

/// Coefficient of T^n(delta_x) at x a^n.
inline double phi_by_operator(const WeightedTranslation& op, std::int64_t n, const Element& x) {
    OrliczVector d(op.model());
    d.set(x, 1.0);
    const auto out = op.apply_T(d, n);
    return out.at(op.model().mul(x, op.model().power(op.a(), n)));
}

/// Coefficient of S^n(delta_x) at x a^{-n}.
inline double phi_tilde_by_operator(const WeightedTranslation& op, std::int64_t n, const Element& x) {
    OrliczVector d(op.model());
    d.set(x, 1.0);
    const auto out = op.apply_S(d, n);
    return out.at(op.model().mul(x, op.model().power(op.a(), -n)));
}

/// Coefficient of T_big^{m_big} S_small^{m_small}(delta_x): the multiplier
/// carried by a point that is pushed back by one operator and forward by another.
inline double mixed_by_operator(const WeightedTranslation& t_op, std::int64_t t_steps,
                                const WeightedTranslation& s_op, std::int64_t s_steps, const Element& x) {
    OrliczVector d(t_op.model());
    d.set(x, 1.0);
    const auto out = t_op.apply_T(s_op.apply_S(d, s_steps), t_steps);
    return out.at(t_op.model().mul(x, t_op.model().power(t_op.a(), t_steps - s_steps)));
}

/// Brute-force aperiodicity bound via explicit translated sets.
inline std::int64_t last_intersection(const GroupModel& m, const Element& a, const CompactSet& k, std::int64_t n_max) {
    std::int64_t last = 0;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const auto plus = k.translate(m, m.power(a, n));
        const auto minus = k.translate(m, m.power(a, -n));
        std::set<Element> ks(k.begin(), k.end());
        bool hit = false;
        for (const auto& g : plus) hit = hit || ks.count(g);
        for (const auto& g : minus) hit = hit || ks.count(g);
        if (hit) last = n;
    }
    return last;
}

/// Luxemburg norm for Power(1): the absolute sum times the cell mass.
inline double l1_norm(const OrliczVector& f) {
    double s = 0.0;
    for (const auto& [g, v] : f) s += std::fabs(v);
    return s * f.model().haar_cell_mass();
}

inline Element random_element(const GroupModel& m, std::mt19937_64& rng, std::int64_t radius) {
    std::uniform_int_distribution<std::int64_t> d(-radius, radius);
    Element e = Element::zeros(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) e[i] = d(rng);
    return e;
}

inline OrliczVector random_vector(const GroupModel& m, std::mt19937_64& rng, std::size_t max_support,
                                  std::int64_t radius) {
    std::uniform_int_distribution<std::size_t> count(1, max_support);
    std::uniform_real_distribution<double> value(-5.0, 5.0);
    OrliczVector f(m);
    const auto c = count(rng);
    for (std::size_t i = 0; i < c; ++i) f.set(random_element(m, rng, radius), value(rng));
    if (f.is_zero()) f.set(m.identity(), 1.0);
    return f;
}

inline std::vector<GroupModel> all_models() {
    return {GroupModel::int_line(), GroupModel::int_lattice(2), GroupModel::heisenberg_int(),
            GroupModel::lattice_line(0.5), GroupModel::heisenberg_lattice(0.5)};
}

/// w(x) = 2^{-clamp(x_j, -1, 1)}: the step weight used throughout the tests.
inline Weight step_weight(std::size_t coord) { return Weight::clamp_exp(2.0, coord, -1.0, 1.0); }

} // namespace oracle
