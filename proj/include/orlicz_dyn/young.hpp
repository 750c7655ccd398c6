#pragma once

// Young functions: even convex Phi with Phi(0) = 0, Phi > 0 away from zero and
// Phi(t) -> infinity. Three families are supported: |t|^p / p, the
// power-log family |t|^alpha (1 + |log|t||), and a sampled convex table
// interpolated piecewise linearly.

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace orlicz_dyn {

struct PowerFamily {
    double p;
};

struct PowerLogFamily {
    double alpha;
};

struct CustomFamily {
    std::vector<double> t;
    std::vector<double> phi;
};

enum class Delta2Status { Ok, EmptyRange };

struct Delta2Report {
    Delta2Status status = Delta2Status::EmptyRange;
    double m_delta = 0.0;  // sup of Phi(2t)/Phi(t) over the samples
    double t_at_max = 0.0;
    bool regular = false;
    std::size_t samples = 0;
};

class YoungFunction {
public:
    using Family = std::variant<PowerFamily, PowerLogFamily, CustomFamily>;

    /// Largest abscissa the conjugate search will probe before reporting divergence.
    static constexpr double kConjugateCap = 1e6;

    static YoungFunction power(double p) {
        if (!(p >= 1.0) || !std::isfinite(p)) {
            throw Error(ErrorCode::InvalidParameter, "power family requires p >= 1, got " + std::to_string(p));
        }
        return YoungFunction(PowerFamily{p});
    }

    static YoungFunction power_log(double alpha) {
        if (!(alpha > 1.0) || !std::isfinite(alpha)) {
            throw Error(ErrorCode::InvalidParameter,
                        "power-log family requires alpha > 1, got " + std::to_string(alpha));
        }
        return YoungFunction(PowerLogFamily{alpha});
    }

    /// Builds a sampled Young function from (t, Phi(t)) pairs on [0, t_max].
    /// The grid must start at (0, 0), be strictly increasing in t, positive
    /// after the origin, and have nondecreasing secant slopes (convexity of the
    /// interpolant).
    static YoungFunction custom(std::span<const std::pair<double, double>> samples) {
        if (samples.size() < 2) {
            throw Error(ErrorCode::InvalidParameter, "custom Young function needs at least two samples");
        }
        CustomFamily fam;
        fam.t.reserve(samples.size());
        fam.phi.reserve(samples.size());
        for (const auto& [t, v] : samples) {
            if (!std::isfinite(t) || !std::isfinite(v)) {
                throw Error(ErrorCode::InvalidParameter, "custom samples must be finite");
            }
            fam.t.push_back(t);
            fam.phi.push_back(v);
        }
        if (fam.t.front() != 0.0 || fam.phi.front() != 0.0) {
            throw Error(ErrorCode::InvalidParameter, "custom samples must start at (0, 0)");
        }
        double prev_slope = 0.0;
        for (std::size_t i = 1; i < fam.t.size(); ++i) {
            if (!(fam.t[i] > fam.t[i - 1])) {
                throw Error(ErrorCode::InvalidParameter, "custom sample abscissae must be strictly increasing");
            }
            if (!(fam.phi[i] > 0.0)) {
                throw Error(ErrorCode::InvalidParameter, "custom Phi must be positive for t > 0");
            }
            const double slope = (fam.phi[i] - fam.phi[i - 1]) / (fam.t[i] - fam.t[i - 1]);
            if (slope < 0.0) {
                throw Error(ErrorCode::InvalidParameter, "custom Phi must be nondecreasing");
            }
            if (slope < prev_slope - 1e-9 * (1.0 + prev_slope)) {
                throw Error(ErrorCode::InvalidParameter,
                            "custom Phi is not convex near t = " + std::to_string(fam.t[i - 1]));
            }
            prev_slope = slope;
        }
        return YoungFunction(std::move(fam));
    }

    const Family& family() const noexcept { return family_; }
    bool is_custom() const noexcept { return std::holds_alternative<CustomFamily>(family_); }

    /// Right end of the domain; infinity for the closed-form families.
    double t_max() const noexcept {
        if (const auto* c = std::get_if<CustomFamily>(&family_)) return c->t.back();
        return std::numeric_limits<double>::infinity();
    }

    double eval(double t) const {
        const double x = std::fabs(t);
        return std::visit([x](const auto& fam) { return eval_family(fam, x); }, family_);
    }

    double operator()(double t) const { return eval(t); }

    /// Generalized inverse sup{t >= 0 : Phi(t) <= s}, by bracketing bisection.
    double inverse(double s) const {
        if (!(s >= 0.0) || std::isnan(s)) {
            throw Error(ErrorCode::InvalidParameter, "inverse requires s >= 0");
        }
        if (s == 0.0) return 0.0;
        double lo = 0.0;
        double hi = 1.0;
        if (const auto* c = std::get_if<CustomFamily>(&family_)) {
            if (s > c->phi.back()) {
                throw Error(ErrorCode::Unbounded, "s exceeds Phi(t_max) of the custom grid");
            }
            if (s == c->phi.back()) return c->t.back();
            hi = c->t.back();
        } else {
            if (std::isinf(s)) throw Error(ErrorCode::Unbounded, "inverse of infinity");
            if (eval(hi) <= s) {
                lo = hi;
                while (eval(hi) <= s) {
                    lo = hi;
                    hi *= 2.0;
                    if (hi > 1e300) throw Error(ErrorCode::Unbounded, "inverse bracket overflow");
                }
            } else {
                // shrink towards zero so the bracket is relative, not absolute
                double probe = 0.5;
                while (probe > 0.0 && eval(probe) > s) {
                    hi = probe;
                    probe *= 0.5;
                }
                lo = probe;
            }
        }
        for (int iter = 0; iter < 2000; ++iter) {
            const double mid = lo + 0.5 * (hi - lo);
            if (mid <= lo || mid >= hi) break;
            if (eval(mid) <= s) {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo <= 1e-16 * hi) break;
        }
        return lo;
    }

    /// Complementary function Psi(y) = sup{x|y| - Phi(x) : x >= 0}, maximized
    /// numerically. Throws ConjugateDiverges when the objective is still
    /// increasing at the search cap.
    double conjugate(double y) const {
        const double ay = std::fabs(y);
        if (ay == 0.0) return 0.0;
        const double cap = std::min(kConjugateCap, t_max());
        auto g = [&](double x) { return x * ay - eval(x); };

        double hi = std::min(1.0, cap);
        for (;;) {
            const double next = 2.0 * hi;
            if (next > cap) {
                const double near_cap = cap * (1.0 - 1e-9);
                if (g(cap) > g(near_cap)) {
                    throw Error(ErrorCode::ConjugateDiverges,
                                "objective x|y| - Phi(x) still increasing at x = " + std::to_string(cap));
                }
                hi = cap;
                break;
            }
            if (g(next) <= g(hi)) {
                hi = next;
                break;
            }
            hi = next;
        }

        // The objective need not be unimodal (power-log is not convex just below
        // t = 1), so locate the best cell of a coarse scan first and refine there.
        constexpr int kScan = 256;
        int best = 0;
        double best_val = 0.0;
        for (int i = 1; i <= kScan; ++i) {
            const double v = g(hi * i / kScan);
            if (v > best_val) {
                best_val = v;
                best = i;
            }
        }
        const double cell = hi / kScan;
        const double scan_hi = hi;
        const double lo = std::max(0.0, (best - 1) * cell);
        hi = std::min(scan_hi, (best + 1) * cell);

        constexpr double kInvPhi = 0.6180339887498948482;
        double a = lo;
        double b = hi;
        double c = b - kInvPhi * (b - a);
        double d = a + kInvPhi * (b - a);
        double gc = g(c);
        double gd = g(d);
        for (int iter = 0; iter < 300 && (b - a) > 1e-13 * (1.0 + b); ++iter) {
            if (gc >= gd) {
                b = d;
                d = c;
                gd = gc;
                c = b - kInvPhi * (b - a);
                gc = g(c);
            } else {
                a = c;
                c = d;
                gc = gd;
                d = a + kInvPhi * (b - a);
                gd = g(d);
            }
        }
        return std::max({0.0, best_val, gc, gd, g(0.5 * (a + b))});
    }

    /// Sampled Delta_2 diagnostic on a log-spaced grid of [t_lo, t_hi].
    Delta2Report delta2_check(double t_lo, double t_hi, std::size_t samples) const {
        Delta2Report report;
        t_hi = std::min(t_hi, 0.5 * t_max());
        if (!(t_lo > 0.0) || !(t_hi > t_lo) || samples < 2 || !std::isfinite(t_hi)) {
            report.status = Delta2Status::EmptyRange;
            return report;
        }
        report.status = Delta2Status::Ok;
        report.samples = samples;

        std::vector<double> ts(samples);
        std::vector<double> ratios(samples);
        const double log_lo = std::log(t_lo);
        const double step = (std::log(t_hi) - log_lo) / static_cast<double>(samples - 1);
        for (std::size_t i = 0; i < samples; ++i) {
            ts[i] = (i + 1 == samples) ? t_hi : std::exp(log_lo + step * static_cast<double>(i));
            ratios[i] = eval(2.0 * ts[i]) / eval(ts[i]);
            if (ratios[i] > report.m_delta) {
                report.m_delta = ratios[i];
                report.t_at_max = ts[i];
            }
        }

        // unbounded growth shows up as a monotone climb across the top decade
        const double decade_start = t_hi / 10.0;
        std::size_t first = 0;
        while (first + 1 < samples && ts[first] < decade_start) ++first;
        if (first + 1 >= samples) first = 0;
        bool monotone = true;
        for (std::size_t i = first + 1; i < samples; ++i) {
            if (ratios[i] < ratios[i - 1] * (1.0 - 1e-6)) {
                monotone = false;
                break;
            }
        }
        const bool grows = ratios.back() > ratios[first] * (1.0 + 1e-3);
        report.regular = !(monotone && grows) && std::isfinite(report.m_delta);
        return report;
    }

    /// Finite surrogate for lim Phi = infinity: Phi(probe) >= 1/tolerance. The
    /// probe is t_max for sampled functions.
    bool satisfies_divergence(double tolerance, double probe = 1e6) const {
        const double t = is_custom() ? t_max() : probe;
        return eval(t) >= 1.0 / tolerance;
    }

private:
    explicit YoungFunction(Family fam) : family_(std::move(fam)) {}

    static double eval_family(const PowerFamily& f, double x) {
        if (x == 0.0) return 0.0;
        if (f.p == 1.0) return x;
        if (f.p == 2.0) return 0.5 * x * x;
        return std::pow(x, f.p) / f.p;
    }

    static double eval_family(const PowerLogFamily& f, double x) {
        if (x == 0.0) return 0.0;
        return std::pow(x, f.alpha) * (1.0 + std::fabs(std::log(x)));
    }

    static double eval_family(const CustomFamily& f, double x) {
        if (x > f.t.back()) {
            throw Error(ErrorCode::OutOfGrid,
                        "t = " + std::to_string(x) + " beyond custom t_max = " + std::to_string(f.t.back()));
        }
        const auto it = std::upper_bound(f.t.begin(), f.t.end(), x);
        if (it == f.t.end()) return f.phi.back();
        const auto i = static_cast<std::size_t>(it - f.t.begin());
        const double t0 = f.t[i - 1];
        const double t1 = f.t[i];
        const double w = (x - t0) / (t1 - t0);
        return f.phi[i - 1] + w * (f.phi[i] - f.phi[i - 1]);
    }

    Family family_;
};

/// Psi tabulated on a fixed grid of y values, for sweeps that query the
/// conjugate repeatedly.
class ConjugateTable {
public:
    ConjugateTable(const YoungFunction& phi, std::vector<double> ys) : ys_(std::move(ys)) {
        values_.reserve(ys_.size());
        for (double y : ys_) values_.push_back(phi.conjugate(y));
    }

    std::span<const double> ys() const noexcept { return ys_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const noexcept { return ys_.size(); }

private:
    std::vector<double> ys_;
    std::vector<double> values_;
};

} // namespace orlicz_dyn
