#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace hardy {

/// (mu, p, s) of  -u'' - (mu/delta^2) u + u^p / delta^s = 0.
struct ProblemParams {
    double mu = 0.0;
    double p = 2.0;
    double s = 0.0;

    ProblemParams() = default;
    ProblemParams(double mu_, double p_, double s_) : mu(mu_), p(p_), s(s_) {
        if (!std::isfinite(mu) || !std::isfinite(p) || !std::isfinite(s))
            throw DomainError("ProblemParams: mu, p, s must be finite");
        if (!(p > 1.0))
            throw DomainError("ProblemParams: p must exceed 1");
    }

    /// (s-2)/(p-1), the Keller-Osserman exponent.
    double ko_exponent() const { return (s - 2.0) / (p - 1.0); }

    friend bool operator==(const ProblemParams&, const ProblemParams&) = default;
};

struct CharacteristicRoots {
    double beta_minus = 0.0;
    double beta_plus = 0.0;
    bool degenerate = false;
};

/// Real roots of beta(1-beta) = mu; empty when mu > 1/4.
inline std::optional<CharacteristicRoots> characteristic_roots(double mu) {
    if (!(mu <= 0.25)) return std::nullopt;
    const double q = std::sqrt(0.25 - mu);
    return CharacteristicRoots{0.5 - q, 0.5 + q, mu == 0.25};
}

/// A real number or one of the two infinities. Arithmetic on the infinite
/// values is deliberately not offered; callers branch on `kind`.
struct ExtendedReal {
    enum class Kind { Finite, PlusInfinity, MinusInfinity };
    Kind kind = Kind::Finite;
    double value = 0.0;

    static ExtendedReal finite(double v) { return {Kind::Finite, v}; }
    static ExtendedReal plus_infinity() { return {Kind::PlusInfinity, 0.0}; }
    static ExtendedReal minus_infinity() { return {Kind::MinusInfinity, 0.0}; }

    bool is_finite() const { return kind == Kind::Finite; }

    /// x < *this
    bool greater_than(double x) const {
        switch (kind) {
        case Kind::PlusInfinity: return true;
        case Kind::MinusInfinity: return false;
        default: return x < value;
        }
    }
    bool less_than(double x) const {
        switch (kind) {
        case Kind::PlusInfinity: return false;
        case Kind::MinusInfinity: return true;
        default: return value < x;
        }
    }
    std::string to_string() const;
};

inline std::string ExtendedReal::to_string() const {
    switch (kind) {
    case Kind::PlusInfinity: return "+inf";
    case Kind::MinusInfinity: return "-inf";
    default: break;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

enum class Verdict { NoSuperharmonics, Nonexistence, Existence };

inline std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::NoSuperharmonics: return "NoSuperharmonics";
    case Verdict::Nonexistence: return "Nonexistence";
    case Verdict::Existence: return "Existence";
    }
    return "?";
}

struct RegimeReport {
    ProblemParams params;
    std::optional<CharacteristicRoots> roots;
    /// beta_-(p-1)+2; only meaningful when roots exist.
    std::optional<double> threshold_s;
    double ko_exponent = 0.0;
    /// 1 - (2-s)/beta_-; only meaningful when roots exist.
    std::optional<ExtendedReal> p_star;
    double mu_star = 0.0;
    Verdict verdict = Verdict::NoSuperharmonics;
};

/// mu at which the verdict flips for fixed (p, s). Only a flip point when
/// s < (p+3)/2; otherwise nonexistence holds for every mu <= 1/4.
inline double critical_mu(double p, double s) {
    if (!(p > 1.0)) throw DomainError("critical_mu: p must exceed 1");
    const double q = (p - 2.0 * s + 3.0) / (2.0 * (p - 1.0));
    return 0.25 - q * q;
}

inline ExtendedReal critical_p(double beta_minus, double s) {
    if (beta_minus == 0.0)
        return s < 2.0 ? ExtendedReal::plus_infinity() : ExtendedReal::minus_infinity();
    return ExtendedReal::finite(1.0 - (2.0 - s) / beta_minus);
}

inline RegimeReport existence_verdict(const ProblemParams& params) {
    RegimeReport r;
    r.params = params;
    r.roots = characteristic_roots(params.mu);
    r.ko_exponent = params.ko_exponent();
    r.mu_star = critical_mu(params.p, params.s);
    if (!r.roots) {
        r.verdict = Verdict::NoSuperharmonics;
        return r;
    }
    const double bm = r.roots->beta_minus;
    r.threshold_s = bm * (params.p - 1.0) + 2.0;
    r.p_star = critical_p(bm, params.s);
    // closed condition: equality is nonexistence
    r.verdict = params.s < *r.threshold_s ? Verdict::Existence : Verdict::Nonexistence;
    return r;
}

/// Verdict read off from p against p*. Derived from s < beta_-(p-1)+2 by
/// dividing through by beta_-, so the direction flips with the sign of beta_-.
inline Verdict verdict_from_p_star(const RegimeReport& r) {
    if (!r.roots) return Verdict::NoSuperharmonics;
    const double bm = r.roots->beta_minus;
    const ExtendedReal& ps = *r.p_star;
    bool exists;
    if (!ps.is_finite())
        exists = ps.kind == ExtendedReal::Kind::PlusInfinity;
    else if (bm < 0.0)
        exists = ps.greater_than(r.params.p);
    else
        exists = ps.less_than(r.params.p);
    return exists ? Verdict::Existence : Verdict::Nonexistence;
}

/// Verdict read off from mu against mu*(p, s).
inline Verdict verdict_from_mu_star(const RegimeReport& r) {
    if (!r.roots) return Verdict::NoSuperharmonics;
    const double p = r.params.p, s = r.params.s;
    if (s >= (p + 3.0) / 2.0) return Verdict::Nonexistence;
    return r.params.mu > r.mu_star ? Verdict::Existence : Verdict::Nonexistence;
}

} // namespace hardy
