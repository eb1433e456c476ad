#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "regime.hpp"

namespace hardy {

struct FitWindow {
    double lo = 0.0;
    double hi = 0.0;
};

/// [10 delta_min, 1000 delta_min]: away from the nodes polluted by the
/// boundary proxy, still inside the boundary layer.
inline FitWindow default_fit_window(double delta_min) { return {10.0 * delta_min, 1000.0 * delta_min}; }

enum class FitModel { PurePower, PowerTimesLogPower };

inline std::string_view to_string(FitModel m) {
    return m == FitModel::PurePower ? "PurePower" : "PowerTimesLogPower";
}

struct AsymptoticFit {
    double amplitude = 0.0;
    double exponent = 0.0;
    double log_power = 0.0;
    FitWindow window;
    double max_rel_residual = 0.0;
    FitModel model = FitModel::PurePower;
    std::size_t n_samples = 0;
};

namespace detail {

struct LineFit {
    double slope, intercept;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    // a single abscissa leaves the slope undetermined; report a flat fit
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    return {slope, my - slope * mx};
}

/// Samples inside the window, validated.
inline void select_window(const std::vector<double>& delta, const std::vector<double>& value, FitWindow w,
                          std::vector<double>& d, std::vector<double>& v) {
    if (delta.size() != value.size()) throw DomainError("fit: delta and value sizes differ");
    if (!(w.lo < w.hi)) throw DomainError("fit: window needs lo < hi");
    d.clear();
    v.clear();
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (delta[i] < w.lo || delta[i] > w.hi) continue;
        d.push_back(delta[i]);
        v.push_back(value[i]);
    }
    if (d.size() < 8)
        throw InsufficientSamples("fit: " + std::to_string(d.size()) + " samples in window, need 8");
    for (double x : v)
        if (!(x > 0.0)) throw NonpositiveValues("fit: values in the window must be positive");
    for (double x : d)
        if (!(x > 0.0)) throw DomainError("fit: delta must be positive");
}

} // namespace detail

/// log u = log A + e log delta, least squares.
inline AsymptoticFit fit_power(const std::vector<double>& delta, const std::vector<double>& value, FitWindow w) {
    std::vector<double> d, v;
    detail::select_window(delta, value, w, d, v);
    std::vector<double> x(d.size()), y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        x[i] = std::log(d[i]);
        y[i] = std::log(v[i]);
    }
    const auto lf = detail::least_squares(x, y);
    AsymptoticFit f;
    f.amplitude = std::exp(lf.intercept);
    f.exponent = lf.slope;
    f.window = w;
    f.model = FitModel::PurePower;
    f.n_samples = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double model = f.amplitude * std::pow(d[i], f.exponent);
        f.max_rel_residual = std::max(f.max_rel_residual, std::abs(v[i] - model) / model);
    }
    return f;
}

/// u = A delta^{1/2} log(1/delta)^beta: regress log u - log(delta)/2 on
/// log log(1/delta). Needs the window inside (0, 1).
inline AsymptoticFit fit_power_log(const std::vector<double>& delta, const std::vector<double>& value, FitWindow w) {
    if (!(w.hi < 1.0)) throw DomainError("fit_power_log: window must lie below delta = 1");
    std::vector<double> d, v;
    detail::select_window(delta, value, w, d, v);
    std::vector<double> x(d.size()), y(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        x[i] = std::log(-std::log(d[i]));
        y[i] = std::log(v[i]) - 0.5 * std::log(d[i]);
    }
    const auto lf = detail::least_squares(x, y);
    AsymptoticFit f;
    f.amplitude = std::exp(lf.intercept);
    f.exponent = 0.5;
    f.log_power = lf.slope;
    f.window = w;
    f.model = FitModel::PowerTimesLogPower;
    f.n_samples = d.size();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double model = f.amplitude * std::sqrt(d[i]) * std::pow(-std::log(d[i]), f.log_power);
        f.max_rel_residual = std::max(f.max_rel_residual, std::abs(v[i] - model) / model);
    }
    return f;
}

enum class SolutionVerdict { S, ML, XXL, Indeterminate };

inline std::string_view to_string(SolutionVerdict v) {
    switch (v) {
    case SolutionVerdict::S: return "S";
    case SolutionVerdict::ML: return "ML";
    case SolutionVerdict::XXL: return "XXL";
    case SolutionVerdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct SolutionClass {
    SolutionVerdict verdict = SolutionVerdict::Indeterminate;
    AsymptoticFit evidence;
    CharacteristicRoots roots;
    double ko_exponent = 0.0;
    /// u vanishes identically on the window (classified S)
    bool trivial = false;
    std::string diagnostic;
};

struct ClassifyOptions {
    double tol = 0.05;
    /// tolerance on the log power at mu = 1/4 (the log fit is less sharp)
    double log_tol = 0.1;
    double max_rel_residual = 0.05;
};

/// Exponent-based classification. Precedence S, XXL, ML; a bad fit is
/// Indeterminate. At mu = 1/4 a PowerTimesLogPower fit decides S (log power
/// near 0) and ML (log power near 1).
inline SolutionClass classify(const AsymptoticFit& fit, const RegimeReport& report, const ClassifyOptions& o = {}) {
    if (!report.roots) throw PreconditionError("classify: report has no characteristic roots");
    SolutionClass c;
    c.evidence = fit;
    c.roots = *report.roots;
    c.ko_exponent = report.ko_exponent;
    if (!(fit.max_rel_residual < o.max_rel_residual)) {
        c.diagnostic = "fit residual too large";
        return c;
    }
    const double bp = c.roots.beta_plus, bm = c.roots.beta_minus, b = c.ko_exponent;
    if (fit.model == FitModel::PowerTimesLogPower) {
        if (std::abs(fit.log_power) <= o.log_tol) c.verdict = SolutionVerdict::S;
        else if (std::abs(fit.log_power - 1.0) <= o.log_tol) c.verdict = SolutionVerdict::ML;
        else c.diagnostic = "log power matches neither 0 nor 1";
        return c;
    }
    const double e = fit.exponent;
    if (e >= bp - o.tol) c.verdict = SolutionVerdict::S;
    else if (std::abs(e - b) <= o.tol) c.verdict = SolutionVerdict::XXL;
    else if (!c.roots.degenerate && std::abs(e - bm) <= o.tol) c.verdict = SolutionVerdict::ML;
    else if (e < bm - o.tol) c.diagnostic = "grows faster than the small harmonics; possibly XL";
    else c.diagnostic = "exponent between classes";
    return c;
}

/// Trivial profiles (all values zero on the window) are S; otherwise fit and classify.
inline SolutionClass classify_profile(const std::vector<double>& delta, const std::vector<double>& value,
                                      FitWindow w, const RegimeReport& report, const ClassifyOptions& o = {}) {
    bool all_zero = true, any_in = false;
    for (std::size_t i = 0; i < delta.size(); ++i) {
        if (delta[i] < w.lo || delta[i] > w.hi) continue;
        any_in = true;
        all_zero = all_zero && value[i] == 0.0;
    }
    if (any_in && all_zero) {
        if (!report.roots) throw PreconditionError("classify: report has no characteristic roots");
        SolutionClass c;
        c.verdict = SolutionVerdict::S;
        c.trivial = true;
        c.roots = *report.roots;
        c.ko_exponent = report.ko_exponent;
        c.evidence.window = w;
        c.diagnostic = "trivial profile";
        return c;
    }
    const bool degenerate = report.roots && report.roots->degenerate;
    const auto fit = degenerate ? fit_power_log(delta, value, w) : fit_power(delta, value, w);
    return classify(fit, report, o);
}

struct WindowSensitivity {
    double exponent;
    double shifted_exponent;
    double change;
    bool under_resolved;
};

/// Refits one decade further from the boundary; a change of 0.02 or more
/// flags the solution as under-resolved.
inline WindowSensitivity window_sensitivity(const std::vector<double>& delta, const std::vector<double>& value,
                                            FitWindow w, double threshold = 0.02) {
    const auto a = fit_power(delta, value, w);
    const auto b = fit_power(delta, value, {10.0 * w.lo, 10.0 * w.hi});
    const double ch = std::abs(b.exponent - a.exponent);
    return {a.exponent, b.exponent, ch, !(ch < threshold)};
}

} // namespace hardy
