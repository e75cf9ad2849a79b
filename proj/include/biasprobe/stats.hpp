#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "biasprobe/errors.hpp"
#include "biasprobe/special_functions.hpp"

namespace biasprobe {

struct CorrelationResult {
    double rho;
    double p_value; // two-sided t-test of H0: rho = 0, n-2 df
    std::size_t n;
};

inline CorrelationResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw LengthMismatch("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 3) throw TooFewSamples("pearson: need n >= 3");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx < 1e-24 || syy < 1e-24) throw ZeroVariance("pearson: zero variance input");
    double rho = sxy / std::sqrt(sxx * syy);
    rho = std::clamp(rho, -1.0, 1.0);
    const double nu = static_cast<double>(n - 2);
    double p;
    if (1.0 - rho * rho < 1e-15) {
        p = 0.0;
    } else {
        const double t = rho * std::sqrt(nu / (1.0 - rho * rho));
        p = student_t_two_sided(t, nu);
    }
    return {rho, p, n};
}

inline double rmse(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.size() != actual.size()) throw LengthMismatch("rmse: length mismatch");
    if (pred.empty()) throw LengthMismatch("rmse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

/// EV = 1 - Var(actual - pred) / Var(actual), population variances.
inline double explained_variance(const std::vector<double>& pred, const std::vector<double>& actual) {
    if (pred.size() != actual.size()) throw LengthMismatch("explained_variance: length mismatch");
    if (pred.empty()) throw LengthMismatch("explained_variance: empty input");
    const std::size_t n = pred.size();
    auto var = [n](const std::vector<double>& v) {
        double mu = 0.0;
        for (double x : v) mu += x;
        mu /= static_cast<double>(n);
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu);
        return s / static_cast<double>(n);
    };
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = actual[i] - pred[i];
    const double va = var(actual);
    if (va < 1e-24) throw ZeroVariance("explained_variance: actual has zero variance");
    return 1.0 - var(resid) / va;
}

/// 1-sample chi-square test of proportion, 1 df, no continuity correction.
inline double chi2_proportion(std::size_t successes, std::size_t n, double p0 = 0.5) {
    if (n < 1 || successes > n) throw InvalidCounts("chi2_proportion: invalid counts");
    if (p0 <= 0.0 || p0 >= 1.0) throw InvalidCounts("chi2_proportion: p0 must be in (0,1)");
    const double exp_s = static_cast<double>(n) * p0;
    const double exp_f = static_cast<double>(n) * (1.0 - p0);
    const double obs_s = static_cast<double>(successes);
    const double obs_f = static_cast<double>(n - successes);
    const double chi2 = (obs_s - exp_s) * (obs_s - exp_s) / exp_s +
                        (obs_f - exp_f) * (obs_f - exp_f) / exp_f;
    return chi_square_upper_tail(chi2, 1.0);
}

template <typename Label>
inline double accuracy(const std::vector<Label>& pred, const std::vector<Label>& truth) {
    if (pred.size() != truth.size()) throw LengthMismatch("accuracy: length mismatch");
    if (pred.empty()) throw LengthMismatch("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

/// 2x2 counts for binary labels; "positive" is the label comparing equal to
/// `positive`.
struct Confusion {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

template <typename Label>
inline Confusion confusion(const std::vector<Label>& pred, const std::vector<Label>& truth,
                           Label positive) {
    if (pred.size() != truth.size()) throw LengthMismatch("confusion: length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] == positive, t = truth[i] == positive;
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

} // namespace biasprobe
