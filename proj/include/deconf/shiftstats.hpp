#pragma once

// Distribution-shift statistics between the unweighted and deconfounded
// alignment samples: Jensen-Shannon distance over fixed histograms and the
// two-sample Kolmogorov-Smirnov test.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "reach.hpp"
#include "special.hpp"

namespace deconf {

struct HistogramSpec {
    size_t bins = 100;
    double low = -1.0;
    double high = 1.0;
    bool clamp = false;  // out-of-range values go to the edge bins instead of failing
};

/// Bin counts over [low, high]; the right edge belongs to the last bin.
inline std::vector<double> histogram(std::span<const double> values, const HistogramSpec& spec = {}) {
    if (spec.bins == 0) throw ValidationError("histogram: bins must be >= 1");
    if (!(spec.high > spec.low)) throw ValidationError("histogram: empty range");
    std::vector<double> counts(spec.bins, 0.0);
    const double width = (spec.high - spec.low) / static_cast<double>(spec.bins);
    for (double v : values) {
        if (std::isnan(v)) throw ValidationError("histogram: NaN value");
        if (v < spec.low || v > spec.high) {
            if (!spec.clamp)
                throw ValidationError("histogram: value " + fmt_double(v) + " outside [" + fmt_double(spec.low) +
                                      ", " + fmt_double(spec.high) + "]");
            v = std::clamp(v, spec.low, spec.high);
        }
        auto bin = static_cast<size_t>(std::floor((v - spec.low) / width));
        counts[std::min(bin, spec.bins - 1)] += 1.0;
    }
    return counts;
}

inline std::vector<double> normalize(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) {
        if (x < 0.0) throw ValidationError("normalize: negative mass");
        s += x;
    }
    if (s <= 0.0) throw ValidationError("normalize: zero total mass");
    for (double& x : v) x /= s;
    return v;
}

/// Jensen-Shannon divergence of two probability vectors (0 log 0 = 0).
inline double js_divergence(std::span<const double> p, std::span<const double> q, double base = 2.0) {
    if (p.size() != q.size()) throw ValidationError("js_divergence: length mismatch");
    if (!(base > 1.0)) throw ValidationError("js_divergence: log base must exceed 1");
    double kl_p = 0.0, kl_q = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) kl_p += p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) kl_q += q[i] * std::log(q[i] / m);
    }
    const double d = 0.5 * (kl_p + kl_q) / std::log(base);
    return std::max(0.0, d);
}

/// Jensen-Shannon distance: square root of the divergence. Inputs are normalized.
inline double js_distance_probs(std::span<const double> p, std::span<const double> q, double base = 2.0) {
    auto pn = normalize(std::vector<double>(p.begin(), p.end()));
    auto qn = normalize(std::vector<double>(q.begin(), q.end()));
    return std::sqrt(js_divergence(pn, qn, base));
}

/// Jensen-Shannon distance between two samples after histogramming.
inline double js_distance(std::span<const double> a, std::span<const double> b, const HistogramSpec& spec = {},
                          double base = 2.0) {
    if (a.empty() || b.empty()) throw ValidationError("js_distance: empty sample");
    return js_distance_probs(histogram(a, spec), histogram(b, spec), base);
}

struct KsResult {
    double statistic = 0.0;
    double pvalue = 1.0;
    double lambda = 0.0;
};

/// Exact sup |F_a - F_b| over the pooled sample, by a merge sweep.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
inline KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    KsResult r;
    r.statistic = ks_statistic(a, b);
    const double n = static_cast<double>(a.size()), m = static_cast<double>(b.size());
    r.lambda = r.statistic * std::sqrt(n * m / (n + m));
    r.pvalue = r.statistic == 0.0 ? 1.0 : kolmogorov_survival(r.lambda);
    return r;
}

inline constexpr double kPvalueFloor = 1e-300;

/// p-values below 1e-300 are reported as "< 1e-300".
inline std::string format_pvalue(double p) {
    if (p < kPvalueFloor) return "< 1e-300";
    return fmt_double(p);
}

struct ShiftReport {
    Category category = Category::None;
    double js_distance = 0.0;
    double ks_statistic = 0.0;
    double ks_pvalue = 1.0;
    size_t n_before = 0;
    size_t n_after = 0;
    size_t bin_count = 0;
    double log_base = 2.0;
};

/// Shift between the unweighted (pi) and deconfounded (mu) alignments of the
/// same interests.
inline ShiftReport shift_report(std::span<const double> pi, std::span<const double> mu, Category category,
                                const HistogramSpec& spec = {}, double base = 2.0) {
    if (pi.size() != mu.size()) throw ValidationError("shift_report: length mismatch");
    ShiftReport r;
    r.category = category;
    r.js_distance = js_distance(pi, mu, spec, base);
    auto ks = ks_two_sample(pi, mu);
    r.ks_statistic = ks.statistic;
    r.ks_pvalue = ks.pvalue;
    r.n_before = pi.size();
    r.n_after = mu.size();
    r.bin_count = spec.bins;
    r.log_base = base;
    return r;
}

inline nlohmann::json to_json(const ShiftReport& r) {
    return {{"category", label(r.category)},
            {"js_distance", r.js_distance},
            {"ks_statistic", r.ks_statistic},
            {"ks_pvalue", r.ks_pvalue},
            {"ks_pvalue_text", format_pvalue(r.ks_pvalue)},
            // The KS statistic read as a percentage; not a separate measure.
            {"ks_percent", 100.0 * r.ks_statistic},
            {"ks_percent_reading", "largest gap between the raw and deconfounded alignment CDFs, in percentage points"},
            {"n_before", r.n_before},
            {"n_after", r.n_after},
            {"bin_count", r.bin_count},
            {"log_base", r.log_base}};
}

/// Plot-ready density table: bin edges with normalized before/after mass.
inline void write_histogram_csv(std::ostream& os, std::span<const double> before, std::span<const double> after,
                                const HistogramSpec& spec = {}) {
    auto hb = histogram(before, spec), ha = histogram(after, spec);
    const double nb = static_cast<double>(before.size()), na = static_cast<double>(after.size());
    const double width = (spec.high - spec.low) / static_cast<double>(spec.bins);
    os << "bin_left,bin_right,density_before,density_after\n";
    for (size_t i = 0; i < spec.bins; ++i) {
        const double left = spec.low + width * static_cast<double>(i);
        const double right = i + 1 == spec.bins ? spec.high : spec.low + width * static_cast<double>(i + 1);
        os << fmt_double(left) << ',' << fmt_double(right) << ',' << fmt_double(nb > 0 ? hb[i] / nb / width : 0.0)
           << ',' << fmt_double(na > 0 ? ha[i] / na / width : 0.0) << '\n';
    }
}

}  // namespace deconf
