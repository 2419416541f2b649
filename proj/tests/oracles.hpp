#pragma once

// Brute-force reference computations, written from the definitions and kept
// independent of the library code they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <deconf/reach.hpp>

namespace oracle {

// Raw bucket counts: very_liberal, somewhat_liberal, moderate, somewhat_conservative, very_conservative.
struct Cell {
    bool present = false;
    std::array<long long, 5> buckets{};
    long long any = -1;

    long long liberal() const { return buckets[0] + buckets[1]; }
    long long conservative() const { return buckets[3] + buckets[4]; }
};

struct Table {
    std::vector<std::string> ids;
    std::vector<std::map<int, Cell>> cells;  // subgroup index -> cell; 0 is the marginal

    deconf::ReachTable to_reach() const {
        deconf::ReachTable t;
        for (size_t i = 0; i < ids.size(); ++i) {
            size_t idx = t.add_interest(ids[i], ids[i]);
            for (const auto& [g, c] : cells[i]) {
                if (!c.present) continue;
                deconf::Subgroup sg(static_cast<uint8_t>(g));
                for (int k = 0; k < 5; ++k) t.set_count(idx, sg, static_cast<deconf::Ideology>(k), c.buckets[k]);
                if (c.any >= 0) t.set_count(idx, sg, deconf::Ideology::Any, c.any);
            }
        }
        t.binarize();
        return t;
    }

    const Cell* cell(size_t i, int g) const {
        auto it = cells[i].find(g);
        return it == cells[i].end() || !it->second.present ? nullptr : &it->second;
    }

    bool relevant(size_t i) const {
        const Cell* m = cell(i, 0);
        return m && m->liberal() + m->conservative() > 0;
    }
};

/// Mean of per-interest conservative fractions (or pooled ratio) over relevant interests.
inline std::optional<double> baseline(const Table& t, int g, bool pooled) {
    double sum = 0.0;
    long long n = 0, c_sum = 0, lc_sum = 0;
    for (size_t i = 0; i < t.ids.size(); ++i) {
        const Cell* c = t.cell(i, g);
        if (!c || !t.relevant(i)) continue;
        long long lc = c->liberal() + c->conservative();
        if (lc == 0) continue;
        sum += double(c->conservative()) / double(lc);
        c_sum += c->conservative();
        lc_sum += lc;
        ++n;
    }
    if (n == 0) return std::nullopt;
    return pooled ? double(c_sum) / double(lc_sum) : sum / double(n);
}

/// mu = sum_i (division_i - baseline_i) * w_i / sum_i w_i over subgroups with partisan followers.
inline std::optional<double> mu(const Table& t, size_t i, const std::vector<int>& groups,
                                const std::map<int, double>& baselines, bool partisan_basis) {
    double num = 0.0, den = 0.0;
    for (int g : groups) {
        const Cell* c = t.cell(i, g);
        if (!c) continue;
        long long lc = c->liberal() + c->conservative();
        if (lc == 0) continue;
        double w = partisan_basis ? double(lc) : double(c->any >= 0 ? c->any : lc);
        double division = double(c->conservative()) / double(lc);
        num += (division - baselines.at(g)) * w;
        den += w;
    }
    if (den <= 0.0) return std::nullopt;
    return num / den;
}

inline double pi(const Table& t, size_t i) {
    const Cell* m = t.cell(i, 0);
    double L = double(m->liberal()), C = double(m->conservative());
    return (C - L) / (C + L);
}

/// sup |F_a - F_b| evaluated at every pooled point by direct counting.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    for (double x : pooled) {
        double fa = 0, fb = 0;
        for (double v : a) fa += v <= x;
        for (double v : b) fb += v <= x;
        d = std::max(d, std::fabs(fa / double(a.size()) - fb / double(b.size())));
    }
    return d;
}

/// 2 sum_{k=1}^{terms} (-1)^(k-1) exp(-2 k^2 lambda^2), clamped to [0, 1].
inline double kolmogorov_series(double lambda, int terms) {
    long double s = 0.0L;
    for (int k = 1; k <= terms; ++k) {
        long double term = std::exp(-2.0L * k * k * (long double)lambda * lambda);
        s += (k % 2 ? term : -term);
    }
    return std::clamp(double(2.0L * s), 0.0, 1.0);
}

/// Jensen-Shannon distance (base 2) of two unnormalized nonnegative vectors.
inline double js_distance(std::vector<double> p, std::vector<double> q) {
    double sp = 0, sq = 0;
    for (double v : p) sp += v;
    for (double v : q) sq += v;
    double d = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double pi = p[i] / sp, qi = q[i] / sq, m = (pi + qi) / 2;
        if (pi > 0) d += 0.5 * pi * std::log2(pi / m);
        if (qi > 0) d += 0.5 * qi * std::log2(qi / m);
    }
    return std::sqrt(std::max(0.0, d));
}

/// Weighted modularity from a dense symmetric adjacency matrix.
inline double modularity(const std::vector<std::vector<double>>& A, const std::vector<int>& part) {
    const size_t n = A.size();
    std::vector<double> k(n, 0.0);
    double two_m = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            k[i] += A[i][j];
            two_m += A[i][j];
        }
    double q = 0.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (part[i] == part[j]) q += A[i][j] - k[i] * k[j] / two_m;
    return q / two_m;
}

/// Best modularity over all set partitions (restricted growth strings).
inline std::pair<double, std::vector<int>> best_partition(const std::vector<std::vector<double>>& A) {
    const int n = static_cast<int>(A.size());
    std::vector<int> rgs(n, 0), best_part(n, 0);
    double best = modularity(A, rgs);
    std::function<void(int, int)> rec = [&](int pos, int max_label) {
        if (pos == n) {
            double q = modularity(A, rgs);
            if (q > best + 1e-15) {
                best = q;
                best_part = rgs;
            }
            return;
        }
        for (int l = 0; l <= max_label + 1; ++l) {
            rgs[pos] = l;
            rec(pos + 1, std::max(max_label, l));
        }
    };
    rgs[0] = 0;
    rec(1, 0);
    return {best, best_part};
}

/// UMass coherence from raw documents: for each topic's ordered top words,
/// sum_{i<j} log((D(w_i, w_j) + 1) / D(w_j)), skipping D(w_j) == 0; mean over topics.
inline double umass(const std::vector<std::vector<std::string>>& docs,
                    const std::vector<std::vector<std::string>>& top_words) {
    auto df = [&](const std::string& w) {
        double n = 0;
        for (const auto& d : docs) n += std::find(d.begin(), d.end(), w) != d.end();
        return n;
    };
    auto co = [&](const std::string& a, const std::string& b) {
        double n = 0;
        for (const auto& d : docs)
            n += std::find(d.begin(), d.end(), a) != d.end() && std::find(d.begin(), d.end(), b) != d.end();
        return n;
    };
    double total = 0.0;
    for (const auto& words : top_words) {
        double s = 0.0;
        for (size_t i = 0; i < words.size(); ++i)
            for (size_t j = i + 1; j < words.size(); ++j) {
                double dj = df(words[j]);
                if (dj == 0) continue;
                s += std::log((co(words[i], words[j]) + 1.0) / dj);
            }
        total += s;
    }
    return total / double(top_words.size());
}

}  // namespace oracle
