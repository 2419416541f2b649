#pragma once

// Demographic deconfounding of political alignment.
//
// For an interest I and a demographic category with subgroups D_1..D_n:
//
//   division_i = C_i / (C_i + L_i)                 within-interest conservative share
//   baseline_i = conservative share of D_i across all interests
//   weight_i   = share of D_i among I's followers  (renormalized over usable subgroups)
//   mu         = sum_i (division_i - baseline_i) * weight_i
//
// Subgroups with C_i + L_i == 0 have no division; they are skipped and the
// remaining weights renormalized.

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "alignment.hpp"
#include "reach.hpp"

namespace deconf {

enum class BaselineEstimator { MeanOfFractions, Pooled };
enum class WeightBasis { TotalReach, Partisan };

inline const char* label(BaselineEstimator e) { return e == BaselineEstimator::Pooled ? "pooled" : "mean"; }
inline const char* label(WeightBasis b) { return b == WeightBasis::Partisan ? "partisan" : "total"; }

inline BaselineEstimator parse_estimator(const std::string& s) {
    if (s == "mean") return BaselineEstimator::MeanOfFractions;
    if (s == "pooled") return BaselineEstimator::Pooled;
    throw ValidationError("unknown estimator '" + s + "' (expected mean|pooled)");
}

inline WeightBasis parse_weight_basis(const std::string& s) {
    if (s == "total") return WeightBasis::TotalReach;
    if (s == "partisan") return WeightBasis::Partisan;
    throw ValidationError("unknown weight basis '" + s + "' (expected total|partisan)");
}

struct SubgroupBaseline {
    Category category = Category::None;
    Subgroup subgroup;
    double baseline = 0.0;
    size_t n_interests_used = 0;
    BaselineEstimator estimator = BaselineEstimator::MeanOfFractions;
};

/// Baselines of every subgroup participating in one category.
class BaselineSet {
public:
    BaselineSet() = default;
    BaselineSet(Category category, std::vector<SubgroupBaseline> items)
        : category_(category), items_(std::move(items)) {}

    Category category() const { return category_; }
    const std::vector<SubgroupBaseline>& items() const { return items_; }

    std::optional<double> find(Subgroup sg) const {
        for (const auto& b : items_)
            if (b.subgroup == sg) return b.baseline;
        return std::nullopt;
    }

    /// Supplied (e.g. generator-known) baselines.
    static BaselineSet exact(Category category, const std::vector<std::pair<Subgroup, double>>& values) {
        std::vector<SubgroupBaseline> items;
        for (auto [sg, b] : values) {
            if (sg.category() != category) throw ValidationError("baseline subgroup outside category");
            if (!(b >= 0.0 && b <= 1.0)) throw ValidationError("baseline must lie in [0, 1]");
            items.push_back({category, sg, b, 1, BaselineEstimator::MeanOfFractions});
        }
        return BaselineSet(category, std::move(items));
    }

private:
    Category category_ = Category::None;
    std::vector<SubgroupBaseline> items_;
};

/// Conservative share within one subgroup of an interest; nullopt when the
/// intersection is empty.
inline std::optional<double> subgroup_division(int64_t liberal, int64_t conservative) {
    if (liberal < 0 || conservative < 0) throw ValidationError("negative partisan count");
    if (liberal + conservative == 0) return std::nullopt;
    return static_cast<double>(conservative) / static_cast<double>(conservative + liberal);
}

inline bool politically_relevant(const ReachTable& table, size_t interest) {
    return table.liberal(interest, Subgroup::marginal()) + table.conservative(interest, Subgroup::marginal()) > 0;
}

/// Per-subgroup conservative baseline over politically relevant interests.
/// Subgroups absent from the table do not participate; a subgroup present but
/// without any usable interest is an error.
inline BaselineSet subgroup_baseline(const ReachTable& table, Category category,
                                     BaselineEstimator estimator = BaselineEstimator::MeanOfFractions) {
    if (!table.binarized()) throw ValidationError("subgroup_baseline requires a binarized table");
    if (category == Category::None) throw ValidationError("baseline requires a demographic category");
    std::vector<SubgroupBaseline> items;
    for (Subgroup sg : subgroups_of(category)) {
        bool present = false;
        size_t used = 0;
        double fraction_sum = 0.0;
        int64_t pooled_c = 0, pooled_lc = 0;
        for (size_t i = 0; i < table.interest_count(); ++i) {
            if (!table.has_subgroup(i, sg)) continue;
            present = true;
            if (!politically_relevant(table, i)) continue;
            int64_t L = table.liberal(i, sg), C = table.conservative(i, sg);
            if (L + C == 0) continue;
            ++used;
            fraction_sum += static_cast<double>(C) / static_cast<double>(C + L);
            pooled_c += C;
            pooled_lc += C + L;
        }
        if (!present) continue;
        if (used == 0)
            throw ValidationError(std::string("subgroup '") + sg.label() + "' has no usable interests");
        double b = estimator == BaselineEstimator::Pooled
                       ? static_cast<double>(pooled_c) / static_cast<double>(pooled_lc)
                       : fraction_sum / static_cast<double>(used);
        items.push_back({category, sg, b, used, estimator});
    }
    if (items.empty()) throw ValidationError(std::string("category '") + label(category) + "' absent from table");
    return BaselineSet(category, std::move(items));
}

struct SubgroupWeight {
    Subgroup subgroup;
    int64_t basis = 0;
    double weight = 0.0;
};

inline int64_t weight_basis_count(const ReachTable& table, size_t interest, Subgroup sg, WeightBasis basis) {
    int64_t partisan = table.liberal(interest, sg) + table.conservative(interest, sg);
    if (basis == WeightBasis::Partisan) return partisan;
    return table.count(interest, sg, Ideology::Any).value_or(partisan);
}

/// Share of each subgroup among an interest's followers. Subgroups with a zero
/// basis are excluded and the rest renormalized.
inline std::vector<SubgroupWeight> subgroup_weights(const ReachTable& table, size_t interest, Category category,
                                                    WeightBasis basis = WeightBasis::TotalReach) {
    if (!table.binarized()) throw ValidationError("subgroup_weights requires a binarized table");
    std::vector<SubgroupWeight> out;
    int64_t sum = 0;
    for (Subgroup sg : subgroups_of(category)) {
        if (!table.has_subgroup(interest, sg)) continue;
        int64_t b = weight_basis_count(table, interest, sg, basis);
        if (b <= 0) continue;
        out.push_back({sg, b, 0.0});
        sum += b;
    }
    if (sum == 0)
        throw ValidationError("all-zero weight basis for interest '" + table.interest(interest).id + "'");
    for (auto& w : out) w.weight = static_cast<double>(w.basis) / static_cast<double>(sum);
    return out;
}

struct SubgroupContribution {
    Subgroup subgroup;
    double division = 0.0;
    double baseline = 0.0;
    double weight = 0.0;
};

struct DeconfoundResult {
    std::string interest_id;
    Category category = Category::None;
    double mu = 0.0;
    double pi = 0.0;
    std::optional<double> delta_pct;
    std::vector<SubgroupContribution> subgroups_used;
    std::vector<Subgroup> skipped;
};

/// Signed percent change of magnitude: 100 * (|mu| - |pi|) / |pi|. Negative
/// values mean the alignment moved toward the center. Undefined for pi == 0.
inline std::optional<double> delta_report(double pi, double mu) {
    if (pi == 0.0) return std::nullopt;
    return 100.0 * (std::fabs(mu) - std::fabs(pi)) / std::fabs(pi);
}

struct DeconfoundOptions {
    BaselineEstimator estimator = BaselineEstimator::MeanOfFractions;
    WeightBasis basis = WeightBasis::TotalReach;
};

/// Deconfounded alignment of one interest; nullopt when no subgroup is usable.
inline std::optional<DeconfoundResult> deconfounded_alignment(const ReachTable& table, size_t interest,
                                                              const BaselineSet& baselines,
                                                              WeightBasis basis = WeightBasis::TotalReach) {
    if (!table.binarized()) throw ValidationError("deconfounding requires a binarized table");
    const auto m = Subgroup::marginal();
    int64_t L = table.liberal(interest, m), C = table.conservative(interest, m);
    if (L + C == 0)
        throw UndefinedAlignment("interest '" + table.interest(interest).id + "' is not politically relevant");

    DeconfoundResult r;
    r.interest_id = table.interest(interest).id;
    r.category = baselines.category();
    r.pi = political_alignment(L, C);

    int64_t basis_sum = 0;
    std::vector<int64_t> basis_counts;
    for (const auto& b : baselines.items()) {
        Subgroup sg = b.subgroup;
        auto division = subgroup_division(table.liberal(interest, sg), table.conservative(interest, sg));
        if (!division) {
            r.skipped.push_back(sg);
            continue;
        }
        int64_t w = weight_basis_count(table, interest, sg, basis);
        r.subgroups_used.push_back({sg, *division, b.baseline, 0.0});
        basis_counts.push_back(w);
        basis_sum += w;
    }
    // Subgroups with partisan followers but no baseline cannot be adjusted.
    for (Subgroup sg : subgroups_of(baselines.category())) {
        if (baselines.find(sg)) continue;
        if (table.has_subgroup(interest, sg) && table.liberal(interest, sg) + table.conservative(interest, sg) > 0)
            throw ValidationError(std::string("no baseline for subgroup '") + sg.label() + "'");
    }
    if (r.subgroups_used.empty() || basis_sum <= 0) return std::nullopt;

    double mu = 0.0;
    for (size_t i = 0; i < r.subgroups_used.size(); ++i) {
        auto& s = r.subgroups_used[i];
        s.weight = static_cast<double>(basis_counts[i]) / static_cast<double>(basis_sum);
        mu += (s.division - s.baseline) * s.weight;
    }
    r.mu = mu;
    r.delta_pct = delta_report(r.pi, r.mu);
    return r;
}

struct DeconfoundRun {
    Category category = Category::None;
    DeconfoundOptions options;
    BaselineSet baselines;
    std::vector<DeconfoundResult> results;
    std::vector<std::string> no_result;  // interests without a usable subgroup
};

/// Deconfounds every politically relevant interest for one category.
inline DeconfoundRun deconfound_category(const ReachTable& table, Category category,
                                         const DeconfoundOptions& options = {},
                                         std::optional<BaselineSet> baselines = std::nullopt) {
    DeconfoundRun run;
    run.category = category;
    run.options = options;
    run.baselines = baselines ? std::move(*baselines) : subgroup_baseline(table, category, options.estimator);

    std::vector<size_t> relevant;
    for (size_t i = 0; i < table.interest_count(); ++i)
        if (politically_relevant(table, i)) relevant.push_back(i);

    std::vector<std::optional<DeconfoundResult>> slots(relevant.size());
    parallel_for(relevant.size(), [&](size_t k) {
        slots[k] = deconfounded_alignment(table, relevant[k], run.baselines, options.basis);
    });
    for (size_t k = 0; k < slots.size(); ++k) {
        if (slots[k])
            run.results.push_back(std::move(*slots[k]));
        else
            run.no_result.push_back(table.interest(relevant[k]).id);
    }
    return run;
}

inline constexpr const char* kDeconfoundHeader = "interest_id,category,pi,mu,delta_pct,subgroups_used,skipped";

inline std::string join_labels(const std::vector<Subgroup>& sgs) {
    std::string out;
    for (size_t i = 0; i < sgs.size(); ++i) {
        if (i) out += ';';
        out += sgs[i].label();
    }
    return out;
}

inline void write_deconfound_rows(std::ostream& os, const DeconfoundRun& run) {
    for (const auto& r : run.results) {
        std::vector<Subgroup> used;
        for (const auto& s : r.subgroups_used) used.push_back(s.subgroup);
        os << csv_escape(r.interest_id) << ',' << label(r.category) << ',' << fmt_double(r.pi) << ','
           << fmt_double(r.mu) << ',' << (r.delta_pct ? fmt_double(*r.delta_pct) : std::string()) << ','
           << join_labels(used) << ',' << join_labels(r.skipped) << '\n';
    }
}

/// Per-subgroup breakdown for the companion JSON file.
inline nlohmann::json breakdown_json(const DeconfoundRun& run) {
    nlohmann::json j;
    j["category"] = label(run.category);
    j["estimator"] = label(run.options.estimator);
    j["weight_basis"] = label(run.options.basis);
    nlohmann::json bl = nlohmann::json::array();
    for (const auto& b : run.baselines.items())
        bl.push_back({{"subgroup", b.subgroup.label()}, {"baseline", b.baseline}, {"n_interests_used", b.n_interests_used}});
    j["baselines"] = bl;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : run.results) {
        nlohmann::json used = nlohmann::json::array();
        for (const auto& s : r.subgroups_used)
            used.push_back({{"subgroup", s.subgroup.label()}, {"division", s.division}, {"baseline", s.baseline},
                            {"weight", s.weight}});
        nlohmann::json skipped = nlohmann::json::array();
        for (auto sg : r.skipped) skipped.push_back(sg.label());
        rows.push_back({{"interest_id", r.interest_id}, {"pi", r.pi}, {"mu", r.mu}, {"subgroups_used", used},
                        {"skipped", skipped}});
    }
    j["interests"] = rows;
    j["no_result"] = run.no_result;
    return j;
}

/// Row read back from deconfound.csv.
struct DeconfoundRow {
    std::string interest_id;
    Category category = Category::None;
    double pi = 0.0;
    double mu = 0.0;
    std::optional<double> delta_pct;
};

inline std::vector<DeconfoundRow> read_deconfound_csv(CsvReader reader) {
    std::vector<std::string> f;
    if (!reader.next(f)) reader.fail("missing header");
    if (f.size() != 7 || f[0] != "interest_id" || f[3] != "mu") reader.fail("unexpected deconfound header");
    std::vector<DeconfoundRow> out;
    while (reader.next(f)) {
        if (f.size() != 7) reader.fail("expected 7 fields");
        DeconfoundRow r;
        r.interest_id = f[0];
        auto c = parse_category(f[1]);
        if (!c) reader.fail("unknown category '" + f[1] + "'");
        r.category = *c;
        r.pi = parse_double(f[2], reader, "pi");
        r.mu = parse_double(f[3], reader, "mu");
        if (!f[4].empty()) r.delta_pct = parse_double(f[4], reader, "delta_pct");
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace deconf
