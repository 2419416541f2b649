#pragma once

// Reach-count data model: ideology buckets, demographic subgroups, the dense
// per-interest count store, CSV ingest/serialization and the preprocessing
// steps applied before any alignment is computed.

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace deconf {

enum class Ideology : uint8_t {
    VeryLiberal,
    SomewhatLiberal,
    Moderate,
    SomewhatConservative,
    VeryConservative,
    Any,
};
inline constexpr size_t kIdeologyCount = 6;

inline constexpr std::array<const char*, kIdeologyCount> kIdeologyLabels = {
    "very_liberal", "somewhat_liberal", "moderate", "somewhat_conservative", "very_conservative", "any"};

inline const char* label(Ideology i) { return kIdeologyLabels[static_cast<size_t>(i)]; }

inline std::optional<Ideology> parse_ideology(std::string_view s) {
    auto lower = to_lower(trim(s));
    for (size_t i = 0; i < kIdeologyCount; ++i)
        if (lower == kIdeologyLabels[i]) return static_cast<Ideology>(i);
    return std::nullopt;
}

enum class Category : uint8_t { RaceEthnicity, Education, Age, Gender, Income, None };
inline constexpr size_t kCategoryCount = 6;

inline constexpr std::array<const char*, kCategoryCount> kCategoryLabels = {
    "race_ethnicity", "education", "age", "gender", "income", "none"};

/// The five demographic categories that can be deconfounded.
inline constexpr std::array<Category, 5> kDemographicCategories = {
    Category::RaceEthnicity, Category::Education, Category::Age, Category::Gender, Category::Income};

inline const char* label(Category c) { return kCategoryLabels[static_cast<size_t>(c)]; }

inline std::optional<Category> parse_category(std::string_view s) {
    auto lower = to_lower(trim(s));
    for (size_t i = 0; i < kCategoryCount; ++i)
        if (lower == kCategoryLabels[i]) return static_cast<Category>(i);
    return std::nullopt;
}

struct SubgroupInfo {
    Category category;
    const char* label;
};

// Canonical subgroup table. Index 0 is the marginal (no demographic condition).
// The last age bin is 58-100; the source lists 57 at both ends of adjacent bins.
inline constexpr std::array<SubgroupInfo, 17> kSubgroups = {{
    {Category::None, "all"},
    {Category::RaceEthnicity, "asian"},
    {Category::RaceEthnicity, "black"},
    {Category::RaceEthnicity, "hispanic"},
    {Category::RaceEthnicity, "white"},
    {Category::Education, "college"},
    {Category::Education, "no-college"},
    {Category::Age, "13-21"},
    {Category::Age, "22-37"},
    {Category::Age, "38-57"},
    {Category::Age, "58-100"},
    {Category::Gender, "male"},
    {Category::Gender, "female"},
    {Category::Income, "30-40k"},
    {Category::Income, "40-50k"},
    {Category::Income, "50-75k"},
    {Category::Income, "75k+"},
}};
inline constexpr size_t kSubgroupCount = kSubgroups.size();

/// Strongly typed index into the canonical subgroup table.
class Subgroup {
public:
    constexpr Subgroup() = default;
    constexpr explicit Subgroup(uint8_t index) : index_(index) {}

    static constexpr Subgroup marginal() { return Subgroup(0); }
    static constexpr Subgroup asian() { return Subgroup(1); }
    static constexpr Subgroup black() { return Subgroup(2); }
    static constexpr Subgroup hispanic() { return Subgroup(3); }
    static constexpr Subgroup white() { return Subgroup(4); }

    constexpr size_t index() const { return index_; }
    constexpr Category category() const { return kSubgroups[index_].category; }
    constexpr const char* label() const { return kSubgroups[index_].label; }
    constexpr bool is_marginal() const { return index_ == 0; }

    friend constexpr bool operator==(Subgroup, Subgroup) = default;
    friend constexpr auto operator<=>(Subgroup, Subgroup) = default;

private:
    uint8_t index_ = 0;
};

/// Subgroups of one category in canonical order.
inline std::vector<Subgroup> subgroups_of(Category c) {
    std::vector<Subgroup> out;
    for (size_t i = 0; i < kSubgroupCount; ++i)
        if (kSubgroups[i].category == c) out.emplace_back(static_cast<uint8_t>(i));
    return out;
}

inline std::optional<Subgroup> find_subgroup(Category c, std::string_view label_text) {
    auto lower = to_lower(trim(label_text));
    for (size_t i = 0; i < kSubgroupCount; ++i)
        if (kSubgroups[i].category == c && lower == kSubgroups[i].label) return Subgroup(static_cast<uint8_t>(i));
    return std::nullopt;
}

struct ReachRecord {
    std::string interest_id;
    std::string interest_name;
    Ideology ideology;
    Subgroup subgroup;
    int64_t count;
};

/// Column names used to locate fields in a reach file header.
struct ReachSchema {
    std::string interest_id = "interest_id";
    std::string interest_name = "interest_name";
    std::string ideology = "ideology";
    std::string demo_category = "demo_category";
    std::string demo_subgroup = "demo_subgroup";
    std::string count = "count";
};

inline constexpr const char* kReachHeader = "interest_id,interest_name,ideology,demo_category,demo_subgroup,count";

struct PreprocessStats {
    size_t rows_ingested = 0;
    size_t white_slices_derived = 0;
    size_t white_slices_clamped = 0;
    size_t white_slices_missing_marginal = 0;
    size_t interests_removed = 0;
    size_t censored_flags = 0;
};

/// Dense reach store: for every interest a 17 x 6 grid of optional counts.
class ReachTable {
public:
    struct Interest {
        std::string id;
        std::string name;
    };

    static constexpr int64_t kAbsent = -1;
    static constexpr size_t kSlots = kSubgroupCount * kIdeologyCount;

    size_t interest_count() const { return interests_.size(); }
    const std::vector<Interest>& interests() const { return interests_; }
    const Interest& interest(size_t i) const { return interests_.at(i); }

    std::optional<size_t> find(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Adds an interest, or returns the existing index for a known id.
    size_t add_interest(const std::string& id, const std::string& name) {
        auto it = index_.find(id);
        if (it != index_.end()) return it->second;
        size_t idx = interests_.size();
        interests_.push_back({id, name});
        index_.emplace(id, idx);
        counts_.resize(counts_.size() + kSlots, kAbsent);
        censored_.resize(censored_.size() + kSlots, 0);
        if (binarized_) lc_.resize(lc_.size() + kSubgroupCount * 2, 0);
        return idx;
    }

    std::optional<int64_t> count(size_t interest, Subgroup sg, Ideology ideo) const {
        int64_t v = counts_[slot(interest, sg, ideo)];
        if (v == kAbsent) return std::nullopt;
        return v;
    }

    bool has(size_t interest, Subgroup sg, Ideology ideo) const {
        return counts_[slot(interest, sg, ideo)] != kAbsent;
    }

    /// Count treating an absent cell as zero.
    int64_t count_or_zero(size_t interest, Subgroup sg, Ideology ideo) const {
        int64_t v = counts_[slot(interest, sg, ideo)];
        return v == kAbsent ? 0 : v;
    }

    void set_count(size_t interest, Subgroup sg, Ideology ideo, int64_t value) {
        if (value < 0) throw ValidationError("negative count for interest '" + interests_.at(interest).id + "'");
        counts_[slot(interest, sg, ideo)] = value;
        if (binarized_) refresh_lc(interest, sg);
    }

    /// True when any ideology cell exists for the slice.
    bool has_subgroup(size_t interest, Subgroup sg) const {
        for (size_t k = 0; k < kIdeologyCount; ++k)
            if (counts_[slot(interest, sg, static_cast<Ideology>(k))] != kAbsent) return true;
        return false;
    }

    bool binarized() const { return binarized_; }
    int64_t liberal(size_t interest, Subgroup sg) const { return lc_at(interest, sg, 0); }
    int64_t conservative(size_t interest, Subgroup sg) const { return lc_at(interest, sg, 1); }

    /// Sum of the five ideology buckets; nullopt when none is present.
    std::optional<int64_t> bucket_sum(size_t interest, Subgroup sg) const {
        bool any = false;
        int64_t s = 0;
        for (size_t k = 0; k < kIdeologyCount - 1; ++k) {
            int64_t v = counts_[slot(interest, sg, static_cast<Ideology>(k))];
            if (v != kAbsent) {
                any = true;
                s += v;
            }
        }
        if (!any) return std::nullopt;
        return s;
    }

    /// Ideology-unconditioned reach: the Any cell, else the bucket sum.
    std::optional<int64_t> total(size_t interest, Subgroup sg) const {
        if (auto any = count(interest, sg, Ideology::Any)) return any;
        return bucket_sum(interest, sg);
    }

    bool censored(size_t interest, Subgroup sg, Ideology ideo) const {
        return censored_[slot(interest, sg, ideo)] != 0;
    }
    void set_censored(size_t interest, Subgroup sg, Ideology ideo, bool flag) {
        censored_[slot(interest, sg, ideo)] = flag ? 1 : 0;
    }

    int64_t censor_floor() const { return censor_floor_; }
    void set_censor_floor(int64_t floor) { censor_floor_ = floor; }

    const std::vector<Warning>& warnings() const { return warnings_; }
    void add_warning(Warning w) { warnings_.push_back(std::move(w)); }

    const PreprocessStats& stats() const { return stats_; }
    PreprocessStats& stats() { return stats_; }

    /// Number of present cells.
    size_t record_count() const {
        size_t n = 0;
        for (auto v : counts_)
            if (v != kAbsent) ++n;
        return n;
    }

    /// Materialized records in canonical order (interest, subgroup, ideology).
    std::vector<ReachRecord> records() const {
        std::vector<ReachRecord> out;
        for (size_t i = 0; i < interests_.size(); ++i)
            for (size_t g = 0; g < kSubgroupCount; ++g)
                for (size_t k = 0; k < kIdeologyCount; ++k) {
                    auto sg = Subgroup(static_cast<uint8_t>(g));
                    auto ideo = static_cast<Ideology>(k);
                    int64_t v = counts_[slot(i, sg, ideo)];
                    if (v != kAbsent) out.push_back({interests_[i].id, interests_[i].name, ideo, sg, v});
                }
        return out;
    }

    /// Fills the L/C cache for every slice and marks the table binarized.
    void binarize() {
        lc_.assign(interests_.size() * kSubgroupCount * 2, 0);
        binarized_ = true;
        for (size_t i = 0; i < interests_.size(); ++i)
            for (size_t g = 0; g < kSubgroupCount; ++g) refresh_lc(i, Subgroup(static_cast<uint8_t>(g)));
    }

    /// Keeps the interests whose flag is set, preserving order.
    ReachTable retain(const std::vector<bool>& keep) const {
        ReachTable out;
        out.censor_floor_ = censor_floor_;
        out.warnings_ = warnings_;
        out.stats_ = stats_;
        out.binarized_ = binarized_;
        for (size_t i = 0; i < interests_.size(); ++i) {
            if (!keep[i]) continue;
            size_t j = out.interests_.size();
            out.interests_.push_back(interests_[i]);
            out.index_.emplace(interests_[i].id, j);
            out.counts_.insert(out.counts_.end(), counts_.begin() + i * kSlots, counts_.begin() + (i + 1) * kSlots);
            out.censored_.insert(out.censored_.end(), censored_.begin() + i * kSlots,
                                 censored_.begin() + (i + 1) * kSlots);
            if (binarized_)
                out.lc_.insert(out.lc_.end(), lc_.begin() + i * kSubgroupCount * 2,
                               lc_.begin() + (i + 1) * kSubgroupCount * 2);
        }
        return out;
    }

private:
    static size_t slot(size_t interest, Subgroup sg, Ideology ideo) {
        return interest * kSlots + sg.index() * kIdeologyCount + static_cast<size_t>(ideo);
    }

    int64_t lc_at(size_t interest, Subgroup sg, size_t side) const {
        if (!binarized_) throw ValidationError("reach table is not binarized");
        return lc_[(interest * kSubgroupCount + sg.index()) * 2 + side];
    }

    void refresh_lc(size_t interest, Subgroup sg) {
        size_t base = (interest * kSubgroupCount + sg.index()) * 2;
        lc_[base] = count_or_zero(interest, sg, Ideology::VeryLiberal) +
                    count_or_zero(interest, sg, Ideology::SomewhatLiberal);
        lc_[base + 1] = count_or_zero(interest, sg, Ideology::VeryConservative) +
                        count_or_zero(interest, sg, Ideology::SomewhatConservative);
    }

    std::vector<Interest> interests_;
    std::unordered_map<std::string, size_t> index_;
    std::vector<int64_t> counts_;
    std::vector<uint8_t> censored_;
    std::vector<int64_t> lc_;
    bool binarized_ = false;
    int64_t censor_floor_ = 20;
    std::vector<Warning> warnings_;
    PreprocessStats stats_;
};

/// Parses reach rows from an in-memory CSV buffer.
inline ReachTable parse_reach(CsvReader reader, const ReachSchema& schema = {}) {
    std::vector<std::string> fields;
    if (!reader.next(fields)) reader.fail("missing header");

    auto column = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < fields.size(); ++i)
            if (trim(fields[i]) == name) return i;
        reader.fail("header lacks column '" + name + "'");
    };
    const size_t c_id = column(schema.interest_id);
    const size_t c_name = column(schema.interest_name);
    const size_t c_ideo = column(schema.ideology);
    const size_t c_cat = column(schema.demo_category);
    const size_t c_sub = column(schema.demo_subgroup);
    const size_t c_count = column(schema.count);
    const size_t width = fields.size();

    ReachTable table;
    size_t rows = 0;
    while (reader.next(fields)) {
        if (fields.size() != width)
            reader.fail("expected " + std::to_string(width) + " fields, got " + std::to_string(fields.size()));
        auto ideo = parse_ideology(fields[c_ideo]);
        if (!ideo) reader.fail("unknown ideology label '" + fields[c_ideo] + "'");
        auto cat = parse_category(fields[c_cat]);
        if (!cat) reader.fail("unknown demographic category '" + fields[c_cat] + "'");
        auto sg = find_subgroup(*cat, fields[c_sub]);
        if (!sg) reader.fail("unknown subgroup '" + fields[c_sub] + "' for category '" + fields[c_cat] + "'");
        int64_t count = parse_int(fields[c_count], reader, "count");
        if (count < 0) reader.fail("negative count " + std::to_string(count));
        const std::string& id = fields[c_id];
        if (id.empty()) reader.fail("empty interest_id");
        size_t idx = table.add_interest(id, fields[c_name]);
        if (table.has(idx, *sg, *ideo))
            reader.fail("duplicate key (" + id + ", " + label(*ideo) + ", " + label(*cat) + "/" + sg->label() + ")");
        table.set_count(idx, *sg, *ideo, count);
        ++rows;
    }
    table.stats().rows_ingested = rows;
    return table;
}

inline ReachTable ingest_reach(const std::string& path, const ReachSchema& schema = {}) {
    return parse_reach(CsvReader::from_file(path), schema);
}

/// Canonical serialization: header, then interests in table order, subgroups
/// and ideology buckets in canonical order. Names are always quoted.
inline void write_reach(std::ostream& os, const ReachTable& table) {
    os << kReachHeader << '\n';
    std::string line;
    for (size_t i = 0; i < table.interest_count(); ++i) {
        const auto& in = table.interest(i);
        std::string prefix = csv_escape(in.id) + "," + csv_escape(in.name, true) + ",";
        for (size_t g = 0; g < kSubgroupCount; ++g) {
            Subgroup sg(static_cast<uint8_t>(g));
            for (size_t k = 0; k < kIdeologyCount; ++k) {
                auto ideo = static_cast<Ideology>(k);
                auto v = table.count(i, sg, ideo);
                if (!v) continue;
                line = prefix;
                line += label(ideo);
                line += ',';
                line += label(sg.category());
                line += ',';
                line += sg.label();
                line += ',';
                line += std::to_string(*v);
                line += '\n';
                os << line;
            }
        }
    }
}

inline std::string serialize_reach(const ReachTable& table) {
    std::ostringstream ss;
    write_reach(ss, table);
    return ss.str();
}

/// Derives liberal (very + somewhat liberal) and conservative (very + somewhat
/// conservative) counts for every (interest, subgroup) slice. Idempotent.
inline ReachTable binarize_ideology(ReachTable table) {
    table.binarize();
    return table;
}

/// Estimates White reach per (interest, ideology) slice as
/// total - Asian - (1 - rate) * Black - (1 - rate) * Hispanic,
/// rounded to nearest (ties away from zero) and clamped at zero.
inline ReachTable estimate_white(ReachTable table, double multiracial_rate = 0.12) {
    if (multiracial_rate < 0.0 || multiracial_rate > 1.0)
        throw ValidationError("multiracial rate must lie in [0, 1]");
    const double keep = 1.0 - multiracial_rate;
    auto& st = table.stats();
    for (size_t i = 0; i < table.interest_count(); ++i) {
        bool has_race = table.has_subgroup(i, Subgroup::asian()) || table.has_subgroup(i, Subgroup::black()) ||
                        table.has_subgroup(i, Subgroup::hispanic());
        if (!has_race) continue;
        for (size_t k = 0; k < kIdeologyCount; ++k) {
            auto ideo = static_cast<Ideology>(k);
            bool slice_has_race = table.has(i, Subgroup::asian(), ideo) || table.has(i, Subgroup::black(), ideo) ||
                                  table.has(i, Subgroup::hispanic(), ideo);
            if (!slice_has_race) continue;
            if (table.has(i, Subgroup::white(), ideo)) continue;  // supplied directly
            auto total = table.count(i, Subgroup::marginal(), ideo);
            if (!total) {
                ++st.white_slices_missing_marginal;
                table.add_warning({"white_missing_marginal",
                                   "no marginal count; White not derived",
                                   {{"interest_id", table.interest(i).id}, {"ideology", label(ideo)}}});
                continue;
            }
            double raw = static_cast<double>(*total) -
                         static_cast<double>(table.count_or_zero(i, Subgroup::asian(), ideo)) -
                         keep * static_cast<double>(table.count_or_zero(i, Subgroup::black(), ideo)) -
                         keep * static_cast<double>(table.count_or_zero(i, Subgroup::hispanic(), ideo));
            int64_t white = std::llround(raw);
            if (white < 0) {
                ++st.white_slices_clamped;
                table.add_warning({"white_clamped",
                                   "estimated White reach negative; clamped to 0",
                                   {{"interest_id", table.interest(i).id}, {"ideology", label(ideo)}, {"raw", raw}}});
                white = 0;
            }
            table.set_count(i, Subgroup::white(), ideo, white);
            ++st.white_slices_derived;
        }
    }
    return table;
}

/// Drops interests whose marginal liberal + conservative count is zero.
inline ReachTable filter_political(const ReachTable& table) {
    if (!table.binarized()) throw ValidationError("filter_political requires a binarized table");
    std::vector<bool> keep(table.interest_count());
    size_t removed = 0;
    for (size_t i = 0; i < table.interest_count(); ++i) {
        int64_t partisan =
            table.liberal(i, Subgroup::marginal()) + table.conservative(i, Subgroup::marginal());
        keep[i] = partisan > 0;
        if (!keep[i]) ++removed;
    }
    ReachTable out = table.retain(keep);
    out.stats().interests_removed += removed;
    return out;
}

/// Marks cells equal to the API censoring floor. Counts are never modified.
/// Nonzero cells below the floor cannot come from the API; they are flagged
/// with a warning. Zero means no reach and is not flagged.
inline ReachTable flag_censored(ReachTable table, int64_t floor = 20) {
    table.set_censor_floor(floor);
    size_t flags = 0;
    for (size_t i = 0; i < table.interest_count(); ++i)
        for (size_t g = 0; g < kSubgroupCount; ++g)
            for (size_t k = 0; k < kIdeologyCount; ++k) {
                Subgroup sg(static_cast<uint8_t>(g));
                auto ideo = static_cast<Ideology>(k);
                auto v = table.count(i, sg, ideo);
                bool flag = v && *v > 0 && *v <= floor;
                table.set_censored(i, sg, ideo, flag);
                if (!flag) continue;
                ++flags;
                if (*v < floor)
                    table.add_warning({"below_censor_floor",
                                       "count below the documented censoring floor",
                                       {{"interest_id", table.interest(i).id},
                                        {"subgroup", sg.label()},
                                        {"ideology", label(ideo)},
                                        {"count", *v},
                                        {"floor", floor}}});
            }
    table.stats().censored_flags = flags;
    return table;
}

}  // namespace deconf
