#pragma once

// Unweighted aggregate political alignment and relevance, ranking tables and
// distribution summaries.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "reach.hpp"

namespace deconf {

/// Raised when alignment is requested for an interest with no partisan followers.
class UndefinedAlignment : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Conservative fraction among partisan followers, C / (C + L).
inline double prob_conservative(int64_t liberal, int64_t conservative) {
    if (liberal < 0 || conservative < 0) throw ValidationError("negative partisan count");
    if (liberal + conservative == 0) throw UndefinedAlignment("alignment undefined: L + C == 0");
    return static_cast<double>(conservative) / static_cast<double>(conservative + liberal);
}

/// Conservatively oriented alignment in [-1, +1]: 2 * (C / (C + L) - 0.5).
inline double political_alignment(int64_t liberal, int64_t conservative) {
    prob_conservative(liberal, conservative);  // validates
    // Same quantity, written so that swapping sides negates it exactly.
    return static_cast<double>(conservative - liberal) / static_cast<double>(conservative + liberal);
}

/// Fraction of all followers who are liberal or conservative.
inline double political_relevance(int64_t liberal, int64_t conservative, int64_t total) {
    if (total <= 0) throw ValidationError("relevance undefined: total == 0");
    if (liberal < 0 || conservative < 0) throw ValidationError("negative partisan count");
    if (liberal + conservative > total)
        throw ValidationError("inconsistent table: L + C = " + std::to_string(liberal + conservative) +
                              " exceeds total " + std::to_string(total));
    return static_cast<double>(liberal + conservative) / static_cast<double>(total);
}

struct AlignmentRecord {
    std::string interest_id;
    std::string interest_name;
    double pi = 0.0;
    double relevance = 0.0;
    int64_t liberal = 0;
    int64_t conservative = 0;
    int64_t total = 0;
};

/// Alignment for every interest with partisan followers in the marginal slice.
/// Interests with L + C == 0 are skipped.
inline std::vector<AlignmentRecord> compute_alignments(const ReachTable& table) {
    if (!table.binarized()) throw ValidationError("alignment requires a binarized table");
    std::vector<AlignmentRecord> out;
    out.reserve(table.interest_count());
    const auto m = Subgroup::marginal();
    for (size_t i = 0; i < table.interest_count(); ++i) {
        int64_t L = table.liberal(i, m), C = table.conservative(i, m);
        if (L + C == 0) continue;
        AlignmentRecord r;
        r.interest_id = table.interest(i).id;
        r.interest_name = table.interest(i).name;
        r.liberal = L;
        r.conservative = C;
        r.total = table.total(i, m).value_or(L + C);
        r.pi = political_alignment(L, C);
        r.relevance = political_relevance(L, C, r.total);
        out.push_back(std::move(r));
    }
    return out;
}

enum class Direction { Liberal, Conservative };

/// Top-k most liberal (ascending pi) or conservative (descending pi) records.
/// Ties resolve by interest_id ascending, so input order never matters.
inline std::vector<AlignmentRecord> rank_interests(const std::vector<AlignmentRecord>& records, size_t k,
                                                   Direction direction) {
    if (records.empty()) throw ValidationError("rank_interests: empty input");
    if (k == 0) throw ValidationError("rank_interests: k must be >= 1");
    std::vector<AlignmentRecord> sorted = records;
    auto cmp = [direction](const AlignmentRecord& a, const AlignmentRecord& b) {
        if (a.pi != b.pi) return direction == Direction::Liberal ? a.pi < b.pi : a.pi > b.pi;
        return a.interest_id < b.interest_id;
    };
    k = std::min(k, sorted.size());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end(), cmp);
    sorted.resize(k);
    return sorted;
}

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;
    double central95_low = 0.0;
    double central95_high = 0.0;
    size_t n = 0;
};

/// Nearest-rank percentile of a sorted sample (p in [0, 100]).
inline double nearest_rank(const std::vector<double>& sorted, double p) {
    const size_t n = sorted.size();
    auto rank = static_cast<size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<size_t>(rank, 1, n);
    return sorted[rank - 1];
}

/// Mean, sample standard deviation (n - 1) and the 2.5th / 97.5th nearest-rank percentiles.
inline SummaryStats summary_stats(const std::vector<double>& values) {
    if (values.empty()) throw ValidationError("summary_stats: empty sample");
    SummaryStats s;
    s.n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.central95_low = nearest_rank(sorted, 2.5);
    s.central95_high = nearest_rank(sorted, 97.5);
    return s;
}

inline constexpr const char* kAlignmentHeader = "interest_id,interest_name,pi,relevance,L,C,total";

inline void write_alignment_csv(std::ostream& os, const std::vector<AlignmentRecord>& records) {
    os << kAlignmentHeader << '\n';
    for (const auto& r : records)
        os << csv_escape(r.interest_id) << ',' << csv_escape(r.interest_name, true) << ',' << fmt_double(r.pi) << ','
           << fmt_double(r.relevance) << ',' << r.liberal << ',' << r.conservative << ',' << r.total << '\n';
}

inline std::vector<AlignmentRecord> read_alignment_csv(CsvReader reader) {
    std::vector<std::string> f;
    if (!reader.next(f)) reader.fail("missing header");
    if (f.size() != 7 || f[0] != "interest_id" || f[2] != "pi") reader.fail("unexpected alignment header");
    std::vector<AlignmentRecord> out;
    while (reader.next(f)) {
        if (f.size() != 7) reader.fail("expected 7 fields");
        AlignmentRecord r;
        r.interest_id = f[0];
        r.interest_name = f[1];
        r.pi = parse_double(f[2], reader, "pi");
        r.relevance = parse_double(f[3], reader, "relevance");
        r.liberal = parse_int(f[4], reader, "L");
        r.conservative = parse_int(f[5], reader, "C");
        r.total = parse_int(f[6], reader, "total");
        out.push_back(std::move(r));
    }
    return out;
}

inline nlohmann::json to_json(const SummaryStats& s) {
    return {{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"central95_low", s.central95_low},
            {"central95_high", s.central95_high}};
}

}  // namespace deconf
