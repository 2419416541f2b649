#pragma once

// Seeded synthetic data with known ground truth: reach tables with planted
// demographic confounding, planted-partition co-follow graphs and
// planted-topic corpora.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "graph.hpp"
#include "reach.hpp"
#include "topics.hpp"

namespace deconf {

/// Deterministic random source. Uniform, normal and gamma draws are computed
/// here rather than by <random> distributions, whose algorithms vary between
/// standard libraries.
class SynthRng {
public:
    explicit SynthRng(uint64_t seed) : engine_(seed) {}

    static uint64_t mix(uint64_t seed, uint64_t stream) {
        uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform() { return uniform01(engine_); }
    uint64_t below(uint64_t n) { return engine_() % n; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// Marsaglia-Tsang gamma(shape, 1).
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0, c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            double x = normal(), v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    int64_t binomial(int64_t n, double p) {
        std::binomial_distribution<int64_t> dist(n, p);
        return dist(engine_);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Zero-padded synthetic interest id shared by all generators.
inline std::string synth_interest_id(size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "i%06zu", i);
    return buf;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct SubgroupSpec {
    Subgroup subgroup;
    double share = 0.0;
    double baseline = 0.5;
    double affinity = 1.0;
};

struct CategorySpec {
    Category category = Category::None;
    std::vector<SubgroupSpec> subgroups;
};

/// A block of interests whose audience is skewed toward one subgroup.
struct PlantedSpec {
    size_t count = 0;
    Subgroup subgroup;
    double affinity = 1.0;
    double intrinsic = 0.0;
};

enum class SamplingMode { Expected, Binomial };

struct ReachSynthConfig {
    size_t n_interests = 1000;
    int64_t audience_scale = 100000;
    double relevance = 0.75;
    int64_t granularity = 1;  // partisan counts are multiples of this
    double gamma = 1.0;
    double intrinsic_mean = 0.0;
    double intrinsic_sd = 0.3;
    double affinity_sd = 0.5;
    SamplingMode sampling = SamplingMode::Expected;
    bool emit_white = false;
    std::vector<CategorySpec> categories;  // the first category drives the marginal rows
    std::vector<PlantedSpec> planted;
    uint64_t seed = 1;

    /// All five categories with US-like shares and baselines.
    static ReachSynthConfig standard() {
        ReachSynthConfig c;
        auto sg = [](Category cat, const char* l) { return *find_subgroup(cat, l); };
        using C = Category;
        c.categories = {
            {C::RaceEthnicity,
             {{sg(C::RaceEthnicity, "asian"), 0.06, 0.30},
              {sg(C::RaceEthnicity, "black"), 0.12, 0.10},
              {sg(C::RaceEthnicity, "hispanic"), 0.15, 0.30},
              {sg(C::RaceEthnicity, "white"), 0.67, 0.55}}},
            {C::Education, {{sg(C::Education, "college"), 0.35, 0.35}, {sg(C::Education, "no-college"), 0.65, 0.50}}},
            {C::Age,
             {{sg(C::Age, "13-21"), 0.15, 0.30},
              {sg(C::Age, "22-37"), 0.35, 0.35},
              {sg(C::Age, "38-57"), 0.30, 0.50},
              {sg(C::Age, "58-100"), 0.20, 0.60}}},
            {C::Gender, {{sg(C::Gender, "male"), 0.48, 0.55}, {sg(C::Gender, "female"), 0.52, 0.40}}},
            {C::Income,
             {{sg(C::Income, "30-40k"), 0.25, 0.45},
              {sg(C::Income, "40-50k"), 0.20, 0.45},
              {sg(C::Income, "50-75k"), 0.30, 0.50},
              {sg(C::Income, "75k+"), 0.25, 0.50}}},
        };
        c.planted = {{20, Subgroup::black(), 6.0, 0.0}};
        return c;
    }

    void validate() const {
        if (n_interests == 0) throw ValidationError("synth: n_interests must be >= 1");
        if (audience_scale <= 0) throw ValidationError("synth: audience_scale must be positive");
        if (!(relevance >= 0.0 && relevance <= 1.0)) throw ValidationError("synth: relevance must lie in [0, 1]");
        if (granularity < 1) throw ValidationError("synth: granularity must be >= 1");
        if (gamma < 0.0) throw ValidationError("synth: gamma must be >= 0");
        if (intrinsic_sd < 0.0 || affinity_sd < 0.0) throw ValidationError("synth: standard deviations must be >= 0");
        if (categories.empty()) throw ValidationError("synth: at least one category required");
        std::set<Category> seen;
        for (const auto& c : categories) {
            if (c.category == Category::None) throw ValidationError("synth: 'none' is not a demographic category");
            if (!seen.insert(c.category).second) throw ValidationError("synth: duplicate category");
            if (c.subgroups.empty()) throw ValidationError("synth: category without subgroups");
            double total = 0.0;
            for (const auto& s : c.subgroups) {
                if (s.subgroup.category() != c.category) throw ValidationError("synth: subgroup outside its category");
                if (s.share < 0.0) throw ValidationError("synth: negative share");
                if (!(s.baseline >= 0.0 && s.baseline <= 1.0)) throw ValidationError("synth: baseline outside [0, 1]");
                if (s.affinity < 0.0) throw ValidationError("synth: negative affinity");
                total += s.share;
            }
            if (total == 0.0) throw ValidationError("synth: degenerate config (all shares zero)");
            if (std::fabs(total - 1.0) > 1e-9)
                throw ValidationError(std::string("synth: shares of '") + label(c.category) + "' must sum to 1");
        }
        for (const auto& p : planted) {
            if (p.affinity < 0.0) throw ValidationError("synth: negative planted affinity");
            if (p.intrinsic < -1.0 || p.intrinsic > 1.0) throw ValidationError("synth: planted intrinsic outside [-1, 1]");
            bool found = false;
            for (const auto& c : categories)
                for (const auto& s : c.subgroups) found |= s.subgroup == p.subgroup;
            if (!found) throw ValidationError(std::string("synth: planted subgroup '") + p.subgroup.label() + "' not configured");
        }
        size_t planted_total = 0;
        for (const auto& p : planted) planted_total += p.count;
        if (planted_total > n_interests) throw ValidationError("synth: more planted interests than interests");
    }
};

struct ReachGroundTruth {
    std::vector<std::string> interest_ids;
    std::vector<double> intrinsic;
    std::vector<int> planted_group;  // -1 when not planted
    std::vector<CategorySpec> categories;

    nlohmann::json to_json() const {
        nlohmann::json j;
        nlohmann::json interests = nlohmann::json::array();
        for (size_t i = 0; i < interest_ids.size(); ++i) {
            nlohmann::json row = {{"interest_id", interest_ids[i]}, {"intrinsic", intrinsic[i]}};
            row["planted_group"] = planted_group[i] >= 0 ? nlohmann::json(planted_group[i]) : nlohmann::json(nullptr);
            interests.push_back(row);
        }
        j["interests"] = interests;
        nlohmann::json cats = nlohmann::json::array();
        for (const auto& c : categories) {
            nlohmann::json sgs = nlohmann::json::array();
            for (const auto& s : c.subgroups)
                sgs.push_back({{"subgroup", s.subgroup.label()}, {"share", s.share}, {"baseline", s.baseline}});
            cats.push_back({{"category", label(c.category)}, {"subgroups", sgs}});
        }
        j["baselines"] = cats;
        return j;
    }
};

namespace detail {

// Splits `total` into integer parts proportional to `weights`; largest remainders
// first, ties toward the lower index.
inline std::vector<int64_t> allocate(int64_t total, const std::vector<double>& weights) {
    std::vector<int64_t> out(weights.size(), 0);
    double sum = 0.0;
    for (double w : weights) sum += w;
    if (total <= 0 || sum <= 0.0) return out;
    std::vector<std::pair<double, size_t>> rem;
    int64_t used = 0;
    for (size_t i = 0; i < weights.size(); ++i) {
        const double exact = static_cast<double>(total) * weights[i] / sum;
        out[i] = static_cast<int64_t>(std::floor(exact));
        used += out[i];
        rem.emplace_back(exact - static_cast<double>(out[i]), i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (size_t r = 0; used < total && r < rem.size(); ++r, ++used) ++out[rem[r].second];
    return out;
}

}  // namespace detail

struct ReachSynthResult {
    ReachTable table;
    ReachGroundTruth truth;
};

/// Generates a reach table. For interest I and subgroup s:
///   audience  A_s  ~ N * share_s * affinity_{I,s}   (integer parts of the interest total)
///   partisan  P_s  = round(relevance * A_s), to a multiple of the granularity
///   cons. share    = sigmoid(logit(baseline_s) + gamma * intrinsic_I)
///   C_s = round(share * P_s), L_s = P_s - C_s, moderates = A_s - P_s
/// Marginal rows are the sums over the first configured category; every
/// category's subgroup totals sum to the marginal total.
inline ReachSynthResult generate_reach(const ReachSynthConfig& cfg) {
    cfg.validate();
    ReachSynthResult res;
    res.truth.categories = cfg.categories;

    std::vector<int> planted_of(cfg.n_interests, -1);
    {
        size_t next = 0;
        for (size_t g = 0; g < cfg.planted.size(); ++g)
            for (size_t k = 0; k < cfg.planted[g].count; ++k) planted_of[next++] = static_cast<int>(g);
    }

    struct Slice {
        Subgroup sg;
        int64_t buckets[kIdeologyCount];
    };
    std::vector<std::vector<Slice>> per_interest(cfg.n_interests);
    std::vector<double> intrinsic(cfg.n_interests);

    parallel_for(cfg.n_interests, [&](size_t i) {
        SynthRng rng(SynthRng::mix(cfg.seed, i));
        const int pg = planted_of[i];
        double a = pg >= 0 ? cfg.planted[static_cast<size_t>(pg)].intrinsic
                           : cfg.intrinsic_mean + cfg.intrinsic_sd * rng.normal();
        a = std::clamp(a, -1.0, 1.0);
        intrinsic[i] = a;

        int64_t total = 0;
        for (size_t c = 0; c < cfg.categories.size(); ++c) {
            const auto& cat = cfg.categories[c];
            std::vector<double> raw;
            for (const auto& s : cat.subgroups) {
                double w = s.share * s.affinity * std::exp(cfg.affinity_sd * rng.normal());
                if (pg >= 0 && cfg.planted[static_cast<size_t>(pg)].subgroup == s.subgroup)
                    w *= cfg.planted[static_cast<size_t>(pg)].affinity;
                raw.push_back(w);
            }
            if (c == 0) {
                double sum = 0.0;
                for (double w : raw) sum += w;
                total = std::llround(static_cast<double>(cfg.audience_scale) * sum);
            }
            auto audience = detail::allocate(total, raw);
            for (size_t k = 0; k < cat.subgroups.size(); ++k) {
                const auto& s = cat.subgroups[k];
                const int64_t A = audience[k];
                const auto g = static_cast<double>(cfg.granularity);
                int64_t P = std::llround(cfg.relevance * static_cast<double>(A) / g) * cfg.granularity;
                while (P > A) P -= cfg.granularity;
                const double share = logistic(logit(s.baseline) + cfg.gamma * a);
                int64_t C = cfg.sampling == SamplingMode::Binomial ? rng.binomial(P, share)
                                                                   : std::llround(share * static_cast<double>(P));
                C = std::clamp<int64_t>(C, 0, P);
                const int64_t L = P - C;
                Slice sl;
                sl.sg = s.subgroup;
                sl.buckets[static_cast<size_t>(Ideology::VeryLiberal)] = L / 2;
                sl.buckets[static_cast<size_t>(Ideology::SomewhatLiberal)] = L - L / 2;
                sl.buckets[static_cast<size_t>(Ideology::Moderate)] = A - P;
                sl.buckets[static_cast<size_t>(Ideology::SomewhatConservative)] = C - C / 2;
                sl.buckets[static_cast<size_t>(Ideology::VeryConservative)] = C / 2;
                sl.buckets[static_cast<size_t>(Ideology::Any)] = A;
                per_interest[i].push_back(sl);
            }
        }
    });

    const Category anchor = cfg.categories.front().category;
    for (size_t i = 0; i < cfg.n_interests; ++i) {
        const std::string id = synth_interest_id(i);
        std::string name = "Interest " + id.substr(1);
        if (planted_of[i] >= 0)
            name += " (planted " + std::string(cfg.planted[static_cast<size_t>(planted_of[i])].subgroup.label()) + ")";
        size_t idx = res.table.add_interest(id, name);
        int64_t marginal[kIdeologyCount] = {0, 0, 0, 0, 0, 0};
        for (const auto& sl : per_interest[i]) {
            if (sl.sg.category() == anchor)
                for (size_t k = 0; k < kIdeologyCount; ++k) marginal[k] += sl.buckets[k];
            if (sl.sg == Subgroup::white() && !cfg.emit_white) continue;
            for (size_t k = 0; k < kIdeologyCount; ++k)
                res.table.set_count(idx, sl.sg, static_cast<Ideology>(k), sl.buckets[k]);
        }
        for (size_t k = 0; k < kIdeologyCount; ++k)
            res.table.set_count(idx, Subgroup::marginal(), static_cast<Ideology>(k), marginal[k]);
        res.truth.interest_ids.push_back(id);
    }
    res.truth.intrinsic = std::move(intrinsic);
    res.truth.planted_group = std::move(planted_of);
    res.table.stats().rows_ingested = res.table.record_count();
    return res;
}

struct GraphSynthConfig {
    std::vector<size_t> blocks = {25, 25, 25, 25};
    double p_in = 0.3;
    double p_out = 0.01;
    int64_t weight_min = 1;
    int64_t weight_max = 10;
    uint64_t seed = 1;

    void validate() const {
        if (blocks.empty()) throw ValidationError("synth graph: no blocks");
        for (auto b : blocks)
            if (b == 0) throw ValidationError("synth graph: empty block");
        if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0))
            throw ValidationError("synth graph: probabilities must lie in [0, 1]");
        if (!(p_in > p_out)) throw ValidationError("synth graph: p_in must exceed p_out");
        if (weight_min < 1 || weight_max < weight_min) throw ValidationError("synth graph: invalid weight range");
    }
};

struct GraphSynthResult {
    std::vector<std::string> ids;
    std::vector<uint32_t> labels;
    std::vector<Edge> edges;  // u < v, sorted
};

/// Planted-partition sampling with integer weights. Pairs are visited with
/// geometric skips, so cost scales with the number of edges.
inline GraphSynthResult generate_planted_graph(const GraphSynthConfig& cfg) {
    cfg.validate();
    GraphSynthResult g;
    size_t n = 0;
    std::vector<size_t> block_end;
    for (size_t b = 0; b < cfg.blocks.size(); ++b) {
        for (size_t k = 0; k < cfg.blocks[b]; ++k) {
            g.ids.push_back(synth_interest_id(n++));
            g.labels.push_back(static_cast<uint32_t>(b));
        }
        block_end.push_back(n);
    }
    SynthRng rng(SynthRng::mix(cfg.seed, 0x6772617068ull));
    const int64_t span = cfg.weight_max - cfg.weight_min + 1;
    auto sample_range = [&](uint32_t u, size_t lo, size_t hi, double p) {
        if (p <= 0.0 || lo >= hi) return;
        const double log_q = p < 1.0 ? std::log1p(-p) : 0.0;
        size_t v = lo;
        while (true) {
            if (p < 1.0) {
                double r = rng.uniform();
                while (r <= 0.0) r = rng.uniform();
                const double skip = std::floor(std::log(r) / log_q);
                if (skip >= static_cast<double>(hi - v)) return;
                v += static_cast<size_t>(skip);
            }
            if (v >= hi) return;
            const int64_t w = cfg.weight_min + static_cast<int64_t>(rng.below(static_cast<uint64_t>(span)));
            g.edges.push_back({u, static_cast<uint32_t>(v), w});
            ++v;
        }
    };
    for (uint32_t u = 0; u < n; ++u) {
        const size_t end = block_end[g.labels[u]];
        sample_range(u, u + 1, end, cfg.p_in);
        sample_range(u, end, n, cfg.p_out);
    }
    return g;
}

inline void write_synth_edges_csv(std::ostream& os, const GraphSynthResult& g) {
    os << "src_interest,dst_interest,cofollow_count\n";
    std::string line;
    for (const auto& e : g.edges) {
        line = g.ids[e.u];
        line += ',';
        line += g.ids[e.v];
        line += ',';
        line += std::to_string(e.weight);
        line += '\n';
        os << line;
    }
}

struct CorpusSynthConfig {
    size_t k = 3;
    size_t bank_size = 10;
    size_t overlap = 0;       // words shared by consecutive banks
    size_t docs = 300;
    size_t doc_length = 50;
    double mixing = 0.0;      // Dirichlet concentration of doc mixtures; 0 = one topic per doc
    uint64_t seed = 1;

    size_t vocab_size() const { return k * (bank_size - overlap) + overlap; }

    void validate() const {
        if (k == 0 || bank_size == 0 || docs == 0 || doc_length == 0)
            throw ValidationError("synth corpus: sizes must be positive");
        if (overlap >= bank_size) throw ValidationError("synth corpus: overlap must be smaller than bank size");
        if (mixing < 0.0) throw ValidationError("synth corpus: mixing must be >= 0");
    }
};

struct CorpusSynthResult {
    std::vector<TokenRow> rows;
    std::vector<std::vector<double>> phi;       // planted topic-word distributions
    std::vector<std::vector<double>> mixtures;  // per-document topic mixtures
    std::vector<std::string> vocab;
};

/// Documents drawn from topic mixtures over word banks; each bank is uniform
/// over its words.
inline CorpusSynthResult generate_planted_corpus(const CorpusSynthConfig& cfg) {
    cfg.validate();
    CorpusSynthResult out;
    const size_t v = cfg.vocab_size();
    for (size_t w = 0; w < v; ++w) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "word%04zu", w);
        out.vocab.push_back(buf);
    }
    const size_t stride = cfg.bank_size - cfg.overlap;
    out.phi.assign(cfg.k, std::vector<double>(v, 0.0));
    for (size_t t = 0; t < cfg.k; ++t)
        for (size_t j = 0; j < cfg.bank_size; ++j) out.phi[t][t * stride + j] = 1.0 / static_cast<double>(cfg.bank_size);

    SynthRng rng(SynthRng::mix(cfg.seed, 0x636f72707573ull));
    for (size_t d = 0; d < cfg.docs; ++d) {
        std::vector<double> mix(cfg.k, 0.0);
        if (cfg.mixing == 0.0 || cfg.k == 1) {
            mix[rng.below(cfg.k)] = 1.0;
        } else {
            double s = 0.0;
            for (auto& m : mix) s += (m = rng.gamma(cfg.mixing));
            if (s <= 0.0) {
                std::fill(mix.begin(), mix.end(), 0.0);
                mix[rng.below(cfg.k)] = 1.0;
            } else {
                for (auto& m : mix) m /= s;
            }
        }
        const std::string id = synth_interest_id(d);
        for (size_t n = 0; n < cfg.doc_length; ++n) {
            double u = rng.uniform(), cum = 0.0;
            size_t t = cfg.k - 1;
            for (size_t k = 0; k < cfg.k; ++k) {
                cum += mix[k];
                if (u < cum) {
                    t = k;
                    break;
                }
            }
            const size_t w = t * stride + rng.below(cfg.bank_size);
            out.rows.push_back({id, out.vocab[w]});
        }
        out.mixtures.push_back(std::move(mix));
    }
    return out;
}

// --- JSON configuration -----------------------------------------------------

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok |= key == a;
        if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(where + ": key '" + key + "' has the wrong type");
    }
}

}  // namespace detail

inline ReachSynthConfig reach_config_from_json(const nlohmann::json& j) {
    const std::string where = "reach config";
    detail::check_keys(j,
                       {"n_interests", "audience_scale", "relevance", "granularity", "gamma", "intrinsic_mean", "intrinsic_sd",
                        "affinity_sd", "sampling", "emit_white", "categories", "planted", "seed"},
                       where);
    ReachSynthConfig c = j.contains("categories") ? ReachSynthConfig{} : ReachSynthConfig::standard();
    detail::read_opt(j, "n_interests", c.n_interests, where);
    detail::read_opt(j, "audience_scale", c.audience_scale, where);
    detail::read_opt(j, "relevance", c.relevance, where);
    detail::read_opt(j, "granularity", c.granularity, where);
    detail::read_opt(j, "gamma", c.gamma, where);
    detail::read_opt(j, "intrinsic_mean", c.intrinsic_mean, where);
    detail::read_opt(j, "intrinsic_sd", c.intrinsic_sd, where);
    detail::read_opt(j, "affinity_sd", c.affinity_sd, where);
    detail::read_opt(j, "emit_white", c.emit_white, where);
    detail::read_opt(j, "seed", c.seed, where);
    if (j.contains("sampling")) {
        std::string s;
        detail::read_opt(j, "sampling", s, where);
        if (s == "expected")
            c.sampling = SamplingMode::Expected;
        else if (s == "binomial")
            c.sampling = SamplingMode::Binomial;
        else
            throw ValidationError(where + ": sampling must be expected|binomial");
    }
    if (j.contains("categories")) {
        for (const auto& cj : j.at("categories")) {
            detail::check_keys(cj, {"category", "subgroups"}, where + " category");
            CategorySpec spec;
            auto cat = parse_category(cj.value("category", std::string()));
            if (!cat) throw ValidationError(where + ": unknown category");
            spec.category = *cat;
            for (const auto& sj : cj.at("subgroups")) {
                detail::check_keys(sj, {"label", "share", "baseline", "affinity"}, where + " subgroup");
                auto sg = find_subgroup(*cat, sj.value("label", std::string()));
                if (!sg) throw ValidationError(where + ": unknown subgroup '" + sj.value("label", std::string()) + "'");
                SubgroupSpec s{*sg, 0.0, 0.5, 1.0};
                detail::read_opt(sj, "share", s.share, where);
                detail::read_opt(sj, "baseline", s.baseline, where);
                detail::read_opt(sj, "affinity", s.affinity, where);
                spec.subgroups.push_back(s);
            }
            c.categories.push_back(std::move(spec));
        }
    }
    if (j.contains("planted")) {
        c.planted.clear();
        for (const auto& pj : j.at("planted")) {
            detail::check_keys(pj, {"count", "category", "subgroup", "affinity", "intrinsic"}, where + " planted");
            auto cat = parse_category(pj.value("category", std::string()));
            if (!cat) throw ValidationError(where + ": planted entry has unknown category");
            auto sg = find_subgroup(*cat, pj.value("subgroup", std::string()));
            if (!sg) throw ValidationError(where + ": planted entry has unknown subgroup");
            PlantedSpec p{0, *sg, 1.0, 0.0};
            detail::read_opt(pj, "count", p.count, where);
            detail::read_opt(pj, "affinity", p.affinity, where);
            detail::read_opt(pj, "intrinsic", p.intrinsic, where);
            c.planted.push_back(p);
        }
    }
    c.validate();
    return c;
}

inline GraphSynthConfig graph_config_from_json(const nlohmann::json& j) {
    const std::string where = "graph config";
    detail::check_keys(j, {"blocks", "p_in", "p_out", "weight_min", "weight_max", "seed"}, where);
    GraphSynthConfig c;
    detail::read_opt(j, "blocks", c.blocks, where);
    detail::read_opt(j, "p_in", c.p_in, where);
    detail::read_opt(j, "p_out", c.p_out, where);
    detail::read_opt(j, "weight_min", c.weight_min, where);
    detail::read_opt(j, "weight_max", c.weight_max, where);
    detail::read_opt(j, "seed", c.seed, where);
    c.validate();
    return c;
}

inline CorpusSynthConfig corpus_config_from_json(const nlohmann::json& j) {
    const std::string where = "corpus config";
    detail::check_keys(j, {"k", "bank_size", "overlap", "docs", "doc_length", "mixing", "seed"}, where);
    CorpusSynthConfig c;
    detail::read_opt(j, "k", c.k, where);
    detail::read_opt(j, "bank_size", c.bank_size, where);
    detail::read_opt(j, "overlap", c.overlap, where);
    detail::read_opt(j, "docs", c.docs, where);
    detail::read_opt(j, "doc_length", c.doc_length, where);
    detail::read_opt(j, "mixing", c.mixing, where);
    detail::read_opt(j, "seed", c.seed, where);
    c.validate();
    return c;
}

inline nlohmann::json to_json(const ReachSynthConfig& c) {
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& cat : c.categories) {
        nlohmann::json sgs = nlohmann::json::array();
        for (const auto& s : cat.subgroups)
            sgs.push_back({{"label", s.subgroup.label()}, {"share", s.share}, {"baseline", s.baseline},
                           {"affinity", s.affinity}});
        cats.push_back({{"category", label(cat.category)}, {"subgroups", sgs}});
    }
    nlohmann::json planted = nlohmann::json::array();
    for (const auto& p : c.planted)
        planted.push_back({{"count", p.count},
                           {"category", label(p.subgroup.category())},
                           {"subgroup", p.subgroup.label()},
                           {"affinity", p.affinity},
                           {"intrinsic", p.intrinsic}});
    return {{"n_interests", c.n_interests},
            {"audience_scale", c.audience_scale},
            {"relevance", c.relevance},
            {"granularity", c.granularity},
            {"gamma", c.gamma},
            {"intrinsic_mean", c.intrinsic_mean},
            {"intrinsic_sd", c.intrinsic_sd},
            {"affinity_sd", c.affinity_sd},
            {"sampling", c.sampling == SamplingMode::Binomial ? "binomial" : "expected"},
            {"emit_white", c.emit_white},
            {"categories", cats},
            {"planted", planted},
            {"seed", c.seed}};
}

inline nlohmann::json to_json(const GraphSynthConfig& c) {
    return {{"blocks", c.blocks},         {"p_in", c.p_in},
            {"p_out", c.p_out},           {"weight_min", c.weight_min},
            {"weight_max", c.weight_max}, {"seed", c.seed}};
}

inline nlohmann::json to_json(const CorpusSynthConfig& c) {
    return {{"k", c.k},           {"bank_size", c.bank_size},   {"overlap", c.overlap}, {"docs", c.docs},
            {"doc_length", c.doc_length}, {"mixing", c.mixing}, {"seed", c.seed}};
}

}  // namespace deconf
