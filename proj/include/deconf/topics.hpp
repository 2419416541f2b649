#pragma once

// Topic modeling over per-interest category "documents": token preprocessing,
// LDA by collapsed Gibbs sampling, perplexity and UMass coherence, model
// selection over a K grid, topic-level alignment shifts and intertopic maps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "shiftstats.hpp"
#include "special.hpp"

namespace deconf {

struct Corpus {
    std::vector<std::string> doc_ids;
    std::vector<std::vector<uint32_t>> docs;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, uint32_t> word_index;
    std::vector<std::string> excluded;  // interests with no surviving tokens

    size_t doc_count() const { return docs.size(); }
    size_t vocab_size() const { return vocab.size(); }
    size_t token_count() const {
        size_t n = 0;
        for (const auto& d : docs) n += d.size();
        return n;
    }

    std::optional<size_t> find_doc(const std::string& id) const {
        for (size_t i = 0; i < doc_ids.size(); ++i)
            if (doc_ids[i] == id) return i;
        return std::nullopt;
    }

    /// Appends a document, growing the vocabulary as needed.
    void add_document(const std::string& id, const std::vector<std::string>& tokens) {
        std::vector<uint32_t> doc;
        doc.reserve(tokens.size());
        for (const auto& t : tokens) {
            auto [it, inserted] = word_index.emplace(t, static_cast<uint32_t>(vocab.size()));
            if (inserted) vocab.push_back(t);
            doc.push_back(it->second);
        }
        doc_ids.push_back(id);
        docs.push_back(std::move(doc));
    }
};

/// Exact tokens plus prefix patterns written with a trailing '*'.
class Stoplist {
public:
    Stoplist() = default;
    explicit Stoplist(const std::vector<std::string>& entries) {
        for (const auto& e : entries) add(e);
    }

    void add(const std::string& entry) {
        auto t = trim(entry);
        if (t.empty() || t[0] == '#') return;
        if (t.back() == '*')
            prefixes_.push_back(t.substr(0, t.size() - 1));
        else
            exact_.insert(t);
    }

    bool matches(const std::string& token) const {
        if (exact_.count(token)) return true;
        for (const auto& p : prefixes_)
            if (token.compare(0, p.size(), p) == 0) return true;
        return false;
    }

    bool empty() const { return exact_.empty() && prefixes_.empty(); }

    static Stoplist from_file(const std::string& path) {
        Stoplist s;
        std::istringstream in(read_file(path));
        std::string line;
        while (std::getline(in, line)) s.add(line);
        return s;
    }

private:
    std::unordered_set<std::string> exact_;
    std::vector<std::string> prefixes_;
};

/// Bare four-digit year tokens such as "1993".
inline bool is_year_token(std::string_view t) {
    return t.size() == 4 && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct TokenRow {
    std::string interest_id;
    std::string token;
};

/// Drops stoplisted and year tokens. Interests left with no tokens (including
/// interests in `universe` that have no rows at all) are excluded and listed.
/// Documents keep first-appearance order.
inline Corpus preprocess_tokens(const std::vector<TokenRow>& rows, const Stoplist& stoplist,
                                const std::vector<std::string>& universe = {}) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<std::string>> kept;
    for (const auto& id : universe)
        if (kept.emplace(id, std::vector<std::string>{}).second) order.push_back(id);
    for (const auto& r : rows) {
        auto [it, inserted] = kept.emplace(r.interest_id, std::vector<std::string>{});
        if (inserted) order.push_back(r.interest_id);
        auto tok = trim(r.token);
        if (tok.empty() || is_year_token(tok) || stoplist.matches(tok)) continue;
        it->second.push_back(std::move(tok));
    }
    Corpus c;
    for (const auto& id : order) {
        const auto& toks = kept[id];
        if (toks.empty())
            c.excluded.push_back(id);
        else
            c.add_document(id, toks);
    }
    return c;
}

inline std::vector<TokenRow> parse_tokens(CsvReader reader) {
    std::vector<std::string> f;
    if (!reader.next(f)) reader.fail("missing header");
    if (f.size() != 2 || trim(f[0]) != "interest_id" || trim(f[1]) != "token")
        reader.fail("unexpected token header (expected interest_id,token)");
    std::vector<TokenRow> rows;
    while (reader.next(f)) {
        if (f.size() != 2) reader.fail("expected 2 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) reader.fail("empty interest_id");
        rows.push_back({std::move(f[0]), std::move(f[1])});
    }
    return rows;
}

inline void write_tokens_csv(std::ostream& os, const std::vector<TokenRow>& rows) {
    os << "interest_id,token\n";
    for (const auto& r : rows) os << csv_escape(r.interest_id) << ',' << csv_escape(r.token) << '\n';
}

struct LdaParams {
    size_t k = 10;
    std::optional<double> alpha;  // defaults to 50 / K
    double beta = 0.01;
    size_t iters = 200;
    uint64_t seed = 1;

    double alpha_value() const { return alpha.value_or(50.0 / static_cast<double>(k)); }
};

struct TopicModel {
    size_t k = 0;
    size_t vocab_size = 0;
    double alpha = 0.0;
    double beta = 0.0;
    uint64_t seed = 0;
    size_t iters = 0;
    std::vector<double> phi;    // k x V, row-major
    std::vector<double> theta;  // D x k, row-major
    std::vector<std::vector<uint16_t>> assignments;
    std::vector<int64_t> topic_tokens;  // tokens assigned per topic
    std::vector<std::string> doc_ids;
    std::vector<std::string> vocab;

    size_t doc_count() const { return doc_ids.size(); }
    double phi_at(size_t topic, size_t word) const { return phi[topic * vocab_size + word]; }
    double theta_at(size_t doc, size_t topic) const { return theta[doc * k + topic]; }

    /// Words of a topic by descending probability; ties toward the lower word index.
    std::vector<uint32_t> top_words(size_t topic, size_t n) const {
        std::vector<uint32_t> idx(vocab_size);
        std::iota(idx.begin(), idx.end(), 0u);
        n = std::min(n, vocab_size);
        std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                          [&](uint32_t a, uint32_t b) {
                              double pa = phi_at(topic, a), pb = phi_at(topic, b);
                              return pa != pb ? pa > pb : a < b;
                          });
        idx.resize(n);
        return idx;
    }

    /// Argmax topic of a document; ties toward the lower topic id.
    size_t dominant_topic(size_t doc) const {
        size_t best = 0;
        for (size_t t = 1; t < k; ++t)
            if (theta_at(doc, t) > theta_at(doc, best)) best = t;
        return best;
    }

    std::string label(size_t topic, size_t words = 3) const {
        std::string out;
        for (auto w : top_words(topic, words)) {
            if (!out.empty()) out += " / ";
            out += vocab[w];
        }
        return out;
    }

    /// Share of corpus tokens assigned to each topic.
    std::vector<double> topic_share() const {
        int64_t total = 0;
        for (auto t : topic_tokens) total += t;
        std::vector<double> s(k, 0.0);
        for (size_t t = 0; t < k; ++t) s[t] = total > 0 ? static_cast<double>(topic_tokens[t]) / total : 0.0;
        return s;
    }
};

/// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Collapsed Gibbs sampler owning its count arrays.
class LdaSampler {
public:
    LdaSampler(const Corpus& corpus, const LdaParams& params)
        : corpus_(corpus), k_(params.k), v_(corpus.vocab_size()), alpha_(params.alpha_value()),
          beta_(params.beta), rng_(params.seed) {
        if (k_ < 2) throw ValidationError("lda: K must be >= 2");
        if (k_ > UINT16_MAX) throw ValidationError("lda: K too large");
        if (v_ == 0) throw ValidationError("lda: empty vocabulary");
        if (corpus.doc_count() == 0) throw ValidationError("lda: empty corpus");
        if (k_ > corpus.token_count()) throw ValidationError("lda: K exceeds total token count");
        if (!(alpha_ > 0.0) || !(beta_ > 0.0)) throw ValidationError("lda: alpha and beta must be positive");
        const size_t d = corpus.doc_count();
        n_dk_.assign(d * k_, 0);
        n_kw_.assign(k_ * v_, 0);
        n_k_.assign(k_, 0);
        z_.resize(d);
        for (size_t doc = 0; doc < d; ++doc) {
            const auto& words = corpus.docs[doc];
            z_[doc].resize(words.size());
            for (size_t i = 0; i < words.size(); ++i) {
                if (words[i] >= v_) throw ValidationError("lda: token outside vocabulary");
                auto t = static_cast<uint16_t>(rng_() % k_);
                z_[doc][i] = t;
                increment(doc, words[i], t);
            }
        }
        p_.resize(k_);
    }

    /// One full pass resampling every token.
    void sweep() {
        const double vbeta = static_cast<double>(v_) * beta_;
        for (size_t doc = 0; doc < corpus_.doc_count(); ++doc) {
            const auto& words = corpus_.docs[doc];
            for (size_t i = 0; i < words.size(); ++i) {
                const uint32_t w = words[i];
                decrement(doc, w, z_[doc][i]);
                double cum = 0.0;
                for (size_t t = 0; t < k_; ++t) {
                    cum += (static_cast<double>(n_dk_[doc * k_ + t]) + alpha_) *
                           (static_cast<double>(n_kw_[t * v_ + w]) + beta_) /
                           (static_cast<double>(n_k_[t]) + vbeta);
                    p_[t] = cum;
                }
                const double u = uniform01(rng_) * cum;
                size_t t = static_cast<size_t>(std::upper_bound(p_.begin(), p_.end(), u) - p_.begin());
                if (t >= k_) t = k_ - 1;
                z_[doc][i] = static_cast<uint16_t>(t);
                increment(doc, w, t);
            }
        }
        ++sweeps_;
    }

    /// Doc-topic rows sum to document lengths and topic-word rows to topic totals.
    bool counts_consistent() const {
        std::vector<int64_t> from_docs(k_, 0);
        for (size_t doc = 0; doc < corpus_.doc_count(); ++doc) {
            int64_t row = 0;
            for (size_t t = 0; t < k_; ++t) {
                row += n_dk_[doc * k_ + t];
                from_docs[t] += n_dk_[doc * k_ + t];
            }
            if (row != static_cast<int64_t>(corpus_.docs[doc].size())) return false;
        }
        for (size_t t = 0; t < k_; ++t) {
            int64_t row = 0;
            for (size_t w = 0; w < v_; ++w) {
                if (n_kw_[t * v_ + w] < 0) return false;
                row += n_kw_[t * v_ + w];
            }
            if (row != n_k_[t] || row != from_docs[t]) return false;
        }
        return true;
    }

    TopicModel model() const {
        TopicModel m;
        m.k = k_;
        m.vocab_size = v_;
        m.alpha = alpha_;
        m.beta = beta_;
        m.iters = sweeps_;
        m.doc_ids = corpus_.doc_ids;
        m.vocab = corpus_.vocab;
        m.assignments = z_;
        m.topic_tokens = n_k_;
        m.phi.resize(k_ * v_);
        const double vbeta = static_cast<double>(v_) * beta_;
        for (size_t t = 0; t < k_; ++t)
            for (size_t w = 0; w < v_; ++w)
                m.phi[t * v_ + w] = (static_cast<double>(n_kw_[t * v_ + w]) + beta_) / (static_cast<double>(n_k_[t]) + vbeta);
        const size_t d = corpus_.doc_count();
        m.theta.resize(d * k_);
        const double kalpha = static_cast<double>(k_) * alpha_;
        for (size_t doc = 0; doc < d; ++doc) {
            const double len = static_cast<double>(corpus_.docs[doc].size());
            for (size_t t = 0; t < k_; ++t)
                m.theta[doc * k_ + t] = (static_cast<double>(n_dk_[doc * k_ + t]) + alpha_) / (len + kalpha);
        }
        return m;
    }

    const std::vector<std::vector<uint16_t>>& assignments() const { return z_; }

private:
    void increment(size_t doc, uint32_t w, size_t t) {
        ++n_dk_[doc * k_ + t];
        ++n_kw_[t * v_ + w];
        ++n_k_[t];
    }
    void decrement(size_t doc, uint32_t w, size_t t) {
        --n_dk_[doc * k_ + t];
        --n_kw_[t * v_ + w];
        --n_k_[t];
    }

    const Corpus& corpus_;
    size_t k_, v_;
    double alpha_, beta_;
    std::mt19937_64 rng_;
    std::vector<int64_t> n_dk_, n_kw_, n_k_;
    std::vector<std::vector<uint16_t>> z_;
    std::vector<double> p_;
    size_t sweeps_ = 0;
};

/// Fits LDA by collapsed Gibbs sampling; `after_sweep` runs after every pass.
inline TopicModel lda_fit(const Corpus& corpus, const LdaParams& params,
                          const std::function<void(const LdaSampler&, size_t)>& after_sweep = {}) {
    if (params.iters < 1) throw ValidationError("lda: iters must be >= 1");
    LdaSampler sampler(corpus, params);
    for (size_t it = 0; it < params.iters; ++it) {
        sampler.sweep();
        if (after_sweep) after_sweep(sampler, it);
    }
    TopicModel m = sampler.model();
    m.seed = params.seed;
    return m;
}

/// exp(-(sum of log p(w | d)) / N) with p(w | d) = sum_k theta_dk phi_kw.
/// Documents are matched to theta rows by position.
inline double perplexity(const TopicModel& model, const Corpus& corpus) {
    if (corpus.doc_count() != model.doc_count()) throw ValidationError("perplexity: document count mismatch");
    double log_sum = 0.0;
    size_t n = 0;
    for (size_t d = 0; d < corpus.doc_count(); ++d)
        for (uint32_t w : corpus.docs[d]) {
            if (w >= model.vocab_size) throw ValidationError("perplexity: token outside vocabulary");
            double p = 0.0;
            for (size_t t = 0; t < model.k; ++t) p += model.theta_at(d, t) * model.phi_at(t, w);
            log_sum += std::log(p);
            ++n;
        }
    if (n == 0) throw ValidationError("perplexity: corpus has no tokens");
    return std::exp(-log_sum / static_cast<double>(n));
}

/// Document frequencies over a corpus, for coherence scoring.
class DocumentFrequency {
public:
    explicit DocumentFrequency(const Corpus& corpus) : postings_(corpus.vocab_size()) {
        for (size_t d = 0; d < corpus.doc_count(); ++d) {
            std::vector<uint32_t> uniq = corpus.docs[d];
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            for (auto w : uniq) postings_[w].push_back(static_cast<uint32_t>(d));
        }
    }

    size_t single(uint32_t w) const { return w < postings_.size() ? postings_[w].size() : 0; }

    size_t joint(uint32_t a, uint32_t b) const {
        if (a >= postings_.size() || b >= postings_.size()) return 0;
        const auto& x = postings_[a];
        const auto& y = postings_[b];
        size_t i = 0, j = 0, n = 0;
        while (i < x.size() && j < y.size()) {
            if (x[i] < y[j])
                ++i;
            else if (x[i] > y[j])
                ++j;
            else {
                ++n;
                ++i;
                ++j;
            }
        }
        return n;
    }

private:
    std::vector<std::vector<uint32_t>> postings_;
};

struct CoherenceResult {
    double mean = 0.0;
    std::vector<double> per_topic;
    size_t skipped_pairs = 0;  // pairs whose second word never occurs
};

/// UMass coherence: mean over topics of
///   sum_{i<j} log((D(w_i, w_j) + 1) / D(w_j))
/// over the topic's top-n words ordered by probability.
inline CoherenceResult umass_coherence(const TopicModel& model, const Corpus& corpus, size_t top_n = 10) {
    if (top_n < 2) throw ValidationError("coherence: top_n must be >= 2");
    DocumentFrequency df(corpus);
    CoherenceResult r;
    for (size_t t = 0; t < model.k; ++t) {
        auto top = model.top_words(t, top_n);
        double score = 0.0;
        for (size_t i = 0; i < top.size(); ++i)
            for (size_t j = i + 1; j < top.size(); ++j) {
                const size_t dj = df.single(top[j]);
                if (dj == 0) {
                    ++r.skipped_pairs;
                    continue;
                }
                score += std::log((static_cast<double>(df.joint(top[i], top[j])) + 1.0) / static_cast<double>(dj));
            }
        r.per_topic.push_back(score);
    }
    double s = 0.0;
    for (double v : r.per_topic) s += v;
    r.mean = r.per_topic.empty() ? 0.0 : s / static_cast<double>(r.per_topic.size());
    return r;
}

struct ModelScore {
    size_t k = 0;
    double perplexity = 0.0;
    double coherence = 0.0;
    size_t perplexity_rank = 0;
    size_t coherence_rank = 0;
    size_t rank_sum = 0;
};

struct ModelSelection {
    TopicModel best;
    size_t best_k = 0;
    std::vector<ModelScore> scores;  // grid order
};

/// Fits one model per K, ranks by perplexity (ascending) and coherence
/// (descending), and keeps the K with the smallest rank sum; ties toward smaller K.
inline ModelSelection model_select(const Corpus& corpus, std::vector<size_t> k_grid, std::optional<double> alpha,
                                   double beta, size_t iters, uint64_t seed, size_t top_n = 10) {
    if (k_grid.empty()) throw ValidationError("model_select: empty K grid");
    std::sort(k_grid.begin(), k_grid.end());
    k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
    std::vector<TopicModel> models(k_grid.size());
    std::vector<ModelScore> scores(k_grid.size());
    parallel_for(k_grid.size(), [&](size_t g) {
        LdaParams p{k_grid[g], alpha, beta, iters, seed};
        models[g] = lda_fit(corpus, p);
        scores[g].k = k_grid[g];
        scores[g].perplexity = perplexity(models[g], corpus);
        scores[g].coherence = umass_coherence(models[g], corpus, top_n).mean;
    });
    auto rank_by = [&](auto better) {
        std::vector<size_t> idx(scores.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), better);
        std::vector<size_t> rank(scores.size());
        for (size_t r = 0; r < idx.size(); ++r) rank[idx[r]] = r + 1;
        return rank;
    };
    auto pr = rank_by([&](size_t a, size_t b) { return scores[a].perplexity < scores[b].perplexity; });
    auto cr = rank_by([&](size_t a, size_t b) { return scores[a].coherence > scores[b].coherence; });
    size_t best = 0;
    for (size_t g = 0; g < scores.size(); ++g) {
        scores[g].perplexity_rank = pr[g];
        scores[g].coherence_rank = cr[g];
        scores[g].rank_sum = pr[g] + cr[g];
        if (scores[g].rank_sum < scores[best].rank_sum) best = g;
    }
    ModelSelection sel;
    sel.best = std::move(models[best]);
    sel.best_k = k_grid[best];
    sel.scores = std::move(scores);
    return sel;
}

enum class Party { Liberal, Conservative };
inline const char* label(Party p) { return p == Party::Liberal ? "liberal" : "conservative"; }

struct PartySplit {
    std::vector<std::string> liberal;
    std::vector<std::string> conservative;
    size_t excluded_neutral = 0;
};

/// Liberal: pi < 0; conservative: pi > 0; pi == 0 is excluded and counted.
inline PartySplit split_by_party(const std::vector<std::pair<std::string, double>>& alignments) {
    PartySplit s;
    for (const auto& [id, pi] : alignments) {
        if (pi < 0.0)
            s.liberal.push_back(id);
        else if (pi > 0.0)
            s.conservative.push_back(id);
        else
            ++s.excluded_neutral;
    }
    return s;
}

/// Restricts a corpus to the given interests, keeping corpus order and vocabulary.
inline Corpus subset_corpus(const Corpus& corpus, const std::vector<std::string>& ids) {
    std::unordered_set<std::string> want(ids.begin(), ids.end());
    Corpus out;
    for (size_t d = 0; d < corpus.doc_count(); ++d) {
        if (!want.count(corpus.doc_ids[d])) continue;
        std::vector<std::string> toks;
        toks.reserve(corpus.docs[d].size());
        for (auto w : corpus.docs[d]) toks.push_back(corpus.vocab[w]);
        out.add_document(corpus.doc_ids[d], toks);
    }
    return out;
}

struct TTestResult {
    std::optional<double> t;
    std::optional<double> p;
    bool degenerate = false;
};

/// One-sample t-test of the mean against zero. Zero-variance samples return
/// p = 1 when the mean is 0 and p = 0 flagged degenerate otherwise.
inline TTestResult one_sample_t(const std::vector<double>& x) {
    TTestResult r;
    const size_t n = x.size();
    if (n < 2) return r;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) {
        r.degenerate = mean != 0.0;
        r.p = mean == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
    r.p = student_t_two_sided_p(*r.t, static_cast<double>(n - 1));
    return r;
}

struct TopicShiftRow {
    size_t topic_id = 0;
    std::string label;
    size_t n_interests = 0;
    double mean_pi = 0.0;
    double mean_mu = 0.0;
    double shift = 0.0;
    std::optional<double> paired_t;
    std::optional<double> paired_p;
    std::optional<double> nonzero_p;
    std::string flag;  // "", "too_few", "degenerate"
};

struct TopicShiftReport {
    Party party = Party::Liberal;
    std::vector<TopicShiftRow> rows;
    size_t unmatched = 0;  // party members without a document or a mu value
};

/// Per-topic mean alignment before/after deconfounding for one party's
/// interests, each assigned to its argmax-theta topic.
inline TopicShiftReport topic_shift(const TopicModel& model, Party party, const std::vector<std::string>& members,
                                    const std::unordered_map<std::string, double>& pi,
                                    const std::unordered_map<std::string, double>& mu) {
    std::unordered_map<std::string, size_t> doc_of;
    for (size_t d = 0; d < model.doc_count(); ++d) doc_of.emplace(model.doc_ids[d], d);
    TopicShiftReport rep;
    rep.party = party;
    std::vector<std::vector<double>> pis(model.k), mus(model.k);
    for (const auto& id : members) {
        auto d = doc_of.find(id);
        auto p = pi.find(id);
        auto m = mu.find(id);
        if (d == doc_of.end() || p == pi.end() || m == mu.end()) {
            ++rep.unmatched;
            continue;
        }
        size_t t = model.dominant_topic(d->second);
        pis[t].push_back(p->second);
        mus[t].push_back(m->second);
    }
    for (size_t t = 0; t < model.k; ++t) {
        const size_t n = pis[t].size();
        if (n == 0) continue;
        TopicShiftRow row;
        row.topic_id = t;
        row.label = model.label(t);
        row.n_interests = n;
        std::vector<double> diff(n);
        for (size_t i = 0; i < n; ++i) {
            row.mean_pi += pis[t][i];
            row.mean_mu += mus[t][i];
            diff[i] = mus[t][i] - pis[t][i];
        }
        row.mean_pi /= static_cast<double>(n);
        row.mean_mu /= static_cast<double>(n);
        row.shift = row.mean_mu - row.mean_pi;
        if (n < 2) {
            row.flag = "too_few";
        } else {
            auto paired = one_sample_t(diff);
            auto nonzero = one_sample_t(mus[t]);
            row.paired_t = paired.t;
            row.paired_p = paired.p;
            row.nonzero_p = nonzero.p;
            if (paired.degenerate || nonzero.degenerate) row.flag = "degenerate";
        }
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

inline constexpr const char* kTopicShiftHeader =
    "party,category,topic_id,label,n_interests,mean_pi,mean_mu,shift,paired_p,nonzero_p,flag";

inline void write_topic_shift_rows(std::ostream& os, const TopicShiftReport& rep, const std::string& category) {
    auto opt = [](const std::optional<double>& v) { return v ? fmt_double(*v) : std::string(); };
    for (const auto& r : rep.rows)
        os << label(rep.party) << ',' << category << ',' << r.topic_id << ',' << csv_escape(r.label, true) << ','
           << r.n_interests << ',' << fmt_double(r.mean_pi) << ',' << fmt_double(r.mean_mu) << ','
           << fmt_double(r.shift) << ',' << opt(r.paired_p) << ',' << opt(r.nonzero_p) << ',' << r.flag << '\n';
}

inline nlohmann::json to_json(const TopicShiftReport& rep, const std::string& category) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows) {
        nlohmann::json j = {{"topic_id", r.topic_id}, {"label", r.label},     {"n_interests", r.n_interests},
                            {"mean_pi", r.mean_pi},   {"mean_mu", r.mean_mu}, {"shift", r.shift},
                            {"flag", r.flag}};
        j["paired_p"] = r.paired_p ? nlohmann::json(*r.paired_p) : nlohmann::json(nullptr);
        j["nonzero_p"] = r.nonzero_p ? nlohmann::json(*r.nonzero_p) : nlohmann::json(nullptr);
        rows.push_back(j);
    }
    return {{"party", label(rep.party)}, {"category", category}, {"unmatched", rep.unmatched}, {"rows", rows}};
}

/// Classical MDS: double-center the squared distances and project onto the
/// top `dims` eigenvectors. Negative eigenvalues are treated as zero.
inline Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& distances, int dims = 2) {
    const Eigen::Index n = distances.rows();
    if (n != distances.cols()) throw ValidationError("mds: distance matrix must be square");
    Eigen::MatrixXd sq = distances.array().square().matrix();
    Eigen::MatrixXd center = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::MatrixXd b = -0.5 * center * sq * center;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
    Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, dims);
    const auto& values = solver.eigenvalues();    // ascending
    const auto& vectors = solver.eigenvectors();
    for (int d = 0; d < dims && d < n; ++d) {
        const Eigen::Index col = n - 1 - d;
        const double lambda = std::max(0.0, values(col));
        Eigen::VectorXd v = vectors.col(col);
        // Sign convention: largest-magnitude component positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        coords.col(d) = v * std::sqrt(lambda);
    }
    return coords;
}

struct IntertopicMap {
    Eigen::MatrixXd distance;  // Jensen-Shannon distance, base 2
    Eigen::MatrixXd coords;    // K x 2
    std::vector<double> share;
};

inline IntertopicMap intertopic_map(const TopicModel& model) {
    if (model.k < 2) throw ValidationError("intertopic_map: K must be >= 2");
    IntertopicMap m;
    const auto k = static_cast<Eigen::Index>(model.k);
    m.distance = Eigen::MatrixXd::Zero(k, k);
    for (size_t a = 0; a < model.k; ++a)
        for (size_t b = a + 1; b < model.k; ++b) {
            std::span<const double> ra(model.phi.data() + a * model.vocab_size, model.vocab_size);
            std::span<const double> rb(model.phi.data() + b * model.vocab_size, model.vocab_size);
            const double d = std::sqrt(js_divergence(ra, rb, 2.0));
            m.distance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = d;
            m.distance(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = d;
        }
    m.coords = classical_mds(m.distance, 2);
    m.share = model.topic_share();
    return m;
}

inline void write_map_csv(std::ostream& os, const IntertopicMap& m) {
    os << "topic_id,x,y,share\n";
    for (Eigen::Index t = 0; t < m.coords.rows(); ++t)
        os << t << ',' << fmt_double(m.coords(t, 0)) << ',' << fmt_double(m.coords(t, 1)) << ','
           << fmt_double(m.share[static_cast<size_t>(t)]) << '\n';
}

inline nlohmann::json topics_json(const TopicModel& model, size_t top_n,
                                  const std::vector<ModelScore>& scores = {}) {
    nlohmann::json j;
    j["k"] = model.k;
    j["alpha"] = model.alpha;
    j["beta"] = model.beta;
    j["iters"] = model.iters;
    j["seed"] = model.seed;
    auto share = model.topic_share();
    nlohmann::json topics = nlohmann::json::array();
    for (size_t t = 0; t < model.k; ++t) {
        nlohmann::json words = nlohmann::json::array();
        for (auto w : model.top_words(t, top_n)) words.push_back({{"word", model.vocab[w]}, {"p", model.phi_at(t, w)}});
        topics.push_back({{"topic_id", t}, {"label", model.label(t)}, {"share", share[t]}, {"top_words", words}});
    }
    j["topics"] = topics;
    nlohmann::json assign = nlohmann::json::object();
    for (size_t d = 0; d < model.doc_count(); ++d) assign[model.doc_ids[d]] = model.dominant_topic(d);
    j["assignments"] = assign;
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& s : scores)
        sc.push_back({{"k", s.k}, {"perplexity", s.perplexity}, {"coherence", s.coherence},
                      {"perplexity_rank", s.perplexity_rank}, {"coherence_rank", s.coherence_rank},
                      {"rank_sum", s.rank_sum}});
    j["selection"] = sc;
    return j;
}

}  // namespace deconf
