#pragma once

// The `deconfound` command line: shared JSON configuration, subcommands,
// artifact writing with content-hashed manifests, and the consolidated report.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "alignment.hpp"
#include "common.hpp"
#include "deconfound.hpp"
#include "graph.hpp"
#include "reach.hpp"
#include "regression.hpp"
#include "shiftstats.hpp"
#include "synth.hpp"
#include "topics.hpp"

namespace deconf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Config {
    std::string reach, edges, tokens, stoplist;
    std::string output_dir = "out";
    uint64_t seed = 1;
    double multiracial_rate = 0.12;
    int64_t censor_floor = 20;
    size_t top_k = 10;
    BaselineEstimator estimator = BaselineEstimator::MeanOfFractions;
    WeightBasis basis = WeightBasis::TotalReach;
    std::vector<Category> categories{kDemographicCategories.begin(), kDemographicCategories.end()};
    size_t bins = 100;
    double log_base = 2.0;
    size_t min_clusters = 15, max_clusters = 30;
    std::vector<size_t> k_grid = {10, 20, 30};
    size_t iters = 200;
    std::optional<double> alpha;
    double beta = 0.01;
    size_t top_n = 10;

    json to_json() const {
        json cats = json::array();
        for (auto c : categories) cats.push_back(label(c));
        json j;
        j["format_version"] = kFormatVersion;
        j["inputs"] = {{"reach", reach}, {"edges", edges}, {"tokens", tokens}, {"stoplist", stoplist}};
        j["output_dir"] = output_dir;
        j["seed"] = seed;
        j["ingest"] = {{"multiracial_rate", multiracial_rate}, {"censor_floor", censor_floor}};
        j["align"] = {{"top_k", top_k}};
        j["deconfound"] = {{"estimator", label(estimator)}, {"weight_basis", label(basis)}, {"categories", cats}};
        j["shift"] = {{"bins", bins}, {"log_base", log_base}};
        j["graph"] = {{"min_clusters", min_clusters}, {"max_clusters", max_clusters}};
        j["topics"] = {{"k_grid", k_grid}, {"iters", iters}, {"beta", beta}, {"top_n", top_n}};
        j["topics"]["alpha"] = alpha ? json(*alpha) : json(nullptr);
        return j;
    }

    static Config from_json(const json& j) {
        using deconf::detail::check_keys;
        using deconf::detail::read_opt;
        const std::string w = "config";
        check_keys(j,
                   {"format_version", "inputs", "output_dir", "seed", "ingest", "align", "deconfound", "shift", "graph",
                    "topics"},
                   w);
        if (!j.contains("format_version")) throw ValidationError("config: missing format_version");
        int version = 0;
        read_opt(j, "format_version", version, w);
        if (version != kFormatVersion)
            throw ValidationError("config: unsupported format_version " + std::to_string(version));
        Config c;
        if (j.contains("inputs")) {
            const auto& in = j.at("inputs");
            check_keys(in, {"reach", "edges", "tokens", "stoplist"}, w + ".inputs");
            read_opt(in, "reach", c.reach, w);
            read_opt(in, "edges", c.edges, w);
            read_opt(in, "tokens", c.tokens, w);
            read_opt(in, "stoplist", c.stoplist, w);
        }
        read_opt(j, "output_dir", c.output_dir, w);
        read_opt(j, "seed", c.seed, w);
        if (j.contains("ingest")) {
            const auto& s = j.at("ingest");
            check_keys(s, {"multiracial_rate", "censor_floor"}, w + ".ingest");
            read_opt(s, "multiracial_rate", c.multiracial_rate, w);
            read_opt(s, "censor_floor", c.censor_floor, w);
        }
        if (j.contains("align")) {
            check_keys(j.at("align"), {"top_k"}, w + ".align");
            read_opt(j.at("align"), "top_k", c.top_k, w);
        }
        if (j.contains("deconfound")) {
            const auto& s = j.at("deconfound");
            check_keys(s, {"estimator", "weight_basis", "categories"}, w + ".deconfound");
            std::string est = label(c.estimator), basis = label(c.basis);
            read_opt(s, "estimator", est, w);
            read_opt(s, "weight_basis", basis, w);
            c.estimator = parse_estimator(est);
            c.basis = parse_weight_basis(basis);
            if (s.contains("categories")) {
                std::vector<std::string> names;
                read_opt(s, "categories", names, w);
                c.categories.clear();
                for (const auto& n : names) {
                    auto cat = parse_category(n);
                    if (!cat || *cat == Category::None) throw ValidationError("config: unknown category '" + n + "'");
                    c.categories.push_back(*cat);
                }
            }
        }
        if (j.contains("shift")) {
            const auto& s = j.at("shift");
            check_keys(s, {"bins", "log_base"}, w + ".shift");
            read_opt(s, "bins", c.bins, w);
            read_opt(s, "log_base", c.log_base, w);
        }
        if (j.contains("graph")) {
            const auto& s = j.at("graph");
            check_keys(s, {"min_clusters", "max_clusters"}, w + ".graph");
            read_opt(s, "min_clusters", c.min_clusters, w);
            read_opt(s, "max_clusters", c.max_clusters, w);
        }
        if (j.contains("topics")) {
            const auto& s = j.at("topics");
            check_keys(s, {"k_grid", "iters", "alpha", "beta", "top_n"}, w + ".topics");
            read_opt(s, "k_grid", c.k_grid, w);
            read_opt(s, "iters", c.iters, w);
            if (s.contains("alpha") && !s.at("alpha").is_null()) {
                double a = 0.0;
                read_opt(s, "alpha", a, w);
                c.alpha = a;
            }
            read_opt(s, "beta", c.beta, w);
            read_opt(s, "top_n", c.top_n, w);
        }
        c.validate();
        return c;
    }

    void validate() const {
        if (multiracial_rate < 0.0 || multiracial_rate > 1.0)
            throw ValidationError("config: multiracial_rate must lie in [0, 1]");
        if (censor_floor < 0) throw ValidationError("config: censor_floor must be >= 0");
        if (top_k == 0) throw ValidationError("config: top_k must be >= 1");
        if (categories.empty()) throw ValidationError("config: no deconfounding categories");
        if (bins == 0) throw ValidationError("config: bins must be >= 1");
        if (!(log_base > 1.0)) throw ValidationError("config: log_base must exceed 1");
        if (min_clusters > max_clusters) throw ValidationError("config: min_clusters exceeds max_clusters");
        if (k_grid.empty()) throw ValidationError("config: empty k_grid");
        for (auto k : k_grid)
            if (k < 2) throw ValidationError("config: every K must be >= 2");
        if (iters == 0) throw ValidationError("config: iters must be >= 1");
        if (alpha && !(*alpha > 0.0)) throw ValidationError("config: alpha must be positive");
        if (!(beta > 0.0)) throw ValidationError("config: beta must be positive");
        if (top_n < 2) throw ValidationError("config: top_n must be >= 2");
    }
};

inline Config load_config(const std::string& path) {
    const auto text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
    return Config::from_json(j);
}

/// State shared by the stages of one run: configuration, recorded inputs and
/// outputs, warnings, and in-memory results handed from stage to stage.
class Run {
public:
    Run(std::string name, Config cfg, std::ostream& err) : name_(std::move(name)), cfg_(std::move(cfg)), err_(err) {
        out_ = cfg_.output_dir;
    }

    const Config& config() const { return cfg_; }
    const fs::path& out_dir() const { return out_; }

    std::string read_input(const std::string& path) {
        if (path.empty()) throw IoError("missing input path");
        auto content = read_file(path);
        inputs_[path] = {sha256_hex(content), content.size()};
        return content;
    }

    bool has_artifact(const std::string& rel) const { return outputs_.count(rel) || fs::exists(out_ / rel); }

    /// Reads an artifact of an earlier stage from the output directory.
    std::string read_artifact(const std::string& rel, const std::string& producer) {
        const auto p = out_ / rel;
        if (!fs::exists(p))
            throw IoError("missing prerequisite '" + p.string() + "' (produced by `" + producer + "`)");
        return read_input(p.string());
    }

    void emit(const std::string& rel, const std::string& content) {
        const auto p = out_ / rel;
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
        write_file(p.string(), content);
        outputs_[rel] = {sha256_hex(content), content.size()};
    }

    void warn(const Warning& w) {
        err_ << "warning: " << w.code << ": " << w.message;
        if (!w.detail.is_null() && !w.detail.empty()) err_ << ' ' << w.detail.dump();
        err_ << '\n';
        warnings_.push_back(w);
    }

    void warn_all(const std::vector<Warning>& ws, size_t echo_limit = 20) {
        size_t shown = 0;
        for (const auto& w : ws) {
            if (shown++ < echo_limit) {
                warn(w);
            } else {
                warnings_.push_back(w);
            }
        }
        if (ws.size() > echo_limit)
            err_ << "warning: " << ws.size() - echo_limit << " more warnings in diagnostics." << name_ << ".jsonl\n";
    }

    /// Writes the diagnostics log and the manifest describing this run.
    void finish(const json& extra = json::object()) {
        std::ostringstream diag;
        write_json_lines(diag, warnings_);
        emit("diagnostics." + name_ + ".jsonl", diag.str());
        json m;
        m["tool"] = "deconfound";
        m["format_version"] = kFormatVersion;
        m["subcommand"] = name_;
        m["seed"] = cfg_.seed;
        m["parameters"] = cfg_.to_json();
        json ins = json::array();
        for (const auto& [path, h] : inputs_) ins.push_back({{"path", path}, {"sha256", h.first}, {"bytes", h.second}});
        m["inputs"] = ins;
        json outs = json::array();
        for (const auto& [rel, h] : outputs_) outs.push_back({{"path", rel}, {"sha256", h.first}, {"bytes", h.second}});
        m["outputs"] = outs;
        m["warning_count"] = warnings_.size();
        for (const auto& [k, v] : extra.items()) m[k] = v;
        const auto p = out_ / ("manifest." + name_ + ".json");
        write_file(p.string(), dump(m));
    }

    // Results passed between stages of a pipeline run.
    std::optional<ReachTable> clean;
    std::optional<std::vector<AlignmentRecord>> alignments;
    std::optional<std::vector<DeconfoundRow>> deconfounded;

private:
    std::string name_;
    Config cfg_;
    std::ostream& err_;
    fs::path out_;
    std::map<std::string, std::pair<std::string, size_t>> inputs_;
    std::map<std::string, std::pair<std::string, size_t>> outputs_;
    std::vector<Warning> warnings_;
};

// --- stages -------------------------------------------------------------------

inline void stage_ingest(Run& run) {
    const auto& c = run.config();
    if (c.reach.empty()) throw ValidationError("ingest: no reach input (inputs.reach or --reach)");
    auto content = run.read_input(c.reach);
    auto table = parse_reach(CsvReader(std::move(content), c.reach));
    table = estimate_white(std::move(table), c.multiracial_rate);
    table = binarize_ideology(std::move(table));
    table = filter_political(table);
    table = flag_censored(std::move(table), c.censor_floor);
    run.warn_all(table.warnings());
    const auto& st = table.stats();
    json stats = {{"rows_ingested", st.rows_ingested},
                  {"interests_retained", table.interest_count()},
                  {"interests_removed", st.interests_removed},
                  {"white_slices_derived", st.white_slices_derived},
                  {"white_slices_clamped", st.white_slices_clamped},
                  {"white_slices_missing_marginal", st.white_slices_missing_marginal},
                  {"censored_flags", st.censored_flags},
                  {"censor_floor", c.censor_floor},
                  {"multiracial_rate", c.multiracial_rate}};
    run.emit("reach.clean.csv", serialize_reach(table));
    run.emit("ingest_stats.json", dump(stats));
    run.clean = std::move(table);
}

inline const ReachTable& clean_table(Run& run) {
    if (!run.clean) {
        auto content = run.read_artifact("reach.clean.csv", "ingest");
        run.clean = binarize_ideology(parse_reach(CsvReader(std::move(content), "reach.clean.csv")));
    }
    return *run.clean;
}

inline json record_json(const AlignmentRecord& r) {
    return {{"interest_id", r.interest_id}, {"interest_name", r.interest_name}, {"pi", r.pi},
            {"relevance", r.relevance},     {"L", r.liberal},                   {"C", r.conservative}};
}

inline void stage_align(Run& run) {
    const auto& table = clean_table(run);
    auto records = compute_alignments(table);
    if (records.empty()) throw ValidationError("align: no politically relevant interests");
    std::ostringstream csv;
    write_alignment_csv(csv, records);
    run.emit("alignment.csv", csv.str());
    std::vector<double> pis;
    for (const auto& r : records) pis.push_back(r.pi);
    const size_t k = std::min(run.config().top_k, records.size());
    json lib = json::array(), cons = json::array();
    for (const auto& r : rank_interests(records, k, Direction::Liberal)) lib.push_back(record_json(r));
    for (const auto& r : rank_interests(records, k, Direction::Conservative)) cons.push_back(record_json(r));
    json summary = {{"pi", to_json(summary_stats(pis))}, {"top_liberal", lib}, {"top_conservative", cons}};
    run.emit("alignment_summary.json", dump(summary));
    run.alignments = std::move(records);
}

inline const std::vector<AlignmentRecord>& alignments(Run& run) {
    if (!run.alignments) {
        auto content = run.read_artifact("alignment.csv", "align");
        run.alignments = read_alignment_csv(CsvReader(std::move(content), "alignment.csv"));
    }
    return *run.alignments;
}

inline void stage_deconfound(Run& run) {
    const auto& c = run.config();
    const auto& table = clean_table(run);
    DeconfoundOptions opts{c.estimator, c.basis};
    std::ostringstream csv;
    csv << kDeconfoundHeader << '\n';
    json breakdown = json::object();
    std::vector<DeconfoundRow> rows;
    for (auto cat : c.categories) {
        auto result = deconfound_category(table, cat, opts);
        write_deconfound_rows(csv, result);
        breakdown[label(cat)] = breakdown_json(result);
        for (const auto& id : result.no_result)
            run.warn({"no_usable_subgroup", "no subgroup with partisan followers; interest skipped",
                      {{"interest_id", id}, {"category", label(cat)}}});
        for (const auto& r : result.results) rows.push_back({r.interest_id, cat, r.pi, r.mu, r.delta_pct});
    }
    run.emit("deconfound.csv", csv.str());
    run.emit("deconfound_breakdown.json", dump(breakdown));
    run.deconfounded = std::move(rows);
}

inline const std::vector<DeconfoundRow>& deconfounded(Run& run) {
    if (!run.deconfounded) {
        auto content = run.read_artifact("deconfound.csv", "deconfound");
        run.deconfounded = read_deconfound_csv(CsvReader(std::move(content), "deconfound.csv"));
    }
    return *run.deconfounded;
}

/// pi and mu samples per category, in file order.
inline std::map<Category, std::pair<std::vector<double>, std::vector<double>>> samples_by_category(
    const std::vector<DeconfoundRow>& rows) {
    std::map<Category, std::pair<std::vector<double>, std::vector<double>>> out;
    for (const auto& r : rows) {
        out[r.category].first.push_back(r.pi);
        out[r.category].second.push_back(r.mu);
    }
    return out;
}

inline void stage_shift(Run& run) {
    const auto& c = run.config();
    HistogramSpec spec;
    spec.bins = c.bins;
    json reports = json::array();
    for (const auto& [cat, s] : samples_by_category(deconfounded(run))) {
        const auto& [pi, mu] = s;
        auto rep = shift_report(pi, mu, cat, spec, c.log_base);
        reports.push_back(to_json(rep));
        std::ostringstream hist;
        write_histogram_csv(hist, pi, mu, spec);
        run.emit(std::string("hist_") + label(cat) + ".csv", hist.str());
    }
    run.emit("shift.json", dump(reports));
}

inline void stage_graph(Run& run) {
    const auto& c = run.config();
    if (c.edges.empty()) throw ValidationError("graph: no edges input (inputs.edges or --edges)");
    auto content = run.read_input(c.edges);
    auto g = parse_edges(CsvReader(std::move(content), c.edges));
    run.warn_all(g.warnings);
    auto h = cluster(g, c.seed);
    const size_t level = level_select(h, c.min_clusters, c.max_clusters);
    std::ostringstream clusters;
    write_clusters_csv(clusters, g, h);
    run.emit("clusters.csv", clusters.str());
    run.emit("hierarchy.json", dump(hierarchy_json(h, level)));

    std::unordered_map<std::string, double> pi;
    std::unordered_map<std::string, int64_t> followers;
    for (const auto& r : alignments(run)) {
        pi.emplace(r.interest_id, r.pi);
        followers.emplace(r.interest_id, r.total);
    }
    auto annotated = annotate(g, pi, followers, h.levels[level]);
    if (!annotated.missing_alignment.empty())
        run.warn({"node_without_alignment", "graph nodes without an alignment are plotted at pi = 0",
                  {{"count", annotated.missing_alignment.size()}, {"first", annotated.missing_alignment.front()}}});
    std::ostringstream nodes, edges;
    write_nodes_csv(nodes, annotated);
    write_annotated_edges_csv(edges, annotated);
    run.emit("nodes.csv", nodes.str());
    run.emit("edges_annotated.csv", edges.str());
}

inline void stage_topics(Run& run) {
    const auto& c = run.config();
    if (c.tokens.empty()) throw ValidationError("topics: no tokens input (inputs.tokens or --tokens)");
    Stoplist stoplist;
    if (!c.stoplist.empty()) {
        auto text = run.read_input(c.stoplist);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            line = trim(line);
            if (!line.empty() && line[0] != '#') stoplist.add(line);
        }
    }
    auto rows = parse_tokens(CsvReader(run.read_input(c.tokens), c.tokens));

    const auto& records = alignments(run);
    std::vector<std::string> universe;
    std::vector<std::pair<std::string, double>> pis;
    std::unordered_map<std::string, double> pi_of;
    std::unordered_set<std::string> relevant;
    for (const auto& r : records) {
        universe.push_back(r.interest_id);
        pis.emplace_back(r.interest_id, r.pi);
        pi_of.emplace(r.interest_id, r.pi);
        relevant.insert(r.interest_id);
    }
    std::vector<TokenRow> kept;
    size_t foreign = 0;
    for (auto& r : rows) {
        if (relevant.count(r.interest_id))
            kept.push_back(std::move(r));
        else
            ++foreign;
    }
    if (foreign > 0)
        run.warn({"tokens_without_alignment", "token rows for interests without an alignment were ignored",
                  {{"rows", foreign}}});
    auto corpus = preprocess_tokens(kept, stoplist, universe);
    json corpus_stats = {{"documents", corpus.doc_count()},
                         {"excluded", corpus.excluded.size()},
                         {"vocabulary", corpus.vocab_size()},
                         {"tokens", corpus.token_count()}};
    if (!corpus.excluded.empty())
        run.warn({"interests_without_tokens", "interests with no surviving tokens were excluded",
                  {{"count", corpus.excluded.size()}}});

    auto split = split_by_party(pis);
    std::map<Category, std::unordered_map<std::string, double>> mu_of;
    for (const auto& r : deconfounded(run)) mu_of[r.category].emplace(r.interest_id, r.mu);

    std::ostringstream shift_csv;
    shift_csv << kTopicShiftHeader << '\n';
    json shift = json::array();
    json parties = json::object();
    for (auto party : {Party::Liberal, Party::Conservative}) {
        const auto& members = party == Party::Liberal ? split.liberal : split.conservative;
        auto sub = subset_corpus(corpus, members);
        if (sub.doc_count() == 0) {
            run.warn({"party_without_documents", "no documents for this party; topic fitting skipped",
                      {{"party", label(party)}}});
            continue;
        }
        std::vector<size_t> grid;
        for (auto k : c.k_grid)
            if (k <= sub.token_count()) grid.push_back(k);
        if (grid.empty()) {
            run.warn({"party_too_small", "every K exceeds the token count; topic fitting skipped",
                      {{"party", label(party)}, {"tokens", sub.token_count()}}});
            continue;
        }
        auto sel = model_select(sub, grid, c.alpha, c.beta, c.iters, c.seed, c.top_n);
        const std::string dir = std::string("topics/") + label(party) + "/";
        run.emit(dir + "topics.json", dump(topics_json(sel.best, c.top_n, sel.scores)));
        std::ostringstream map;
        write_map_csv(map, intertopic_map(sel.best));
        run.emit(dir + "map.csv", map.str());
        parties[label(party)] = {{"k", sel.best_k}, {"documents", sub.doc_count()}};
        for (auto cat : c.categories) {
            auto it = mu_of.find(cat);
            if (it == mu_of.end()) continue;
            auto rep = topic_shift(sel.best, party, members, pi_of, it->second);
            write_topic_shift_rows(shift_csv, rep, label(cat));
            shift.push_back(to_json(rep, label(cat)));
        }
    }
    run.emit("topics/shift.csv", shift_csv.str());
    run.emit("topics/shift.json", dump(shift));
    run.emit("topics/corpus_stats.json",
             dump({{"corpus", corpus_stats}, {"parties", parties}, {"neutral_excluded", split.excluded_neutral}}));
}

inline json parse_json_artifact(Run& run, const std::string& rel, const std::string& producer) {
    auto text = run.read_artifact(rel, producer);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(rel + ": invalid JSON: " + e.what());
    }
}

/// Consolidated report: top-k tables before and after deconfounding, summary
/// statistics, shift statistics per category and topic-level shifts.
inline void stage_report(Run& run) {
    const auto& c = run.config();
    const auto& records = alignments(run);
    const auto& rows = deconfounded(run);
    std::unordered_map<std::string, const AlignmentRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.interest_id, &r);
    auto name_of = [&](const std::string& id) {
        auto it = by_id.find(id);
        return it == by_id.end() ? std::string() : it->second->interest_name;
    };

    json report;
    const size_t k = std::min(c.top_k, records.size());
    json t1 = {{"top_liberal", json::array()}, {"top_conservative", json::array()}};
    for (const auto& r : rank_interests(records, k, Direction::Liberal)) t1["top_liberal"].push_back(record_json(r));
    for (const auto& r : rank_interests(records, k, Direction::Conservative))
        t1["top_conservative"].push_back(record_json(r));
    report["table_before"] = t1;

    std::vector<double> pis;
    for (const auto& r : records) pis.push_back(r.pi);
    json summary;
    summary["pi"] = to_json(summary_stats(pis));

    std::map<Category, std::vector<const DeconfoundRow*>> per_cat;
    for (const auto& r : rows) per_cat[r.category].push_back(&r);
    json t2 = json::object();
    json mu_stats = json::object();
    for (const auto& [cat, list] : per_cat) {
        auto entry = [&](const DeconfoundRow* r) {
            json j = {{"interest_id", r->interest_id}, {"interest_name", name_of(r->interest_id)},
                      {"pi", r->pi}, {"mu", r->mu}};
            j["delta_pct"] = r->delta_pct ? json(*r->delta_pct) : json(nullptr);
            return j;
        };
        std::vector<const DeconfoundRow*> sorted = list;
        std::sort(sorted.begin(), sorted.end(), [](const DeconfoundRow* a, const DeconfoundRow* b) {
            return a->mu != b->mu ? a->mu < b->mu : a->interest_id < b->interest_id;
        });
        const size_t kk = std::min(c.top_k, sorted.size());
        json lib = json::array(), cons = json::array();
        for (size_t i = 0; i < kk; ++i) lib.push_back(entry(sorted[i]));
        std::sort(sorted.begin(), sorted.end(), [](const DeconfoundRow* a, const DeconfoundRow* b) {
            return a->mu != b->mu ? a->mu > b->mu : a->interest_id < b->interest_id;
        });
        for (size_t i = 0; i < kk; ++i) cons.push_back(entry(sorted[i]));
        t2[label(cat)] = {{"top_liberal", lib}, {"top_conservative", cons}};
        std::vector<double> mus;
        for (auto* r : list) mus.push_back(r->mu);
        mu_stats[label(cat)] = to_json(summary_stats(mus));
    }
    report["table_after"] = t2;
    summary["mu"] = mu_stats;
    report["summary"] = summary;
    report["shift"] = parse_json_artifact(run, "shift.json", "shift");
    json hist = json::array();
    for (const auto& [cat, _] : per_cat) hist.push_back(std::string("hist_") + label(cat) + ".csv");
    report["histograms"] = hist;
    report["topic_shift"] =
        run.has_artifact("topics/shift.json") ? parse_json_artifact(run, "topics/shift.json", "topics") : json::array();
    if (run.has_artifact("hierarchy.json")) report["clustering"] = parse_json_artifact(run, "hierarchy.json", "graph");
    run.emit("report.json", dump(report));
}

// --- command line -------------------------------------------------------------

struct Flags {
    std::string config_path, out, reach, edges, tokens, stoplist, estimator, weight_basis, k_grid;
    std::optional<uint64_t> seed;
    std::optional<size_t> iters, top_n, top_k, bins, min_clusters, max_clusters;
    std::optional<double> alpha, beta, multiracial_rate, log_base;
    std::optional<int64_t> censor_floor;
};

inline std::vector<size_t> parse_k_grid(const std::string& s) {
    std::vector<size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        size_t v = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || p != item.data() + item.size() || item.empty())
            throw ValidationError("--k-grid: '" + s + "' is not a comma-separated list of integers");
        out.push_back(v);
    }
    return out;
}

/// Config file first, then command-line overrides.
inline Config resolve_config(const Flags& f) {
    Config c = f.config_path.empty() ? Config{} : load_config(f.config_path);
    if (!f.out.empty()) c.output_dir = f.out;
    if (!f.reach.empty()) c.reach = f.reach;
    if (!f.edges.empty()) c.edges = f.edges;
    if (!f.tokens.empty()) c.tokens = f.tokens;
    if (!f.stoplist.empty()) c.stoplist = f.stoplist;
    if (!f.estimator.empty()) c.estimator = parse_estimator(f.estimator);
    if (!f.weight_basis.empty()) c.basis = parse_weight_basis(f.weight_basis);
    if (!f.k_grid.empty()) c.k_grid = parse_k_grid(f.k_grid);
    if (f.seed) c.seed = *f.seed;
    if (f.iters) c.iters = *f.iters;
    if (f.top_n) c.top_n = *f.top_n;
    if (f.top_k) c.top_k = *f.top_k;
    if (f.bins) c.bins = *f.bins;
    if (f.min_clusters) c.min_clusters = *f.min_clusters;
    if (f.max_clusters) c.max_clusters = *f.max_clusters;
    if (f.alpha) c.alpha = *f.alpha;
    if (f.beta) c.beta = *f.beta;
    if (f.multiracial_rate) c.multiracial_rate = *f.multiracial_rate;
    if (f.log_base) c.log_base = *f.log_base;
    if (f.censor_floor) c.censor_floor = *f.censor_floor;
    c.validate();
    return c;
}

inline void run_stage(const std::string& name, const Flags& flags, std::ostream& err) {
    Run run(name, resolve_config(flags), err);
    if (name == "ingest") {
        stage_ingest(run);
    } else if (name == "align") {
        stage_align(run);
    } else if (name == "deconfound") {
        stage_deconfound(run);
    } else if (name == "shift") {
        stage_shift(run);
    } else if (name == "graph") {
        stage_graph(run);
    } else if (name == "topics") {
        stage_topics(run);
    } else if (name == "report") {
        stage_report(run);
    } else if (name == "pipeline") {
        stage_ingest(run);
        stage_align(run);
        stage_deconfound(run);
        stage_shift(run);
        if (run.config().edges.empty())
            run.warn({"graph_skipped", "no edges input; graph stage skipped", json::object()});
        else
            stage_graph(run);
        if (run.config().tokens.empty())
            run.warn({"topics_skipped", "no tokens input; topics stage skipped", json::object()});
        else
            stage_topics(run);
        stage_report(run);
    }
    run.finish();
}

inline json read_json_config(const std::string& path) {
    if (path.empty()) return json::object();
    const auto text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

inline void run_synth(const std::string& kind, const std::string& config_path, std::optional<uint64_t> seed,
                      const std::string& out, std::ostream& err) {
    Config params;
    params.output_dir = out;
    json cfg_json = read_json_config(config_path);
    Run run("synth-" + kind, params, err);
    if (!config_path.empty()) run.read_input(config_path);
    json truth;
    json resolved;
    if (kind == "reach") {
        auto cfg = cfg_json.empty() ? ReachSynthConfig::standard() : reach_config_from_json(cfg_json);
        if (seed) cfg.seed = *seed;
        auto res = generate_reach(cfg);
        run.emit("reach.csv", serialize_reach(res.table));
        truth = res.truth.to_json();
        resolved = to_json(cfg);
    } else if (kind == "graph") {
        auto cfg = graph_config_from_json(cfg_json);
        if (seed) cfg.seed = *seed;
        auto g = generate_planted_graph(cfg);
        std::ostringstream csv;
        write_synth_edges_csv(csv, g);
        run.emit("edges.csv", csv.str());
        json labels = json::object();
        for (size_t i = 0; i < g.ids.size(); ++i) labels[g.ids[i]] = g.labels[i];
        truth = {{"blocks", cfg.blocks}, {"labels", labels}, {"edges", g.edges.size()}};
        resolved = to_json(cfg);
    } else if (kind == "corpus") {
        auto cfg = corpus_config_from_json(cfg_json);
        if (seed) cfg.seed = *seed;
        auto res = generate_planted_corpus(cfg);
        std::ostringstream csv;
        write_tokens_csv(csv, res.rows);
        run.emit("tokens.csv", csv.str());
        truth = {{"vocab", res.vocab}, {"phi", res.phi}, {"mixtures", res.mixtures}};
        resolved = to_json(cfg);
    } else {
        throw ValidationError("synth: kind must be reach|graph|corpus");
    }
    truth["kind"] = kind;
    run.emit("ground_truth.json", dump(truth));
    run.finish({{"parameters", {{"kind", kind}, {"generator", resolved}}}, {"seed", resolved["seed"]}});
}

inline void run_ols(const std::string& data, const std::string& outcome, const std::string& focal,
                    const std::string& covariate, double threshold, std::ostream& out) {
    auto survey = SurveyData::parse(CsvReader(read_file(data), data));
    auto rep = attenuation_report(survey, outcome, focal, covariate, threshold);
    out << dump(to_json(rep));
}

/// Runs one invocation. Returns 0 on success, 1 on validation errors and bad
/// usage, 2 on I/O errors.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Political alignment of interests, deconfounded for audience demographics.", "deconfound"};
    app.require_subcommand(1);
    Flags flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "JSON configuration file");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--seed", flags.seed, "random seed (overrides the config)");
    };
    struct StageDef {
        const char* name;
        const char* help;
    };
    const StageDef stages[] = {
        {"ingest", "clean a reach table: White estimation, political filter, censor flags"},
        {"align", "political alignment and relevance per interest"},
        {"deconfound", "demographically deconfounded alignment per category"},
        {"shift", "Jensen-Shannon and Kolmogorov-Smirnov shift per category"},
        {"graph", "cluster the co-follow graph"},
        {"topics", "per-party topic models and topic-level alignment shifts"},
        {"report", "consolidated report from existing artifacts"},
        {"pipeline", "ingest, align, deconfound, shift, graph, topics, report"},
    };
    std::vector<CLI::App*> stage_apps;
    for (const auto& s : stages) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub);
        std::string n = s.name;
        if (n == "ingest" || n == "pipeline") {
            sub->add_option("--reach", flags.reach, "reach.csv input");
            sub->add_option("--multiracial-rate", flags.multiracial_rate, "share of Black/Hispanic reach also counted as White");
            sub->add_option("--censor-floor", flags.censor_floor, "reach censoring floor");
        }
        if (n == "align" || n == "report" || n == "pipeline") sub->add_option("--top-k", flags.top_k, "rows per top-k table");
        if (n == "deconfound" || n == "pipeline") {
            sub->add_option("--estimator", flags.estimator, "subgroup baseline estimator")
                ->check(CLI::IsMember({"mean", "pooled"}));
            sub->add_option("--weight-basis", flags.weight_basis, "subgroup weight basis")
                ->check(CLI::IsMember({"total", "partisan"}));
        }
        if (n == "shift" || n == "pipeline") {
            sub->add_option("--bins", flags.bins, "histogram bins over [-1, 1]");
            sub->add_option("--log-base", flags.log_base, "logarithm base for Jensen-Shannon");
        }
        if (n == "graph" || n == "pipeline") {
            sub->add_option("--edges", flags.edges, "edges.csv input");
            sub->add_option("--min-clusters", flags.min_clusters, "smallest acceptable cluster count");
            sub->add_option("--max-clusters", flags.max_clusters, "largest acceptable cluster count");
        }
        if (n == "topics" || n == "pipeline") {
            sub->add_option("--tokens", flags.tokens, "tokens.csv input");
            sub->add_option("--stoplist", flags.stoplist, "stoplist file, one entry per line, trailing * for prefixes");
            sub->add_option("--k-grid", flags.k_grid, "comma-separated topic counts");
            sub->add_option("--iters", flags.iters, "Gibbs sweeps");
            sub->add_option("--alpha", flags.alpha, "document-topic prior (default 50/K)");
            sub->add_option("--beta", flags.beta, "topic-word prior");
            sub->add_option("--top-n", flags.top_n, "top words per topic");
        }
        stage_apps.push_back(sub);
    }

    auto* synth = app.add_subcommand("synth", "seeded synthetic data with ground truth");
    std::string synth_kind, synth_config, synth_out = "synth";
    std::optional<uint64_t> synth_seed;
    synth->add_option("kind", synth_kind, "reach | graph | corpus")->required()->check(CLI::IsMember({"reach", "graph", "corpus"}));
    synth->add_option("--config", synth_config, "generator JSON configuration");
    synth->add_option("--seed", synth_seed, "random seed (overrides the config)");
    synth->add_option("--out", synth_out, "output directory");

    auto* ols = app.add_subcommand("ols", "nested OLS fits and the attenuation report");
    std::string data, outcome, focal, covariate;
    double threshold = 0.05;
    ols->add_option("--data", data, "survey CSV with named columns")->required();
    ols->add_option("--outcome", outcome, "outcome column")->required();
    ols->add_option("--focal", focal, "focal predictor column")->required();
    ols->add_option("--covariate", covariate, "covariate column")->required();
    ols->add_option("--threshold", threshold, "significance threshold");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        for (auto* s : app.get_subcommands()) out << s->help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return 1;
    }

    try {
        auto* chosen = app.get_subcommands().front();
        const std::string name = chosen->get_name();
        if (name == "synth")
            run_synth(synth_kind, synth_config, synth_seed, synth_out, err);
        else if (name == "ols")
            run_ols(data, outcome, focal, covariate, threshold, out);
        else
            run_stage(name, flags, err);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace deconf::cli
