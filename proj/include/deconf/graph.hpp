#pragma once

// Weighted interest co-follow graph and multi-level modularity clustering.
//
// Clustering is Louvain-style: repeated local-moving sweeps maximize
//   Q = (1/2m) * sum_ij [A_ij - k_i k_j / 2m] * delta(c_i, c_j)
// and each aggregation of the resulting communities yields one hierarchy
// level (level 0 is the finest).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace deconf {

struct Edge {
    uint32_t u = 0;
    uint32_t v = 0;
    int64_t weight = 0;
};

/// Undirected simple graph with positive integer weights. Nodes are indexed
/// in ascending id order.
class CoFollowGraph {
public:
    CoFollowGraph() = default;

    /// `ids` must be sorted and unique; edges must satisfy u < v and be unique.
    CoFollowGraph(std::vector<std::string> ids, std::vector<Edge> edges)
        : ids_(std::move(ids)), edges_(std::move(edges)) {
        const size_t n = ids_.size();
        offsets_.assign(n + 1, 0);
        strength_.assign(n, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
            strength_[e.u] += e.weight;
            strength_[e.v] += e.weight;
            total_weight_ += e.weight;
        }
        for (size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
        neighbors_.resize(offsets_[n]);
        weights_.resize(offsets_[n]);
        std::vector<size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (const auto& e : edges_) {
            neighbors_[fill[e.u]] = e.v;
            weights_[fill[e.u]++] = e.weight;
            neighbors_[fill[e.v]] = e.u;
            weights_[fill[e.v]++] = e.weight;
        }
    }

    size_t node_count() const { return ids_.size(); }
    size_t edge_count() const { return edges_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::string& id(size_t i) const { return ids_[i]; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::optional<uint32_t> find(const std::string& id) const {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) return std::nullopt;
        return static_cast<uint32_t>(it - ids_.begin());
    }

    size_t degree(size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    /// Sum of incident edge weights.
    int64_t strength(size_t i) const { return strength_[i]; }
    /// Sum of all edge weights (m).
    int64_t total_weight() const { return total_weight_; }

    template <typename Fn>
    void for_each_neighbor(size_t i, Fn&& fn) const {
        for (size_t p = offsets_[i]; p < offsets_[i + 1]; ++p) fn(neighbors_[p], weights_[p]);
    }

    std::vector<Warning> warnings;

private:
    std::vector<std::string> ids_;
    std::vector<Edge> edges_;
    std::vector<size_t> offsets_;
    std::vector<uint32_t> neighbors_;
    std::vector<int64_t> weights_;
    std::vector<int64_t> strength_;
    int64_t total_weight_ = 0;
};

struct RawEdge {
    std::string src;
    std::string dst;
    int64_t weight;
};

/// Builds a simple graph: (u,v)/(v,u) duplicates are summed and self-loops
/// dropped with a warning.
inline CoFollowGraph build_graph(const std::vector<RawEdge>& rows) {
    std::vector<Warning> warnings;
    std::unordered_map<std::string, uint32_t> first_seen;
    std::vector<std::string> names;
    std::vector<Edge> edges;
    edges.reserve(rows.size());
    auto intern = [&](const std::string& s) {
        auto [it, inserted] = first_seen.emplace(s, static_cast<uint32_t>(names.size()));
        if (inserted) names.push_back(s);
        return it->second;
    };
    for (const auto& r : rows) {
        if (r.weight <= 0) throw ValidationError("edge (" + r.src + ", " + r.dst + ") has non-positive weight");
        if (r.src == r.dst) {
            warnings.push_back({"self_loop_dropped", "self-loop dropped", {{"node", r.src}, {"weight", r.weight}}});
            continue;
        }
        edges.push_back({intern(r.src), intern(r.dst), r.weight});
    }
    // Renumber nodes in ascending id order.
    std::vector<uint32_t> order(names.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) { return names[a] < names[b]; });
    std::vector<uint32_t> remap(names.size());
    std::vector<std::string> ids(names.size());
    for (uint32_t k = 0; k < order.size(); ++k) {
        remap[order[k]] = k;
        ids[k] = std::move(names[order[k]]);
    }
    for (auto& e : edges) {
        uint32_t a = remap[e.u], b = remap[e.v];
        e.u = std::min(a, b);
        e.v = std::max(a, b);
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    std::vector<Edge> merged;
    merged.reserve(edges.size());
    for (const auto& e : edges) {
        if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v)
            merged.back().weight += e.weight;
        else
            merged.push_back(e);
    }
    CoFollowGraph g(std::move(ids), std::move(merged));
    g.warnings = std::move(warnings);
    return g;
}

/// Reads `src_interest,dst_interest,cofollow_count` rows (the annotated
/// `src,dst,weight` header is accepted too).
inline CoFollowGraph parse_edges(CsvReader reader) {
    std::vector<std::string> f;
    if (!reader.next(f)) reader.fail("missing header");
    bool known = f.size() == 3 && ((f[0] == "src_interest" && f[1] == "dst_interest" && f[2] == "cofollow_count") ||
                                   (f[0] == "src" && f[1] == "dst" && f[2] == "weight"));
    if (!known) reader.fail("unexpected edge header (expected src_interest,dst_interest,cofollow_count)");
    std::vector<RawEdge> rows;
    while (reader.next(f)) {
        if (f.size() != 3) reader.fail("expected 3 fields, got " + std::to_string(f.size()));
        int64_t w = parse_int(f[2], reader, "cofollow_count");
        if (w <= 0) reader.fail("non-positive cofollow_count " + std::to_string(w));
        if (f[0].empty() || f[1].empty()) reader.fail("empty node id");
        rows.push_back({std::move(f[0]), std::move(f[1]), w});
    }
    return build_graph(rows);
}

inline CoFollowGraph load_edges(const std::string& path) { return parse_edges(CsvReader::from_file(path)); }

inline void write_edges_csv(std::ostream& os, const CoFollowGraph& g, bool annotated_header = false) {
    os << (annotated_header ? "src,dst,weight\n" : "src_interest,dst_interest,cofollow_count\n");
    for (const auto& e : g.edges())
        os << csv_escape(g.id(e.u)) << ',' << csv_escape(g.id(e.v)) << ',' << e.weight << '\n';
}

/// Connected-component label per node; labels ordered by smallest member.
inline std::vector<uint32_t> connected_components(const CoFollowGraph& g, size_t* count = nullptr) {
    constexpr uint32_t kUnset = UINT32_MAX;
    std::vector<uint32_t> comp(g.node_count(), kUnset);
    std::vector<uint32_t> stack;
    uint32_t next = 0;
    for (uint32_t s = 0; s < g.node_count(); ++s) {
        if (comp[s] != kUnset) continue;
        comp[s] = next;
        stack.push_back(s);
        while (!stack.empty()) {
            uint32_t u = stack.back();
            stack.pop_back();
            g.for_each_neighbor(u, [&](uint32_t v, int64_t) {
                if (comp[v] == kUnset) {
                    comp[v] = next;
                    stack.push_back(v);
                }
            });
        }
        ++next;
    }
    if (count) *count = next;
    return comp;
}

/// Subgraph induced by the nodes whose flag is set.
inline CoFollowGraph induced_subgraph(const CoFollowGraph& g, const std::vector<bool>& keep) {
    std::vector<uint32_t> remap(g.node_count(), UINT32_MAX);
    std::vector<std::string> ids;
    for (uint32_t i = 0; i < g.node_count(); ++i)
        if (keep[i]) {
            remap[i] = static_cast<uint32_t>(ids.size());
            ids.push_back(g.id(i));
        }
    std::vector<Edge> edges;
    for (const auto& e : g.edges())
        if (keep[e.u] && keep[e.v]) edges.push_back({remap[e.u], remap[e.v], e.weight});
    return CoFollowGraph(std::move(ids), std::move(edges));
}

/// Largest connected component; ties go to the component holding the smallest id.
inline CoFollowGraph largest_component(const CoFollowGraph& g) {
    if (g.node_count() == 0) throw ValidationError("largest_component: empty graph");
    size_t n_comp = 0;
    auto comp = connected_components(g, &n_comp);
    std::vector<size_t> sizes(n_comp, 0);
    for (auto c : comp) ++sizes[c];
    // Components are labelled in order of their smallest node, so the first max wins ties.
    size_t best = static_cast<size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<bool> keep(g.node_count());
    for (size_t i = 0; i < comp.size(); ++i) keep[i] = comp[i] == best;
    return induced_subgraph(g, keep);
}

/// Weighted modularity of a partition (cluster ids need not be contiguous).
inline double modularity(const CoFollowGraph& g, const std::vector<uint32_t>& partition) {
    if (partition.size() != g.node_count()) throw ValidationError("modularity: partition size mismatch");
    const double m2 = 2.0 * static_cast<double>(g.total_weight());
    if (m2 == 0.0) return 0.0;
    std::unordered_map<uint32_t, std::pair<double, double>> acc;  // cluster -> (internal, total degree)
    for (const auto& e : g.edges())
        if (partition[e.u] == partition[e.v]) acc[partition[e.u]].first += 2.0 * static_cast<double>(e.weight);
    for (size_t i = 0; i < g.node_count(); ++i) acc[partition[i]].second += static_cast<double>(g.strength(i));
    // Sum in cluster order for a stable result.
    std::map<uint32_t, std::pair<double, double>> ordered(acc.begin(), acc.end());
    double q = 0.0;
    for (const auto& [c, v] : ordered) q += v.first / m2 - (v.second / m2) * (v.second / m2);
    return q;
}

struct ClusterHierarchy {
    std::vector<std::vector<uint32_t>> levels;  // level 0 finest
    std::vector<double> modularity;
    std::vector<size_t> cluster_count;

    size_t level_count() const { return levels.size(); }
};

namespace detail {

// Weighted graph used during local moving; self-loops carry aggregated
// internal weight (ordered-pair convention).
struct WorkGraph {
    size_t n = 0;
    std::vector<size_t> offsets;
    std::vector<uint32_t> nbr;
    std::vector<double> w;
    std::vector<double> self;
    std::vector<double> k;
    double m2 = 0.0;
};

inline WorkGraph work_graph_of(const CoFollowGraph& g, const std::vector<uint32_t>& nodes,
                               const std::vector<uint32_t>& local) {
    WorkGraph wg;
    wg.n = nodes.size();
    wg.offsets.assign(wg.n + 1, 0);
    wg.self.assign(wg.n, 0.0);
    wg.k.assign(wg.n, 0.0);
    for (size_t i = 0; i < wg.n; ++i) wg.offsets[i + 1] = wg.offsets[i] + g.degree(nodes[i]);
    wg.nbr.resize(wg.offsets[wg.n]);
    wg.w.resize(wg.offsets[wg.n]);
    for (size_t i = 0; i < wg.n; ++i) {
        size_t p = wg.offsets[i];
        g.for_each_neighbor(nodes[i], [&](uint32_t v, int64_t weight) {
            wg.nbr[p] = local[v];
            wg.w[p++] = static_cast<double>(weight);
            wg.k[i] += static_cast<double>(weight);
        });
        wg.m2 += wg.k[i];
    }
    return wg;
}

inline uint64_t next_index(std::mt19937_64& rng, uint64_t bound) { return rng() % bound; }

// Local moving until no node improves. Returns true if any node moved.
inline bool local_moving(const WorkGraph& wg, std::vector<uint32_t>& comm, std::mt19937_64& rng) {
    const size_t n = wg.n;
    std::vector<double> tot(n, 0.0);
    for (size_t i = 0; i < n; ++i) tot[comm[i]] += wg.k[i];
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (size_t i = n; i > 1; --i) std::swap(order[i - 1], order[next_index(rng, i)]);

    std::vector<double> link(n, 0.0);
    std::vector<uint32_t> touched;
    bool any_move = false;
    constexpr int kMaxSweeps = 1000;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        size_t moves = 0;
        for (uint32_t i : order) {
            const uint32_t old_c = comm[i];
            touched.clear();
            for (size_t p = wg.offsets[i]; p < wg.offsets[i + 1]; ++p) {
                uint32_t c = comm[wg.nbr[p]];
                if (link[c] == 0.0) touched.push_back(c);
                link[c] += wg.w[p];
            }
            tot[old_c] -= wg.k[i];
            const double ki_over = wg.k[i] / wg.m2;
            const double stay_gain = link[old_c] - tot[old_c] * ki_over;
            uint32_t best_c = old_c;
            double best_gain = stay_gain;
            const double tol = 1e-12 * std::max(1.0, wg.k[i]);
            for (uint32_t c : touched) {
                if (c == old_c) continue;
                const double gain = link[c] - tot[c] * ki_over;
                if (gain > best_gain + tol) {
                    best_gain = gain;
                    best_c = c;
                } else if (best_c != old_c && std::fabs(gain - best_gain) <= tol && c < best_c) {
                    best_c = c;
                }
            }
            // Strict improvement over staying is required to move.
            if (best_c != old_c && !(best_gain > stay_gain + tol)) best_c = old_c;
            tot[best_c] += wg.k[i];
            if (best_c != old_c) {
                comm[i] = best_c;
                ++moves;
            }
            for (uint32_t c : touched) link[c] = 0.0;
        }
        if (moves == 0) break;
        any_move = true;
    }
    return any_move;
}

// Renumbers communities by first appearance; returns the community count.
inline size_t renumber(std::vector<uint32_t>& comm) {
    std::vector<uint32_t> map(comm.size(), UINT32_MAX);
    uint32_t next = 0;
    for (auto& c : comm) {
        if (map[c] == UINT32_MAX) map[c] = next++;
        c = map[c];
    }
    return next;
}

inline WorkGraph aggregate(const WorkGraph& wg, const std::vector<uint32_t>& comm, size_t n_comm) {
    WorkGraph out;
    out.n = n_comm;
    out.self.assign(n_comm, 0.0);
    out.k.assign(n_comm, 0.0);
    out.m2 = wg.m2;
    std::vector<std::vector<uint32_t>> members(n_comm);
    for (uint32_t i = 0; i < wg.n; ++i) members[comm[i]].push_back(i);
    std::vector<double> acc(n_comm, 0.0);
    std::vector<uint32_t> touched;
    out.offsets.assign(n_comm + 1, 0);
    for (uint32_t c = 0; c < n_comm; ++c) {
        touched.clear();
        for (uint32_t i : members[c]) {
            out.self[c] += wg.self[i];
            out.k[c] += wg.k[i];
            for (size_t p = wg.offsets[i]; p < wg.offsets[i + 1]; ++p) {
                uint32_t d = comm[wg.nbr[p]];
                if (d == c) {
                    out.self[c] += wg.w[p];
                    continue;
                }
                if (acc[d] == 0.0) touched.push_back(d);
                acc[d] += wg.w[p];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (uint32_t d : touched) {
            out.nbr.push_back(d);
            out.w.push_back(acc[d]);
            acc[d] = 0.0;
        }
        out.offsets[c + 1] = out.nbr.size();
    }
    return out;
}

// Louvain on one component; returns per-level partitions of the component's nodes.
inline std::vector<std::vector<uint32_t>> louvain_levels(WorkGraph wg, std::mt19937_64& rng) {
    std::vector<std::vector<uint32_t>> levels;
    std::vector<uint32_t> node_to_comm(wg.n);
    std::iota(node_to_comm.begin(), node_to_comm.end(), 0u);
    while (true) {
        std::vector<uint32_t> comm(wg.n);
        std::iota(comm.begin(), comm.end(), 0u);
        if (!local_moving(wg, comm, rng)) break;
        size_t n_comm = renumber(comm);
        for (auto& c : node_to_comm) c = comm[c];
        levels.push_back(node_to_comm);
        if (n_comm == wg.n) break;
        wg = aggregate(wg, comm, n_comm);
    }
    return levels;
}

}  // namespace detail

/// Multi-level modularity clustering. Components are clustered independently;
/// node visiting order is shuffled by `seed`, so results are reproducible.
inline ClusterHierarchy cluster(const CoFollowGraph& g, uint64_t seed) {
    if (g.node_count() == 0) throw ValidationError("cluster: empty graph");
    size_t n_comp = 0;
    auto comp = connected_components(g, &n_comp);
    std::vector<std::vector<uint32_t>> comp_nodes(n_comp);
    std::vector<uint32_t> local(g.node_count());
    for (uint32_t i = 0; i < g.node_count(); ++i) {
        local[i] = static_cast<uint32_t>(comp_nodes[comp[i]].size());
        comp_nodes[comp[i]].push_back(i);
    }

    std::vector<std::vector<std::vector<uint32_t>>> comp_levels(n_comp);
    size_t depth = 1;
    for (size_t c = 0; c < n_comp; ++c) {
        std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (c + 1)));
        if (comp_nodes[c].size() > 1)
            comp_levels[c] = detail::louvain_levels(detail::work_graph_of(g, comp_nodes[c], local), rng);
        depth = std::max(depth, comp_levels[c].size());
    }

    ClusterHierarchy h;
    for (size_t level = 0; level < depth; ++level) {
        std::vector<uint32_t> part(g.node_count());
        // Offset component-local ids into a global space, then renumber.
        uint32_t offset = 0;
        for (size_t c = 0; c < n_comp; ++c) {
            const auto& nodes = comp_nodes[c];
            uint32_t width = 1;
            if (comp_levels[c].empty()) {
                for (auto v : nodes) part[v] = offset;
            } else {
                const auto& lv = comp_levels[c][std::min(level, comp_levels[c].size() - 1)];
                for (size_t k = 0; k < nodes.size(); ++k) {
                    part[nodes[k]] = offset + lv[k];
                    width = std::max(width, lv[k] + 1);
                }
            }
            offset += width;
        }
        size_t count = detail::renumber(part);
        h.modularity.push_back(modularity(g, part));
        h.cluster_count.push_back(count);
        h.levels.push_back(std::move(part));
    }
    // Never end below the component partition, whose modularity is non-negative.
    std::vector<uint32_t> by_component = comp;
    size_t comp_count = detail::renumber(by_component);
    double q_comp = modularity(g, by_component);
    if (h.modularity.back() < q_comp && h.modularity.back() < 0.0) {
        h.levels.push_back(std::move(by_component));
        h.modularity.push_back(q_comp);
        h.cluster_count.push_back(comp_count);
    }
    return h;
}

/// Coarsest level whose cluster count lies in [min_k, max_k]; otherwise the
/// level nearest the interval, ties toward the coarser level.
inline size_t level_select(const ClusterHierarchy& h, size_t min_k = 15, size_t max_k = 30) {
    if (h.levels.empty()) throw ValidationError("level_select: empty hierarchy");
    if (min_k > max_k) throw ValidationError("level_select: min_k > max_k");
    for (size_t l = h.level_count(); l-- > 0;) {
        size_t k = h.cluster_count[l];
        if (k >= min_k && k <= max_k) return l;
    }
    size_t best = h.level_count() - 1;
    size_t best_dist = SIZE_MAX;
    for (size_t l = h.level_count(); l-- > 0;) {
        size_t k = h.cluster_count[l];
        size_t dist = k < min_k ? min_k - k : k - max_k;
        if (dist < best_dist) {
            best_dist = dist;
            best = l;
        }
    }
    return best;
}

/// Hierarchy reduced to per-level cluster counts, for selection on summaries.
inline ClusterHierarchy hierarchy_from_counts(const std::vector<size_t>& counts) {
    ClusterHierarchy h;
    for (size_t c : counts) {
        h.levels.emplace_back();
        h.modularity.push_back(0.0);
        h.cluster_count.push_back(c);
    }
    return h;
}

/// Normalized mutual information with arithmetic-mean normalization.
inline double normalized_mutual_information(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size() || a.empty()) throw ValidationError("nmi: label vectors must match and be nonempty");
    const double n = static_cast<double>(a.size());
    std::map<uint32_t, double> ca, cb;
    std::map<std::pair<uint32_t, uint32_t>, double> joint;
    for (size_t i = 0; i < a.size(); ++i) {
        ca[a[i]] += 1.0;
        cb[b[i]] += 1.0;
        joint[{a[i], b[i]}] += 1.0;
    }
    auto entropy = [n](const std::map<uint32_t, double>& c) {
        double h = 0.0;
        for (const auto& [k, v] : c) h -= v / n * std::log(v / n);
        return h;
    };
    const double ha = entropy(ca), hb = entropy(cb);
    double mi = 0.0;
    for (const auto& [k, v] : joint) mi += v / n * std::log(v * n / (ca[k.first] * cb[k.second]));
    if (ha + hb == 0.0) return 1.0;
    return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

struct NodeRow {
    std::string id;
    int64_t followers = 0;
    double pi = 0.0;
    uint32_t cluster = 0;
    bool pi_missing = false;
};

struct AnnotatedGraph {
    std::vector<NodeRow> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> missing_alignment;
};

/// Plot-ready node and edge tables. Nodes without an alignment get pi = 0 and
/// are listed in `missing_alignment`.
inline AnnotatedGraph annotate(const CoFollowGraph& g, const std::unordered_map<std::string, double>& alignments,
                               const std::unordered_map<std::string, int64_t>& followers,
                               const std::vector<uint32_t>& partition) {
    if (partition.size() != g.node_count()) throw ValidationError("annotate: partition size mismatch");
    AnnotatedGraph out;
    for (uint32_t i = 0; i < g.node_count(); ++i) {
        NodeRow row;
        row.id = g.id(i);
        row.cluster = partition[i];
        if (auto it = alignments.find(row.id); it != alignments.end()) {
            row.pi = it->second;
        } else {
            row.pi_missing = true;
            out.missing_alignment.push_back(row.id);
        }
        if (auto it = followers.find(row.id); it != followers.end()) row.followers = it->second;
        out.nodes.push_back(std::move(row));
    }
    out.edges = g.edges();
    return out;
}

inline void write_nodes_csv(std::ostream& os, const AnnotatedGraph& a) {
    os << "id,followers,pi,cluster\n";
    for (const auto& r : a.nodes)
        os << csv_escape(r.id) << ',' << r.followers << ',' << fmt_double(r.pi) << ',' << r.cluster << '\n';
}

inline void write_annotated_edges_csv(std::ostream& os, const AnnotatedGraph& a) {
    os << "src,dst,weight\n";
    for (const auto& e : a.edges)
        os << csv_escape(a.nodes[e.u].id) << ',' << csv_escape(a.nodes[e.v].id) << ',' << e.weight << '\n';
}

inline void write_clusters_csv(std::ostream& os, const CoFollowGraph& g, const ClusterHierarchy& h) {
    os << "interest_id,level,cluster_id\n";
    for (uint32_t i = 0; i < g.node_count(); ++i)
        for (size_t l = 0; l < h.level_count(); ++l) os << csv_escape(g.id(i)) << ',' << l << ',' << h.levels[l][i] << '\n';
}

inline nlohmann::json hierarchy_json(const ClusterHierarchy& h, std::optional<size_t> selected = std::nullopt) {
    nlohmann::json j;
    nlohmann::json levels = nlohmann::json::array();
    for (size_t l = 0; l < h.level_count(); ++l)
        levels.push_back({{"level", l}, {"clusters", h.cluster_count[l]}, {"modularity", h.modularity[l]}});
    j["levels"] = levels;
    if (selected) j["selected_level"] = *selected;
    return j;
}

}  // namespace deconf
