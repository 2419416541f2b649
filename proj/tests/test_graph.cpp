#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include <deconf/graph.hpp>
#include <deconf/synth.hpp>

#include "oracles.hpp"

using namespace deconf;
using Catch::Approx;

namespace {

CoFollowGraph from_rows(const std::vector<RawEdge>& rows) { return build_graph(rows); }

std::vector<std::vector<double>> dense(const CoFollowGraph& g) {
    std::vector<std::vector<double>> a(g.node_count(), std::vector<double>(g.node_count(), 0.0));
    for (const auto& e : g.edges()) a[e.u][e.v] = a[e.v][e.u] = double(e.weight);
    return a;
}

double best_level_modularity(const ClusterHierarchy& h) {
    return *std::max_element(h.modularity.begin(), h.modularity.end());
}

CoFollowGraph barbell() {
    return from_rows({{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 1}, {"d", "e", 1}, {"e", "f", 1}, {"d", "f", 1},
                      {"c", "d", 1}});
}

}  // namespace

TEST_CASE("edge list is symmetrized and merged") {
    auto g = from_rows({{"b", "a", 2}, {"a", "b", 3}, {"c", "c", 9}, {"c", "a", 1}});
    REQUIRE(g.node_count() == 3);
    CHECK(g.ids() == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges()[0].u == 0);
    CHECK(g.edges()[0].v == 1);
    CHECK(g.edges()[0].weight == 5);
    CHECK(g.strength(0) == 6);
    CHECK(g.total_weight() == 6);
    REQUIRE(g.warnings.size() == 1);
    CHECK(g.warnings[0].code == "self_loop_dropped");
    CHECK_THROWS_AS(from_rows({{"a", "b", 0}}), ValidationError);
}

TEST_CASE("edge file parsing") {
    auto g = parse_edges(CsvReader("src_interest,dst_interest,cofollow_count\nx,y,4\ny,z,1\n", "e.csv"));
    CHECK(g.node_count() == 3);
    CHECK_THROWS_WITH(parse_edges(CsvReader("a,b,c\n", "e.csv")), Catch::Matchers::ContainsSubstring("e.csv:1"));
    CHECK_THROWS_WITH(parse_edges(CsvReader("src,dst,weight\nx,y,-1\n", "e.csv")),
                      Catch::Matchers::ContainsSubstring("non-positive"));
    std::ostringstream os;
    write_edges_csv(os, g);
    CHECK(os.str() == "src_interest,dst_interest,cofollow_count\nx,y,4\ny,z,1\n");
}

TEST_CASE("largest connected component") {
    auto g = from_rows({{"a", "b", 1}, {"c", "d", 1}, {"d", "e", 1}, {"f", "g", 1}});
    size_t n = 0;
    connected_components(g, &n);
    CHECK(n == 3);
    auto big = largest_component(g);
    CHECK(big.ids() == std::vector<std::string>{"c", "d", "e"});
    CHECK(big.edge_count() == 2);

    SECTION("ties go to the component with the smallest id") {
        auto t = from_rows({{"m", "n", 1}, {"b", "c", 1}});
        CHECK(largest_component(t).ids() == std::vector<std::string>{"b", "c"});
    }
}

TEST_CASE("modularity of simple partitions") {
    auto tri = from_rows({{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 1}});
    CHECK(modularity(tri, {0, 0, 0}) == Approx(0.0).margin(1e-15));
    CHECK(modularity(tri, {0, 1, 2}) == Approx(-1.0 / 3.0));
    auto bb = barbell();
    CHECK(modularity(bb, {0, 0, 0, 1, 1, 1}) == Approx(5.0 / 14.0));
    CHECK(modularity(bb, {7, 7, 7, 3, 3, 3}) == Approx(5.0 / 14.0));

    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> w(0, 5), lab(0, 2);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<RawEdge> rows;
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j)
                if (int x = w(rng); x > 2) rows.push_back({std::string(1, char('a' + i)), std::string(1, char('a' + j)), x});
        if (rows.empty()) continue;
        auto g = from_rows(rows);
        std::vector<uint32_t> part(g.node_count());
        std::vector<int> ipart(g.node_count());
        for (size_t i = 0; i < part.size(); ++i) ipart[i] = int(part[i] = uint32_t(lab(rng)));
        CHECK(modularity(g, part) == Approx(oracle::modularity(dense(g), ipart)).margin(1e-12));
    }
}

TEST_CASE("clustering a triangle keeps it whole") {
    auto tri = from_rows({{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 1}});
    auto h = cluster(tri, 1);
    CHECK(h.cluster_count.back() == 1);
    CHECK(best_level_modularity(h) == Approx(0.0).margin(1e-12));
}

TEST_CASE("barbell reaches the exhaustive optimum") {
    auto bb = barbell();
    auto [best_q, best_part] = oracle::best_partition(dense(bb));
    CHECK(best_q == Approx(5.0 / 14.0));
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        auto h = cluster(bb, seed);
        CHECK(best_level_modularity(h) == Approx(best_q).margin(1e-12));
    }
}

TEST_CASE("small random graphs stay close to the exhaustive optimum") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> w(0, 9);
    int near = 0, total = 0;
    for (int rep = 0; rep < 40; ++rep) {
        std::vector<RawEdge> rows;
        for (int i = 0; i < 8; ++i)
            for (int j = i + 1; j < 8; ++j)
                if (int x = w(rng); x > 5) rows.push_back({std::string(1, char('a' + i)), std::string(1, char('a' + j)), x});
        if (rows.size() < 2) continue;
        auto g = from_rows(rows);
        auto exact = oracle::best_partition(dense(g)).first;
        double got = best_level_modularity(cluster(g, 3));
        CHECK(got <= exact + 1e-12);
        ++total;
        near += got >= exact - 0.02;
    }
    // Greedy search is not exact, but should almost always land near the optimum.
    CHECK(near >= total * 9 / 10);
}

TEST_CASE("planted partition is recovered") {
    GraphSynthConfig cfg;
    cfg.seed = 4;
    auto s = generate_planted_graph(cfg);
    CoFollowGraph g(s.ids, s.edges);
    auto h = cluster(g, 7);
    size_t best = size_t(std::max_element(h.modularity.begin(), h.modularity.end()) - h.modularity.begin());
    CHECK(h.cluster_count[best] == 4);
    CHECK(normalized_mutual_information(h.levels[best], s.labels) >= 0.9);
    for (size_t l = 1; l < h.level_count(); ++l) CHECK(h.cluster_count[l] <= h.cluster_count[l - 1]);
}

TEST_CASE("clustering is deterministic for a seed") {
    GraphSynthConfig cfg;
    cfg.blocks = {40, 30, 30};
    cfg.p_in = 0.2;
    cfg.p_out = 0.03;
    auto s = generate_planted_graph(cfg);
    CoFollowGraph g(s.ids, s.edges);
    auto a = cluster(g, 99), b = cluster(g, 99);
    CHECK(a.levels == b.levels);
    CHECK(a.modularity == b.modularity);
}

TEST_CASE("disconnected graphs are clustered per component") {
    auto g = from_rows({{"a", "b", 1}, {"b", "c", 1}, {"a", "c", 1}, {"x", "y", 5}});
    auto h = cluster(g, 1);
    auto& top = h.levels.back();
    CHECK(top[0] == top[1]);
    CHECK(top[1] == top[2]);
    CHECK(top[3] == top[4]);
    CHECK(top[0] != top[3]);
}

TEST_CASE("level selection") {
    CHECK(level_select(hierarchy_from_counts({120, 61, 18, 5})) == 2);
    CHECK(level_select(hierarchy_from_counts({40, 3})) == 0);
    CHECK(level_select(hierarchy_from_counts({16})) == 0);
    // Two levels in range: the coarser one wins.
    CHECK(level_select(hierarchy_from_counts({100, 29, 16, 4})) == 2);
    // Equidistant on both sides: the coarser one wins.
    CHECK(level_select(hierarchy_from_counts({40, 5})) == 1);
    CHECK(level_select(hierarchy_from_counts({8, 3}), 2, 4) == 1);
    CHECK_THROWS_AS(level_select(ClusterHierarchy{}), ValidationError);
    CHECK_THROWS_AS(level_select(hierarchy_from_counts({5}), 9, 3), ValidationError);
}

TEST_CASE("normalized mutual information") {
    CHECK(normalized_mutual_information({0, 0, 1, 1}, {5, 5, 2, 2}) == Approx(1.0));
    CHECK(normalized_mutual_information({0, 0, 1, 1}, {0, 1, 0, 1}) == Approx(0.0).margin(1e-12));
    CHECK(normalized_mutual_information({0, 0, 0}, {1, 1, 1}) == 1.0);
    CHECK_THROWS_AS(normalized_mutual_information({0}, {0, 1}), ValidationError);
}

TEST_CASE("annotated node and edge tables") {
    auto g = from_rows({{"a", "b", 2}, {"b", "c", 3}});
    auto a = annotate(g, {{"a", 0.5}, {"b", -0.25}}, {{"a", 100}, {"c", 7}}, {0, 0, 1});
    REQUIRE(a.missing_alignment == std::vector<std::string>{"c"});
    CHECK(a.nodes[2].pi_missing);
    CHECK(a.nodes[1].followers == 0);
    std::ostringstream nodes, edges, clusters;
    write_nodes_csv(nodes, a);
    CHECK(nodes.str() == "id,followers,pi,cluster\na,100,0.5,0\nb,0,-0.25,0\nc,7,0,1\n");
    write_annotated_edges_csv(edges, a);
    CHECK(edges.str() == "src,dst,weight\na,b,2\nb,c,3\n");

    auto h = hierarchy_from_counts({2});
    h.levels[0] = {0, 0, 1};
    write_clusters_csv(clusters, g, h);
    CHECK(clusters.str() == "interest_id,level,cluster_id\na,0,0\nb,0,0\nc,0,1\n");
    auto j = hierarchy_json(h, 0);
    CHECK(j["selected_level"] == 0);
    CHECK(j["levels"][0]["clusters"] == 2);
    CHECK_THROWS_AS(annotate(g, {}, {}, {0}), ValidationError);
}
