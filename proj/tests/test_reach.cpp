#include <catch_amalgamated.hpp>

#include <random>

#include "support.hpp"

using namespace deconf;
using testing::put;

namespace {

ReachTable parse(const std::string& text) { return parse_reach(CsvReader(text, "reach.csv")); }

std::string header() { return std::string(kReachHeader) + "\n"; }

}  // namespace

TEST_CASE("subgroup labels are canonical per category") {
    CHECK(subgroups_of(Category::RaceEthnicity).size() == 4);
    CHECK(subgroups_of(Category::Education).size() == 2);
    CHECK(subgroups_of(Category::Age).size() == 4);
    CHECK(subgroups_of(Category::Gender).size() == 2);
    CHECK(subgroups_of(Category::Income).size() == 4);
    CHECK(find_subgroup(Category::Age, "58-100"));
    CHECK_FALSE(find_subgroup(Category::Age, "57-100"));
    CHECK(find_subgroup(Category::None, "all")->is_marginal());
    CHECK_FALSE(find_subgroup(Category::Gender, "asian"));
    CHECK(kIdeologyCount == 6);
}

TEST_CASE("parse three valid rows") {
    auto t = parse(header() +
                   "a1,\"Cats, dogs\",very_liberal,none,all,10\n"
                   "a1,\"Cats, dogs\",any,none,all,40\n"
                   "b2,Birds,moderate,race_ethnicity,black,7\n");
    CHECK(t.record_count() == 3);
    CHECK(t.stats().rows_ingested == 3);
    CHECK(t.interest_count() == 2);
    CHECK(t.interest(0).name == "Cats, dogs");
    CHECK(*t.count(0, Subgroup::marginal(), Ideology::Any) == 40);
    CHECK(*t.count(1, Subgroup::black(), Ideology::Moderate) == 7);
    CHECK_FALSE(t.count(1, Subgroup::black(), Ideology::Any));
}

TEST_CASE("parse errors name the problem and the line") {
    auto err = [](const std::string& body) {
        try {
            parse(header() + body);
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    auto m = err("a,A,centrist,none,all,3\n");
    CHECK_THAT(m, Catch::Matchers::ContainsSubstring("centrist"));
    CHECK_THAT(m, Catch::Matchers::ContainsSubstring("reach.csv:2"));
    CHECK_THAT(err("a,A,moderate,race_ethnicity,martian,3\n"), Catch::Matchers::ContainsSubstring("martian"));
    CHECK_THAT(err("a,A,moderate,none,all,3\na,A,moderate,none,all,4\n"),
               Catch::Matchers::ContainsSubstring("duplicate"));
    CHECK_THAT(err("a,A,moderate,none,all,-3\n"), Catch::Matchers::ContainsSubstring("negative"));
    CHECK_THAT(err("a,A,moderate,none,all,x\n"), Catch::Matchers::ContainsSubstring("malformed"));
    CHECK_THAT(err("a,A,moderate,none\n"), Catch::Matchers::ContainsSubstring("fields"));
    CHECK_THROWS_AS(parse("id,name\n"), ValidationError);
    CHECK_THROWS_AS(parse(""), ValidationError);
}

TEST_CASE("columns are located by header name") {
    auto t = parse("count,demo_subgroup,demo_category,ideology,interest_name,interest_id\n5,all,none,any,Name,x\n");
    CHECK(*t.count(0, Subgroup::marginal(), Ideology::Any) == 5);
    ReachSchema schema;
    schema.count = "reach";
    auto u = parse_reach(CsvReader("interest_id,interest_name,ideology,demo_category,demo_subgroup,reach\n"
                                   "x,N,any,none,all,9\n",
                                   "s"),
                         schema);
    CHECK(*u.count(0, Subgroup::marginal(), Ideology::Any) == 9);
}

TEST_CASE("byte order mark and CRLF line endings are accepted") {
    auto t = parse("\xEF\xBB\xBF" + std::string(kReachHeader) + "\r\nq,Q,any,none,all,3\r\n");
    CHECK(t.record_count() == 1);
}

TEST_CASE("binarize sums liberal and conservative buckets") {
    ReachTable t;
    put(t, "a", Subgroup::marginal(), 10, 20, 5, 3, 7);
    put(t, "b", Subgroup::marginal(), 0, 0, 0, 0, 0);
    put(t, "c", Subgroup::marginal(), 0, 0, 0, 1, 0);
    t = binarize_ideology(std::move(t));
    CHECK(t.liberal(0, Subgroup::marginal()) == 30);
    CHECK(t.conservative(0, Subgroup::marginal()) == 10);
    CHECK(t.liberal(1, Subgroup::marginal()) == 0);
    CHECK(t.conservative(1, Subgroup::marginal()) == 0);
    CHECK(t.liberal(2, Subgroup::marginal()) == 0);
    CHECK(t.conservative(2, Subgroup::marginal()) == 1);
    CHECK(*t.count(0, Subgroup::marginal(), Ideology::Moderate) == 5);
}

TEST_CASE("binarized view requires binarization") {
    ReachTable t;
    put(t, "a", Subgroup::marginal(), 1, 1, 1, 1, 1);
    CHECK_THROWS_AS(t.liberal(0, Subgroup::marginal()), ValidationError);
}

TEST_CASE("binarization is idempotent and bounded by the bucket sum") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int64_t> d(0, 500);
    ReachTable t;
    for (int i = 0; i < 50; ++i)
        for (auto s : {Subgroup::marginal(), Subgroup::asian(), Subgroup(7)})
            put(t, "i" + std::to_string(i), s, d(rng), d(rng), d(rng), d(rng), d(rng));
    auto once = binarize_ideology(t);
    auto twice = binarize_ideology(once);
    for (size_t i = 0; i < t.interest_count(); ++i)
        for (auto s : {Subgroup::marginal(), Subgroup::asian(), Subgroup(7)}) {
            CHECK(once.liberal(i, s) == twice.liberal(i, s));
            CHECK(once.conservative(i, s) == twice.conservative(i, s));
            CHECK(once.liberal(i, s) + once.conservative(i, s) <= *once.bucket_sum(i, s));
        }
}

TEST_CASE("White estimation per ideology slice") {
    ReachTable t;
    size_t i = t.add_interest("x", "X");
    t.set_count(i, Subgroup::marginal(), Ideology::VeryLiberal, 1000);
    t.set_count(i, Subgroup::asian(), Ideology::VeryLiberal, 100);
    t.set_count(i, Subgroup::black(), Ideology::VeryLiberal, 200);
    t.set_count(i, Subgroup::hispanic(), Ideology::VeryLiberal, 100);
    auto w = estimate_white(t, 0.12);
    CHECK(*w.count(0, Subgroup::white(), Ideology::VeryLiberal) == 636);
    CHECK(w.stats().white_slices_derived == 1);

    auto w0 = estimate_white(t, 0.0);
    CHECK(*w0.count(0, Subgroup::white(), Ideology::VeryLiberal) == 1000 - 100 - 200 - 100);
}

TEST_CASE("negative White estimate is clamped with a warning") {
    ReachTable t;
    size_t i = t.add_interest("x", "X");
    t.set_count(i, Subgroup::marginal(), Ideology::Moderate, 100);
    t.set_count(i, Subgroup::asian(), Ideology::Moderate, 0);
    t.set_count(i, Subgroup::black(), Ideology::Moderate, 150);
    t.set_count(i, Subgroup::hispanic(), Ideology::Moderate, 0);
    auto w = estimate_white(t);
    CHECK(*w.count(0, Subgroup::white(), Ideology::Moderate) == 0);
    REQUIRE(w.warnings().size() == 1);
    CHECK(w.warnings()[0].code == "white_clamped");
    CHECK(w.warnings()[0].detail["raw"].get<double>() == Catch::Approx(-32.0));
    CHECK(w.stats().white_slices_clamped == 1);
}

TEST_CASE("White rounding is to nearest with ties away from zero") {
    ReachTable t;
    size_t i = t.add_interest("x", "X");
    // 100 - 0.5 * 1 = 99.5 -> 100
    t.set_count(i, Subgroup::marginal(), Ideology::Any, 100);
    t.set_count(i, Subgroup::black(), Ideology::Any, 1);
    CHECK(*estimate_white(t, 0.5).count(0, Subgroup::white(), Ideology::Any) == 100);
    // 100 - 0.75 * 1 = 99.25 -> 99
    CHECK(*estimate_white(t, 0.25).count(0, Subgroup::white(), Ideology::Any) == 99);
}

TEST_CASE("White estimation reports slices without a marginal and keeps supplied White") {
    ReachTable t;
    size_t i = t.add_interest("x", "X");
    t.set_count(i, Subgroup::asian(), Ideology::Moderate, 5);
    t.set_count(i, Subgroup::marginal(), Ideology::Any, 50);
    t.set_count(i, Subgroup::asian(), Ideology::Any, 5);
    t.set_count(i, Subgroup::white(), Ideology::Any, 30);
    auto w = estimate_white(t);
    CHECK_FALSE(w.count(0, Subgroup::white(), Ideology::Moderate));
    CHECK(w.stats().white_slices_missing_marginal == 1);
    CHECK(w.warnings().at(0).code == "white_missing_marginal");
    CHECK(*w.count(0, Subgroup::white(), Ideology::Any) == 30);
    CHECK_THROWS_AS(estimate_white(t, 1.5), ValidationError);
}

TEST_CASE("White estimation with rate 0 equals the residual of named subgroups") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int64_t> d(0, 300);
    for (int trial = 0; trial < 100; ++trial) {
        ReachTable t;
        size_t i = t.add_interest("x", "X");
        int64_t a = d(rng), b = d(rng), h = d(rng), w = d(rng);
        t.set_count(i, Subgroup::marginal(), Ideology::Any, a + b + h + w);
        t.set_count(i, Subgroup::asian(), Ideology::Any, a);
        t.set_count(i, Subgroup::black(), Ideology::Any, b);
        t.set_count(i, Subgroup::hispanic(), Ideology::Any, h);
        CHECK(*estimate_white(t, 0.0).count(0, Subgroup::white(), Ideology::Any) == w);
    }
}

TEST_CASE("political filter drops interests without partisan followers") {
    ReachTable t;
    put(t, "a", Subgroup::marginal(), 0, 0, 9, 0, 0);
    put(t, "b", Subgroup::marginal(), 1, 0, 0, 0, 0);
    put(t, "c", Subgroup::marginal(), 0, 0, 0, 0, 0);
    put(t, "d", Subgroup::marginal(), 0, 0, 3, 2, 0);
    put(t, "e", Subgroup::marginal(), 4, 4, 4, 4, 4);
    auto f = filter_political(binarize_ideology(t));
    REQUIRE(f.interest_count() == 3);
    CHECK(f.interest(0).id == "b");
    CHECK(f.interest(1).id == "d");
    CHECK(f.interest(2).id == "e");
    CHECK(f.stats().interests_removed == 2);
    CHECK(f.find("e") == 2u);
    CHECK_FALSE(f.find("a"));
    CHECK_THROWS_AS(filter_political(t), ValidationError);
}

TEST_CASE("censor flags never alter counts") {
    ReachTable t;
    size_t i = t.add_interest("x", "X");
    t.set_count(i, Subgroup::marginal(), Ideology::VeryLiberal, 20);
    t.set_count(i, Subgroup::marginal(), Ideology::SomewhatLiberal, 21);
    t.set_count(i, Subgroup::marginal(), Ideology::Moderate, 19);
    t.set_count(i, Subgroup::marginal(), Ideology::SomewhatConservative, 0);
    auto f = flag_censored(t, 20);
    CHECK(f.censored(0, Subgroup::marginal(), Ideology::VeryLiberal));
    CHECK_FALSE(f.censored(0, Subgroup::marginal(), Ideology::SomewhatLiberal));
    CHECK(f.censored(0, Subgroup::marginal(), Ideology::Moderate));
    CHECK_FALSE(f.censored(0, Subgroup::marginal(), Ideology::SomewhatConservative));
    CHECK(f.stats().censored_flags == 2);
    REQUIRE(f.warnings().size() == 1);
    CHECK(f.warnings()[0].code == "below_censor_floor");
    CHECK(*f.count(0, Subgroup::marginal(), Ideology::Moderate) == 19);
    CHECK(*f.count(0, Subgroup::marginal(), Ideology::VeryLiberal) == 20);
}

TEST_CASE("ingest, serialize, ingest round-trips byte-identically") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int64_t> d(0, 100000);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kSubgroupCount) - 1);
    ReachTable t;
    const char* names[] = {"plain", "with, comma", "with \"quotes\"", "caf\xC3\xA9"};
    for (int i = 0; i < 40; ++i) {
        size_t idx = t.add_interest("id" + std::to_string(i), names[i % 4]);
        for (int k = 0; k < 10; ++k)
            t.set_count(idx, Subgroup(static_cast<uint8_t>(pick(rng))), static_cast<Ideology>(k % 6), d(rng));
    }
    const auto first = serialize_reach(t);
    const auto back = parse(first);
    CHECK(serialize_reach(back) == first);
    CHECK(back.interest(1).name == "with, comma");
    CHECK(back.interest(2).name == "with \"quotes\"");
    CHECK(back.record_count() == t.record_count());
}

TEST_CASE("warnings serialize as JSON lines") {
    Warning w{"code_x", "message", {{"k", 1}}};
    auto line = w.to_json_line();
    auto j = nlohmann::json::parse(line);
    CHECK(j["code"] == "code_x");
    CHECK(j["detail"]["k"] == 1);
}
