#include <catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include <deconf/shiftstats.hpp>
#include <deconf/special.hpp>

#include "oracles.hpp"

using namespace deconf;
using Catch::Approx;

namespace {

std::vector<double> uniform_sample(std::mt19937_64& rng, size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("histogram binning") {
    std::vector<double> v{-1.0, -0.99, 0.0, 0.999, 1.0};
    auto h = histogram(v);
    REQUIRE(h.size() == 100);
    CHECK(h[0] == 2);
    CHECK(h[50] == 1);
    CHECK(h[99] == 2);
    CHECK_THROWS_AS(histogram(std::vector<double>{1.5}), ValidationError);
    HistogramSpec clamp;
    clamp.clamp = true;
    CHECK(histogram(std::vector<double>{1.5}, clamp)[99] == 1);
    CHECK_THROWS_AS(histogram(std::vector<double>{std::nan("")}), ValidationError);
    HistogramSpec none;
    none.bins = 0;
    CHECK_THROWS_AS(histogram(v, none), ValidationError);
}

TEST_CASE("Jensen-Shannon distance examples") {
    std::vector<double> p{1, 0}, q{0.5, 0.5}, r{0, 1};
    CHECK(js_divergence(p, p) == 0.0);
    CHECK(js_distance_probs(p, r) == Approx(1.0).margin(1e-15));
    CHECK(js_divergence(p, q) == Approx(0.311278).margin(1e-6));
    CHECK(js_distance_probs(p, q) == Approx(0.557923).margin(1e-6));
    // Natural log caps the divergence at ln 2.
    CHECK(js_divergence(p, r, std::exp(1.0)) == Approx(std::log(2.0)));
    CHECK_THROWS_AS(js_divergence(p, std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(js_distance_probs(p, std::vector<double>{0, 0}), ValidationError);
}

TEST_CASE("Jensen-Shannon distance properties") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto vec = [&](size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng) < 0.2 ? 0.0 : u(rng);
        v[0] += 0.01;
        return v;
    };
    for (int rep = 0; rep < 300; ++rep) {
        auto a = vec(12), b = vec(12), c = vec(12);
        double ab = js_distance_probs(a, b), bc = js_distance_probs(b, c), ac = js_distance_probs(a, c);
        CHECK(ab == Approx(oracle::js_distance(a, b)).margin(1e-12));
        CHECK(ab == Approx(js_distance_probs(b, a)).margin(1e-15));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
        CHECK(ac <= ab + bc + 1e-12);
        CHECK(js_distance_probs(a, a) == Approx(0.0).margin(1e-7));
    }
}

TEST_CASE("sample JS distance of identical and disjoint samples") {
    std::vector<double> a{-0.9, -0.8, -0.7}, b{0.7, 0.8, 0.9};
    CHECK(js_distance(a, a) == 0.0);
    CHECK(js_distance(a, b) == Approx(1.0));
    CHECK_THROWS_AS(js_distance(std::vector<double>{}, a), ValidationError);
}

TEST_CASE("KS statistic examples") {
    std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    CHECK(ks_statistic(a, b) == 1.0);
    CHECK(ks_statistic(a, a) == 0.0);
    std::vector<double> c{1, 2, 3, 4}, d{3, 4, 5, 6};
    CHECK(ks_statistic(c, d) == 0.5);
    // Ties across samples are stepped together.
    std::vector<double> e{0, 0, 1}, f{0, 1, 1};
    CHECK(ks_statistic(e, f) == Approx(1.0 / 3.0));
    auto r = ks_two_sample(a, a);
    CHECK(r.pvalue == 1.0);
}

TEST_CASE("KS statistic matches direct counting") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> n(1, 40), tie(0, 4);
    for (int rep = 0; rep < 300; ++rep) {
        auto a = uniform_sample(rng, size_t(n(rng)));
        auto b = uniform_sample(rng, size_t(n(rng)), -0.5, 1.0);
        // Force some ties by rounding.
        if (rep % 3 == 0) {
            for (auto& x : a) x = std::round(x * tie(rng));
            for (auto& x : b) x = std::round(x * 2);
        }
        double d = ks_statistic(a, b);
        CHECK(d == Approx(oracle::ks_statistic(a, b)).margin(1e-15));
        CHECK(d == ks_statistic(b, a));
        CHECK(d >= 0.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("Kolmogorov survival function") {
    // Reference values of the asymptotic distribution.
    CHECK(kolmogorov_survival(0.3) == Approx(0.9999906941986655).epsilon(1e-9));
    CHECK(kolmogorov_survival(0.5) == Approx(0.9639452436648751).epsilon(1e-9));
    CHECK(kolmogorov_survival(1.0) == Approx(0.26999967167735456).epsilon(1e-9));
    CHECK(kolmogorov_survival(1.36) == Approx(0.049485876755377876).epsilon(1e-9));
    CHECK(kolmogorov_survival(2.0) == Approx(0.0006709252557796953).epsilon(1e-9));
    CHECK(kolmogorov_survival(3.0) == Approx(3.045995948942526e-08).epsilon(1e-9));
    CHECK(kolmogorov_survival(0.0) == 1.0);
    CHECK(kolmogorov_survival(0.01) == 1.0);

    for (double lambda = 0.2; lambda <= 4.0; lambda += 0.05) {
        double q = kolmogorov_survival(lambda);
        CHECK(q == Approx(oracle::kolmogorov_series(lambda, 1000)).margin(1e-10));
        CHECK(kolmogorov_survival(lambda + 0.05) <= q);
    }
    // Far tail underflows to zero, which is displayed with the floor marker.
    CHECK(kolmogorov_survival(30.0) < kPvalueFloor);
}

TEST_CASE("p-value display") {
    CHECK(format_pvalue(0.0) == "< 1e-300");
    CHECK(format_pvalue(1e-301) == "< 1e-300");
    CHECK(format_pvalue(1e-300) == "1e-300");
    CHECK(format_pvalue(0.25) == "0.25");
}

TEST_CASE("incomplete beta and Student t reference values") {
    CHECK(incomplete_beta(2, 3, 0.4) == Approx(0.5247999999999999).epsilon(1e-12));
    CHECK(incomplete_beta(0.5, 0.5, 0.3) == Approx(0.36901011956554536).epsilon(1e-12));
    CHECK(incomplete_beta(10, 2, 0.9) == Approx(0.6973568802000002).epsilon(1e-12));
    CHECK(incomplete_beta(5.5, 0.5, 0.2) == Approx(3.693776094906204e-05).epsilon(1e-10));
    CHECK(incomplete_beta(100, 100, 0.45) == Approx(0.07838793271222064).epsilon(1e-10));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    CHECK_THROWS_AS(incomplete_beta(0, 3, 0.5), ValidationError);

    CHECK(student_t_two_sided_p(2.0, 10) == Approx(0.07338803477074039).epsilon(1e-10));
    CHECK(student_t_two_sided_p(-1.3, 5) == Approx(0.25030063417067716).epsilon(1e-10));
    CHECK(student_t_two_sided_p(0.0, 3) == 1.0);
    CHECK(student_t_two_sided_p(4.5, 30) == Approx(9.519359392112457e-05).epsilon(1e-9));
    CHECK(student_t_two_sided_p(12, 100) == Approx(4.3950877156043564e-21).epsilon(1e-8));
    CHECK(student_t_two_sided_p(1.96, 1e6) == Approx(0.04999606758526978).epsilon(1e-9));
    CHECK(student_t_two_sided_p(INFINITY, 4) == 0.0);
}

TEST_CASE("Student t p-value is symmetric and decreasing in |t|") {
    for (double df : {1.0, 3.0, 12.0, 200.0}) {
        double prev = 1.0;
        for (double t = 0.0; t < 20.0; t += 0.25) {
            double p = student_t_two_sided_p(t, df);
            CHECK(p == Approx(student_t_two_sided_p(-t, df)).margin(1e-15));
            CHECK(p <= prev + 1e-15);
            CHECK(p >= 0.0);
            prev = p;
        }
    }
}

TEST_CASE("shift report") {
    std::mt19937_64 rng(23);
    auto pi = uniform_sample(rng, 500);
    std::vector<double> mu(pi.size());
    for (size_t i = 0; i < pi.size(); ++i) mu[i] = pi[i] * 0.3;
    auto r = shift_report(pi, mu, Category::RaceEthnicity);
    CHECK(r.n_before == 500);
    CHECK(r.bin_count == 100);
    CHECK(r.js_distance > 0.3);
    CHECK(r.ks_statistic == Approx(oracle::ks_statistic(pi, mu)));
    CHECK(r.ks_pvalue < 1e-10);

    auto same = shift_report(pi, pi, Category::Age);
    CHECK(same.js_distance == 0.0);
    CHECK(same.ks_statistic == 0.0);
    CHECK(same.ks_pvalue == 1.0);

    auto j = to_json(r);
    CHECK(j["category"] == "race_ethnicity");
    CHECK(j.contains("ks_pvalue_text"));
    CHECK(j["ks_percent"] == Approx(100.0 * r.ks_statistic));
    CHECK_THROWS_AS(shift_report(pi, std::vector<double>{0.0}, Category::Age), ValidationError);
}

TEST_CASE("histogram table densities integrate to one") {
    std::mt19937_64 rng(29);
    auto a = uniform_sample(rng, 300), b = uniform_sample(rng, 200, -0.2, 0.2);
    std::ostringstream os;
    write_histogram_csv(os, a, b);
    CsvReader r(os.str(), "hist");
    std::vector<std::string> f;
    REQUIRE(r.next(f));
    CHECK(f[0] == "bin_left");
    double ia = 0, ib = 0;
    size_t rows = 0;
    while (r.next(f)) {
        double w = std::stod(f[1]) - std::stod(f[0]);
        ia += std::stod(f[2]) * w;
        ib += std::stod(f[3]) * w;
        ++rows;
    }
    CHECK(rows == 100);
    CHECK(ia == Approx(1.0));
    CHECK(ib == Approx(1.0));
}
