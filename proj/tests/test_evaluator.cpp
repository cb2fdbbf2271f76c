#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "semshift/evaluator.hpp"

using namespace semshift;

namespace {

// Test list of n words where the listed 1-based ranks hold shifted words.
struct Fixture {
    std::vector<RankedWord> ranked;
    GoldLabels gold;
};

Fixture with_shifted_at(std::size_t n, const std::vector<std::size_t>& shifted_ranks) {
    Fixture f;
    for (std::size_t r = 1; r <= n; ++r) {
        char name[8];
        std::snprintf(name, sizeof(name), "w%02zu", r);
        f.ranked.push_back({name, static_cast<double>(r) / static_cast<double>(n), r});
        const bool s = std::find(shifted_ranks.begin(), shifted_ranks.end(), r) != shifted_ranks.end();
        f.gold.labels[name] = s ? 1 : 0;
    }
    return f;
}

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> v(hi - lo + 1);
    std::iota(v.begin(), v.end(), lo);
    return v;
}

}  // namespace

TEST_CASE("accuracy") {
    GoldLabels gold;
    std::map<std::string, int> pred;
    for (int i = 0; i < 18; ++i) {
        const auto w = "w" + std::to_string(i);
        gold.labels[w] = i < 6 ? 1 : 0;
        pred[w] = gold.labels[w];
    }
    CHECK(accuracy(pred, gold) == 1.0);

    auto wrong = pred;
    for (int i = 0; i < 3; ++i) wrong["w" + std::to_string(i)] = 0;
    CHECK(accuracy(wrong, gold) == doctest::Approx(15.0 / 18.0));
    CHECK(accuracy(wrong, gold) == doctest::Approx(0.8333).epsilon(1e-4));

    auto flipped = pred;
    for (auto& [w, l] : flipped) l = 1 - l;
    CHECK(accuracy(flipped, gold) == 0.0);

    // acc(p) + acc(flip(p)) = 1
    auto flip_wrong = wrong;
    for (auto& [w, l] : flip_wrong) l = 1 - l;
    CHECK(accuracy(wrong, gold) + accuracy(flip_wrong, gold) == doctest::Approx(1.0));

    std::map<std::string, int> missing{{"w0", 1}};
    CHECK_THROWS(accuracy(missing, gold));
}

TEST_CASE("accuracy of a label table counts defaulted words as stable") {
    GoldLabels gold;
    gold.labels = {{"a", 1}, {"b", 0}, {"c", 0}};
    LabelTable t;
    t.labels = {{"a", 1}, {"b", 0}};
    t.defaulted = {"c"};
    CHECK(accuracy(t, gold) == 1.0);
}

TEST_CASE("average anchor cosine") {
    ChangeScoreTable t;
    t.scores = {{"il", 1.0}, {"la", 1.0}};
    CHECK(avg_anchor_cosine(t, {"il", "la"}) == 1.0);
    t.scores = {{"il", 0.9}, {"la", 0.7}, {"casa", 0.1}};
    CHECK(avg_anchor_cosine(t, {"il", "la", "assente"}) == doctest::Approx(0.8));
    CHECK_THROWS(avg_anchor_cosine(t, {"assente"}));
}

TEST_CASE("mu_rank") {
    auto best = with_shifted_at(18, range(1, 6));
    CHECK(mu_rank(best.ranked, best.gold) == doctest::Approx((21.0 / 6.0) / 18.0));
    CHECK(mu_rank(best.ranked, best.gold) == doctest::Approx(0.19444).epsilon(1e-4));

    auto worst = with_shifted_at(18, range(13, 18));
    CHECK(mu_rank(worst.ranked, worst.gold) == doctest::Approx((93.0 / 6.0) / 18.0));
    CHECK(mu_rank(worst.ranked, worst.gold) == doctest::Approx(0.86111).epsilon(1e-4));

    auto tiny = with_shifted_at(2, {1});
    CHECK(mu_rank(tiny.ranked, tiny.gold) == 0.5);
}

TEST_CASE("mu_rank is minimized exactly by bottom placement") {
    for (std::size_t n = 2; n <= 6; ++n)
        for (std::size_t c = 1; c < n; ++c) {
            // Every placement of c shifted words among n ranks.
            std::vector<int> mask(n, 0);
            std::fill(mask.begin(), mask.begin() + static_cast<long>(c), 1);
            std::sort(mask.begin(), mask.end());
            double min_value = 1e9;
            std::vector<std::vector<std::size_t>> argmins;
            do {
                std::vector<std::size_t> ranks;
                for (std::size_t i = 0; i < n; ++i)
                    if (mask[i]) ranks.push_back(i + 1);
                auto f = with_shifted_at(n, ranks);
                const double v = mu_rank(f.ranked, f.gold);
                if (v < min_value - 1e-12) {
                    min_value = v;
                    argmins = {ranks};
                } else if (std::abs(v - min_value) <= 1e-12) {
                    argmins.push_back(ranks);
                }
            } while (std::next_permutation(mask.begin(), mask.end()));
            REQUIRE(argmins.size() == 1);
            CHECK(argmins[0] == range(1, c));
        }
}

TEST_CASE("recall at fraction") {
    auto all = with_shifted_at(18, {1, 2, 4, 6, 8, 9});
    CHECK(recall_at_fraction(all.ranked, all.gold, 0.5) == 1.0);
    auto none = with_shifted_at(18, range(10, 15));
    CHECK(recall_at_fraction(none.ranked, none.gold, 0.5) == 0.0);
    auto half = with_shifted_at(18, {2, 5, 9, 10, 14, 18});
    CHECK(recall_at_fraction(half.ranked, half.gold, 0.5) == 0.5);
    CHECK_THROWS(recall_at_fraction(half.ranked, half.gold, 0.0));
    CHECK_THROWS(recall_at_fraction(half.ranked, half.gold, 1.5));
}

TEST_CASE("recall at k") {
    auto f = with_shifted_at(18, {1, 2, 3, 6, 10, 17});
    CHECK(recall_at_k(f.ranked, f.gold, 6) == doctest::Approx(4.0 / 6.0));
    CHECK(recall_at_k(f.ranked, f.gold, 6) == doctest::Approx(0.667).epsilon(1e-3));
    CHECK(recall_at_k(f.ranked, f.gold, 18) == 1.0);
    CHECK_THROWS(recall_at_k(f.ranked, f.gold, 19));

    GoldLabels g;
    g.labels = {{"a", 0}, {"b", 1}};
    std::vector<RankedWord> r{{"b", 0.1, 1}, {"a", 0.2, 2}};
    CHECK(recall_at_k(r, g, 1) == 1.0);

    CHECK(default_recall_k(18) == 6);
    CHECK(default_recall_k(10) == 3);
    CHECK(default_recall_k(11) == 4);
}

TEST_CASE("recall metrics are monotone") {
    auto f = with_shifted_at(18, {2, 3, 7, 11, 12, 16});
    double prev = 0.0;
    for (int i = 1; i <= 20; ++i) {
        const double v = recall_at_fraction(f.ranked, f.gold, i / 20.0);
        CHECK(v >= prev);
        prev = v;
    }
    prev = 0.0;
    for (std::size_t k = 1; k <= 18; ++k) {
        const double v = recall_at_k(f.ranked, f.gold, k);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("model selection") {
    std::vector<EvalReport> r{{"A", 0.9}, {"B", 0.7}, {"C", 0.8}};
    CHECK(select_models(r, 2) == std::vector<std::string>{"A", "C"});
    CHECK(select_models({{"Z", 0.1}}) == std::vector<std::string>{"Z"});

    std::vector<EvalReport> four{{"M1", 0.2}, {"M2", 0.95}, {"M3", 0.5}, {"M4", 0.7}, {"M5", 0.1}};
    const auto top = select_models(four);
    CHECK(top == std::vector<std::string>{"M2", "M4", "M3", "M1"});
    std::sort(four.begin(), four.end(), [](const auto& a, const auto& b) { return a.method_id > b.method_id; });
    do {
        CHECK(select_models(four) == top);
    } while (std::next_permutation(four.begin(), four.end(),
                                   [](const auto& a, const auto& b) { return a.method_id > b.method_id; }));

    std::vector<EvalReport> tie{{"B", 0.5}, {"A", 0.5}};
    CHECK(select_models(tie, 1) == std::vector<std::string>{"A"});
}

TEST_CASE("gold and report files") {
    oracle::TempDir dir("eval");
    GoldLabels g;
    g.labels = {{"a", 1}, {"b", 0}};
    write_gold(dir / "g.tsv", g);
    CHECK(read_gold(dir / "g.tsv").labels == g.labels);
    CHECK(g.shifted() == std::set<std::string>{"a"});

    oracle::write_file(dir / "bad.tsv", "a\t2\n");
    CHECK_THROWS(read_gold(dir / "bad.tsv"));

    write_report(dir / "r.tsv", {{"TWEC_CBOW", 0.98, 0.8333333, 1.0, 0.1944444, 1.0, 1.0}});
    const auto text = oracle::slurp(dir / "r.tsv");
    CHECK(text == "method_id\tcs_avg_sw\tacc_mean\tacc_2sigma\tmu_rank\tr_p50\tr_down_k\n"
                  "TWEC_CBOW\t0.980\t0.833\t1.000\t0.194\t1.000\t1.000\n");
}
