#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "grkbs/measure.hpp"

using namespace grkbs;

namespace {

ParameterBox unit_box(std::size_t dim) {
    return ParameterBox(std::vector<double>(dim, -1.0), std::vector<double>(dim, 1.0));
}

AtomicMeasure random_measure(std::mt19937_64& rng, const ParameterBox& box, std::size_t count) {
    std::uniform_real_distribution<double> loc(-1.0, 1.0);
    std::normal_distribution<double> wgt(0.0, 1.0);
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> theta(box.dim());
        for (auto& t : theta) t = loc(rng);
        atoms.push_back({theta, wgt(rng)});
    }
    return AtomicMeasure(box, std::move(atoms));
}

}  // namespace

TEST_CASE("parameter box validation") {
    CHECK_THROWS(ParameterBox({0.0}, {0.0}));
    CHECK_THROWS(ParameterBox({0.0, 1.0}, {1.0}));
    const auto box = unit_box(2);
    const std::vector<double> inside{0.5, -0.5}, outside{1.5, 0.0};
    CHECK(box.contains(inside));
    CHECK_FALSE(box.contains(outside));
}

TEST_CASE("tv norm basics") {
    const auto box = unit_box(1);
    CHECK(AtomicMeasure(box, {}).tv_norm() == 0.0);
    const AtomicMeasure m(box, {{{0.2}, 2.0}, {{0.4}, -3.0}});
    CHECK(m.tv_norm() == 5.0);
}

TEST_CASE("tv norm of all-positive weights equals their sum") {
    const auto box = unit_box(1);
    const AtomicMeasure m(box, {{{0.1}, 0.5}, {{0.2}, 1.25}, {{0.3}, 0.25}});
    CHECK(m.tv_norm() == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("construction merges exact duplicates and drops zero weights") {
    const auto box = unit_box(1);
    const AtomicMeasure m(box, {{{0.5}, 1.0}, {{0.5}, 2.0}});
    REQUIRE(m.size() == 1);
    CHECK(m.atoms()[0].weight == 3.0);

    const AtomicMeasure cancel(box, {{{0.5}, 1.0}, {{0.5}, -1.0}});
    CHECK(cancel.empty());
}

TEST_CASE("construction rejects bad atoms") {
    const auto box = unit_box(1);
    CHECK_THROWS(AtomicMeasure(box, {{{2.0}, 1.0}}));
    CHECK_THROWS(AtomicMeasure(box, {{{0.0}, std::nan("")}}));
}

TEST_CASE("merge_atoms clusters within tolerance") {
    const auto box = unit_box(1);
    const AtomicMeasure m(box, {{{0.5}, 0.5}, {{0.5 + 1e-10}, 0.5}});
    const auto merged = merge_atoms(m, 1e-9);
    REQUIRE(merged.size() == 1);
    CHECK(merged.atoms()[0].weight == 1.0);
    CHECK(merged.atoms()[0].location[0] == 0.5);
}

TEST_CASE("merge_atoms cancellation leaves the empty measure") {
    const auto box = unit_box(2);
    const AtomicMeasure m(box, {{{0.1, 0.2}, 1.0}, {{0.1 + 1e-12, 0.2}, -1.0}});
    CHECK(merge_atoms(m, 1e-9).empty());
}

TEST_CASE("merge never increases the tv norm, random 50-atom measures") {
    std::mt19937_64 rng(7);
    const auto box = unit_box(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_measure(rng, box, 50);
        // Independent recomputation of both sums straight from the atom lists.
        double before = 0.0;
        for (const auto& a : m.atoms()) before += std::abs(a.weight);
        const auto merged = merge_atoms(m, 0.05);
        double after = 0.0;
        for (const auto& a : merged.atoms()) after += std::abs(a.weight);
        CHECK(after <= before + 1e-15);
        CHECK(m.tv_norm() == before);
        CHECK(merged.tv_norm() == after);
    }
}

TEST_CASE("merge_atoms is idempotent at fixed tolerance") {
    std::mt19937_64 rng(11);
    const auto box = unit_box(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto merged = merge_atoms(random_measure(rng, box, 30), 0.1);
        const auto again = merge_atoms(merged, 0.1);
        REQUIRE(again.size() == merged.size());
        for (std::size_t i = 0; i < merged.size(); ++i) {
            CHECK(again.atoms()[i].weight == merged.atoms()[i].weight);
            CHECK(again.atoms()[i].location == merged.atoms()[i].location);
        }
    }
}

TEST_CASE("canonical decomposition unfolds signs") {
    const auto box = unit_box(1);
    const AtomicMeasure m(box, {{{0.3}, -2.0}});
    const auto parts = canonical_decomposition(m);
    REQUIRE(parts.size() == 1);
    CHECK(parts[0].gamma == 2.0);
    CHECK(parts[0].sign == -1);
    CHECK(parts[0].location[0] == 0.3);
}

TEST_CASE("canonical decomposition gamma sum equals tv norm") {
    const auto box = unit_box(1);
    const AtomicMeasure m(box, {{{0.1}, 1.0}, {{0.2}, -1.0}, {{0.3}, 2.0}});
    const auto parts = canonical_decomposition(m);
    double gamma_sum = 0.0;
    for (const auto& p : parts) gamma_sum += p.gamma;
    CHECK(gamma_sum == 4.0);
    CHECK(gamma_sum == m.tv_norm());
}

TEST_CASE("canonical decomposition of the empty measure throws") {
    CHECK_THROWS_WITH(canonical_decomposition(AtomicMeasure(unit_box(1), {})),
                      "canonical_decomposition: no atoms");
}

TEST_CASE("decomposition followed by reconstruction is the identity") {
    std::mt19937_64 rng(3);
    const auto box = unit_box(2);
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = merge_atoms(random_measure(rng, box, 12), 1e-9);
        if (m.empty()) continue;
        const auto rebuilt = reconstruct(box, canonical_decomposition(m));
        REQUIRE(rebuilt.size() == m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(rebuilt.atoms()[i].location == m.atoms()[i].location);
            CHECK(rebuilt.atoms()[i].weight == m.atoms()[i].weight);
        }
    }
}

TEST_CASE("tv norm is absolutely homogeneous and subadditive") {
    std::mt19937_64 rng(5);
    const auto box = unit_box(2);
    std::uniform_real_distribution<double> alpha_dist(-3.0, 3.0);
    for (int trial = 0; trial < 25; ++trial) {
        const auto m1 = random_measure(rng, box, 8);
        const auto m2 = random_measure(rng, box, 8);
        const double alpha = alpha_dist(rng);
        CHECK(m1.scaled(alpha).tv_norm() == doctest::Approx(std::abs(alpha) * m1.tv_norm()).epsilon(1e-13));
        CHECK(add(m1, m2).tv_norm() <= m1.tv_norm() + m2.tv_norm() + 1e-13);
    }
}

TEST_CASE("addition is exact on disjoint supports") {
    const auto box = unit_box(1);
    const AtomicMeasure m1(box, {{{0.1}, 1.5}});
    const AtomicMeasure m2(box, {{{0.7}, -2.5}});
    const auto sum = add(m1, m2);
    CHECK(sum.tv_norm() == 4.0);
    CHECK(sum.size() == 2);
}

TEST_CASE("json round trip is exact") {
    const auto box = ParameterBox({-1.0, 0.0}, {1.0, 2.0});
    const AtomicMeasure m(box, {{{0.123456789012345, 1.25}, -0.7071067811865476},
                                {{-0.5, 0.1}, 3.0}});
    const auto text = to_json_string(m);
    const auto back = measure_from_json_string(text);
    REQUIRE(back.size() == m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        CHECK(back.atoms()[i].location == m.atoms()[i].location);
        CHECK(back.atoms()[i].weight == m.atoms()[i].weight);
    }
    CHECK(back.box() == m.box());
    // Field names are part of the wire format.
    CHECK(text.find("\"box\"") != std::string::npos);
    CHECK(text.find("\"lower\"") != std::string::npos);
    CHECK(text.find("\"upper\"") != std::string::npos);
    CHECK(text.find("\"atoms\"") != std::string::npos);
    CHECK(text.find("\"theta\"") != std::string::npos);
    CHECK(text.find("\"weight\"") != std::string::npos);
}
