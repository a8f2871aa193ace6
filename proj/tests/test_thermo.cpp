#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rnacomb/structures.hpp"
#include "rnacomb/thermo.hpp"

#include <cmath>

using namespace rnacomb;
using namespace rnacomb::thermo;

namespace {

EnergyModel nussinov() { return EnergyModel{EnergyKind::Nussinov, 1.0, EnergyModel::kPhysicalR}; }
EnergyModel stacking() {
    return EnergyModel{EnergyKind::BaseStacking, 1.0, EnergyModel::kPhysicalR};
}

}  // namespace

TEST_CASE("occupancy tables at n=5") {
    std::vector<Int> nuss = occupancy_table(5, nussinov(), 1);
    REQUIRE(nuss.size() >= 3);
    CHECK(nuss[0] == 1);
    CHECK(nuss[1] == 6);
    CHECK(nuss[2] == 1);

    // Brute-force oracle for stacked pairs.
    ModelParams p;
    std::vector<Int> oracle;
    enumerate_structures(5, p, Family::General, [&](const SecondaryStructure& s) {
        int stacked = classify(s, p).stacked_pairs;
        if (static_cast<size_t>(stacked) >= oracle.size()) oracle.resize(stacked + 1, Int(0));
        oracle[stacked] += 1;
    });
    std::vector<Int> stack = occupancy_table(5, stacking(), 1);
    while (stack.size() > oracle.size()) {
        REQUIRE(stack.back() == 0);
        stack.pop_back();
    }
    CHECK(stack == oracle);
    CHECK(stack[0] == 7);
    CHECK(stack[1] == 1);
}

TEST_CASE("occupancy totals equal the structure counts") {
    models::StructureClass cls;
    std::vector<Rat> counts = models::count_table(cls, 100);
    for (int n = 1; n <= 40; ++n) {
        Int nuss_total = 0, stack_total = 0;
        for (const Int& c : occupancy_table(n, nussinov(), 1)) nuss_total += c;
        for (const Int& c : occupancy_table(n, stacking(), 1)) stack_total += c;
        REQUIRE(Rat(nuss_total) == counts[static_cast<size_t>(n)]);
        REQUIRE(Rat(stack_total) == counts[static_cast<size_t>(n)]);
    }
    Int nuss_total = 0, stack_total = 0;
    for (const Int& c : occupancy_table(100, nussinov(), 1)) nuss_total += c;
    for (const Int& c : occupancy_table(100, stacking(), 1)) stack_total += c;
    REQUIRE(Rat(nuss_total) == counts[100]);
    REQUIRE(Rat(stack_total) == counts[100]);
    CHECK(occupancy_table(17, nussinov(), 1)[0] >= 1);
    CHECK_THROWS_AS(occupancy_table(401, nussinov(), 1), std::invalid_argument);
}

TEST_CASE("temperature limits of the Boltzmann average") {
    OccupancyLog occ = occupancy_log(occupancy_table(60, nussinov(), 1));
    double unweighted = 0, total = 0;
    std::vector<Int> table = occupancy_table(60, nussinov(), 1);
    Rat num(0), den(0);
    for (size_t k = 0; k < table.size(); ++k) {
        num += Rat(static_cast<long>(k)) * Rat(table[k]);
        den += Rat(table[k]);
    }
    unweighted = rat_double(num / den);
    total = rat_double(den);
    CHECK(total > 0);
    CHECK(std::abs(expected_pairs_from(occ, nussinov(), 1e9) - unweighted) < 1e-5);
    CHECK(std::abs(expected_pairs_from(occ, nussinov(), 1e-2) - occ.k_max) < 1e-9);
    CHECK_THROWS_AS(expected_pairs_from(occ, nussinov(), -1.0), std::invalid_argument);
}

TEST_CASE("expected pairs decrease with temperature") {
    OccupancyLog nocc = occupancy_log(occupancy_table(50, nussinov(), 1));
    OccupancyLog socc = occupancy_log(occupancy_table(50, stacking(), 1));
    double prev_n = 1e18, prev_s = 1e18;
    for (double t = 200; t <= 500; t += 5) {
        double en = expected_pairs_from(nocc, nussinov(), t);
        double es = expected_pairs_from(socc, stacking(), t);
        CHECK(en < prev_n);
        CHECK(es < prev_s);
        CHECK(en <= 25.0);
        CHECK(es >= 0.0);
        prev_n = en;
        prev_s = es;
    }
}

TEST_CASE("series-derivative means equal the occupancy means") {
    models::StructureClass cls;
    for (int n : {5, 12, 23, 40, 100}) {
        std::vector<Int> table = occupancy_table(n, nussinov(), 1);
        Rat num(0), den(0);
        for (size_t k = 0; k < table.size(); ++k) {
            num += Rat(static_cast<long>(k)) * Rat(table[k]);
            den += Rat(table[k]);
        }
        REQUIRE(models::exact_mean_links(cls, n) == num / den);
    }
}

TEST_CASE("melting temperature edge cases") {
    MeltResult none = melting_temperature(2, nussinov(), 1);
    CHECK_FALSE(none.found);
    CHECK(none.note.find("no pairs") != std::string::npos);

    // At n=100 the half-max level for the pair count is 24.5 = max_k/2.
    OccupancyLog occ = occupancy_log(occupancy_table(100, nussinov(), 1));
    CHECK(occ.k_max == 49);
    MeltResult nuss = melting_temperature(100, nussinov(), 1);
    // The homopolymer never melts that far: the infinite-temperature mean
    // (about 27.3 pairs) already exceeds the level.
    CHECK_FALSE(nuss.found);
    CHECK(nuss.note.find("no crossing") != std::string::npos);

    MeltResult stack = melting_temperature(100, stacking(), 1);
    CHECK(stack.found);
    CHECK(stack.tm_kelvin > 1.0);
    double level = 0.5 * occupancy_log(occupancy_table(100, stacking(), 1)).k_max;
    OccupancyLog socc = occupancy_log(occupancy_table(100, stacking(), 1));
    CHECK(std::abs(expected_pairs_from(socc, stacking(), stack.tm_kelvin) - level) < 1e-6);
}

TEST_CASE("melting curve shape and the joint-table column") {
    MeltingCurve curve = melting_curve(60, 1, 0, 100, 2, 1.0, EnergyModel::kPhysicalR);
    REQUIRE(curve.t_celsius.size() == curve.nussinov_pairs.size());
    double max_slope_n = 0, max_slope_s = 0;
    for (size_t i = 1; i < curve.t_celsius.size(); ++i) {
        CHECK(curve.nussinov_pairs[i] <= curve.nussinov_pairs[i - 1] + 1e-12);
        CHECK(curve.stacking_stacked[i] <= curve.stacking_stacked[i - 1] + 1e-12);
        CHECK(curve.stacking_pairs[i] <= curve.stacking_pairs[i - 1] + 1e-12);
        double dt = curve.t_celsius[i] - curve.t_celsius[i - 1];
        max_slope_n = std::max(max_slope_n,
                               std::abs(curve.nussinov_pairs[i] - curve.nussinov_pairs[i - 1]) / dt);
        max_slope_s = std::max(
            max_slope_s, std::abs(curve.stacking_stacked[i] - curve.stacking_stacked[i - 1]) / dt);
    }
    CHECK(max_slope_s > max_slope_n);

    // The joint-table column reaches the same limits: unweighted mean at high
    // temperature, the maximally stacked structures' pair count at low.
    auto joint = models::stacking_joint(60, 1);
    EnergyModel model = stacking();
    std::vector<Int> table = occupancy_table(60, nussinov(), 1);
    Rat num(0), den(0);
    for (size_t k = 0; k < table.size(); ++k) {
        num += Rat(static_cast<long>(k)) * Rat(table[k]);
        den += Rat(table[k]);
    }
    CHECK(std::abs(expected_total_pairs_stacking(joint, model, 1e9) - rat_double(num / den)) <
          1e-5);
    CHECK(std::abs(expected_total_pairs_stacking(joint, model, 1e-2) - 29.0) < 1e-9);
}

TEST_CASE("csv format of the melting curve") {
    MeltingCurve curve = melting_curve(12, 1, 0, 10, 5, 1.0, EnergyModel::kPhysicalR);
    std::string csv = melting_curve_csv(curve);
    CHECK(csv.rfind("T_celsius,expected_pairs_nussinov,expected_pairs_stacking,"
                    "expected_total_pairs_stacking\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 rows
}
