#pragma once

#include "rnacomb/models.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rnacomb::thermo {

enum class EnergyKind { Nussinov, BaseStacking };

// Nussinov: each pair contributes -epsilon. BaseStacking: each stacked pair
// contributes -epsilon. Units: epsilon in kcal/mol, R in kcal/(mol K),
// temperatures in Kelvin.
struct EnergyModel {
    EnergyKind kind = EnergyKind::Nussinov;
    double epsilon = 1.0;
    double gas_constant = kPhysicalR;

    static constexpr double kPhysicalR = 0.0019872;
    // The approximate constant quoted alongside the partition function in
    // older other work; selectable for reproduction runs.
    static constexpr double kLegacyR = 0.001959;
};

// N_k over k = pairs (Nussinov) or stacked pairs (BaseStacking).
std::vector<Int> occupancy_table(int n, const EnergyModel& model, int theta);

constexpr int kOccupancyCap = 400;

// Precomputed logs for repeated Boltzmann averaging.
struct OccupancyLog {
    std::vector<double> log_counts;  // -inf slots removed: index -> log N_k
    std::vector<int> ks;
    int k_max = 0;
};

OccupancyLog occupancy_log(const std::vector<Int>& table);

// sum_k k N_k w^k / sum_k N_k w^k with w = exp(eps/(R T)), in log space.
double expected_pairs_from(const OccupancyLog& occ, const EnergyModel& model, double t_kelvin);
double expected_pairs(int n, const EnergyModel& model, double t_kelvin, int theta);

// Expected number of pairs under base-stacking weights (the joint table over
// pairs and stacked pairs); the second Fig-style curve variant.
double expected_total_pairs_stacking(const std::vector<std::vector<std::vector<Int>>>& joint_n,
                                     const EnergyModel& model, double t_kelvin);

struct MeltResult {
    bool found = false;
    double tm_kelvin = 0;
    std::string note;
};

// T with expected_pairs(T) = half of the T->0 limit (the maximal k). The
// curve decreases from k_max to the unweighted mean, so the crossing can be
// absent; that outcome is reported, not fudged.
MeltResult melting_temperature(int n, const EnergyModel& model, int theta);

struct MeltingCurve {
    std::vector<double> t_celsius;
    std::vector<double> nussinov_pairs;
    std::vector<double> stacking_stacked;     // expected stacked pairs
    std::vector<double> stacking_pairs;       // expected pairs, stacking weights
    MeltResult tm_nussinov;
    MeltResult tm_stacking;
};

MeltingCurve melting_curve(int n, int theta, double t_min_celsius, double t_max_celsius,
                           double step_celsius, double epsilon, double gas_constant);

std::string melting_curve_csv(const MeltingCurve& curve);

inline double celsius_to_kelvin(double c) { return c + 273.15; }

}  // namespace rnacomb::thermo
