#include "rnacomb/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rnacomb::thermo {

std::vector<Int> occupancy_table(int n, const EnergyModel& model, int theta) {
    if (n < 1 || n > kOccupancyCap)
        throw std::invalid_argument("occupancy_table: n must be in 1.." +
                                    std::to_string(kOccupancyCap));
    models::Grammar g = model.kind == EnergyKind::Nussinov ? models::Grammar::Nussinov
                                                           : models::Grammar::BaseStacking;
    auto marked = models::grammar_marked(g, n, theta);
    return marked.at(static_cast<size_t>(n));
}

OccupancyLog occupancy_log(const std::vector<Int>& table) {
    OccupancyLog occ;
    for (size_t k = 0; k < table.size(); ++k) {
        if (table[k] == 0) continue;
        occ.ks.push_back(static_cast<int>(k));
        occ.log_counts.push_back(int_log(table[k]));
        occ.k_max = static_cast<int>(k);
    }
    if (occ.ks.empty()) throw std::domain_error("occupancy_log: empty table");
    return occ;
}

double expected_pairs_from(const OccupancyLog& occ, const EnergyModel& model, double t_kelvin) {
    if (t_kelvin <= 0) throw std::invalid_argument("temperature must be positive");
    double log_w = model.epsilon / (model.gas_constant * t_kelvin);
    // log-sum-exp over log N_k + k log w
    double m = -HUGE_VAL;
    std::vector<double> terms(occ.ks.size());
    for (size_t i = 0; i < occ.ks.size(); ++i) {
        terms[i] = occ.log_counts[i] + occ.ks[i] * log_w;
        m = std::max(m, terms[i]);
    }
    double z = 0, kz = 0;
    for (size_t i = 0; i < occ.ks.size(); ++i) {
        double e = std::exp(terms[i] - m);
        z += e;
        kz += occ.ks[i] * e;
    }
    return kz / z;
}

double expected_pairs(int n, const EnergyModel& model, double t_kelvin, int theta) {
    return expected_pairs_from(occupancy_log(occupancy_table(n, model, theta)), model, t_kelvin);
}

double expected_total_pairs_stacking(const std::vector<std::vector<std::vector<Int>>>& joint_n,
                                     const EnergyModel& model, double t_kelvin) {
    if (t_kelvin <= 0) throw std::invalid_argument("temperature must be positive");
    const auto& joint = joint_n.back();
    double log_w = model.epsilon / (model.gas_constant * t_kelvin);
    double m = -HUGE_VAL;
    std::vector<std::pair<double, int>> terms;  // (log N w^stacked, pairs)
    for (size_t pairs = 0; pairs < joint.size(); ++pairs)
        for (size_t stacked = 0; stacked < joint[pairs].size(); ++stacked) {
            if (joint[pairs][stacked] == 0) continue;
            double t = int_log(joint[pairs][stacked]) + static_cast<double>(stacked) * log_w;
            terms.emplace_back(t, static_cast<int>(pairs));
            m = std::max(m, t);
        }
    double z = 0, kz = 0;
    for (const auto& [logterm, pairs] : terms) {
        double e = std::exp(logterm - m);
        z += e;
        kz += pairs * e;
    }
    return kz / z;
}

MeltResult melting_temperature(int n, const EnergyModel& model, int theta) {
    MeltResult res;
    auto table = occupancy_table(n, model, theta);
    OccupancyLog occ = occupancy_log(table);
    if (occ.k_max == 0) {
        res.note = "no pairs are possible at this length";
        return res;
    }
    double level = 0.5 * occ.k_max;
    double lo = 1e-2, hi = 1e9;
    double at_lo = expected_pairs_from(occ, model, lo);
    double at_hi = expected_pairs_from(occ, model, hi);
    if (!(at_lo > level && at_hi < level)) {
        std::ostringstream os;
        os << "no crossing of " << level << " in the search interval: curve spans ["
           << at_hi << ", " << at_lo << "]";
        res.note = os.str();
        return res;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = std::sqrt(lo * hi);  // geometric bisection over decades
        if (expected_pairs_from(occ, model, mid) > level)
            lo = mid;
        else
            hi = mid;
    }
    res.found = true;
    res.tm_kelvin = std::sqrt(lo * hi);
    return res;
}

MeltingCurve melting_curve(int n, int theta, double t_min_celsius, double t_max_celsius,
                           double step_celsius, double epsilon, double gas_constant) {
    if (step_celsius <= 0 || t_max_celsius < t_min_celsius)
        throw std::invalid_argument("melting_curve: bad temperature grid");
    EnergyModel nuss{EnergyKind::Nussinov, epsilon, gas_constant};
    EnergyModel stack{EnergyKind::BaseStacking, epsilon, gas_constant};
    OccupancyLog nocc = occupancy_log(occupancy_table(n, nuss, theta));
    OccupancyLog socc = occupancy_log(occupancy_table(n, stack, theta));
    auto joint = models::stacking_joint(n, theta);

    MeltingCurve curve;
    for (double c = t_min_celsius; c <= t_max_celsius + 1e-9; c += step_celsius)
        curve.t_celsius.push_back(c);
    size_t m = curve.t_celsius.size();
    curve.nussinov_pairs.assign(m, 0.0);
    curve.stacking_stacked.assign(m, 0.0);
    curve.stacking_pairs.assign(m, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long i = 0; i < static_cast<long>(m); ++i) {
        double tk = celsius_to_kelvin(curve.t_celsius[static_cast<size_t>(i)]);
        curve.nussinov_pairs[static_cast<size_t>(i)] = expected_pairs_from(nocc, nuss, tk);
        curve.stacking_stacked[static_cast<size_t>(i)] = expected_pairs_from(socc, stack, tk);
        curve.stacking_pairs[static_cast<size_t>(i)] =
            expected_total_pairs_stacking(joint, stack, tk);
    }
    curve.tm_nussinov = melting_temperature(n, nuss, theta);
    curve.tm_stacking = melting_temperature(n, stack, theta);
    return curve;
}

std::string melting_curve_csv(const MeltingCurve& curve) {
    std::ostringstream os;
    os << "T_celsius,expected_pairs_nussinov,expected_pairs_stacking,"
          "expected_total_pairs_stacking\n";
    os.setf(std::ios::fixed);
    os.precision(6);
    for (size_t i = 0; i < curve.t_celsius.size(); ++i)
        os << curve.t_celsius[i] << "," << curve.nussinov_pairs[i] << ","
           << curve.stacking_stacked[i] << "," << curve.stacking_pairs[i] << "\n";
    return os.str();
}

}  // namespace rnacomb::thermo
