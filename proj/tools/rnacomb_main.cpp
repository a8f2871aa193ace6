#include "rnacomb/asymptotics.hpp"
#include "rnacomb/models.hpp"
#include "rnacomb/structures.hpp"
#include "rnacomb/thermo.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <iostream>
#include <sstream>

namespace {

using namespace rnacomb;
using json = nlohmann::ordered_json;

struct CommonFlags {
    std::string family = "general";
    std::string dangles = "none";
    int theta = 1;
    int tau = 0;
    std::string p = "1";
    std::string q = "0";
    std::string output = "csv";
    int precision_digits = 12;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--family", flags.family, "structure class")
        ->check(CLI::IsMember({"general", "saturated", "gsaturated"}));
    cmd->add_option("--dangles", flags.dangles, "dangle annotation mode")
        ->check(CLI::IsMember({"none", "external"}));
    cmd->add_option("--theta", flags.theta, "hairpin threshold")->check(CLI::NonNegativeNumber);
    cmd->add_option("--tau", flags.tau, "stem threshold")->check(CLI::NonNegativeNumber);
    cmd->add_option("--p", flags.p, "stickiness weight per link (rational or decimal)");
    cmd->add_option("--q", flags.q, "weight per dangle (rational or decimal)");
    cmd->add_option("--output", flags.output, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--precision-digits", flags.precision_digits,
                    "significant digits for reported floats")
        ->check(CLI::Range(4, 40));
}

models::StructureClass make_class(const CommonFlags& flags) {
    models::StructureClass cls;
    cls.family = flags.family == "saturated"
                     ? Family::Saturated
                     : (flags.family == "gsaturated" ? Family::GSaturated : Family::General);
    cls.dangles = flags.dangles == "external";
    cls.params.theta = flags.theta;
    cls.params.tau = flags.tau;
    cls.params.p = parse_rational(flags.p);
    cls.params.q = parse_rational(flags.q);
    check_params(cls.params);
    return cls;
}

double rounded(double v, int digits) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return std::stod(os.str());
}

double to_double(const asymptotics::Real& v) { return static_cast<double>(v); }

json class_header(const models::StructureClass& cls) {
    json j;
    std::string family = cls.family == Family::Saturated
                             ? "saturated"
                             : (cls.family == Family::GSaturated ? "gsaturated" : "general");
    j["class"] = cls.dangles ? family + "+dangles" : family;
    j["theta"] = cls.params.theta;
    j["tau"] = cls.params.tau;
    j["p"] = rat_string(cls.params.p);
    j["q"] = rat_string(cls.params.q);
    return j;
}

int cmd_count(const CommonFlags& flags, int n_max, bool by_links) {
    models::StructureClass cls = make_class(flags);
    if (by_links) {
        std::vector<Rat> row = models::count_by_links(cls, n_max);
        if (flags.output == "json") {
            json j = class_header(cls);
            j["n"] = n_max;
            json counts = json::object();
            for (size_t k = 0; k < row.size(); ++k)
                if (row[k] != 0) counts[std::to_string(k)] = rat_string(row[k]);
            j["counts_by_links"] = counts;
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "n,k,count\n";
            for (size_t k = 0; k < row.size(); ++k)
                if (row[k] != 0) std::cout << n_max << "," << k << "," << rat_string(row[k]) << "\n";
        }
        return 0;
    }
    std::vector<Rat> table = models::count_table(cls, n_max);
    if (flags.output == "json") {
        json j = class_header(cls);
        json counts = json::array();
        for (int n = 1; n <= n_max; ++n) counts.push_back(rat_string(table[static_cast<size_t>(n)]));
        j["counts"] = counts;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << "n,count\n";
        for (int n = 1; n <= n_max; ++n)
            std::cout << n << "," << rat_string(table[static_cast<size_t>(n)]) << "\n";
    }
    return 0;
}

int cmd_series(const CommonFlags& flags, int order, bool by_links) {
    models::StructureClass cls = make_class(flags);
    if (by_links) {
        models::GfSystem sys = models::build_system(cls);
        std::vector<char> vars{'t', 's'};
        std::vector<int> caps{order, order / 2 + 1};
        std::map<std::string, TruncatedSeries> bindings;
        TruncatedSeries t = TruncatedSeries::variable(vars, caps, 't');
        bindings.emplace("t", t);
        bindings.emplace("s", TruncatedSeries::variable(vars, caps, 's') * t * t);
        if (cls.dangles)
            bindings.emplace("r", TruncatedSeries::constant(vars, caps, cls.params.q));
        TruncatedSeries f = solve_fixed_point(sys.Q, "y", bindings, vars, caps);
        auto env = bindings;
        env.emplace("y", f);
        TruncatedSeries g = evaluate_series(sys.R, env, vars, caps) +
                            evaluate_series(sys.tail, env, vars, caps);
        std::cout << g.to_csv();
        return 0;
    }
    TruncatedSeries g = models::weighted_series(cls, order);
    std::cout << g.to_csv();
    return 0;
}

int solve_class_singularity(const models::StructureClass& cls, int order, int digits, json& out) {
    auto [phi, psi] = models::emit_phi_psi(cls, /*mark_links=*/false);
    order = std::max(order, 60);  // coefficient-ratio seeds need some depth
    TruncatedSeries g = models::weighted_series(cls, order);
    std::vector<Rat> coeffs(static_cast<size_t>(order) + 1);
    for (int i = 0; i <= order; ++i) coeffs[static_cast<size_t>(i)] = g.coeff1(i);
    double hint = asymptotics::ratio_hint(coeffs);
    auto domain = asymptotics::denominator_domain({phi, psi}, {"y"});
    asymptotics::SingularPoint sp = asymptotics::solve_singularity(phi, domain, hint);
    if (!sp.ok()) {
        out["error"] = sp.message;
        out["status"] =
            sp.status == asymptotics::SolveStatus::OutsideDomain ? "outside-domain" : "diverged";
        return 2;
    }
    asymptotics::Amplitudes amp = asymptotics::amplitude(phi, psi, sp.t0, sp.y0);
    out["gamma"] = rounded(to_double(sp.gamma), digits);
    out["c_or_d"] = rounded(to_double(amp.d), digits);
    out["c_adjoint"] = rounded(to_double(amp.c), digits);
    out["t0"] = rounded(to_double(sp.t0), digits);
    out["y0"] = rounded(to_double(sp.y0), digits);
    out["residual"] = to_double(sp.residual);
    asymptotics::RatioDiagnostic diag =
        asymptotics::ratio_diagnostic(coeffs, order, to_double(sp.gamma));
    json d;
    d["order"] = order;
    d["gamma_ratio_estimate"] = rounded(diag.gamma_estimate, digits);
    d["c_ratio_estimate"] = rounded(diag.c_estimate, digits);
    out["diagnostics"] = d;
    return 0;
}

int cmd_asym(const CommonFlags& flags, const std::string& grammar, int order) {
    if (!grammar.empty()) {
        models::Grammar g = grammar == "unafold-dangle" ? models::Grammar::UnafoldDangle
                                                        : models::Grammar::ExternalDangle;
        models::GrammarSystem sys = models::build_grammar_system(g, 300, flags.theta);
        double hint = asymptotics::ratio_hint(
            std::vector<Rat>(sys.total_counts.begin(), sys.total_counts.end()));
        auto domain = asymptotics::denominator_domain(
            {sys.equations[0], sys.equations[1], sys.equations[2]}, sys.unknowns);
        asymptotics::SystemPoint sp =
            asymptotics::solve_singularity_system(sys.equations, sys.unknowns, domain, hint);
        json j;
        j["class"] = grammar;
        j["theta"] = flags.theta;
        if (!sp.ok()) {
            j["error"] = sp.message;
            std::cout << j.dump() << "\n";
            return 2;
        }
        auto core_domain = asymptotics::denominator_domain({sys.phi_core, sys.psi_total}, {"y"});
        asymptotics::SingularPoint core =
            asymptotics::solve_singularity(sys.phi_core, core_domain, to_double(sp.t0));
        if (!core.ok()) {
            j["error"] = core.message;
            std::cout << j.dump() << "\n";
            return 2;
        }
        asymptotics::Amplitudes amp =
            asymptotics::amplitude(sys.phi_core, sys.psi_total, core.t0, core.y0);
        j["gamma"] = rounded(to_double(sp.gamma), flags.precision_digits);
        j["c_or_d"] = rounded(to_double(amp.d), flags.precision_digits);
        j["t0"] = rounded(to_double(sp.t0), flags.precision_digits);
        j["residual"] = to_double(std::max(sp.residual, core.residual));
        json d;
        d["core_gamma"] = rounded(to_double(core.gamma), flags.precision_digits);
        d["gamma_ratio_estimate"] = rounded(
            asymptotics::ratio_diagnostic(
                std::vector<Rat>(sys.total_counts.begin(), sys.total_counts.end()), 300,
                to_double(sp.gamma))
                .gamma_estimate,
            flags.precision_digits);
        j["diagnostics"] = d;
        std::cout << j.dump() << "\n";
        return 0;
    }
    models::StructureClass cls = make_class(flags);
    json j = class_header(cls);
    int rc = solve_class_singularity(cls, order, flags.precision_digits, j);
    std::cout << j.dump() << "\n";
    return rc;
}

int cmd_limitlaw(const CommonFlags& flags, int order, const std::string& h) {
    models::StructureClass cls = make_class(flags);
    auto [phi, psi] = models::emit_phi_psi(cls, /*mark_links=*/true);
    order = std::max(order, 60);
    TruncatedSeries g = models::weighted_series(cls, order);
    std::vector<Rat> coeffs(static_cast<size_t>(order) + 1);
    for (int i = 0; i <= order; ++i) coeffs[static_cast<size_t>(i)] = g.coeff1(i);
    double hint = asymptotics::ratio_hint(coeffs);
    ExprPtr phi_at_1 = expr_substitute(phi, "u", Expr::constant(1));
    auto domain = asymptotics::denominator_domain({phi_at_1}, {"y"});
    asymptotics::LimitLaw law = asymptotics::limit_law(phi, domain, hint, parse_rational(h));
    json j = class_header(cls);
    if (!law.ok) {
        j["error"] = law.message;
        std::cout << j.dump() << "\n";
        return 2;
    }
    j["mu"] = rounded(to_double(law.mu), flags.precision_digits);
    j["sigma"] = rounded(std::sqrt(to_double(law.sigma2)), flags.precision_digits);
    j["sigma2"] = rounded(to_double(law.sigma2), flags.precision_digits);
    j["stability"] = to_double(law.stability);
    json samples = json::array();
    for (const auto& [u, rho] : law.rho_samples) {
        json s;
        s["u"] = rat_string(u);
        s["rho"] = rounded(to_double(rho), flags.precision_digits);
        samples.push_back(s);
    }
    j["rho_samples"] = samples;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_melt(const CommonFlags& flags, int n, double t_min, double t_max, double t_step,
             double epsilon, bool paper_r) {
    double gas = paper_r ? thermo::EnergyModel::kLegacyR : thermo::EnergyModel::kPhysicalR;
    thermo::MeltingCurve curve =
        thermo::melting_curve(n, flags.theta, t_min, t_max, t_step, epsilon, gas);
    auto tm_text = [](const thermo::MeltResult& r) {
        return r.found ? std::to_string(r.tm_kelvin - 273.15) + " C" : "none (" + r.note + ")";
    };
    if (flags.output == "json") {
        json j;
        j["n"] = n;
        j["theta"] = flags.theta;
        j["epsilon"] = epsilon;
        j["gas_constant"] = gas;
        j["T_celsius"] = curve.t_celsius;
        j["expected_pairs_nussinov"] = curve.nussinov_pairs;
        j["expected_pairs_stacking"] = curve.stacking_stacked;
        j["expected_total_pairs_stacking"] = curve.stacking_pairs;
        j["tm_nussinov_kelvin"] =
            curve.tm_nussinov.found ? json(curve.tm_nussinov.tm_kelvin) : json();
        j["tm_stacking_kelvin"] =
            curve.tm_stacking.found ? json(curve.tm_stacking.tm_kelvin) : json();
        if (!curve.tm_nussinov.found) j["tm_nussinov_note"] = curve.tm_nussinov.note;
        if (!curve.tm_stacking.found) j["tm_stacking_note"] = curve.tm_stacking.note;
        std::cout << j.dump() << "\n";
    } else {
        std::cout << thermo::melting_curve_csv(curve);
        std::cerr << "Tm(nussinov) = " << tm_text(curve.tm_nussinov) << "\n";
        std::cerr << "Tm(stacking) = " << tm_text(curve.tm_stacking) << "\n";
    }
    return 0;
}

int cmd_check(int n_max, int enum_cap) {
    int failures = 0;
    auto report = [&](const std::string& what, bool ok) {
        std::cout << (ok ? "[ok]   " : "[FAIL] ") << what << "\n";
        if (!ok) ++failures;
    };
    std::vector<std::pair<int, int>> grid = {{0, 0}, {1, 0}, {3, 0}, {0, 1}, {1, 1}, {3, 1}};
    for (Family family : {Family::General, Family::Saturated, Family::GSaturated}) {
        for (auto [theta, tau] : grid) {
            if (family == Family::Saturated && tau != 0) continue;
            for (const Rat& q : {Rat(0), Rat(1), Rat(2)}) {
                models::StructureClass cls;
                cls.family = family;
                cls.dangles = q != 0;
                cls.params.theta = theta;
                cls.params.tau = tau;
                cls.params.q = q;
                std::vector<Rat> series = models::count_table(cls, n_max);
                bool ok = true;
                for (int n = 1; n <= n_max && ok; ++n) {
                    Rat oracle(0);
                    ModelParams params = cls.params;
                    enumerate_structures(n, params, family,
                                         [&](const SecondaryStructure& s) {
                                             oracle += dangle_weight(s, q);
                                         },
                                         enum_cap);
                    if (oracle != series[static_cast<size_t>(n)]) ok = false;
                }
                const char* fname = family == Family::General
                                        ? "general"
                                        : (family == Family::Saturated ? "saturated"
                                                                       : "gsaturated");
                std::ostringstream name;
                name << "oracle==series " << fname << " theta=" << theta << " tau=" << tau
                     << " q=" << rat_string(q);
                report(name.str(), ok);
            }
        }
    }
    // Grammar recounts at theta=1, tau=0.
    {
        auto g1 = models::grammar_total(models::Grammar::Nussinov, n_max, 1);
        auto g2 = models::grammar_total(models::Grammar::BaseStacking, n_max, 1);
        auto g3 = models::grammar_total(models::Grammar::McCaskill, n_max, 1);
        auto g6 = models::grammar_total(models::Grammar::SaturatedZuker, n_max, 1);
        auto g5 = models::grammar_total(models::Grammar::ExternalDangle, n_max, 1);
        models::StructureClass gen;
        models::StructureClass sat;
        sat.family = Family::Saturated;
        models::StructureClass gend;
        gend.dangles = true;
        gend.params.q = 1;
        auto gen_series = models::count_table(gen, n_max);
        auto sat_series = models::count_table(sat, n_max);
        auto gend_series = models::count_table(gend, n_max);
        bool ok1 = true, ok2 = true, ok3 = true, ok6 = true, ok5 = true;
        for (int n = 1; n <= n_max; ++n) {
            size_t i = static_cast<size_t>(n);
            if (Rat(g1[i]) != gen_series[i]) ok1 = false;
            if (Rat(g2[i]) != gen_series[i]) ok2 = false;
            if (Rat(g3[i]) != gen_series[i]) ok3 = false;
            if (Rat(g6[i]) != sat_series[i]) ok6 = false;
            if (Rat(g5[i]) != gend_series[i]) ok5 = false;
        }
        report("nussinov grammar == general series (theta=1)", ok1);
        report("base-stacking grammar == general series (theta=1)", ok2);
        report("mccaskill grammar == general series (theta=1)", ok3);
        report("zuker grammar == saturated series (theta=1)", ok6);
        report("external-dangle grammar == dangle series q=1 (theta=1)", ok5);
    }
    if (failures == 0) {
        std::cout << "all classes consistent\n";
        return 0;
    }
    std::cout << failures << " checks failed\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact and asymptotic enumeration of RNA secondary structures "
                 "in the homopolymer model"};
    app.require_subcommand(1);

    CommonFlags flags;
    int n_max = 7;
    int order = 200;
    bool by_links = false;
    std::string grammar;
    std::string h = "1/1000";
    int melt_n = 100;
    double t_min = 0, t_max = 100, t_step = 1, epsilon = 1.0;
    bool paper_r = false;
    int check_n_max = 12;
    int enum_cap = kDefaultEnumerationCap;

    CLI::App* count = app.add_subcommand("count", "exact weighted counts by length");
    add_common(count, flags);
    count->add_option("--n-max,--n", n_max, "largest length")->check(CLI::PositiveNumber);
    count->add_flag("--by-links", by_links, "counts split by number of links at length n-max");

    CLI::App* series = app.add_subcommand("series", "coefficient dump of the generating function");
    add_common(series, flags);
    series->add_option("--order", order, "truncation order")->check(CLI::PositiveNumber);
    series->add_flag("--by-links", by_links, "dump the bivariate series g(t,s)");

    CLI::App* asym = app.add_subcommand("asym", "growth rate and amplitude via the singularity system");
    add_common(asym, flags);
    asym->add_option("--order", order, "series order for seeding and diagnostics")
        ->check(CLI::PositiveNumber);
    asym->add_option("--grammar", grammar, "solve a dangle grammar system instead of a class")
        ->check(CLI::IsMember({"unafold-dangle", "external-dangle"}));

    CLI::App* limitlaw = app.add_subcommand("limitlaw", "gaussian limit-law parameters for links");
    add_common(limitlaw, flags);
    limitlaw->add_option("--order", order, "series order for seeding")->check(CLI::PositiveNumber);
    limitlaw->add_option("--h-step", h, "finite-difference step in u");

    CLI::App* melt = app.add_subcommand("melt", "melting curves for the two energy models");
    add_common(melt, flags);
    melt->add_option("--n", melt_n, "homopolymer length")->check(CLI::Range(1, thermo::kOccupancyCap));
    melt->add_option("--t-min", t_min, "grid start, Celsius");
    melt->add_option("--t-max", t_max, "grid end, Celsius");
    melt->add_option("--t-step", t_step, "grid step, Celsius");
    melt->add_option("--epsilon", epsilon, "energy per unit, kcal/mol");
    melt->add_flag("--paper-R", paper_r, "use the legacy gas constant 1.959 cal/(mol K)");

    CLI::App* check = app.add_subcommand("check", "oracle vs grammar vs series consistency");
    check->add_option("--n-max", check_n_max, "largest length to cross-check")
        ->check(CLI::Range(1, kDefaultEnumerationCap));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (count->parsed()) return cmd_count(flags, n_max, by_links);
        if (series->parsed()) return cmd_series(flags, order, by_links);
        if (asym->parsed()) return cmd_asym(flags, grammar, order);
        if (limitlaw->parsed()) return cmd_limitlaw(flags, order, h);
        if (melt->parsed()) return cmd_melt(flags, melt_n, t_min, t_max, t_step, epsilon, paper_r);
        if (check->parsed()) return cmd_check(check_n_max, enum_cap);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
