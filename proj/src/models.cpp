#include "rnacomb/models.hpp"

#include <stdexcept>

namespace rnacomb::models {

namespace {

ExprPtr tv() { return Expr::variable("t"); }
ExprPtr sv() { return Expr::variable("s"); }
ExprPtr rv() { return Expr::variable("r"); }
ExprPtr yv() { return Expr::variable("y"); }
ExprPtr uv() { return Expr::variable("u"); }
ExprPtr one() { return Expr::constant(1); }
ExprPtr two() { return Expr::constant(2); }

struct Substitutions {
    ExprPtr U, V, V1, V2, X;
};

// Corner and edge generating substitutions per family. Marked corners of the
// dangle systems split into lateral (V1) and extremal (V2); an extremal
// corner of weight one cannot carry both of its edge-side marks, hence the
// -t*r^2 correction.
Substitutions make_substitutions(const StructureClass& cls) {
    const int theta = cls.params.theta;
    const int tau = cls.params.tau;
    ExprPtr t = tv(), s = sv(), r = rv();
    ExprPtr one_minus_t = one() - t;
    Substitutions sub;
    ExprPtr vbase;  // positive-weight corner series before dangle marks
    switch (cls.family) {
        case Family::General:
            sub.U = expr_pow(t, theta) / one_minus_t;
            vbase = t / one_minus_t;
            sub.X = expr_pow(s, tau + 1) / (one() - s);
            break;
        case Family::Saturated:
            if (tau != 0)
                throw std::invalid_argument("saturated class requires tau = 0");
            sub.U = expr_pow(t, theta) * (one() + t);
            vbase = (t - expr_pow(t, theta + 2)) / one_minus_t;
            sub.X = s / (one() - s);
            break;
        case Family::GSaturated:
            sub.U = expr_pow(t, theta) * (one() + t);
            vbase = t / one_minus_t;
            sub.X = expr_pow(s, tau + 1) / (one() - s);
            break;
    }
    sub.V = vbase;
    if (cls.dangles) {
        ExprPtr opr = one() + r;
        sub.V1 = vbase * opr;
        sub.V2 = vbase * opr * opr - t * r * r;
    }
    return sub;
}

ExprPtr tail_expr(const StructureClass& cls) {
    ExprPtr t = tv();
    if (cls.family == Family::Saturated)
        return (t - expr_pow(t, cls.params.theta + 2)) / (one() - t);
    return t / (one() - t);
}

// F and G shapes over placeholder variables u, v (or v1, v2), x, y.
struct Templates {
    ExprPtr F, G;
};

Templates family_templates(Family family, bool dangles) {
    ExprPtr u = Expr::variable("u_"), x = Expr::variable("x_"), y = yv();
    ExprPtr xy = x * y;
    Templates tpl;
    if (!dangles) {
        ExprPtr v = Expr::variable("v_");
        switch (family) {
            case Family::General: {
                ExprPtr opv = one() + v;
                ExprPtr core = x * opv * opv * y / (one() - x * opv * y);
                tpl.F = u + core - xy;
                tpl.G = core;
                break;
            }
            case Family::Saturated: {
                ExprPtr d = one() - xy;
                tpl.F = u + x * x * y * y / d + v / (d * d) - v;
                tpl.G = xy / d + v / (d * d) - v;
                break;
            }
            case Family::GSaturated: {
                ExprPtr d = one() - xy - v * x * x * y * y;
                tpl.F = u + two() * v * xy +
                        (one() + two() * v * x * x * y * y * (one() + v * xy)) / d - xy - one();
                tpl.G = xy * (one() + two() * v + (one() + v) * v * xy) / d;
                break;
            }
        }
        return tpl;
    }
    ExprPtr v1 = Expr::variable("v1_"), v2 = Expr::variable("v2_");
    switch (family) {
        case Family::General: {
            ExprPtr op1 = one() + v1;
            ExprPtr core = x * op1 * op1 * y / (one() - x * (one() + v2) * y);
            tpl.F = u + core - xy;
            tpl.G = core;
            break;
        }
        case Family::Saturated: {
            ExprPtr d = one() - xy;
            tpl.F = u + (x * x * y * y + two() * xy * (v1 - v2)) / d + v2 / (d * d) - v2;
            tpl.G = xy * (one() + two() * (v1 - v2)) / d + v2 / (d * d) - v2;
            break;
        }
        case Family::GSaturated: {
            ExprPtr d = one() - xy - v2 * x * x * y * y;
            tpl.F = u + two() * v1 * xy +
                    (one() + two() * v1 * x * x * y * y * (one() + v2 * xy)) / d - xy - one();
            tpl.G = xy * (one() + two() * v1 + xy * (v2 + v1 * v1)) / d;
            break;
        }
    }
    return tpl;
}

ExprPtr apply_substitutions(const ExprPtr& tpl, const Substitutions& sub, bool dangles) {
    ExprPtr e = expr_substitute(tpl, "u_", sub.U);
    e = expr_substitute(e, "x_", sub.X);
    if (dangles) {
        e = expr_substitute(e, "v1_", sub.V1);
        e = expr_substitute(e, "v2_", sub.V2);
    } else {
        e = expr_substitute(e, "v_", sub.V);
    }
    return e;
}

}  // namespace

GfSystem build_system(const StructureClass& cls) {
    check_params(cls.params);
    Substitutions sub = make_substitutions(cls);
    Templates tpl = family_templates(cls.family, cls.dangles);
    GfSystem sys;
    sys.cls = cls;
    sys.Q = apply_substitutions(tpl.F, sub, cls.dangles);
    sys.R = apply_substitutions(tpl.G, sub, cls.dangles);
    sys.tail = tail_expr(cls);
    sys.has_dangle_var = cls.dangles;
    return sys;
}

namespace {

struct SolvedSeries {
    TruncatedSeries f;
    TruncatedSeries g;  // includes tail
    std::map<std::string, TruncatedSeries> bindings;
    std::vector<char> vars;
    std::vector<int> caps;
};

// Solve the class system over (t) with numeric p, q, or over (t,p[,q]).
SolvedSeries solve_class(const StructureClass& cls, int order, bool symbolic, int p_cap,
                         int q_cap) {
    GfSystem sys = build_system(cls);
    std::vector<char> vars{'t'};
    std::vector<int> caps{order};
    if (symbolic) {
        vars.push_back('p');
        caps.push_back(p_cap);
        if (cls.dangles) {
            vars.push_back('q');
            caps.push_back(q_cap);
        }
    }
    TruncatedSeries t = TruncatedSeries::variable(vars, caps, 't');
    TruncatedSeries s_binding = t * t;
    if (symbolic) {
        s_binding = s_binding * TruncatedSeries::variable(vars, caps, 'p');
    } else {
        s_binding *= cls.params.p;
    }
    std::map<std::string, TruncatedSeries> bindings;
    bindings.emplace("t", t);
    bindings.emplace("s", s_binding);
    if (cls.dangles) {
        if (symbolic)
            bindings.emplace("r", TruncatedSeries::variable(vars, caps, 'q'));
        else
            bindings.emplace("r", TruncatedSeries::constant(vars, caps, cls.params.q));
    }
    SolvedSeries out;
    out.f = solve_fixed_point(sys.Q, "y", bindings, vars, caps);
    auto g_bindings = bindings;
    g_bindings.emplace("y", out.f);
    out.g = evaluate_series(sys.R, g_bindings, vars, caps) +
            evaluate_series(sys.tail, g_bindings, vars, caps);
    out.bindings = std::move(bindings);
    out.vars = vars;
    out.caps = caps;
    return out;
}

}  // namespace

TruncatedSeries weighted_series(const StructureClass& cls, int order) {
    return solve_class(cls, order, false, 0, 0).g;
}

TruncatedSeries weighted_series_symbolic(const StructureClass& cls, int order, int p_cap,
                                         int q_cap) {
    return solve_class(cls, order, true, p_cap, q_cap).g;
}

Rat count(const StructureClass& cls, int n) {
    if (n < 1) throw std::invalid_argument("count: n must be positive");
    return weighted_series(cls, n).coeff1(n);
}

std::vector<Rat> count_table(const StructureClass& cls, int n_max) {
    TruncatedSeries g = weighted_series(cls, n_max);
    std::vector<Rat> table(static_cast<size_t>(n_max) + 1, Rat(0));
    for (int n = 0; n <= n_max; ++n) table[static_cast<size_t>(n)] = g.coeff1(n);
    return table;
}

std::vector<Rat> count_by_links(const StructureClass& cls, int n) {
    GfSystem sys = build_system(cls);
    std::vector<char> vars{'t', 's'};
    std::vector<int> caps{n, n / 2 + 1};
    // In g(t,s) the variable t marks free elements; marking links as s t^2
    // turns t into a length mark, so [t^n s^k] counts by (length, links).
    std::map<std::string, TruncatedSeries> bindings;
    TruncatedSeries t = TruncatedSeries::variable(vars, caps, 't');
    bindings.emplace("t", t);
    bindings.emplace("s", TruncatedSeries::variable(vars, caps, 's') * t * t);
    if (cls.dangles)
        bindings.emplace("r", TruncatedSeries::constant(vars, caps, cls.params.q));
    TruncatedSeries f = solve_fixed_point(sys.Q, "y", bindings, vars, caps);
    auto g_bindings = bindings;
    g_bindings.emplace("y", f);
    TruncatedSeries g = evaluate_series(sys.R, g_bindings, vars, caps);
    std::vector<Rat> by_links(static_cast<size_t>(n) / 2 + 1, Rat(0));
    for (size_t k = 0; k < by_links.size(); ++k)
        by_links[k] = g.coeff({n, static_cast<int>(k)});
    // Link-free structures enter at k = 0.
    std::vector<char> tvars{'t'};
    std::vector<int> tcaps{n};
    std::map<std::string, TruncatedSeries> tb;
    tb.emplace("t", TruncatedSeries::variable(tvars, tcaps, 't'));
    by_links[0] += evaluate_series(sys.tail, tb, tvars, tcaps).coeff1(n);
    return by_links;
}

namespace {

// Numerator series of the exact mean: d/du of g(t, p u t^2, q) at u = 1.
TruncatedSeries mean_numerator_series(const StructureClass& cls, int order) {
    GfSystem sys = build_system(cls);
    ExprPtr s_marked = Expr::constant(cls.params.p) * uv() * tv() * tv();
    ExprPtr qm = expr_substitute(sys.Q, "s", s_marked);
    ExprPtr rm = expr_substitute(sys.R, "s", s_marked);
    if (cls.dangles) {
        qm = expr_substitute(qm, "r", Expr::constant(cls.params.q));
        rm = expr_substitute(rm, "r", Expr::constant(cls.params.q));
    }
    std::vector<char> vars{'t'};
    std::vector<int> caps{order};
    TruncatedSeries t = TruncatedSeries::variable(vars, caps, 't');
    TruncatedSeries unit = TruncatedSeries::constant(vars, caps, Rat(1));
    std::map<std::string, TruncatedSeries> bindings;
    bindings.emplace("t", t);
    bindings.emplace("u", unit);
    TruncatedSeries f = solve_fixed_point(qm, "y", bindings, vars, caps);
    auto env = bindings;
    env.emplace("y", f);
    TruncatedSeries qu = evaluate_series(differentiate(qm, "u"), env, vars, caps);
    TruncatedSeries qy = evaluate_series(differentiate(qm, "y"), env, vars, caps);
    TruncatedSeries fu = qu / (unit - qy);
    TruncatedSeries ru = evaluate_series(differentiate(rm, "u"), env, vars, caps);
    TruncatedSeries ry = evaluate_series(differentiate(rm, "y"), env, vars, caps);
    return ru + ry * fu;
}

}  // namespace

Rat exact_mean_links(const StructureClass& cls, int n) {
    TruncatedSeries numerator = mean_numerator_series(cls, n);
    Rat denom = count(cls, n);
    if (denom == 0) throw std::domain_error("exact_mean_links: empty class at this length");
    return numerator.coeff1(n) / denom;
}

std::vector<Rat> exact_mean_links_table(const StructureClass& cls, int n_max) {
    TruncatedSeries numerator = mean_numerator_series(cls, n_max);
    std::vector<Rat> denom = count_table(cls, n_max);
    std::vector<Rat> means(static_cast<size_t>(n_max) + 1, Rat(0));
    for (int n = 1; n <= n_max; ++n)
        if (denom[static_cast<size_t>(n)] != 0)
            means[static_cast<size_t>(n)] =
                numerator.coeff1(n) / denom[static_cast<size_t>(n)];
    return means;
}

std::pair<ExprPtr, ExprPtr> emit_phi_psi(const StructureClass& cls, bool mark_links) {
    GfSystem sys = build_system(cls);
    ExprPtr s_binding = Expr::constant(cls.params.p) * tv() * tv();
    if (mark_links) s_binding = s_binding * uv();
    ExprPtr phi = expr_substitute(sys.Q, "s", s_binding);
    ExprPtr psi = expr_substitute(sys.R, "s", s_binding);
    if (cls.dangles) {
        phi = expr_substitute(phi, "r", Expr::constant(cls.params.q));
        psi = expr_substitute(psi, "r", Expr::constant(cls.params.q));
    }
    if (cls.params.theta == 0) {
        // Shift the unknown so that Phi(0,0) = 0.
        ExprPtr shifted = yv() + one();
        phi = expr_substitute(phi, "y", shifted) - one();
        psi = expr_substitute(psi, "y", shifted);
    }
    return {phi, psi};
}

}  // namespace rnacomb::models
