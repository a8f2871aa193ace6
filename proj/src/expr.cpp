#include "rnacomb/expr.hpp"

#include <algorithm>
#include <sstream>

namespace rnacomb {

namespace {

ExprPtr make_node(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs, long exponent = 0) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->exponent = exponent;
    return e;
}

bool is_const(const ExprPtr& e) { return e->kind == Expr::Kind::Const; }

}  // namespace

ExprPtr Expr::constant(const Rat& v) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Const;
    e->value = v;
    return e;
}

ExprPtr Expr::variable(const std::string& name) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Var;
    e->name = name;
    return e;
}

ExprPtr operator+(const ExprPtr& a, const ExprPtr& b) {
    if (is_const(a) && is_const(b)) return Expr::constant(a->value + b->value);
    if (a->is_const(Rat(0))) return b;
    if (b->is_const(Rat(0))) return a;
    return make_node(Expr::Kind::Add, a, b);
}

ExprPtr operator-(const ExprPtr& a, const ExprPtr& b) {
    if (is_const(a) && is_const(b)) return Expr::constant(a->value - b->value);
    if (b->is_const(Rat(0))) return a;
    return make_node(Expr::Kind::Sub, a, b);
}

ExprPtr operator-(const ExprPtr& a) { return Expr::constant(Rat(0)) - a; }

ExprPtr operator*(const ExprPtr& a, const ExprPtr& b) {
    if (is_const(a) && is_const(b)) return Expr::constant(a->value * b->value);
    if (a->is_const(Rat(0)) || b->is_const(Rat(0))) return Expr::constant(Rat(0));
    if (a->is_const(Rat(1))) return b;
    if (b->is_const(Rat(1))) return a;
    return make_node(Expr::Kind::Mul, a, b);
}

ExprPtr operator/(const ExprPtr& a, const ExprPtr& b) {
    if (b->is_const(Rat(0))) throw std::domain_error("expression: division by zero constant");
    if (is_const(a) && is_const(b)) return Expr::constant(a->value / b->value);
    if (a->is_const(Rat(0))) return Expr::constant(Rat(0));
    if (b->is_const(Rat(1))) return a;
    return make_node(Expr::Kind::Div, a, b);
}

ExprPtr expr_pow(const ExprPtr& a, long e) {
    if (e == 0) return Expr::constant(Rat(1));
    if (e == 1) return a;
    if (is_const(a)) return Expr::constant(rat_pow(a->value, e));
    return make_node(Expr::Kind::Pow, a, nullptr, e);
}

ExprPtr differentiate(const ExprPtr& e, const std::string& var) {
    switch (e->kind) {
        case Expr::Kind::Const:
            return Expr::constant(Rat(0));
        case Expr::Kind::Var:
            return Expr::constant(Rat(e->name == var ? 1 : 0));
        case Expr::Kind::Add:
            return differentiate(e->lhs, var) + differentiate(e->rhs, var);
        case Expr::Kind::Sub:
            return differentiate(e->lhs, var) - differentiate(e->rhs, var);
        case Expr::Kind::Mul:
            return differentiate(e->lhs, var) * e->rhs + e->lhs * differentiate(e->rhs, var);
        case Expr::Kind::Div:
            return differentiate(e->lhs, var) / e->rhs -
                   e->lhs * differentiate(e->rhs, var) / (e->rhs * e->rhs);
        case Expr::Kind::Pow:
            return Expr::constant(Rat(e->exponent)) * expr_pow(e->lhs, e->exponent - 1) *
                   differentiate(e->lhs, var);
    }
    throw std::logic_error("differentiate: bad expression node");
}

ExprPtr expr_substitute(const ExprPtr& e, const std::string& var, const ExprPtr& replacement) {
    switch (e->kind) {
        case Expr::Kind::Const:
            return e;
        case Expr::Kind::Var:
            return e->name == var ? replacement : e;
        case Expr::Kind::Add:
            return expr_substitute(e->lhs, var, replacement) +
                   expr_substitute(e->rhs, var, replacement);
        case Expr::Kind::Sub:
            return expr_substitute(e->lhs, var, replacement) -
                   expr_substitute(e->rhs, var, replacement);
        case Expr::Kind::Mul:
            return expr_substitute(e->lhs, var, replacement) *
                   expr_substitute(e->rhs, var, replacement);
        case Expr::Kind::Div:
            return expr_substitute(e->lhs, var, replacement) /
                   expr_substitute(e->rhs, var, replacement);
        case Expr::Kind::Pow:
            return expr_pow(expr_substitute(e->lhs, var, replacement), e->exponent);
    }
    throw std::logic_error("expr_substitute: bad expression node");
}

void collect_denominators(const ExprPtr& e, std::vector<ExprPtr>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Div) out.push_back(e->rhs);
    if (e->kind == Expr::Kind::Pow && e->exponent < 0) out.push_back(e->lhs);
    if (e->lhs) collect_denominators(e->lhs, out);
    if (e->rhs) collect_denominators(e->rhs, out);
}

void collect_variables(const ExprPtr& e, std::vector<std::string>& out) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var) {
        if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
        return;
    }
    collect_variables(e->lhs, out);
    collect_variables(e->rhs, out);
}

std::string expr_to_string(const ExprPtr& e) {
    std::ostringstream os;
    std::function<void(const ExprPtr&)> rec = [&](const ExprPtr& x) {
        switch (x->kind) {
            case Expr::Kind::Const:
                os << rat_string(x->value);
                return;
            case Expr::Kind::Var:
                os << x->name;
                return;
            case Expr::Kind::Add:
                os << "(";
                rec(x->lhs);
                os << " + ";
                rec(x->rhs);
                os << ")";
                return;
            case Expr::Kind::Sub:
                os << "(";
                rec(x->lhs);
                os << " - ";
                rec(x->rhs);
                os << ")";
                return;
            case Expr::Kind::Mul:
                os << "(";
                rec(x->lhs);
                os << "*";
                rec(x->rhs);
                os << ")";
                return;
            case Expr::Kind::Div:
                os << "(";
                rec(x->lhs);
                os << "/";
                rec(x->rhs);
                os << ")";
                return;
            case Expr::Kind::Pow:
                os << "(";
                rec(x->lhs);
                os << ")^" << x->exponent;
                return;
        }
    };
    rec(e);
    return os.str();
}

TruncatedSeries evaluate_series(const ExprPtr& e,
                                const std::map<std::string, TruncatedSeries>& bindings,
                                const std::vector<char>& vars, const std::vector<int>& caps) {
    EvalEnv<TruncatedSeries> env;
    for (const auto& [name, series] : bindings) env.vars.emplace(name, series.truncated(caps));
    env.make_const = [&vars, &caps](const Rat& v) {
        return TruncatedSeries::constant(vars, caps, v);
    };
    return evaluate(e, env);
}

namespace {

// Scalar fixed point for the constant term: c = Q(consts, c), iterated from 0.
Rat constant_term_solution(const ExprPtr& q, const std::string& yname,
                           const std::map<std::string, TruncatedSeries>& bindings) {
    EvalEnv<Rat> env;
    env.make_const = [](const Rat& v) { return v; };
    for (const auto& [name, series] : bindings) {
        switch (series.num_vars()) {
            case 1: env.vars.emplace(name, series.coeff({0})); break;
            case 2: env.vars.emplace(name, series.coeff({0, 0})); break;
            default: env.vars.emplace(name, series.coeff({0, 0, 0})); break;
        }
    }
    Rat c(0);
    for (int i = 0; i < 8; ++i) {
        env.vars[yname] = c;
        Rat next = evaluate(q, env);
        if (next == c) return c;
        c = next;
    }
    throw std::domain_error("solve_fixed_point: constant term does not stabilize");
}

}  // namespace

TruncatedSeries solve_fixed_point(const ExprPtr& q, const std::string& yname,
                                  const std::map<std::string, TruncatedSeries>& bindings,
                                  const std::vector<char>& vars, const std::vector<int>& caps,
                                  const SolveOptions& options) {
    Rat y0 = constant_term_solution(q, yname, bindings);

    auto eval_at = [&](const ExprPtr& expr, const TruncatedSeries& f,
                       const std::vector<int>& level) {
        std::map<std::string, TruncatedSeries> env;
        for (const auto& [name, series] : bindings) env.emplace(name, series.truncated(level));
        env.emplace(yname, f.truncated(level));
        return evaluate_series(expr, env, vars, level);
    };

    TruncatedSeries f;
    if (!options.newton) {
        f = TruncatedSeries::constant(vars, caps, y0);
        int total_cap = 0;
        for (int c : caps) total_cap += c;
        bool settled = false;
        int last_val = -1, stagnant = 0;
        for (int it = 0; it < total_cap + 2 && !settled; ++it) {
            TruncatedSeries next = eval_at(q, f, caps);
            if (next == f) {
                settled = true;
                break;
            }
            // Contraction means the first changing total degree climbs.
            int val = (next - f).valuation();
            if (val <= last_val && ++stagnant > 2)
                throw std::domain_error("solve_fixed_point: iteration is not a contraction");
            last_val = val;
            f = next;
        }
        if (!settled && eval_at(q, f, caps) != f)
            throw std::domain_error("solve_fixed_point: failed to stabilize within budget");
        return f;
    }

    ExprPtr qy = differentiate(q, yname);
    std::vector<int> level(caps.size(), 0);
    f = TruncatedSeries::constant(vars, level, y0);
    for (;;) {
        bool at_full = true;
        for (size_t i = 0; i < level.size(); ++i) {
            level[i] = std::min(caps[i], level[i] == 0 ? 1 : level[i] * 2);
            if (level[i] < caps[i]) at_full = false;
        }
        f = f.truncated(level);
        for (int step = 0; step < options.max_iterations; ++step) {
            TruncatedSeries residual = eval_at(q, f, level) - f;
            if (residual.is_zero()) break;
            TruncatedSeries denom =
                eval_at(qy, f, level) - TruncatedSeries::constant(vars, level, Rat(1));
            f = f - residual / denom;
            if (step + 1 == options.max_iterations)
                throw std::domain_error("solve_fixed_point: Newton did not converge");
        }
        if (at_full) break;
    }
    TruncatedSeries residual = eval_at(q, f, caps) - f;
    if (!residual.is_zero())
        throw std::domain_error("solve_fixed_point: residual check failed");
    return f;
}

}  // namespace rnacomb
