#pragma once

#include "rnacomb/rational.hpp"
#include "rnacomb/series.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace rnacomb {

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Rational expression tree over {constant, variable, +, -, *, /, integer
// power}. Immutable; builders fold constants and drop identities so that
// symbolic derivatives stay small.
class Expr {
public:
    enum class Kind { Const, Var, Add, Sub, Mul, Div, Pow };

    Kind kind;
    Rat value;         // Const
    std::string name;  // Var
    ExprPtr lhs, rhs;
    long exponent = 0;  // Pow

    static ExprPtr constant(const Rat& v);
    static ExprPtr constant(long v) { return constant(Rat(v)); }
    static ExprPtr variable(const std::string& name);

    bool is_const(const Rat& v) const { return kind == Kind::Const && value == v; }
};

ExprPtr operator+(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator-(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator*(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator/(const ExprPtr& a, const ExprPtr& b);
ExprPtr operator-(const ExprPtr& a);
ExprPtr expr_pow(const ExprPtr& a, long e);

ExprPtr differentiate(const ExprPtr& e, const std::string& var);
ExprPtr expr_substitute(const ExprPtr& e, const std::string& var, const ExprPtr& replacement);
void collect_denominators(const ExprPtr& e, std::vector<ExprPtr>& out);
void collect_variables(const ExprPtr& e, std::vector<std::string>& out);
std::string expr_to_string(const ExprPtr& e);

// Generic evaluation. R needs +,-,*,/, and make_const supplies constants in R
// (for series it closes over the variable layout and caps).
template <typename R>
struct EvalEnv {
    std::map<std::string, R> vars;
    std::function<R(const Rat&)> make_const;
};

template <typename R>
R evaluate(const ExprPtr& e, const EvalEnv<R>& env) {
    switch (e->kind) {
        case Expr::Kind::Const:
            return env.make_const(e->value);
        case Expr::Kind::Var: {
            auto it = env.vars.find(e->name);
            if (it == env.vars.end())
                throw std::invalid_argument("evaluate: unbound variable " + e->name);
            return it->second;
        }
        case Expr::Kind::Add:
            return evaluate(e->lhs, env) + evaluate(e->rhs, env);
        case Expr::Kind::Sub:
            return evaluate(e->lhs, env) - evaluate(e->rhs, env);
        case Expr::Kind::Mul:
            return evaluate(e->lhs, env) * evaluate(e->rhs, env);
        case Expr::Kind::Div:
            return evaluate(e->lhs, env) / evaluate(e->rhs, env);
        case Expr::Kind::Pow: {
            R base = evaluate(e->lhs, env);
            long k = e->exponent;
            bool inv = k < 0;
            if (inv) k = -k;
            R acc = env.make_const(Rat(1));
            while (k > 0) {
                if (k & 1) acc = acc * base;
                k >>= 1;
                if (k > 0) base = base * base;
            }
            if (inv) acc = env.make_const(Rat(1)) / acc;
            return acc;
        }
    }
    throw std::logic_error("evaluate: bad expression node");
}

// Evaluation over truncated series with named bindings.
TruncatedSeries evaluate_series(const ExprPtr& e,
                                const std::map<std::string, TruncatedSeries>& bindings,
                                const std::vector<char>& vars, const std::vector<int>& caps);

struct SolveOptions {
    bool newton = true;   // contraction iteration when false
    int max_iterations = 4096;
};

// Solves y = Q(..., y) as a truncated series. `bindings` fixes every other
// variable of Q; the result is a series over (vars, caps). The solution is
// verified by the residual Q(f) - f, which must vanish identically at the
// requested truncation.
TruncatedSeries solve_fixed_point(const ExprPtr& q, const std::string& yname,
                                  const std::map<std::string, TruncatedSeries>& bindings,
                                  const std::vector<char>& vars, const std::vector<int>& caps,
                                  const SolveOptions& options = {});

}  // namespace rnacomb
