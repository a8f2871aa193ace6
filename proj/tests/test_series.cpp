#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "rnacomb/expr.hpp"
#include "rnacomb/series.hpp"

#include <random>

using namespace rnacomb;

namespace {

TruncatedSeries t_series(int order) {
    return TruncatedSeries::variable({'t'}, {order}, 't');
}

TruncatedSeries one_series(int order) {
    return TruncatedSeries::constant({'t'}, {order}, Rat(1));
}

TruncatedSeries random_series(const std::vector<char>& vars, const std::vector<int>& caps,
                              std::mt19937& rng, bool unit_constant = false) {
    std::uniform_int_distribution<int> num(-6, 6);
    std::uniform_int_distribution<int> den(1, 5);
    TruncatedSeries s(vars, caps);
    auto fill = [&](std::initializer_list<int> e) { return frac(num(rng), den(rng)); };
    if (vars.size() == 1) {
        for (int a = 0; a <= caps[0]; ++a) s.set_coeff({a}, fill({a}));
        if (unit_constant) s.set_coeff({0}, Rat(1));
    } else {
        for (int a = 0; a <= caps[0]; ++a)
            for (int b = 0; b <= caps[1]; ++b) s.set_coeff({a, b}, fill({a, b}));
        if (unit_constant) s.set_coeff({0, 0}, Rat(1));
    }
    return s;
}

}  // namespace

TEST_CASE("product of (1+t) and (1-t)") {
    TruncatedSeries t = t_series(5);
    TruncatedSeries p = (one_series(5) + t) * (one_series(5) - t);
    CHECK(p.coeff1(0) == 1);
    CHECK(p.coeff1(1) == 0);
    CHECK(p.coeff1(2) == -1);
    for (int k = 3; k <= 5; ++k) CHECK(p.coeff1(k) == 0);
}

TEST_CASE("geometric series t/(1-t)") {
    TruncatedSeries t = t_series(4);
    TruncatedSeries g = t / (one_series(4) - t);
    CHECK(g.coeff1(0) == 0);
    for (int k = 1; k <= 4; ++k) CHECK(g.coeff1(k) == 1);
}

TEST_CASE("chain independent-set polynomials from the closed form") {
    // S(v,z) = (1+vz)/(1-z-v z^2); rows are the Fibonacci polynomials.
    std::vector<char> vars{'z', 'v'};
    std::vector<int> caps{6, 6};
    TruncatedSeries z = TruncatedSeries::variable(vars, caps, 'z');
    TruncatedSeries v = TruncatedSeries::variable(vars, caps, 'v');
    TruncatedSeries one = TruncatedSeries::constant(vars, caps, Rat(1));
    TruncatedSeries s = (one + v * z) / (one - z - v * z * z);
    CHECK(s.coeff({0, 0}) == 1);
    CHECK(s.coeff({1, 0}) == 1);
    CHECK(s.coeff({1, 1}) == 1);
    CHECK(s.coeff({2, 0}) == 1);
    CHECK(s.coeff({2, 1}) == 2);
    CHECK(s.coeff({3, 0}) == 1);
    CHECK(s.coeff({3, 1}) == 3);
    CHECK(s.coeff({3, 2}) == 1);

    // Independent oracle: S_k = v S_{k-2} + S_{k-1}, S_0 = 1, S_1 = 1 + v.
    std::vector<std::vector<Rat>> rows = {{Rat(1)}, {Rat(1), Rat(1)}};
    for (int k = 2; k <= 6; ++k) {
        std::vector<Rat> row = rows[k - 1];
        row.resize(k + 1, Rat(0));
        for (size_t m = 0; m + 1 <= rows[k - 2].size(); ++m) row[m + 1] += rows[k - 2][m];
        rows.push_back(row);
    }
    for (int k = 0; k <= 6; ++k)
        for (int m = 0; m <= 6; ++m) {
            Rat expect = m < static_cast<int>(rows[k].size()) ? rows[k][m] : Rat(0);
            CHECK(s.coeff({k, m}) == expect);
        }
}

TEST_CASE("reciprocal of 1-t-t^2 carries the Fibonacci numbers") {
    int order = 10;
    TruncatedSeries t = t_series(order);
    TruncatedSeries a = one_series(order) - t - t * t;
    TruncatedSeries r = a.reciprocal();
    // Defining product.
    CHECK((a * r) == one_series(order));
    // Independent recurrence: f_0 = f_1 = 1, f_k = f_{k-1} + f_{k-2}.
    std::vector<Rat> fib{Rat(1), Rat(1)};
    for (int k = 2; k <= order; ++k) fib.push_back(fib[k - 1] + fib[k - 2]);
    for (int k = 0; k <= order; ++k) CHECK(r.coeff1(k) == fib[k]);
}

TEST_CASE("reciprocal of a constant") {
    TruncatedSeries two = TruncatedSeries::constant({'t'}, {3}, Rat(2));
    CHECK(two.reciprocal().coeff1(0) == Rat(1, 2));
}

TEST_CASE("reciprocal requires a unit constant term") {
    CHECK_THROWS_AS(t_series(3).reciprocal(), std::domain_error);
}

TEST_CASE("substitution x := s/(1-s) into x/(1-x)") {
    int order = 6;
    TruncatedSeries x = TruncatedSeries::variable({'x'}, {order}, 'x');
    TruncatedSeries fx = x / (TruncatedSeries::constant({'x'}, {order}, Rat(1)) - x);
    TruncatedSeries s = TruncatedSeries::variable({'s'}, {order}, 's');
    TruncatedSeries xs = s / (TruncatedSeries::constant({'s'}, {order}, Rat(1)) - s);
    TruncatedSeries composed = fx.substitute('x', xs);
    // s/(1-2s): coefficients 2^{k-1}.
    CHECK(composed.coeff1(0) == 0);
    Rat pow2(1);
    for (int k = 1; k <= order; ++k) {
        CHECK(composed.coeff1(k) == pow2);
        pow2 *= 2;
    }
}

TEST_CASE("monomial substitution s := p t^2 keeps p symbolic") {
    std::vector<char> vars{'t', 'p'};
    std::vector<int> caps{8, 4};
    TruncatedSeries t2p = TruncatedSeries::variable(vars, caps, 'p') *
                          TruncatedSeries::variable(vars, caps, 't') *
                          TruncatedSeries::variable(vars, caps, 't');
    TruncatedSeries s = TruncatedSeries::variable({'s'}, {4}, 's');
    TruncatedSeries g = s / (TruncatedSeries::constant({'s'}, {4}, Rat(1)) - s);
    TruncatedSeries composed = g.substitute('s', t2p);
    CHECK(composed.coeff({2, 1}) == 1);
    CHECK(composed.coeff({4, 2}) == 1);
    CHECK(composed.coeff({6, 3}) == 1);
    CHECK(composed.coeff({2, 0}) == 0);
    CHECK(composed.coeff({3, 1}) == 0);
}

TEST_CASE("expression evaluation over series matches by-hand algebra") {
    // U at theta=1: t/(1-t).
    ExprPtr t = Expr::variable("t");
    ExprPtr u = t / (Expr::constant(1) - t);
    std::map<std::string, TruncatedSeries> bindings{{"t", t_series(5)}};
    TruncatedSeries s = evaluate_series(u, bindings, {'t'}, {5});
    for (int k = 1; k <= 5; ++k) CHECK(s.coeff1(k) == 1);
    CHECK(s.coeff1(0) == 0);
}

TEST_CASE("catalan-like fixed point y = t + y^2") {
    ExprPtr t = Expr::variable("t");
    ExprPtr y = Expr::variable("y");
    ExprPtr q = t + y * y;
    int order = 12;
    std::map<std::string, TruncatedSeries> bindings{{"t", t_series(order)}};
    TruncatedSeries f = solve_fixed_point(q, "y", bindings, {'t'}, {order});

    // Convolution oracle: c_1 = 1, c_n = sum_{i+j=n} c_i c_j.
    std::vector<Rat> c(order + 1, Rat(0));
    c[1] = 1;
    for (int n = 2; n <= order; ++n)
        for (int i = 1; i < n; ++i) c[n] += c[i] * c[n - i];
    for (int n = 0; n <= order; ++n) CHECK(f.coeff1(n) == c[n]);
    CHECK(f.coeff1(1) == 1);
    CHECK(f.coeff1(2) == 1);
    CHECK(f.coeff1(3) == 2);
    CHECK(f.coeff1(4) == 5);

    SolveOptions plain;
    plain.newton = false;
    TruncatedSeries g = solve_fixed_point(q, "y", bindings, {'t'}, {order}, plain);
    CHECK(f == g);
}

TEST_CASE("nussinov-style one-line equation S = z + zS + z^2 S + z^2 S^2") {
    ExprPtr z = Expr::variable("t");
    ExprPtr y = Expr::variable("y");
    ExprPtr q = z + z * y + z * z * y + z * z * y * y;
    std::map<std::string, TruncatedSeries> bindings{{"t", t_series(7)}};
    TruncatedSeries f = solve_fixed_point(q, "y", bindings, {'t'}, {7});
    std::vector<long> expected{0, 1, 1, 2, 4, 8, 17, 37};
    for (int n = 0; n <= 7; ++n) CHECK(f.coeff1(n) == expected[n]);
}

TEST_CASE("fixed point detects a non-contraction") {
    // y = 1/2 + y has no series solution; the constant term never settles.
    ExprPtr y = Expr::variable("y");
    ExprPtr q = Expr::constant(Rat(1, 2)) + y;
    std::map<std::string, TruncatedSeries> bindings{{"t", t_series(3)}};
    CHECK_THROWS_AS(solve_fixed_point(q, "y", bindings, {'t'}, {3}), std::domain_error);
}

TEST_CASE("ring identities on random instances") {
    std::mt19937 rng(20240811);
    for (int round = 0; round < 20; ++round) {
        std::vector<char> vars{'t', 's'};
        std::vector<int> caps{5, 4};
        TruncatedSeries a = random_series(vars, caps, rng);
        TruncatedSeries b = random_series(vars, caps, rng);
        TruncatedSeries c = random_series(vars, caps, rng);
        CHECK((a + b) * c == a * c + b * c);
        CHECK((a * b) * c == a * (b * c));
        CHECK(a * b == b * a);
        TruncatedSeries u = random_series(vars, caps, rng, /*unit_constant=*/true);
        CHECK(u * u.reciprocal() == TruncatedSeries::constant(vars, caps, Rat(1)));
    }
}

TEST_CASE("serial and parallel convolutions agree") {
    std::mt19937 rng(7);
    std::vector<char> vars{'t', 's'};
    std::vector<int> caps{40, 12};
    TruncatedSeries a = random_series(vars, caps, rng);
    TruncatedSeries b = random_series(vars, caps, rng);
    TruncatedSeries::set_parallel(false);
    TruncatedSeries serial = a * b;
    TruncatedSeries::set_parallel(true);
    TruncatedSeries parallel = a * b;
    CHECK(serial == parallel);
}

TEST_CASE("operands must share variables; results carry min caps") {
    TruncatedSeries a({'t'}, {5});
    TruncatedSeries b({'s'}, {5});
    CHECK_THROWS_AS(a + b, std::invalid_argument);
    TruncatedSeries c({'t'}, {3});
    TruncatedSeries d = t_series(5) * c;
    CHECK(d.cap(0) == 3);
}

TEST_CASE("csv dump is deterministic and exact") {
    TruncatedSeries s({'t'}, {3});
    s.set_coeff({1}, Rat(1));
    s.set_coeff({3}, Rat(-7, 3));
    CHECK(s.to_csv() == "e_t,num,den\n1,1,1\n3,-7,3\n");

    TruncatedSeries b({'t', 's'}, {1, 1});
    b.set_coeff({1, 1}, Rat(5));
    CHECK(b.to_csv() == "e_t,e_s,num,den\n1,1,5,1\n");
}

TEST_CASE("map-form substitution composes sequentially") {
    // f(x) = x + x^2 with x := s^2, then s-cap truncation applies.
    TruncatedSeries x = TruncatedSeries::variable({'x'}, {2}, 'x');
    TruncatedSeries f = x + x * x;
    TruncatedSeries s2 = TruncatedSeries::variable({'s'}, {5}, 's').pow(2);
    TruncatedSeries composed = f.substitute({{'x', s2}});
    CHECK(composed.coeff1(2) == 1);
    CHECK(composed.coeff1(4) == 1);
    CHECK(composed.coeff1(3) == 0);
}
