#include "rnacomb/models.hpp"

#include <stdexcept>

namespace rnacomb::models {

namespace {

using Poly = std::vector<Int>;  // coefficients by mark count

Poly& grow(Poly& p, size_t size) {
    if (p.size() < size) p.resize(size, Int(0));
    return p;
}

void add_to(Poly& dst, const Poly& src, int shift = 0) {
    grow(dst, src.size() + static_cast<size_t>(shift));
    for (size_t i = 0; i < src.size(); ++i) dst[i + static_cast<size_t>(shift)] += src[i];
}

void add_conv(Poly& dst, const Poly& a, const Poly& b, int shift = 0) {
    if (a.empty() || b.empty()) return;
    grow(dst, a.size() + b.size() - 1 + static_cast<size_t>(shift));
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) {
            if (b[j] == 0) continue;
            dst[i + j + static_cast<size_t>(shift)] += a[i] * b[j];
        }
    }
}

Int poly_total(const Poly& p) {
    Int t = 0;
    for (const Int& c : p) t += c;
    return t;
}

// S = z + zS + u z^2 (1+S) I with I the structures of length >= theta
// (1 + S when theta = 0; short lengths are single all-free strings).
std::vector<Poly> nussinov_dp(int n_max, int theta) {
    std::vector<Poly> s(static_cast<size_t>(n_max) + 1);
    auto inner = [&](int m) -> Poly {
        if (theta == 0 && m == 0) return Poly{Int(1)};
        if (m < theta || m < 0) return Poly{};
        return s[static_cast<size_t>(m)];
    };
    for (int n = 1; n <= n_max; ++n) {
        Poly out;
        if (n == 1) add_to(out, Poly{Int(1)});
        add_to(out, s[static_cast<size_t>(n - 1)]);
        for (int a = 0; a <= n - 2; ++a) {
            Poly left = a == 0 ? Poly{Int(1)} : s[static_cast<size_t>(a)];
            if (left.empty()) continue;
            Poly right = inner(n - 2 - a);
            if (right.empty()) continue;
            add_conv(out, left, right, /*shift=*/1);  // the new pair carries u
        }
        s[static_cast<size_t>(n)] = std::move(out);
    }
    return s;
}

using Poly2 = std::vector<std::vector<Int>>;  // [pairs][stacked]

void grow2(Poly2& p, size_t r, size_t c) {
    if (p.size() < r) p.resize(r);
    for (auto& row : p)
        if (row.size() < c) row.resize(c, Int(0));
}

void add_to2(Poly2& dst, const Poly2& src, int dpair = 0, int dstack = 0) {
    if (src.empty()) return;
    size_t cols = 0;
    for (const auto& row : src) cols = std::max(cols, row.size());
    grow2(dst, src.size() + static_cast<size_t>(dpair), cols + static_cast<size_t>(dstack));
    for (size_t i = 0; i < src.size(); ++i)
        for (size_t j = 0; j < src[i].size(); ++j)
            if (src[i][j] != 0)
                dst[i + static_cast<size_t>(dpair)][j + static_cast<size_t>(dstack)] += src[i][j];
}

void add_conv2(Poly2& dst, const Poly2& a, const Poly2& b, int dpair = 0, int dstack = 0) {
    if (a.empty() || b.empty()) return;
    size_t ac = 0, bc = 0;
    for (const auto& row : a) ac = std::max(ac, row.size());
    for (const auto& row : b) bc = std::max(bc, row.size());
    if (ac == 0 || bc == 0) return;
    grow2(dst, a.size() + b.size() - 1 + static_cast<size_t>(dpair),
          ac + bc - 1 + static_cast<size_t>(dstack));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < a[i].size(); ++j) {
            if (a[i][j] == 0) continue;
            for (size_t k = 0; k < b.size(); ++k)
                for (size_t l = 0; l < b[k].size(); ++l) {
                    if (b[k][l] == 0) continue;
                    dst[i + k + static_cast<size_t>(dpair)]
                       [j + l + static_cast<size_t>(dstack)] += a[i][j] * b[k][l];
                }
        }
}

struct StackingDp {
    std::vector<Poly2> s, t;
};

// S = z + zS + T + ST
// T = u z^2 (vT + ST + z + zS - short all-free interiors [+1 when theta=0])
StackingDp stacking_dp(int n_max, int theta) {
    StackingDp dp;
    dp.s.resize(static_cast<size_t>(n_max) + 1);
    dp.t.resize(static_cast<size_t>(n_max) + 1);
    for (int n = 1; n <= n_max; ++n) {
        // interiors J[m] with m = n - 2
        int m = n - 2;
        Poly2 tn;
        if (m >= 0) {
            Poly2 j;
            if (m >= 1) {
                add_to2(j, dp.t[static_cast<size_t>(m)], 0, /*dstack=*/1);
                for (int a = 1; a <= m - 1; ++a)
                    add_conv2(j, dp.s[static_cast<size_t>(a)], dp.t[static_cast<size_t>(m - a)]);
                if (m == 1) add_to2(j, Poly2{{Int(1)}});
                if (m >= 2) add_to2(j, dp.s[static_cast<size_t>(m - 1)]);
                if (m <= theta - 1) {
                    // remove the all-free interior, too short for a hairpin
                    j[0][0] -= 1;
                }
            } else if (theta == 0) {
                add_to2(j, Poly2{{Int(1)}});  // empty interior
            }
            add_to2(tn, j, /*dpair=*/1);  // closing pair carries u
        }
        dp.t[static_cast<size_t>(n)] = std::move(tn);
        Poly2 sn;
        if (n == 1) add_to2(sn, Poly2{{Int(1)}});
        add_to2(sn, dp.s[static_cast<size_t>(n - 1)]);
        add_to2(sn, dp.t[static_cast<size_t>(n)]);
        for (int a = 1; a <= n - 1; ++a)
            add_conv2(sn, dp.s[static_cast<size_t>(a)], dp.t[static_cast<size_t>(n - a)]);
        dp.s[static_cast<size_t>(n)] = std::move(sn);
    }
    return dp;
}

// Loop-decomposition recount, theta = 1.
// S = z + B + zS + SB
// B = z^2 (U + B + 2UB + U^2 B + M M1)
// M1 = B (1 + U);  M = (1 + U + M) M1;  U = z/(1-z)
std::vector<Int> mccaskill_dp(int n_max) {
    std::vector<Int> s(n_max + 1, Int(0)), b(n_max + 1, Int(0)), m1(n_max + 1, Int(0)),
        m(n_max + 1, Int(0));
    auto u = [](int k) { return k >= 1 ? 1 : 0; };
    for (int n = 1; n <= n_max; ++n) {
        Int bn = 0;
        int k = n - 2;
        if (k >= 1) {
            bn += u(k);
            bn += b[k];
            for (int a = 1; a <= k - 1; ++a) {
                bn += 2 * u(a) * b[k - a];
                Int uu = std::max(0, a - 1);  // ways to split a into two U runs
                bn += uu * b[k - a];
            }
            for (int a = 1; a <= k - 1; ++a) bn += m[a] * m1[k - a];
        }
        b[n] = bn;
        Int m1n = b[n];
        for (int a = 1; a <= n - 1; ++a) m1n += b[a] * u(n - a);
        m1[n] = m1n;
        Int mn = m1[n];
        for (int a = 1; a <= n - 1; ++a) mn += u(a) * m1[n - a];
        for (int a = 1; a <= n - 1; ++a) mn += m[a] * m1[n - a];
        m[n] = mn;
        Int sn = n == 1 ? 1 : 0;
        sn += b[n];
        sn += s[n - 1];
        for (int a = 1; a <= n - 1; ++a) sn += s[a] * b[n - a];
        s[n] = sn;
    }
    return s;
}

// Saturated structures, theta = 1, u marks pairs.
// S = z + z^2 + zR + z^2 R + u z^2 S + u z^2 S^2
// R = u z^2 S + u z^2 R S
std::vector<Poly> saturated_dp(int n_max) {
    std::vector<Poly> s(static_cast<size_t>(n_max) + 1), r(static_cast<size_t>(n_max) + 1);
    for (int n = 1; n <= n_max; ++n) {
        Poly rn;
        if (n - 2 >= 1) {
            add_to(rn, s[static_cast<size_t>(n - 2)], /*shift=*/1);
            for (int a = 1; a <= n - 3; ++a)
                add_conv(rn, r[static_cast<size_t>(a)], s[static_cast<size_t>(n - 2 - a)], 1);
        }
        r[static_cast<size_t>(n)] = std::move(rn);
        Poly sn;
        if (n == 1 || n == 2) add_to(sn, Poly{Int(1)});
        if (n - 1 >= 1) add_to(sn, r[static_cast<size_t>(n - 1)]);
        if (n - 2 >= 1) add_to(sn, r[static_cast<size_t>(n - 2)]);
        if (n - 2 >= 1) add_to(sn, s[static_cast<size_t>(n - 2)], 1);
        for (int a = 1; a <= n - 3; ++a)
            add_conv(sn, s[static_cast<size_t>(a)], s[static_cast<size_t>(n - 2 - a)], 1);
        s[static_cast<size_t>(n)] = std::move(sn);
    }
    return s;
}

// Shared machinery of the two dangle grammars. Totals only.
//
// S  = z + zS + (1+S)(1+z)^2 B
// M1 = z M1 + (1+z)^2 B
// M  = (1 + U + M) M1
// UnafoldDangle:  B = z^2 (W + (1+U)^2 B + (1+z)^2 M M1)
// ExternalDangle: B = z^2 (W + (1+D)^2 B + M M1), D = {5, U5, U}, D[m] = 2
// W[m] = 1 for m >= theta (hairpin interiors are plain unpaired runs).
struct DangleDp {
    std::vector<Int> s, b, m, m1;
};

DangleDp dangle_dp(Grammar g, int n_max, int theta) {
    DangleDp dp;
    dp.s.assign(n_max + 1, Int(0));
    dp.b.assign(n_max + 1, Int(0));
    dp.m.assign(n_max + 1, Int(0));
    dp.m1.assign(n_max + 1, Int(0));
    auto w = [theta](int k) { return k >= theta ? 1 : 0; };
    auto u = [](int k) { return k >= 1 ? 1 : 0; };
    auto d = [](int k) { return k >= 1 ? 2 : 0; };
    auto one_plus_z_sq = [&](const std::vector<Int>& x, int k) {
        Int v = 0;
        if (k >= 0) v += x[k];
        if (k >= 1) v += 2 * x[k - 1];
        if (k >= 2) v += x[k - 2];
        return v;
    };
    for (int n = 1; n <= n_max; ++n) {
        Int bn = 0;
        int k = n - 2;
        if (k >= 0) {
            bn += w(k);
            if (g == Grammar::UnafoldDangle) {
                // (1+U)^2 B = B + 2 U B + U U B
                bn += dp.b[k];
                for (int a = 1; a <= k - 1; ++a) {
                    bn += 2 * u(a) * dp.b[k - a];
                    bn += Int(std::max(0, a - 1)) * dp.b[k - a];
                }
                for (int a = 1; a <= k - 1; ++a)
                    bn += dp.m[a] * one_plus_z_sq(dp.m1, k - a);
            } else {
                // (1+D)^2 B = B + 2 D B + D D B; D*D at weight a has a-1
                // splits, each factor contributing 2 choices.
                bn += dp.b[k];
                for (int a = 1; a <= k - 1; ++a) {
                    bn += 2 * d(a) * dp.b[k - a];
                    bn += Int(4) * Int(std::max(0, a - 1)) * dp.b[k - a];
                }
                for (int a = 1; a <= k - 1; ++a) bn += dp.m[a] * dp.m1[k - a];
            }
        }
        dp.b[n] = bn;
        Int m1n = dp.m1[n - 1] + one_plus_z_sq(dp.b, n);
        dp.m1[n] = m1n;
        Int mn = dp.m1[n];
        for (int a = 1; a <= n - 1; ++a) mn += u(a) * dp.m1[n - a];
        for (int a = 1; a <= n - 1; ++a) mn += dp.m[a] * dp.m1[n - a];
        dp.m[n] = mn;
        Int sn = n == 1 ? 1 : 0;
        sn += dp.s[n - 1];
        sn += one_plus_z_sq(dp.b, n);
        for (int a = 1; a <= n - 1; ++a) sn += dp.s[a] * one_plus_z_sq(dp.b, n - a);
        dp.s[n] = sn;
    }
    return dp;
}

void require_theta(Grammar g, int theta, int expected) {
    if (theta != expected)
        throw std::invalid_argument("grammar does not support this theta");
    (void)g;
}

}  // namespace

std::vector<Int> grammar_total(Grammar g, int n_max, int theta) {
    if (theta < 0 || n_max < 0) throw std::invalid_argument("grammar_total: bad arguments");
    switch (g) {
        case Grammar::Nussinov: {
            auto dp = nussinov_dp(n_max, theta);
            std::vector<Int> out(n_max + 1, Int(0));
            for (int n = 0; n <= n_max; ++n) out[n] = poly_total(dp[n]);
            return out;
        }
        case Grammar::BaseStacking: {
            auto dp = stacking_dp(n_max, theta);
            std::vector<Int> out(n_max + 1, Int(0));
            for (int n = 0; n <= n_max; ++n) {
                Int t = 0;
                for (const auto& row : dp.s[n]) t += poly_total(row);
                out[n] = t;
            }
            return out;
        }
        case Grammar::McCaskill:
            require_theta(g, theta, 1);
            return mccaskill_dp(n_max);
        case Grammar::SaturatedZuker: {
            require_theta(g, theta, 1);
            auto dp = saturated_dp(n_max);
            std::vector<Int> out(n_max + 1, Int(0));
            for (int n = 0; n <= n_max; ++n) out[n] = poly_total(dp[n]);
            return out;
        }
        case Grammar::UnafoldDangle:
        case Grammar::ExternalDangle:
            return dangle_dp(g, n_max, theta).s;
    }
    throw std::logic_error("grammar_total: bad grammar");
}

Int grammar_count(Grammar g, int n, int theta) { return grammar_total(g, n, theta).at(n); }

std::vector<std::vector<Int>> grammar_marked(Grammar g, int n_max, int theta) {
    switch (g) {
        case Grammar::Nussinov:
            return nussinov_dp(n_max, theta);
        case Grammar::BaseStacking: {
            auto dp = stacking_dp(n_max, theta);
            // marginalize pairs, keep stacked counts
            std::vector<std::vector<Int>> out(n_max + 1);
            for (int n = 0; n <= n_max; ++n) {
                Poly acc;
                for (const auto& row : dp.s[n]) add_to(acc, row);
                out[n] = std::move(acc);
            }
            return out;
        }
        case Grammar::SaturatedZuker:
            require_theta(g, theta, 1);
            return saturated_dp(n_max);
        default:
            throw std::invalid_argument("grammar_marked: grammar has no single mark");
    }
}

std::vector<std::vector<std::vector<Int>>> stacking_joint(int n_max, int theta) {
    auto dp = stacking_dp(n_max, theta);
    std::vector<std::vector<std::vector<Int>>> out(n_max + 1);
    for (int n = 0; n <= n_max; ++n) out[n] = dp.s[n];
    return out;
}

GrammarSystem build_grammar_system(Grammar g, int seed_order, int theta) {
    if (g != Grammar::UnafoldDangle && g != Grammar::ExternalDangle)
        throw std::invalid_argument("build_grammar_system: dangle grammars only");
    ExprPtr t = Expr::variable("t");
    ExprPtr one = Expr::constant(1);
    ExprPtr two = Expr::constant(2);
    ExprPtr z2 = t * t;
    ExprPtr opz2 = (one + t) * (one + t);
    ExprPtr U = t / (one - t);
    ExprPtr W = expr_pow(t, theta) / (one - t);
    ExprPtr B = Expr::variable("B"), M = Expr::variable("M"), M1 = Expr::variable("M1");

    GrammarSystem sys;
    sys.unknowns = {"B", "M", "M1"};
    ExprPtr b_eq;
    if (g == Grammar::UnafoldDangle) {
        ExprPtr opu = one + U;
        b_eq = z2 * (W + opu * opu * B + opz2 * M * M1);
    } else {
        ExprPtr opd = one + two * U;  // D has weight 2 per positive length
        b_eq = z2 * (W + opd * opd * B + M * M1);
    }
    ExprPtr m_eq = (one + U + M) * M1;
    ExprPtr m1_eq = t * M1 + opz2 * B;
    sys.equations = {b_eq, m_eq, m1_eq};

    // Eliminated one-unknown form: M1 = (1+z)^2 y / (1-z), M = (1+U) M1/(1-M1).
    ExprPtr y = Expr::variable("y");
    ExprPtr m1y = opz2 * y / (one - t);
    ExprPtr mm1y = (one + U) * m1y * m1y / (one - m1y);
    if (g == Grammar::UnafoldDangle) {
        ExprPtr opu = one + U;
        sys.phi_core = z2 * (W + opu * opu * y + opz2 * mm1y);
    } else {
        ExprPtr opd = one + two * U;
        sys.phi_core = z2 * (W + opd * opd * y + mm1y);
    }
    // S = (z + (1+z)^2 y) / (1 - z - (1+z)^2 y)
    sys.psi_total = (t + opz2 * y) / (one - t - opz2 * y);

    DangleDp dp = dangle_dp(g, seed_order, theta);
    sys.component_counts = {dp.b, dp.m, dp.m1};
    sys.total_counts = dp.s;
    return sys;
}

}  // namespace rnacomb::models
