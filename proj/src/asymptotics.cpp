#include "rnacomb/asymptotics.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/fpclassify.hpp>

#include <algorithm>
#include <cmath>

namespace rnacomb::asymptotics {

Real real_from_rational(const Rat& q) {
    return Real(q.get_num().get_str()) / Real(q.get_den().get_str());
}

namespace {

bool finite_real(const Real& x) { return boost::math::isfinite(x); }

EvalEnv<Real> make_env() {
    EvalEnv<Real> env;
    env.make_const = [](const Rat& q) { return real_from_rational(q); };
    return env;
}

Real eval_real(const ExprPtr& e, const EvalEnv<Real>& env) { return evaluate(e, env); }

bool eval_domain_exprs(const std::vector<ExprPtr>& denoms, EvalEnv<Real>& env) {
    for (const ExprPtr& d : denoms) {
        if (eval_real(d, env) <= 0) return false;
    }
    return true;
}

constexpr int kInnerIterations = 600;
constexpr int kBisectionSteps = 48;
constexpr int kNewtonSteps = 120;

}  // namespace

DomainCheck denominator_domain(const std::vector<ExprPtr>& exprs,
                               const std::vector<std::string>& ynames) {
    auto denoms = std::make_shared<std::vector<ExprPtr>>();
    for (const ExprPtr& e : exprs) collect_denominators(e, *denoms);
    std::vector<std::string> names = ynames;
    return [denoms, names](const Real& t, const std::vector<Real>& ys) {
        if (!finite_real(t) || t <= 0 || t >= 1) return false;
        for (const Real& y : ys)
            if (!finite_real(y) || y < 0) return false;
        EvalEnv<Real> env = make_env();
        env.vars["t"] = t;
        for (size_t i = 0; i < names.size() && i < ys.size(); ++i) env.vars[names[i]] = ys[i];
        return eval_domain_exprs(*denoms, env);
    };
}

namespace {

// Kleene iteration y <- Phi(t, y) from 0. For positive systems this climbs
// to the minimal solution when t is below the branch point and escapes the
// domain (or fails to settle) above it.
struct IterationResult {
    bool converged = false;
    std::vector<Real> y;
};

IterationResult iterate_system(const std::vector<ExprPtr>& phis,
                               const std::vector<std::string>& ynames, const DomainCheck& domain,
                               const Real& t, const Real& tol,
                               const std::vector<Real>* warm = nullptr) {
    IterationResult res;
    if (warm)
        res.y = *warm;
    else
        res.y.assign(phis.size(), Real(0));
    EvalEnv<Real> env = make_env();
    env.vars["t"] = t;
    for (int it = 0; it < kInnerIterations; ++it) {
        for (size_t i = 0; i < phis.size(); ++i) env.vars[ynames[i]] = res.y[i];
        if (!domain(t, res.y)) return res;
        std::vector<Real> next(phis.size());
        Real delta = 0;
        for (size_t i = 0; i < phis.size(); ++i) {
            next[i] = eval_real(phis[i], env);
            if (!finite_real(next[i])) return res;
            delta = std::max(delta, Real(abs(next[i] - res.y[i])));
            // A fixed point far above the warm start belongs to another
            // branch of the algebraic system, not the counting one.
            if (warm && next[i] > 8 * ((*warm)[i] + 1)) return res;
        }
        res.y = std::move(next);
        if (delta < tol) {
            if (!domain(t, res.y)) return res;
            res.converged = true;
            return res;
        }
    }
    return res;
}

// Dense linear solve with partial pivoting.
bool linear_solve(std::vector<std::vector<Real>>& a, std::vector<Real>& b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
        if (a[piv][col] == 0) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (size_t r = col + 1; r < n; ++r) {
            Real f = a[r][col] / a[col][col];
            if (f == 0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (size_t i = n; i-- > 0;) {
        Real acc = b[i];
        for (size_t c = i + 1; c < n; ++c) acc -= a[i][c] * b[c];
        b[i] = acc / a[i][i];
    }
    return true;
}

Real det_in_place(std::vector<std::vector<Real>> m) {
    const size_t n = m.size();
    Real det = 1;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (abs(m[r][col]) > abs(m[piv][col])) piv = r;
        if (m[piv][col] == 0) return Real(0);
        if (piv != col) {
            std::swap(m[piv], m[col]);
            det = -det;
        }
        det *= m[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            Real f = m[r][col] / m[col][col];
            for (size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return det;
}

// Adjugate via cofactors; the systems here have at most a handful of
// unknowns.
std::vector<std::vector<Real>> adjugate(const std::vector<std::vector<Real>>& m) {
    const size_t n = m.size();
    std::vector<std::vector<Real>> adj(n, std::vector<Real>(n, Real(0)));
    if (n == 1) {
        adj[0][0] = 1;
        return adj;
    }
    for (size_t r = 0; r < n; ++r)
        for (size_t c = 0; c < n; ++c) {
            std::vector<std::vector<Real>> minor;
            minor.reserve(n - 1);
            for (size_t i = 0; i < n; ++i) {
                if (i == r) continue;
                std::vector<Real> row;
                row.reserve(n - 1);
                for (size_t j = 0; j < n; ++j) {
                    if (j == c) continue;
                    row.push_back(m[i][j]);
                }
                minor.push_back(std::move(row));
            }
            Real cof = det_in_place(std::move(minor));
            if ((r + c) % 2 == 1) cof = -cof;
            adj[c][r] = cof;  // transpose of the cofactor matrix
        }
    return adj;
}

}  // namespace

SystemPoint solve_singularity_system(const std::vector<ExprPtr>& phis,
                                     const std::vector<std::string>& ynames,
                                     const DomainCheck& domain, double t_hint) {
    SystemPoint out;
    const size_t k = phis.size();
    if (k == 0 || ynames.size() != k) {
        out.message = "empty or mismatched system";
        return out;
    }
    const Real tol = Real("1e-24");

    // Warm-started continuation up the minimal solution branch. The Kleene
    // iteration is monotone, so restarting from the solution at a smaller t
    // stays on the counting branch; spurious upper branches (which a cold
    // start can reach past the branch point) trip the jump guard instead.
    Real lo = Real(t_hint) * Real("0.7");
    IterationResult lo_res = iterate_system(phis, ynames, domain, lo, tol);
    int guard = 0;
    while (!lo_res.converged && guard++ < 80) {
        lo *= Real("0.7");
        lo_res = iterate_system(phis, ynames, domain, lo, tol);
    }
    if (!lo_res.converged) {
        out.message = "no convergent point found below the hint";
        return out;
    }
    Real best_t = lo;
    std::vector<Real> best_y = lo_res.y;
    Real hi = 0;
    for (int climb = 0; climb < 200; ++climb) {
        Real t_next = best_t * Real("1.03");
        IterationResult next = iterate_system(phis, ynames, domain, t_next, tol, &best_y);
        if (!next.converged) {
            hi = t_next;
            break;
        }
        best_t = t_next;
        best_y = std::move(next.y);
    }
    if (hi == 0) {
        out.message = "no divergent point found above the hint";
        return out;
    }
    Real lo_b = best_t;
    for (int step = 0; step < kBisectionSteps; ++step) {
        Real mid = (lo_b + hi) / 2;
        IterationResult mid_res = iterate_system(phis, ynames, domain, mid, tol, &best_y);
        if (mid_res.converged) {
            lo_b = mid;
            best_t = mid;
            best_y = std::move(mid_res.y);
        } else {
            hi = mid;
        }
    }

    // Symbolic first and second partials.
    std::vector<std::vector<ExprPtr>> jac(k), d2y(k);
    std::vector<ExprPtr> dt(k);
    std::vector<std::vector<ExprPtr>> d2t(k);
    for (size_t i = 0; i < k; ++i) {
        dt[i] = differentiate(phis[i], "t");
        jac[i].resize(k);
        d2y[i].resize(k * k);
        d2t[i].resize(k);
        for (size_t j = 0; j < k; ++j) {
            jac[i][j] = differentiate(phis[i], ynames[j]);
            d2t[i][j] = differentiate(jac[i][j], "t");
            for (size_t l = 0; l < k; ++l)
                d2y[i][j * k + l] = differentiate(jac[i][j], ynames[l]);
        }
    }

    auto fill_env = [&](EvalEnv<Real>& env, const Real& t, const std::vector<Real>& y) {
        env.vars["t"] = t;
        for (size_t i = 0; i < k; ++i) env.vars[ynames[i]] = y[i];
    };

    // Newton on [y - Phi = 0, det(I - J) = 0] in (t, y_1..y_k).
    Real t = best_t;
    std::vector<Real> y = best_y;
    EvalEnv<Real> env = make_env();
    Real resid = 0;
    bool converged = false;
    for (int it = 0; it < kNewtonSteps; ++it) {
        fill_env(env, t, y);
        std::vector<std::vector<Real>> jnum(k, std::vector<Real>(k));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) jnum[i][j] = eval_real(jac[i][j], env);
        std::vector<std::vector<Real>> m(k, std::vector<Real>(k));
        for (size_t i = 0; i < k; ++i)
            for (size_t j = 0; j < k; ++j) m[i][j] = (i == j ? Real(1) : Real(0)) - jnum[i][j];
        std::vector<Real> f(k + 1);
        resid = 0;
        for (size_t i = 0; i < k; ++i) f[i] = eval_real(phis[i], env) - y[i];
        f[k] = det_in_place(m);
        bool finite = finite_real(t);
        for (size_t i = 0; i <= k; ++i) finite = finite && finite_real(f[i]);
        for (size_t i = 0; i < k; ++i) finite = finite && finite_real(y[i]);
        if (!finite) {
            out.message = "Newton produced non-finite values";
            return out;
        }
        for (size_t i = 0; i <= k; ++i) resid = std::max(resid, Real(abs(f[i])));
        if (resid < Real("1e-42")) {
            converged = true;
            break;
        }
        auto adj = adjugate(m);
        // Jacobian of the Newton system.
        std::vector<std::vector<Real>> big(k + 1, std::vector<Real>(k + 1));
        for (size_t i = 0; i < k; ++i) {
            big[i][0] = eval_real(dt[i], env);
            for (size_t j = 0; j < k; ++j)
                big[i][j + 1] = jnum[i][j] - (i == j ? Real(1) : Real(0));
        }
        // d det(I-J)/dalpha = sum_{a,b} adj[a][b] * (-d2 Phi_b / dy_a dalpha)
        Real ddet_t = 0;
        for (size_t a = 0; a < k; ++a)
            for (size_t b = 0; b < k; ++b) ddet_t -= adj[a][b] * eval_real(d2t[b][a], env);
        big[k][0] = ddet_t;
        for (size_t l = 0; l < k; ++l) {
            Real ddet = 0;
            for (size_t a = 0; a < k; ++a)
                for (size_t b = 0; b < k; ++b)
                    ddet -= adj[a][b] * eval_real(d2y[b][a * k + l], env);
            big[k][l + 1] = ddet;
        }
        std::vector<Real> rhs(k + 1);
        for (size_t i = 0; i <= k; ++i) rhs[i] = -f[i];
        if (!linear_solve(big, rhs)) {
            out.message = "singular Jacobian in the Newton system";
            return out;
        }
        // Damped update staying inside the domain.
        Real scale = 1;
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            Real tn = t + scale * rhs[0];
            std::vector<Real> yn(k);
            for (size_t i = 0; i < k; ++i) yn[i] = y[i] + scale * rhs[i + 1];
            if (domain(tn, yn)) {
                t = tn;
                y = std::move(yn);
                moved = true;
                break;
            }
            scale /= 2;
        }
        if (!moved) {
            out.status = SolveStatus::OutsideDomain;
            out.message = "Newton step cannot stay inside the convergence domain";
            return out;
        }
    }
    if (!converged) {
        out.message = "Newton did not reach the residual target";
        return out;
    }
    if (!domain(t, y)) {
        out.status = SolveStatus::OutsideDomain;
        out.message = "solution left the convergence domain";
        return out;
    }
    if (abs(t - Real(t_hint)) > Real("0.25") * Real(t_hint)) {
        out.message = "solution is far from the coefficient-ratio seed; suspected wrong branch";
        return out;
    }
    out.status = SolveStatus::Ok;
    out.t0 = t;
    out.y0 = y;
    out.gamma = Real(1) / t;
    out.residual = resid;
    return out;
}

SingularPoint solve_singularity(const ExprPtr& phi, const DomainCheck& domain, double t_hint) {
    SystemPoint sp = solve_singularity_system({phi}, {"y"}, domain, t_hint);
    SingularPoint out;
    out.status = sp.status;
    out.message = sp.message;
    if (sp.ok()) {
        out.t0 = sp.t0;
        out.y0 = sp.y0[0];
        out.gamma = sp.gamma;
        out.residual = sp.residual;
    }
    return out;
}

Amplitudes amplitude(const ExprPtr& phi, const ExprPtr& psi, const Real& t0, const Real& y0) {
    EvalEnv<Real> env = make_env();
    env.vars["t"] = t0;
    env.vars["y"] = y0;
    ExprPtr phi_t = differentiate(phi, "t");
    ExprPtr phi_y = differentiate(phi, "y");
    ExprPtr phi_yy = differentiate(phi_y, "y");
    Real pt = eval_real(phi_t, env);
    Real pyy = eval_real(phi_yy, env);
    if (pyy <= 0)
        throw std::domain_error("amplitude: Phi_yy is not positive at the singular point");
    if (pt <= 0) throw std::domain_error("amplitude: Phi_t is not positive at the singular point");
    Amplitudes a;
    a.c = sqrt(t0 * pt / (2 * boost::math::constants::pi<Real>() * pyy));
    a.d = a.c * eval_real(differentiate(psi, "y"), env);
    return a;
}

LimitLaw limit_law(const ExprPtr& phi_marked, const DomainCheck& domain, double t_hint,
                   const Rat& h) {
    LimitLaw law;
    if (h <= 0) {
        law.message = "step must be positive";
        return law;
    }
    // rho(u) at u in {1-2h, 1-h, 1, 1+h, 1+2h}; Richardson from steps 2h, h.
    std::vector<Rat> us = {Rat(1) - 2 * h, Rat(1) - h, Rat(1), Rat(1) + h, Rat(1) + 2 * h};
    std::vector<Real> rho(us.size());
    double hint = t_hint;
    for (size_t i = 0; i < us.size(); ++i) {
        ExprPtr phi_u = expr_substitute(phi_marked, "u", Expr::constant(us[i]));
        SingularPoint sp = solve_singularity(phi_u, domain, hint);
        if (!sp.ok()) {
            law.message = "rho(" + rat_string(us[i]) + "): " + sp.message;
            return law;
        }
        rho[i] = sp.t0;
        law.rho_samples.emplace_back(us[i], sp.t0);
        hint = static_cast<double>(sp.t0);
    }
    Real hr = real_from_rational(h);
    Real d1_wide = (rho[3] - rho[1]) / (2 * hr);                   // step h
    Real d1_wider = (rho[4] - rho[0]) / (4 * hr);                  // step 2h
    Real d1 = (4 * d1_wide - d1_wider) / 3;
    Real d2_wide = (rho[3] - 2 * rho[2] + rho[1]) / (hr * hr);     // step h
    Real d2_wider = (rho[4] - 2 * rho[2] + rho[0]) / (4 * hr * hr);  // step 2h
    Real d2 = (4 * d2_wide - d2_wider) / 3;
    Real r = rho[2];
    Real ratio = d1 / r;
    law.mu = -ratio;
    law.sigma2 = -d2 / r - ratio + ratio * ratio;
    law.stability = abs((-d1_wide / r) - law.mu);
    if (law.sigma2 <= 0) {
        law.message = "sigma^2 is not positive; reporting unclamped value";
        law.ok = false;
        return law;
    }
    law.ok = true;
    return law;
}

RatioDiagnostic ratio_diagnostic(const std::vector<Rat>& coeffs, int n, double gamma) {
    if (n < 1 || n >= static_cast<int>(coeffs.size()))
        throw std::invalid_argument("ratio_diagnostic: order not available");
    const Rat& an = coeffs[static_cast<size_t>(n)];
    const Rat& prev = coeffs[static_cast<size_t>(n) - 1];
    if (an == 0 || prev == 0) throw std::domain_error("ratio_diagnostic: zero coefficient");
    RatioDiagnostic d;
    d.gamma_estimate = std::exp(rat_log(an) - rat_log(prev));
    d.c_estimate = std::exp(rat_log(an) + 1.5 * std::log(static_cast<double>(n)) -
                            static_cast<double>(n) * std::log(gamma));
    return d;
}

double ratio_hint(const std::vector<Rat>& coeffs) {
    size_t n = coeffs.size();
    while (n > 1 && coeffs[n - 1] == 0) --n;
    if (n < 2 || coeffs[n - 2] == 0)
        throw std::domain_error("ratio_hint: need two trailing nonzero coefficients");
    return std::exp(rat_log(coeffs[n - 2]) - rat_log(coeffs[n - 1]));
}

}  // namespace rnacomb::asymptotics
