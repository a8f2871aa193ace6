#pragma once

#include "rnacomb/expr.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <functional>
#include <string>
#include <vector>

namespace rnacomb::asymptotics {

// All root finding runs at 50 significant digits; results are reported as
// doubles alongside the attained residual.
using Real = boost::multiprecision::cpp_bin_float_50;

Real real_from_rational(const Rat& q);

enum class SolveStatus { Ok, Diverged, OutsideDomain };

struct SingularPoint {
    SolveStatus status = SolveStatus::Diverged;
    std::string message;
    Real t0 = 0;
    Real y0 = 0;
    Real gamma = 0;
    Real residual = 0;
    bool ok() const { return status == SolveStatus::Ok; }
};

using DomainCheck = std::function<bool(const Real& t, const std::vector<Real>& ys)>;

// Positivity of every denominator appearing in the given expressions, the
// usual description of the convergence domain of these systems.
DomainCheck denominator_domain(const std::vector<ExprPtr>& exprs,
                               const std::vector<std::string>& ynames);

// Solves y = Phi(t,y), Phi_y(t,y) = 1 inside the domain. The hint is an
// estimate of t0 (typically a coefficient ratio); bisection along the
// solution curve brackets t0, then damped Newton polishes.
SingularPoint solve_singularity(const ExprPtr& phi, const DomainCheck& domain, double t_hint);

struct Amplitudes {
    Real c = 0;  // amplitude of the adjoint series
    Real d = 0;  // amplitude of Psi(t, a(t))
};

// c = sqrt(t0 Phi_t / (2 pi Phi_yy)), d = c Psi_y, all at (t0, y0).
// Throws when Phi_yy <= 0 at the point.
Amplitudes amplitude(const ExprPtr& phi, const ExprPtr& psi, const Real& t0, const Real& y0);

struct SystemPoint {
    SolveStatus status = SolveStatus::Diverged;
    std::string message;
    Real t0 = 0;
    std::vector<Real> y0;
    Real gamma = 0;
    Real residual = 0;
    bool ok() const { return status == SolveStatus::Ok; }
};

// Characteristic system of an irreducible positive algebraic system:
// y_i = Phi_i(t, y), det(I - Jacobian) = 0. Newton in k+1 unknowns; the
// one-equation case reduces to solve_singularity.
SystemPoint solve_singularity_system(const std::vector<ExprPtr>& phis,
                                     const std::vector<std::string>& ynames,
                                     const DomainCheck& domain, double t_hint);

struct LimitLaw {
    bool ok = false;
    std::string message;
    Real mu = 0;
    Real sigma2 = 0;
    std::vector<std::pair<Rat, Real>> rho_samples;  // (u, rho(u))
    Real stability = 0;  // |step-halved estimate - plain estimate| for mu
};

// Gaussian limit-law parameters from rho(u), the singular t of the u-marked
// system, via central differences with Richardson extrapolation at u = 1.
LimitLaw limit_law(const ExprPtr& phi_marked, const DomainCheck& domain, double t_hint,
                   const Rat& h = Rat(1, 1000));

struct RatioDiagnostic {
    double gamma_estimate = 0;
    double c_estimate = 0;
};

// gamma ~ a_n/a_{n-1}; c ~ a_n n^{3/2} / gamma^n with the solver's gamma.
RatioDiagnostic ratio_diagnostic(const std::vector<Rat>& coeffs, int n, double gamma);

double ratio_hint(const std::vector<Rat>& coeffs);  // a_{n-1}/a_n at the top

}  // namespace rnacomb::asymptotics
