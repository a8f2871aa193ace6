#pragma once

#include "rnacomb/rational.hpp"

#include <array>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

namespace rnacomb {

// Multivariate power series with exact rational coefficients, truncated
// independently in each variable. Dense storage; at most three variables.
// Arithmetic never reads beyond the truncation caps and results carry the
// per-variable minimum of the operand caps.
class TruncatedSeries {
public:
    static constexpr int kMaxVars = 3;

    TruncatedSeries() = default;
    TruncatedSeries(const std::vector<char>& vars, const std::vector<int>& caps);

    static TruncatedSeries constant(const std::vector<char>& vars,
                                    const std::vector<int>& caps, const Rat& value);
    static TruncatedSeries variable(const std::vector<char>& vars,
                                    const std::vector<int>& caps, char name);

    int num_vars() const { return nvars_; }
    char var(int i) const { return vars_[i]; }
    std::vector<char> vars() const { return {vars_.begin(), vars_.begin() + nvars_}; }
    int cap(int i) const { return caps_[i]; }
    std::vector<int> caps() const { return {caps_.begin(), caps_.begin() + nvars_}; }
    int var_index(char name) const;  // -1 when absent

    const Rat& coeff(std::initializer_list<int> exps) const;
    // Convenience for univariate series.
    const Rat& coeff1(int n) const;
    void set_coeff(std::initializer_list<int> exps, const Rat& value);

    bool is_zero() const;
    bool operator==(const TruncatedSeries& o) const;
    bool operator!=(const TruncatedSeries& o) const { return !(*this == o); }

    // Lowest total degree with a nonzero coefficient; caps sum + 1 when zero.
    int valuation() const;

    TruncatedSeries truncated(const std::vector<int>& caps) const;

    TruncatedSeries operator-() const;
    TruncatedSeries& operator+=(const TruncatedSeries& o);
    TruncatedSeries& operator-=(const TruncatedSeries& o);
    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b);
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b);
    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);
    friend TruncatedSeries operator/(const TruncatedSeries& a, const TruncatedSeries& b);

    TruncatedSeries& operator+=(const Rat& v);
    TruncatedSeries& operator-=(const Rat& v);
    TruncatedSeries& operator*=(const Rat& v);
    friend TruncatedSeries operator*(const Rat& v, const TruncatedSeries& a);
    friend TruncatedSeries operator+(const TruncatedSeries& a, const Rat& v);
    friend TruncatedSeries operator-(const TruncatedSeries& a, const Rat& v);

    // Requires a nonzero constant term.
    TruncatedSeries reciprocal() const;
    TruncatedSeries pow(long e) const;

    // Replaces one variable by a series over the result variable set. The
    // series is treated as a polynomial of degree cap in `name` (Horner).
    // Remaining variables must all be present in the replacement's set.
    TruncatedSeries substitute(char name, const TruncatedSeries& replacement) const;

    // Sequential substitution; later bindings must not reintroduce an
    // already-substituted variable.
    TruncatedSeries substitute(const std::map<char, TruncatedSeries>& bindings) const;

    // CSV dump: header "e_<v1>[,e_<v2>...],num,den", one row per nonzero
    // coefficient in lexicographic exponent order.
    std::string to_csv() const;

    // Kernel selection for the convolution. Parallel uses OpenMP when built
    // with it; the serial kernel is the reference.
    static void set_parallel(bool on);
    static bool parallel_enabled();

private:
    friend struct SeriesTestAccess;
    int nvars_ = 0;
    std::array<char, kMaxVars> vars_{{0, 0, 0}};
    std::array<int, kMaxVars> caps_{{0, 0, 0}};
    std::vector<Rat> c_;

    size_t flat_size() const;
    size_t index(int e0, int e1, int e2) const;
    void require_same_vars(const TruncatedSeries& o) const;
};

namespace series_kernels {

// dims[i] = cap_i + 1, unused trailing dims = 1. out must be zero-filled and
// sized d0*d1*d2. Reference implementation: scatter with zero skipping.
void convolve_serial(const Rat* a, const Rat* b, Rat* out, const std::array<int, 3>& adims,
                     const std::array<int, 3>& bdims, const std::array<int, 3>& odims);

// Gather form parallelized over output coefficients.
void convolve_parallel(const Rat* a, const Rat* b, Rat* out, const std::array<int, 3>& adims,
                       const std::array<int, 3>& bdims, const std::array<int, 3>& odims);

}  // namespace series_kernels

}  // namespace rnacomb
