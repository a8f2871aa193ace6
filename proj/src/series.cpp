#include "rnacomb/series.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rnacomb {

namespace {
std::atomic<bool> g_parallel{true};
const Rat kZero(0);
}  // namespace

void TruncatedSeries::set_parallel(bool on) { g_parallel.store(on); }
bool TruncatedSeries::parallel_enabled() { return g_parallel.load(); }

TruncatedSeries::TruncatedSeries(const std::vector<char>& vars, const std::vector<int>& caps) {
    if (vars.size() != caps.size() || vars.empty() || vars.size() > kMaxVars)
        throw std::invalid_argument("series: need 1..3 variables with matching caps");
    nvars_ = static_cast<int>(vars.size());
    for (int i = 0; i < nvars_; ++i) {
        if (caps[i] < 0) throw std::invalid_argument("series: negative truncation cap");
        vars_[i] = vars[i];
        caps_[i] = caps[i];
        for (int j = 0; j < i; ++j)
            if (vars_[j] == vars_[i]) throw std::invalid_argument("series: duplicate variable");
    }
    c_.assign(flat_size(), Rat(0));
}

TruncatedSeries TruncatedSeries::constant(const std::vector<char>& vars,
                                          const std::vector<int>& caps, const Rat& value) {
    TruncatedSeries s(vars, caps);
    s.c_[0] = value;
    return s;
}

TruncatedSeries TruncatedSeries::variable(const std::vector<char>& vars,
                                          const std::vector<int>& caps, char name) {
    TruncatedSeries s(vars, caps);
    int idx = s.var_index(name);
    if (idx < 0) throw std::invalid_argument(std::string("series: unknown variable ") + name);
    if (s.caps_[idx] >= 1) {
        int e[3] = {0, 0, 0};
        e[idx] = 1;
        s.c_[s.index(e[0], e[1], e[2])] = 1;
    }
    return s;
}

int TruncatedSeries::var_index(char name) const {
    for (int i = 0; i < nvars_; ++i)
        if (vars_[i] == name) return i;
    return -1;
}

size_t TruncatedSeries::flat_size() const {
    size_t s = 1;
    for (int i = 0; i < nvars_; ++i) s *= static_cast<size_t>(caps_[i] + 1);
    return s;
}

size_t TruncatedSeries::index(int e0, int e1, int e2) const {
    size_t idx = static_cast<size_t>(e0);
    if (nvars_ > 1) idx = idx * (caps_[1] + 1) + e1;
    if (nvars_ > 2) idx = idx * (caps_[2] + 1) + e2;
    return idx;
}

const Rat& TruncatedSeries::coeff(std::initializer_list<int> exps) const {
    if (static_cast<int>(exps.size()) != nvars_)
        throw std::invalid_argument("series: exponent arity mismatch");
    int e[3] = {0, 0, 0};
    int i = 0;
    for (int v : exps) e[i++] = v;
    for (int j = 0; j < nvars_; ++j) {
        if (e[j] < 0) throw std::invalid_argument("series: negative exponent");
        if (e[j] > caps_[j]) return kZero;
    }
    return c_[index(e[0], e[1], e[2])];
}

const Rat& TruncatedSeries::coeff1(int n) const {
    if (nvars_ != 1) throw std::invalid_argument("coeff1 needs a univariate series");
    if (n < 0 || n > caps_[0]) return kZero;
    return c_[static_cast<size_t>(n)];
}

void TruncatedSeries::set_coeff(std::initializer_list<int> exps, const Rat& value) {
    if (static_cast<int>(exps.size()) != nvars_)
        throw std::invalid_argument("series: exponent arity mismatch");
    int e[3] = {0, 0, 0};
    int i = 0;
    for (int v : exps) e[i++] = v;
    for (int j = 0; j < nvars_; ++j)
        if (e[j] < 0 || e[j] > caps_[j])
            throw std::invalid_argument("series: exponent outside truncation");
    c_[index(e[0], e[1], e[2])] = value;
}

bool TruncatedSeries::is_zero() const {
    for (const Rat& v : c_)
        if (v != 0) return false;
    return true;
}

bool TruncatedSeries::operator==(const TruncatedSeries& o) const {
    if (nvars_ != o.nvars_) return false;
    for (int i = 0; i < nvars_; ++i)
        if (vars_[i] != o.vars_[i] || caps_[i] != o.caps_[i]) return false;
    return c_ == o.c_;
}

int TruncatedSeries::valuation() const {
    int best = caps_[0] + (nvars_ > 1 ? caps_[1] : 0) + (nvars_ > 2 ? caps_[2] : 0) + 1;
    size_t idx = 0;
    for (int e0 = 0; e0 <= caps_[0]; ++e0)
        for (int e1 = 0; e1 <= (nvars_ > 1 ? caps_[1] : 0); ++e1)
            for (int e2 = 0; e2 <= (nvars_ > 2 ? caps_[2] : 0); ++e2, ++idx)
                if (c_[idx] != 0) best = std::min(best, e0 + e1 + e2);
    return best;
}

TruncatedSeries TruncatedSeries::truncated(const std::vector<int>& caps) const {
    if (static_cast<int>(caps.size()) != nvars_)
        throw std::invalid_argument("series: truncation arity mismatch");
    TruncatedSeries out(vars(), caps);
    for (int e0 = 0; e0 <= std::min(caps_[0], out.caps_[0]); ++e0)
        for (int e1 = 0; e1 <= (nvars_ > 1 ? std::min(caps_[1], out.caps_[1]) : 0); ++e1)
            for (int e2 = 0; e2 <= (nvars_ > 2 ? std::min(caps_[2], out.caps_[2]) : 0); ++e2)
                out.c_[out.index(e0, e1, e2)] = c_[index(e0, e1, e2)];
    return out;
}

void TruncatedSeries::require_same_vars(const TruncatedSeries& o) const {
    if (nvars_ != o.nvars_)
        throw std::invalid_argument("series: variable mismatch");
    for (int i = 0; i < nvars_; ++i)
        if (vars_[i] != o.vars_[i]) throw std::invalid_argument("series: variable mismatch");
}

TruncatedSeries TruncatedSeries::operator-() const {
    TruncatedSeries out = *this;
    for (Rat& v : out.c_) v = -v;
    return out;
}

namespace {
std::vector<int> min_caps(const TruncatedSeries& a, const TruncatedSeries& b) {
    std::vector<int> caps;
    for (int i = 0; i < a.num_vars(); ++i) caps.push_back(std::min(a.cap(i), b.cap(i)));
    return caps;
}
}  // namespace

TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.require_same_vars(b);
    TruncatedSeries out = a.truncated(min_caps(a, b));
    TruncatedSeries bt = b.truncated(out.caps());
    for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] += bt.c_[i];
    return out;
}

TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.require_same_vars(b);
    TruncatedSeries out = a.truncated(min_caps(a, b));
    TruncatedSeries bt = b.truncated(out.caps());
    for (size_t i = 0; i < out.c_.size(); ++i) out.c_[i] -= bt.c_[i];
    return out;
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o) {
    *this = *this + o;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o) {
    *this = *this - o;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator+=(const Rat& v) {
    c_[0] += v;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const Rat& v) {
    c_[0] -= v;
    return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(const Rat& v) {
    if (v == 0) {
        for (Rat& x : c_) x = 0;
    } else {
        for (Rat& x : c_)
            if (x != 0) x *= v;
    }
    return *this;
}

TruncatedSeries operator*(const Rat& v, const TruncatedSeries& a) {
    TruncatedSeries out = a;
    out *= v;
    return out;
}

TruncatedSeries operator+(const TruncatedSeries& a, const Rat& v) {
    TruncatedSeries out = a;
    out += v;
    return out;
}

TruncatedSeries operator-(const TruncatedSeries& a, const Rat& v) {
    TruncatedSeries out = a;
    out -= v;
    return out;
}

namespace series_kernels {

void convolve_serial(const Rat* a, const Rat* b, Rat* out, const std::array<int, 3>& adims,
                     const std::array<int, 3>& bdims, const std::array<int, 3>& odims) {
    Rat prod;
    for (int i0 = 0; i0 < adims[0] && i0 < odims[0]; ++i0)
        for (int i1 = 0; i1 < adims[1] && i1 < odims[1]; ++i1)
            for (int i2 = 0; i2 < adims[2] && i2 < odims[2]; ++i2) {
                const Rat& av = a[(static_cast<size_t>(i0) * adims[1] + i1) * adims[2] + i2];
                if (av == 0) continue;
                int j0max = std::min(bdims[0], odims[0] - i0);
                int j1max = std::min(bdims[1], odims[1] - i1);
                int j2max = std::min(bdims[2], odims[2] - i2);
                for (int j0 = 0; j0 < j0max; ++j0)
                    for (int j1 = 0; j1 < j1max; ++j1)
                        for (int j2 = 0; j2 < j2max; ++j2) {
                            const Rat& bv =
                                b[(static_cast<size_t>(j0) * bdims[1] + j1) * bdims[2] + j2];
                            if (bv == 0) continue;
                            prod = av * bv;
                            out[(static_cast<size_t>(i0 + j0) * odims[1] + (i1 + j1)) * odims[2] +
                                (i2 + j2)] += prod;
                        }
            }
}

void convolve_parallel(const Rat* a, const Rat* b, Rat* out, const std::array<int, 3>& adims,
                       const std::array<int, 3>& bdims, const std::array<int, 3>& odims) {
    const long total = static_cast<long>(odims[0]) * odims[1] * odims[2];
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (long flat = 0; flat < total; ++flat) {
        int k2 = static_cast<int>(flat % odims[2]);
        int rest = static_cast<int>(flat / odims[2]);
        int k1 = rest % odims[1];
        int k0 = rest / odims[1];
        Rat acc(0);
        Rat prod;
        int i0lo = std::max(0, k0 - (bdims[0] - 1));
        int i0hi = std::min(k0, adims[0] - 1);
        int i1lo = std::max(0, k1 - (bdims[1] - 1));
        int i1hi = std::min(k1, adims[1] - 1);
        int i2lo = std::max(0, k2 - (bdims[2] - 1));
        int i2hi = std::min(k2, adims[2] - 1);
        for (int i0 = i0lo; i0 <= i0hi; ++i0)
            for (int i1 = i1lo; i1 <= i1hi; ++i1)
                for (int i2 = i2lo; i2 <= i2hi; ++i2) {
                    const Rat& av = a[(static_cast<size_t>(i0) * adims[1] + i1) * adims[2] + i2];
                    if (av == 0) continue;
                    const Rat& bv = b[(static_cast<size_t>(k0 - i0) * bdims[1] + (k1 - i1)) *
                                          bdims[2] +
                                      (k2 - i2)];
                    if (bv == 0) continue;
                    prod = av * bv;
                    acc += prod;
                }
        out[static_cast<size_t>(flat)] = std::move(acc);
    }
}

}  // namespace series_kernels

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
    a.require_same_vars(b);
    TruncatedSeries out(a.vars(), min_caps(a, b));
    std::array<int, 3> adims{1, 1, 1}, bdims{1, 1, 1}, odims{1, 1, 1};
    for (int i = 0; i < a.nvars_; ++i) {
        adims[i] = a.caps_[i] + 1;
        bdims[i] = b.caps_[i] + 1;
        odims[i] = out.caps_[i] + 1;
    }
    size_t work = static_cast<size_t>(odims[0]) * odims[1] * odims[2];
    if (TruncatedSeries::parallel_enabled() && work >= 4096) {
        series_kernels::convolve_parallel(a.c_.data(), b.c_.data(), out.c_.data(), adims, bdims,
                                          odims);
    } else {
        series_kernels::convolve_serial(a.c_.data(), b.c_.data(), out.c_.data(), adims, bdims,
                                        odims);
    }
    return out;
}

TruncatedSeries TruncatedSeries::reciprocal() const {
    if (c_[0] == 0) throw std::domain_error("series reciprocal: zero constant term");
    // Newton iteration r <- r + r*(1 - a*r), caps doubling per round. With
    // box truncation in several variables a single step per level is not
    // enough (cross terms re-enter the grown box), so refine at each level
    // until the residual vanishes; total-degree valuation doubles per step.
    std::vector<int> full = caps();
    std::vector<int> cur(full.size(), 0);
    TruncatedSeries r = TruncatedSeries::constant(vars(), cur, Rat(1) / c_[0]);
    for (;;) {
        bool at_full = true;
        for (size_t i = 0; i < cur.size(); ++i) {
            cur[i] = std::min(full[i], cur[i] == 0 ? 1 : cur[i] * 2);
            if (cur[i] < full[i]) at_full = false;
        }
        TruncatedSeries at = truncated(cur);
        r = r.truncated(cur);
        for (int step = 0; step < 64; ++step) {
            TruncatedSeries err = TruncatedSeries::constant(vars(), cur, Rat(1)) - at * r;
            if (err.is_zero()) break;
            r = r + r * err;
        }
        if (at_full) break;
    }
    return r;
}

TruncatedSeries operator/(const TruncatedSeries& a, const TruncatedSeries& b) {
    return a * b.reciprocal();
}

TruncatedSeries TruncatedSeries::pow(long e) const {
    if (e < 0) return reciprocal().pow(-e);
    TruncatedSeries acc = TruncatedSeries::constant(vars(), caps(), Rat(1));
    TruncatedSeries base = *this;
    unsigned long k = static_cast<unsigned long>(e);
    while (k > 0) {
        if (k & 1) acc = acc * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return acc;
}

TruncatedSeries TruncatedSeries::substitute(char name, const TruncatedSeries& replacement) const {
    int pos = var_index(name);
    if (pos < 0) throw std::invalid_argument("substitute: unknown variable");
    for (int i = 0; i < nvars_; ++i) {
        if (i == pos) continue;
        if (replacement.var_index(vars_[i]) < 0)
            throw std::invalid_argument("substitute: result variables must cover the remainder");
    }
    // Horner in the substituted variable. The series is treated as a
    // polynomial of degree cap in that variable, so the composition is
    // exact polynomial evaluation followed by truncation.
    int deg = caps_[pos];
    TruncatedSeries result(replacement.vars(), replacement.caps());
    for (int k = deg; k >= 0; --k) {
        TruncatedSeries slice(replacement.vars(), replacement.caps());
        // Copy the coefficient of name^k, a series in the remaining variables.
        for (int e0 = 0; e0 <= caps_[0]; ++e0)
            for (int e1 = 0; e1 <= (nvars_ > 1 ? caps_[1] : 0); ++e1)
                for (int e2 = 0; e2 <= (nvars_ > 2 ? caps_[2] : 0); ++e2) {
                    int e[3] = {e0, e1, e2};
                    if (e[pos] != k) continue;
                    const Rat& v = c_[index(e0, e1, e2)];
                    if (v == 0) continue;
                    int out_e[3] = {0, 0, 0};
                    bool fits = true;
                    for (int i = 0; i < nvars_; ++i) {
                        if (i == pos) continue;
                        int ri = replacement.var_index(vars_[i]);
                        out_e[ri] = e[i];
                        if (e[i] > replacement.caps_[ri]) fits = false;
                    }
                    if (!fits) continue;
                    slice.c_[slice.index(out_e[0], out_e[1], out_e[2])] = v;
                }
        if (k == deg)
            result = slice;
        else
            result = result * replacement + slice;
    }
    return result;
}

TruncatedSeries TruncatedSeries::substitute(
    const std::map<char, TruncatedSeries>& bindings) const {
    TruncatedSeries out = *this;
    for (const auto& [name, replacement] : bindings) out = out.substitute(name, replacement);
    return out;
}

std::string TruncatedSeries::to_csv() const {
    std::ostringstream os;
    for (int i = 0; i < nvars_; ++i) os << "e_" << vars_[i] << ",";
    os << "num,den\n";
    size_t idx = 0;
    for (int e0 = 0; e0 <= caps_[0]; ++e0)
        for (int e1 = 0; e1 <= (nvars_ > 1 ? caps_[1] : 0); ++e1)
            for (int e2 = 0; e2 <= (nvars_ > 2 ? caps_[2] : 0); ++e2, ++idx) {
                const Rat& v = c_[idx];
                if (v == 0) continue;
                os << e0;
                if (nvars_ > 1) os << "," << e1;
                if (nvars_ > 2) os << "," << e2;
                os << "," << v.get_num().get_str() << "," << v.get_den().get_str() << "\n";
            }
    return os.str();
}

}  // namespace rnacomb
