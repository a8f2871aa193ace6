#include "rnacomb/rational.hpp"

#include <cmath>

namespace rnacomb {

Rat parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto dot = text.find('.');
    if (dot != std::string::npos) {
        std::string digits = text.substr(0, dot) + text.substr(dot + 1);
        size_t frac_len = text.size() - dot - 1;
        if (digits.empty() || digits == "-" || digits == "+")
            throw std::invalid_argument("bad decimal literal: " + text);
        Int num;
        if (mpz_set_str(num.get_mpz_t(), digits.c_str(), 10) != 0)
            throw std::invalid_argument("bad decimal literal: " + text);
        Int den = int_pow(Int(10), static_cast<unsigned long>(frac_len));
        Rat q(num, den);
        q.canonicalize();
        return q;
    }
    Rat q;
    if (mpq_set_str(q.get_mpq_t(), text.c_str(), 10) != 0)
        throw std::invalid_argument("bad rational literal: " + text);
    q.canonicalize();
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
    return q;
}

std::string rat_string(const Rat& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string int_string(const Int& n) { return n.get_str(); }

double rat_double(const Rat& q) { return q.get_d(); }

double int_log(const Int& n) {
    if (n <= 0) throw std::domain_error("log of nonpositive integer");
    signed long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, n.get_mpz_t());
    return std::log(mant) + static_cast<double>(exp2) * M_LN2;
}

double rat_log(const Rat& q) {
    if (q <= 0) throw std::domain_error("log of nonpositive rational");
    return int_log(q.get_num()) - int_log(q.get_den());
}

Rat rat_pow(const Rat& base, long e) {
    if (e == 0) return Rat(1);
    bool neg = e < 0;
    unsigned long k = static_cast<unsigned long>(neg ? -e : e);
    Rat r;
    mpz_pow_ui(r.get_num_mpz_t(), base.get_num().get_mpz_t(), k);
    mpz_pow_ui(r.get_den_mpz_t(), base.get_den().get_mpz_t(), k);
    r.canonicalize();
    if (neg) {
        if (r == 0) throw std::domain_error("negative power of zero");
        r = Rat(1) / r;
    }
    return r;
}

Int int_pow(const Int& base, unsigned long e) {
    Int r;
    mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
    return r;
}

}  // namespace rnacomb
