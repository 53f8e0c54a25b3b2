#include "holo/rat.hpp"

#include <cctype>
#include <ostream>

#include "holo/errors.hpp"

namespace holo {

Rat::Rat(long n, long d) {
    if (d == 0) throw DomainError("rational with zero denominator");
    q_ = mpq_class(n, d);
    q_.canonicalize();
}

Rat::Rat(const mpq_class& q) : q_(q) {
    // mpq_class arithmetic keeps canonical form, but raw mpq input may not.
    q_.canonicalize();
}

Rat Rat::parse(const std::string& text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    const std::string t = text.substr(b, e - b);
    if (t.empty()) throw ParseError("empty rational literal");

    auto is_int = [](const std::string& s) {
        std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (i == s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };

    const auto slash = t.find('/');
    if (slash == std::string::npos) {
        if (!is_int(t)) throw ParseError("bad rational literal: '" + text + "'");
        return Rat(mpq_class(mpz_class(t)));
    }
    const std::string ns = t.substr(0, slash), ds = t.substr(slash + 1);
    if (!is_int(ns) || !is_int(ds))
        throw ParseError("bad rational literal: '" + text + "'");
    mpz_class den(ds);
    if (den == 0) throw DomainError("rational with zero denominator");
    mpq_class q(mpz_class(ns), den);
    q.canonicalize();
    return Rat(q);
}

std::string Rat::str() const {
    return is_integer() ? num_str() : num_str() + "/" + den_str();
}

long Rat::to_long() const {
    if (!is_integer() || !q_.get_num().fits_slong_p())
        throw DomainError("rational " + str() + " is not a machine integer");
    return q_.get_num().get_si();
}

Rat& Rat::operator/=(const Rat& o) {
    if (o.is_zero()) throw DomainError("rational division by zero");
    q_ /= o.q_;
    return *this;
}

Rat Rat::pow(long e) const {
    if (e == 0) return Rat(1);
    if (is_zero()) {
        if (e < 0) throw DomainError("zero to a negative power");
        return Rat(0);
    }
    mpq_class base = q_;
    if (e < 0) {
        base = 1 / base;
        e = -e;
    }
    // base is canonical with positive denominator, so the termwise powers
    // are canonical too.
    mpq_class out;
    mpz_pow_ui(out.get_num().get_mpz_t(), base.get_num().get_mpz_t(),
               static_cast<unsigned long>(e));
    mpz_pow_ui(out.get_den().get_mpz_t(), base.get_den().get_mpz_t(),
               static_cast<unsigned long>(e));
    return Rat(out);
}

std::ostream& operator<<(std::ostream& os, const Rat& r) {
    return os << r.str();
}

Rat factorial(long n) {
    if (n < 0) throw DomainError("factorial of a negative integer");
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
    return Rat(mpq_class(f));
}

Rat binomial(long n, long m) { return binomial(Rat(n), m); }

Rat binomial(const Rat& r, long m) {
    if (m < 0) throw DomainError("binomial with negative lower index");
    Rat out(1);
    for (long i = 0; i < m; ++i)
        out *= (r - Rat(i)) / Rat(i + 1);
    return out;
}

} // namespace holo
