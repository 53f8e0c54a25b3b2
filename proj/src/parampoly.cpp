#include "holo/parampoly.hpp"

#include <cctype>
#include <ostream>
#include <sstream>

#include "holo/errors.hpp"

namespace holo {

const char* const kSymNames[kNumSyms] = {
    "gamma", "theta", "c", "alpha", "a", "H", "k", "d",
    "c0", "c2", "c3", "c4",
};

bool laurent_allowed(Sym s) {
    switch (s) {
    case Sym::c:
    case Sym::H:
    case Sym::k:
    case Sym::d:
        return true;
    default:
        return false;
    }
}

namespace {

void check_exps(const ExpVec& e) {
    for (int i = 0; i < kNumSyms; ++i)
        if (e[i] < 0 && !laurent_allowed(static_cast<Sym>(i)))
            throw DomainError(std::string("negative power of ") +
                              kSymNames[i]);
}

} // namespace

ParamPoly::ParamPoly(const Rat& constant) {
    if (!constant.is_zero()) terms_.emplace(ExpVec{}, constant);
}

ParamPoly ParamPoly::monomial(const Rat& coef, const ExpVec& exps) {
    ParamPoly p;
    p.add_term(exps, coef);
    return p;
}

ParamPoly ParamPoly::sym(Sym s, int exp) {
    ExpVec e{};
    e[static_cast<int>(s)] = static_cast<int16_t>(exp);
    return monomial(Rat(1), e);
}

Rat ParamPoly::constant_term() const {
    auto it = terms_.find(ExpVec{});
    return it == terms_.end() ? Rat(0) : it->second;
}

bool ParamPoly::is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && terms_.begin()->first == ExpVec{};
}

void ParamPoly::add_term(const ExpVec& exps, const Rat& coef) {
    if (coef.is_zero()) return;
    check_exps(exps);
    auto [it, fresh] = terms_.emplace(exps, coef);
    if (!fresh) {
        it->second += coef;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

ParamPoly ParamPoly::operator-() const {
    ParamPoly out = *this;
    for (auto& [e, c] : out.terms_) c = -c;
    return out;
}

ParamPoly& ParamPoly::operator+=(const ParamPoly& o) {
    for (const auto& [e, c] : o.terms_) {
        auto [it, fresh] = terms_.emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    return *this;
}

ParamPoly& ParamPoly::operator-=(const ParamPoly& o) {
    for (const auto& [e, c] : o.terms_) {
        auto [it, fresh] = terms_.emplace(e, -c);
        if (!fresh) {
            it->second -= c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }
    return *this;
}

ParamPoly operator*(const ParamPoly& l, const ParamPoly& r) {
    ParamPoly out;
    for (const auto& [le, lc] : l.terms_) {
        for (const auto& [re, rc] : r.terms_) {
            ExpVec e;
            for (int i = 0; i < kNumSyms; ++i)
                e[i] = static_cast<int16_t>(le[i] + re[i]);
            out.add_term(e, lc * rc);
        }
    }
    return out;
}

ParamPoly& ParamPoly::scale(const Rat& f) {
    if (f.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [e, c] : terms_) c *= f;
    return *this;
}

ParamPoly& ParamPoly::mul_sym(Sym s, int exp) {
    if (exp == 0) return *this;
    const int i = static_cast<int>(s);
    Terms out;
    for (const auto& [e, c] : terms_) {
        ExpVec ne = e;
        ne[i] = static_cast<int16_t>(ne[i] + exp);
        check_exps(ne);
        out.emplace(ne, c);
    }
    terms_ = std::move(out);
    return *this;
}

ParamPoly& ParamPoly::div(const Rat& f) {
    if (f.is_zero()) throw DomainError("polynomial division by zero");
    return scale(Rat(1) / f);
}

ParamPoly ParamPoly::pow(int e) const {
    if (e < 0) throw DomainError("negative polynomial power");
    ParamPoly out(1);
    for (int i = 0; i < e; ++i) out *= *this;
    return out;
}

ParamPoly ParamPoly::substitute(Sym s, const Rat& value) const {
    const int i = static_cast<int>(s);
    ParamPoly out;
    for (const auto& [e, c] : terms_) {
        ExpVec ne = e;
        ne[i] = 0;
        out.add_term(ne, c * value.pow(e[i]));
    }
    return out;
}

ParamPoly& ParamPoly::kill_at_or_above(Sym s, int order) {
    const int i = static_cast<int>(s);
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (it->first[i] >= order)
            it = terms_.erase(it);
        else
            ++it;
    }
    return *this;
}

int ParamPoly::max_exp(Sym s) const {
    const int i = static_cast<int>(s);
    int m = 0;
    for (const auto& [e, c] : terms_)
        if (e[i] > m) m = e[i];
    return m;
}

int ParamPoly::min_exp(Sym s) const {
    const int i = static_cast<int>(s);
    int m = 0;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        if (first || e[i] < m) m = e[i];
        first = false;
    }
    return m;
}

bool ParamPoly::uniform_exp(Sym s, int e) const {
    const int i = static_cast<int>(s);
    for (const auto& [ev, c] : terms_)
        if (ev[i] != e) return false;
    return true;
}

double ParamPoly::eval(const std::array<double, kNumSyms>& values) const {
    double out = 0.0;
    for (const auto& [e, c] : terms_) {
        double t = c.to_double();
        for (int i = 0; i < kNumSyms; ++i) {
            if (e[i] == 0) continue;
            double b = values[i];
            int p = e[i];
            if (p < 0) {
                b = 1.0 / b;
                p = -p;
            }
            for (int j = 0; j < p; ++j) t *= b;
        }
        out += t;
    }
    return out;
}

std::string ParamPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
        const bool neg = c.sign() < 0;
        if (!first)
            os << (neg ? " - " : " + ");
        else if (neg)
            os << "-";
        first = false;
        os << (neg ? (-c).str() : c.str());
        for (int i = 0; i < kNumSyms; ++i) {
            if (e[i] == 0) continue;
            os << "*" << kSymNames[i];
            if (e[i] != 1) os << "^" << e[i];
        }
    }
    return os.str();
}

namespace {

int sym_index(const std::string& name) {
    for (int i = 0; i < kNumSyms; ++i)
        if (name == kSymNames[i]) return i;
    throw ParseError("unknown symbol '" + name + "'");
}

} // namespace

ParamPoly ParamPoly::parse(const std::string& text) {
    ParamPoly out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto skip_ws = [&] {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    };

    skip_ws();
    if (i == n) throw ParseError("empty polynomial literal");
    bool neg = false;
    if (text[i] == '+' || text[i] == '-') {
        neg = text[i] == '-';
        ++i;
    }
    while (true) {
        skip_ws();
        // One term: rational coefficient followed by *sym[^exp] factors,
        // or a bare symbol product with implicit coefficient 1.
        Rat coef(neg ? -1 : 1);
        ExpVec exps{};
        bool saw_factor = false;
        bool expect_factor = true;
        while (expect_factor) {
            skip_ws();
            if (i < n && (std::isdigit(static_cast<unsigned char>(text[i])))) {
                std::size_t b = i;
                while (i < n && (std::isdigit(static_cast<unsigned char>(text[i])) ||
                                 text[i] == '/'))
                    ++i;
                coef *= Rat::parse(text.substr(b, i - b));
                saw_factor = true;
            } else if (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) {
                std::size_t b = i;
                while (i < n && (std::isalnum(static_cast<unsigned char>(text[i]))))
                    ++i;
                const int si = sym_index(text.substr(b, i - b));
                int exp = 1;
                skip_ws();
                if (i < n && text[i] == '^') {
                    ++i;
                    skip_ws();
                    bool eneg = false;
                    if (i < n && (text[i] == '-' || text[i] == '+')) {
                        eneg = text[i] == '-';
                        ++i;
                    }
                    std::size_t b2 = i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(text[i])))
                        ++i;
                    if (b2 == i) throw ParseError("missing exponent in '" + text + "'");
                    exp = std::stoi(text.substr(b2, i - b2));
                    if (eneg) exp = -exp;
                }
                exps[si] = static_cast<int16_t>(exps[si] + exp);
                saw_factor = true;
            } else {
                throw ParseError("bad polynomial term in '" + text + "'");
            }
            skip_ws();
            if (i < n && text[i] == '*') {
                ++i;
                continue;
            }
            expect_factor = false;
        }
        if (!saw_factor) throw ParseError("bad polynomial term in '" + text + "'");
        out.add_term(exps, coef);
        skip_ws();
        if (i == n) break;
        if (text[i] == '+') {
            neg = false;
            ++i;
        } else if (text[i] == '-') {
            neg = true;
            ++i;
        } else {
            throw ParseError("expected '+' or '-' in '" + text + "'");
        }
    }
    return out;
}

std::ostream& operator<<(std::ostream& os, const ParamPoly& p) {
    return os << p.str();
}

} // namespace holo
