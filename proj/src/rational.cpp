#include "fdiff/rational.hpp"

#include "fdiff/errors.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>

namespace fdiff {

namespace {

struct AtomEntry {
    std::string name;
    bool is_kappa = false;
    int m = 0;
    int n = 0;
};

// Concurrent lookups take a shared lock; inserts are serialized under the exclusive lock.
class AtomTable {
public:
    std::uint32_t intern(const std::string& name, bool is_kappa, int m, int n) {
        {
            std::shared_lock lock(mutex_);
            auto it = ids_.find(name);
            if (it != ids_.end()) return it->second;
        }
        std::unique_lock lock(mutex_);
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        auto id = static_cast<std::uint32_t>(entries_.size());
        entries_.push_back({name, is_kappa, m, n});
        ids_.emplace(name, id);
        return id;
    }

    const AtomEntry& entry(std::uint32_t id) const {
        std::shared_lock lock(mutex_);
        return entries_.at(id);
    }

private:
    mutable std::shared_mutex mutex_;
    std::deque<AtomEntry> entries_;  // deque keeps references stable across inserts
    std::unordered_map<std::string, std::uint32_t> ids_;
};

AtomTable& atom_table() {
    static AtomTable table;
    return table;
}

std::string kappa_name(int m, int n) {
    std::string name = "k_";
    if (m == 1) name += "t";
    if (m >= 2) name += std::to_string(m) + "t";
    if (n >= 1 && n <= 3) name += std::string(static_cast<std::size_t>(n), 'z');
    if (n >= 4) name += std::to_string(n) + "z";
    return name;
}

std::string rational_to_string(const mpq_class& q) {
    return q.get_str();
}

}  // namespace

Atom Atom::kappa(int m, int n) {
    if (m < 0 || n < 0 || (m == 0 && n == 0)) throw AlgebraError("kappa atom needs (m, n) != (0, 0), m, n >= 0");
    return Atom(atom_table().intern(kappa_name(m, n), true, m, n));
}

Atom Atom::symbol(const std::string& name) {
    if (name.empty() || name.rfind("k_", 0) == 0) {
        throw AlgebraError("symbol name '" + name + "' is empty or collides with kappa atoms");
    }
    return Atom(atom_table().intern(name, false, 0, 0));
}

const std::string& Atom::name() const { return atom_table().entry(id_).name; }

bool Atom::is_kappa() const { return atom_table().entry(id_).is_kappa; }

std::pair<int, int> Atom::kappa_index() const {
    const AtomEntry& e = atom_table().entry(id_);
    if (!e.is_kappa) throw AlgebraError("atom '" + e.name + "' is not a kappa coefficient");
    return {e.m, e.n};
}

Monomial::Monomial(Atom a, unsigned power) {
    if (power > 0) factors_.emplace_back(a.id(), power);
}

unsigned Monomial::degree_in(Atom a) const {
    for (const auto& [id, e] : factors_) {
        if (id == a.id()) return e;
    }
    return 0;
}

unsigned Monomial::total_degree() const {
    unsigned d = 0;
    for (const auto& f : factors_) d += f.second;
    return d;
}

Monomial Monomial::operator*(const Monomial& other) const {
    Monomial out;
    auto i = factors_.begin();
    auto j = other.factors_.begin();
    while (i != factors_.end() || j != other.factors_.end()) {
        if (j == other.factors_.end() || (i != factors_.end() && i->first < j->first)) {
            out.factors_.push_back(*i++);
        } else if (i == factors_.end() || j->first < i->first) {
            out.factors_.push_back(*j++);
        } else {
            out.factors_.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    return out;
}

Monomial Monomial::gcd(const Monomial& a, const Monomial& b) {
    Monomial out;
    auto i = a.factors_.begin();
    auto j = b.factors_.begin();
    while (i != a.factors_.end() && j != b.factors_.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            out.factors_.emplace_back(i->first, std::min(i->second, j->second));
            ++i;
            ++j;
        }
    }
    return out;
}

Monomial Monomial::divided_by(const Monomial& d) const {
    Monomial out;
    auto j = d.factors_.begin();
    for (const auto& [id, e] : factors_) {
        unsigned sub = 0;
        if (j != d.factors_.end() && j->first == id) {
            sub = j->second;
            ++j;
        }
        if (sub > e) throw AlgebraError("monomial division is not exact");
        if (e > sub) out.factors_.emplace_back(id, e - sub);
    }
    if (j != d.factors_.end()) throw AlgebraError("monomial division is not exact");
    return out;
}

std::string Monomial::to_string() const {
    std::string out;
    for (const auto& [id, e] : factors_) {
        if (!out.empty()) out += "*";
        out += atom_table().entry(id).name;
        if (e > 1) out += "^" + std::to_string(e);
    }
    return out.empty() ? "1" : out;
}

bool operator<(const Monomial& a, const Monomial& b) {
    // Graded: lower total degree first, then lexicographic on the factor list.
    unsigned da = a.total_degree();
    unsigned db = b.total_degree();
    if (da != db) return da < db;
    return a.factors_ < b.factors_;
}

Polynomial::Polynomial(const mpq_class& c) : Polynomial(Monomial(), c) {}

Polynomial::Polynomial(Atom a) { terms_.emplace(Monomial(a), mpq_class(1)); }

Polynomial::Polynomial(const Monomial& m, const mpq_class& c) {
    mpq_class value = c;
    value.canonicalize();
    if (value != 0) terms_.emplace(m, value);
}

bool Polynomial::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.is_one());
}

const mpq_class& Polynomial::leading_coefficient() const {
    if (terms_.empty()) throw AlgebraError("zero polynomial has no leading coefficient");
    return terms_.rbegin()->second;
}

mpq_class Polynomial::content() const {
    if (terms_.empty()) return mpq_class(0);
    mpz_class num_gcd = 0;
    mpz_class den_lcm = 1;
    for (const auto& [m, c] : terms_) {
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num_mpz_t());
        num_gcd = g;
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
    }
    mpq_class out(num_gcd, den_lcm);
    out.canonicalize();
    return out;
}

Monomial Polynomial::monomial_gcd() const {
    if (terms_.empty()) return Monomial();
    Monomial g = terms_.begin()->first;
    for (const auto& [m, c] : terms_) {
        g = Monomial::gcd(g, m);
        if (g.is_one()) break;
    }
    return g;
}

bool Polynomial::contains(Atom a) const {
    for (const auto& [m, c] : terms_) {
        if (m.degree_in(a) > 0) return true;
    }
    return false;
}

void Polynomial::add_term(const Monomial& m, const mpq_class& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator-() const {
    Polynomial out = *this;
    for (auto& [m, c] : out.terms_) c = -c;
    return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    Polynomial out;
    for (const auto& [ma, ca] : terms_) {
        for (const auto& [mb, cb] : o.terms_) out.add_term(ma * mb, ca * cb);
    }
    return out;
}

Polynomial Polynomial::scaled(const mpq_class& c) const {
    mpq_class factor = c;
    factor.canonicalize();
    if (factor == 0) return Polynomial();
    Polynomial out = *this;
    for (auto& [m, coeff] : out.terms_) coeff *= factor;
    return out;
}

Polynomial Polynomial::divided_by_monomial(const Monomial& d) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) out.terms_.emplace(m.divided_by(d), c);
    return out;
}

Polynomial Polynomial::pow(unsigned e) const {
    Polynomial out(1);
    for (unsigned i = 0; i < e; ++i) out = out * *this;
    return out;
}

Polynomial Polynomial::substitute(Atom a, const Polynomial& value) const {
    Polynomial out;
    for (const auto& [m, c] : terms_) {
        unsigned d = m.degree_in(a);
        if (d == 0) {
            out.add_term(m, c);
            continue;
        }
        Polynomial rest;
        rest.terms_.emplace(m.divided_by(Monomial(a, d)), c);
        out += rest * value.pow(d);
    }
    return out;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const Monomial& m = it->first;
        mpq_class c = it->second;
        bool negative = c < 0;
        if (negative) c = -c;
        if (first) {
            if (negative) os << "-";
        } else {
            os << (negative ? " - " : " + ");
        }
        first = false;
        if (m.is_one()) {
            os << rational_to_string(c);
        } else if (c == 1) {
            os << m.to_string();
        } else {
            os << rational_to_string(c) << "*" << m.to_string();
        }
    }
    return os.str();
}

RationalCoefficient::RationalCoefficient(const Polynomial& num, const Polynomial& den) : num_(num), den_(den) {
    normalize();
}

RationalCoefficient RationalCoefficient::fraction(long p, long q) {
    if (q == 0) throw AlgebraError("division by zero");
    mpq_class r(p, q);
    r.canonicalize();
    return RationalCoefficient(Polynomial(r));
}

void RationalCoefficient::normalize() {
    if (den_.is_zero()) throw AlgebraError("rational coefficient with zero denominator");
    if (num_.is_zero()) {
        den_ = Polynomial(1);
        return;
    }
    Monomial common = Monomial::gcd(num_.monomial_gcd(), den_.monomial_gcd());
    if (!common.is_one()) {
        num_ = num_.divided_by_monomial(common);
        den_ = den_.divided_by_monomial(common);
    }
    mpq_class c = den_.content();
    if (den_.leading_coefficient() < 0) c = -c;
    if (c != 1) {
        mpq_class inv = 1 / c;
        num_ = num_.scaled(inv);
        den_ = den_.scaled(inv);
    }
    // Numerator proportional to the denominator: collapse to a constant.
    if (!den_.is_constant() && num_.terms().size() == den_.terms().size()) {
        mpq_class k = num_.leading_coefficient() / den_.leading_coefficient();
        if (num_ == den_.scaled(k)) {
            num_ = Polynomial(k);
            den_ = Polynomial(1);
        }
    }
}

bool RationalCoefficient::is_one() const { return num_ == den_; }

RationalCoefficient RationalCoefficient::operator-() const {
    RationalCoefficient out = *this;
    out.num_ = -out.num_;
    return out;
}

RationalCoefficient& RationalCoefficient::operator+=(const RationalCoefficient& o) {
    if (o.is_zero()) return *this;
    if (den_ == o.den_) {
        num_ += o.num_;
    } else {
        num_ = num_ * o.den_ + o.num_ * den_;
        den_ = den_ * o.den_;
    }
    normalize();
    return *this;
}

RationalCoefficient& RationalCoefficient::operator-=(const RationalCoefficient& o) { return *this += -o; }

RationalCoefficient& RationalCoefficient::operator*=(const RationalCoefficient& o) {
    num_ = num_ * o.num_;
    den_ = den_ * o.den_;
    normalize();
    return *this;
}

RationalCoefficient RationalCoefficient::inverse() const {
    if (is_zero()) throw AlgebraError("inverse of zero coefficient");
    return RationalCoefficient(den_, num_);
}

RationalCoefficient& RationalCoefficient::operator/=(const RationalCoefficient& o) { return *this *= o.inverse(); }

RationalCoefficient RationalCoefficient::substitute(Atom a, const RationalCoefficient& value) const {
    if (!contains(a)) return *this;
    auto expand = [&](const Polynomial& p) {
        RationalCoefficient acc(0);
        for (const auto& [m, c] : p.terms()) {
            unsigned k = m.degree_in(a);
            RationalCoefficient term(Polynomial(m.divided_by(Monomial(a, k)), c));
            for (unsigned i = 0; i < k; ++i) term *= value;
            acc += term;
        }
        return acc;
    };
    return expand(num_) / expand(den_);
}

bool RationalCoefficient::equivalent(const RationalCoefficient& o) const {
    return (num_ * o.den_ - o.num_ * den_).is_zero();
}

std::string RationalCoefficient::to_string() const {
    if (den_.is_constant() && den_.leading_coefficient() == 1) return num_.to_string();
    std::string n = num_.to_string();
    std::string d = den_.to_string();
    bool simple_num = num_.terms().size() == 1;
    bool simple_den = den_.terms().size() == 1;
    return (simple_num ? n : "(" + n + ")") + "/" + (simple_den ? d : "(" + d + ")");
}

}  // namespace fdiff
