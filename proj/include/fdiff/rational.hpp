#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fdiff {

// Interned symbol: either a transport coefficient kappa_{m t, n z} or a named scalar.
class Atom {
public:
    static Atom kappa(int m, int n);
    static Atom symbol(const std::string& name);

    std::uint32_t id() const { return id_; }
    const std::string& name() const;
    bool is_kappa() const;
    // (m, n) for kappa atoms; throws for named symbols.
    std::pair<int, int> kappa_index() const;

    friend bool operator==(Atom a, Atom b) { return a.id_ == b.id_; }
    friend bool operator!=(Atom a, Atom b) { return a.id_ != b.id_; }
    friend bool operator<(Atom a, Atom b) { return a.id_ < b.id_; }

private:
    explicit Atom(std::uint32_t id) : id_(id) {}
    std::uint32_t id_;
};

// Product of atom powers, kept sorted by atom id with positive exponents.
class Monomial {
public:
    Monomial() = default;
    explicit Monomial(Atom a, unsigned power = 1);

    const std::vector<std::pair<std::uint32_t, unsigned>>& factors() const { return factors_; }
    bool is_one() const { return factors_.empty(); }
    unsigned degree_in(Atom a) const;
    unsigned total_degree() const;

    Monomial operator*(const Monomial& other) const;
    // Exponent-wise minimum.
    static Monomial gcd(const Monomial& a, const Monomial& b);
    // Requires divisibility.
    Monomial divided_by(const Monomial& d) const;

    std::string to_string() const;

    friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }
    friend bool operator<(const Monomial& a, const Monomial& b);

private:
    std::vector<std::pair<std::uint32_t, unsigned>> factors_;
};

class Polynomial {
public:
    using Terms = std::map<Monomial, mpq_class>;

    Polynomial() = default;
    Polynomial(const mpq_class& c);  // NOLINT(google-explicit-constructor)
    Polynomial(long c) : Polynomial(mpq_class(c)) {}  // NOLINT(google-explicit-constructor)
    Polynomial(Atom a);  // NOLINT(google-explicit-constructor)
    Polynomial(const Monomial& m, const mpq_class& c);

    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // Coefficient of the largest monomial in the internal order.
    const mpq_class& leading_coefficient() const;
    // Positive rational c such that p / c has coprime integer coefficients.
    mpq_class content() const;
    Monomial monomial_gcd() const;
    bool contains(Atom a) const;

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    Polynomial operator*(const Polynomial& o) const;
    Polynomial scaled(const mpq_class& c) const;
    Polynomial divided_by_monomial(const Monomial& m) const;
    // Replace every occurrence of atom a by the polynomial value.
    Polynomial substitute(Atom a, const Polynomial& value) const;
    Polynomial pow(unsigned e) const;

    std::string to_string() const;

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

private:
    void add_term(const Monomial& m, const mpq_class& c);
    Terms terms_;
};

// Exact quotient of polynomials over Q. Not reduced by a polynomial GCD; equality is decided
// by cross-multiplication. Normalized so the denominator is primitive over Z with a positive
// leading coefficient and shares no monomial factor with the numerator.
class RationalCoefficient {
public:
    RationalCoefficient() : num_(0), den_(1) {}
    RationalCoefficient(const Polynomial& p) : num_(p), den_(1) { normalize(); }  // NOLINT
    RationalCoefficient(long c) : RationalCoefficient(Polynomial(c)) {}          // NOLINT
    RationalCoefficient(Atom a) : RationalCoefficient(Polynomial(a)) {}          // NOLINT
    RationalCoefficient(const Polynomial& num, const Polynomial& den);

    static RationalCoefficient fraction(long p, long q);

    const Polynomial& numerator() const { return num_; }
    const Polynomial& denominator() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const;
    bool contains(Atom a) const { return num_.contains(a) || den_.contains(a); }

    RationalCoefficient operator-() const;
    RationalCoefficient& operator+=(const RationalCoefficient& o);
    RationalCoefficient& operator-=(const RationalCoefficient& o);
    RationalCoefficient& operator*=(const RationalCoefficient& o);
    RationalCoefficient& operator/=(const RationalCoefficient& o);
    RationalCoefficient inverse() const;
    RationalCoefficient substitute(Atom a, const RationalCoefficient& value) const;

    // Cross-multiplication test a/b == c/d  <=>  a d - c b == 0.
    bool equivalent(const RationalCoefficient& o) const;

    std::string to_string() const;

    friend RationalCoefficient operator+(RationalCoefficient a, const RationalCoefficient& b) { return a += b; }
    friend RationalCoefficient operator-(RationalCoefficient a, const RationalCoefficient& b) { return a -= b; }
    friend RationalCoefficient operator*(RationalCoefficient a, const RationalCoefficient& b) { return a *= b; }
    friend RationalCoefficient operator/(RationalCoefficient a, const RationalCoefficient& b) { return a /= b; }
    friend bool operator==(const RationalCoefficient& a, const RationalCoefficient& b) { return a.equivalent(b); }
    friend bool operator!=(const RationalCoefficient& a, const RationalCoefficient& b) { return !a.equivalent(b); }

private:
    void normalize();
    Polynomial num_;
    Polynomial den_;
};

// Convenience atoms.
inline Atom kappa(int m, int n) { return Atom::kappa(m, n); }

}  // namespace fdiff
