#include "fdiff/errors.hpp"
#include "fdiff/rational.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace fdiff;

namespace {

// Random polynomial of degree <= 2 in four atoms with small integer coefficients.
class PolyGen {
public:
    explicit PolyGen(unsigned seed) : rng_(seed) {}

    Polynomial poly(bool nonzero = true) {
        std::uniform_int_distribution<int> coeff(-3, 3);
        std::uniform_int_distribution<int> pick(0, static_cast<int>(atoms_.size()));
        std::uniform_int_distribution<int> nterms(1, 3);
        for (;;) {
            Polynomial p;
            int k = nterms(rng_);
            for (int t = 0; t < k; ++t) {
                Polynomial term(coeff(rng_));
                for (int f = 0; f < 2; ++f) {
                    int a = pick(rng_);
                    if (a < static_cast<int>(atoms_.size())) term = term * Polynomial(atoms_[static_cast<std::size_t>(a)]);
                }
                p += term;
            }
            if (!nonzero || !p.is_zero()) return p;
        }
    }

    RationalCoefficient rational() { return RationalCoefficient(poly(false), poly()); }

private:
    std::mt19937 rng_;
    std::vector<Atom> atoms_{kappa(0, 1), kappa(0, 2), kappa(1, 1), Atom::symbol("x")};
};

}  // namespace

TEST_SUITE("rational") {

TEST_CASE("atoms are interned and named") {
    CHECK(kappa(1, 2) == kappa(1, 2));
    CHECK(kappa(1, 2) != kappa(2, 1));
    CHECK(kappa(0, 2).name() == "k_zz");
    CHECK(kappa(1, 1).name() == "k_tz");
    CHECK(kappa(3, 1).name() == "k_3tz");
    CHECK(kappa(0, 5).name() == "k_5z");
    CHECK(kappa(2, 1).kappa_index() == std::pair{2, 1});
    CHECK(Atom::symbol("lambda") == Atom::symbol("lambda"));
    CHECK_FALSE(Atom::symbol("lambda").is_kappa());
    CHECK_THROWS_AS(kappa(0, 0), AlgebraError);
    CHECK_THROWS_AS(Atom::symbol("k_zz"), AlgebraError);
    CHECK_THROWS_AS(Atom::symbol("v").kappa_index(), AlgebraError);
}

TEST_CASE("monomial algebra") {
    Monomial a = Monomial(kappa(0, 1), 2) * Monomial(kappa(0, 2));
    Monomial b = Monomial(kappa(0, 1)) * Monomial(kappa(1, 1), 3);
    CHECK(a.total_degree() == 3);
    CHECK(a.degree_in(kappa(0, 1)) == 2);
    CHECK(Monomial::gcd(a, b) == Monomial(kappa(0, 1)));
    CHECK(a.divided_by(Monomial(kappa(0, 1), 2)) == Monomial(kappa(0, 2)));
    CHECK_THROWS_AS(a.divided_by(b), AlgebraError);
    CHECK(Monomial().is_one());
}

TEST_CASE("polynomial arithmetic") {
    Polynomial x(Atom::symbol("x"));
    Polynomial y(kappa(0, 2));
    Polynomial p = (x + y) * (x - y);
    CHECK(p == x * x - y * y);
    CHECK((x + 1).pow(3) == x * x * x + Polynomial(3) * x * x + Polynomial(3) * x + 1);
    CHECK(p.substitute(Atom::symbol("x"), y) == Polynomial());
    CHECK(Polynomial(mpq_class(6, 4)).scaled(mpq_class(2, 3)) == Polynomial(1));
    CHECK((Polynomial(6) * x + Polynomial(mpq_class(9, 2)) * y).content() == mpq_class(3, 2));
    CHECK(p.contains(kappa(0, 2)));
    CHECK_FALSE(p.contains(kappa(1, 1)));
    CHECK(Polynomial(5).is_constant());
    CHECK_THROWS_AS(Polynomial().leading_coefficient(), AlgebraError);
}

TEST_CASE("normalized quotients") {
    CHECK(RationalCoefficient::fraction(2, 4) == RationalCoefficient::fraction(1, 2));
    CHECK(RationalCoefficient::fraction(2, 4).to_string() == RationalCoefficient::fraction(-1, -2).to_string());
    CHECK(RationalCoefficient::fraction(3, 3).is_one());
    CHECK_THROWS_AS(RationalCoefficient::fraction(1, 0), AlgebraError);
    CHECK_THROWS_AS(RationalCoefficient(Polynomial(1), Polynomial()), AlgebraError);
    CHECK_THROWS_AS(RationalCoefficient().inverse(), AlgebraError);

    Polynomial k(kappa(0, 2));
    RationalCoefficient r(k * k, Polynomial(2) * k);
    CHECK(r == RationalCoefficient(k) * RationalCoefficient::fraction(1, 2));
    // The shared monomial factor is removed from numerator and denominator.
    CHECK(r.denominator().is_constant());
}

TEST_CASE("cross-multiplication equality is an equivalence relation") {
    PolyGen gen(20240917u);
    for (int trial = 0; trial < 200; ++trial) {
        RationalCoefficient a = gen.rational();
        Polynomial p = gen.poly();
        Polynomial q = gen.poly();
        RationalCoefficient b(a.numerator() * p, a.denominator() * p);
        RationalCoefficient c(b.numerator() * q, b.denominator() * q);
        CHECK(a == a);
        CHECK(a == b);
        CHECK(b == a);
        CHECK(b == c);
        CHECK(a == c);
        RationalCoefficient d = a + RationalCoefficient(1);
        CHECK(a != d);
        CHECK(d != a);
        RationalCoefficient e = gen.rational();
        CHECK((a == e) == (e == a));
        if (a == e) CHECK(b == e);
    }
}

TEST_CASE("field identities on random quotients") {
    PolyGen gen(7u);
    for (int trial = 0; trial < 150; ++trial) {
        RationalCoefficient a = gen.rational();
        RationalCoefficient b = gen.rational();
        RationalCoefficient c = gen.rational();
        CHECK((a + b) - b == a);
        CHECK(a + b == b + a);
        CHECK(a * b == b * a);
        CHECK(a * (b + c) == a * b + a * c);
        CHECK((a + b) + c == a + (b + c));
        CHECK(-(-a) == a);
        CHECK((a - a).is_zero());
        if (!b.is_zero()) {
            CHECK((a * b) / b == a);
            CHECK((b * b.inverse()).is_one());
        }
    }
}

TEST_CASE("substitution") {
    Atom kz = kappa(0, 1);
    Atom kzz = kappa(0, 2);
    RationalCoefficient r(Polynomial(kzz) - Polynomial(kz) * Polynomial(kz), Polynomial(kz) + 1);
    RationalCoefficient at2 = r.substitute(kz, RationalCoefficient(2));
    CHECK(at2 == (RationalCoefficient(kzz) - RationalCoefficient(4)) / RationalCoefficient(3));
    CHECK_FALSE(at2.contains(kz));
    RationalCoefficient inv = r.substitute(kz, RationalCoefficient(kzz).inverse());
    CHECK(inv.contains(kzz));
    CHECK(inv * (RationalCoefficient(kzz) + 1) / RationalCoefficient(kzz) ==
          RationalCoefficient(kzz) - RationalCoefficient(kzz).inverse() * RationalCoefficient(kzz).inverse());
}

}
