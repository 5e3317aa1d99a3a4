#include "fdiff/eidf.hpp"
#include "fdiff/errors.hpp"

#include <doctest.h>

#include <vector>

using namespace fdiff;

namespace {

using RC = RationalCoefficient;

RC k(int m, int n) { return RC(kappa(m, n)); }

DerivedEquation shift(const DerivedEquation& eq, int a, int b) {
    DerivedEquation out{eq.lhs.shifted(a, b), {}};
    for (const auto& [idx, c] : eq.terms) out.terms[idx.shifted(a, b)] = c;
    return out;
}

bool same_terms(const TermMap& x, const TermMap& y) {
    if (x.size() != y.size()) return false;
    for (const auto& [idx, c] : x) {
        auto it = y.find(idx);
        if (it == y.end() || it->second != c) return false;
    }
    return true;
}

const NamedScript& script(const std::string& name) {
    static const std::vector<NamedScript> catalog = dio_catalog();
    for (const auto& s : catalog) {
        if (s.name == name) return s;
    }
    FAIL("missing script " << name);
    return catalog.front();
}

Eidf run(const std::string& name) {
    const auto& s = script(name);
    return apply_script(Eidf::canonical_focusing(s.max_weight), s.steps);
}

}  // namespace

TEST_SUITE("eidf") {

TEST_CASE("multi-index parsing and weights") {
    MultiIndex i = MultiIndex::parse("2,3");
    CHECK(i.m == 2);
    CHECK(i.n == 3);
    CHECK(i.weight2() == 7);
    CHECK(i.weight() == 3.5);
    CHECK(MultiIndex::parse(" 0 , 4 ") == MultiIndex{0, 4});
    CHECK_THROWS_AS(MultiIndex::parse("3"), AlgebraError);
    CHECK_THROWS_AS(MultiIndex::parse("a,1"), AlgebraError);
    CHECK_THROWS_AS(MultiIndex::parse("-1,2"), AlgebraError);
}

TEST_CASE("canonical focusing equation") {
    Eidf e = Eidf::canonical_focusing(2);
    CHECK(e.coefficient({0, 1}) == -k(0, 1));
    CHECK(e.coefficient({1, 1}) == k(1, 1));
    CHECK(e.coefficient({0, 4}) == k(0, 4));
    CHECK_FALSE(e.has({2, 0}));
    // (0,1..4), (1,1), (1,2): every index of weight <= 2 carrying a z-derivative.
    CHECK(e.terms().size() == 6);
    for (const auto& [idx, c] : e.terms()) {
        CHECK(idx.n >= 1);
        CHECK(idx.weight2() <= 4);
    }
    CHECK(fick_coefficient(e) == k(0, 2));
}

TEST_CASE("second-order BGK equation") {
    Eidf e = Eidf::bgk_second_order();
    RC v(Atom::symbol("v"));
    RC lambda(Atom::symbol("lambda"));
    CHECK(e.coefficient({0, 2}) == v * lambda / RC(3));
    CHECK(e.coefficient({1, 2}) == RC(-2) * lambda * lambda / RC(3));
    CHECK(e.coefficient({0, 4}) == v * lambda * lambda * lambda / RC(5));
    CHECK_FALSE(e.has({0, 3}));
}

TEST_CASE("term storage rules") {
    Eidf e(4);
    CHECK_THROWS_AS(e.set({0, 0}, RC(1)), AlgebraError);
    CHECK_THROWS_AS(e.set({1, 0}, RC(1)), AlgebraError);
    CHECK_THROWS_AS(e.set({0, 5}, RC(1)), AlgebraError);
    e.set({0, 2}, RC(3));
    CHECK(e.has({0, 2}));
    e.set({0, 2}, RC(0));
    CHECK_FALSE(e.has({0, 2}));
    CHECK_THROWS_AS(Eidf(1), AlgebraError);
}

TEST_CASE("applying a derivative shifts every index") {
    Eidf e = Eidf::canonical_focusing(4);
    auto dz = apply_derivative(e, 0, 1);
    CHECK(dz.lhs == MultiIndex{1, 1});
    CHECK(dz.terms.at({0, 2}) == -k(0, 1));
    auto dt = apply_derivative(e, 1, 0);
    CHECK(dt.lhs == MultiIndex{2, 0});
    CHECK(dt.terms.at({2, 1}) == k(1, 1));
    for (const auto& [idx, c] : e.terms()) CHECK(dz.terms.at(idx.shifted(0, 1)) == c);
    CHECK_THROWS_AS(apply_derivative(e, 0, 0), AlgebraError);
}

TEST_CASE("derivatives commute") {
    Eidf e = Eidf::canonical_focusing(3);
    for (int a = 0; a <= 3; ++a) {
        for (int b = 0; b <= 3; ++b) {
            if (a == 0 || b == 0) continue;
            auto direct = apply_derivative(e, a, b);
            auto t_then_z = shift(apply_derivative(e, a, 0), 0, b);
            auto z_then_t = shift(apply_derivative(e, 0, b), a, 0);
            CHECK(direct.lhs == t_then_z.lhs);
            CHECK(direct.lhs == z_then_t.lhs);
            CHECK(same_terms(direct.terms, t_then_z.terms));
            CHECK(same_terms(direct.terms, z_then_t.terms));
        }
    }
}

TEST_CASE("solving a derived equation for one term") {
    Eidf e = Eidf::canonical_focusing(4);
    auto eq = apply_derivative(e, 0, 1);
    TermMap zzz = solve_for(eq, {0, 3});
    CHECK(zzz.at({1, 1}) == k(0, 2).inverse());
    CHECK(zzz.at({0, 2}) == k(0, 1) / k(0, 2));
    CHECK(zzz.count({0, 3}) == 0);

    TermMap self = solve_for(eq, eq.lhs);
    CHECK(same_terms(self, eq.terms));
    CHECK_THROWS_AS(solve_for(eq, {5, 5}), AlgebraError);
}

TEST_CASE("a solved expression satisfies its source equation") {
    Eidf e = Eidf::canonical_focusing(4);
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {0, 2}, {1, 0}, {2, 0}, {1, 1}}) {
        auto eq = apply_derivative(e, a, b);
        for (const auto& [target, c_target] : eq.terms) {
            TermMap expr = solve_for(eq, target);
            // F_lhs - sum_k c_k F_k with F_target replaced by expr must vanish identically.
            TermMap residual;
            residual[eq.lhs] += RC(1);
            for (const auto& [idx, c] : eq.terms) {
                if (idx == target) {
                    for (const auto& [j, cj] : expr) residual[j] -= c * cj;
                } else {
                    residual[idx] -= c;
                }
            }
            for (const auto& [idx, c] : residual) CHECK(c.is_zero());
        }
    }
}

TEST_CASE("first-order PzI changes the Fick coefficient") {
    CHECK(fick_coefficient(run("R_tz of 1st PzI")) == k(0, 2) - k(1, 1) * k(0, 1));
    CHECK(fick_coefficient(run("R_zzz of 1st PzI")) == k(0, 2) + k(0, 3) * k(0, 1) / k(0, 2));
    // Target (i, j+1): kappa_zz + kappa_{it(j+1)z} kappa_z / kappa_{itjz}.
    CHECK(fick_coefficient(run("R_it(j+1)z of 1st PzI [1,2]")) == k(0, 2) + k(1, 2) * k(0, 1) / k(1, 1));
    CHECK(fick_coefficient(run("R_it(j+1)z of 1st PzI [2,3]")) == k(0, 2) + k(2, 3) * k(0, 1) / k(2, 2));
}

TEST_CASE("other families leave the Fick coefficient alone") {
    for (const auto& s : dio_catalog()) {
        Eidf out = apply_script(Eidf::canonical_focusing(s.max_weight), s.steps);
        CAPTURE(s.name);
        CHECK((fick_coefficient(out) != k(0, 2)) == s.mutates_fick);
    }
    CHECK(fick_coefficient(run("R_tzz of 2nd PzI")) == k(0, 2));
}

TEST_CASE("family checks on derivative orders") {
    Eidf e = Eidf::canonical_focusing(4);
    CHECK_THROWS_AS(apply_dio(e, {DioFamily::PzI, 1, 1, {1, 1}}), AlgebraError);
    CHECK_THROWS_AS(apply_dio(e, {DioFamily::PtI, 1, 1, {1, 1}}), AlgebraError);
    CHECK_THROWS_AS(apply_dio(e, {DioFamily::PtzI, 0, 1, {1, 1}}), AlgebraError);
    CHECK_THROWS_AS(apply_dio(e, {DioFamily::PzI, 0, 1, {4, 4}}), AlgebraError);
    CHECK(parse_family("PtzI") == DioFamily::PtzI);
    CHECK_FALSE(parse_family("PxI").has_value());
    CHECK(family_name(DioFamily::PtI) == "PtI");
}

TEST_CASE("truncation monotonicity") {
    for (int w = 2; w <= 5; ++w) {
        CHECK(Eidf::canonical_focusing(w + 1).truncated(2 * w) == Eidf::canonical_focusing(w));
    }
    for (const auto& s : dio_catalog()) {
        CAPTURE(s.name);
        Eidf low = apply_script(Eidf::canonical_focusing(s.max_weight), s.steps);
        Eidf high = apply_script(Eidf::canonical_focusing(s.max_weight + 1), s.steps);
        CHECK(high.truncated(2 * s.max_weight) == low);
    }
}

TEST_CASE("BGK round trip to the telegraph form") {
    auto transcript = gombosi_roundtrip();
    REQUIRE(transcript.size() == 3);
    RC v(Atom::symbol("v"));
    RC lambda(Atom::symbol("lambda"));
    const Eidf& mid = transcript[1].eidf;
    CHECK(mid.coefficient({1, 2}) == -lambda * lambda / RC(15));
    CHECK_FALSE(mid.has({0, 4}));
    const Eidf& last = transcript[2].eidf;
    // tau = lambda / v.
    CHECK(last.coefficient({2, 0}) == -lambda / (RC(5) * v));
    CHECK(last.coefficient({0, 2}) == v * lambda / RC(3));
    CHECK(last.terms().size() == 2);
}

TEST_CASE("readable derivative names") {
    Eidf e(4);
    e.set({0, 2}, k(0, 2));
    e.set({1, 1}, k(1, 1));
    std::string text = e.to_string();
    CHECK(text.find("F_zz") != std::string::npos);
    CHECK(text.find("F_tz") != std::string::npos);
    CHECK(text.find("k_zz") != std::string::npos);
}

}
