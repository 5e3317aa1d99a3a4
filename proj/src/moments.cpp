#include "fdiff/moments.hpp"

#include "fdiff/errors.hpp"

#include <sstream>

namespace fdiff {

namespace {

void accumulate(std::map<int, RationalCoefficient>& table, int order, const RationalCoefficient& c) {
    auto [it, inserted] = table.emplace(order, c);
    if (!inserted) it->second += c;
    if (it->second.is_zero()) table.erase(it);
}

RationalCoefficient entry(const std::map<int, RationalCoefficient>& table, int order) {
    auto it = table.find(order);
    return it == table.end() ? RationalCoefficient(0) : it->second;
}

std::string derivative_label(const std::string& moment, int order) {
    if (order == 0) return moment;
    return "d^" + std::to_string(order) + " " + moment;
}

}  // namespace

std::string MomentEquation::to_string(const std::string& lhs) const {
    std::ostringstream os;
    os << "d " << lhs << " = (" << constant.to_string() << ")";
    for (const auto& [m, c] : first) os << " + (" << c.to_string() << ") " << derivative_label("<dz>", m);
    for (const auto& [m, c] : second) os << " + (" << c.to_string() << ") " << derivative_label("<dz^2>", m);
    return os.str();
}

MomentSystem moment_odes(const Eidf& eidf) {
    MomentSystem ms;
    for (const auto& [idx, c] : eidf.terms()) {
        // int dz F_{m,n} dz: <dz> for n = 0, -1 for n = 1, 0 beyond.
        if (idx.n == 0) {
            accumulate(ms.eq1.first, idx.m, c);
        } else if (idx.n == 1 && idx.m == 0) {
            ms.eq1.constant -= c;
        }
        // int dz^2 F_{m,n} dz: <dz^2>, -2<dz>, 2, then 0.
        if (idx.n == 0) {
            accumulate(ms.eq2.second, idx.m, c);
        } else if (idx.n == 1) {
            accumulate(ms.eq2.first, idx.m, RationalCoefficient(-2) * c);
        } else if (idx.n == 2 && idx.m == 0) {
            ms.eq2.constant += RationalCoefficient(2) * c;
        }
    }
    return ms;
}

PolynomialAnsatz solve_special(const MomentSystem& ms) {
    PolynomialAnsatz out{0, 0, 0, Atom::symbol("c1"), Atom::symbol("c1p")};
    RationalCoefficient c1(out.c1);

    if (!entry(ms.eq1.first, 0).is_zero()) throw ModelError("<dz> equation couples to <dz> itself; no linear drift");
    if (!entry(ms.eq2.second, 0).is_zero()) {
        throw ModelError("<dz^2> equation couples to <dz^2> itself; no polynomial solution");
    }

    // <dz>: a = K1 + e1 a.
    RationalCoefficient one_minus_e1 = RationalCoefficient(1) - entry(ms.eq1.first, 1);
    if (one_minus_e1.is_zero()) throw ModelError("degenerate drift equation");
    out.a = ms.eq1.constant / one_minus_e1;

    // <dz^2>: b + 2 q t = K2 + f0 (c1 + a t) + f1 a + g1 (b + 2 q t) + 2 q g2.
    RationalCoefficient f0 = entry(ms.eq2.first, 0);
    RationalCoefficient f1 = entry(ms.eq2.first, 1);
    RationalCoefficient g1 = entry(ms.eq2.second, 1);
    RationalCoefficient g2 = entry(ms.eq2.second, 2);
    RationalCoefficient one_minus_g1 = RationalCoefficient(1) - g1;
    if (one_minus_g1.is_zero()) throw ModelError("degenerate second-moment equation");
    out.q = f0 * out.a / (RationalCoefficient(2) * one_minus_g1);
    out.b = (ms.eq2.constant + f0 * c1 + f1 * out.a + RationalCoefficient(2) * out.q * g2) / one_minus_g1;

    if (!out.q.equivalent(out.a * out.a)) {
        throw ModelError("inconsistent moment system: q = " + out.q.to_string() + " but a^2 = " +
                         (out.a * out.a).to_string());
    }
    return out;
}

RationalCoefficient kappa_dv_symbolic(const Eidf& eidf) {
    PolynomialAnsatz sol = solve_special(moment_odes(eidf));
    RationalCoefficient dv = sol.b / RationalCoefficient(2) - sol.a * RationalCoefficient(sol.c1);
    if (dv.contains(sol.c1) || dv.contains(sol.c1p)) {
        throw ModelError("displacement-variance coefficient depends on the initial constants: " + dv.to_string());
    }
    return dv;
}

std::vector<DioReportRow> dio_report(const std::vector<NamedScript>& scripts) {
    RationalCoefficient kzz(kappa(0, 2));
    RationalCoefficient dv0 = kzz - RationalCoefficient(kappa(0, 1)) * RationalCoefficient(kappa(1, 1));
    std::vector<DioReportRow> rows;
    rows.reserve(scripts.size());
    for (const auto& s : scripts) {
        Eidf e = apply_script(Eidf::canonical_focusing(s.max_weight), s.steps);
        DioReportRow row;
        row.name = s.name;
        for (std::size_t i = 0; i < s.steps.size(); ++i) row.script += (i ? "; " : "") + s.steps[i].to_string();
        row.fick = fick_coefficient(e);
        row.dv = kappa_dv_symbolic(e);
        row.fick_changed = !row.fick.equivalent(kzz);
        row.dv_invariant = row.dv.equivalent(dv0);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string format_dio_report(const std::vector<DioReportRow>& rows) {
    std::ostringstream os;
    for (const auto& r : rows) {
        os << r.name << "\n";
        os << "  script: " << r.script << "\n";
        os << "  FL: " << r.fick.to_string() << "  [" << (r.fick_changed ? "changed" : "invariant") << "]\n";
        os << "  DV: " << r.dv.to_string() << "  [" << (r.dv_invariant ? "invariant" : "changed") << "]\n";
    }
    return os.str();
}

}  // namespace fdiff
