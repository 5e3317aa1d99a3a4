#pragma once

#include "fdiff/eidf.hpp"

#include <map>
#include <string>
#include <vector>

namespace fdiff {

// d<.>/dt = constant + sum_m first[m] d^m<dz>/dt^m + sum_m second[m] d^m<dz^2>/dt^m.
struct MomentEquation {
    RationalCoefficient constant;
    std::map<int, RationalCoefficient> first;
    std::map<int, RationalCoefficient> second;

    std::string to_string(const std::string& lhs) const;
};

struct MomentSystem {
    MomentEquation eq1;  // for <dz>
    MomentEquation eq2;  // for <dz^2>
};

// Late-time polynomial solution <dz> = c1 + a t, <dz^2> = c1' + b t + q t^2.
struct PolynomialAnsatz {
    RationalCoefficient a;
    RationalCoefficient b;
    RationalCoefficient q;
    Atom c1;
    Atom c1p;
};

// Integration-by-parts extraction of the first two displacement moments.
MomentSystem moment_odes(const Eidf& eidf);

// Throws ModelError when the system has no polynomial solution or q != a^2.
PolynomialAnsatz solve_special(const MomentSystem& ms);

// b/2 - a c1, checked to be free of c1 and c1'.
RationalCoefficient kappa_dv_symbolic(const Eidf& eidf);

struct DioReportRow {
    std::string name;
    std::string script;
    RationalCoefficient fick;
    RationalCoefficient dv;
    bool fick_changed = false;
    bool dv_invariant = true;
};

// Applies every script to the canonical focusing Eidf of its weight and compares
// against kappa_zz and kappa_zz - kappa_z kappa_tz.
std::vector<DioReportRow> dio_report(const std::vector<NamedScript>& scripts);
std::string format_dio_report(const std::vector<DioReportRow>& rows);

}  // namespace fdiff
