#pragma once

#include "fdiff/rational.hpp"

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fdiff {

// Derivative order d^{m+n} F / dt^m dz^n.
struct MultiIndex {
    int m = 0;  // temporal order
    int n = 0;  // spatial order

    // Twice the grading weight m + n/2, kept integral.
    int weight2() const { return 2 * m + n; }
    double weight() const { return m + 0.5 * n; }
    MultiIndex shifted(int a, int b) const { return {m + a, n + b}; }
    std::string to_string() const;
    static MultiIndex parse(const std::string& text);  // "m,n"

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

using TermMap = std::map<MultiIndex, RationalCoefficient>;

// dF/dt = sum c_{m,n} d^{m+n}F/dt^m dz^n, truncated at grading weight max_weight.
class Eidf {
public:
    // max_weight is given in units of one half, i.e. max_weight2 = 2 W.
    explicit Eidf(int max_weight2);

    static Eidf canonical_focusing(int max_weight);
    static Eidf bgk_second_order(int max_weight = 2);

    int max_weight2() const { return max_weight2_; }
    double max_weight() const { return 0.5 * max_weight2_; }
    const TermMap& terms() const { return terms_; }
    // Zero when absent.
    RationalCoefficient coefficient(const MultiIndex& idx) const;
    bool has(const MultiIndex& idx) const { return terms_.count(idx) > 0; }
    // Stores c at idx (erases on exact zero). Rejects (0,0), (1,0) and keys above the weight cap.
    void set(const MultiIndex& idx, const RationalCoefficient& c);
    // Same Eidf with a different weight cap (dropping terms above it).
    Eidf truncated(int max_weight2) const;

    std::string to_string() const;

    friend bool operator==(const Eidf& a, const Eidf& b);

private:
    int max_weight2_;
    TermMap terms_;
};

// d^{a+b}/dt^a dz^b applied to an Eidf: F_{lhs} = sum c_k F_{k + (a,b)}.
struct DerivedEquation {
    MultiIndex lhs;
    TermMap terms;
    std::string to_string() const;
};

DerivedEquation apply_derivative(const Eidf& eidf, int a, int b);

// F_target = sum expr[k] F_k (includes the lhs index when target != lhs).
TermMap solve_for(const DerivedEquation& eq, const MultiIndex& target);

// Replace the target term of eidf by the expression, restore the (1,0) normal form and truncate.
Eidf substitute(const Eidf& eidf, const MultiIndex& target, const TermMap& expression);

RationalCoefficient fick_coefficient(const Eidf& eidf);

enum class DioFamily { PzI, PtI, PtzI };

struct DioStep {
    DioFamily family = DioFamily::PzI;
    int a = 0;
    int b = 1;
    MultiIndex target;
    std::string to_string() const;
};

std::optional<DioFamily> parse_family(const std::string& text);
std::string family_name(DioFamily f);

// Validates the family against (a, b), then derivative, solve and substitute.
Eidf apply_dio(const Eidf& eidf, const DioStep& step);
Eidf apply_script(const Eidf& eidf, const std::vector<DioStep>& script);

struct TranscriptEntry {
    std::string label;
    Eidf eidf;
};

// BGK second-order equation -> 2nd-order PzI (target (0,4)) -> 1st-order PtI (target (1,2)), W = 2.
std::vector<TranscriptEntry> gombosi_roundtrip();

// Named DIO scripts applied to the canonical focusing Eidf.
struct NamedScript {
    std::string name;
    int max_weight = 4;
    std::vector<DioStep> steps;
    // True for the first-order PzI family, where the Fick coefficient changes.
    bool mutates_fick = false;
};

std::vector<NamedScript> dio_catalog();

}  // namespace fdiff
