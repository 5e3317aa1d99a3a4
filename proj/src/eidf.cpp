#include "fdiff/eidf.hpp"

#include "fdiff/errors.hpp"

#include <sstream>

namespace fdiff {

namespace {

std::string derivative_name(const MultiIndex& idx) {
    auto part = [](char c, int k) {
        if (k <= 3) return std::string(static_cast<std::size_t>(k), c);
        return std::string(1, c) + std::to_string(k);
    };
    return "F_" + part('t', idx.m) + part('z', idx.n);
}

std::string terms_to_string(const TermMap& terms) {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [idx, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.to_string() << ") " << derivative_name(idx);
    }
    return os.str();
}

void add_into(TermMap& terms, const MultiIndex& idx, const RationalCoefficient& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms.emplace(idx, c);
    if (!inserted) {
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

void check_family(const DioStep& step) {
    bool ok = false;
    switch (step.family) {
        case DioFamily::PzI:
            ok = step.a == 0 && step.b >= 1;
            break;
        case DioFamily::PtI:
            ok = step.a >= 1 && step.b == 0;
            break;
        case DioFamily::PtzI:
            ok = step.a >= 1 && step.b >= 1;
            break;
    }
    if (!ok) {
        throw AlgebraError("derivative orders (" + std::to_string(step.a) + "," + std::to_string(step.b) +
                           ") do not belong to family " + family_name(step.family));
    }
}

}  // namespace

std::string MultiIndex::to_string() const { return std::to_string(m) + "," + std::to_string(n); }

MultiIndex MultiIndex::parse(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) throw AlgebraError("multi-index '" + text + "' is not of the form m,n");
    try {
        std::size_t used_m = 0;
        std::size_t used_n = 0;
        auto trim = [](std::string part) {
            auto first = part.find_first_not_of(" \t");
            auto last = part.find_last_not_of(" \t");
            return first == std::string::npos ? std::string() : part.substr(first, last - first + 1);
        };
        std::string left = trim(text.substr(0, comma));
        std::string right = trim(text.substr(comma + 1));
        int m = std::stoi(left, &used_m);
        int n = std::stoi(right, &used_n);
        if (used_m != left.size() || used_n != right.size() || m < 0 || n < 0) throw std::invalid_argument(text);
        return {m, n};
    } catch (const std::logic_error&) {
        throw AlgebraError("multi-index '" + text + "' is not of the form m,n with m, n >= 0");
    }
}

Eidf::Eidf(int max_weight2) : max_weight2_(max_weight2) {
    if (max_weight2 < 2) throw AlgebraError("truncation weight must be at least 1");
}

Eidf Eidf::canonical_focusing(int max_weight) {
    if (max_weight < 2) throw AlgebraError("canonical EIDF needs max_weight >= 2");
    Eidf e(2 * max_weight);
    // Every term carries at least one z-derivative; only the convection term has a minus sign.
    for (int m = 0; 2 * m + 1 <= 2 * max_weight; ++m) {
        for (int n = 1; 2 * m + n <= 2 * max_weight; ++n) {
            MultiIndex idx{m, n};
            RationalCoefficient c(kappa(m, n));
            e.set(idx, (m == 0 && n == 1) ? -c : c);
        }
    }
    return e;
}

Eidf Eidf::bgk_second_order(int max_weight) {
    Atom v = Atom::symbol("v");
    Atom lambda = Atom::symbol("lambda");
    Polynomial pv(v);
    Polynomial pl(lambda);
    Eidf e(2 * max_weight);
    e.set({0, 2}, RationalCoefficient(pv * pl) * RationalCoefficient::fraction(1, 3));
    e.set({1, 2}, RationalCoefficient(pl * pl) * RationalCoefficient::fraction(-2, 3));
    e.set({0, 4}, RationalCoefficient(pv * pl * pl * pl) * RationalCoefficient::fraction(1, 5));
    return e;
}

RationalCoefficient Eidf::coefficient(const MultiIndex& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? RationalCoefficient(0) : it->second;
}

void Eidf::set(const MultiIndex& idx, const RationalCoefficient& c) {
    if (idx.m < 0 || idx.n < 0) throw AlgebraError("negative derivative order");
    if (idx == MultiIndex{0, 0} || idx == MultiIndex{1, 0}) {
        throw AlgebraError("EIDF terms cannot sit at (0,0) or (1,0)");
    }
    if (idx.weight2() > max_weight2_) {
        throw AlgebraError("term " + idx.to_string() + " exceeds the truncation weight");
    }
    if (c.is_zero()) {
        terms_.erase(idx);
    } else {
        terms_[idx] = c;
    }
}

Eidf Eidf::truncated(int max_weight2) const {
    Eidf out(max_weight2);
    for (const auto& [idx, c] : terms_) {
        if (idx.weight2() <= max_weight2) out.terms_.emplace(idx, c);
    }
    return out;
}

std::string Eidf::to_string() const { return "F_t = " + terms_to_string(terms_); }

bool operator==(const Eidf& a, const Eidf& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    auto i = a.terms_.begin();
    auto j = b.terms_.begin();
    for (; i != a.terms_.end(); ++i, ++j) {
        if (i->first != j->first || !i->second.equivalent(j->second)) return false;
    }
    return true;
}

std::string DerivedEquation::to_string() const {
    return derivative_name(lhs) + " = " + terms_to_string(terms);
}

DerivedEquation apply_derivative(const Eidf& eidf, int a, int b) {
    if (a < 0 || b < 0 || (a == 0 && b == 0)) throw AlgebraError("derivative orders must be nonnegative, not both zero");
    DerivedEquation eq;
    eq.lhs = MultiIndex{1, 0}.shifted(a, b);
    for (const auto& [idx, c] : eidf.terms()) eq.terms.emplace(idx.shifted(a, b), c);
    return eq;
}

TermMap solve_for(const DerivedEquation& eq, const MultiIndex& target) {
    if (target == eq.lhs) return eq.terms;
    auto it = eq.terms.find(target);
    if (it == eq.terms.end() || it->second.is_zero()) {
        throw AlgebraError("target " + target.to_string() + " is absent from the derived equation");
    }
    RationalCoefficient inv = it->second.inverse();
    TermMap out;
    out.emplace(eq.lhs, inv);
    for (const auto& [idx, c] : eq.terms) {
        if (idx == target) continue;
        add_into(out, idx, -(c * inv));
    }
    return out;
}

Eidf substitute(const Eidf& eidf, const MultiIndex& target, const TermMap& expression) {
    auto it = eidf.terms().find(target);
    if (it == eidf.terms().end()) throw AlgebraError("target " + target.to_string() + " is absent from the EIDF");
    const RationalCoefficient& ct = it->second;

    TermMap raw = eidf.terms();
    raw.erase(target);
    for (const auto& [idx, c] : expression) add_into(raw, idx, ct * c);

    if (raw.count({0, 0})) throw AlgebraError("substitution produced an undifferentiated F term");
    auto self = raw.find({1, 0});
    RationalCoefficient scale(1);
    if (self != raw.end()) {
        // F_t = c F_t + rest  =>  F_t = rest / (1 - c)
        RationalCoefficient denom = RationalCoefficient(1) - self->second;
        if (denom.is_zero()) throw AlgebraError("degenerate normalization: F_t coefficient is exactly 1");
        scale = denom.inverse();
        raw.erase(self);
    }

    Eidf out(eidf.max_weight2());
    for (const auto& [idx, c] : raw) {
        if (idx.weight2() > out.max_weight2()) continue;
        out.set(idx, scale.is_one() ? c : c * scale);
    }
    return out;
}

RationalCoefficient fick_coefficient(const Eidf& eidf) { return eidf.coefficient({0, 2}); }

std::optional<DioFamily> parse_family(const std::string& text) {
    if (text == "PzI") return DioFamily::PzI;
    if (text == "PtI") return DioFamily::PtI;
    if (text == "PtzI") return DioFamily::PtzI;
    return std::nullopt;
}

std::string family_name(DioFamily f) {
    switch (f) {
        case DioFamily::PzI:
            return "PzI";
        case DioFamily::PtI:
            return "PtI";
        case DioFamily::PtzI:
            return "PtzI";
    }
    return "?";
}

std::string DioStep::to_string() const {
    return family_name(family) + "(" + std::to_string(a) + "," + std::to_string(b) + ") -> R[" + target.to_string() +
           "]";
}

Eidf apply_dio(const Eidf& eidf, const DioStep& step) {
    check_family(step);
    DerivedEquation eq = apply_derivative(eidf, step.a, step.b);
    TermMap expr = solve_for(eq, step.target);
    return substitute(eidf, step.target, expr);
}

Eidf apply_script(const Eidf& eidf, const std::vector<DioStep>& script) {
    Eidf current = eidf;
    for (const auto& step : script) current = apply_dio(current, step);
    return current;
}

std::vector<TranscriptEntry> gombosi_roundtrip() {
    std::vector<TranscriptEntry> out;
    Eidf start = Eidf::bgk_second_order(2);
    out.push_back({"BGK second-order equation", start});
    Eidf step1 = apply_dio(start, {DioFamily::PzI, 0, 2, {0, 4}});
    out.push_back({"after 2nd-order PzI, R_zzzz", step1});
    Eidf step2 = apply_dio(step1, {DioFamily::PtI, 1, 0, {1, 2}});
    out.push_back({"after 1st-order PtI, R_tzz (telegraph form)", step2});
    return out;
}

std::vector<NamedScript> dio_catalog() {
    std::vector<NamedScript> out;
    auto pzi = [](int b, MultiIndex t) { return DioStep{DioFamily::PzI, 0, b, t}; };
    auto pti = [](int a, MultiIndex t) { return DioStep{DioFamily::PtI, a, 0, t}; };
    auto ptzi = [](int a, int b, MultiIndex t) { return DioStep{DioFamily::PtzI, a, b, t}; };
    auto label = [](const std::string& base, MultiIndex t) { return base + " [" + t.to_string() + "]"; };

    out.push_back({"R_tz of 1st PzI", 4, {pzi(1, {1, 1})}, true});
    out.push_back({"R_zzz of 1st PzI", 4, {pzi(1, {0, 3})}, true});
    for (MultiIndex t : std::vector<MultiIndex>{MultiIndex{1, 2}, {1, 3}, {2, 2}, {2, 3}, {3, 2}, {1, 4}, {0, 4}}) {
        out.push_back({label("R_it(j+1)z of 1st PzI", t), 4, {pzi(1, t)}, true});
    }
    out.push_back({"R_tzz of 2nd PzI", 4, {pzi(2, {1, 2})}, false});
    for (MultiIndex t : std::vector<MultiIndex>{MultiIndex{1, 3}, {1, 4}, {2, 3}}) {
        out.push_back({label("R_itjz of 2nd PzI", t), 4, {pzi(2, t)}, false});
    }
    for (MultiIndex t : std::vector<MultiIndex>{MultiIndex{2, 1}, {1, 2}, {2, 2}, {1, 3}}) {
        out.push_back({label("lowest PtzI", t), 4, {ptzi(1, 1, t)}, false});
    }
    out.push_back({"R_tz of 1st PtI", 4, {pti(1, {1, 1})}, false});
    out.push_back({"R_tzz of 1st PtI", 4, {pti(1, {1, 2})}, false});
    for (MultiIndex t : std::vector<MultiIndex>{MultiIndex{2, 1}, {2, 2}, {3, 1}}) {
        out.push_back({label("R_ntmz of 1st PtI", t), 4, {pti(1, t)}, false});
    }
    out.push_back({"R_ttz of 2nd PtI", 4, {pti(2, {2, 1})}, false});
    out.push_back({"R_ttzz of 2nd PtI", 4, {pti(2, {2, 2})}, false});
    out.push_back({"R_tttz of 3rd PtI", 4, {pti(3, {3, 1})}, false});
    for (int i = 1; i <= 4; ++i) {
        // (4,1) has weight 4.5 and needs a W = 5 table.
        int w = i == 4 ? 5 : 4;
        out.push_back({"R_itz of i-th PtI [i=" + std::to_string(i) + "]", w, {pti(i, {i, 1})}, false});
    }
    for (int i = 2; i <= 4; ++i) {
        int w = i == 4 ? 5 : 4;
        out.push_back({"R_tz of 1st PtI + R_itz of i-th PtI [i=" + std::to_string(i) + "]", w,
                       {pti(1, {1, 1}), pti(i, {i, 1})}, false});
    }
    return out;
}

}  // namespace fdiff
