#include "flatspec/differentials.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

namespace flatspec {

ConeParameter ConeParameter::from_rational(Rational q) {
    ConeParameter p;
    p.exact = q;
    p.value = HighPrec(q.numerator()) / HighPrec(q.denominator());
    return p;
}

ConeParameter ConeParameter::from_real(HighPrec v) {
    ConeParameter p;
    p.value = std::move(v);
    return p;
}

ConeParameter ConeParameter::parse(const std::string& text) {
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const long long num = std::stoll(text.substr(0, slash));
        const long long den = std::stoll(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator in " + text);
        return from_rational(Rational(num, den));
    }
    return from_real(HighPrec(text));
}

bool gauss_bonnet_ok(const DifferentialSpaceQuery& q) {
    bool all_exact = true;
    Rational exact_sum(0);
    HighPrec sum = 0;
    for (const auto& a : q.alphas) {
        sum += a.value;
        if (a.exact)
            exact_sum += *a.exact;
        else
            all_exact = false;
    }
    const long long target = 2ll * q.genus - 2;
    if (all_exact) return exact_sum == Rational(target);
    return abs(sum - HighPrec(target)) <= 1e-9;
}

namespace {

// Smallest integer strictly greater than (m) * alpha - r - 1 for one cone
// point; boundary flag set when the float-path bound sits within 1e-9 of an
// integer (the strict inequality would then be decided by rounding noise).
std::pair<long long, bool> k_min_one(const ConeParameter& alpha, long long m, int r) {
    if (alpha.exact) {
        const Rational bound = Rational(m) * *alpha.exact - Rational(r + 1);
        // strictly greater: floor(bound) + 1, with integer bounds exact
        const long long fl = static_cast<long long>(
            std::floor(boost::rational_cast<double>(bound)));
        // rational_cast can round near integers; fix up exactly
        long long k = fl;
        while (Rational(k) <= bound) ++k;
        while (Rational(k - 1) > bound) --k;
        // Integer bounds are decided exactly by the strict inequality, but are
        // flagged since a float path would sit on the knife edge there.
        return {k, bound.denominator() == 1};
    }
    const HighPrec bound = HighPrec(m) * alpha.value - HighPrec(r + 1);
    const HighPrec fl = floor(bound);
    const HighPrec frac = bound - fl;
    const bool boundary = frac <= 1e-9 || frac >= 1 - 1e-9;
    long long k = static_cast<long long>(fl) + 1;
    return {k, boundary};
}

}  // namespace

MinOrders min_orders(const DifferentialSpaceQuery& q) {
    MinOrders mo;
    // Anti-meromorphic spaces mirror the meromorphic ones at the opposite mode.
    const long long m = (q.sign >= 0 ? q.n : -q.n) - 1;
    for (const auto& a : q.alphas) {
        auto [k, flag] = k_min_one(a, m, q.r);
        mo.k_min.push_back(k);
        mo.boundary_flag.push_back(flag);
    }
    return mo;
}

DimensionResult dimension(const DifferentialSpaceQuery& q) {
    if (!gauss_bonnet_ok(q))
        throw std::invalid_argument("cone parameters violate sum(alpha) = 2g - 2");
    DimensionResult res;
    MinOrders mo = min_orders(q);
    for (bool f : mo.boundary_flag) res.boundary_flag = res.boundary_flag || f;
    long long ksum = 0;
    for (long long k : mo.k_min) ksum += k;
    const long long n_eff = q.sign >= 0 ? q.n : -q.n;

    if (q.genus == 0) {
        res.dim = std::max(0ll, -2 * n_eff - ksum + 1);
        res.tag = DimensionTag::Exact;
        return res;
    }
    if (q.genus == 1) {
        // The constant differential is the only candidate: admissible iff its
        // zero orders (all 0) meet every k_min.
        bool ok = true;
        for (long long k : mo.k_min) ok = ok && k <= 0;
        res.dim = ok ? 1 : 0;
        res.tag = DimensionTag::Exact;
        return res;
    }
    // genus >= 2: Riemann-Roch style lower bound only.
    res.tag = DimensionTag::LowerBound;
    res.dim = ksum <= n_eff * (2ll * q.genus - 2) ? q.genus - 1 : 0;
    return res;
}

NonzeroModesReport find_nonzero_modes(int genus, const std::vector<ConeParameter>& alphas,
                                      int r, int sign, int N_scan) {
    if (N_scan < 1) throw std::invalid_argument("scan bound must be >= 1");
    NonzeroModesReport rep;
    for (int n = -N_scan; n <= N_scan; ++n) {
        DifferentialSpaceQuery q{genus, alphas, n, r, sign};
        if (dimension(q).dim > 0) rep.modes.push_back(n);
    }
    rep.density = static_cast<double>(rep.modes.size()) / (2.0 * N_scan + 1.0);
    return rep;
}

}  // namespace flatspec
