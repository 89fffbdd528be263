#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/rational.hpp>
#include <optional>
#include <string>
#include <vector>

namespace flatspec {

using Rational = boost::rational<long long>;
using HighPrec = boost::multiprecision::cpp_bin_float_50;

/// Cone parameter alpha_p, carried either exactly (rational) or to 50 digits.
struct ConeParameter {
    std::optional<Rational> exact;
    HighPrec value;  // always set (equals exact when rational)

    static ConeParameter from_rational(Rational q);
    static ConeParameter from_real(HighPrec v);
    /// Parses "p/q" (exact) or a decimal literal (high precision).
    static ConeParameter parse(const std::string& text);
};

/// Query for the space of r-regular meromorphic (+) / anti-meromorphic (-)
/// sections at fiber mode n on a genus-g surface with the given cone data.
struct DifferentialSpaceQuery {
    int genus = 0;
    std::vector<ConeParameter> alphas;
    int n = 0;
    int r = 0;
    int sign = +1;  // +1 meromorphic, -1 anti-meromorphic
};

/// Validates sum(alpha) = 2g - 2 (exactly for rational data, to 1e-9 otherwise).
bool gauss_bonnet_ok(const DifferentialSpaceQuery& q);

struct MinOrders {
    std::vector<long long> k_min;       // per cone point
    std::vector<bool> boundary_flag;    // bound within 1e-9 of an integer (float path)
};

/// Smallest admissible zero orders: k_p = smallest integer strictly greater
/// than (n-1) alpha_p - r - 1 (n replaced by -n for the anti-meromorphic sign).
MinOrders min_orders(const DifferentialSpaceQuery& q);

enum class DimensionTag { Exact, LowerBound };

struct DimensionResult {
    long long dim = 0;
    DimensionTag tag = DimensionTag::Exact;
    bool boundary_flag = false;
};

/// Dimension of the query space. Genus 0: exact count max(0, -2n - sum k + 1).
/// Genus 1: 1 iff the constant differential is admissible. Genus >= 2: lower
/// bound g - 1 under the admissibility constraint, tagged as such.
DimensionResult dimension(const DifferentialSpaceQuery& q);

struct NonzeroModesReport {
    std::vector<int> modes;  // n in [-N, N] with dim > 0
    double density = 0.0;    // |modes| / (2N + 1)
};

NonzeroModesReport find_nonzero_modes(int genus, const std::vector<ConeParameter>& alphas,
                                      int r, int sign, int N_scan);

}  // namespace flatspec
