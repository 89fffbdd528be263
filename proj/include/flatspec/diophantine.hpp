#pragma once

#include <cstdint>
#include <vector>

#include "flatspec/geometry.hpp"

namespace flatspec {

/// q_n = sum_i d(n * theta_i, Z).
double simultaneous_distance(const std::vector<double>& angles, std::int64_t n);

struct ScanRecord {
    std::int64_t n = 0;
    double q_n = 0.0;
    double weighted = 0.0;  // n^gamma * q_n
};

struct DiophantineReport {
    std::vector<double> angles;
    std::int64_t N = 0;
    double gamma = 0.0;
    bool holds_on_scan = false;        // q_n > 0 throughout [1, N]
    double C_effective = 0.0;          // min_{n <= N} n^gamma q_n
    std::int64_t argmin_n = 0;
    std::vector<ScanRecord> records;   // running record minima of q_n
    double fitted_gamma = 0.0;         // least-squares slope on the record envelope
    double fitted_C = 0.0;
    bool gamma_below_1_over_d = false; // informational flag (paper normalizes gamma >= 1/d)
};

/// Scan certificate on [1, N] only; no claim is made beyond the scan bound.
DiophantineReport verify_condition(const std::vector<double>& angles, double gamma,
                                   std::int64_t N, bool keep_records = true);

struct Convergent {
    std::int64_t a = 0;  // partial quotient
    std::int64_t p = 0;
    std::int64_t q = 0;
};

/// Continued-fraction convergents p_k/q_k of theta; terminates early on
/// (numerically) rational input. depth <= 64.
std::vector<Convergent> continued_fraction(double theta, int depth);

}  // namespace flatspec
