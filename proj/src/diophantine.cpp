#include "flatspec/diophantine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace flatspec {

double simultaneous_distance(const std::vector<double>& angles, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    double q = 0.0;
    for (double th : angles) q += dist_to_int(static_cast<double>(n) * th);
    return q;
}

DiophantineReport verify_condition(const std::vector<double>& angles, double gamma,
                                   std::int64_t N, bool keep_records) {
    if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
    if (N < 2) throw std::invalid_argument("N must be >= 2");
    DiophantineReport rep;
    rep.angles = angles;
    rep.N = N;
    rep.gamma = gamma;
    rep.holds_on_scan = true;
    rep.C_effective = std::numeric_limits<double>::infinity();
    rep.gamma_below_1_over_d = gamma < 1.0 / static_cast<double>(angles.size());

    double record = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= N; ++n) {
        const double q = simultaneous_distance(angles, n);
        if (q == 0.0) {
            rep.holds_on_scan = false;
            rep.C_effective = 0.0;
            rep.argmin_n = n;
            if (keep_records) rep.records.push_back({n, 0.0, 0.0});
            return rep;
        }
        const double w = std::pow(static_cast<double>(n), gamma) * q;
        if (w < rep.C_effective) {
            rep.C_effective = w;
            rep.argmin_n = n;
        }
        if (keep_records && q < record) {
            record = q;
            rep.records.push_back({n, q, w});
        }
    }

    // Envelope fit: least-squares slope of -log q_n vs log n on record minima.
    // The envelope, not the bulk, carries the Diophantine exponent.
    if (rep.records.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(rep.records.size());
        for (const auto& r : rep.records) {
            const double x = std::log(static_cast<double>(r.n));
            const double y = -std::log(r.q_n);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double den = m * sxx - sx * sx;
        if (den > 0) {
            rep.fitted_gamma = (m * sxy - sx * sy) / den;
            const double intercept = (sy - rep.fitted_gamma * sx) / m;
            rep.fitted_C = std::exp(-intercept);
        }
    }
    return rep;
}

std::vector<Convergent> continued_fraction(double theta, int depth) {
    if (depth < 0 || depth > 64) throw std::invalid_argument("depth must be in [0, 64]");
    std::vector<Convergent> out;
    double x = theta - std::floor(theta);
    if (x == 0.0) return out;

    std::int64_t p_prev = 1, q_prev = 0;       // p_{-1}/q_{-1}
    std::int64_t p_cur = static_cast<std::int64_t>(std::floor(theta)), q_cur = 1;  // p_0/q_0
    for (int k = 0; k < depth; ++k) {
        if (x < 1e-14) break;  // numerically rational: expansion terminated
        x = 1.0 / x;
        const double fa = std::floor(x);
        if (fa > 9.0e15) break;  // past double precision
        const std::int64_t a = static_cast<std::int64_t>(fa);
        if (q_cur > 0 && a > (std::numeric_limits<std::int64_t>::max() - q_prev) / q_cur)
            break;  // denominator overflow
        const std::int64_t p = a * p_cur + p_prev;
        const std::int64_t q = a * q_cur + q_prev;
        out.push_back({a, p, q});
        p_prev = p_cur;
        q_prev = q_cur;
        p_cur = p;
        q_cur = q;
        x -= fa;
    }
    return out;
}

}  // namespace flatspec
