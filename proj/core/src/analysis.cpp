#include "recon/analysis.hpp"

#include <cmath>
#include <limits>

namespace recon {

const char* classification_name(Classification c) {
    switch (c) {
        case Classification::subcritical: return "subcritical";
        case Classification::critical: return "critical";
        case Classification::supercritical: return "supercritical";
    }
    return "?";
}

KsReport ks_condition(int arity, double theta) {
    if (arity < 1) throw std::invalid_argument("ks_condition: arity must be >= 1");
    KsReport report;
    report.product = arity * theta * theta;
    if (std::abs(report.product - 1.0) <= 1e-12)
        report.classification = Classification::critical;
    else if (report.product > 1.0)
        report.classification = Classification::supercritical;
    else
        report.classification = Classification::subcritical;
    return report;
}

BoundReport delta0_bound(double theta0, int arity) {
    if (!(theta0 >= 0.0 && theta0 < 1.0))
        throw std::invalid_argument("delta0_bound: theta0 must lie in [0,1)");
    const double a = 3.0 - theta0;
    const double b = -(4.0 + 2.0 * theta0);
    const double c = 1.0 - theta0;
    // q-form of the quadratic formula: the small root c/q avoids cancellation
    const double q = 0.5 * (std::abs(b) + std::sqrt(b * b - 4.0 * a * c));
    BoundReport report;
    report.theta0 = theta0;
    report.beta = c / q;
    report.delta_bar = (1.0 - theta0) * report.beta;
    const KsReport ks = ks_condition(arity, theta0);
    report.ks_product = ks.product;
    report.classification = ks.classification;
    return report;
}

double symmetric_recursion_bound(double m_prev, int arity, double theta) {
    const double t2 = theta * theta;
    return arity * t2 * m_prev - (arity - 1) * t2 * t2 * m_prev * m_prev;
}

BasicInequalityTerms basic_inequality_terms(double rho1, double rho2, double theta,
                                            double pi_ratio) {
    if (std::abs(theta) >= 1.0)
        throw std::invalid_argument("basic_inequality_terms: |theta| must be < 1");
    if (pi_ratio < 1.0)
        throw std::invalid_argument("basic_inequality_terms: pi_ratio must be >= 1");
    const double rho_max = (1.0 + pi_ratio) * (1.0 + 1e-12) + 1e-12;  // 1/pi_plus, ulp-tolerant
    if (rho1 < -1e-12 || rho1 > rho_max || rho2 < -1e-12 || rho2 > rho_max)
        throw std::invalid_argument("basic_inequality_terms: rho outside [0, 1/pi_plus]");
    const double bracket = (1.0 - theta) + theta * rho2;
    BasicInequalityTerms terms;
    terms.A = rho1 + (1.0 - rho1) * bracket;
    terms.B = 1.0 - rho1 * bracket / pi_ratio;
    return terms;
}

GridCheck basic_inequality_grid(double theta, double delta, int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("basic_inequality_grid: need grid_n >= 2");
    const Channel ch = channel_from_theta_delta(theta, delta);
    const double ratio = ch.pi_ratio();
    const double Delta = ratio - 1.0;
    const double rho_max = 1.0 / ch.pi_plus;
    GridCheck check;
    check.pi_ratio = ratio;
    check.a_lower = 1.0 - ratio * ratio * std::abs(theta);
    check.min_gap = std::numeric_limits<double>::infinity();
    check.min_A = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_n; ++i) {
        const double rho1 = rho_max * i / (grid_n - 1);
        for (int j = 0; j < grid_n; ++j) {
            const double rho2 = rho_max * j / (grid_n - 1);
            const auto [A, B] = basic_inequality_terms(rho1, rho2, theta, ratio);
            check.min_gap = std::min(check.min_gap, A - Delta * B);
            check.min_A = std::min(check.min_A, A);
        }
    }
    check.pass = check.min_gap >= -1e-12 && check.min_A >= check.a_lower - 1e-12;
    return check;
}

double empirical_delta_search(double theta, int grid_n) {
    const double abs_theta = std::abs(theta);
    double lo = 0.0;                       // grid check passes here
    double hi = (1.0 - abs_theta) - 1e-9;  // largest constructible delta
    if (hi <= 0.0) return 0.0;
    if (basic_inequality_grid(theta, hi, grid_n).min_gap >= 0.0) return hi;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (basic_inequality_grid(theta, mid, grid_n).min_gap >= 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

}  // namespace recon
