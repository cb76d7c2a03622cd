#pragma once

#include <string>

#include "recon/distribution.hpp"

namespace recon {

/// Edwards-Anderson-style order parameters of a magnetization law.
struct MomentTriple {
    double m = 0.0;        // xbar   = E[X^2]
    double m_plus = 0.0;   // xbar+  = E+[X^2]
    double m_minus = 0.0;  // xbar-  = E-[X^2]
    double rho = 0.0;      // xbar+ / xbar, 0 when xbar = 0
};

template <typename S>
MomentTriple moments(const BasicMagnetization<S>& dist) {
    const S ratio = dist.pi_ratio();
    S m{}, mp{}, mm{};
    for (std::size_t i = 0; i < dist.size(); ++i) {
        const S v = dist.values[i];
        const S pv2 = dist.probs[i] * v * v;
        m += pv2;
        mp += pv2 * (S(1) + ratio * v);
        mm += pv2 * (S(1) - v);
    }
    MomentTriple out;
    out.m = to_double(m);
    out.m_plus = to_double(mp);
    out.m_minus = to_double(mm);
    out.rho = out.m > 0.0 ? out.m_plus / out.m : 0.0;
    return out;
}

enum class Classification { subcritical, critical, supercritical };

const char* classification_name(Classification c);

struct KsReport {
    double product = 0.0;  // arity * theta^2
    Classification classification = Classification::subcritical;
};

/// Kesten-Stigum classification of (arity, theta): supercritical when
/// arity * theta^2 > 1, critical at equality (within 1e-12).
KsReport ks_condition(int arity, double theta);

struct BoundReport {
    double theta0 = 0.0;
    double beta = 0.0;       // smallest root of the admissibility quadratic
    double delta_bar = 0.0;  // (1 - theta0) * beta
    double ks_product = 0.0;
    Classification classification = Classification::subcritical;
};

/// Closed-form admissible-asymmetry bound: delta_bar = (1 - theta0) * beta
/// where beta is the smaller root of
/// (1 - theta0) - (4 + 2 theta0) beta + (3 - theta0) beta^2 = 0.
BoundReport delta0_bound(double theta0, int arity = 2);

/// One-step moment recursion bound for the symmetric channel:
/// arity theta^2 m - (arity - 1) theta^4 m^2.
double symmetric_recursion_bound(double m_prev, int arity, double theta);

struct BasicInequalityTerms {
    double A = 0.0;  // rho' + (1 - rho')[(1 - theta) + theta rho'']
    double B = 0.0;  // 1 - rho'[(1 - theta) + theta rho''] / pi_ratio
};

/// The two bracketed quantities of the add-merge moment inequality; the
/// inequality itself requires A - Delta * B >= 0.
BasicInequalityTerms basic_inequality_terms(double rho1, double rho2, double theta,
                                            double pi_ratio);

struct GridCheck {
    double min_gap = 0.0;      // min over the grid of A - Delta * B
    double min_A = 0.0;        // min over the grid of A
    double a_lower = 0.0;      // 1 - pi_ratio^2 |theta|
    double pi_ratio = 0.0;
    bool pass = false;         // min_gap >= -1e-12 and min_A >= a_lower - 1e-12
};

/// Evaluates A - Delta*B over a grid_n x grid_n grid of (rho', rho'') in
/// [0, 1/pi_plus]^2 for the channel (theta, delta).
GridCheck basic_inequality_grid(double theta, double delta, int grid_n = 101);

/// Empirically largest delta for which the grid check still passes at |theta|.
/// Reported as an observation, never as a certified bound.
double empirical_delta_search(double theta, int grid_n = 101);

struct IdentityReport {
    struct Item {
        std::string name;
        double residual;
    };
    std::vector<Item> items;
    double max_residual = 0.0;
    double tol = 0.0;
    bool pass = false;
    bool mixed_sign_theta = false;
};

namespace detail {

/// Largest atom mismatch between two laws whose values should agree within
/// value_tol; unmatched atoms count with their full probability.
template <typename S>
double distribution_discrepancy(const BasicMagnetization<S>& a, const BasicMagnetization<S>& b,
                                double value_tol = 1e-9) {
    double worst = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double va = to_double(a.values[i]), vb = to_double(b.values[j]);
        if (std::abs(va - vb) <= value_tol) {
            worst = std::max(worst, std::abs(to_double(a.probs[i]) - to_double(b.probs[j])));
            ++i;
            ++j;
        } else if (va < vb) {
            worst = std::max(worst, to_double(a.probs[i++]));
        } else {
            worst = std::max(worst, to_double(b.probs[j++]));
        }
    }
    for (; i < a.size(); ++i) worst = std::max(worst, to_double(a.probs[i]));
    for (; j < b.size(); ++j) worst = std::max(worst, to_double(b.probs[j]));
    return worst;
}

}  // namespace detail

/// Evaluates the structural identities of the magnetization calculus on a
/// brute-forceable tree and reports the residuals: Radon-Nikodym mixture and
/// normalization, the first-moment tilting identities, the
/// child-magnetization moment relations, the edge-prepend scaling (both
/// pointwise over configurations and in second moment), and the
/// subtree-merge formula against the direct posterior.
template <typename S>
IdentityReport verify_identities(const BasicTreeSpec<S>& tree, double tol);

}  // namespace recon

#include "recon/analysis_impl.hpp"
