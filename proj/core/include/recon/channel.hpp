#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "recon/rational.hpp"

namespace recon {

enum class Spin : int { plus = 0, minus = 1 };

namespace detail {
inline bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
inline bool near(const Rational& a, const Rational& b, const Rational&) { return a == b; }
inline double abs_of(double x) { return std::abs(x); }
inline Rational abs_of(const Rational& x) { return x < 0 ? Rational(-x) : x; }
}  // namespace detail

/// Binary asymmetric channel in both parameterizations.
///
/// Row s of the transition matrix gives the child-state law given parent
/// state s; the second eigenvalue is theta and (pi_plus, pi_minus) is the
/// stationary distribution. Canonical form has delta >= 0 (swapped records
/// whether the state labels were exchanged to reach it).
template <typename S>
struct BasicChannel {
    S theta{};
    S delta{};
    S eps_plus{};   // P(child = - | parent = +)
    S eps_minus{};  // P(child = - | parent = -)
    S pi_plus{};
    S pi_minus{};
    bool swapped = false;

    S pi_ratio() const { return pi_minus / pi_plus; }  // pi_{-/+} >= 1 canonically
    S asym() const { return pi_ratio() - 1; }          // Delta = pi_{-/+} - 1

    /// Transition probability from parent state `from` to child state `to`.
    S transition(Spin from, Spin to) const {
        const S to_minus = (from == Spin::plus) ? eps_plus : eps_minus;
        return (to == Spin::minus) ? to_minus : S(1) - to_minus;
    }

    bool same_stationary(const BasicChannel& other, double tol = 1e-9) const {
        return detail::near(pi_plus, other.pi_plus, S(tol)) &&
               detail::near(pi_minus, other.pi_minus, S(tol));
    }
};

using Channel = BasicChannel<double>;
using ExactChannel = BasicChannel<Rational>;

struct DerivedParams {
    double pi_ratio;  // pi_{-/+}
    double Delta;     // pi_{-/+} - 1
};

template <typename S>
BasicChannel<S> channel_from_theta_delta(S theta, S delta) {
    if (detail::abs_of(theta) >= S(1))
        throw std::invalid_argument("channel: |theta| must be < 1");
    bool swapped = false;
    if (delta < S(0)) {  // relabel +/- so that pi_minus >= pi_plus
        delta = -delta;
        swapped = true;
    }
    const S eps_plus = (S(1) - theta + delta) / 2;
    const S eps_minus = (S(1) + theta + delta) / 2;
    if (eps_plus < S(0) || eps_plus > S(1) || eps_minus < S(0) || eps_minus > S(1))
        throw std::invalid_argument("channel: flip probabilities outside [0,1] (need |delta| <= 1-|theta|)");
    // (1 - eps_minus)/(1 - theta) rewritten so delta = 0 gives exactly 1/2
    const S half_gap = delta / (2 * (S(1) - theta));
    const S pi_plus = S(1) / 2 - half_gap;
    const S pi_minus = S(1) / 2 + half_gap;
    if (pi_plus <= S(0) || pi_minus <= S(0))
        throw std::invalid_argument("channel: stationary distribution not interior");
    BasicChannel<S> ch;
    ch.theta = theta;
    ch.delta = delta;
    ch.eps_plus = eps_plus;
    ch.eps_minus = eps_minus;
    ch.pi_plus = pi_plus;
    ch.pi_minus = pi_minus;
    ch.swapped = swapped;
    return ch;
}

template <typename S>
BasicChannel<S> channel_from_flip_probs(S eps_plus, S eps_minus) {
    if (eps_plus < S(0) || eps_plus > S(1) || eps_minus < S(0) || eps_minus > S(1))
        throw std::invalid_argument("channel: flip probabilities must lie in [0,1]");
    const S theta = eps_minus - eps_plus;
    if (detail::abs_of(theta) >= S(1))
        throw std::invalid_argument("channel: |eps_minus - eps_plus| must be < 1");
    const S delta = eps_plus + eps_minus - S(1);
    return channel_from_theta_delta(theta, delta);
}

template <typename S>
DerivedParams derived_params(const BasicChannel<S>& ch) {
    return DerivedParams{to_double(ch.pi_ratio()), to_double(ch.asym())};
}

inline Channel to_double_channel(const ExactChannel& ch) {
    Channel out;
    out.theta = to_double(ch.theta);
    out.delta = to_double(ch.delta);
    out.eps_plus = to_double(ch.eps_plus);
    out.eps_minus = to_double(ch.eps_minus);
    out.pi_plus = to_double(ch.pi_plus);
    out.pi_minus = to_double(ch.pi_minus);
    out.swapped = ch.swapped;
    return out;
}

}  // namespace recon
