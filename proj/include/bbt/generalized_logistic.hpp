#pragma once

// Three-parameter generalized logistic family GL(phi, eta, gamma):
//
//   p(x) = (1 / B(gamma, eta)) * phi * e^{-phi eta x} / (1 + e^{-phi x})^{eta + gamma}
//
// The symmetric special case GL3(eta) = GL(1, eta, eta) is the log-strength
// distribution induced by a Beta(eta, eta) prior on the win probability
// against a unit-strength opponent.

#include <stdexcept>

#include "bbt/special_functions.hpp"

namespace bbt {

struct GLParams {
    double phi;    // scale
    double eta;    // right-tail shape
    double gamma;  // left-tail shape

    // GL3(eta): phi = 1, gamma = eta.
    static GLParams gl3(double eta) { return GLParams{1.0, eta, eta}; }

    bool valid() const { return phi > 0.0 && eta > 0.0 && gamma > 0.0; }
};

inline void validate(const GLParams& p) {
    if (!p.valid())
        throw std::domain_error("GLParams: phi, eta, gamma must all be positive");
}

// Log density of GL(phi, eta, gamma) at lambda. The (1 + e^{-phi lambda})
// factor goes through log1p_exp, so the result stays finite for |lambda|
// far past 700.
inline double gl_log_density(double lambda, const GLParams& p) {
    validate(p);
    return std::log(p.phi) - log_beta(p.gamma, p.eta) - p.phi * p.eta * lambda -
           (p.eta + p.gamma) * log1p_exp(-p.phi * lambda);
}

struct GLMoments {
    double mean;
    double variance;
};

// mean = (psi(gamma) - psi(eta)) / phi, variance = (psi'(gamma) + psi'(eta)) / phi^2.
inline GLMoments gl_moments(const GLParams& p) {
    validate(p);
    return GLMoments{(digamma(p.gamma) - digamma(p.eta)) / p.phi,
                     (trigamma(p.gamma) + trigamma(p.eta)) / (p.phi * p.phi)};
}

}  // namespace bbt
