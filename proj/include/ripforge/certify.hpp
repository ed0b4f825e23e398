#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ripforge/matrix.hpp"
#include "ripforge/rip.hpp"

namespace ripforge {

/// Outcome of a certification attempt. `certified` holds iff the decision
/// statistic is at or below the threshold; a certifier never claims the
/// property for a matrix that lacks it.
struct CertifierOutcome {
    bool certified;
    double statistic;
    double threshold;

    static CertifierOutcome from(double statistic, double threshold) {
        return {statistic <= threshold, statistic, threshold};
    }
};

/// Thrown when the incoherence certifier is invoked outside the sample-size
/// regime where its threshold is sound.
class RegimeError : public std::runtime_error {
public:
    RegimeError(std::size_t n, double required_n)
        : std::runtime_error("incoherence certifier out of regime: n = " + std::to_string(n) +
                             " but soundness requires n >= " +
                             std::to_string(static_cast<long long>(std::ceil(required_n)))),
          required_n_(required_n) {}
    double required_n() const { return required_n_; }

private:
    double required_n_;
};

/// Exact certifier: certifies iff the exact restricted-isometry margin is at
/// most theta. Sound by construction; cost grows with C(p, k).
inline CertifierOutcome certify_opnorm_exact(const DesignMatrix& X, const RipParams& params,
                                             double cap = kDefaultEnumerationCap) {
    params.validate(X.cols());
    return CertifierOutcome::from(rip_margin_exact(X, params.k, cap), params.theta);
}

// Relative slack on the regime inequality so boundary sample sizes computed
// with rounded logarithms are not rejected; soundness degrades by at most the
// same relative amount.
inline constexpr double kRegimeSlack = 1e-4;

inline double incoherence_regime_required_n(std::size_t k, std::size_t p, double theta,
                                            double sigma) {
    const double kd = static_cast<double>(k);
    return 196.0 * sigma * sigma * sigma * sigma * kd * kd * std::log(static_cast<double>(p)) /
           (theta * theta);
}

/// Polynomial-time incoherence certifier with threshold
/// 14 sigma^2 sqrt(log(p) / n). Sound only when
/// n >= 196 sigma^4 k^2 log(p) / theta^2; outside that regime it refuses to
/// answer rather than risk a false positive.
inline CertifierOutcome certify_incoherence_paper(const DesignMatrix& X, const RipParams& params,
                                                  double sigma) {
    params.validate(X.cols());
    if (!(sigma >= 1.0)) throw std::invalid_argument("certify_incoherence_paper: sigma >= 1");
    const std::size_t n = X.rows(), p = X.cols();
    const double required = incoherence_regime_required_n(params.k, p, params.theta, sigma);
    if (static_cast<double>(n) < required * (1.0 - kRegimeSlack)) throw RegimeError(n, required);
    const double threshold =
        14.0 * sigma * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
    return CertifierOutcome::from(max_incoherence(X), threshold);
}

/// Unconditionally sound incoherence certifier: certifies iff
/// k * max_incoherence(X) <= theta. Each k-subset Gram deviation then has
/// operator norm at most theta by the Gershgorin row-sum bound.
inline CertifierOutcome certify_incoherence_sound(const DesignMatrix& X, const RipParams& params) {
    params.validate(X.cols());
    return CertifierOutcome::from(static_cast<double>(params.k) * max_incoherence(X),
                                  params.theta);
}

enum class CertifierId { OpnormExact, IncoherencePaper, IncoherenceSound };

inline const char* certifier_name(CertifierId id) {
    switch (id) {
        case CertifierId::OpnormExact: return "opnorm-exact";
        case CertifierId::IncoherencePaper: return "incoherence-paper";
        case CertifierId::IncoherenceSound: return "incoherence-sound";
    }
    throw std::logic_error("unreachable");
}

inline CertifierId certifier_from_name(std::string_view name) {
    if (name == "opnorm-exact") return CertifierId::OpnormExact;
    if (name == "incoherence-paper") return CertifierId::IncoherencePaper;
    if (name == "incoherence-sound") return CertifierId::IncoherenceSound;
    throw std::invalid_argument("unknown certifier '" + std::string(name) +
                                "' (expected opnorm-exact, incoherence-paper or incoherence-sound)");
}

inline CertifierOutcome run_certifier(CertifierId id, const DesignMatrix& X,
                                      const RipParams& params, double sigma,
                                      double cap = kDefaultEnumerationCap) {
    switch (id) {
        case CertifierId::OpnormExact: return certify_opnorm_exact(X, params, cap);
        case CertifierId::IncoherencePaper: return certify_incoherence_paper(X, params, sigma);
        case CertifierId::IncoherenceSound: return certify_incoherence_sound(X, params);
    }
    throw std::logic_error("unreachable");
}

}  // namespace ripforge
