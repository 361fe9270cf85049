#pragma once

#include "fawp/core_types.hpp"

namespace fawp {

/// Infinite-precision Wiener-filter precoder. The precoding matrix is Q / beta;
/// it is never formed explicitly.
struct WfPrecoder {
    CMatrix q;          // B x U
    double kappa = 0.0; // U N0 / P
    double beta = 1.0;  // sqrt(tr(Q^H Q) Es / P)
};

/// Regularization constant U N0 / P.
double compute_kappa(const SystemConfig& cfg);

/// (H^H H + kappa I_B)^{-1} H^H through a Cholesky solve of the B x B system.
/// kappa == 0 falls back to a least-squares (minimum-norm) solve and throws
/// std::runtime_error when H does not have full row rank.
CMatrix wf_direct(const ChannelMatrix& h, double kappa);

/// H^H (H H^H + kappa I_U)^{-1}, O(B U^2). Throws std::runtime_error when the
/// U x U system is not positive definite.
CMatrix wf_woodbury(const ChannelMatrix& h, double kappa);

/// sqrt(tr(Q^H Q) Es / P). Throws std::invalid_argument for an all-zero Q.
double compute_beta(const CMatrix& q, double symbol_energy, double total_power);

/// E||s − ŝ||² for x = Q s / beta: Es ||I_U − H Q||_F² + beta² U N0.
double mse(const ChannelMatrix& h, const CMatrix& q, double beta, double symbol_energy,
           double noise_variance);

/// Woodbury-form WF precoder for the given system.
WfPrecoder make_wf_precoder(const ChannelMatrix& h, const SystemConfig& cfg);

} // namespace fawp
