#include "fawp/wf_precoder.hpp"

#include <cmath>
#include <stdexcept>

namespace fawp {

namespace {

// Cholesky factorization that refuses numerically singular systems.
Eigen::LLT<CMatrix> factor_hpd(const CMatrix& m) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("system matrix is not positive definite");
    const RVector diag = llt.matrixLLT().diagonal().real();
    const double tol = 1e-12 * std::sqrt(m.diagonal().real().cwiseAbs().maxCoeff());
    if (diag.minCoeff() <= tol) throw std::runtime_error("system matrix is numerically singular");
    return llt;
}

} // namespace

double compute_kappa(const SystemConfig& cfg) {
    return cfg.num_ues * cfg.noise_variance / cfg.total_power;
}

CMatrix wf_direct(const ChannelMatrix& h, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    const CMatrix& hm = h.matrix();
    if (kappa == 0.0) {
        Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(hm);
        if (cod.rank() < hm.rows()) throw std::runtime_error("channel is rank deficient at kappa = 0");
        return cod.pseudoInverse();
    }
    CMatrix gram = hm.adjoint() * hm;
    gram.diagonal().array() += kappa;
    return factor_hpd(gram).solve(hm.adjoint());
}

CMatrix wf_woodbury(const ChannelMatrix& h, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    const CMatrix& hm = h.matrix();
    CMatrix gram = hm * hm.adjoint();
    gram.diagonal().array() += kappa;
    // Q = H^H G^{-1} = (G^{-1} H)^H since G is Hermitian.
    return factor_hpd(gram).solve(hm).adjoint();
}

double compute_beta(const CMatrix& q, double symbol_energy, double total_power) {
    const double tr = q.squaredNorm();
    if (!(tr > 0.0)) throw std::invalid_argument("precoding matrix is all-zero");
    return std::sqrt(tr * symbol_energy / total_power);
}

double mse(const ChannelMatrix& h, const CMatrix& q, double beta, double symbol_energy,
           double noise_variance) {
    const CMatrix& hm = h.matrix();
    if (q.rows() != hm.cols() || q.cols() != hm.rows())
        throw std::invalid_argument("precoder dimensions do not match channel");
    CMatrix residual = -hm * q;
    residual.diagonal().array() += 1.0;
    return symbol_energy * residual.squaredNorm() + beta * beta * hm.rows() * noise_variance;
}

WfPrecoder make_wf_precoder(const ChannelMatrix& h, const SystemConfig& cfg) {
    WfPrecoder p;
    p.kappa = compute_kappa(cfg);
    p.q = wf_woodbury(h, p.kappa);
    p.beta = compute_beta(p.q, cfg.symbol_energy, cfg.total_power);
    return p;
}

} // namespace fawp
