#include "fawp/downlink.hpp"

#include "fawp/wf_precoder.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace fawp {

PrecoderVariant parse_precoder_variant(std::string_view name) {
    if (name == "wf") return PrecoderVariant::WF;
    if (name == "mrt") return PrecoderVariant::MRT;
    if (name == "pre-fawp-wf") return PrecoderVariant::PreFawpWf;
    if (name == "post-fawp-wf") return PrecoderVariant::PostFawpWf;
    if (name == "pre-fawp-fbs") return PrecoderVariant::PreFawpFbs;
    if (name == "post-fawp-fbs") return PrecoderVariant::PostFawpFbs;
    throw std::invalid_argument("unknown precoder '" + std::string(name) + "'");
}

std::string_view precoder_variant_name(PrecoderVariant v) {
    switch (v) {
    case PrecoderVariant::WF: return "wf";
    case PrecoderVariant::MRT: return "mrt";
    case PrecoderVariant::PreFawpWf: return "pre-fawp-wf";
    case PrecoderVariant::PostFawpWf: return "post-fawp-wf";
    case PrecoderVariant::PreFawpFbs: return "pre-fawp-fbs";
    case PrecoderVariant::PostFawpFbs: return "post-fawp-fbs";
    }
    return "?";
}

bool is_fawp(PrecoderVariant v) { return v != PrecoderVariant::WF && v != PrecoderVariant::MRT; }

bool is_fbs(PrecoderVariant v) {
    return v == PrecoderVariant::PreFawpFbs || v == PrecoderVariant::PostFawpFbs;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

PrecoderHandle::PrecoderHandle(PrecoderVariant variant, Payload payload, double symbol_energy,
                               double total_power)
    : variant_(variant), payload_(std::move(payload)) {
    // tr(Q^H Q) from the native structure; the dense Q is never formed here.
    const double tr = std::visit(
        overloaded{
            [](const CMatrix& q) { return q.squaredNorm(); },
            [](const PreFawpMatrix& m) {
                return (m.a.colwise().squaredNorm().transpose().cwiseProduct(m.alpha.cwiseAbs2())).sum();
            },
            [](const PostFawpMatrix& m) {
                return (m.z.colwise().squaredNorm().transpose().cwiseProduct(m.zeta.cwiseAbs2())).sum();
            },
        },
        payload_);
    if (!(tr > 0.0)) throw std::invalid_argument("precoding matrix is all-zero");
    beta_ = std::sqrt(tr * symbol_energy / total_power);
}

int PrecoderHandle::num_antennas() const {
    return std::visit(overloaded{[](const CMatrix& q) { return static_cast<int>(q.rows()); },
                                 [](const auto& m) { return m.num_antennas(); }},
                      payload_);
}

int PrecoderHandle::num_ues() const {
    return std::visit(overloaded{[](const CMatrix& q) { return static_cast<int>(q.cols()); },
                                 [](const auto& m) { return m.num_ues(); }},
                      payload_);
}

CVector PrecoderHandle::apply(const SymbolVector& s) const {
    return std::visit(overloaded{[&](const CMatrix& q) -> CVector { return q * s; },
                                 [&](const PreFawpMatrix& m) { return apply_pre(m, s); },
                                 [&](const PostFawpMatrix& m) { return apply_post(m, s); }},
                      payload_);
}

CMatrix PrecoderHandle::equivalent() const {
    return std::visit(overloaded{[](const CMatrix& q) { return q; },
                                 [](const auto& m) { return m.equivalent(); }},
                      payload_);
}

PrecoderHandle build_precoder(const PrecoderSpec& spec, const ChannelMatrix& h, const SystemConfig& cfg) {
    const double kappa = compute_kappa(cfg);
    const double es = cfg.symbol_energy;
    const double p = cfg.total_power;
    switch (spec.variant) {
    case PrecoderVariant::WF:
        return {spec.variant, wf_woodbury(h, kappa), es, p};
    case PrecoderVariant::MRT:
        return {spec.variant, CMatrix(h.matrix().adjoint()), es, p};
    case PrecoderVariant::PreFawpWf:
        return {spec.variant, quantize_pre(h, wf_woodbury(h, kappa), kappa, make_alphabet(spec.bits)), es, p};
    case PrecoderVariant::PostFawpWf:
        return {spec.variant, quantize_post(h, wf_woodbury(h, kappa), kappa, make_alphabet(spec.bits)), es, p};
    case PrecoderVariant::PreFawpFbs:
        return {spec.variant, pre_fawp_fbs_matrix(h, kappa, make_alphabet(spec.bits), spec.params), es, p};
    case PrecoderVariant::PostFawpFbs:
        return {spec.variant, post_fawp_fbs_matrix(h, kappa, make_alphabet(spec.bits), spec.params), es, p};
    }
    throw std::invalid_argument("unhandled precoder variant");
}

CVector precode(const PrecoderHandle& handle, const SymbolVector& s) {
    return handle.apply(s) / handle.beta();
}

SymbolVector channel_pass(const ChannelMatrix& h, const CVector& x, double noise_variance,
                          std::mt19937_64& rng) {
    if (x.size() != h.num_antennas()) throw std::invalid_argument("precoded vector length must be B");
    SymbolVector y = h.matrix() * x;
    if (noise_variance > 0.0) {
        std::normal_distribution<double> n(0.0, std::sqrt(noise_variance / 2.0));
        for (Eigen::Index u = 0; u < y.size(); ++u) {
            const double re = n(rng);
            const double im = n(rng);
            y[u] += cdouble(re, im);
        }
    }
    return y;
}

RVector estimate_beta_mle(const SymbolVector& y_pilot, double symbol_energy) {
    RVector out(y_pilot.size());
    const double amp = std::sqrt(symbol_energy);
    for (Eigen::Index u = 0; u < y_pilot.size(); ++u) {
        if (y_pilot[u] == cdouble(0.0, 0.0)) throw std::invalid_argument("received pilot sample is zero");
        const double est = (amp / y_pilot[u]).real();
        out[u] = est > 0.0 ? est : kBetaFloor;
    }
    return out;
}

BetaMode parse_beta_mode(std::string_view name) {
    if (name == "perfect") return BetaMode::Perfect;
    if (name == "mle-pilot" || name == "mle") return BetaMode::MlePilot;
    throw std::invalid_argument("beta mode must be perfect or mle-pilot");
}

std::string_view beta_mode_name(BetaMode m) {
    return m == BetaMode::Perfect ? "perfect" : "mle-pilot";
}

Detection detect(const SymbolVector& y, const RVector& beta_hat, const Constellation& constellation) {
    if (y.size() != beta_hat.size()) throw std::invalid_argument("beta_hat length must match y");
    Detection d;
    d.soft = beta_hat.cast<cdouble>().cwiseProduct(y);
    d.labels.resize(y.size());
    for (Eigen::Index u = 0; u < y.size(); ++u) d.labels[u] = constellation.nearest(d.soft[u]);
    return d;
}

void MetricAccumulator::merge(const MetricAccumulator& other) {
    bit_errors += other.bit_errors;
    bits_sent += other.bits_sent;
    evm_num += other.evm_num;
    evm_den += other.evm_den;
    vectors_sent += other.vectors_sent;
}

double evm(const MetricAccumulator& acc) {
    if (!(acc.evm_den > 0.0)) throw std::invalid_argument("EVM of an empty accumulator");
    return 100.0 * std::sqrt(acc.evm_num / acc.evm_den);
}

double ber(const MetricAccumulator& acc) {
    if (acc.bits_sent <= 0) throw std::invalid_argument("BER of an empty accumulator");
    return static_cast<double>(acc.bit_errors) / static_cast<double>(acc.bits_sent);
}

double ber_stderr(const MetricAccumulator& acc) {
    const double p = ber(acc);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(acc.bits_sent));
}

double evm_threshold_percent(Modulation m) {
    switch (m) {
    case Modulation::QPSK: return 17.5;
    case Modulation::QAM16: return 12.5;
    case Modulation::QAM64: return 8.0;
    case Modulation::QAM256: return 3.5;
    }
    return 0.0;
}

MetricAccumulator simulate_link(const PrecoderHandle& handle, const ChannelMatrix& h, const SystemConfig& cfg,
                                const Constellation& constellation, BetaMode beta_mode, int num_vectors,
                                std::mt19937_64& rng) {
    const int u_cnt = h.num_ues();
    UeState ue;
    ue.mode = beta_mode;
    if (beta_mode == BetaMode::MlePilot) {
        const SymbolVector pilot = SymbolVector::Constant(u_cnt, std::sqrt(cfg.symbol_energy));
        ue.beta_hat = estimate_beta_mle(channel_pass(h, precode(handle, pilot), cfg.noise_variance, rng),
                                        cfg.symbol_energy);
    } else {
        ue.beta_hat = RVector::Constant(u_cnt, handle.beta());
    }

    MetricAccumulator acc;
    std::uniform_int_distribution<int> label_dist(0, constellation.size() - 1);
    std::vector<int> tx(u_cnt);
    SymbolVector s(u_cnt);
    for (int v = 0; v < num_vectors; ++v) {
        for (int u = 0; u < u_cnt; ++u) {
            tx[u] = label_dist(rng);
            s[u] = constellation.points[tx[u]];
        }
        const SymbolVector y = channel_pass(h, precode(handle, s), cfg.noise_variance, rng);
        const Detection d = detect(y, ue.beta_hat, constellation);
        for (int u = 0; u < u_cnt; ++u) {
            acc.bit_errors += std::popcount(static_cast<unsigned>(tx[u] ^ d.labels[u]));
            acc.evm_num += std::norm(d.soft[u] - s[u]);
            acc.evm_den += std::norm(s[u]);
        }
        acc.bits_sent += static_cast<std::int64_t>(u_cnt) * constellation.bits_per_symbol;
        ++acc.vectors_sent;
    }
    return acc;
}

} // namespace fawp
