#pragma once

#include "fawp/core_types.hpp"
#include "fawp/fawp_matrices.hpp"
#include "fawp/fbs_solver.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fawp {

enum class PrecoderVariant { WF, MRT, PreFawpWf, PostFawpWf, PreFawpFbs, PostFawpFbs };

PrecoderVariant parse_precoder_variant(std::string_view name);
std::string_view precoder_variant_name(PrecoderVariant v);
bool is_fawp(PrecoderVariant v);
bool is_fbs(PrecoderVariant v);

/// What to build: variant plus alphabet resolution and FBS schedules where relevant.
struct PrecoderSpec {
    PrecoderVariant variant = PrecoderVariant::WF;
    int bits = 0;      // 0 for WF / MRT
    FbsParams params;  // FBS variants only
};

/// A built precoder: x = Q s / beta with Q held in its native structure.
class PrecoderHandle {
public:
    using Payload = std::variant<CMatrix, PreFawpMatrix, PostFawpMatrix>;

    PrecoderHandle(PrecoderVariant variant, Payload payload, double symbol_energy, double total_power);

    PrecoderVariant variant() const { return variant_; }
    double beta() const { return beta_; }
    const Payload& payload() const { return payload_; }
    int num_antennas() const;
    int num_ues() const;

    /// Q s, without the 1/beta factor.
    CVector apply(const SymbolVector& s) const;
    /// Dense B x U equivalent of Q.
    CMatrix equivalent() const;

private:
    PrecoderVariant variant_;
    Payload payload_;
    double beta_;
};

PrecoderHandle build_precoder(const PrecoderSpec& spec, const ChannelMatrix& h, const SystemConfig& cfg);

/// x = Q s / beta.
CVector precode(const PrecoderHandle& handle, const SymbolVector& s);

/// y = H x + n, n ~ CN(0, N0 I_U).
SymbolVector channel_pass(const ChannelMatrix& h, const CVector& x, double noise_variance,
                          std::mt19937_64& rng);

inline constexpr double kBetaFloor = 1e-6;

/// Per-UE Re{sqrt(Es) / y_u} from a single pilot s_u = sqrt(Es); non-positive
/// estimates clamp to kBetaFloor. Throws for a zero received sample.
RVector estimate_beta_mle(const SymbolVector& y_pilot, double symbol_energy);

enum class BetaMode { Perfect, MlePilot };

BetaMode parse_beta_mode(std::string_view name);
std::string_view beta_mode_name(BetaMode m);

struct UeState {
    RVector beta_hat;
    BetaMode mode = BetaMode::Perfect;
};

struct Detection {
    SymbolVector soft;       // beta_hat_u y_u
    std::vector<int> labels; // hard decisions
};

/// Scales by beta_hat and slices to the nearest point (lowest label on ties).
Detection detect(const SymbolVector& y, const RVector& beta_hat, const Constellation& constellation);

struct MetricAccumulator {
    std::int64_t bit_errors = 0;
    std::int64_t bits_sent = 0;
    double evm_num = 0.0; // sum |ŝ − s|²
    double evm_den = 0.0; // sum |s|²
    std::int64_t vectors_sent = 0;

    void merge(const MetricAccumulator& other);
};

/// sqrt(evm_num / evm_den) in percent.
double evm(const MetricAccumulator& acc);
double ber(const MetricAccumulator& acc);
/// sqrt(p (1 − p) / bits_sent).
double ber_stderr(const MetricAccumulator& acc);

/// 5G NR transmitter EVM limits in percent.
double evm_threshold_percent(Modulation m);

/// Pilot (when estimating) plus num_vectors data vectors over one channel
/// realization. Pilot samples are not counted.
MetricAccumulator simulate_link(const PrecoderHandle& handle, const ChannelMatrix& h, const SystemConfig& cfg,
                                const Constellation& constellation, BetaMode beta_mode, int num_vectors,
                                std::mt19937_64& rng);

} // namespace fawp
