#pragma once

#include "fawp/channels.hpp"
#include "fawp/core_types.hpp"
#include "fawp/downlink.hpp"
#include "fawp/fbs_solver.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fawp {

/// One precoder of a sweep: "variant[:bits][@params-file]".
struct PrecoderEntry {
    PrecoderSpec spec;
    std::optional<FbsParams> params; // FBS with neither params nor a file uses default_params per channel
    std::string params_path;         // read when the experiment starts

    std::string label() const { return std::string(precoder_variant_name(spec.variant)); }
};

PrecoderEntry parse_precoder_entry(const std::string& text, const std::string& base_dir);

struct TuneSettings {
    FawpStructure structure = FawpStructure::Pre;
    int bits = 1;
    int t_max = 10;
    InitMode init = InitMode::Mrt;
    int budget = 300;
    int training_channels = 32;
    int max_problems_per_channel = 64;
    double snr_db = 10.0;
    std::string output = "tuned.fbs";
};

struct OracleSettings {
    FawpStructure structure = FawpStructure::Pre;
    int instances = 100;
    int bs_antennas = 4;
    int ues = 2;
    int bits = 1;
    double snr_db = 10.0;
    double tolerance = 1.05;
    std::optional<FbsParams> params;
    std::string params_path;
};

struct ExperimentConfig {
    SystemConfig system;
    ChannelSpec channel;
    std::string channel_file; // realizations used in order instead of the generator
    std::string constellation = "16qam";
    std::vector<PrecoderEntry> precoders;
    std::vector<double> snr_grid_db;
    int num_channels = 1000;
    int vectors_per_channel = 100;
    BetaMode beta_mode = BetaMode::MlePilot;
    std::uint64_t master_seed = 1;
    std::string output = "results.csv";
    bool record_timing = false;
    int threads = 0; // 0 = hardware concurrency
    int fbs_t_max = 10;
    InitMode fbs_init = InitMode::Mrt;
    std::map<Modulation, double> evm_threshold_pct; // overrides of evm_threshold_percent
    TuneSettings tune;
    OracleSettings oracle;

    void validate() const;
    double evm_threshold(Modulation m) const;
};

/// Flat TOML-style text: [section] headers, key = value lines, '#' comments.
/// Relative paths resolve against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// "a:step:b" inclusive range or a comma list, optionally bracketed.
std::vector<double> parse_snr_grid(const std::string& text);

struct ResultRow {
    std::string precoder;
    int bits = 0;
    double snr_db = 0.0;
    double ber = 0.0;
    double ber_stderr = 0.0;
    double evm_pct = 0.0;
    std::int64_t vectors = 0;
    std::int64_t bits_sent = 0;
    std::int64_t bit_errors = 0;
    double seconds = 0.0;
    bool low_confidence = false; // fewer than kMinConfidentErrors bit errors
};

inline constexpr std::int64_t kMinConfidentErrors = 100;

/// Channel c uses split_seed(master, c, 0, Channel); data and noise at grid
/// point s use split_seed(master, c, s, Data), shared by all precoders. Results
/// are reduced in channel order, so output is independent of the thread count.
/// Rows are ordered by precoder entry, then SNR.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os);
void emit_json(const std::vector<ResultRow>& rows, std::ostream& os);
/// Writes JSON when the path ends in ".json", CSV otherwise.
void emit_rows(const std::vector<ResultRow>& rows, const std::string& path);

/// Parameter search for cfg.tune on channels drawn from cfg.channel.
FbsParams run_tune(const ExperimentConfig& cfg);

struct OracleRow {
    int instance = 0;
    std::uint64_t seed = 0;
    int index = 0; // UE (pre) or antenna (post)
    double optimum = 0.0;
    double fbs_objective = 0.0;
    double wf_objective = 0.0;
};

/// Rayleigh instances of cfg.oracle size with seeds split_seed(master, i, 0, Oracle).
std::vector<OracleRow> run_oracle(const ExperimentConfig& cfg);

/// Writes num_channels realizations from the configured generator.
void export_channels(const ExperimentConfig& cfg, std::ostream& os);

/// Runs fn(i) for i in [0, count) on up to `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

} // namespace fawp
