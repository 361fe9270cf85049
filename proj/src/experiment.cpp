#include "fawp/experiment.hpp"

#include "fawp/seed.hpp"
#include "fawp/wf_precoder.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fawp {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (count <= 0) return;
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, count);
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = count;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

namespace {

ChannelMatrix channel_for(const ExperimentConfig& cfg, const std::vector<ChannelRecord>& records, int c) {
    if (!records.empty()) return records[c].h;
    return generate_channel(cfg.channel, cfg.system.num_bs_antennas, cfg.system.num_ues,
                            split_seed(cfg.master_seed, c, 0, SeedRole::Channel));
}

std::vector<ChannelRecord> load_records(const ExperimentConfig& cfg) {
    if (cfg.channel_file.empty()) return {};
    auto records = load_channels(cfg.channel_file);
    if (static_cast<int>(records.size()) < cfg.num_channels)
        throw std::invalid_argument("channel file holds " + std::to_string(records.size()) +
                                    " realizations, config asks for " + std::to_string(cfg.num_channels));
    for (const auto& r : records)
        if (r.h.num_ues() != cfg.system.num_ues || r.h.num_antennas() != cfg.system.num_bs_antennas)
            throw std::invalid_argument("channel file dimensions do not match the system");
    return records;
}

PrecoderSpec resolve_spec(const PrecoderEntry& entry, const ChannelMatrix& h, const ExperimentConfig& cfg) {
    PrecoderSpec spec = entry.spec;
    if (is_fbs(spec.variant))
        spec.params = entry.params ? *entry.params : default_params(h, cfg.fbs_t_max, cfg.fbs_init);
    return spec;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentConfig cfg = config;
    for (auto& e : cfg.precoders)
        if (!e.params && !e.params_path.empty()) e.params = load_params(e.params_path);
    const Constellation constellation = make_constellation(cfg.constellation, cfg.system.symbol_energy);
    const auto records = load_records(cfg);
    const int n_p = static_cast<int>(cfg.precoders.size());
    const int n_s = static_cast<int>(cfg.snr_grid_db.size());
    const int n_c = cfg.num_channels;

    // [precoder][snr][channel]
    std::vector<MetricAccumulator> acc(static_cast<std::size_t>(n_p) * n_s * n_c);
    std::vector<double> secs(acc.size(), 0.0);
    auto cell = [&](int p, int s, int c) { return (static_cast<std::size_t>(p) * n_s + s) * n_c + c; };

    parallel_for(n_c, cfg.threads, [&](int c) {
        const ChannelMatrix h = channel_for(cfg, records, c);
        for (int s = 0; s < n_s; ++s) {
            SystemConfig sys = cfg.system;
            sys.noise_variance = noise_variance_from_snr_db(cfg.snr_grid_db[s], sys.total_power);
            const std::uint64_t data_seed = split_seed(cfg.master_seed, c, s, SeedRole::Data);
            for (int p = 0; p < n_p; ++p) {
                const auto t0 = std::chrono::steady_clock::now();
                const PrecoderHandle handle = build_precoder(resolve_spec(cfg.precoders[p], h, cfg), h, sys);
                std::mt19937_64 rng(data_seed);
                acc[cell(p, s, c)] =
                    simulate_link(handle, h, sys, constellation, cfg.beta_mode, cfg.vectors_per_channel, rng);
                secs[cell(p, s, c)] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        }
    });

    std::vector<ResultRow> rows;
    for (int p = 0; p < n_p; ++p)
        for (int s = 0; s < n_s; ++s) {
            MetricAccumulator total;
            double seconds = 0.0;
            for (int c = 0; c < n_c; ++c) {
                total.merge(acc[cell(p, s, c)]);
                seconds += secs[cell(p, s, c)];
            }
            ResultRow row;
            row.precoder = cfg.precoders[p].label();
            row.bits = cfg.precoders[p].spec.bits;
            row.snr_db = cfg.snr_grid_db[s];
            row.ber = ber(total);
            row.ber_stderr = ber_stderr(total);
            row.evm_pct = evm(total);
            row.vectors = total.vectors_sent;
            row.bits_sent = total.bits_sent;
            row.bit_errors = total.bit_errors;
            row.seconds = cfg.record_timing ? seconds : 0.0;
            row.low_confidence = total.bit_errors < kMinConfidentErrors;
            rows.push_back(std::move(row));
        }
    return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
    if (rows.empty()) throw std::invalid_argument("no result rows to write");
    os << "precoder,bits,snr_db,ber,ber_stderr,evm_pct,vectors,bits_sent,seconds\n";
    for (const auto& r : rows)
        os << r.precoder << ',' << r.bits << ',' << fmt(r.snr_db) << ',' << fmt(r.ber) << ','
           << fmt(r.ber_stderr) << ',' << fmt(r.evm_pct) << ',' << r.vectors << ',' << r.bits_sent << ','
           << fmt(r.seconds) << '\n';
}

void emit_json(const std::vector<ResultRow>& rows, std::ostream& os) {
    if (rows.empty()) throw std::invalid_argument("no result rows to write");
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
        arr.push_back({{"precoder", r.precoder},
                       {"bits", r.bits},
                       {"snr_db", r.snr_db},
                       {"ber", r.ber},
                       {"ber_stderr", r.ber_stderr},
                       {"evm_pct", r.evm_pct},
                       {"vectors", r.vectors},
                       {"bits_sent", r.bits_sent},
                       {"seconds", r.seconds},
                       {"low_confidence", r.low_confidence}});
    // nlohmann prints doubles in shortest round-trip form, which reproduces
    // the value exactly on parse.
    os << arr.dump(2) << '\n';
}

void emit_rows(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    if (json)
        emit_json(rows, out);
    else
        emit_csv(rows, out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

FbsParams run_tune(const ExperimentConfig& cfg) {
    cfg.system.validate();
    SystemConfig sys = cfg.system;
    sys.noise_variance = noise_variance_from_snr_db(cfg.tune.snr_db, sys.total_power);
    const ChannelSpec spec = cfg.channel;
    const ChannelSampler sampler = [&](std::uint64_t seed) {
        return generate_channel(spec, sys.num_bs_antennas, sys.num_ues, seed);
    };
    TuneOptions opt;
    opt.structure = cfg.tune.structure;
    opt.t_max = cfg.tune.t_max;
    opt.init = cfg.tune.init;
    opt.budget = cfg.tune.budget;
    opt.training_channels = cfg.tune.training_channels;
    opt.max_problems_per_channel = cfg.tune.max_problems_per_channel;
    opt.seed = cfg.master_seed;
    return tune_params(sampler, sys, make_alphabet(cfg.tune.bits), opt);
}

std::vector<OracleRow> run_oracle(const ExperimentConfig& cfg) {
    OracleSettings o = cfg.oracle;
    if (!o.params && !o.params_path.empty()) o.params = load_params(o.params_path);
    if (o.instances < 1) throw std::invalid_argument("oracle.instances must be positive");
    if (o.bs_antennas < 1 || o.ues < 1) throw std::invalid_argument("oracle dimensions must be positive");
    const FiniteAlphabet alphabet = make_alphabet(o.bits);
    const double n0 = noise_variance_from_snr_db(o.snr_db, cfg.system.total_power);
    const double kappa = o.ues * n0 / cfg.system.total_power;

    std::vector<OracleRow> rows(o.instances);
    parallel_for(o.instances, cfg.threads, [&](int i) {
        OracleRow& row = rows[i];
        row.instance = i;
        row.seed = split_seed(cfg.master_seed, i, 0, SeedRole::Oracle);
        const ChannelMatrix h = gen_rayleigh(o.bs_antennas, o.ues, row.seed);
        const FbsParams params = o.params ? *o.params : default_params(h, 10);
        const CMatrix q_wf = wf_woodbury(h, kappa);
        if (o.structure == FawpStructure::Pre) {
            row.index = i % o.ues;
            row.optimum = brute_force_pre(h, row.index, kappa, alphabet).objective;
            row.fbs_objective = pre_fawp_fbs(h, row.index, kappa, alphabet, params).trace.final_objective;
            const PreFawpMatrix wf = quantize_pre(h, q_wf, kappa, alphabet);
            row.wf_objective = pre_objective(h, wf.a.col(row.index), row.index, kappa);
        } else {
            row.index = i % o.bs_antennas;
            row.optimum = brute_force_post(h, row.index, kappa, alphabet).objective;
            row.fbs_objective = post_fawp_fbs(h, row.index, kappa, alphabet, params).trace.final_objective;
            const PostFawpMatrix wf = quantize_post(h, q_wf, kappa, alphabet);
            row.wf_objective = post_objective(h, wf.z.col(row.index), row.index, kappa);
        }
    });
    return rows;
}

void export_channels(const ExperimentConfig& cfg, std::ostream& os) {
    cfg.system.validate();
    if (cfg.num_channels < 1) throw std::invalid_argument("num_channels must be positive");
    for (int c = 0; c < cfg.num_channels; ++c) {
        const std::uint64_t seed = split_seed(cfg.master_seed, c, 0, SeedRole::Channel);
        ChannelRecord rec{generate_channel(cfg.channel, cfg.system.num_bs_antennas, cfg.system.num_ues, seed),
                          std::string(channel_kind_name(cfg.channel.kind)), seed};
        write_channel(os, rec);
    }
}

} // namespace fawp
