#include "fawp/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fawp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
        return s.substr(1, s.size() - 2);
    return s;
}

std::string unbracket(std::string s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') return s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(unbracket(value));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = unquote(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    return out;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        if (!v.empty() && v.front() != '-') out = std::stoull(v, &used, 0);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument(key + ": expected an unsigned integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

FawpStructure to_structure(const std::string& key, const std::string& v) {
    if (v == "pre") return FawpStructure::Pre;
    if (v == "post") return FawpStructure::Post;
    throw std::invalid_argument(key + ": expected pre or post, got '" + v + "'");
}

InitMode to_init(const std::string& key, const std::string& v) {
    if (v == "mrt") return InitMode::Mrt;
    if (v == "wf") return InitMode::FawpWf;
    throw std::invalid_argument(key + ": expected mrt or wf, got '" + v + "'");
}

std::string resolve(const std::string& base_dir, const std::string& p) {
    if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

} // namespace

std::vector<double> parse_snr_grid(const std::string& text) {
    const std::string t = unbracket(unquote(text));
    std::vector<double> out;
    if (t.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(t);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(trim(item));
        if (parts.size() != 3) throw std::invalid_argument("snr_db range must be start:step:stop");
        const double a = to_double("snr_db", parts[0]);
        const double step = to_double("snr_db", parts[1]);
        const double b = to_double("snr_db", parts[2]);
        if (!(step > 0.0) || b < a) throw std::invalid_argument("snr_db range needs step > 0 and stop >= start");
        const long n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    } else {
        for (const auto& item : split_list(t)) out.push_back(to_double("snr_db", item));
    }
    if (out.empty()) throw std::invalid_argument("snr_db grid is empty");
    return out;
}

PrecoderEntry parse_precoder_entry(const std::string& text, const std::string& base_dir) {
    std::string t = trim(text);
    PrecoderEntry e;
    if (const auto at = t.find('@'); at != std::string::npos) {
        e.params_path = resolve(base_dir, trim(t.substr(at + 1)));
        t = trim(t.substr(0, at));
    }
    std::string name = t;
    if (const auto colon = t.find(':'); colon != std::string::npos) {
        name = trim(t.substr(0, colon));
        e.spec.bits = static_cast<int>(to_int("precoder bits", trim(t.substr(colon + 1))));
    }
    e.spec.variant = parse_precoder_variant(name);
    if (is_fawp(e.spec.variant)) {
        if (e.spec.bits == 0) e.spec.bits = 1;
        make_alphabet(e.spec.bits); // range check
    } else if (e.spec.bits != 0) {
        throw std::invalid_argument("precoder '" + name + "' takes no alphabet bits");
    }
    if (!e.params_path.empty() && !is_fbs(e.spec.variant))
        throw std::invalid_argument("only FBS precoders take a params file");
    return e;
}

void ExperimentConfig::validate() const {
    system.validate();
    if (channel_file.empty() && channel.kind != ChannelKind::Rayleigh) channel.validate(system.num_ues);
    if (precoders.empty()) throw std::invalid_argument("no precoders configured");
    if (snr_grid_db.empty()) throw std::invalid_argument("snr grid is empty");
    for (std::size_t i = 1; i < snr_grid_db.size(); ++i)
        if (!(snr_grid_db[i] > snr_grid_db[i - 1])) throw std::invalid_argument("snr grid must be strictly increasing");
    if (num_channels < 1) throw std::invalid_argument("num_channels must be positive");
    if (vectors_per_channel < 1) throw std::invalid_argument("vectors_per_channel must be positive");
    if (threads < 0) throw std::invalid_argument("threads must be non-negative");
    if (fbs_t_max < 1) throw std::invalid_argument("fbs_t_max must be positive");
    make_constellation(constellation, system.symbol_energy);
}

double ExperimentConfig::evm_threshold(Modulation m) const {
    if (auto it = evm_threshold_pct.find(m); it != evm_threshold_pct.end()) return it->second;
    return evm_threshold_percent(m);
}

ExperimentConfig parse_config(std::istream& in, const std::string& base_dir) {
    ExperimentConfig cfg;
    std::vector<std::string> precoder_items;

    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"system.bs_antennas", [&](auto& k, auto& v) { cfg.system.num_bs_antennas = static_cast<int>(to_int(k, v)); }},
        {"system.ues", [&](auto& k, auto& v) { cfg.system.num_ues = static_cast<int>(to_int(k, v)); }},
        {"system.symbol_energy", [&](auto& k, auto& v) { cfg.system.symbol_energy = to_double(k, v); }},
        {"system.total_power", [&](auto& k, auto& v) { cfg.system.total_power = to_double(k, v); }},

        {"channel.kind", [&](auto&, auto& v) { cfg.channel.kind = parse_channel_kind(v); }},
        {"channel.file", [&](auto&, auto& v) { cfg.channel_file = resolve(base_dir, v); }},
        {"channel.carrier_hz", [&](auto& k, auto& v) { cfg.channel.carrier_hz = to_double(k, v); }},
        {"channel.sector_deg", [&](auto& k, auto& v) { cfg.channel.sector_deg = to_double(k, v); }},
        {"channel.min_separation_deg", [&](auto& k, auto& v) { cfg.channel.min_sep_deg = to_double(k, v); }},
        {"channel.range_min_m", [&](auto& k, auto& v) { cfg.channel.range_min_m = to_double(k, v); }},
        {"channel.range_max_m", [&](auto& k, auto& v) { cfg.channel.range_max_m = to_double(k, v); }},
        {"channel.paths", [&](auto& k, auto& v) { cfg.channel.num_paths = static_cast<int>(to_int(k, v)); }},
        {"channel.angular_spread_deg", [&](auto& k, auto& v) { cfg.channel.angular_spread_deg = to_double(k, v); }},
        {"channel.elevation_spread_deg", [&](auto& k, auto& v) { cfg.channel.elevation_spread_deg = to_double(k, v); }},
        {"channel.vertical_elements", [&](auto& k, auto& v) { cfg.channel.vertical_elements = static_cast<int>(to_int(k, v)); }},

        {"run.constellation", [&](auto&, auto& v) { cfg.constellation = v; }},
        {"run.precoders", [&](auto&, auto& v) { precoder_items = split_list(v); }},
        {"run.snr_db", [&](auto&, auto& v) { cfg.snr_grid_db = parse_snr_grid(v); }},
        {"run.num_channels", [&](auto& k, auto& v) { cfg.num_channels = static_cast<int>(to_int(k, v)); }},
        {"run.vectors_per_channel", [&](auto& k, auto& v) { cfg.vectors_per_channel = static_cast<int>(to_int(k, v)); }},
        {"run.beta_mode", [&](auto&, auto& v) { cfg.beta_mode = parse_beta_mode(v); }},
        {"run.master_seed", [&](auto& k, auto& v) { cfg.master_seed = to_u64(k, v); }},
        {"run.output", [&](auto&, auto& v) { cfg.output = resolve(base_dir, v); }},
        {"run.record_timing", [&](auto& k, auto& v) { cfg.record_timing = to_bool(k, v); }},
        {"run.threads", [&](auto& k, auto& v) { cfg.threads = static_cast<int>(to_int(k, v)); }},
        {"run.fbs_t_max", [&](auto& k, auto& v) { cfg.fbs_t_max = static_cast<int>(to_int(k, v)); }},
        {"run.fbs_init", [&](auto& k, auto& v) { cfg.fbs_init = to_init(k, v); }},

        {"evm.qpsk", [&](auto& k, auto& v) { cfg.evm_threshold_pct[Modulation::QPSK] = to_double(k, v); }},
        {"evm.16qam", [&](auto& k, auto& v) { cfg.evm_threshold_pct[Modulation::QAM16] = to_double(k, v); }},
        {"evm.64qam", [&](auto& k, auto& v) { cfg.evm_threshold_pct[Modulation::QAM64] = to_double(k, v); }},
        {"evm.256qam", [&](auto& k, auto& v) { cfg.evm_threshold_pct[Modulation::QAM256] = to_double(k, v); }},

        {"tune.structure", [&](auto& k, auto& v) { cfg.tune.structure = to_structure(k, v); }},
        {"tune.bits", [&](auto& k, auto& v) { cfg.tune.bits = static_cast<int>(to_int(k, v)); }},
        {"tune.t_max", [&](auto& k, auto& v) { cfg.tune.t_max = static_cast<int>(to_int(k, v)); }},
        {"tune.init", [&](auto& k, auto& v) { cfg.tune.init = to_init(k, v); }},
        {"tune.budget", [&](auto& k, auto& v) { cfg.tune.budget = static_cast<int>(to_int(k, v)); }},
        {"tune.training_channels", [&](auto& k, auto& v) { cfg.tune.training_channels = static_cast<int>(to_int(k, v)); }},
        {"tune.max_problems", [&](auto& k, auto& v) { cfg.tune.max_problems_per_channel = static_cast<int>(to_int(k, v)); }},
        {"tune.snr_db", [&](auto& k, auto& v) { cfg.tune.snr_db = to_double(k, v); }},
        {"tune.output", [&](auto&, auto& v) { cfg.tune.output = resolve(base_dir, v); }},

        {"oracle.structure", [&](auto& k, auto& v) { cfg.oracle.structure = to_structure(k, v); }},
        {"oracle.instances", [&](auto& k, auto& v) { cfg.oracle.instances = static_cast<int>(to_int(k, v)); }},
        {"oracle.bs_antennas", [&](auto& k, auto& v) { cfg.oracle.bs_antennas = static_cast<int>(to_int(k, v)); }},
        {"oracle.ues", [&](auto& k, auto& v) { cfg.oracle.ues = static_cast<int>(to_int(k, v)); }},
        {"oracle.bits", [&](auto& k, auto& v) { cfg.oracle.bits = static_cast<int>(to_int(k, v)); }},
        {"oracle.snr_db", [&](auto& k, auto& v) { cfg.oracle.snr_db = to_double(k, v); }},
        {"oracle.tolerance", [&](auto& k, auto& v) { cfg.oracle.tolerance = to_double(k, v); }},
        {"oracle.params", [&](auto&, auto& v) { cfg.oracle.params_path = resolve(base_dir, v); }},
    };

    std::string section = "run";
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // '#' starts a comment unless it sits inside a quoted string.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') quoted = !quoted;
            if (line[i] == '#' && !quoted) {
                line.erase(i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw std::invalid_argument(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(where + ": expected key = value");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string value = unquote(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument(where + ": unknown key '" + key + "'");
        try {
            it->second(key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
    }
    for (const auto& item : precoder_items) cfg.precoders.push_back(parse_precoder_entry(item, base_dir));
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(in, dir.empty() ? "." : dir.string());
}

} // namespace fawp
