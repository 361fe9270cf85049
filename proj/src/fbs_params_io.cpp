#include "fawp/fbs_solver.hpp"

#include <fstream>
#include <iomanip>
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

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("bad number '" + item + "' in " + key);
        }
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "' in " + key);
        out.push_back(v);
    }
    return out;
}

void write_list(std::ostream& os, const char* key, const std::vector<double>& v) {
    os << key << '=';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << '\n';
}

} // namespace

std::string format_params(const FbsParams& params) {
    params.validate();
    std::ostringstream os;
    os << std::setprecision(17);
    os << "t_max=" << params.t_max << '\n';
    write_list(os, "tau", params.tau);
    write_list(os, "nu", params.nu);
    write_list(os, "gamma", params.gamma);
    os << "init=" << (params.init == InitMode::Mrt ? "mrt" : "wf") << '\n';
    return os.str();
}

FbsParams parse_params(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("FBS params line " + std::to_string(lineno) + ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    for (const char* key : {"t_max", "tau", "nu", "gamma"})
        if (!kv.count(key)) throw std::invalid_argument(std::string("FBS params missing '") + key + "'");

    FbsParams p;
    try {
        p.t_max = std::stoi(kv["t_max"]);
    } catch (const std::exception&) {
        throw std::invalid_argument("bad t_max '" + kv["t_max"] + "'");
    }
    p.tau = parse_list("tau", kv["tau"]);
    p.nu = parse_list("nu", kv["nu"]);
    p.gamma = parse_list("gamma", kv["gamma"]);
    if (auto it = kv.find("init"); it != kv.end()) {
        if (it->second == "mrt") p.init = InitMode::Mrt;
        else if (it->second == "wf") p.init = InitMode::FawpWf;
        else throw std::invalid_argument("init must be mrt or wf");
    }
    p.validate();
    return p;
}

FbsParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open FBS params file '" + path + "'");
    return parse_params(in);
}

void save_params(const FbsParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write FBS params file '" + path + "'");
    out << format_params(params);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace fawp
