// Command-line front end for FAWP experiments.

#include "fawp/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace {

struct Common {
    std::string config;
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    // tune overrides
    std::optional<int> bits;
    std::optional<int> t_max;
    std::string structure;
    std::string init;
    std::optional<double> snr_db;
};

fawp::ExperimentConfig load(const Common& c) {
    fawp::ExperimentConfig cfg = fawp::load_config(c.config);
    if (c.seed) cfg.master_seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

int cmd_run(const Common& c) {
    fawp::ExperimentConfig cfg = load(c);
    if (!c.output.empty()) cfg.output = c.output;
    const auto rows = fawp::run_experiment(cfg);
    fawp::emit_rows(rows, cfg.output);
    const auto mod = fawp::parse_modulation(cfg.constellation);
    const double limit = cfg.evm_threshold(mod);
    std::cout << std::left << std::setw(15) << "precoder" << std::setw(6) << "bits" << std::setw(9) << "snr_db"
              << std::setw(14) << "ber" << std::setw(10) << "evm_pct" << "note\n";
    for (const auto& r : rows) {
        std::cout << std::setw(15) << r.precoder << std::setw(6) << r.bits << std::setw(9) << r.snr_db
                  << std::setw(14) << r.ber << std::setw(10) << std::setprecision(4) << r.evm_pct
                  << (r.evm_pct <= limit ? "evm-ok" : "evm-fail") << (r.low_confidence ? " low-confidence" : "")
                  << '\n'
                  << std::setprecision(6);
    }
    std::cout << "wrote " << rows.size() << " rows to " << cfg.output << '\n';
    return 0;
}

int cmd_tune(const Common& c) {
    fawp::ExperimentConfig cfg = load(c);
    if (c.bits) cfg.tune.bits = *c.bits;
    if (c.t_max) cfg.tune.t_max = *c.t_max;
    if (c.snr_db) cfg.tune.snr_db = *c.snr_db;
    if (!c.structure.empty())
        cfg.tune.structure = c.structure == "post" ? fawp::FawpStructure::Post : fawp::FawpStructure::Pre;
    if (!c.init.empty()) cfg.tune.init = c.init == "wf" ? fawp::InitMode::FawpWf : fawp::InitMode::Mrt;
    const std::string out = c.output.empty() ? cfg.tune.output : c.output;
    const fawp::FbsParams p = fawp::run_tune(cfg);
    fawp::save_params(p, out);
    std::cout << fawp::format_params(p) << "wrote " << out << '\n';
    return 0;
}

int cmd_oracle(const Common& c) {
    const fawp::ExperimentConfig cfg = load(c);
    const auto rows = fawp::run_oracle(cfg);
    std::ostringstream table;
    table << std::setprecision(10);
    table << "instance,seed,index,optimum,fbs,fawp_wf,fbs_ratio\n";
    int within = 0;
    for (const auto& r : rows) {
        const double ratio = r.fbs_objective / r.optimum;
        if (ratio <= cfg.oracle.tolerance) ++within;
        table << r.instance << ',' << r.seed << ',' << r.index << ',' << r.optimum << ',' << r.fbs_objective
              << ',' << r.wf_objective << ',' << ratio << '\n';
    }
    if (!c.output.empty()) {
        std::ofstream out(c.output);
        if (!out) throw std::runtime_error("cannot write '" + c.output + "'");
        out << table.str();
    } else {
        std::cout << table.str();
    }
    std::cout << "fbs within " << cfg.oracle.tolerance << "x of optimum: " << within << '/' << rows.size() << '\n';
    return 0;
}

int cmd_export(const Common& c) {
    const fawp::ExperimentConfig cfg = load(c);
    if (c.output.empty()) {
        fawp::export_channels(cfg, std::cout);
        return 0;
    }
    std::ofstream out(c.output);
    if (!out) throw std::runtime_error("cannot write '" + c.output + "'");
    fawp::export_channels(cfg, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-alphabet Wiener-filter precoding simulator"};
    app.require_subcommand(1);
    Common common;
    std::uint64_t seed = 0;
    int threads = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Override the master seed")->check(CLI::NonNegativeNumber);
    auto* thread_opt = app.add_option("--threads", threads, "Worker cap (0 = all cores)")->check(CLI::NonNegativeNumber);

    struct Sub {
        CLI::App* app;
        int (*fn)(const Common&);
    };
    std::vector<Sub> subs;
    auto add = [&](const char* name, const char* help, int (*fn)(const Common&), const char* out_help) {
        CLI::App* s = app.add_subcommand(name, help);
        s->fallthrough();
        s->add_option("config", common.config, "Experiment config file")->required()->check(CLI::ExistingFile);
        s->add_option("-o,--output", common.output, out_help);
        subs.push_back({s, fn});
    };
    add("run", "Run a Monte-Carlo sweep", cmd_run, "Result file (.csv or .json), overrides run.output");
    add("tune", "Search FBS step schedules and write a params file", cmd_tune, "Params file, overrides tune.output");
    {
        CLI::App* t = subs.back().app;
        t->add_option("--bits", common.bits, "Alphabet resolution")->check(CLI::Range(1, 16));
        t->add_option("--t-max", common.t_max, "FBS iterations")->check(CLI::PositiveNumber);
        t->add_option("--structure", common.structure, "pre or post")->check(CLI::IsMember({"pre", "post"}));
        t->add_option("--init", common.init, "mrt or wf")->check(CLI::IsMember({"mrt", "wf"}));
        t->add_option("--snr-db", common.snr_db, "P/N0 of the training problems");
    }
    add("oracle", "Compare FBS against exhaustive search on small instances", cmd_oracle, "CSV table path");
    add("channel-export", "Write channel realizations", cmd_export, "Channel file (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }
    if (*seed_opt) common.seed = seed;
    if (*thread_opt) common.threads = threads;

    try {
        for (const auto& s : subs)
            if (s.app->parsed()) return s.fn(common);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
