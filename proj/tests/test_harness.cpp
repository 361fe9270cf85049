#include "fawp/experiment.hpp"
#include "fawp/seed.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <sstream>

using namespace fawp;

namespace {

const char* kSmallConfig = R"(
# small sweep
[system]
bs_antennas = 16
ues = 2

[channel]
kind = rayleigh

[run]
constellation = "qpsk"
precoders = ["wf", "pre-fawp-wf:2", "post-fawp-fbs"]
snr_db = 0:5:10
num_channels = 6
vectors_per_channel = 10
beta_mode = perfect
master_seed = 9
threads = 1
fbs_t_max = 4
)";

ExperimentConfig small() {
    std::istringstream in(kSmallConfig);
    return parse_config(in);
}

} // namespace

TEST_CASE("config parsing") {
    const ExperimentConfig cfg = small();
    CHECK(cfg.system.num_bs_antennas == 16);
    CHECK(cfg.system.num_ues == 2);
    CHECK(cfg.constellation == "qpsk");
    REQUIRE(cfg.precoders.size() == 3);
    CHECK(cfg.precoders[0].spec.variant == PrecoderVariant::WF);
    CHECK(cfg.precoders[1].spec.bits == 2);
    CHECK(cfg.precoders[2].spec.bits == 1);
    CHECK(cfg.snr_grid_db == std::vector<double>{0, 5, 10});
    CHECK(cfg.beta_mode == BetaMode::Perfect);
    CHECK(cfg.master_seed == 9);
    CHECK(cfg.fbs_t_max == 4);
    cfg.validate();
}

TEST_CASE("config errors name the line") {
    std::istringstream unknown("[run]\nnum_channel = 3\n");
    try {
        parse_config(unknown);
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream bad_number("[run]\nnum_channels = three\n");
    CHECK_THROWS_AS(parse_config(bad_number), std::invalid_argument);
    std::istringstream bad_section("[nope]\nx = 1\n");
    CHECK_THROWS_AS(parse_config(bad_section), std::invalid_argument);
    std::istringstream bits_on_wf("[run]\nprecoders = wf:2\n");
    CHECK_THROWS_AS(parse_config(bits_on_wf), std::invalid_argument);
}

TEST_CASE("validation") {
    ExperimentConfig cfg = small();
    cfg.snr_grid_db = {5, 5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small();
    cfg.precoders.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small();
    cfg.system.num_ues = 16;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small();
    cfg.num_channels = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("snr grid syntax") {
    CHECK(parse_snr_grid("-4:2:2") == std::vector<double>{-4, -2, 0, 2});
    CHECK(parse_snr_grid("[1, 3, 7]") == std::vector<double>{1, 3, 7});
    CHECK(parse_snr_grid("0:0.5:1") == std::vector<double>{0, 0.5, 1});
    CHECK_THROWS_AS(parse_snr_grid("0:0:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_snr_grid("3:1:1"), std::invalid_argument);
}

TEST_CASE("noise-free single UE link is error free") {
    ExperimentConfig cfg = small();
    cfg.system.num_ues = 1;
    cfg.precoders = {parse_precoder_entry("wf", ".")};
    cfg.snr_grid_db = {200.0};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ber == 0.0);
    CHECK(rows[0].low_confidence);
    CHECK(rows[0].vectors == 60);
    CHECK(rows[0].bits_sent == 120);
}

TEST_CASE("CSV layout") {
    const auto rows = run_experiment(small());
    CHECK(rows.size() == 9);
    std::ostringstream os;
    emit_csv(rows, os);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "precoder,bits,snr_db,ber,ber_stderr,evm_pct,vectors,bits_sent,seconds");
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
    }
    CHECK(n == 9);
    CHECK(rows[3].precoder == "pre-fawp-wf");
    CHECK(rows[3].snr_db == 0.0);
    for (const auto& r : rows) CHECK(r.seconds == 0.0);
    CHECK_THROWS_AS(emit_csv({}, os), std::invalid_argument);
}

TEST_CASE("JSON round trip") {
    const auto rows = run_experiment(small());
    std::ostringstream os;
    emit_json(rows, os);
    const auto j = nlohmann::json::parse(os.str());
    REQUIRE(j.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(j[i]["precoder"] == rows[i].precoder);
        CHECK(j[i]["bits"] == rows[i].bits);
        CHECK(j[i]["ber"].get<double>() == rows[i].ber);
        CHECK(j[i]["ber_stderr"].get<double>() == rows[i].ber_stderr);
        CHECK(j[i]["evm_pct"].get<double>() == rows[i].evm_pct);
        CHECK(j[i]["bits_sent"] == rows[i].bits_sent);
        CHECK(j[i]["low_confidence"] == rows[i].low_confidence);
    }
}

TEST_CASE("output does not depend on the thread count") {
    ExperimentConfig a = small();
    ExperimentConfig b = small();
    b.threads = 4;
    std::ostringstream sa, sb;
    emit_csv(run_experiment(a), sa);
    emit_csv(run_experiment(b), sb);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("precoders share data and noise draws") {
    ExperimentConfig cfg = small();
    cfg.precoders = {parse_precoder_entry("wf", "."), parse_precoder_entry("wf", ".")};
    const auto rows = run_experiment(cfg);
    for (int s = 0; s < 3; ++s) {
        CHECK(rows[s].ber == rows[3 + s].ber);
        CHECK(rows[s].evm_pct == rows[3 + s].evm_pct);
    }
}

TEST_CASE("parallel_for propagates exceptions") {
    CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                        if (i == 7) throw std::runtime_error("boom");
                    }),
                    std::runtime_error);
    std::vector<int> hit(50, 0);
    parallel_for(50, 3, [&](int i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 50);
}

TEST_CASE("channel export feeds back into a run") {
    ExperimentConfig cfg = small();
    std::ostringstream os;
    export_channels(cfg, os);
    std::istringstream in(os.str());
    const auto recs = read_channels(in);
    REQUIRE(recs.size() == 6);
    CHECK(recs[2].h.matrix() == generate_channel(cfg.channel, 16, 2, split_seed(9, 2, 0, SeedRole::Channel)).matrix());
}

TEST_CASE("oracle rows") {
    ExperimentConfig cfg = small();
    cfg.oracle.instances = 6;
    const auto rows = run_oracle(cfg);
    REQUIRE(rows.size() == 6);
    for (const auto& r : rows) {
        CHECK(r.optimum <= r.fbs_objective * (1 + 1e-12));
        CHECK(r.optimum <= r.wf_objective * (1 + 1e-12));
        CHECK(r.index == r.instance % 2);
    }
}
