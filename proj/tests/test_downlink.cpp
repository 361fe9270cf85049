#include "fawp/downlink.hpp"
#include "fawp/wf_precoder.hpp"

#include "test_util.hpp"

#include <doctest.h>

using namespace fawp;

namespace {

SystemConfig small_system(double n0) {
    SystemConfig cfg;
    cfg.num_bs_antennas = 32;
    cfg.num_ues = 4;
    cfg.noise_variance = n0;
    return cfg;
}

PrecoderSpec spec_for(PrecoderVariant v, int bits = 0) {
    PrecoderSpec s;
    s.variant = v;
    s.bits = bits;
    s.params = FbsParams::constant(5, 1.0 / 32.0, 1.3, 1.0);
    return s;
}

const PrecoderVariant kAll[] = {PrecoderVariant::WF,          PrecoderVariant::MRT,
                                PrecoderVariant::PreFawpWf,   PrecoderVariant::PostFawpWf,
                                PrecoderVariant::PreFawpFbs,  PrecoderVariant::PostFawpFbs};

} // namespace

TEST_CASE("identity channel power check") {
    SystemConfig cfg;
    cfg.num_bs_antennas = 2;
    cfg.num_ues = 1;
    cfg.validate();
    // U < B is required by SystemConfig; the handle itself accepts square Q.
    const PrecoderHandle h(PrecoderVariant::WF, CMatrix(CMatrix::Identity(2, 2)), 1.0, 1.0);
    CHECK(h.beta() == doctest::Approx(std::sqrt(2.0)));
    CVector s(2);
    s << cdouble(1, -1), cdouble(-1, 1);
    CHECK((precode(h, s) - s / std::sqrt(2.0)).norm() < 1e-15);
}

TEST_CASE("FAWP handles match their dense equivalents") {
    std::mt19937_64 rng(1);
    const auto ch = testutil::random_channel(3, 4, 32);
    const SystemConfig cfg = small_system(0.2);
    for (auto v : kAll) {
        const PrecoderHandle h = build_precoder(spec_for(v, is_fawp(v) ? 2 : 0), ch, cfg);
        const CMatrix q = h.equivalent();
        CHECK(q.rows() == 32);
        CHECK(q.cols() == 4);
        CHECK(h.num_antennas() == 32);
        CHECK(h.num_ues() == 4);
        CHECK(h.beta() == doctest::Approx(compute_beta(q, 1.0, 1.0)).epsilon(1e-12));
        const CVector s = testutil::random_cvector(rng, 4);
        CHECK((precode(h, s) - q * s / h.beta()).norm() < 1e-12);
    }
    const PrecoderHandle mrt = build_precoder(spec_for(PrecoderVariant::MRT), ch, cfg);
    CHECK((mrt.equivalent() - ch.matrix().adjoint()).norm() == 0.0);
}

TEST_CASE("empirical transmit power meets the constraint for every variant") {
    const auto ch = testutil::random_channel(4, 4, 32);
    const SystemConfig cfg = small_system(0.5);
    const auto c = make_constellation(Modulation::QAM16, cfg.symbol_energy);
    for (auto v : kAll) {
        const PrecoderHandle h = build_precoder(spec_for(v, is_fawp(v) ? 1 : 0), ch, cfg);
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<int> pick(0, c.size() - 1);
        double power = 0.0;
        const int n = 100000;
        SymbolVector s(4);
        for (int i = 0; i < n; ++i) {
            for (int u = 0; u < 4; ++u) s[u] = c.points[pick(rng)];
            power += precode(h, s).squaredNorm();
        }
        CHECK(power / n == doctest::Approx(cfg.total_power).epsilon(0.01));
    }
}

TEST_CASE("channel pass") {
    const auto ch = testutil::random_channel(5, 4, 32);
    std::mt19937_64 rng(1);
    const CVector x = testutil::random_cvector(rng, 32);
    CHECK((channel_pass(ch, x, 0.0, rng) - ch.matrix() * x).norm() == 0.0);
    std::mt19937_64 r1(5), r2(5);
    CHECK(channel_pass(ch, x, 0.3, r1) == channel_pass(ch, x, 0.3, r2));
    double var = 0.0;
    const int n = 25000;
    for (int i = 0; i < n; ++i) var += (channel_pass(ch, x, 0.3, rng) - ch.matrix() * x).squaredNorm();
    CHECK(var / (4.0 * n) == doctest::Approx(0.3).epsilon(0.02));
    CHECK_THROWS_AS(channel_pass(ch, CVector::Ones(3), 0.1, rng), std::invalid_argument);
}

TEST_CASE("beta MLE") {
    SymbolVector y(3);
    y << cdouble(0.5, 0), cdouble(1, 1), cdouble(-2, 0.1);
    const RVector b = estimate_beta_mle(y, 1.0);
    CHECK(b[0] == doctest::Approx(2.0));
    CHECK(b[1] == doctest::Approx(0.5));
    CHECK(b[2] == kBetaFloor);
    y[1] = 0.0;
    CHECK_THROWS_AS(estimate_beta_mle(y, 1.0), std::invalid_argument);
}

TEST_CASE("noiseless interference-free pilot recovers beta") {
    const double beta = 2.0;
    const SymbolVector y = SymbolVector::Constant(4, 1.0 / beta);
    const RVector b = estimate_beta_mle(y, 1.0);
    for (int u = 0; u < 4; ++u) CHECK(b[u] == doctest::Approx(beta));
}

TEST_CASE("detection") {
    const auto c = make_constellation(Modulation::QAM16, 1.0);
    SymbolVector y(3);
    y << c.points[5] / 2.0, c.points[11] / 2.0, 0.0;
    const Detection d = detect(y, RVector::Constant(3, 2.0), c);
    CHECK(d.labels[0] == 5);
    CHECK(d.labels[1] == 11);
    CHECK(std::abs(d.soft[1] - c.points[11]) < 1e-15);
    // The origin is a four-way tie; the lowest label wins.
    int lowest = c.size();
    double best = 1e9;
    for (int i = 0; i < c.size(); ++i)
        if (std::abs(c.points[i]) < best - 1e-12) {
            best = std::abs(c.points[i]);
            lowest = i;
        }
    CHECK(d.labels[2] == lowest);
    CHECK_THROWS_AS(detect(y, RVector::Ones(2), c), std::invalid_argument);
}

TEST_CASE("metrics") {
    MetricAccumulator a;
    CHECK_THROWS_AS(evm(a), std::invalid_argument);
    CHECK_THROWS_AS(ber(a), std::invalid_argument);
    a.bits_sent = 100;
    a.evm_den = 4.0;
    CHECK(ber(a) == 0.0);
    CHECK(evm(a) == 0.0);
    a.bit_errors = 100;
    CHECK(ber(a) == 1.0);
    // Constant error |c|² = 0.01 Es on every symbol.
    MetricAccumulator e;
    e.evm_num = 0.01 * 50;
    e.evm_den = 1.0 * 50;
    e.bits_sent = 1;
    CHECK(evm(e) == doctest::Approx(10.0));
    MetricAccumulator m;
    m.bit_errors = 10;
    m.bits_sent = 1000;
    CHECK(ber_stderr(m) == doctest::Approx(std::sqrt(0.01 * 0.99 / 1000)));
    CHECK(evm_threshold_percent(Modulation::QPSK) == 17.5);
    CHECK(evm_threshold_percent(Modulation::QAM16) == 12.5);
    CHECK(evm_threshold_percent(Modulation::QAM64) == 8.0);
    CHECK(evm_threshold_percent(Modulation::QAM256) == 3.5);
}

TEST_CASE("accumulator merge is order independent for integer counts") {
    std::mt19937_64 rng(2);
    std::vector<MetricAccumulator> parts(10);
    for (auto& p : parts) {
        p.bit_errors = rng() % 50;
        p.bits_sent = 100 + rng() % 50;
        p.vectors_sent = rng() % 7;
        p.evm_num = 0.25 * (rng() % 8);
        p.evm_den = 0.5 * (rng() % 8);
    }
    MetricAccumulator fwd, rev;
    for (auto& p : parts) fwd.merge(p);
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) rev.merge(*it);
    CHECK(fwd.bit_errors == rev.bit_errors);
    CHECK(fwd.bits_sent == rev.bits_sent);
    CHECK(fwd.vectors_sent == rev.vectors_sent);
    CHECK(fwd.evm_num == rev.evm_num);
    CHECK(fwd.evm_den == rev.evm_den);
}

TEST_CASE("noiseless zero-forcing chain is error free") {
    SystemConfig cfg = small_system(1e-14);
    const auto ch = testutil::random_channel(6, 4, 32);
    const auto c = make_constellation(Modulation::QAM64, 1.0);
    cfg.noise_variance = 1e-14;
    const PrecoderHandle h = build_precoder(spec_for(PrecoderVariant::WF), ch, cfg);
    for (auto mode : {BetaMode::Perfect, BetaMode::MlePilot}) {
        std::mt19937_64 rng(3);
        const MetricAccumulator acc = simulate_link(h, ch, cfg, c, mode, 200, rng);
        CHECK(acc.bit_errors == 0);
        CHECK(acc.bits_sent == 200 * 4 * 6);
        CHECK(acc.vectors_sent == 200);
        CHECK(evm(acc) < 1e-4);
    }
}

TEST_CASE("names") {
    for (auto v : kAll) CHECK(parse_precoder_variant(precoder_variant_name(v)) == v);
    CHECK_THROWS_AS(parse_precoder_variant("zf"), std::invalid_argument);
    CHECK(parse_beta_mode("mle-pilot") == BetaMode::MlePilot);
    CHECK(parse_beta_mode("perfect") == BetaMode::Perfect);
    CHECK_THROWS_AS(parse_beta_mode("genie"), std::invalid_argument);
}
