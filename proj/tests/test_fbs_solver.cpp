#include "fawp/fbs_solver.hpp"
#include "fawp/seed.hpp"
#include "fawp/wf_precoder.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <sstream>

using namespace fawp;

namespace {

// f(a) = ½||G a||² − (γ/2)|g_row a|² evaluated for the pre problem (G = H).
double pre_smooth(const ChannelMatrix& h, const CVector& a, int u, double gamma) {
    return 0.5 * (h.matrix() * a).squaredNorm() - 0.5 * gamma * std::norm(h.row(u).dot(a.conjugate()));
}

double post_smooth(const ChannelMatrix& h, const CVector& z, int b, double gamma) {
    return 0.5 * (h.matrix().adjoint() * z).squaredNorm() - 0.5 * gamma * std::norm(h.col(b).dot(z));
}

// Central differences of f over the real 2n-dimensional parametrization,
// assembled as the complex (Wirtinger) gradient Re-part + j Im-part.
template <class F>
CVector numeric_gradient(F f, const CVector& x, double eps) {
    CVector g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        CVector p = x, m = x;
        p[i] += eps;
        m[i] -= eps;
        const double dre = (f(p) - f(m)) / (2 * eps);
        p = x;
        m = x;
        p[i] += cdouble(0, eps);
        m[i] -= cdouble(0, eps);
        const double dim = (f(p) - f(m)) / (2 * eps);
        g[i] = {dre, dim};
    }
    return g;
}

} // namespace

TEST_CASE("prox_g") {
    CHECK(prox_g({0, 0}, 3.0) == cdouble(0, 0));
    CHECK(prox_g({2, 2}, 1.0) == cdouble(1, 1));
    CHECK(std::abs(prox_g({-0.5, -3}, 0.5) - cdouble(-0.25, -1)) < 1e-15);
}

TEST_CASE("prox_g stays in the hull and is idempotent once saturating") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> nu_dist(1.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const cdouble v = 3.0 * testutil::random_cvector(rng, 1)[0];
        const double nu = nu_dist(rng);
        const cdouble p = prox_g(v, nu);
        CHECK(std::abs(p.real()) <= 1.0);
        CHECK(std::abs(p.imag()) <= 1.0);
        if (std::abs(p.real()) == 1.0 && std::abs(p.imag()) == 1.0) CHECK(prox_g(p, nu) == p);
    }
}

TEST_CASE("FBS steps: zero step and pure shrinkage") {
    std::mt19937_64 rng(1);
    const auto h = testutil::random_channel(5, 3, 7);
    const CVector a = testutil::random_cvector(rng, 7);
    const CVector z = testutil::random_cvector(rng, 3);
    CHECK((pre_fbs_step(h, a, 1, 0.0, 1.3) - a).norm() == 0.0);
    CHECK((post_fbs_step(h, z, 2, 0.0, 1.3) - z).norm() == 0.0);
    const ChannelMatrix eye(CMatrix::Identity(4, 4));
    const CVector v = testutil::random_cvector(rng, 4);
    CHECK((pre_fbs_step(eye, v, 0, 0.25, 0.0) - 0.75 * v).norm() < 1e-14);
    CHECK((post_fbs_step(eye, v, 0, 0.25, 0.0) - 0.75 * v).norm() < 1e-14);
}

TEST_CASE("FBS gradient steps match finite differences") {
    std::mt19937_64 rng(9);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto h = testutil::random_channel(seed, 4, 16);
        const double tau = 0.7, gamma = 1.2;
        const CVector a = testutil::random_cvector(rng, 16);
        const CVector grad = (a - pre_fbs_step(h, a, 2, tau, gamma)) / tau;
        const CVector num = numeric_gradient([&](const CVector& x) { return pre_smooth(h, x, 2, gamma); }, a, 1e-5);
        CHECK((grad - num).norm() / num.norm() < 1e-6);

        const CVector z = testutil::random_cvector(rng, 4);
        const CVector gz = (z - post_fbs_step(h, z, 11, tau, gamma)) / tau;
        const CVector nz = numeric_gradient([&](const CVector& x) { return post_smooth(h, x, 11, gamma); }, z, 1e-5);
        CHECK((gz - nz).norm() / nz.norm() < 1e-6);
    }
}

TEST_CASE("projection onto the alphabet") {
    const auto x1 = make_alphabet(1);
    CVector v(3);
    v << cdouble(0.2, -0.1), cdouble(0.0, 0.5), cdouble(-0.7, 0.0);
    CVector expect(3);
    expect << cdouble(1, -1), cdouble(1, 1), cdouble(-1, 1);
    CHECK(project_to_alphabet(v, x1) == expect);
    CHECK(project_to_alphabet(CVector::Zero(3), x1).size() == 0);

    // Two bits: scale so the largest part sits at 3, then round to odd levels.
    const auto x2 = make_alphabet(2);
    CVector w(2);
    w << cdouble(1.5, 1.0), cdouble(-0.1, 0.0);
    CVector e2(2);
    // 1.5 -> 3; 1.0 -> 2 is a tie between 1 and 3, larger magnitude wins; −0.2 -> −1; 0 -> +1.
    e2 << cdouble(3, 3), cdouble(-1, 1);
    CHECK(project_to_alphabet(w, x2) == e2);
    for (const auto& c : project_to_alphabet(CVector::Constant(4, cdouble(0.3, -0.9)), make_alphabet(3)))
        CHECK(make_alphabet(3).contains(c));
}

TEST_CASE("params validation and text round trip") {
    FbsParams p = FbsParams::constant(4, 0.1, 1.5, 1.0, InitMode::FawpWf);
    CHECK_NOTHROW(p.validate());
    p.tau[2] = 0.123456789012345678;
    p.gamma[3] = -0.25;
    std::istringstream in(format_params(p));
    CHECK(parse_params(in) == p);

    FbsParams bad = p;
    bad.nu.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.tau[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    std::istringstream missing("t_max=2\ntau=1,1\nnu=1,1\n");
    CHECK_THROWS_AS(parse_params(missing), std::invalid_argument);
    std::istringstream junk("t_max=1\ntau=x\nnu=1\ngamma=1\n");
    CHECK_THROWS_AS(parse_params(junk), std::invalid_argument);
    std::istringstream commented("# tuned\nt_max=1\ntau=0.5\nnu=1\ngamma=1 # const\ninit=mrt\n");
    CHECK(parse_params(commented) == FbsParams::constant(1, 0.5, 1.0, 1.0));
}

TEST_CASE("scalar problems reach the optimum") {
    const ChannelMatrix one(CMatrix::Constant(1, 1, cdouble(0.3, -2.0)));
    const auto x = make_alphabet(1);
    const FbsParams p = default_params(one, 10);
    const auto pre = pre_fawp_fbs(one, 0, 0.0, x, p);
    CHECK(pre.trace.final_objective == doctest::Approx(1.0));
    CHECK(pre.trace.iterations == 10);
    CHECK(pre.trace.objective.size() == 10);
    CHECK(x.contains(pre.a[0]));
    const auto post = post_fawp_fbs(one, 0, 0.0, x, p);
    CHECK(post.trace.final_objective == doctest::Approx(1.0));
}

TEST_CASE("matrix solvers agree with the per-column solvers and are deterministic") {
    const auto h = testutil::random_channel(12, 4, 16);
    const auto x = make_alphabet(2);
    const FbsParams p = FbsParams::constant(6, 1.0 / 64.0, 1.3, 1.0, InitMode::FawpWf);
    const PreFawpMatrix m = pre_fawp_fbs_matrix(h, 0.4, x, p);
    for (int u = 0; u < 4; ++u) {
        const auto r = pre_fawp_fbs(h, u, 0.4, x, p);
        CHECK(m.a.col(u) == r.a);
        CHECK(m.alpha[u] == r.alpha);
        for (const auto& c : r.a) CHECK(x.contains(c));
    }
    const PreFawpMatrix again = pre_fawp_fbs_matrix(h, 0.4, x, p);
    CHECK(again.a == m.a);
    CHECK(again.alpha == m.alpha);

    const PostFawpMatrix pm = post_fawp_fbs_matrix(h, 0.4, x, p);
    for (int b = 0; b < 16; b += 5) {
        const auto r = post_fawp_fbs(h, b, 0.4, x, p);
        CHECK(pm.z.col(b) == r.z);
        CHECK(pm.zeta[b] == r.zeta);
    }
}

TEST_CASE("no solver beats the exhaustive optimum") {
    const auto x = make_alphabet(1);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto h = testutil::random_channel(seed, 2, 4);
        const FbsParams p = default_params(h, 10);
        for (int u = 0; u < 2; ++u)
            CHECK(pre_fawp_fbs(h, u, 0.2, x, p).trace.final_objective >=
                  brute_force_pre(h, u, 0.2, x).objective - 1e-12);
        for (int b = 0; b < 4; ++b)
            CHECK(post_fawp_fbs(h, b, 0.2, x, p).trace.final_objective >=
                  brute_force_post(h, b, 0.2, x).objective - 1e-12);
    }
}

TEST_CASE("tuning: degenerate budget returns the defaults") {
    SystemConfig cfg;
    cfg.num_bs_antennas = 16;
    cfg.num_ues = 4;
    cfg.noise_variance = 0.1;
    const ChannelSampler sampler = [](std::uint64_t s) { return testutil::random_channel(s, 4, 16); };
    TuneOptions opt;
    opt.budget = 1;
    opt.training_channels = 2;
    const FbsParams p = tune_params(sampler, cfg, make_alphabet(1), opt);
    const auto first = sampler(split_seed(opt.seed, 0, 0, SeedRole::Tuning));
    CHECK(p == default_params(first, opt.t_max, opt.init));
}

TEST_CASE("tuned schedules beat the defaults on held-out channels") {
    SystemConfig cfg;
    cfg.num_bs_antennas = 32;
    cfg.num_ues = 4;
    cfg.noise_variance = 0.1;
    const ChannelSampler sampler = [](std::uint64_t s) { return testutil::random_channel(s, 4, 32); };
    TuneOptions opt;
    opt.budget = 80;
    opt.training_channels = 8;
    const auto x = make_alphabet(1);
    const FbsParams tuned = tune_params(sampler, cfg, x, opt);
    CHECK(tune_params(sampler, cfg, x, opt) == tuned);

    std::vector<ChannelMatrix> held_out;
    for (std::uint64_t s = 0; s < 8; ++s) held_out.push_back(sampler(0xabc0 + s));
    const double kappa = compute_kappa(cfg);
    const double t = mean_fbs_objective(held_out, kappa, x, tuned, FawpStructure::Pre, 64);
    const double d = mean_fbs_objective(held_out, kappa, x, default_params(held_out[0], opt.t_max), FawpStructure::Pre, 64);
    CHECK(t <= d);
}

TEST_CASE("large 1-bit pre problems: tuned FBS beats FAWP-WF on most columns") {
    SystemConfig cfg;
    cfg.noise_variance = 0.1;
    const ChannelSampler sampler = [](std::uint64_t s) { return testutil::random_channel(s, 16, 256); };
    TuneOptions opt;
    opt.budget = 60;
    opt.training_channels = 4;
    opt.max_problems_per_channel = 8;
    const auto x = make_alphabet(1);
    const FbsParams p = tune_params(sampler, cfg, x, opt);
    const double kappa = compute_kappa(cfg);
    int better = 0, total = 0;
    for (std::uint64_t s = 0; s < 4; ++s) {
        const auto h = sampler(0x5eed + s);
        const PreFawpMatrix wf = quantize_pre(h, wf_woodbury(h, kappa), kappa, x);
        for (int u = 0; u < 16; ++u, ++total)
            if (pre_fawp_fbs(h, u, kappa, x, p).trace.final_objective < pre_objective(h, wf.a.col(u), u, kappa)) ++better;
    }
    CHECK(better >= 0.9 * total);
}

TEST_CASE("large 1-bit post problems: FBS does not end above its MRT start") {
    SystemConfig cfg;
    cfg.noise_variance = 0.1;
    const ChannelSampler sampler = [](std::uint64_t s) { return testutil::random_channel(s, 16, 256); };
    TuneOptions opt;
    opt.structure = FawpStructure::Post;
    opt.budget = 60;
    opt.training_channels = 4;
    opt.max_problems_per_channel = 16;
    const auto x = make_alphabet(1);
    const FbsParams p = tune_params(sampler, cfg, x, opt);
    const double kappa = compute_kappa(cfg);
    // Per-antenna MSE contributions 1 - 1/objective, summed over the array.
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto h = sampler(0x77 + s);
        double fbs = 0.0, start = 0.0;
        for (int b = 0; b < 256; ++b) {
            fbs += 1.0 - 1.0 / post_fawp_fbs(h, b, kappa, x, p).trace.final_objective;
            start += 1.0 - 1.0 / post_objective(h, project_to_alphabet(h.col(b), x), b, kappa);
        }
        CHECK(fbs <= start);
    }
}
