#include "fawp/fbs_solver.hpp"

#include "fawp/seed.hpp"
#include "fawp/wf_precoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fawp {

void FbsParams::validate() const {
    if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
    const auto n = static_cast<std::size_t>(t_max);
    if (tau.size() != n || nu.size() != n || gamma.size() != n)
        throw std::invalid_argument("FBS schedules must have length t_max");
    for (std::size_t t = 0; t < n; ++t) {
        if (!(tau[t] > 0.0) || !std::isfinite(tau[t])) throw std::invalid_argument("tau must be positive");
        if (!(nu[t] > 0.0) || !std::isfinite(nu[t])) throw std::invalid_argument("nu must be positive");
        if (!std::isfinite(gamma[t])) throw std::invalid_argument("gamma must be finite");
    }
}

FbsParams FbsParams::constant(int t_max, double tau, double nu, double gamma, InitMode init) {
    FbsParams p;
    p.t_max = t_max;
    p.tau.assign(t_max, tau);
    p.nu.assign(t_max, nu);
    p.gamma.assign(t_max, gamma);
    p.init = init;
    return p;
}

cdouble prox_g(cdouble v, double nu) {
    auto clip = [nu](double x) {
        const double sgn = x >= 0.0 ? 1.0 : -1.0;
        return sgn * std::min(nu * std::abs(x), 1.0);
    };
    return {clip(v.real()), clip(v.imag())};
}

namespace {

// Both FAWP structures reduce to the same problem on a matrix G whose row `row`
// plays the role of the served UE: G = H for pre-FAWP, G = H^H for post-FAWP.
CVector gradient_step(const CMatrix& g, const CVector& a, int row, double tau, double gamma) {
    CVector ga = g * a;
    ga[row] *= (1.0 - gamma);
    return a - tau * (g.adjoint() * ga);
}

double ratio_objective(const CMatrix& g, const CVector& a, int row, double kappa) {
    const CVector ga = g * a;
    const double gain = std::norm(ga[row]);
    if (!(gain > 0.0)) return kUnusableObjective;
    return (ga.squaredNorm() + kappa * a.squaredNorm()) / gain;
}

struct CoreResult {
    CVector vector; // over X, empty when the iterate degenerated
    FbsTrace trace;
};

CoreResult run_fbs(const CMatrix& g, int row, double kappa, const FiniteAlphabet& alphabet,
                   const FbsParams& params, CVector iterate, bool record_trace) {
    CoreResult out;
    for (int t = 0; t < params.t_max; ++t) {
        CVector v = gradient_step(g, iterate, row, params.tau[t], params.gamma[t]);
        for (Eigen::Index i = 0; i < v.size(); ++i) iterate[i] = prox_g(v[i], params.nu[t]);
        if (record_trace) {
            const CVector proj = project_to_alphabet(iterate, alphabet);
            out.trace.objective.push_back(proj.size() ? ratio_objective(g, proj, row, kappa)
                                                      : kUnusableObjective);
        }
    }
    out.trace.iterations = params.t_max;
    out.vector = project_to_alphabet(iterate, alphabet);
    return out;
}

CVector initial_iterate(const CMatrix& g, int row, const FiniteAlphabet& alphabet, InitMode init,
                        const CVector& wf_vector) {
    if (init == InitMode::Mrt) return g.row(row).adjoint();
    return quantize_vector(wf_vector, alphabet) / alphabet.hull_bound();
}

// Runs the core and applies the degenerate-iterate fallback.
CoreResult solve_one(const CMatrix& g, int row, double kappa, const FiniteAlphabet& alphabet,
                     const FbsParams& params, const CVector& wf_vector, bool record_trace) {
    CoreResult r = run_fbs(g, row, kappa, alphabet, params,
                           initial_iterate(g, row, alphabet, params.init, wf_vector), record_trace);
    if (r.vector.size() == 0) {
        r.vector = quantize_vector(wf_vector, alphabet);
        r.trace.fell_back = true;
    }
    r.trace.final_objective = ratio_objective(g, r.vector, row, kappa);
    return r;
}

} // namespace

CVector pre_fbs_step(const ChannelMatrix& h, const CVector& a, int u, double tau, double gamma) {
    if (a.size() != h.num_antennas()) throw std::invalid_argument("iterate length must be B");
    if (u < 0 || u >= h.num_ues()) throw std::out_of_range("UE index out of range");
    return gradient_step(h.matrix(), a, u, tau, gamma);
}

CVector post_fbs_step(const ChannelMatrix& h, const CVector& z, int b, double tau, double gamma) {
    if (z.size() != h.num_ues()) throw std::invalid_argument("iterate length must be U");
    if (b < 0 || b >= h.num_antennas()) throw std::out_of_range("antenna index out of range");
    const CMatrix& hm = h.matrix();
    CVector hz = hm.adjoint() * z;
    hz[b] *= (1.0 - gamma);
    return z - tau * (hm * hz);
}

CVector project_to_alphabet(const CVector& iterate, const FiniteAlphabet& alphabet) {
    const double peak = std::max(iterate.real().cwiseAbs().maxCoeff(), iterate.imag().cwiseAbs().maxCoeff());
    if (!(peak > 0.0) || !std::isfinite(peak)) return {};
    const double bound = alphabet.hull_bound();
    const double scale = bound / peak;
    auto round_level = [bound](double x) {
        const double lower = 2.0 * std::floor((x - 1.0) / 2.0) + 1.0;
        const double upper = lower + 2.0;
        double level;
        const double dl = x - lower;
        const double du = upper - x;
        if (dl < du) level = lower;
        else if (du < dl) level = upper;
        else level = x >= 0.0 ? upper : lower; // tie: larger magnitude, 0 -> +1
        return std::clamp(level, -bound, bound);
    };
    CVector out(iterate.size());
    for (Eigen::Index i = 0; i < iterate.size(); ++i)
        out[i] = cdouble(round_level(iterate[i].real() * scale), round_level(iterate[i].imag() * scale));
    return out;
}

PreFbsResult pre_fawp_fbs(const ChannelMatrix& h, int u, double kappa,
                          const FiniteAlphabet& alphabet, const FbsParams& params) {
    params.validate();
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    if (u < 0 || u >= h.num_ues()) throw std::out_of_range("UE index out of range");
    // Needed for the FAWP-WF initializer and for the degenerate fallback.
    const CVector wf = wf_woodbury(h, kappa).col(u);
    CoreResult r = solve_one(h.matrix(), u, kappa, alphabet, params, wf, true);
    PreFbsResult out;
    out.alpha = pre_scaling(h, r.vector, u, kappa);
    out.a = std::move(r.vector);
    out.trace = std::move(r.trace);
    return out;
}

PostFbsResult post_fawp_fbs(const ChannelMatrix& h, int b, double kappa,
                            const FiniteAlphabet& alphabet, const FbsParams& params) {
    params.validate();
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    if (b < 0 || b >= h.num_antennas()) throw std::out_of_range("antenna index out of range");
    const CMatrix g = h.matrix().adjoint();
    // z_b^WF is the conjugate of row b of Q^WF.
    const CVector wf = wf_woodbury(h, kappa).row(b).adjoint();
    CoreResult r = solve_one(g, b, kappa, alphabet, params, wf, true);
    PostFbsResult out;
    out.zeta = post_scaling(h, r.vector, b, kappa);
    out.z = std::move(r.vector);
    out.trace = std::move(r.trace);
    return out;
}

PreFawpMatrix pre_fawp_fbs_matrix(const ChannelMatrix& h, double kappa,
                                  const FiniteAlphabet& alphabet, const FbsParams& params) {
    params.validate();
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    const CMatrix q_wf = wf_woodbury(h, kappa);
    PreFawpMatrix m;
    m.bits = alphabet.bits;
    m.a.resize(h.num_antennas(), h.num_ues());
    m.alpha.resize(h.num_ues());
    for (int u = 0; u < h.num_ues(); ++u) {
        CoreResult r = solve_one(h.matrix(), u, kappa, alphabet, params, q_wf.col(u), false);
        m.a.col(u) = r.vector;
        m.alpha[u] = pre_scaling(h, r.vector, u, kappa);
    }
    return m;
}

PostFawpMatrix post_fawp_fbs_matrix(const ChannelMatrix& h, double kappa,
                                    const FiniteAlphabet& alphabet, const FbsParams& params) {
    params.validate();
    if (kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
    const CMatrix q_wf = wf_woodbury(h, kappa);
    const CMatrix g = h.matrix().adjoint();
    PostFawpMatrix m;
    m.bits = alphabet.bits;
    m.z.resize(h.num_ues(), h.num_antennas());
    m.zeta.resize(h.num_antennas());
    for (int b = 0; b < h.num_antennas(); ++b) {
        CoreResult r = solve_one(g, b, kappa, alphabet, params, q_wf.row(b).adjoint(), false);
        m.z.col(b) = r.vector;
        m.zeta[b] = post_scaling(h, r.vector, b, kappa);
    }
    return m;
}

FbsParams default_params(const ChannelMatrix& h, int t_max, InitMode init) {
    return FbsParams::constant(t_max, 1.0 / h.matrix().squaredNorm(), 1.0, 1.2, init);
}

double mean_fbs_objective(const std::vector<ChannelMatrix>& channels, double kappa,
                          const FiniteAlphabet& alphabet, const FbsParams& params,
                          FawpStructure structure, int max_problems_per_channel) {
    double sum = 0.0;
    long count = 0;
    for (const auto& h : channels) {
        const bool pre = structure == FawpStructure::Pre;
        const CMatrix g = pre ? h.matrix() : CMatrix(h.matrix().adjoint());
        const int problems = static_cast<int>(g.rows());
        const int used = std::min(problems, std::max(1, max_problems_per_channel));
        CMatrix q_wf;
        if (params.init == InitMode::FawpWf) q_wf = wf_woodbury(h, kappa);
        for (int k = 0; k < used; ++k) {
            // Evenly spaced subset when the problem count is capped.
            const int row = static_cast<int>(static_cast<long>(k) * problems / used);
            CVector wf;
            if (params.init == InitMode::FawpWf)
                wf = pre ? CVector(q_wf.col(row)) : CVector(q_wf.row(row).adjoint());
            CoreResult r = run_fbs(g, row, kappa, alphabet, params,
                                   initial_iterate(g, row, alphabet, params.init, wf), false);
            const double obj = r.vector.size() ? ratio_objective(g, r.vector, row, kappa)
                                               : kUnusableObjective;
            sum += obj;
            ++count;
        }
    }
    return count ? sum / static_cast<double>(count) : kUnusableObjective;
}

FbsParams tune_params(const ChannelSampler& sampler, const SystemConfig& cfg,
                      const FiniteAlphabet& alphabet, const TuneOptions& options) {
    if (options.t_max < 1) throw std::invalid_argument("tuning needs t_max >= 1");
    if (options.training_channels < 1) throw std::invalid_argument("tuning needs training channels");
    std::vector<ChannelMatrix> train;
    train.reserve(options.training_channels);
    for (int i = 0; i < options.training_channels; ++i)
        train.push_back(sampler(split_seed(options.seed, static_cast<std::uint64_t>(i), 0, SeedRole::Tuning)));

    const FbsParams defaults = default_params(train.front(), options.t_max, options.init);
    if (options.budget <= 1) return defaults;

    const double kappa = compute_kappa(cfg);
    // Steps are searched relative to the mean nonzero eigenvalue of G^H G.
    double ref = 0.0;
    for (const auto& h : train) ref += h.num_ues() / h.matrix().squaredNorm();
    ref /= static_cast<double>(train.size());

    int evaluations = 0;
    auto score = [&](const FbsParams& p) {
        ++evaluations;
        return mean_fbs_objective(train, kappa, alphabet, p, options.structure,
                                  options.max_problems_per_channel);
    };
    auto remaining = [&] { return evaluations < options.budget; };

    FbsParams best = defaults;
    double best_score = score(best);

    const std::vector<double> tau_grid = {0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
    const std::vector<double> nu_grid = {0.9, 1.0, 1.1, 1.2, 1.35, 1.5, 1.75, 2.0, 2.5, 3.0};
    const std::vector<double> gamma_grid = {0.0, 0.5, 0.8, 1.0, 1.1, 1.2, 1.35, 1.5, 2.0, 3.0};

    // Coordinate descent over constant schedules.
    double tau_n = 1.0, nu_c = 1.2, gamma_c = 1.0;
    {
        const FbsParams start = FbsParams::constant(options.t_max, tau_n * ref, nu_c, gamma_c, options.init);
        if (remaining()) {
            const double s = score(start);
            if (s < best_score) {
                best_score = s;
                best = start;
            }
        }
    }
    for (int cycle = 0; cycle < 4 && remaining(); ++cycle) {
        bool moved = false;
        for (int coord = 0; coord < 3 && remaining(); ++coord) {
            const auto& grid = coord == 0 ? tau_grid : coord == 1 ? nu_grid : gamma_grid;
            for (double value : grid) {
                if (!remaining()) break;
                double t = tau_n, n = nu_c, g = gamma_c;
                (coord == 0 ? t : coord == 1 ? n : g) = value;
                if (t == tau_n && n == nu_c && g == gamma_c) continue;
                const FbsParams cand = FbsParams::constant(options.t_max, t * ref, n, g, options.init);
                const double s = score(cand);
                if (s < best_score) {
                    best_score = s;
                    best = cand;
                    tau_n = t;
                    nu_c = n;
                    gamma_c = g;
                    moved = true;
                }
            }
        }
        if (!moved) break;
    }

    // Per-iteration refinement.
    const double factors[] = {0.8, 1.25};
    for (bool improved = true; improved && remaining();) {
        improved = false;
        for (int t = 0; t < options.t_max && remaining(); ++t) {
            for (int coord = 0; coord < 3 && remaining(); ++coord) {
                for (double f : factors) {
                    if (!remaining()) break;
                    FbsParams cand = best;
                    auto& sched = coord == 0 ? cand.tau : coord == 1 ? cand.nu : cand.gamma;
                    sched[t] *= f;
                    if (coord == 2 && sched[t] == 0.0) continue;
                    const double s = score(cand);
                    if (s < best_score) {
                        best_score = s;
                        best = std::move(cand);
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
    return best;
}

} // namespace fawp
