#pragma once

#include "fawp/core_types.hpp"
#include "fawp/fawp_matrices.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace fawp {

enum class InitMode { Mrt, FawpWf };
enum class FawpStructure { Pre, Post };

/// Per-iteration FBS schedules. nu absorbs the hull-attraction constant
/// through nu = 1 / (1 + tau (kappa − delta)), so delta is not stored.
struct FbsParams {
    int t_max = 10;
    std::vector<double> tau;
    std::vector<double> nu;
    std::vector<double> gamma;
    InitMode init = InitMode::Mrt;

    void validate() const;
    static FbsParams constant(int t_max, double tau, double nu, double gamma,
                              InitMode init = InitMode::Mrt);

    bool operator==(const FbsParams&) const = default;
};

struct FbsTrace {
    std::vector<double> objective; // ratio objective of the projected iterate, per iteration
    double final_objective = kUnusableObjective;
    int iterations = 0;
    bool fell_back = false; // degenerate iterate replaced by the FAWP-WF vector
};

/// Scaled clip onto the unit hull square, per component. sgn(0) = +1.
cdouble prox_g(cdouble v, double nu);

/// a − tau (H^H H a − gamma (h_u^r)^H h_u^r a), two matrix-vector products.
CVector pre_fbs_step(const ChannelMatrix& h, const CVector& a, int u, double tau, double gamma);
/// z − tau (H H^H z − gamma h_b h_b^H z).
CVector post_fbs_step(const ChannelMatrix& h, const CVector& z, int b, double tau, double gamma);

/// Scales an iterate so its largest component part sits on the alphabet
/// half-width and rounds each part to the nearest level (ties toward the larger
/// magnitude, 0 toward +1). Returns an empty vector for an all-zero iterate.
CVector project_to_alphabet(const CVector& iterate, const FiniteAlphabet& alphabet);

struct PreFbsResult {
    CVector a;
    cdouble alpha;
    FbsTrace trace;
};

struct PostFbsResult {
    CVector z;
    cdouble zeta;
    FbsTrace trace;
};

PreFbsResult pre_fawp_fbs(const ChannelMatrix& h, int u, double kappa,
                          const FiniteAlphabet& alphabet, const FbsParams& params);
PostFbsResult post_fawp_fbs(const ChannelMatrix& h, int b, double kappa,
                            const FiniteAlphabet& alphabet, const FbsParams& params);

/// All U columns (resp. B antennas); Q^WF is computed once when needed.
PreFawpMatrix pre_fawp_fbs_matrix(const ChannelMatrix& h, double kappa,
                                  const FiniteAlphabet& alphabet, const FbsParams& params);
PostFawpMatrix post_fawp_fbs_matrix(const ChannelMatrix& h, double kappa,
                                    const FiniteAlphabet& alphabet, const FbsParams& params);

/// tau = 1 / ||H||_F² (upper bound on the largest eigenvalue), nu = 1, gamma = 1.2.
FbsParams default_params(const ChannelMatrix& h, int t_max, InitMode init = InitMode::Mrt);

using ChannelSampler = std::function<ChannelMatrix(std::uint64_t seed)>;

struct TuneOptions {
    FawpStructure structure = FawpStructure::Pre;
    int t_max = 10;
    InitMode init = InitMode::Mrt;
    int budget = 300;               // objective evaluations
    int training_channels = 32;
    int max_problems_per_channel = 64;
    std::uint64_t seed = 1;
};

/// Mean ratio objective of the projected FBS output over the given problems.
double mean_fbs_objective(const std::vector<ChannelMatrix>& channels, double kappa,
                          const FiniteAlphabet& alphabet, const FbsParams& params,
                          FawpStructure structure, int max_problems_per_channel);

/// Deterministic coordinate search over constant schedules followed by
/// per-iteration refinement passes. budget <= 1 returns default_params on the
/// first training channel.
FbsParams tune_params(const ChannelSampler& sampler, const SystemConfig& cfg,
                      const FiniteAlphabet& alphabet, const TuneOptions& options);

std::string format_params(const FbsParams& params);
FbsParams parse_params(std::istream& in);
FbsParams load_params(const std::string& path);
void save_params(const FbsParams& params, const std::string& path);

} // namespace fawp
