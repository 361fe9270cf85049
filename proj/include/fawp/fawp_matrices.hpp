#pragma once

#include "fawp/core_types.hpp"

#include <limits>

namespace fawp {

/// Pre-FAWP matrix Q = A diag(conj(alpha)): per-UE scaling applied to the
/// symbols before the low-resolution product.
struct PreFawpMatrix {
    CMatrix a;      // B x U, entries in X
    CVector alpha;  // U
    int bits = 1;

    int num_antennas() const { return static_cast<int>(a.rows()); }
    int num_ues() const { return static_cast<int>(a.cols()); }
    /// Dense B x U equivalent. Tests and beta only.
    CMatrix equivalent() const;
};

/// Post-FAWP matrix Q = diag(zeta) Z^H: per-antenna scaling applied after the
/// low-resolution product. Z is U x B so that z_b is a column.
struct PostFawpMatrix {
    CMatrix z;      // U x B, entries in X
    CVector zeta;   // B
    int bits = 1;

    int num_antennas() const { return static_cast<int>(z.cols()); }
    int num_ues() const { return static_cast<int>(z.rows()); }
    CMatrix equivalent() const;
};

/// Returned by the objectives when |h a|² vanishes.
inline constexpr double kUnusableObjective = std::numeric_limits<double>::infinity();

/// alpha_u = h_u^r a / (||H a||² + kappa ||a||²).
cdouble pre_scaling(const ChannelMatrix& h, const CVector& a, int u, double kappa);
/// zeta_b = h_b^H z / (||H^H z||² + kappa ||z||²).
cdouble post_scaling(const ChannelMatrix& h, const CVector& z, int b, double kappa);

/// (||H a||² + kappa ||a||²) / |h_u^r a|², or kUnusableObjective.
double pre_objective(const ChannelMatrix& h, const CVector& a, int u, double kappa);
/// (||H^H z||² + kappa ||z||²) / |h_b^H z|², or kUnusableObjective.
double post_objective(const ChannelMatrix& h, const CVector& z, int b, double kappa);

/// Column contribution ||e_u − H q||² + kappa ||q||² of the matrix objective.
double pre_column_cost(const ChannelMatrix& h, const CVector& q, int u, double kappa);
/// Row contribution ||e_b^T − q^r H||² + kappa ||q^r||², with q^r given as a column.
double post_row_cost(const ChannelMatrix& h, const CVector& q_row, int b, double kappa);

/// Uniform-bin quantization of one real/imaginary pair vector onto the
/// odd-integer alphabet, using w_max over both parts. Throws for an all-zero input.
CVector quantize_vector(const CVector& v, const FiniteAlphabet& alphabet);

/// FAWP-WF: quantize each column of Q^WF, then scale with pre_scaling.
PreFawpMatrix quantize_pre(const ChannelMatrix& h, const CMatrix& q_wf, double kappa,
                           const FiniteAlphabet& alphabet);
/// FAWP-WF: quantize each row of Q^WF into a row of Z^H, then scale with post_scaling.
PostFawpMatrix quantize_post(const ChannelMatrix& h, const CMatrix& q_wf, double kappa,
                             const FiniteAlphabet& alphabet);

struct SearchResult {
    CVector vector;
    double objective = kUnusableObjective;
};

/// Largest search space the exhaustive oracles accept.
inline constexpr double kBruteForceLimit = 1e6;

/// Exact minimizer of pre_objective over X^B. The first entry is pinned to the
/// first quadrant since the objective is invariant to multiplication by j.
/// Ties keep the earliest candidate in enumeration order.
SearchResult brute_force_pre(const ChannelMatrix& h, int u, double kappa,
                             const FiniteAlphabet& alphabet);
/// Exact minimizer of post_objective over X^U.
SearchResult brute_force_post(const ChannelMatrix& h, int b, double kappa,
                              const FiniteAlphabet& alphabet);

/// A (diag(conj(alpha)) s).
CVector apply_pre(const PreFawpMatrix& m, const SymbolVector& s);
/// diag(zeta) (Z^H s).
CVector apply_post(const PostFawpMatrix& m, const SymbolVector& s);

} // namespace fawp
