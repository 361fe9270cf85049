#include "fawp/fawp_matrices.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fawp {

CMatrix PreFawpMatrix::equivalent() const {
    return a * alpha.conjugate().asDiagonal();
}

CMatrix PostFawpMatrix::equivalent() const {
    return zeta.asDiagonal() * z.adjoint();
}

namespace {

void check_index(int idx, int bound, const char* what) {
    if (idx < 0 || idx >= bound) throw std::out_of_range(std::string(what) + " index out of range");
}

double magnitude_bound(const CVector& v) {
    return std::max(v.real().cwiseAbs().maxCoeff(), v.imag().cwiseAbs().maxCoeff());
}

// Shared enumeration for both oracles. `objective` scores one candidate.
template <typename Objective>
SearchResult exhaustive_search(int length, const FiniteAlphabet& alphabet, Objective&& objective) {
    const std::vector<cdouble> elems = alphabet.elements();
    const double space = std::pow(static_cast<double>(elems.size()), length);
    if (space > kBruteForceLimit)
        throw std::invalid_argument("instance too large for exhaustive search");

    // The first entry only ranges over the open first quadrant.
    std::vector<int> first;
    for (int i = 0; i < static_cast<int>(elems.size()); ++i)
        if (elems[i].real() > 0.0 && elems[i].imag() > 0.0) first.push_back(i);

    std::vector<int> digit(length, 0);
    CVector cand(length);
    SearchResult best;
    best.vector = CVector::Zero(length);
    bool have_best = false;
    for (;;) {
        cand[0] = elems[first[digit[0]]];
        for (int k = 1; k < length; ++k) cand[k] = elems[digit[k]];
        const double obj = objective(cand);
        if (!have_best || obj < best.objective) {
            best.objective = obj;
            best.vector = cand;
            have_best = true;
        }
        // Last entry is the fastest-moving digit.
        int k = length - 1;
        for (; k >= 0; --k) {
            const int radix = k == 0 ? static_cast<int>(first.size()) : static_cast<int>(elems.size());
            if (++digit[k] < radix) break;
            digit[k] = 0;
        }
        if (k < 0) break;
    }
    return best;
}

} // namespace

cdouble pre_scaling(const ChannelMatrix& h, const CVector& a, int u, double kappa) {
    check_index(u, h.num_ues(), "UE");
    const double an = a.squaredNorm();
    if (!(an > 0.0)) throw std::invalid_argument("pre-FAWP column is all-zero");
    const CVector ha = h.matrix() * a;
    return ha[u] / (ha.squaredNorm() + kappa * an);
}

cdouble post_scaling(const ChannelMatrix& h, const CVector& z, int b, double kappa) {
    check_index(b, h.num_antennas(), "antenna");
    const double zn = z.squaredNorm();
    if (!(zn > 0.0)) throw std::invalid_argument("post-FAWP column is all-zero");
    const CVector hz = h.matrix().adjoint() * z;
    return hz[b] / (hz.squaredNorm() + kappa * zn);
}

double pre_objective(const ChannelMatrix& h, const CVector& a, int u, double kappa) {
    check_index(u, h.num_ues(), "UE");
    const CVector ha = h.matrix() * a;
    const double gain = std::norm(ha[u]);
    if (!(gain > 0.0)) return kUnusableObjective;
    return (ha.squaredNorm() + kappa * a.squaredNorm()) / gain;
}

double post_objective(const ChannelMatrix& h, const CVector& z, int b, double kappa) {
    check_index(b, h.num_antennas(), "antenna");
    const CVector hz = h.matrix().adjoint() * z;
    const double gain = std::norm(hz[b]);
    if (!(gain > 0.0)) return kUnusableObjective;
    return (hz.squaredNorm() + kappa * z.squaredNorm()) / gain;
}

double pre_column_cost(const ChannelMatrix& h, const CVector& q, int u, double kappa) {
    CVector r = -(h.matrix() * q);
    r[u] += 1.0;
    return r.squaredNorm() + kappa * q.squaredNorm();
}

double post_row_cost(const ChannelMatrix& h, const CVector& q_row, int b, double kappa) {
    CVector r = -(h.matrix().transpose() * q_row);
    r[b] += 1.0;
    return r.squaredNorm() + kappa * q_row.squaredNorm();
}

CVector quantize_vector(const CVector& v, const FiniteAlphabet& alphabet) {
    const double w_max = magnitude_bound(v);
    if (!(w_max > 0.0)) throw std::invalid_argument("cannot quantize an all-zero vector");
    const int n = alphabet.levels_per_component();
    const double width = 2.0 * w_max / n;
    auto level = [&](double x) {
        const int k = std::clamp(static_cast<int>(std::floor((x + w_max) / width)), 0, n - 1);
        return static_cast<double>(2 * k - n + 1);
    };
    CVector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = cdouble(level(v[i].real()), level(v[i].imag()));
    return out;
}

PreFawpMatrix quantize_pre(const ChannelMatrix& h, const CMatrix& q_wf, double kappa,
                           const FiniteAlphabet& alphabet) {
    const int b_ant = h.num_antennas();
    const int u_cnt = h.num_ues();
    if (q_wf.rows() != b_ant || q_wf.cols() != u_cnt)
        throw std::invalid_argument("Q^WF dimensions do not match channel");
    PreFawpMatrix m;
    m.bits = alphabet.bits;
    m.a.resize(b_ant, u_cnt);
    m.alpha.resize(u_cnt);
    for (int u = 0; u < u_cnt; ++u) {
        m.a.col(u) = quantize_vector(q_wf.col(u), alphabet);
        m.alpha[u] = pre_scaling(h, m.a.col(u), u, kappa);
    }
    return m;
}

PostFawpMatrix quantize_post(const ChannelMatrix& h, const CMatrix& q_wf, double kappa,
                             const FiniteAlphabet& alphabet) {
    const int b_ant = h.num_antennas();
    const int u_cnt = h.num_ues();
    if (q_wf.rows() != b_ant || q_wf.cols() != u_cnt)
        throw std::invalid_argument("Q^WF dimensions do not match channel");
    PostFawpMatrix m;
    m.bits = alphabet.bits;
    m.z.resize(u_cnt, b_ant);
    m.zeta.resize(b_ant);
    for (int b = 0; b < b_ant; ++b) {
        // The quantized row of Q^WF is row b of Z^H, i.e. conj(z_b).
        m.z.col(b) = quantize_vector(q_wf.row(b).transpose(), alphabet).conjugate();
        m.zeta[b] = post_scaling(h, m.z.col(b), b, kappa);
    }
    return m;
}

SearchResult brute_force_pre(const ChannelMatrix& h, int u, double kappa,
                             const FiniteAlphabet& alphabet) {
    check_index(u, h.num_ues(), "UE");
    return exhaustive_search(h.num_antennas(), alphabet,
                             [&](const CVector& a) { return pre_objective(h, a, u, kappa); });
}

SearchResult brute_force_post(const ChannelMatrix& h, int b, double kappa,
                              const FiniteAlphabet& alphabet) {
    check_index(b, h.num_antennas(), "antenna");
    return exhaustive_search(h.num_ues(), alphabet,
                             [&](const CVector& z) { return post_objective(h, z, b, kappa); });
}

CVector apply_pre(const PreFawpMatrix& m, const SymbolVector& s) {
    if (s.size() != m.a.cols()) throw std::invalid_argument("symbol vector length mismatch");
    return m.a * (m.alpha.conjugate().cwiseProduct(s));
}

CVector apply_post(const PostFawpMatrix& m, const SymbolVector& s) {
    if (s.size() != m.z.rows()) throw std::invalid_argument("symbol vector length mismatch");
    return m.zeta.cwiseProduct(m.z.adjoint() * s);
}

} // namespace fawp
