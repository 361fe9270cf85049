#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fawp {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Length-U vector of transmit symbols, soft estimates or received samples.
using SymbolVector = CVector;

/// Narrowband downlink system: a B-antenna BS serving U < B single-antenna UEs.
struct SystemConfig {
    int num_bs_antennas = 256;  // B
    int num_ues = 16;           // U
    double symbol_energy = 1.0; // Es
    double total_power = 1.0;   // P
    double noise_variance = 1.0; // N0 per complex entry

    /// Throws std::invalid_argument when U >= B or an energy term is not positive.
    void validate() const;
};

/// P/N0 in dB to N0 for a given total power.
double noise_variance_from_snr_db(double snr_db, double total_power);

/// U x B downlink channel H. Rows h_u^r belong to UEs, columns h_b to BS antennas.
class ChannelMatrix {
public:
    ChannelMatrix() = default;
    explicit ChannelMatrix(CMatrix entries);

    int num_ues() const { return static_cast<int>(h_.rows()); }
    int num_antennas() const { return static_cast<int>(h_.cols()); }

    const CMatrix& matrix() const { return h_; }

    /// h_u^r as a 1 x B row.
    auto row(int u) const { return h_.row(u); }
    /// h_b as a U x 1 column.
    auto col(int b) const { return h_.col(b); }

private:
    CMatrix h_;
};

enum class Modulation { QPSK, QAM16, QAM64, QAM256 };

Modulation parse_modulation(std::string_view name);
std::string_view modulation_name(Modulation m);

/// Square Gray-mapped QAM constellation. points[label] is the symbol carrying
/// the bit pattern `label` (MSB first; the upper half of the bits selects the
/// in-phase level, the lower half the quadrature level).
struct Constellation {
    Modulation modulation = Modulation::QPSK;
    int bits_per_symbol = 2;
    double symbol_energy = 1.0;
    std::vector<cdouble> points;

    int size() const { return static_cast<int>(points.size()); }

    /// Index of the nearest point; ties go to the lowest label.
    int nearest(cdouble y) const;
};

Constellation make_constellation(Modulation m, double symbol_energy = 1.0);
Constellation make_constellation(std::string_view name, double symbol_energy = 1.0);

/// Per-component alphabet {±1, ±3, ..., ±(2^L − 1)}; X is its Cartesian square.
struct FiniteAlphabet {
    int bits = 1;
    std::vector<double> levels; // ascending

    /// Half-width of the convex hull square, 2^L − 1.
    double hull_bound() const { return static_cast<double>((1 << bits) - 1); }
    int levels_per_component() const { return 1 << bits; }
    int size() const { return levels_per_component() * levels_per_component(); }

    bool contains(double v) const;
    bool contains(cdouble x) const { return contains(x.real()) && contains(x.imag()); }

    /// Every element of X, real part major, both parts ascending.
    std::vector<cdouble> elements() const;
};

FiniteAlphabet make_alphabet(int bits);

} // namespace fawp
