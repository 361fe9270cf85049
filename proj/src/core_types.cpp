#include "fawp/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fawp {

void SystemConfig::validate() const {
    if (num_bs_antennas < 1 || num_ues < 1)
        throw std::invalid_argument("system size must be positive");
    if (num_ues >= num_bs_antennas)
        throw std::invalid_argument("system requires U < B");
    if (!(symbol_energy > 0.0) || !(total_power > 0.0) || !(noise_variance > 0.0))
        throw std::invalid_argument("Es, P and N0 must be strictly positive");
}

double noise_variance_from_snr_db(double snr_db, double total_power) {
    return total_power * std::pow(10.0, -snr_db / 10.0);
}

ChannelMatrix::ChannelMatrix(CMatrix entries) : h_(std::move(entries)) {
    if (h_.rows() < 1 || h_.cols() < 1)
        throw std::invalid_argument("channel matrix must be non-empty");
    if (!h_.allFinite())
        throw std::invalid_argument("channel matrix has non-finite entries");
}

Modulation parse_modulation(std::string_view name) {
    std::string key;
    for (char c : name)
        if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (key == "qpsk" || key == "4qam") return Modulation::QPSK;
    if (key == "16qam") return Modulation::QAM16;
    if (key == "64qam") return Modulation::QAM64;
    if (key == "256qam") return Modulation::QAM256;
    throw std::invalid_argument("unknown constellation '" + std::string(name) + "'");
}

std::string_view modulation_name(Modulation m) {
    switch (m) {
    case Modulation::QPSK: return "QPSK";
    case Modulation::QAM16: return "16-QAM";
    case Modulation::QAM64: return "64-QAM";
    case Modulation::QAM256: return "256-QAM";
    }
    return "?";
}

int Constellation::nearest(cdouble y) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
        const double d = std::norm(y - points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Constellation make_constellation(Modulation m, double symbol_energy) {
    if (!(symbol_energy > 0.0)) throw std::invalid_argument("symbol energy must be positive");
    int bits = 2;
    switch (m) {
    case Modulation::QPSK: bits = 2; break;
    case Modulation::QAM16: bits = 4; break;
    case Modulation::QAM64: bits = 6; break;
    case Modulation::QAM256: bits = 8; break;
    }
    const int axis_bits = bits / 2;
    const int axis_levels = 1 << axis_bits;
    const int order = axis_levels * axis_levels;
    // Average energy of the odd-integer grid is 2(M − 1)/3.
    const double scale = std::sqrt(symbol_energy * 3.0 / (2.0 * (order - 1)));

    // Gray code of amplitude index k selects the axis bits for level 2k − (L − 1).
    std::vector<int> level_of_code(axis_levels);
    for (int k = 0; k < axis_levels; ++k) level_of_code[k ^ (k >> 1)] = 2 * k - (axis_levels - 1);

    Constellation c;
    c.modulation = m;
    c.bits_per_symbol = bits;
    c.symbol_energy = symbol_energy;
    c.points.resize(order);
    for (int label = 0; label < order; ++label) {
        const int i_code = label >> axis_bits;
        const int q_code = label & (axis_levels - 1);
        c.points[label] = scale * cdouble(level_of_code[i_code], level_of_code[q_code]);
    }
    return c;
}

Constellation make_constellation(std::string_view name, double symbol_energy) {
    return make_constellation(parse_modulation(name), symbol_energy);
}

bool FiniteAlphabet::contains(double v) const {
    return std::find(levels.begin(), levels.end(), v) != levels.end();
}

std::vector<cdouble> FiniteAlphabet::elements() const {
    std::vector<cdouble> out;
    out.reserve(levels.size() * levels.size());
    for (double re : levels)
        for (double im : levels) out.emplace_back(re, im);
    return out;
}

FiniteAlphabet make_alphabet(int bits) {
    if (bits < 1) throw std::invalid_argument("alphabet needs at least one bit");
    if (bits > 16) throw std::invalid_argument("alphabet resolution above 16 bits is not supported");
    FiniteAlphabet a;
    a.bits = bits;
    const int n = 1 << bits;
    a.levels.reserve(n);
    for (int k = 0; k < n; ++k) a.levels.push_back(static_cast<double>(2 * k - (n - 1)));
    return a;
}

} // namespace fawp
