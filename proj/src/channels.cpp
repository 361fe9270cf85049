#include "fawp/channels.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fawp {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

double laplacian(std::mt19937_64& rng, double std_dev) {
    // A Laplacian with scale b has standard deviation b * sqrt(2).
    std::exponential_distribution<double> mag(std::numbers::sqrt2 / std_dev);
    std::bernoulli_distribution sign(0.5);
    const double m = mag(rng);
    return sign(rng) ? m : -m;
}

// Response of a planar array (columns along the horizontal axis), half-wavelength
// spacing; element b sits at column b % cols, row b / cols.
void steering(CVector& out, int cols, double azimuth, double elevation) {
    const double ph = kPi * std::sin(azimuth) * std::cos(elevation);
    const double pv = kPi * std::sin(elevation);
    for (Eigen::Index b = 0; b < out.size(); ++b) {
        const double phase = ph * static_cast<double>(b % cols) + pv * static_cast<double>(b / cols);
        out[b] = std::polar(1.0, -phase);
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

} // namespace

ChannelKind parse_channel_kind(std::string_view name) {
    if (name == "rayleigh") return ChannelKind::Rayleigh;
    if (name == "geom-los" || name == "los") return ChannelKind::GeomLoS;
    if (name == "geom-nlos" || name == "nlos") return ChannelKind::GeomNLoS;
    throw std::invalid_argument("unknown channel kind '" + std::string(name) + "'");
}

std::string_view channel_kind_name(ChannelKind kind) {
    switch (kind) {
    case ChannelKind::Rayleigh: return "rayleigh";
    case ChannelKind::GeomLoS: return "geom-los";
    case ChannelKind::GeomNLoS: return "geom-nlos";
    }
    return "?";
}

void ChannelSpec::validate(int num_ues) const {
    if (!(range_min_m > 0.0) || !(range_max_m >= range_min_m))
        throw std::invalid_argument("channel range must be positive and ordered");
    if (!(sector_deg > 0.0) || sector_deg > 360.0) throw std::invalid_argument("sector must be in (0, 360]");
    if (min_sep_deg < 0.0 || min_sep_deg * num_ues > sector_deg)
        throw std::invalid_argument("minimum angular separation is infeasible for the sector");
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
    if (num_paths < 1) throw std::invalid_argument("non-LoS model needs at least one cluster");
    if (angular_spread_deg < 0.0 || elevation_spread_deg < 0.0)
        throw std::invalid_argument("angular spreads must be non-negative");
    if (vertical_elements < 0) throw std::invalid_argument("vertical_elements must be non-negative");
}

ChannelMatrix gen_rayleigh(int num_antennas, int num_ues, std::uint64_t seed) {
    if (num_antennas < 1 || num_ues < 1) throw std::invalid_argument("channel dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMatrix h(num_ues, num_antennas);
    for (int u = 0; u < num_ues; ++u)
        for (int b = 0; b < num_antennas; ++b) {
            const double re = n(rng);
            const double im = n(rng);
            h(u, b) = cdouble(re, im);
        }
    return ChannelMatrix(std::move(h));
}

int array_rows(const ChannelSpec& spec, int num_antennas) {
    if (spec.vertical_elements > 0) {
        if (num_antennas % spec.vertical_elements != 0)
            throw std::invalid_argument("vertical_elements must divide the antenna count");
        return spec.vertical_elements;
    }
    int rows = 1;
    for (int r = 1; r * r <= num_antennas; ++r)
        if (num_antennas % r == 0) rows = r;
    return rows;
}

GeometricDraw gen_geometric_detailed(const ChannelSpec& spec, int num_antennas, int num_ues) {
    if (spec.kind == ChannelKind::Rayleigh) throw std::invalid_argument("spec is not a geometric channel");
    if (num_antennas < 1 || num_ues < 1) throw std::invalid_argument("channel dimensions must be positive");
    spec.validate(num_ues);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> angle(-spec.sector_deg / 2.0, spec.sector_deg / 2.0);
    std::uniform_real_distribution<double> area(spec.range_min_m * spec.range_min_m,
                                                spec.range_max_m * spec.range_max_m);

    // Sequential rejection sampling, restarting the whole placement when a UE
    // finds no admissible angle.
    constexpr int kTriesPerUe = 1000;
    constexpr int kRestarts = 100;
    GeometricDraw draw;
    bool placed = false;
    for (int attempt = 0; attempt < kRestarts && !placed; ++attempt) {
        draw.azimuth_deg.clear();
        placed = true;
        for (int u = 0; u < num_ues && placed; ++u) {
            bool ok = false;
            for (int t = 0; t < kTriesPerUe && !ok; ++t) {
                const double cand = angle(rng);
                ok = true;
                for (double other : draw.azimuth_deg)
                    if (std::abs(cand - other) < spec.min_sep_deg) {
                        ok = false;
                        break;
                    }
                if (ok) draw.azimuth_deg.push_back(cand);
            }
            placed = ok;
        }
    }
    if (!placed) throw std::runtime_error("UE placement infeasible after bounded rejection attempts");
    draw.distance_m.resize(num_ues);
    for (int u = 0; u < num_ues; ++u) draw.distance_m[u] = std::sqrt(area(rng));

    const int cols = num_antennas / array_rows(spec, num_antennas);
    const double wavelength = kSpeedOfLight / spec.carrier_hz;
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    CMatrix h(num_ues, num_antennas);
    CVector a(num_antennas);
    for (int u = 0; u < num_ues; ++u) {
        const double az = deg2rad(draw.azimuth_deg[u]);
        CVector row = CVector::Zero(num_antennas);
        if (spec.kind == ChannelKind::GeomLoS) {
            steering(a, cols, az, 0.0);
            const double path_phase = -2.0 * kPi * std::fmod(draw.distance_m[u] / wavelength, 1.0);
            row = std::polar(1.0, path_phase) * a;
        } else {
            for (int k = 0; k < spec.num_paths; ++k) {
                const double da = deg2rad(laplacian(rng, spec.angular_spread_deg));
                const double de = deg2rad(laplacian(rng, spec.elevation_spread_deg));
                const double re = gauss(rng);
                const double im = gauss(rng);
                steering(a, cols, az + da, de);
                row += cdouble(re, im) * a;
            }
        }
        // Perfect power control: every UE sees ||h_u||² = B.
        row *= std::sqrt(static_cast<double>(num_antennas)) / row.norm();
        h.row(u) = row.transpose();
    }
    draw.h = ChannelMatrix(std::move(h));
    return draw;
}

ChannelMatrix gen_geometric(const ChannelSpec& spec, int num_antennas, int num_ues) {
    return gen_geometric_detailed(spec, num_antennas, num_ues).h;
}

ChannelMatrix generate_channel(const ChannelSpec& spec, int num_antennas, int num_ues, std::uint64_t seed) {
    if (spec.kind == ChannelKind::Rayleigh) return gen_rayleigh(num_antennas, num_ues, seed);
    ChannelSpec s = spec;
    s.seed = seed;
    return gen_geometric(s, num_antennas, num_ues);
}

void write_channel(std::ostream& os, const ChannelRecord& rec) {
    const CMatrix& h = rec.h.matrix();
    os << "U,B,kind,seed\n";
    os << h.rows() << ',' << h.cols() << ',' << rec.kind << ',' << rec.seed << '\n';
    const auto old = os.precision(17);
    for (Eigen::Index u = 0; u < h.rows(); ++u) {
        for (Eigen::Index b = 0; b < h.cols(); ++b)
            os << (b ? "," : "") << h(u, b).real() << ',' << h(u, b).imag();
        os << '\n';
    }
    os.precision(old);
}

std::vector<ChannelRecord> read_channels(std::istream& is) {
    std::vector<ChannelRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        if (trim(line) != "U,B,kind,seed") throw std::invalid_argument("channel file: expected header 'U,B,kind,seed'");
        if (!std::getline(is, line)) throw std::invalid_argument("channel file: truncated block");
        const auto meta = split_csv(line);
        if (meta.size() != 4) throw std::invalid_argument("channel file: bad metadata line");
        ChannelRecord rec;
        int rows = 0, cols = 0;
        try {
            rows = std::stoi(meta[0]);
            cols = std::stoi(meta[1]);
            rec.seed = std::stoull(meta[3]);
        } catch (const std::exception&) {
            throw std::invalid_argument("channel file: bad metadata line");
        }
        if (rows < 1 || cols < 1) throw std::invalid_argument("channel file: bad dimensions");
        rec.kind = meta[2];
        CMatrix h(rows, cols);
        for (int u = 0; u < rows; ++u) {
            if (!std::getline(is, line)) throw std::invalid_argument("channel file: truncated block");
            const auto fields = split_csv(line);
            if (static_cast<int>(fields.size()) != 2 * cols)
                throw std::invalid_argument("channel file: row " + std::to_string(u) + " has wrong width");
            for (int b = 0; b < cols; ++b) {
                try {
                    h(u, b) = cdouble(std::stod(fields[2 * b]), std::stod(fields[2 * b + 1]));
                } catch (const std::exception&) {
                    throw std::invalid_argument("channel file: bad number in row " + std::to_string(u));
                }
            }
        }
        rec.h = ChannelMatrix(std::move(h));
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<ChannelRecord> load_channels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open channel file '" + path + "'");
    return read_channels(in);
}

} // namespace fawp
