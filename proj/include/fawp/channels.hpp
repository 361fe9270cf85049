#pragma once

#include "fawp/core_types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fawp {

enum class ChannelKind { Rayleigh, GeomLoS, GeomNLoS };

ChannelKind parse_channel_kind(std::string_view name);
std::string_view channel_kind_name(ChannelKind kind);

/// Scenario for the channel generators. The geometric modes model a single BS
/// sector: UEs uniformly spread over the sector and range, all received at the
/// same power.
struct ChannelSpec {
    ChannelKind kind = ChannelKind::Rayleigh;
    double carrier_hz = 60e9;
    double sector_deg = 120.0;
    double min_sep_deg = 4.0;
    double range_min_m = 10.0;
    double range_max_m = 110.0;
    int num_paths = 12;                 // non-LoS clusters per UE
    double angular_spread_deg = 10.0;   // azimuth std of the Laplacian cluster spread
    double elevation_spread_deg = 10.0; // elevation std of the non-LoS clusters
    int vertical_elements = 0;          // planar array rows, 0 = most square factorization of B
    std::uint64_t seed = 1;

    void validate(int num_ues) const;
};

/// i.i.d. CN(0, 1) entries.
ChannelMatrix gen_rayleigh(int num_antennas, int num_ues, std::uint64_t seed);

struct GeometricDraw {
    ChannelMatrix h;
    std::vector<double> azimuth_deg; // per UE, relative to broadside
    std::vector<double> distance_m;
};

/// Array rows used for a B-element planar array under the given spec.
int array_rows(const ChannelSpec& spec, int num_antennas);

/// Geometric LoS / non-LoS draw with per-row power normalized to ||h_u||² = B.
GeometricDraw gen_geometric_detailed(const ChannelSpec& spec, int num_antennas, int num_ues);
ChannelMatrix gen_geometric(const ChannelSpec& spec, int num_antennas, int num_ues);

/// Dispatches on spec.kind with spec.seed replaced by `seed`.
ChannelMatrix generate_channel(const ChannelSpec& spec, int num_antennas, int num_ues, std::uint64_t seed);

struct ChannelRecord {
    ChannelMatrix h;
    std::string kind;
    std::uint64_t seed = 0;
};

/// Text exchange format, one block per realization:
///   U,B,kind,seed
///   <U>,<B>,<kind>,<seed>
///   U lines of B comma-separated "re,im" pairs
void write_channel(std::ostream& os, const ChannelRecord& rec);
std::vector<ChannelRecord> read_channels(std::istream& is);
std::vector<ChannelRecord> load_channels(const std::string& path);

} // namespace fawp
