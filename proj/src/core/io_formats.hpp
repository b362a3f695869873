#ifndef CELF_CORE_IO_FORMATS_HPP
#define CELF_CORE_IO_FORMATS_HPP

#include <string>
#include <vector>

#include "core/event_sim.hpp"
#include "core/lightfield.hpp"
#include "core/recnet.hpp"

namespace celf {

// All writers are atomic: a temporary file is completed first, then renamed
// into place. All multi-byte fields little-endian.

// CELF-LF4: u32 W, u32 H, W*H*64 f32 in canonical (y,x,v,u) order.
void save_lightfield(const LightField& lf, const std::string& path);
LightField load_lightfield(const std::string& path);

// Directory of 64 grayscale PNGs named view_{u}_{v}.png plus meta.json.
void save_lightfield_dir(const LightField& lf, const std::string& dir, int bit_depth = 16);
LightField load_lightfield_dir(const std::string& dir);

// CELF-EI1: u16 W, u16 H, u8 transition index, then W*H i16 values.
void save_event_image(const EventImage& ev, const std::string& path);
EventImage load_event_image(const std::string& path);

// CELF-EV1: u16 W, u16 H, u64 count, then {u16 x, u16 y, u32 t, i8 p} records.
void save_event_stream(const EventStream& stream, const std::string& path);
EventStream load_event_stream(const std::string& path);

// CELF-NN1: u32 layer count, then per layer u32 Cin, u32 Cout, f32 weights
// then biases.
void save_recnet(const ReconNet& net, const std::string& path);
ReconNet load_recnet(const std::string& path);

// CELF-AP1: u32 N, then N*64 f32 pattern entries.
void save_patterns(const std::vector<AperturePattern>& patterns, const std::string& path);
std::vector<AperturePattern> load_patterns(const std::string& path);

}  // namespace celf

#endif
