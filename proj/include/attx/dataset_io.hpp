#pragma once

#include "attx/pipeline.hpp"

#include <string>
#include <vector>

namespace attx {

// Binary container for windowed datasets: header (magic "ATTXWIN1", version,
// window length, count), then per-window records (subject id, label byte, two
// little-endian double blocks). Round-trips are bit-exact.
void write_dataset(const std::string& path, const std::vector<WindowPair>& windows);
std::vector<WindowPair> read_dataset(const std::string& path);

}  // namespace attx
