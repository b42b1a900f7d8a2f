// Single-file checkpoint: named double matrices.
//
// File layout (all integers little-endian):
//   bytes 0..7    magic "DSTACKP1"
//   bytes 8..15   uint64 header length H
//   bytes 16..    UTF-8 JSON header of H bytes:
//                   {"dtype":"float64","order":"column-major",
//                    "tensors":[{"name":...,"rows":r,"cols":c,"offset":o},...]}
//   then          payload; each tensor starts at byte `offset` from payload
//                 start, rows*cols doubles, column-major, little-endian.
#pragma once

#include "deepsta/common.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace deepsta {

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Matrix*>>& tensors);

std::map<std::string, Matrix> load_checkpoint(const std::string& path);

}  // namespace deepsta
