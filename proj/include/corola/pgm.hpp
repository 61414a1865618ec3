// Copyright 2026 the corola authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "corola/types.hpp"

namespace corola {

// Binary PGM (P5), 8-bit only. Frames are quantized with round(v * 255) on
// write and mapped back with v = byte / 255 on read, so a written frame reads
// back bit-identically once its values lie on the 8-bit grid.

Frame read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Frame& frame);

/// Masks are written as 0/255; on read any nonzero byte counts as foreground.
ForegroundMask read_mask_pgm(const std::string& path, int* width = nullptr, int* height = nullptr);
void write_mask_pgm(const std::string& path, const ForegroundMask& mask, int width, int height);

/// Quantize a frame onto the 8-bit grid without touching the file system.
Frame quantize_frame(const Frame& frame);

}  // namespace corola
