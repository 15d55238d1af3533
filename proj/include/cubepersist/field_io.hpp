#pragma once

#include <optional>
#include <string>

#include "cubepersist/estimator.hpp"
#include "cubepersist/grid.hpp"

namespace cubepersist {

/// Flat binary field format: 16-byte header (magic "CPF1", d as u32 LE, N as
/// u32 LE, reserved u32), then N^d doubles little-endian in row-major order.
/// A JSON sidecar at <path>.json repeats the metadata and, for block fields,
/// records the block size and source resolution.
void write_field(const ScalarField& field, const std::string& path);
ScalarField read_field(const std::string& path);

void write_block_field(const BlockField& est, const std::string& path);

}  // namespace cubepersist
