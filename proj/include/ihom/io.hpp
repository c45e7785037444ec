#pragma once

#include <cstdint>
#include <string>

#include "ihom/density.hpp"
#include "ihom/material.hpp"

namespace ihom {

enum class DensityFormat { raw, vti };

// raw: little-endian float32, x fastest, plus the caller-written JSON
// sidecar; vti: VTK XML ImageData with one cell-data array "density".
void export_density(const DensityField& f, const std::string& path, DensityFormat fmt);

void write_density_meta(const DensityField& f, const std::string& path, double volume,
                        std::uint64_t seed);

DensityField import_density_raw(const std::string& path, IVec3 reso);

// 6 lines x 6 space-separated values, row-major engineering order, full
// double precision.
void export_tensor(const Matrix6& c, const std::string& path);
Matrix6 import_tensor(const std::string& path);

}  // namespace ihom
