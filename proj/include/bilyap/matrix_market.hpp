#pragma once

// MatrixMarket I/O and the plain-text directory manifest that serializes a
// whole bilinear system (one .mtx file per matrix).

#include "bilyap/types.hpp"

#include <filesystem>
#include <string>

namespace bilyap::mm {

// Reads array or coordinate files, real/integer fields, general or symmetric
// symmetry. Returns a dense matrix.
MatrixXd read_matrix(const std::filesystem::path& path);

// Writes dense array format with full double precision.
void write_matrix(const std::filesystem::path& path, const MatrixXd& X,
                  const std::string& comment = "");

// Directory layout: system.manifest plus A.mtx, N_<i>.mtx, B.mtx, optional C.mtx.
void write_system(const std::filesystem::path& dir, const BilinearSystem& sys);
BilinearSystem read_system(const std::filesystem::path& dir);

}  // namespace bilyap::mm
