#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "fif/alpha_fractal.hpp"
#include "fif/rb.hpp"
#include "fif/sampled_function.hpp"

namespace fif {

/// Lattice samples, row-major, header "x1,...,xn,value", 17 significant
/// digits (values round-trip bit-exactly).
void write_lattice_csv(const SampledFunction& s, const std::filesystem::path& path);

/// Attractor point cloud, same columns, unordered.
void write_attractor_csv(const AttractorSamples& points, const std::filesystem::path& path);

void write_study_csv(std::span<const StudyRow> rows, const std::filesystem::path& path);

/// Reads the value column of a lattice CSV written by write_lattice_csv.
std::vector<double> read_values_csv(const std::filesystem::path& path, int dimension);

}  // namespace fif
