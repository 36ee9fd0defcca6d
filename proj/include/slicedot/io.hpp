#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slicedot/measures.hpp"
#include "slicedot/plans.hpp"
#include "slicedot/sw.hpp"

namespace slicedot::io {

/// One point per row, comma separated. An optional final column `w:<weight>`
/// gives the atom weight; either every row has it or none does (uniform).
/// Blank lines and lines starting with '#' are skipped.
Measure read_points_csv(std::istream& in, const std::string& name = "<stream>");
Measure read_points_csv_file(const std::string& path);
void write_points_csv(std::ostream& out, const Eigen::MatrixXd& points, const Eigen::VectorXd* weights = nullptr);

/// Parses a single data row; exposed for streaming readers.
std::vector<double> parse_row(const std::string& line, std::size_t row, const std::string& name,
                              std::optional<double>* weight);

void write_plan_csv(std::ostream& out, const Plan1D<double>& plan);
void write_plan_csv(std::ostream& out, const PlanD& plan);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, 3 bytes per pixel
};

/// Binary PPM (P6) with maxval 255.
Image read_ppm(std::istream& in);
Image read_ppm_file(const std::string& path);
void write_ppm(std::ostream& out, const Image& img);
void write_ppm_file(const std::string& path, const Image& img);

/// Sketch bank layout: "SKB1", u64 direction-set hash, u32 d, u32 L, then L
/// KLL blobs.
std::string serialize_bank(const SketchBank& bank);
SketchBank deserialize_bank(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace slicedot::io
