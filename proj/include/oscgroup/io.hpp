#pragma once

#include <filesystem>
#include <string>

#include "oscgroup/coupling.hpp"
#include "oscgroup/pipelines.hpp"
#include "oscgroup/stability.hpp"
#include "oscgroup/syncdetect.hpp"

namespace oscgroup {
namespace io {

/// All text formats start with a `# oscgroup <kind> v1` line (PGM carries its
/// own magic); readers reject unknown kinds/versions with a ParseError.

void write_points_csv(const std::filesystem::path& path, const PointSet& pts);
PointSet read_points_csv(const std::filesystem::path& path);

/// Orientation grids are stored in degrees (one row per grid row); in memory
/// they are radians modulo pi.
void write_grid(const std::filesystem::path& path, const OrientationGrid& grid);
OrientationGrid read_grid(const std::filesystem::path& path);

/// 8-bit portable graymap, binary (P5) out; P2 or P5 in. Any other magic or
/// a maxval above 255 is a ParseError.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);

void write_partition_csv(const std::filesystem::path& path, const std::vector<int>& labels);
void write_coincidence_csv(const std::filesystem::path& path, const CoincidenceSeries& series);
void write_traces_csv(const std::filesystem::path& path, const TraceBuffer& traces);

/// Label map rendered with each region painted its mean source gray; exact
/// labels go to the sidecar CSV.
GrayImage render_label_map(const LabelMap& labels, const GrayImage& source);

/// Orientation grid rendered as oriented strokes (one block per cell);
/// cells of detected contours are drawn bright on the gray background.
GrayImage render_grid_overlay(const OrientationGrid& grid, const ContourResult* contours);

void write_graph_csv(const std::filesystem::path& path, const CouplingGraph& g);
CouplingGraph read_graph_csv(const std::filesystem::path& path);

void write_report(const std::filesystem::path& path, const StabilityReport& report);
StabilityReport read_report(const std::filesystem::path& path);

/// Write-temp-then-rename so partial output never lands under the final name.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// FNV-1a digest of a file's bytes, as fixed-width hex.
std::string file_digest(const std::filesystem::path& path);

}  // namespace io
}  // namespace oscgroup
