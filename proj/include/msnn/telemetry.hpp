#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "msnn/sample.hpp"

namespace msnn {

inline constexpr const char* kTelemetryHeader = "t,v_x,a_x,a_y,delta,sector,lap";
inline constexpr double kDefaultSampleTime = 0.05;  // [s]
inline constexpr double kDefaultVxMin = 5.0;        // [m/s]

struct TelemetryRecord {
  double t = 0.0;      // [s]
  double v_x = 0.0;    // [m/s]
  double a_x = 0.0;    // [m/s^2]
  double a_y = 0.0;    // [m/s^2]
  double delta = 0.0;  // measured steering [rad]
  int sector = 1;
  int lap = 1;

  bool operator==(const TelemetryRecord&) const = default;
};

using Telemetry = std::vector<TelemetryRecord>;

/// Parses the telemetry CSV and validates record invariants. Errors name the
/// offending data row (1-based, header excluded).
Telemetry read_csv(std::istream& in, double vx_min = kDefaultVxMin);
Telemetry load_csv(const std::filesystem::path& path, double vx_min = kDefaultVxMin);

/// Writes at 17 significant digits so a reload is exact.
void write_csv(std::ostream& out, const Telemetry& records);
void save_csv(const std::filesystem::path& path, const Telemetry& records);

/// Half-open [begin, end) ranges of records sharing (lap, sector) with no gap.
struct SegmentRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};
std::vector<SegmentRange> segments(const Telemetry& records);

/// One sample per start index k whose q+1 records lie in one segment.
/// Throws DataError if a segment is not sampled every T seconds (+-1e-6 s).
std::vector<WindowedSample> make_windows(const Telemetry& records, std::size_t q,
                                         double sample_time = kDefaultSampleTime);

enum class SplitName { Small, Medium, Large, Validation };

struct DatasetSplit {
  SplitName name = SplitName::Large;
  std::set<int> sectors;
  int lap = 1;

  static DatasetSplit named(SplitName name);
  static DatasetSplit named(const std::string& name);
};

std::string to_string(SplitName name);

/// Filtered records in original order; throws DataError if nothing matches.
Telemetry select_split(const Telemetry& records, const DatasetSplit& split);

/// JSON document listing every split definition.
std::string splits_manifest_json();

/// Flags the first record of each segment (for stateful controllers).
std::vector<bool> segment_starts(const Telemetry& records);

}  // namespace msnn
