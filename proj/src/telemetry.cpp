#include "msnn/telemetry.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string_view>

#include "msnn/error.hpp"

namespace msnn {

namespace {

constexpr double kTimeTolerance = 1e-6;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view field, std::size_t row, const char* column) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError("row " + std::to_string(row) + ": cannot parse " + column + " from '" +
                    std::string(field) + "'");
  }
  return value;
}

}  // namespace

Telemetry read_csv(std::istream& in, double vx_min) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("telemetry CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTelemetryHeader) {
    throw DataError("telemetry header must be '" + std::string(kTelemetryHeader) + "', got '" +
                    line + "'");
  }
  Telemetry records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw DataError("row " + std::to_string(row) + ": expected 7 columns, got " +
                      std::to_string(f.size()));
    }
    TelemetryRecord r;
    r.t = parse_field<double>(f[0], row, "t");
    r.v_x = parse_field<double>(f[1], row, "v_x");
    r.a_x = parse_field<double>(f[2], row, "a_x");
    r.a_y = parse_field<double>(f[3], row, "a_y");
    r.delta = parse_field<double>(f[4], row, "delta");
    r.sector = parse_field<int>(f[5], row, "sector");
    r.lap = parse_field<int>(f[6], row, "lap");

    for (double v : {r.t, r.v_x, r.a_x, r.a_y, r.delta}) {
      if (!std::isfinite(v)) throw DataError("row " + std::to_string(row) + ": non-finite value");
    }
    if (!(r.v_x >= vx_min)) {
      throw DataError("row " + std::to_string(row) + ": v_x = " + std::string(f[1]) +
                      " is below vx_min");
    }
    if (r.sector < 1 || r.sector > 3) {
      throw DataError("row " + std::to_string(row) + ": sector must be 1, 2 or 3");
    }
    if (!records.empty() && records.back().lap == r.lap && !(r.t > records.back().t)) {
      throw DataError("row " + std::to_string(row) + ": time is not strictly increasing");
    }
    records.push_back(r);
  }
  return records;
}

Telemetry load_csv(const std::filesystem::path& path, double vx_min) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open telemetry file " + path.string());
  return read_csv(in, vx_min);
}

void write_csv(std::ostream& out, const Telemetry& records) {
  out << kTelemetryHeader << '\n';
  out << std::setprecision(17);
  for (const auto& r : records) {
    out << r.t << ',' << r.v_x << ',' << r.a_x << ',' << r.a_y << ',' << r.delta << ','
        << r.sector << ',' << r.lap << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const Telemetry& records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write telemetry file " + path.string());
  write_csv(out, records);
}

std::vector<SegmentRange> segments(const Telemetry& records) {
  std::vector<SegmentRange> out;
  std::size_t begin = 0;
  for (std::size_t k = 1; k <= records.size(); ++k) {
    if (k == records.size() || records[k].lap != records[begin].lap ||
        records[k].sector != records[begin].sector) {
      out.push_back({begin, k});
      begin = k;
    }
  }
  if (records.empty()) out.clear();
  return out;
}

std::vector<bool> segment_starts(const Telemetry& records) {
  std::vector<bool> starts(records.size(), false);
  for (const auto& s : segments(records)) starts[s.begin] = true;
  return starts;
}

std::vector<WindowedSample> make_windows(const Telemetry& records, std::size_t q,
                                         double sample_time) {
  if (!(sample_time > 0.0)) throw ConfigError("sample time must be positive");
  std::vector<WindowedSample> out;
  for (const auto& seg : segments(records)) {
    for (std::size_t k = seg.begin + 1; k < seg.end; ++k) {
      const double dt = records[k].t - records[k - 1].t;
      if (std::abs(dt - sample_time) > kTimeTolerance) {
        std::ostringstream msg;
        msg << "records " << k - 1 << " and " << k << " are " << dt << " s apart, expected T = "
            << sample_time << " s; resample the telemetry to a uniform period first";
        throw DataError(msg.str());
      }
    }
    if (seg.size() <= q) continue;
    for (std::size_t k = seg.begin; k + q < seg.end; ++k) {
      WindowedSample s;
      s.index = k;
      s.target = records[k].delta;
      s.input.ay.resize(q + 1);
      s.input.ax.resize(q + 1);
      s.input.vx.resize(q + 1);
      for (std::size_t t = 0; t <= q; ++t) {
        s.input.ay[t] = records[k + t].a_y;
        s.input.ax[t] = records[k + t].a_x;
        s.input.vx[t] = records[k + t].v_x;
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::string to_string(SplitName name) {
  switch (name) {
    case SplitName::Small: return "small";
    case SplitName::Medium: return "medium";
    case SplitName::Large: return "large";
    case SplitName::Validation: return "validation";
  }
  return "unknown";
}

DatasetSplit DatasetSplit::named(SplitName name) {
  switch (name) {
    case SplitName::Small: return {name, {3}, 1};
    case SplitName::Medium: return {name, {1, 3}, 1};
    case SplitName::Large: return {name, {1, 2, 3}, 1};
    case SplitName::Validation: return {name, {1, 2, 3}, 2};
  }
  throw ConfigError("unknown split");
}

DatasetSplit DatasetSplit::named(const std::string& name) {
  for (auto n : {SplitName::Small, SplitName::Medium, SplitName::Large, SplitName::Validation}) {
    if (to_string(n) == name) return named(n);
  }
  throw ConfigError("unknown split '" + name + "' (expected small, medium, large or validation)");
}

Telemetry select_split(const Telemetry& records, const DatasetSplit& split) {
  Telemetry out;
  for (const auto& r : records) {
    if (r.lap == split.lap && split.sectors.count(r.sector)) out.push_back(r);
  }
  if (out.empty()) throw DataError("split '" + to_string(split.name) + "' selects no records");
  return out;
}

std::string splits_manifest_json() {
  nlohmann::json doc;
  for (auto n : {SplitName::Small, SplitName::Medium, SplitName::Large, SplitName::Validation}) {
    const auto s = DatasetSplit::named(n);
    doc["splits"].push_back({{"name", to_string(n)}, {"sectors", s.sectors}, {"lap", s.lap}});
  }
  return doc.dump(2);
}

}  // namespace msnn
