#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "msnn/error.hpp"
#include "msnn/simulator.hpp"
#include "msnn/telemetry.hpp"

using namespace msnn;

namespace {

Telemetry segment_records(int lap, int sector, std::size_t n, double t0) {
  Telemetry out;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = static_cast<double>(k);
    out.push_back({t0 + 0.05 * x, 20.0 + x, 0.1 * x, -3.0 + 0.5 * x, 0.001 * x, sector, lap});
  }
  return out;
}

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_csv(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("parse a well-formed file") {
  std::istringstream in(
      "t,v_x,a_x,a_y,delta,sector,lap\n"
      "0,20,0.5,1.5,0.01,1,1\n"
      "0.05,20.1,0.4,1.6,0.011,1,1\n"
      "0.1,20.2,0.3,1.7,0.012,2,1\n");
  const auto r = read_csv(in);
  REQUIRE(r.size() == 3);
  CHECK(r[2].sector == 2);
  CHECK(r[1].a_y == 1.6);
}

TEST_CASE("row-numbered parse errors") {
  const std::string header = "t,v_x,a_x,a_y,delta,sector,lap\n";
  CHECK(error_of(header + "0,20,0,1,0,1,1\n0.05,0,0,1,0,1,1\n").find("row 2") != std::string::npos);
  CHECK(error_of(header + "0,20,0,1,0,1,1\n0.05,20,0,1,0,4,1\n").find("row 2") != std::string::npos);
  CHECK(error_of(header + "0.1,20,0,1,0,1,1\n0.05,20,0,1,0,1,1\n").find("row 2") != std::string::npos);
  CHECK(error_of(header + "0,20,0,1,0,1\n").find("row 1") != std::string::npos);
  CHECK(error_of(header + "0,20,0,1,0,1,1,9\n").find("row 1") != std::string::npos);
  CHECK(error_of("t,v_x,a_x,a_y,delta,lap\n").find("header") != std::string::npos);
}

TEST_CASE("simulator output survives a CSV round trip") {
  const auto rec = generate_laps(VehicleParams{}, 7).records;
  const auto path = std::filesystem::temp_directory_path() / "msnn_roundtrip.csv";
  save_csv(path, rec);
  const auto back = load_csv(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    CHECK(std::abs(back[i].t - rec[i].t) <= 1e-12);
    CHECK(std::abs(back[i].v_x - rec[i].v_x) <= 1e-12);
    CHECK(std::abs(back[i].a_x - rec[i].a_x) <= 1e-12);
    CHECK(std::abs(back[i].a_y - rec[i].a_y) <= 1e-12);
    CHECK(std::abs(back[i].delta - rec[i].delta) <= 1e-12);
    CHECK(back[i].sector == rec[i].sector);
    CHECK(back[i].lap == rec[i].lap);
  }
}

TEST_CASE("window counts") {
  CHECK(make_windows(segment_records(1, 1, 12, 0.0), 9).size() == 3);
  CHECK(make_windows(segment_records(1, 1, 9, 0.0), 9).empty());

  auto two = segment_records(1, 1, 12, 0.0);
  const auto second = segment_records(1, 2, 12, 0.6);
  two.insert(two.end(), second.begin(), second.end());
  const auto w = make_windows(two, 9);
  REQUIRE(w.size() == 6);
  for (const auto& s : w) {
    const int sector = two[s.index].sector;
    for (std::size_t t = 0; t <= 9; ++t) CHECK(two[s.index + t].sector == sector);
  }
}

TEST_CASE("windows copy record values exactly") {
  const auto rec = segment_records(1, 3, 20, 0.0);
  for (const auto& s : make_windows(rec, 4)) {
    CHECK(s.target == rec[s.index].delta);
    for (std::size_t t = 0; t <= 4; ++t) {
      CHECK(s.input.ay[t] == rec[s.index + t].a_y);
      CHECK(s.input.ax[t] == rec[s.index + t].a_x);
      CHECK(s.input.vx[t] == rec[s.index + t].v_x);
    }
  }
}

TEST_CASE("non-uniform sampling asks for resampling") {
  auto rec = segment_records(1, 1, 15, 0.0);
  rec[7].t += 0.01;
  try {
    make_windows(rec, 4);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("resample") != std::string::npos);
  }
}

TEST_CASE("dataset splits") {
  Telemetry rec;
  double t = 0.0;
  for (int lap : {1, 2}) {
    for (int sector : {1, 2, 3}) {
      const auto s = segment_records(lap, sector, 5, t);
      rec.insert(rec.end(), s.begin(), s.end());
      t += 1.0;
    }
  }
  const auto small = select_split(rec, DatasetSplit::named(SplitName::Small));
  CHECK(small.size() == 5);
  for (const auto& r : small) CHECK((r.lap == 1 && r.sector == 3));
  const auto valid = select_split(rec, DatasetSplit::named("validation"));
  CHECK(valid.size() == 15);
  for (const auto& r : valid) CHECK(r.lap == 2);
  CHECK(DatasetSplit::named("medium").sectors == std::set<int>{1, 3});

  Telemetry lap1(rec.begin(), rec.begin() + 15);
  CHECK(select_split(lap1, DatasetSplit::named(SplitName::Large)) == lap1);
  CHECK_THROWS_AS(select_split(lap1, DatasetSplit::named(SplitName::Validation)), DataError);
  CHECK_THROWS_AS(DatasetSplit::named("huge"), ConfigError);
  CHECK(splits_manifest_json().find("\"small\"") != std::string::npos);
}
