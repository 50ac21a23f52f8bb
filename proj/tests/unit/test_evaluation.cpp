#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"
#include "msnn/error.hpp"
#include "msnn/evaluation.hpp"
#include "msnn/simulator.hpp"

using namespace msnn;

TEST_CASE("rmse") {
  const std::vector<double> t{0.1, -0.2, 0.3};
  CHECK(rmse(t, t) == 0.0);
  const std::vector<double> shifted{0.11, -0.19, 0.31};
  CHECK(rmse(shifted, t) == doctest::Approx(0.01 * 180.0 / std::numbers::pi).epsilon(1e-12));
  const std::vector<double> p{1.0, 2.0}, z{0.0, 0.0};
  CHECK(rmse(p, z) == doctest::Approx(std::sqrt(2.5) * 180.0 / std::numbers::pi).epsilon(1e-14));
  CHECK(rmse(p, z) == doctest::Approx(90.59).epsilon(1e-4));
  CHECK_THROWS_AS(rmse(p, t), ConfigError);
  std::vector<double> empty;
  CHECK_THROWS_AS(rmse(empty, empty), ConfigError);
}

TEST_CASE("fvu") {
  const std::vector<double> t{-1.0, 1.0, 3.0};
  CHECK(fvu(t, t) == 0.0);
  const std::vector<double> mean(3, 1.0);
  CHECK(fvu(mean, t) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> p{0.0, 0.0}, q{-1.0, 1.0};
  CHECK(fvu(p, q) == 1.0);
  const std::vector<double> c(3, 2.0);
  CHECK_THROWS_AS(fvu(t, c), DomainError);
  const std::vector<double> inexact(3, 0.2);  // the mean of these rounds away from 0.2
  CHECK_THROWS_AS(fvu(t, inexact), DomainError);

  // fvu = mse / var exactly, rmse^2 (rad) = mse
  const std::vector<double> pred{0.1, 0.4, 2.0};
  double mse = 0.0;
  for (int i = 0; i < 3; ++i) mse += (pred[i] - t[i]) * (pred[i] - t[i]) / 3.0;
  CHECK(fvu(pred, t) == doctest::Approx(mse / (8.0 / 3.0)).epsilon(1e-15));
  CHECK(std::pow(rmse(pred, t) / kRadToDeg, 2) == doctest::Approx(mse).epsilon(1e-14));
}

TEST_CASE("aic") {
  CHECK(aic(100, 1.0, 10) == 20.0);
  CHECK(aic(100, 0.3, 11) - aic(100, 0.3, 10) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(aic(1000, std::exp(-2.0), 50) == doctest::Approx(-1900.0).epsilon(1e-14));
  CHECK_THROWS_AS(aic(100, 0.0, 1), DomainError);
  CHECK_THROWS_AS(aic(0, 1.0, 1), ConfigError);
}

TEST_CASE("error statistics") {
  const double r = std::numbers::pi / 180.0;  // 1 deg in rad
  const std::vector<double> pred{-1 * r, -0.5 * r, 0.0, 0.5 * r, 1 * r}, zero(5, 0.0);
  const auto s = error_stats(pred, zero);
  CHECK(s.median == doctest::Approx(0.0));
  CHECK(s.q1 == doctest::Approx(-0.5));
  CHECK(s.q3 == doctest::Approx(0.5));
  CHECK(s.outliers == 0);
  CHECK(s.q1 <= s.median);
  CHECK(s.median <= s.q3);

  const auto same = error_stats(zero, zero);
  CHECK(same.mean == 0.0);
  CHECK(same.median == 0.0);
  CHECK(same.q1 == 0.0);
  CHECK(same.q3 == 0.0);
  CHECK(same.whisker_low == 0.0);
  CHECK(same.whisker_high == 0.0);
  CHECK(same.max_abs == 0.0);
  CHECK(same.outliers == 0);

  std::vector<double> with_outlier;
  for (int k = 0; k < 9; ++k) with_outlier.push_back(0.1 * k * r);
  // IQR = 0.4 deg; place one value 10 IQR above q3.
  with_outlier.push_back((0.6 + 10 * 0.4) * r);
  const std::vector<double> z10(10, 0.0);
  const auto o = error_stats(with_outlier, z10);
  CHECK(o.outliers == 1);
  CHECK(o.whisker_high == doctest::Approx(0.8));

  CHECK_THROWS_AS(error_stats(std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)), ConfigError);
  CHECK_THROWS_AS(error_stats(pred, z10), ConfigError);
}

TEST_CASE("grid argmin and tie-breaking") {
  GridCell a{9, 5, 3, 3, 155, 100, 1, 0.01, 1.0, 10.0, true, ""};
  CHECK(grid_argmin(std::vector<GridCell>{a}) == 0u);

  GridCell big = a, small = a;
  big.n_params = 200;
  small.n_params = 150;
  big.aic = aic(100, a.mse, big.n_params);
  small.aic = aic(100, a.mse, small.n_params);
  CHECK(grid_argmin(std::vector<GridCell>{big, small}) == 1u);

  GridCell t1 = a, t2 = a;
  t1.q = 14;
  CHECK(grid_argmin(std::vector<GridCell>{t1, t2}) == 1u);

  GridCell failed = a;
  failed.ok = false;
  failed.aic = -1e9;
  CHECK(grid_argmin(std::vector<GridCell>{failed, t1}) == 1u);
  CHECK_FALSE(grid_argmin(std::vector<GridCell>{failed}).has_value());

  CHECK(cell_seed(1, 0) != cell_seed(1, 1));
  CHECK(cell_seed(1, 3) == cell_seed(1, 3));
  CHECK(GridSpec{}.size() == 225);
  CHECK(GridSpec::reduced().size() == 16);
}

namespace {

const Telemetry& laps() {
  static const Telemetry rec = generate_laps(VehicleParams{}, 42).records;
  return rec;
}

}  // namespace

TEST_CASE("common-horizon windows") {
  const auto data = Datasets::from(laps(), SplitName::Small);
  const auto w4 = windows_for(data.train, 4, 14, 0.05);
  const auto w14 = windows_for(data.train, 14, std::nullopt, 0.05);
  REQUIRE(w4.size() == w14.size());
  for (std::size_t i = 0; i < w4.size(); ++i) CHECK(w4[i].index == w14[i].index);
  CHECK_THROWS_AS(Datasets::from(laps(), SplitName::Validation), ConfigError);
}

TEST_CASE("single-cell grid search and CSV") {
  const auto data = Datasets::from(laps(), SplitName::Small);
  GridSpec spec{{2}, {3}, {3}, {3}};
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.patience = 3;
  const auto r = grid_search(spec, data, tc);
  REQUIRE(r.cells.size() == 1);
  CHECK(r.best == 0u);
  CHECK(r.cells[0].ok);
  CHECK(r.cells[0].aic == doctest::Approx(aic(r.cells[0].n_samples, r.cells[0].mse, r.cells[0].n_params)));

  const auto path = std::filesystem::temp_directory_path() / "msnn_grid.csv";
  write_grid_csv(path, r);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "q,n_y,n_x,n_v,aic,rmse,n_params");
  std::filesystem::remove(path);
  CHECK(to_json(r).at("best").at("q") == 2);
}

TEST_CASE("controller comparison report shape and purity") {
  const auto data = Datasets::from(laps(), SplitName::Small);
  TrainConfig tc;
  tc.max_epochs = 2;
  tc.patience = 2;
  Hyper h;
  h.q = 4;
  const auto trained = fit_controllers(data, tc, h, 1);
  const auto a = compare_controllers(trained, data);
  CHECK(a.rows.size() == 8);
  for (const auto& row : a.rows) CHECK(row.metrics.rmse >= 0.0);
  CHECK(a.valid_errors.size() == 4);
  CHECK_FALSE(a.valid_trace.empty());
  CHECK(a.valid_trace.front().predicted.size() == 4);

  const auto b = compare_controllers(trained, data);
  for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].metrics.rmse == b.rows[i].metrics.rmse);
  CHECK(a.at("gnn", "valid").n_samples == a.at(kA2rlName, "valid").n_samples);
  CHECK_THROWS_AS(a.at("nope", "valid"), ConfigError);
}
