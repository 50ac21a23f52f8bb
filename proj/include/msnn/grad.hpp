#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msnn/sample.hpp"

namespace msnn {

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;

  bool operator==(const Segment&) const = default;
};

/// Named, disjoint, contiguous slices covering a flat parameter vector.
class ParamLayout {
 public:
  ParamLayout() = default;

  /// Appends a segment directly after the previous one.
  void add(std::string name, std::size_t size);

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(const std::string& name) const;
  bool has(const std::string& name) const;
  std::size_t total() const { return total_; }

  /// Throws LayoutError unless segments are disjoint, ordered and cover [0, total).
  void validate() const;

  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<Segment> segments_;
  std::size_t total_ = 0;
};

struct ParamVector {
  std::vector<double> values;
  ParamLayout layout;

  std::span<double> view(const std::string& segment);
  std::span<const double> view(const std::string& segment) const;
  std::size_t size() const { return values.size(); }
};

struct GradResult {
  double loss = 0.0;  // mean squared error [rad^2]
  std::vector<double> gradient;
};

/// A scalar-output model that can propagate d(output)/d(params).
///
/// Implementations are stateless with respect to evaluation and must be safe
/// to call concurrently.
class DifferentiableModel {
 public:
  virtual ~DifferentiableModel() = default;

  virtual std::size_t param_count() const = 0;
  virtual ParamLayout layout() const = 0;

  /// Forward pass only. The default routes through predict_and_accumulate.
  virtual double predict(const WindowInput& input, std::span<const double> params) const;

  /// Runs the forward pass, then adds `seed(prediction) * d(prediction)/d(params)`
  /// to `grad`. The seed sees the forward value so a loss derivative can be
  /// applied without a second forward pass. Returns the prediction.
  virtual double predict_and_accumulate(const WindowInput& input, std::span<const double> params,
                                        const std::function<double(double)>& seed,
                                        std::span<double> grad) const = 0;

  /// Adds `scale * d(prediction)/d(params)` to `grad`.
  double accumulate_scaled(const WindowInput& input, std::span<const double> params, double scale,
                           std::span<double> grad) const {
    return predict_and_accumulate(input, params, [scale](double) { return scale; }, grad);
  }
};

/// Loss and gradient over a batch.
///
/// The parallel kernel splits the batch into fixed-size chunks and reduces the
/// chunk partials in index order, so the result does not depend on the thread
/// count. The serial kernel is the plain reference loop kept for testing.
GradResult eval_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                              std::span<const WindowedSample> batch);
GradResult eval_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                              std::span<const WindowedSample> samples,
                              std::span<const std::size_t> indices);
GradResult eval_loss_and_grad_serial(const DifferentiableModel& model,
                                     std::span<const double> params,
                                     std::span<const WindowedSample> batch);

/// Predictions for every sample; OpenMP across samples.
std::vector<double> predict_all(const DifferentiableModel& model, std::span<const double> params,
                                std::span<const WindowedSample> samples);

using Objective = std::function<double(std::span<const double>)>;

/// Central-difference gradient of an arbitrary objective.
std::vector<double> finite_diff_grad(const Objective& objective, std::span<const double> params,
                                     double step);

/// Central-difference gradient of the batch MSE loss.
std::vector<double> finite_diff_grad(const DifferentiableModel& model,
                                     std::span<const double> params,
                                     std::span<const WindowedSample> batch, double step);

/// Chunk size used by the parallel kernels.
inline constexpr std::size_t kReductionChunk = 64;

}  // namespace msnn
