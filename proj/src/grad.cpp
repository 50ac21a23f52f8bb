#include "msnn/grad.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "msnn/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace msnn {

void ParamLayout::add(std::string name, std::size_t size) {
  segments_.push_back(Segment{std::move(name), total_, size});
  total_ += size;
}

const Segment& ParamLayout::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw LayoutError("no parameter segment named '" + name + "'");
}

bool ParamLayout::has(const std::string& name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

void ParamLayout::validate() const {
  std::size_t cursor = 0;
  for (const auto& s : segments_) {
    if (s.offset != cursor) {
      throw LayoutError("segment '" + s.name + "' does not start where the previous one ends");
    }
    for (const auto& other : segments_) {
      if (&other != &s && other.name == s.name) {
        throw LayoutError("duplicate segment name '" + s.name + "'");
      }
    }
    cursor += s.size;
  }
  if (cursor != total_) throw LayoutError("segments do not cover the parameter vector");
}

std::span<double> ParamVector::view(const std::string& name) {
  const auto& s = layout.segment(name);
  return std::span<double>(values).subspan(s.offset, s.size);
}

std::span<const double> ParamVector::view(const std::string& name) const {
  const auto& s = layout.segment(name);
  return std::span<const double>(values).subspan(s.offset, s.size);
}

namespace {

void check_layout(const DifferentiableModel& model, std::span<const double> params) {
  if (params.size() != model.param_count()) {
    throw LayoutError("parameter vector has " + std::to_string(params.size()) +
                      " entries, model expects " + std::to_string(model.param_count()));
  }
}

[[noreturn]] void throw_non_finite(std::size_t sample) {
  throw NumericError("non-finite model output at sample " + std::to_string(sample));
}

// Squared error and gradient for one chunk of the batch, accumulated serially.
double chunk_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                           std::span<const WindowedSample> samples,
                           std::span<const std::size_t> indices, std::size_t begin,
                           std::size_t end, double inv_n, std::span<double> grad,
                           std::size_t& bad_sample) {
  double sq = 0.0;
  for (std::size_t b = begin; b < end; ++b) {
    const std::size_t idx = indices.empty() ? b : indices[b];
    const auto& s = samples[idx];
    const double pred = model.predict_and_accumulate(
        s.input, params, [&](double p) { return 2.0 * (p - s.target) * inv_n; }, grad);
    if (!std::isfinite(pred)) {
      bad_sample = idx;
      return 0.0;
    }
    const double r = pred - s.target;
    sq += r * r;
  }
  return sq;
}

GradResult parallel_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                                  std::span<const WindowedSample> samples,
                                  std::span<const std::size_t> indices) {
  const std::size_t n = indices.empty() ? samples.size() : indices.size();
  if (n == 0) throw ConfigError("eval_loss_and_grad: empty batch");
  check_layout(model, params);

  const std::size_t p = params.size();
  const std::size_t chunks = (n + kReductionChunk - 1) / kReductionChunk;
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> partial_grad(chunks * p, 0.0);
  std::vector<double> partial_sq(chunks, 0.0);
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> bad(chunks, kNone);
  std::vector<std::exception_ptr> errors(chunks);

  const auto nchunks = static_cast<std::ptrdiff_t>(chunks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
    const auto uc = static_cast<std::size_t>(c);
    const std::size_t begin = uc * kReductionChunk;
    const std::size_t end = std::min(n, begin + kReductionChunk);
    std::span<double> g(partial_grad.data() + uc * p, p);
    try {
      partial_sq[uc] = chunk_loss_and_grad(model, params, samples, indices, begin, end, inv_n, g,
                                           bad[uc]);
    } catch (...) {
      errors[uc] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  GradResult out;
  out.gradient.assign(p, 0.0);
  double sq = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    if (bad[c] != kNone) throw_non_finite(bad[c]);
    sq += partial_sq[c];
    const double* g = partial_grad.data() + c * p;
    for (std::size_t k = 0; k < p; ++k) out.gradient[k] += g[k];
  }
  out.loss = sq * inv_n;
  for (double g : out.gradient) {
    if (!std::isfinite(g)) throw NumericError("non-finite gradient entry");
  }
  return out;
}

}  // namespace

double DifferentiableModel::predict(const WindowInput& input, std::span<const double> params) const {
  std::vector<double> scratch(params.size(), 0.0);
  return predict_and_accumulate(input, params, [](double) { return 0.0; }, scratch);
}

GradResult eval_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                              std::span<const WindowedSample> batch) {
  return parallel_loss_and_grad(model, params, batch, {});
}

GradResult eval_loss_and_grad(const DifferentiableModel& model, std::span<const double> params,
                              std::span<const WindowedSample> samples,
                              std::span<const std::size_t> indices) {
  if (indices.empty()) throw ConfigError("eval_loss_and_grad: empty batch");
  for (auto i : indices) {
    if (i >= samples.size()) throw ConfigError("eval_loss_and_grad: sample index out of range");
  }
  return parallel_loss_and_grad(model, params, samples, indices);
}

GradResult eval_loss_and_grad_serial(const DifferentiableModel& model,
                                     std::span<const double> params,
                                     std::span<const WindowedSample> batch) {
  if (batch.empty()) throw ConfigError("eval_loss_and_grad: empty batch");
  check_layout(model, params);
  GradResult out;
  out.gradient.assign(params.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = batch[i];
    const double pred = model.predict_and_accumulate(
        s.input, params, [&](double p) { return 2.0 * (p - s.target) * inv_n; }, out.gradient);
    if (!std::isfinite(pred)) throw_non_finite(i);
    sq += (pred - s.target) * (pred - s.target);
  }
  out.loss = sq * inv_n;
  return out;
}

std::vector<double> predict_all(const DifferentiableModel& model, std::span<const double> params,
                                std::span<const WindowedSample> samples) {
  check_layout(model, params);
  std::vector<double> out(samples.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] =
          model.predict(samples[static_cast<std::size_t>(i)].input, params);
    } catch (...) {
#pragma omp critical(msnn_predict_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) throw_non_finite(i);
  }
  return out;
}

std::vector<double> finite_diff_grad(const Objective& objective, std::span<const double> params,
                                     double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double saved = x[k];
    x[k] = saved + step;
    const double up = objective(x);
    x[k] = saved - step;
    const double down = objective(x);
    x[k] = saved;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

std::vector<double> finite_diff_grad(const DifferentiableModel& model,
                                     std::span<const double> params,
                                     std::span<const WindowedSample> batch, double step) {
  check_layout(model, params);
  if (batch.empty()) throw ConfigError("finite_diff_grad: empty batch");
  const Objective loss = [&](std::span<const double> p) {
    double sq = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const double pred = model.predict(batch[i].input, p);
      if (!std::isfinite(pred)) throw_non_finite(i);
      sq += (pred - batch[i].target) * (pred - batch[i].target);
    }
    return sq / static_cast<double>(batch.size());
  };
  return finite_diff_grad(loss, params, step);
}

}  // namespace msnn
