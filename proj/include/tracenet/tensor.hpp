#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tracenet {

// Row-major float64 tensor.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }
  std::size_t rank() const { return shape.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  void fill(double v);
  bool operator==(const Tensor&) const = default;
};

std::size_t element_count(const std::vector<std::size_t>& shape);

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string name, std::vector<std::size_t> shape);
  void zero_grad() { grad.fill(0.0); }
};

// Glorot/Xavier uniform in [-sqrt(6/(r+c)), sqrt(6/(r+c))].
double glorot_bound(std::size_t rows, std::size_t cols);

// ---- convolution -------------------------------------------------------------------

// Filter bank of one width: weights f x h x k, bias f.
// Forward: map[i][j] = sigmoid(w_i . x[j..j+h-1] + b_i), j in [0, n-h].
// Throws ShapeError if n < h or k mismatches.
Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias);

// Accumulates into grad_weights / grad_bias (and grad_input when non-null).
// `output` is the forward result, `grad_output` has the same shape.
void conv1d_backward(const Tensor& input, const Tensor& weights, const Tensor& output, const Tensor& grad_output,
                     Tensor& grad_weights, Tensor& grad_bias, Tensor* grad_input);

struct Pooled {
  double value = 0.0;
  std::size_t index = 0;
};

// First index on ties. Throws EmptyMap.
Pooled max_pool(std::span<const double> map);
void max_pool_backward(const Pooled& pooled, double grad, std::span<double> grad_map);

// conv1d followed by per-filter max_pool. Rows at and beyond `used_rows` must be
// zero; windows lying entirely in that padding all evaluate to sigmoid(b_i) and
// are taken as one candidate (the first such window), which is exact.
struct ConvPool {
  std::vector<double> values;      // f
  std::vector<std::size_t> index;  // argmax window per filter
};

ConvPool conv_max_pool(const Tensor& input, std::size_t used_rows, const Tensor& weights, const Tensor& bias);

// Backward of conv_max_pool: only the winning windows receive gradient.
void conv_max_pool_backward(const Tensor& input, const Tensor& weights, const ConvPool& pooled,
                            std::span<const double> grad_values, Tensor& grad_weights, Tensor& grad_bias);

// ---- dense layers ------------------------------------------------------------------

enum class Activation { Identity, Sigmoid };

// y = act(W x + b), W is out x in.
std::vector<double> dense(std::span<const double> input, const Tensor& weights, const Tensor& bias,
                          Activation act);

// `output` is the forward result. Accumulates parameter grads; writes grad_input if non-empty.
void dense_backward(std::span<const double> input, const Tensor& weights, std::span<const double> output,
                    std::span<const double> grad_output, Activation act, Tensor& grad_weights, Tensor& grad_bias,
                    std::span<double> grad_input);

std::vector<double> softmax(std::span<const double> logits);

// ---- losses ------------------------------------------------------------------------

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;  // dJ/de
};

// J = (1/M) (sum_{e<=y} g|e-y| + sum_{e>y} (1-g)|e-y|); subgradient 0 at e == y.
LossResult quantile_loss(std::span<const double> predicted, std::span<const double> gold, double gamma);

double mean_absolute_error(std::span<const double> predicted, std::span<const double> gold);

// ---- optimizer ---------------------------------------------------------------------

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// Bias-corrected Adam on every parameter's value using its grad.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr);

// ---- gradient checking -------------------------------------------------------------

// `loss(true)` must zero the parameter grads, evaluate the loss and accumulate
// analytic grads; `loss(false)` only evaluates.
using LossFn = std::function<double(bool with_grad)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

double relative_error(double analytic, double numeric);

// Central differences. `max_entries` > 0 limits each parameter to a seeded
// subset of its entries.
GradCheckResult grad_check(const LossFn& loss, std::span<Parameter* const> params, double eps = 1e-4,
                           std::size_t max_entries = 0, std::uint64_t seed = 0);

// ---- checkpoints -------------------------------------------------------------------

// "TNK1", then per parameter: u32 name length, name bytes, u32 rank, u64 dims,
// f64 values; all little-endian.
void save_checkpoint(std::ostream& out, std::span<const Parameter* const> params);

struct NamedTensor {
  std::string name;
  Tensor value;
};

std::vector<NamedTensor> load_checkpoint(std::istream& in);

// Copies loaded values into `params` by name; throws ShapeError on mismatch or
// missing names.
void restore_parameters(const std::vector<NamedTensor>& loaded, std::span<Parameter* const> params);

}  // namespace tracenet
