#include "tracenet/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>

#include "tracenet/errors.hpp"
#include "tracenet/random.hpp"

namespace tracenet {

namespace {

double sigm(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

}  // namespace

std::size_t element_count(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> s, double fill_value) : shape(std::move(s)) {
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dims must be positive: " + shape_str(shape));
  }
  data.assign(element_count(shape), fill_value);
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != element_count(shape)) throw ShapeError("data length does not match shape " + shape_str(shape));
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

Parameter::Parameter(std::string n, std::vector<std::size_t> shape)
    : name(std::move(n)), value(shape), grad(shape) {}

double glorot_bound(std::size_t rows, std::size_t cols) {
  return std::sqrt(6.0 / static_cast<double>(rows + cols));
}

// ---- convolution -------------------------------------------------------------------

namespace {

void check_conv(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 2 || weights.rank() != 3 || bias.rank() != 1) throw ShapeError("conv1d expects n x k, f x h x k, f");
  if (weights.dim(2) != input.dim(1)) throw ShapeError("conv1d: filter width k does not match input");
  if (bias.dim(0) != weights.dim(0)) throw ShapeError("conv1d: bias count does not match filters");
  if (input.dim(0) < weights.dim(1)) {
    throw ShapeError("conv1d: sequence length " + std::to_string(input.dim(0)) + " < filter height " +
                     std::to_string(weights.dim(1)));
  }
}

double window_dot(const Tensor& input, const Tensor& weights, std::size_t f, std::size_t j) {
  const std::size_t h = weights.dim(1), k = weights.dim(2);
  const double* w = weights.data.data() + f * h * k;
  const double* x = input.data.data() + j * k;
  double s = 0.0;
  for (std::size_t i = 0; i < h * k; ++i) s += w[i] * x[i];
  return s;
}

}  // namespace

Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  check_conv(input, weights, bias);
  const std::size_t f = weights.dim(0), len = input.dim(0) - weights.dim(1) + 1;
  Tensor out({f, len});
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < len; ++j) out(i, j) = sigm(window_dot(input, weights, i, j) + bias.data[i]);
  }
  return out;
}

void conv1d_backward(const Tensor& input, const Tensor& weights, const Tensor& output, const Tensor& grad_output,
                     Tensor& grad_weights, Tensor& grad_bias, Tensor* grad_input) {
  const std::size_t f = weights.dim(0), h = weights.dim(1), k = weights.dim(2), len = output.dim(1);
  if (grad_output.shape != output.shape) throw ShapeError("conv1d_backward: grad shape mismatch");
  for (std::size_t i = 0; i < f; ++i) {
    double* gw = grad_weights.data.data() + i * h * k;
    const double* w = weights.data.data() + i * h * k;
    for (std::size_t j = 0; j < len; ++j) {
      const double y = output(i, j);
      const double dz = grad_output(i, j) * y * (1.0 - y);
      if (dz == 0.0) continue;
      grad_bias.data[i] += dz;
      const double* x = input.data.data() + j * k;
      for (std::size_t t = 0; t < h * k; ++t) gw[t] += dz * x[t];
      if (grad_input) {
        double* gx = grad_input->data.data() + j * k;
        for (std::size_t t = 0; t < h * k; ++t) gx[t] += dz * w[t];
      }
    }
  }
}

Pooled max_pool(std::span<const double> map) {
  if (map.empty()) throw EmptyMap("max_pool of an empty map");
  Pooled p{map[0], 0};
  for (std::size_t i = 1; i < map.size(); ++i) {
    if (map[i] > p.value) p = {map[i], i};
  }
  return p;
}

void max_pool_backward(const Pooled& pooled, double grad, std::span<double> grad_map) {
  grad_map[pooled.index] += grad;
}

ConvPool conv_max_pool(const Tensor& input, std::size_t used_rows, const Tensor& weights, const Tensor& bias) {
  check_conv(input, weights, bias);
  const std::size_t f = weights.dim(0), h = weights.dim(1), len = input.dim(0) - h + 1;
  // Windows starting at or after used_rows see only padding.
  const std::size_t live = std::min(len, used_rows);
  ConvPool out;
  out.values.resize(f);
  out.index.resize(f);
  for (std::size_t i = 0; i < f; ++i) {
    Pooled best{-1.0, 0};
    for (std::size_t j = 0; j < live; ++j) {
      const double v = sigm(window_dot(input, weights, i, j) + bias.data[i]);
      if (v > best.value) best = {v, j};
    }
    if (live < len) {
      const double v = sigm(bias.data[i]);
      if (v > best.value) best = {v, live};
    }
    out.values[i] = best.value;
    out.index[i] = best.index;
  }
  return out;
}

void conv_max_pool_backward(const Tensor& input, const Tensor& weights, const ConvPool& pooled,
                            std::span<const double> grad_values, Tensor& grad_weights, Tensor& grad_bias) {
  const std::size_t f = weights.dim(0), h = weights.dim(1), k = weights.dim(2);
  for (std::size_t i = 0; i < f; ++i) {
    const double y = pooled.values[i];
    const double dz = grad_values[i] * y * (1.0 - y);
    if (dz == 0.0) continue;
    grad_bias.data[i] += dz;
    double* gw = grad_weights.data.data() + i * h * k;
    const double* x = input.data.data() + pooled.index[i] * k;
    for (std::size_t t = 0; t < h * k; ++t) gw[t] += dz * x[t];
  }
}

// ---- dense layers ------------------------------------------------------------------

std::vector<double> dense(std::span<const double> input, const Tensor& weights, const Tensor& bias, Activation act) {
  if (weights.rank() != 2 || weights.dim(1) != input.size() || bias.size() != weights.dim(0)) {
    throw ShapeError("dense: W " + shape_str(weights.shape) + " does not fit input " + std::to_string(input.size()) +
                     " / bias " + std::to_string(bias.size()));
  }
  const std::size_t out_n = weights.dim(0), in_n = weights.dim(1);
  std::vector<double> y(out_n);
  for (std::size_t o = 0; o < out_n; ++o) {
    const double* w = weights.data.data() + o * in_n;
    double s = bias.data[o];
    for (std::size_t i = 0; i < in_n; ++i) s += w[i] * input[i];
    y[o] = act == Activation::Sigmoid ? sigm(s) : s;
  }
  return y;
}

void dense_backward(std::span<const double> input, const Tensor& weights, std::span<const double> output,
                    std::span<const double> grad_output, Activation act, Tensor& grad_weights, Tensor& grad_bias,
                    std::span<double> grad_input) {
  const std::size_t out_n = weights.dim(0), in_n = weights.dim(1);
  if (grad_output.size() != out_n || output.size() != out_n) throw ShapeError("dense_backward: grad shape mismatch");
  for (std::size_t o = 0; o < out_n; ++o) {
    double dz = grad_output[o];
    if (act == Activation::Sigmoid) dz *= output[o] * (1.0 - output[o]);
    if (dz == 0.0) continue;
    grad_bias.data[o] += dz;
    double* gw = grad_weights.data.data() + o * in_n;
    const double* w = weights.data.data() + o * in_n;
    for (std::size_t i = 0; i < in_n; ++i) gw[i] += dz * input[i];
    if (!grad_input.empty()) {
      for (std::size_t i = 0; i < in_n; ++i) grad_input[i] += dz * w[i];
    }
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += (p[i] = std::exp(logits[i] - mx));
  for (double& x : p) x /= sum;
  return p;
}

// ---- losses ------------------------------------------------------------------------

LossResult quantile_loss(std::span<const double> predicted, std::span<const double> gold, double gamma) {
  if (predicted.size() != gold.size() || predicted.empty()) {
    throw ShapeError("quantile_loss: sizes " + std::to_string(predicted.size()) + " and " +
                     std::to_string(gold.size()));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("gamma", "gamma must lie in [0, 1]");
  const double m = static_cast<double>(predicted.size());
  LossResult r;
  r.grad.resize(predicted.size());
  // One weighted sum in index order: at gamma = 0.5 every weight is an exact
  // halving, so the result is bitwise 0.5 * MAE.
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = std::abs(predicted[i] - gold[i]);
    if (predicted[i] <= gold[i]) {
      sum += gamma * d;
      r.grad[i] = predicted[i] < gold[i] ? -gamma / m : 0.0;
    } else {
      sum += (1.0 - gamma) * d;
      r.grad[i] = (1.0 - gamma) / m;
    }
  }
  r.loss = sum / m;
  return r;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> gold) {
  if (predicted.size() != gold.size() || predicted.empty()) throw ShapeError("mean_absolute_error: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) s += std::abs(predicted[i] - gold[i]);
  return s / static_cast<double>(predicted.size());
}

// ---- optimizer ---------------------------------------------------------------------

void adam_step(std::span<Parameter* const> params, AdamState& st, double lr) {
  if (st.m.empty()) {
    for (const Parameter* p : params) {
      st.m.emplace_back(p->value.size(), 0.0);
      st.v.emplace_back(p->value.size(), 0.0);
    }
  }
  if (st.m.size() != params.size()) throw ShapeError("adam_step: parameter list changed");
  ++st.t;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Parameter& prm = *params[p];
    if (prm.grad.size() != prm.value.size() || st.m[p].size() != prm.value.size()) {
      throw ShapeError("adam_step: shape mismatch for " + prm.name);
    }
    for (std::size_t i = 0; i < prm.value.size(); ++i) {
      const double g = prm.grad.data[i];
      st.m[p][i] = st.beta1 * st.m[p][i] + (1.0 - st.beta1) * g;
      st.v[p][i] = st.beta2 * st.v[p][i] + (1.0 - st.beta2) * g * g;
      const double mhat = st.m[p][i] / c1;
      const double vhat = st.v[p][i] / c2;
      prm.value.data[i] -= lr * mhat / (std::sqrt(vhat) + st.eps);
    }
  }
}

// ---- gradient checking -------------------------------------------------------------

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
}

GradCheckResult grad_check(const LossFn& loss, std::span<Parameter* const> params, double eps,
                           std::size_t max_entries, std::uint64_t seed) {
  loss(true);
  std::vector<std::vector<double>> analytic;
  for (const Parameter* p : params) analytic.push_back(p->grad.data);
  Rng rng(seed);
  GradCheckResult r;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    std::vector<std::size_t> entries(p.value.size());
    std::iota(entries.begin(), entries.end(), 0);
    if (max_entries > 0 && entries.size() > max_entries) {
      rng.shuffle(entries);
      entries.resize(max_entries);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t i : entries) {
      const double x0 = p.value.data[i];
      p.value.data[i] = x0 + eps;
      const double up = loss(false);
      p.value.data[i] = x0 - eps;
      const double down = loss(false);
      p.value.data[i] = x0;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = relative_error(analytic[pi][i], numeric);
      ++r.checked;
      if (r.worst_param.empty() || err > r.max_rel_error) {
        r.max_rel_error = err;
        r.worst_param = p.name;
        r.worst_index = i;
        r.analytic = analytic[pi][i];
        r.numeric = numeric;
      }
    }
  }
  return r;
}

// ---- checkpoints -------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'T', 'N', 'K', '1'};

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
bool get(std::istream& in, T& v) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
  std::memcpy(&v, bytes, sizeof(T));
  return true;
}

}  // namespace

void save_checkpoint(std::ostream& out, std::span<const Parameter* const> params) {
  out.write(kMagic, 4);
  for (const Parameter* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape) put<std::uint64_t>(out, d);
    for (double x : p->value.data) put<double>(out, x);
  }
}

std::vector<NamedTensor> load_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw FormatError(0, "not a TNK1 checkpoint");
  std::vector<NamedTensor> out;
  std::uint32_t name_len = 0;
  while (get(in, name_len)) {
    NamedTensor nt;
    nt.name.resize(name_len);
    std::uint32_t rank = 0;
    if (!in.read(nt.name.data(), name_len) || !get(in, rank) || rank > 8) {
      throw FormatError(out.size() + 1, "truncated parameter header");
    }
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) {
      std::uint64_t v = 0;
      if (!get(in, v) || v == 0 || v > (1ULL << 32)) throw FormatError(out.size() + 1, "bad dimension in " + nt.name);
      d = static_cast<std::size_t>(v);
    }
    std::vector<double> data(element_count(shape));
    for (double& x : data) {
      if (!get(in, x)) throw FormatError(out.size() + 1, "truncated payload for " + nt.name);
    }
    nt.value = Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(nt));
  }
  return out;
}

void restore_parameters(const std::vector<NamedTensor>& loaded, std::span<Parameter* const> params) {
  for (Parameter* p : params) {
    const auto it = std::find_if(loaded.begin(), loaded.end(), [&](const NamedTensor& t) { return t.name == p->name; });
    if (it == loaded.end()) throw ShapeError("checkpoint lacks parameter " + p->name);
    if (it->value.shape != p->value.shape) {
      throw ShapeError("checkpoint shape " + shape_str(it->value.shape) + " for " + p->name + ", expected " +
                       shape_str(p->value.shape));
    }
    p->value = it->value;
  }
}

}  // namespace tracenet
