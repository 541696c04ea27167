#include "camsel/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace camsel {

// --- spec -------------------------------------------------------------------

void ModelSpec::validate() const {
  if (input_height < 1 || input_width < 1) throw InvalidSpec("model input must be at least 1x1");
  if (backbone.empty()) throw InvalidSpec("backbone needs at least one conv block");
  for (const auto& b : backbone) {
    if (b.channels < 1 || b.kernel < 1 || b.kernel % 2 == 0 || b.stride < 1 || b.pool < 1)
      throw InvalidSpec("conv block needs positive channels/stride/pool and an odd kernel");
  }
  for (int h : head)
    if (h < 1) throw InvalidSpec("head layer sizes must be positive");
  block_dims();
}

std::vector<ModelSpec::Dims> ModelSpec::block_dims() const {
  std::vector<Dims> dims;
  int h = input_height, w = input_width;
  for (std::size_t i = 0; i < backbone.size(); ++i) {
    const auto& b = backbone[i];
    const int pad = b.kernel / 2;
    h = (h + 2 * pad - b.kernel) / b.stride + 1;
    w = (w + 2 * pad - b.kernel) / b.stride + 1;
    h /= b.pool;
    w /= b.pool;
    if (h < 1 || w < 1) throw InvalidSpec("conv block " + std::to_string(i + 1) + " shrinks the input to nothing");
    dims.push_back({b.channels, h, w});
  }
  return dims;
}

ModelSpec ModelSpec::toy() {
  ModelSpec s;
  s.input_height = 10;
  s.input_width = 12;
  s.backbone = {{3, 3, 1, 2}, {4, 3, 1, 1}};
  s.head = {6, 5};
  return s;
}

std::vector<LayerShape> layer_shapes(const ModelSpec& spec) {
  spec.validate();
  std::vector<LayerShape> shapes;
  int in = 1;
  for (std::size_t i = 0; i < spec.backbone.size(); ++i) {
    const auto& b = spec.backbone[i];
    shapes.push_back({"conv" + std::to_string(i + 1), {b.channels, in, b.kernel, b.kernel}, {b.channels}});
    in = b.channels;
  }
  for (std::size_t i = 0; i < spec.head.size(); ++i) {
    shapes.push_back({"fc" + std::to_string(i + 1), {spec.head[i], in}, {spec.head[i]}});
    in = spec.head[i];
  }
  shapes.push_back({"out", {ModelSpec::kOutputs, in}, {ModelSpec::kOutputs}});
  return shapes;
}

template <typename Scalar>
ModelParams<Scalar> ModelParams<Scalar>::zeros_like() const {
  ModelParams out;
  out.spec = spec;
  out.version = version;
  for (const auto& l : layers) out.layers.push_back({l.name, Tensor<Scalar>(l.weight.shape()), Tensor<Scalar>(l.bias.shape())});
  return out;
}

template <typename Scalar>
ModelParams<Scalar> init_params(const ModelSpec& spec, std::uint64_t seed) {
  ModelParams<Scalar> params;
  params.spec = spec;
  std::mt19937_64 rng(seed);
  for (const auto& shape : layer_shapes(spec)) {
    Layer<Scalar> layer{shape.name, Tensor<Scalar>(shape.weight), Tensor<Scalar>(shape.bias)};
    const std::size_t fan_in = layer.weight.size() / static_cast<std::size_t>(shape.weight[0]);
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < layer.weight.size(); ++i) layer.weight[i] = static_cast<Scalar>(dist(rng));
    params.layers.push_back(std::move(layer));
  }
  return params;
}

// --- kernels ------------------------------------------------------------------

namespace {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ConstMatMap = Eigen::Map<const Mat<Scalar>>;

struct ConvGeometry {
  int in_channels, in_h, in_w;
  int kernel, stride, pad;
  int out_h, out_w;      // after convolution
  int pool, pool_h, pool_w;
};

std::vector<ConvGeometry> geometry(const ModelSpec& spec) {
  std::vector<ConvGeometry> g;
  int c = 1, h = spec.input_height, w = spec.input_width;
  for (const auto& b : spec.backbone) {
    ConvGeometry cg{};
    cg.in_channels = c;
    cg.in_h = h;
    cg.in_w = w;
    cg.kernel = b.kernel;
    cg.stride = b.stride;
    cg.pad = b.kernel / 2;
    cg.out_h = (h + 2 * cg.pad - b.kernel) / b.stride + 1;
    cg.out_w = (w + 2 * cg.pad - b.kernel) / b.stride + 1;
    cg.pool = b.pool;
    cg.pool_h = cg.out_h / b.pool;
    cg.pool_w = cg.out_w / b.pool;
    g.push_back(cg);
    c = b.channels;
    h = cg.pool_h;
    w = cg.pool_w;
  }
  return g;
}

// Rows are (channel, ky, kx), columns are output pixels.
template <typename Scalar>
void im2col(const Scalar* in, const ConvGeometry& g, Mat<Scalar>& col) {
  const int k = g.kernel;
  col.resize(static_cast<Eigen::Index>(g.in_channels) * k * k, static_cast<Eigen::Index>(g.out_h) * g.out_w);
  Scalar* dst = col.data();
  for (int c = 0; c < g.in_channels; ++c) {
    const Scalar* plane = in + static_cast<std::ptrdiff_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) {
            std::fill(dst, dst + g.out_w, Scalar(0));
            dst += g.out_w;
            continue;
          }
          const Scalar* row = plane + static_cast<std::ptrdiff_t>(iy) * g.in_w;
          if (g.stride == 1) {
            // Valid columns form one contiguous run.
            const int shift = kx - g.pad;
            const int lo = std::clamp(-shift, 0, g.out_w);
            const int hi = std::clamp(g.in_w - shift, lo, g.out_w);
            std::fill(dst, dst + lo, Scalar(0));
            std::copy(row + lo + shift, row + hi + shift, dst + lo);
            std::fill(dst + hi, dst + g.out_w, Scalar(0));
            dst += g.out_w;
            continue;
          }
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            *dst++ = (ix >= 0 && ix < g.in_w) ? row[ix] : Scalar(0);
          }
        }
      }
    }
  }
}

template <typename Scalar>
void col2im(const Mat<Scalar>& col, const ConvGeometry& g, Scalar* out) {
  const int k = g.kernel;
  std::fill(out, out + static_cast<std::ptrdiff_t>(g.in_channels) * g.in_h * g.in_w, Scalar(0));
  const Scalar* src = col.data();
  for (int c = 0; c < g.in_channels; ++c) {
    Scalar* plane = out + static_cast<std::ptrdiff_t>(c) * g.in_h * g.in_w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.in_h) {
            src += g.out_w;
            continue;
          }
          Scalar* row = plane + static_cast<std::ptrdiff_t>(iy) * g.in_w;
          for (int ox = 0; ox < g.out_w; ++ox, ++src) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix >= 0 && ix < g.in_w) row[ix] += *src;
          }
        }
      }
    }
  }
}

// Per-sample activations kept for the backward pass.
template <typename Scalar>
struct BlockTrace {
  Mat<Scalar> col;
  Mat<Scalar> pre;              // conv output before ReLU, C x (out_h*out_w)
  Mat<Scalar> pooled;           // C x (pool_h*pool_w)
  std::vector<int> argmax;      // flat index into the pre-pool plane, per pooled element
};

template <typename Scalar>
struct SampleTrace {
  std::vector<BlockTrace<Scalar>> blocks;
  Vec<Scalar> features;
  std::vector<Vec<Scalar>> dense_in;   // input of each dense layer
  std::vector<Vec<Scalar>> dense_pre;  // pre-activation of each hidden dense layer
  Vec<Scalar> logits;
};

// Max pooling fused with ReLU: relu(max(x)) == max(relu(x)). `argmax` is
// filled only when non-null.
template <typename Scalar>
void relu_max_pool(const Mat<Scalar>& pre, const ConvGeometry& g, Mat<Scalar>& pooled, std::vector<int>* argmax) {
  const int channels = static_cast<int>(pre.rows());
  pooled.resize(channels, static_cast<Eigen::Index>(g.pool_h) * g.pool_w);
  if (argmax) argmax->resize(static_cast<std::size_t>(pooled.size()));
  Scalar* out = pooled.data();
  int* arg = argmax ? argmax->data() : nullptr;
  if (!arg && g.pool == 2) {
    for (int c = 0; c < channels; ++c) {
      const Scalar* plane = pre.data() + static_cast<std::ptrdiff_t>(c) * g.out_h * g.out_w;
      for (int py = 0; py < g.pool_h; ++py) {
        const Scalar* r0 = plane + 2 * py * g.out_w;
        const Scalar* r1 = r0 + g.out_w;
        for (int px = 0; px < g.pool_w; ++px)
          *out++ = std::max(std::max(std::max(r0[2 * px], r0[2 * px + 1]), std::max(r1[2 * px], r1[2 * px + 1])), Scalar(0));
      }
    }
    return;
  }
  for (int c = 0; c < channels; ++c) {
    const Scalar* plane = pre.data() + static_cast<std::ptrdiff_t>(c) * g.out_h * g.out_w;
    for (int py = 0; py < g.pool_h; ++py) {
      const int base = py * g.pool * g.out_w;
      for (int px = 0; px < g.pool_w; ++px, ++out) {
        int best = base + px * g.pool;
        for (int dy = 0; dy < g.pool; ++dy) {
          const int r = base + dy * g.out_w + px * g.pool;
          for (int dx = 0; dx < g.pool; ++dx)
            if (plane[r + dx] > plane[best]) best = r + dx;
        }
        *out = std::max(plane[best], Scalar(0));
        if (arg) *arg++ = best;
      }
    }
  }
}

template <typename Scalar>
void forward_sample(const ModelParams<Scalar>& model, const std::vector<ConvGeometry>& geo, const Scalar* input,
                    SampleTrace<Scalar>& trace, bool keep_argmax) {
  const std::size_t nconv = geo.size();
  trace.blocks.resize(nconv);
  const Scalar* in = input;
  for (std::size_t i = 0; i < nconv; ++i) {
    const auto& layer = model.layers[i];
    auto& bt = trace.blocks[i];
    im2col(in, geo[i], bt.col);
    const auto w = layer.weight.matrix();
    bt.pre.noalias() = w * bt.col;
    for (Eigen::Index c = 0; c < bt.pre.rows(); ++c) bt.pre.row(c).array() += layer.bias[static_cast<std::size_t>(c)];
    relu_max_pool(bt.pre, geo[i], bt.pooled, keep_argmax ? &bt.argmax : nullptr);
    in = bt.pooled.data();
  }
  const auto& last = trace.blocks.back().pooled;
  trace.features = last.rowwise().mean();

  const std::size_t ndense = model.layers.size() - nconv;
  trace.dense_in.resize(ndense);
  trace.dense_pre.resize(ndense - 1);
  Vec<Scalar> x = trace.features;
  for (std::size_t j = 0; j < ndense; ++j) {
    const auto& layer = model.layers[nconv + j];
    trace.dense_in[j] = x;
    Vec<Scalar> z = layer.weight.matrix() * x + layer.bias.flat();
    if (j + 1 < ndense) {
      trace.dense_pre[j] = z;
      x = z.cwiseMax(Scalar(0));
    } else {
      trace.logits = z;
    }
  }
}

template <typename Scalar>
void check_batch(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch) {
  const auto& s = model.spec;
  if (batch.rank() != 4 || batch.dim(1) != 1 || batch.dim(2) != s.input_height || batch.dim(3) != s.input_width)
    throw ShapeMismatch("batch shape " + shape_string(batch.shape()) + " does not match model input [N, 1, " +
                        std::to_string(s.input_height) + ", " + std::to_string(s.input_width) + "]");
  const auto expected = layer_shapes(s);
  if (expected.size() != model.layers.size()) throw ShapeMismatch("model has the wrong number of layers");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (model.layers[i].weight.shape() != expected[i].weight || model.layers[i].bias.shape() != expected[i].bias)
      throw ShapeMismatch("layer " + expected[i].name + " does not match the model spec");
  }
}

}  // namespace

// --- public entry points ---------------------------------------------------------

template <typename Scalar>
Tensor<Scalar> forward_logits(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch) {
  check_batch(model, batch);
  const auto geo = geometry(model.spec);
  const int n = batch.dim(0);
  const std::size_t sample_size = batch.size() / std::max(n, 1);
  Tensor<Scalar> logits({n, ModelSpec::kOutputs});
  SampleTrace<Scalar> trace;
  for (int i = 0; i < n; ++i) {
    forward_sample(model, geo, batch.data() + i * sample_size, trace, false);
    for (int k = 0; k < ModelSpec::kOutputs; ++k) logits[static_cast<std::size_t>(i) * ModelSpec::kOutputs + k] = trace.logits(k);
  }
  return logits;
}

template <typename Scalar>
Tensor<Scalar> softmax_rows(const Tensor<Scalar>& logits) {
  Tensor<Scalar> probs(logits.shape());
  const int n = logits.dim(0), k = logits.dim(1);
  for (int i = 0; i < n; ++i) {
    const Scalar* z = logits.data() + static_cast<std::ptrdiff_t>(i) * k;
    Scalar* p = probs.data() + static_cast<std::ptrdiff_t>(i) * k;
    const Scalar m = *std::max_element(z, z + k);
    Scalar sum(0);
    for (int j = 0; j < k; ++j) sum += (p[j] = std::exp(z[j] - m));
    for (int j = 0; j < k; ++j) p[j] /= sum;
  }
  return probs;
}

template <typename Scalar>
Tensor<Scalar> forward(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch) {
  return softmax_rows(forward_logits(model, batch));
}

template <typename Scalar>
double cross_entropy(const Tensor<Scalar>& probs, std::span<const int> labels) {
  const int n = probs.dim(0);
  if (static_cast<int>(labels.size()) != n) throw ShapeMismatch("label count does not match the batch");
  if (n == 0) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = static_cast<double>(probs[static_cast<std::size_t>(i) * probs.dim(1) + labels[i]]);
    total -= std::log(std::max(p, kLogClamp));
  }
  return total / n;
}

template <typename Scalar>
BackwardResult<Scalar> backward(const ModelParams<Scalar>& model, const Tensor<Scalar>& batch,
                                std::span<const int> labels) {
  check_batch(model, batch);
  const int n = batch.dim(0);
  if (static_cast<int>(labels.size()) != n) throw ShapeMismatch("label count does not match the batch");
  for (int l : labels)
    if (l != 0 && l != 1) throw InvalidArgument("labels must be 0 or 1");

  const auto geo = geometry(model.spec);
  const std::size_t nconv = geo.size();
  const std::size_t ndense = model.layers.size() - nconv;
  const std::size_t sample_size = batch.size() / std::max(n, 1);

  BackwardResult<Scalar> result{model.zeros_like(), 0.0};
  auto& grads = result.gradients.layers;
  SampleTrace<Scalar> trace;
  Mat<Scalar> dcol, dpre;
  for (int i = 0; i < n; ++i) {
    forward_sample(model, geo, batch.data() + i * sample_size, trace, true);

    // Softmax + cross-entropy.
    Vec<Scalar> p = (trace.logits.array() - trace.logits.maxCoeff()).exp();
    p /= p.sum();
    const double pt = static_cast<double>(p(labels[i]));
    result.loss -= std::log(std::max(pt, kLogClamp));
    Vec<Scalar> dz = Vec<Scalar>::Zero(ModelSpec::kOutputs);
    if (pt >= kLogClamp) {
      dz = p;
      dz(labels[i]) -= Scalar(1);
      dz /= Scalar(n);
    }

    // Dense layers, last to first.
    for (std::size_t j = ndense; j-- > 0;) {
      const auto& layer = model.layers[nconv + j];
      auto& g = grads[nconv + j];
      g.weight.matrix().noalias() += dz * trace.dense_in[j].transpose();
      g.bias.flat() += dz;
      Vec<Scalar> dx = layer.weight.matrix().transpose() * dz;
      if (j > 0) dz = dx.cwiseProduct((trace.dense_pre[j - 1].array() > Scalar(0)).matrix().template cast<Scalar>());
      else dz = dx;
    }

    // Global average pool.
    const auto& last = geo.back();
    const int plane = last.pool_h * last.pool_w;
    Mat<Scalar> dpooled = (dz / Scalar(plane)).replicate(1, plane);

    for (std::size_t b = nconv; b-- > 0;) {
      const auto& g = geo[b];
      const auto& bt = trace.blocks[b];
      dpre.setZero(bt.pre.rows(), bt.pre.cols());
      for (Eigen::Index c = 0; c < dpooled.rows(); ++c) {
        for (Eigen::Index j = 0; j < dpooled.cols(); ++j) {
          const int at = bt.argmax[static_cast<std::size_t>(c * dpooled.cols() + j)];
          if (bt.pre(c, at) > Scalar(0)) dpre(c, at) += dpooled(c, j);
        }
      }
      grads[b].weight.matrix().noalias() += dpre * bt.col.transpose();
      grads[b].bias.flat() += dpre.rowwise().sum();
      if (b > 0) {
        dcol.noalias() = model.layers[b].weight.matrix().transpose() * dpre;
        dpooled.resize(g.in_channels, static_cast<Eigen::Index>(g.in_h) * g.in_w);
        col2im(dcol, g, dpooled.data());
      }
    }
  }
  result.loss /= std::max(n, 1);
  return result;
}

#define CAMSEL_INSTANTIATE(Scalar)                                                                      \
  template struct ModelParams<Scalar>;                                                                  \
  template ModelParams<Scalar> init_params<Scalar>(const ModelSpec&, std::uint64_t);                    \
  template Tensor<Scalar> forward_logits<Scalar>(const ModelParams<Scalar>&, const Tensor<Scalar>&);    \
  template Tensor<Scalar> softmax_rows<Scalar>(const Tensor<Scalar>&);                                  \
  template Tensor<Scalar> forward<Scalar>(const ModelParams<Scalar>&, const Tensor<Scalar>&);           \
  template double cross_entropy<Scalar>(const Tensor<Scalar>&, std::span<const int>);                  \
  template BackwardResult<Scalar> backward<Scalar>(const ModelParams<Scalar>&, const Tensor<Scalar>&,  \
                                                   std::span<const int>);

CAMSEL_INSTANTIATE(float)
CAMSEL_INSTANTIATE(double)

#undef CAMSEL_INSTANTIATE

}  // namespace camsel
