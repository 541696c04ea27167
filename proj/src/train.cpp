#include "camsel/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "json.hpp"

namespace camsel {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidArgument("beta1 and beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (epochs < 1 || batch_size < 1) throw InvalidArgument("epochs and batch_size must be positive");
}

// --- Adam ---------------------------------------------------------------------

template <typename Scalar>
AdamState<Scalar> AdamState<Scalar>::zeros_like(const ModelParams<Scalar>& params) {
  AdamState s;
  for (const auto& l : params.layers) {
    for (const auto* t : {&l.weight, &l.bias}) {
      s.m.emplace_back(t->shape());
      s.v.emplace_back(t->shape());
    }
  }
  return s;
}

template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, const ModelParams<Scalar>& grads, AdamState<Scalar>& state,
               const TrainConfig& cfg, long t) {
  if (t < 1) throw InvalidArgument("Adam step index starts at 1");
  if (grads.layers.size() != params.layers.size() || state.m.size() != 2 * params.layers.size())
    throw ShapeMismatch("Adam state does not match the parameters");
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const Scalar b1 = static_cast<Scalar>(cfg.beta1), b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar lr = static_cast<Scalar>(cfg.learning_rate), eps = static_cast<Scalar>(cfg.epsilon);
  const Scalar inv_c1 = static_cast<Scalar>(1.0 / c1), inv_c2 = static_cast<Scalar>(1.0 / c2);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    Tensor<Scalar>* theta[2] = {&params.layers[i].weight, &params.layers[i].bias};
    const Tensor<Scalar>* g[2] = {&grads.layers[i].weight, &grads.layers[i].bias};
    for (int k = 0; k < 2; ++k) {
      auto& m = state.m[2 * i + k];
      auto& v = state.v[2 * i + k];
      if (g[k]->shape() != theta[k]->shape() || m.shape() != theta[k]->shape() || v.shape() != theta[k]->shape())
        throw ShapeMismatch("Adam shapes disagree at layer " + params.layers[i].name);
      auto gv = g[k]->flat().array();
      m.flat().array() = b1 * m.flat().array() + (Scalar(1) - b1) * gv;
      v.flat().array() = b2 * v.flat().array() + (Scalar(1) - b2) * gv.square();
      theta[k]->flat().array() -= lr * (m.flat().array() * inv_c1) / ((v.flat().array() * inv_c2).sqrt() + eps);
    }
  }
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(ModelParams<float>&, const ModelParams<float>&, AdamState<float>&, const TrainConfig&,
                               long);
template void adam_step<double>(ModelParams<double>&, const ModelParams<double>&, AdamState<double>&,
                                const TrainConfig&, long);

// --- data ---------------------------------------------------------------------

std::vector<Prediction> predict(const ModelParams<float>& model, const Tensor<float>& batch) {
  const auto probs = forward(model, batch);
  std::vector<Prediction> out(static_cast<std::size_t>(probs.dim(0)));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].probs = {probs[2 * i], probs[2 * i + 1]};
    out[i].label = out[i].probs[1] > out[i].probs[0] ? 1 : 0;
  }
  return out;
}

void to_input(const GrayImage& image, const ModelSpec& spec, float* out) {
  const int h = spec.input_height, w = spec.input_width;
  RasterX<float> values;
  if (image.width() == w && image.height() == h) {
    values = image.pixels().cast<float>();
  } else {
    values = resize_area(image, w, h);
  }
  Eigen::Map<RasterX<float>>(out, h, w) = values / 255.0f;
}

LabeledImages load_labeled_images(const LabelSet& labels, const std::filesystem::path& root, const ModelSpec& spec) {
  spec.validate();
  const int n = static_cast<int>(labels.labels.size());
  LabeledImages data;
  data.images = Tensor<float>({n, 1, spec.input_height, spec.input_width});
  const std::size_t stride = static_cast<std::size_t>(spec.input_height) * spec.input_width;
  for (int i = 0; i < n; ++i) {
    const auto& l = labels.labels[static_cast<std::size_t>(i)];
    to_input(read_png(root / l.frame.path), spec, data.images.data() + i * stride);
    data.labels.push_back(l.good ? 1 : 0);
    data.cameras.push_back(l.frame.camera_id);
  }
  return data;
}

namespace {

Tensor<float> gather(const Tensor<float>& images, const std::vector<int>& index, std::size_t begin, std::size_t end) {
  std::vector<int> shape = images.shape();
  shape[0] = static_cast<int>(end - begin);
  Tensor<float> batch(shape);
  const std::size_t stride = images.size() / static_cast<std::size_t>(images.dim(0));
  for (std::size_t i = begin; i < end; ++i)
    std::copy_n(images.data() + static_cast<std::size_t>(index[i]) * stride, stride, batch.data() + (i - begin) * stride);
  return batch;
}

constexpr std::uint64_t kShuffleSalt = 0x7368756666ull;

}  // namespace

TrainResult train(const LabeledImages& data, const ModelSpec& spec, const TrainConfig& cfg) {
  cfg.validate();
  spec.validate();
  if (data.size() == 0) throw EmptyDataset("no training samples");
  if (data.images.rank() != 4 || data.images.dim(0) != data.size() || data.images.dim(2) != spec.input_height ||
      data.images.dim(3) != spec.input_width)
    throw ShapeMismatch("training images do not match the model input");

  TrainResult result{init_params<float>(spec, cfg.seed), {}};
  auto state = AdamState<float>::zeros_like(result.params);
  std::mt19937_64 rng(cfg.seed ^ kShuffleSalt);
  std::vector<int> order(static_cast<std::size_t>(data.size()));
  std::vector<int> batch_labels;
  long step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size));
      const auto batch = gather(data.images, order, b, e);
      batch_labels.clear();
      for (std::size_t i = b; i < e; ++i) batch_labels.push_back(data.labels[static_cast<std::size_t>(order[i])]);
      const auto br = backward(result.params, batch, batch_labels);
      adam_step(result.params, br.gradients, state, cfg, ++step);
      loss_sum += br.loss * static_cast<double>(e - b);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back({epoch, loss_sum / static_cast<double>(order.size()), ms});
  }
  return result;
}

TrainResult train(const LabelSet& labels, const std::filesystem::path& root, const ModelSpec& spec,
                  const TrainConfig& cfg) {
  if (labels.labels.empty()) throw EmptyDataset("no training labels");
  return train(load_labeled_images(labels, root, spec), spec, cfg);
}

void write_history(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : history) {
    const nlohmann::ordered_json j{{"epoch", r.epoch}, {"mean_loss", r.mean_loss}};
    out << j.dump() << '\n';
  }
}

// --- evaluation ---------------------------------------------------------------

double BinaryMetrics::accuracy() const { return total() ? static_cast<double>(tp + tn) / total() : 0.0; }

double BinaryMetrics::f1() const {
  const int predicted = tp + fp, actual = tp + fn;
  if (predicted == 0 && actual == 0) return 1.0;
  if (predicted == 0 || actual == 0) return 0.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

namespace {

void tally(BinaryMetrics& m, int predicted, int truth) {
  if (predicted == 1) (truth == 1 ? m.tp : m.fp)++;
  else (truth == 1 ? m.fn : m.tn)++;
}

}  // namespace

EvalReport evaluate_predictions(const std::vector<int>& predicted, const std::vector<int>& truth,
                                const std::vector<int>& cameras) {
  if (predicted.empty()) throw EmptyDataset("nothing to evaluate");
  if (predicted.size() != truth.size() || truth.size() != cameras.size())
    throw ShapeMismatch("prediction, label and camera counts differ");
  std::map<int, BinaryMetrics> per_camera;
  EvalReport report;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    tally(per_camera[cameras[i]], predicted[i], truth[i]);
    tally(report.overall, predicted[i], truth[i]);
  }
  for (const auto& [cam, m] : per_camera) {
    report.per_camera.push_back({cam, m});
    report.macro_accuracy += m.accuracy();
    report.macro_f1 += m.f1();
  }
  report.macro_accuracy /= static_cast<double>(per_camera.size());
  report.macro_f1 /= static_cast<double>(per_camera.size());
  return report;
}

EvalReport evaluate(const ModelParams<float>& model, const LabeledImages& data) {
  if (data.size() == 0) throw EmptyDataset("no evaluation samples");
  constexpr int kChunk = 64;
  std::vector<int> predicted;
  std::vector<int> index(static_cast<std::size_t>(data.size()));
  std::iota(index.begin(), index.end(), 0);
  for (std::size_t b = 0; b < index.size(); b += kChunk) {
    const std::size_t e = std::min(index.size(), b + kChunk);
    for (const auto& p : predict(model, gather(data.images, index, b, e))) predicted.push_back(p.label);
  }
  return evaluate_predictions(predicted, data.labels, data.cameras);
}

EvalReport evaluate(const ModelParams<float>& model, const LabelSet& labels, const std::filesystem::path& root) {
  if (labels.labels.empty()) throw EmptyDataset("no evaluation labels");
  return evaluate(model, load_labeled_images(labels, root, model.spec));
}

}  // namespace camsel
