#include "seedkit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "seedkit/error.hpp"
#include "seedkit/png_io.hpp"
#include "seedkit/rng.hpp"
#include "seedkit/util.hpp"

namespace seedkit {
namespace {

template <typename T>
void check_finite(const T& values, const char* what) {
  if (!values.allFinite()) fail(Status::numeric_error, std::string("non-finite ") + what);
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// Column-wise softmax with per-column max subtraction.
Eigen::MatrixXd softmax_columns(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const Eigen::ArrayXd shifted =
        (logits.col(c).array() - logits.col(c).maxCoeff()).exp();
    probs.col(c) = (shifted / shifted.sum()).matrix();
  }
  return probs;
}

// Inverted-dropout mask: entries are 0 with probability rate, else
// 1/(1-rate), drawn in storage order (unit within sample, samples left to
// right) so a batch seed pins the whole mask.
Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                             Rng& rng) {
  const double keep_scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd mask(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      mask(r, c) = rng.coin(rate) ? 0.0 : keep_scale;
    }
  }
  return mask;
}

void he_fill(Eigen::MatrixXd& w, Rng& rng) {
  const double stddev = std::sqrt(2.0 / double(w.cols()));
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = stddev * rng.normal();
  }
}

HeadModel init_model(int feature_dim, const HeadConfig& cfg) {
  HeadModel m;
  m.W1.resize(cfg.nodes[0], feature_dim);
  m.W2.resize(cfg.nodes[1], cfg.nodes[0]);
  m.W3.resize(cfg.nodes[2], cfg.nodes[1]);
  m.Wo.resize(cfg.num_classes, cfg.nodes[2]);
  Rng rng(hash64(cfg.init_seed, "init"));
  he_fill(m.W1, rng);
  he_fill(m.W2, rng);
  he_fill(m.W3, rng);
  he_fill(m.Wo, rng);
  m.b1 = Eigen::VectorXd::Zero(cfg.nodes[0]);
  m.b2 = Eigen::VectorXd::Zero(cfg.nodes[1]);
  m.b3 = Eigen::VectorXd::Zero(cfg.nodes[2]);
  m.bo = Eigen::VectorXd::Zero(cfg.num_classes);
  return m;
}

struct AdamState {
  Gradients m, v;
};

Gradients zero_like(const HeadModel& model) {
  Gradients g;
  g.W1 = Eigen::MatrixXd::Zero(model.W1.rows(), model.W1.cols());
  g.W2 = Eigen::MatrixXd::Zero(model.W2.rows(), model.W2.cols());
  g.W3 = Eigen::MatrixXd::Zero(model.W3.rows(), model.W3.cols());
  g.Wo = Eigen::MatrixXd::Zero(model.Wo.rows(), model.Wo.cols());
  g.b1 = Eigen::VectorXd::Zero(model.b1.size());
  g.b2 = Eigen::VectorXd::Zero(model.b2.size());
  g.b3 = Eigen::VectorXd::Zero(model.b3.size());
  g.bo = Eigen::VectorXd::Zero(model.bo.size());
  return g;
}

void sgd_step(HeadModel& model, const Gradients& g, double lr) {
  auto update = [lr](auto& p, const auto& gp) { p -= lr * gp; };
  update(model.W1, g.W1);
  update(model.b1, g.b1);
  update(model.W2, g.W2);
  update(model.b2, g.b2);
  update(model.W3, g.W3);
  update(model.b3, g.b3);
  update(model.Wo, g.Wo);
  update(model.bo, g.bo);
}

void adam_step(HeadModel& model, const Gradients& g, AdamState& adam, double lr,
               int64_t t) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  const double corr1 = 1.0 - std::pow(kBeta1, double(t));
  const double corr2 = 1.0 - std::pow(kBeta2, double(t));
  auto update = [&](auto& p, const auto& gp, auto& m, auto& v) {
    m = kBeta1 * m + (1.0 - kBeta1) * gp;
    v.array() = kBeta2 * v.array() + (1.0 - kBeta2) * gp.array().square();
    p.array() -= lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + kEps);
  };
  update(model.W1, g.W1, adam.m.W1, adam.v.W1);
  update(model.b1, g.b1, adam.m.b1, adam.v.b1);
  update(model.W2, g.W2, adam.m.W2, adam.v.W2);
  update(model.b2, g.b2, adam.m.b2, adam.v.b2);
  update(model.W3, g.W3, adam.m.W3, adam.v.W3);
  update(model.b3, g.b3, adam.m.b3, adam.v.b3);
  update(model.Wo, g.Wo, adam.m.Wo, adam.v.Wo);
  update(model.bo, g.bo, adam.m.bo, adam.v.bo);
}

int argmax_col(const Eigen::MatrixXd& probs, Eigen::Index c) {
  int best = 0;
  for (Eigen::Index r = 1; r < probs.rows(); ++r) {
    if (probs(r, c) > probs(best, c)) best = int(r);
  }
  return best;
}

// Batched clean pass (no dropout): loss and accuracy for evaluation.
void evaluate_clean(const HeadModel& m, const Eigen::MatrixXd& X,
                    const std::vector<int>& y, double* loss, double* accuracy) {
  const Eigen::MatrixXd h1 = relu((m.W1 * X).colwise() + m.b1);
  const Eigen::MatrixXd h2 = relu((m.W2 * h1).colwise() + m.b2);
  const Eigen::MatrixXd h3 = relu((m.W3 * h2).colwise() + m.b3);
  const Eigen::MatrixXd probs = softmax_columns((m.Wo * h3).colwise() + m.bo);
  double total_loss = 0.0;
  int64_t correct = 0;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    total_loss += -std::log(std::max(probs(y[size_t(c)], c), 1e-300));
    if (argmax_col(probs, c) == y[size_t(c)]) ++correct;
  }
  *loss = total_loss / double(X.cols());
  *accuracy = double(correct) / double(X.cols());
}

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t read_u32(std::ifstream& in, const char* what) {
  uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) {
    fail(Status::io_error, std::string("model file truncated reading ") + what);
  }
  return v;
}

template <typename T>
void write_tensor(std::ofstream& out, const T& t) {
  out.write(reinterpret_cast<const char*>(t.data()),
            std::streamsize(sizeof(double)) * t.size());
}

template <typename T>
void read_tensor(std::ifstream& in, T& t) {
  if (!in.read(reinterpret_cast<char*>(t.data()),
               std::streamsize(sizeof(double)) * t.size())) {
    fail(Status::io_error, "model file truncated reading parameters");
  }
}

}  // namespace

void HeadConfig::validate() const {
  for (int n : nodes) {
    if (n < 1) fail(Status::config_invalid, "layer width must be >= 1");
  }
  if (learning_rate <= 0.0) fail(Status::config_invalid, "learning_rate must be > 0");
  if (decay) {
    if (decay->decay_steps < 1) fail(Status::config_invalid, "decay_steps must be >= 1");
    if (!(decay->decay_rate > 0.0 && decay->decay_rate <= 1.0)) {
      fail(Status::config_invalid, "decay_rate must be in (0, 1]");
    }
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    fail(Status::config_invalid, "dropout must be in [0, 1)");
  }
  if (batch_size < 1) fail(Status::config_invalid, "batch_size must be >= 1");
  if (epochs < 0) fail(Status::config_invalid, "epochs must be >= 0");
}

Eigen::VectorXd featurize(const ImageRGB8& img) {
  constexpr int kInput = 224;
  constexpr int kBlock = kInput / kFeatureBlocks;  // 7
  if (img.width != kInput || img.height != kInput) {
    fail(Status::shape_error,
         "featurize expects a 224x224 image, got " + std::to_string(img.width) +
             "x" + std::to_string(img.height));
  }
  Eigen::VectorXd out(kFeatureDim);
  for (int by = 0; by < kFeatureBlocks; ++by) {
    for (int bx = 0; bx < kFeatureBlocks; ++bx) {
      double sum = 0.0;
      for (int y = by * kBlock; y < (by + 1) * kBlock; ++y) {
        for (int x = bx * kBlock; x < (bx + 1) * kBlock; ++x) {
          const uint8_t* p = img.px(x, y);
          sum += gray_value(p[0], p[1], p[2]);
        }
      }
      out(by * kFeatureBlocks + bx) = sum / double(kBlock * kBlock) / 255.0;
    }
  }
  return out;
}

Eigen::VectorXd forward(const HeadModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.W1.cols()) {
    fail(Status::shape_error,
         "feature length " + std::to_string(x.size()) + " does not match model (" +
             std::to_string(model.W1.cols()) + ")");
  }
  check_finite(x, "input");
  const Eigen::VectorXd h1 = (model.W1 * x + model.b1).cwiseMax(0.0);
  check_finite(h1, "layer 1 activations");
  const Eigen::VectorXd h2 = (model.W2 * h1 + model.b2).cwiseMax(0.0);
  check_finite(h2, "layer 2 activations");
  const Eigen::VectorXd h3 = (model.W3 * h2 + model.b3).cwiseMax(0.0);
  check_finite(h3, "layer 3 activations");
  const Eigen::VectorXd logits = model.Wo * h3 + model.bo;
  check_finite(logits, "logits");
  const Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return (shifted / shifted.sum()).matrix();
}

double loss_and_grad(const HeadModel& model, const Eigen::MatrixXd& X,
                     const std::vector<int>& labels, double dropout_rate,
                     uint64_t dropout_seed, Gradients* grads,
                     Eigen::MatrixXd* probs_out) {
  const Eigen::Index B = X.cols();
  const int K = model.num_classes();
  if (size_t(B) != labels.size()) {
    fail(Status::shape_error, "batch features and labels disagree in count");
  }
  if (B == 0) fail(Status::empty_input, "empty batch");
  for (int y : labels) {
    if (y < 0 || y >= K) {
      fail(Status::label_error, "label " + std::to_string(y) + " outside [0, " +
                                    std::to_string(K) + ")");
    }
  }

  Rng drop_rng(dropout_seed);
  const bool dropping = dropout_rate > 0.0;
  Eigen::MatrixXd m1, m2, m3;

  Eigen::MatrixXd h1 = relu((model.W1 * X).colwise() + model.b1);
  if (dropping) {
    m1 = dropout_mask(h1.rows(), h1.cols(), dropout_rate, drop_rng);
    h1 = h1.cwiseProduct(m1);
  }
  Eigen::MatrixXd h2 = relu((model.W2 * h1).colwise() + model.b2);
  if (dropping) {
    m2 = dropout_mask(h2.rows(), h2.cols(), dropout_rate, drop_rng);
    h2 = h2.cwiseProduct(m2);
  }
  Eigen::MatrixXd h3 = relu((model.W3 * h2).colwise() + model.b3);
  if (dropping) {
    m3 = dropout_mask(h3.rows(), h3.cols(), dropout_rate, drop_rng);
    h3 = h3.cwiseProduct(m3);
  }
  const Eigen::MatrixXd probs = softmax_columns((model.Wo * h3).colwise() + model.bo);

  double loss = 0.0;
  for (Eigen::Index c = 0; c < B; ++c) {
    loss += -std::log(std::max(probs(labels[size_t(c)], c), 1e-300));
  }
  loss /= double(B);

  if (grads) {
    Eigen::MatrixXd dlogits = probs;
    for (Eigen::Index c = 0; c < B; ++c) dlogits(labels[size_t(c)], c) -= 1.0;
    dlogits /= double(B);

    // Each hidden layer backpropagates through dropout (elementwise mask,
    // which also zeroes dropped units' gradients) and then the ReLU gate.
    // The gate tests the post-ReLU value: it is positive iff the
    // pre-activation was, dropped units pass 0 either way.
    auto relu_gate = [](const Eigen::MatrixXd& dh,
                        const Eigen::MatrixXd& h) -> Eigen::MatrixXd {
      return dh.cwiseProduct((h.array() > 0.0).cast<double>().matrix());
    };
    grads->Wo = dlogits * h3.transpose();
    grads->bo = dlogits.rowwise().sum();
    Eigen::MatrixXd dh3 = model.Wo.transpose() * dlogits;
    if (dropping) dh3 = dh3.cwiseProduct(m3);
    const Eigen::MatrixXd dz3 = relu_gate(dh3, h3);
    grads->W3 = dz3 * h2.transpose();
    grads->b3 = dz3.rowwise().sum();
    Eigen::MatrixXd dh2 = model.W3.transpose() * dz3;
    if (dropping) dh2 = dh2.cwiseProduct(m2);
    const Eigen::MatrixXd dz2 = relu_gate(dh2, h2);
    grads->W2 = dz2 * h1.transpose();
    grads->b2 = dz2.rowwise().sum();
    Eigen::MatrixXd dh1 = model.W2.transpose() * dz2;
    if (dropping) dh1 = dh1.cwiseProduct(m1);
    const Eigen::MatrixXd dz1 = relu_gate(dh1, h1);
    grads->W1 = dz1 * X.transpose();
    grads->b1 = dz1.rowwise().sum();
  }
  if (probs_out) *probs_out = probs;
  return loss;
}

double lr_at(int64_t step, const HeadConfig& cfg) {
  if (!cfg.decay) return cfg.learning_rate;
  const double exponent = cfg.decay->staircase
                              ? double(step / int64_t(cfg.decay->decay_steps))
                              : double(step) / double(cfg.decay->decay_steps);
  return cfg.learning_rate * std::pow(cfg.decay->decay_rate, exponent);
}

TrainResult train(const Eigen::MatrixXd& Xtrain, const std::vector<int>& ytrain,
                  const Eigen::MatrixXd& Xval, const std::vector<int>& yval,
                  const HeadConfig& cfg) {
  cfg.validate();
  if (cfg.num_classes < 2) fail(Status::config_invalid, "need at least 2 classes");
  if (Xtrain.cols() == 0) fail(Status::empty_input, "no training samples");
  if (Xval.cols() == 0) fail(Status::empty_input, "no validation samples");
  if (size_t(Xtrain.cols()) != ytrain.size() || size_t(Xval.cols()) != yval.size()) {
    fail(Status::shape_error, "features and labels disagree in count");
  }

  TrainResult result;
  result.model = init_model(int(Xtrain.rows()), cfg);
  HeadModel& model = result.model;

  AdamState adam;
  if (cfg.optimizer == Optimizer::adam) {
    adam.m = zero_like(model);
    adam.v = zero_like(model);
  }

  const size_t n = size_t(Xtrain.cols());
  std::vector<size_t> order(n);
  int64_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t(0));
    Rng shuffle_rng(hash64(cfg.init_seed, "shuffle", uint64_t(epoch)));
    for (size_t i = n - 1; i > 0; --i) {
      std::swap(order[i], order[size_t(shuffle_rng.next_below(i + 1))]);
    }

    double epoch_loss = 0.0;
    int64_t epoch_correct = 0;
    Gradients grads;
    Eigen::MatrixXd batch_probs;
    for (size_t begin = 0, batch_index = 0; begin < n;
         begin += size_t(cfg.batch_size), ++batch_index, ++step) {
      const size_t bsize = std::min(size_t(cfg.batch_size), n - begin);
      Eigen::MatrixXd X(Xtrain.rows(), bsize);
      std::vector<int> y(bsize);
      for (size_t i = 0; i < bsize; ++i) {
        X.col(Eigen::Index(i)) = Xtrain.col(Eigen::Index(order[begin + i]));
        y[i] = ytrain[order[begin + i]];
      }
      const uint64_t drop_seed =
          hash64(cfg.init_seed, "dropout", uint64_t(epoch), uint64_t(batch_index));
      const double batch_loss =
          loss_and_grad(model, X, y, cfg.dropout, drop_seed, &grads, &batch_probs);
      if (!std::isfinite(batch_loss)) {
        fail(Status::divergence, "training diverged at step " + std::to_string(step));
      }
      epoch_loss += batch_loss * double(bsize);
      for (Eigen::Index c = 0; c < Eigen::Index(bsize); ++c) {
        if (argmax_col(batch_probs, c) == y[size_t(c)]) ++epoch_correct;
      }

      const double lr = lr_at(step, cfg);
      if (cfg.optimizer == Optimizer::sgd) {
        sgd_step(model, grads, lr);
      } else {
        adam_step(model, grads, adam, lr, step + 1);
      }
    }

    EpochStats stats;
    stats.train_loss = epoch_loss / double(n);
    stats.train_accuracy = double(epoch_correct) / double(n);
    evaluate_clean(model, Xval, yval, &stats.val_loss, &stats.val_accuracy);
    result.history.push_back(stats);
  }
  return result;
}

void save_model(const HeadModel& model, const std::vector<std::string>& class_list,
                const std::filesystem::path& path) {
  if (int(class_list.size()) != model.num_classes()) {
    fail(Status::class_list_mismatch,
         "class list size does not match the model's output layer");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Status::io_error, "cannot write model file " + path.string());
  out.write("SKHM", 4);
  write_u32(out, 1);
  write_u32(out, uint32_t(model.num_classes()));
  write_u32(out, uint32_t(model.feature_dim()));
  write_u32(out, uint32_t(model.W1.rows()));
  write_u32(out, uint32_t(model.W2.rows()));
  write_u32(out, uint32_t(model.W3.rows()));
  for (const auto& cls : class_list) {
    write_u32(out, uint32_t(cls.size()));
    out.write(cls.data(), std::streamsize(cls.size()));
  }
  write_tensor(out, model.W1);
  write_tensor(out, model.b1);
  write_tensor(out, model.W2);
  write_tensor(out, model.b2);
  write_tensor(out, model.W3);
  write_tensor(out, model.b3);
  write_tensor(out, model.Wo);
  write_tensor(out, model.bo);
  if (!out) fail(Status::io_error, "failed writing model file " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Status::io_error, "cannot open model file " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SKHM", 4) != 0) {
    fail(Status::io_error, path.string() + " is not a model file");
  }
  const uint32_t version = read_u32(in, "version");
  if (version != 1) {
    fail(Status::io_error, "unsupported model version " + std::to_string(version));
  }
  const uint32_t K = read_u32(in, "class count");
  const uint32_t D = read_u32(in, "feature dim");
  const uint32_t H1 = read_u32(in, "layer 1 width");
  const uint32_t H2 = read_u32(in, "layer 2 width");
  const uint32_t H3 = read_u32(in, "layer 3 width");
  if (K < 1 || D < 1 || H1 < 1 || H2 < 1 || H3 < 1 || K > (1u << 20) ||
      D > (1u << 24) || H1 > (1u << 20) || H2 > (1u << 20) || H3 > (1u << 20)) {
    fail(Status::io_error, "implausible model dimensions in " + path.string());
  }
  LoadedModel lm;
  for (uint32_t i = 0; i < K; ++i) {
    const uint32_t len = read_u32(in, "class name length");
    if (len > (1u << 16)) fail(Status::io_error, "implausible class name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) {
      fail(Status::io_error, "model file truncated reading class names");
    }
    lm.class_list.push_back(std::move(name));
  }
  HeadModel& m = lm.model;
  m.W1.resize(H1, D);
  m.b1.resize(H1);
  m.W2.resize(H2, H1);
  m.b2.resize(H2);
  m.W3.resize(H3, H2);
  m.b3.resize(H3);
  m.Wo.resize(K, H3);
  m.bo.resize(K);
  read_tensor(in, m.W1);
  read_tensor(in, m.b1);
  read_tensor(in, m.W2);
  read_tensor(in, m.b2);
  read_tensor(in, m.W3);
  read_tensor(in, m.b3);
  read_tensor(in, m.Wo);
  read_tensor(in, m.bo);
  return lm;
}

void load_features(const DatasetManifest& manifest,
                   const std::filesystem::path& image_root, Split split,
                   int jobs, Eigen::MatrixXd* X, std::vector<int>* labels) {
  std::vector<const ManifestRecord*> records;
  for (const auto& rec : manifest.records) {
    if (rec.split == split) records.push_back(&rec);
  }
  X->resize(kFeatureDim, Eigen::Index(records.size()));
  labels->assign(records.size(), 0);
  parallel_for(records.size(), jobs, [&](size_t i) {
    const ManifestRecord& rec = *records[i];
    X->col(Eigen::Index(i)) = featurize(read_png_rgb(image_root / rec.image_path));
    for (size_t k = 0; k < manifest.class_list.size(); ++k) {
      if (manifest.class_list[k] == rec.class_label) {
        (*labels)[i] = int(k);
        break;
      }
    }
  });
}

ManifestTrainResult train_on_manifest(const DatasetManifest& manifest,
                                      const std::filesystem::path& image_root,
                                      HeadConfig cfg, int jobs) {
  manifest.validate();
  cfg.num_classes = int(manifest.class_list.size());
  Eigen::MatrixXd Xtrain, Xval;
  std::vector<int> ytrain, yval;
  load_features(manifest, image_root, Split::train, jobs, &Xtrain, &ytrain);
  load_features(manifest, image_root, Split::val, jobs, &Xval, &yval);
  if (Xtrain.cols() == 0) fail(Status::empty_input, "manifest has no train records");
  if (Xval.cols() == 0) fail(Status::empty_input, "manifest has no val records");
  TrainResult tr = train(Xtrain, ytrain, Xval, yval, cfg);
  return {std::move(tr.model), manifest.class_list, std::move(tr.history)};
}

SoftmaxFile predict_on_manifest(const HeadModel& model,
                                const std::vector<std::string>& class_list,
                                const DatasetManifest& manifest,
                                const std::filesystem::path& image_root,
                                Split split, int jobs) {
  if (class_list != manifest.class_list) {
    fail(Status::class_list_mismatch, "model and manifest class lists differ");
  }
  if (model.feature_dim() != kFeatureDim) {
    fail(Status::shape_error,
         "model feature dimension is not " + std::to_string(kFeatureDim));
  }
  std::vector<const ManifestRecord*> records;
  for (const auto& rec : manifest.records) {
    if (rec.split == split) records.push_back(&rec);
  }
  SoftmaxFile file;
  file.class_list = class_list;
  file.records.resize(records.size());
  parallel_for(records.size(), jobs, [&](size_t i) {
    const Eigen::VectorXd probs =
        forward(model, featurize(read_png_rgb(image_root / records[i]->image_path)));
    file.records[i].image_id = records[i]->image_path;
    file.records[i].probs.assign(probs.data(), probs.data() + probs.size());
  });
  return file;
}

}  // namespace seedkit
