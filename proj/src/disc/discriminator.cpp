#include "molga/disc/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "molga/fp/fingerprint.hpp"

namespace molga::disc {

namespace {

constexpr double kLossEps = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double p, int y) {
  const double q = std::clamp(p, kLossEps, 1.0 - kLossEps);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

void validate_config(const DiscriminatorConfig& c) {
  if (c.input_width <= 0) throw std::invalid_argument("discriminator input width must be positive");
  for (int h : c.hidden)
    if (h <= 0) throw std::invalid_argument("discriminator hidden widths must be positive");
  if (c.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (c.weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
  if (c.beta1 < 0.0 || c.beta1 >= 1.0 || c.beta2 < 0.0 || c.beta2 >= 1.0)
    throw std::invalid_argument("Adam decay rates must lie in [0,1)");
  if (c.eps <= 0.0) throw std::invalid_argument("Adam epsilon must be positive");
  if (c.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (c.epochs_per_generation < 1) throw std::invalid_argument("epoch count must be at least 1");
}

void write_hex(std::FILE* f, const std::vector<double>& values, const char* tag) {
  std::fprintf(f, "%s", tag);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::fprintf(f, i % 8 == 0 ? "\n%a" : " %a", values[i]);
  }
  std::fprintf(f, "\n");
}

}  // namespace

FeatureVector featurize(const chem::MoleculeGraph& mol, int width, int radius) {
  const fp::Fingerprint f = fp::morgan_fp(mol, radius, width);
  FeatureVector x;
  x.width = width;
  x.on_bits = f.on_bits();
  return x;
}

DiscriminatorModel DiscriminatorModel::create(const DiscriminatorConfig& config, util::Rng& rng) {
  validate_config(config);
  DiscriminatorModel model;
  model.config_ = config;
  std::vector<int> widths;
  widths.push_back(config.input_width);
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(1);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    Layer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    layer.w.resize(static_cast<std::size_t>(layer.in) * layer.out);
    layer.b.assign(layer.out, 0.0);
    const double scale = std::sqrt(6.0 / (layer.in + layer.out));
    for (double& w : layer.w) w = util::uniform_real(rng, -scale, scale);
    layer.mw.assign(layer.w.size(), 0.0);
    layer.vw.assign(layer.w.size(), 0.0);
    layer.mb.assign(layer.b.size(), 0.0);
    layer.vb.assign(layer.b.size(), 0.0);
    model.layers_.push_back(std::move(layer));
  }
  return model;
}

double DiscriminatorModel::forward_traced(const FeatureVector& x, ForwardTrace* trace) const {
  if (x.width != config_.input_width)
    throw std::invalid_argument("feature width does not match discriminator input width");
  if (trace != nullptr) trace->activations.assign(layers_.size(), {});
  std::vector<double> current;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    std::vector<double> next(layer.b);
    if (l == 0) {
      for (int bit : x.on_bits) {
        if (bit < 0 || bit >= layer.in)
          throw std::invalid_argument("feature bit index out of range");
        for (int o = 0; o < layer.out; ++o)
          next[o] += layer.w[static_cast<std::size_t>(o) * layer.in + bit];
      }
    } else {
      for (int o = 0; o < layer.out; ++o) {
        double z = next[o];
        const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) z += row[i] * current[i];
        next[o] = z;
      }
    }
    for (double& z : next) z = sigmoid(z);
    if (trace != nullptr) trace->activations[l] = next;
    current = std::move(next);
  }
  return current[0];
}

double DiscriminatorModel::forward(const FeatureVector& x) const {
  return forward_traced(x, nullptr);
}

double DiscriminatorModel::batch_loss(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("batch must not be empty");
  double sum = 0.0;
  for (const auto& [x, y] : batch) sum += bce(forward(x), y);
  return sum / static_cast<double>(batch.size());
}

void DiscriminatorModel::accumulate_gradients(const Batch& batch, std::vector<Layer>& grads) const {
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ForwardTrace trace;
  for (const auto& [x, y] : batch) {
    forward_traced(x, &trace);
    // Sigmoid + cross-entropy collapse to (p - y) at the output logit.
    std::vector<double> delta{(trace.activations.back()[0] - y) * inv_n};
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
      const Layer& layer = layers_[static_cast<std::size_t>(l)];
      Layer& grad = grads[static_cast<std::size_t>(l)];
      for (int o = 0; o < layer.out; ++o) grad.b[o] += delta[o];
      if (l == 0) {
        for (int bit : x.on_bits)
          for (int o = 0; o < layer.out; ++o)
            grad.w[static_cast<std::size_t>(o) * layer.in + bit] += delta[o];
      } else {
        const std::vector<double>& input = trace.activations[static_cast<std::size_t>(l) - 1];
        std::vector<double> prev(layer.in, 0.0);
        for (int o = 0; o < layer.out; ++o) {
          const std::size_t base = static_cast<std::size_t>(o) * layer.in;
          for (int i = 0; i < layer.in; ++i) {
            grad.w[base + i] += delta[o] * input[i];
            prev[i] += delta[o] * layer.w[base + i];
          }
        }
        for (int i = 0; i < layer.in; ++i) prev[i] *= input[i] * (1.0 - input[i]);
        delta = std::move(prev);
      }
    }
  }
}

std::vector<double> DiscriminatorModel::gradients(const Batch& batch) const {
  if (batch.empty()) throw std::invalid_argument("batch must not be empty");
  std::vector<Layer> grads;
  for (const Layer& layer : layers_) {
    Layer g;
    g.in = layer.in;
    g.out = layer.out;
    g.w.assign(layer.w.size(), 0.0);
    g.b.assign(layer.b.size(), 0.0);
    grads.push_back(std::move(g));
  }
  accumulate_gradients(batch, grads);
  std::vector<double> flat;
  for (const Layer& g : grads) {
    flat.insert(flat.end(), g.w.begin(), g.w.end());
    flat.insert(flat.end(), g.b.begin(), g.b.end());
  }
  return flat;
}

double DiscriminatorModel::train_step(const Batch& batch) {
  if (batch.empty()) throw std::invalid_argument("batch must not be empty");
  const double loss = batch_loss(batch);
  if (!std::isfinite(loss)) throw std::runtime_error("discriminator loss is not finite");

  std::vector<Layer> grads;
  for (const Layer& layer : layers_) {
    Layer g;
    g.in = layer.in;
    g.out = layer.out;
    g.w.assign(layer.w.size(), 0.0);
    g.b.assign(layer.b.size(), 0.0);
    grads.push_back(std::move(g));
  }
  accumulate_gradients(batch, grads);

  ++step_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  auto adam = [&](double& param, double& m, double& v, double g) {
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    param -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.eps);
  };
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Layer& layer = layers_[l];
    const Layer& g = grads[l];
    for (std::size_t i = 0; i < layer.w.size(); ++i)
      adam(layer.w[i], layer.mw[i], layer.vw[i], g.w[i] + config_.weight_decay * layer.w[i]);
    for (std::size_t i = 0; i < layer.b.size(); ++i)
      adam(layer.b[i], layer.mb[i], layer.vb[i], g.b[i]);
  }
  return loss;
}

double DiscriminatorModel::train_generation(const std::vector<FeatureVector>& reference,
                                            const std::vector<FeatureVector>& population,
                                            LabelConvention convention, util::Rng& rng) {
  if (reference.empty() || population.empty())
    throw std::invalid_argument("reference and population must both be non-empty");
  const int ref_label = convention == LabelConvention::original ? 1 : 0;
  Batch all;
  all.reserve(reference.size() + population.size());
  for (const FeatureVector& x : reference) all.emplace_back(x, ref_label);
  for (const FeatureVector& x : population) all.emplace_back(x, 1 - ref_label);

  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  double final_epoch_loss = 0.0;
  for (int epoch = 0; epoch < config_.epochs_per_generation; ++epoch) {
    util::shuffle(rng, order);
    double sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config_.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config_.batch_size);
      Batch batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(all[order[i]]);
      sum += train_step(batch);
      ++batches;
    }
    final_epoch_loss = sum / batches;
  }
  return final_epoch_loss;
}

std::vector<double> DiscriminatorModel::flat_parameters() const {
  std::vector<double> flat;
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

void DiscriminatorModel::set_flat_parameters(const std::vector<double>& params) {
  std::size_t expect = 0;
  for (const Layer& layer : layers_) expect += layer.w.size() + layer.b.size();
  if (params.size() != expect)
    throw std::invalid_argument("flat parameter vector has the wrong length");
  std::size_t pos = 0;
  for (Layer& layer : layers_) {
    std::copy_n(params.begin() + pos, layer.w.size(), layer.w.begin());
    pos += layer.w.size();
    std::copy_n(params.begin() + pos, layer.b.size(), layer.b.begin());
    pos += layer.b.size();
  }
}

void DiscriminatorModel::save(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (f == nullptr) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  std::fprintf(f, "discriminator-checkpoint v1\n");
  std::fprintf(f, "input_width %d\n", config_.input_width);
  std::fprintf(f, "hidden %zu", config_.hidden.size());
  for (int h : config_.hidden) std::fprintf(f, " %d", h);
  std::fprintf(f, "\n");
  std::fprintf(f, "learning_rate %a\n", config_.learning_rate);
  std::fprintf(f, "weight_decay %a\n", config_.weight_decay);
  std::fprintf(f, "beta1 %a\n", config_.beta1);
  std::fprintf(f, "beta2 %a\n", config_.beta2);
  std::fprintf(f, "eps %a\n", config_.eps);
  std::fprintf(f, "batch_size %d\n", config_.batch_size);
  std::fprintf(f, "epochs %d\n", config_.epochs_per_generation);
  std::fprintf(f, "step %lld\n", step_);
  std::fprintf(f, "layers %zu\n", layers_.size());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& layer = layers_[l];
    std::fprintf(f, "layer %zu %d %d\n", l, layer.in, layer.out);
    write_hex(f, layer.w, "w");
    write_hex(f, layer.b, "b");
    write_hex(f, layer.mw, "mw");
    write_hex(f, layer.vw, "vw");
    write_hex(f, layer.mb, "mb");
    write_hex(f, layer.vb, "vb");
  }
  if (std::fclose(f) != 0) throw std::runtime_error("cannot finish writing checkpoint: " + path);
}

DiscriminatorModel DiscriminatorModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "discriminator-checkpoint v1")
    throw std::runtime_error("unrecognized checkpoint header in " + path);

  auto expect_key = [&](const char* key) {
    std::string word;
    if (!(in >> word) || word != key)
      throw std::runtime_error(std::string("malformed checkpoint: expected '") + key + "'");
  };
  auto read_double = [&](const char* key) {
    expect_key(key);
    std::string token;
    if (!(in >> token)) throw std::runtime_error("malformed checkpoint: missing value");
    return std::strtod(token.c_str(), nullptr);
  };
  auto read_values = [&](const char* key, std::vector<double>& out, std::size_t count) {
    expect_key(key);
    out.resize(count);
    std::string token;
    for (std::size_t i = 0; i < count; ++i) {
      if (!(in >> token)) throw std::runtime_error("malformed checkpoint: truncated value block");
      out[i] = std::strtod(token.c_str(), nullptr);
    }
  };

  DiscriminatorModel model;
  expect_key("input_width");
  in >> model.config_.input_width;
  expect_key("hidden");
  std::size_t hidden_count = 0;
  in >> hidden_count;
  model.config_.hidden.resize(hidden_count);
  for (std::size_t i = 0; i < hidden_count; ++i) in >> model.config_.hidden[i];
  model.config_.learning_rate = read_double("learning_rate");
  model.config_.weight_decay = read_double("weight_decay");
  model.config_.beta1 = read_double("beta1");
  model.config_.beta2 = read_double("beta2");
  model.config_.eps = read_double("eps");
  expect_key("batch_size");
  in >> model.config_.batch_size;
  expect_key("epochs");
  in >> model.config_.epochs_per_generation;
  expect_key("step");
  in >> model.step_;
  expect_key("layers");
  std::size_t layer_count = 0;
  in >> layer_count;
  if (!in) throw std::runtime_error("malformed checkpoint: bad scalar section");
  for (std::size_t l = 0; l < layer_count; ++l) {
    expect_key("layer");
    std::size_t index = 0;
    Layer layer;
    in >> index >> layer.in >> layer.out;
    if (!in || index != l || layer.in <= 0 || layer.out <= 0)
      throw std::runtime_error("malformed checkpoint: bad layer header");
    const std::size_t nw = static_cast<std::size_t>(layer.in) * layer.out;
    const std::size_t nb = static_cast<std::size_t>(layer.out);
    read_values("w", layer.w, nw);
    read_values("b", layer.b, nb);
    read_values("mw", layer.mw, nw);
    read_values("vw", layer.vw, nw);
    read_values("mb", layer.mb, nb);
    read_values("vb", layer.vb, nb);
    model.layers_.push_back(std::move(layer));
  }
  validate_config(model.config_);
  return model;
}

bool DiscriminatorModel::operator==(const DiscriminatorModel& other) const {
  if (config_.input_width != other.config_.input_width ||
      config_.hidden != other.config_.hidden ||
      config_.learning_rate != other.config_.learning_rate ||
      config_.weight_decay != other.config_.weight_decay ||
      config_.beta1 != other.config_.beta1 || config_.beta2 != other.config_.beta2 ||
      config_.eps != other.config_.eps || config_.batch_size != other.config_.batch_size ||
      config_.epochs_per_generation != other.config_.epochs_per_generation ||
      step_ != other.step_ || layers_.size() != other.layers_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Layer& a = layers_[l];
    const Layer& b = other.layers_[l];
    if (a.in != b.in || a.out != b.out || a.w != b.w || a.b != b.b || a.mw != b.mw ||
        a.vw != b.vw || a.mb != b.mb || a.vb != b.vb) {
      return false;
    }
  }
  return true;
}

}  // namespace molga::disc
