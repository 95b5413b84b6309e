#include "rnntlid/kernel/lstm.hpp"

#include <cmath>

#include "rnntlid/kernel/activations.hpp"
#include "rnntlid/kernel/dropout.hpp"

namespace rnntlid {

LstmLayer::LstmLayer(const std::string& name, int input_dim, int hidden_dim, int aux_dim)
    : w_x_(name + ".w_x", 4 * hidden_dim, input_dim),
      w_h_(name + ".w_h", 4 * hidden_dim, hidden_dim),
      bias_(name + ".bias", 4 * hidden_dim, 1),
      has_aux_(aux_dim > 0) {
  require(input_dim > 0 && hidden_dim > 0, "LSTM dimensions must be positive");
  if (has_aux_) w_aux_ = Parameter(name + ".w_aux", 4 * hidden_dim, aux_dim);
}

void LstmLayer::init(Rng& rng) {
  w_x_.init_glorot(rng);
  if (has_aux_) w_aux_.init_glorot(rng);
  w_h_.init_glorot(rng);
  const Eigen::Index h = hidden_dim();
  bias_.value.setZero();
  bias_.value.block(h, 0, h, 1).setOnes();  // forget gate
}

ParameterList LstmLayer::parameters() {
  if (has_aux_) return {&w_x_, &w_aux_, &w_h_, &bias_};
  return {&w_x_, &w_h_, &bias_};
}

LstmState LstmLayer::initial_state() const {
  return {Vector::Zero(hidden_dim()), Vector::Zero(hidden_dim())};
}

Vector LstmLayer::step(LstmState& state, const Vector& x, const Vector* aux, StepCache* cache) const {
  require(x.size() == input_dim(), "LSTM input dimension mismatch");
  require((aux != nullptr) == has_aux_, "LSTM auxiliary input supplied inconsistently");
  const Eigen::Index h = hidden_dim();

  Vector pre = w_x_.value * x;
  if (has_aux_) {
    require(aux->size() == aux_dim(), "LSTM auxiliary input dimension mismatch");
    pre.noalias() += w_aux_.value * *aux;
  }
  pre.noalias() += w_h_.value * state.h;
  pre += bias_.value.col(0);

  Vector i = pre.segment(0, h).unaryExpr([](Real v) { return sigmoid(v); });
  Vector f = pre.segment(h, h).unaryExpr([](Real v) { return sigmoid(v); });
  Vector g = pre.segment(2 * h, h).array().tanh();
  Vector o = pre.segment(3 * h, h).unaryExpr([](Real v) { return sigmoid(v); });

  Vector c = f.cwiseProduct(state.c) + i.cwiseProduct(g);
  Vector tanh_c = c.array().tanh();
  Vector h_new = o.cwiseProduct(tanh_c);

  if (cache != nullptr) {
    cache->x = x;
    if (has_aux_) cache->aux = *aux;
    cache->h_prev = state.h;
    cache->c_prev = state.c;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tanh_c = tanh_c;
  }
  state.h = h_new;
  state.c = std::move(c);
  return h_new;
}

Vector LstmLayer::backward_step(const StepCache& cache, Vector& d_h, Vector& d_c) const {
  const Eigen::Index h = hidden_dim();
  const auto one = Vector::Ones(h).array();

  Vector d_o = d_h.cwiseProduct(cache.tanh_c);
  d_c.array() += d_h.array() * cache.o.array() * (one - cache.tanh_c.array().square());

  Vector d_pre(4 * h);
  d_pre.segment(0, h) = (d_c.array() * cache.g.array() * cache.i.array() * (one - cache.i.array())).matrix();
  d_pre.segment(h, h) = (d_c.array() * cache.c_prev.array() * cache.f.array() * (one - cache.f.array())).matrix();
  d_pre.segment(2 * h, h) = (d_c.array() * cache.i.array() * (one - cache.g.array().square())).matrix();
  d_pre.segment(3 * h, h) = (d_o.array() * cache.o.array() * (one - cache.o.array())).matrix();

  d_c = d_c.cwiseProduct(cache.f);
  d_h.noalias() = w_h_.value.transpose() * d_pre;
  return d_pre;
}

void LstmLayer::accumulate_grads(const Matrix& d_pre, const Matrix& xs, const Matrix* aux,
                                 const Matrix& h_prev) {
  w_x_.grad.noalias() += d_pre.transpose() * xs;
  if (has_aux_) w_aux_.grad.noalias() += d_pre.transpose() * *aux;
  w_h_.grad.noalias() += d_pre.transpose() * h_prev;
  bias_.grad.col(0) += d_pre.colwise().sum().transpose();
}

LstmStack::LstmStack(const std::string& name, int input_dim, int hidden_dim, int layers, int aux_dim) {
  require(layers >= 1, "LSTM stack needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    layers_.emplace_back(name + ".lstm" + std::to_string(l), l == 0 ? input_dim : hidden_dim, hidden_dim,
                         l == 0 ? aux_dim : 0);
  }
}

void LstmStack::init(Rng& rng) {
  for (auto& layer : layers_) layer.init(rng);
}

ParameterList LstmStack::parameters() {
  ParameterList out;
  for (auto& layer : layers_) {
    auto p = layer.parameters();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

LstmStack::State LstmStack::initial_state() const {
  State state;
  for (const auto& layer : layers_) state.push_back(layer.initial_state());
  return state;
}

Vector LstmStack::step(State& state, const Vector& x, const Vector* aux) const {
  Vector h = layers_[0].step(state[0], x, aux);
  for (std::size_t l = 1; l < layers_.size(); ++l) h = layers_[l].step(state[l], h);
  return h;
}

Matrix LstmStack::forward(const Matrix& xs, const Matrix* aux, SequenceCache* cache, double dropout_rate,
                          Rng* dropout_rng) const {
  const Eigen::Index steps = xs.rows();
  const bool dropout = dropout_rng != nullptr && dropout_rate > 0.0;
  if (cache != nullptr) {
    cache->steps.assign(layers_.size(), {});
    cache->masks.clear();
  }

  Matrix input = xs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    LstmState state = layer.initial_state();
    Matrix out(steps, layer.hidden_dim());
    if (cache != nullptr) cache->steps[l].resize(static_cast<std::size_t>(steps));
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Vector x = input.row(t).transpose();
      Vector a;
      if (l == 0 && aux != nullptr) a = aux->row(t).transpose();
      auto* step_cache = cache != nullptr ? &cache->steps[l][static_cast<std::size_t>(t)] : nullptr;
      out.row(t) = layer.step(state, x, (l == 0 && aux != nullptr) ? &a : nullptr, step_cache).transpose();
    }
    if (dropout) {
      Matrix mask = dropout_mask(steps, layer.hidden_dim(), dropout_rate, *dropout_rng);
      out.array() *= mask.array();
      if (cache != nullptr) cache->masks.push_back(std::move(mask));
    }
    input = std::move(out);
  }
  return input;
}

Matrix LstmStack::backward(const SequenceCache& cache, const Matrix& d_out, Matrix* d_aux) {
  const Eigen::Index steps = d_out.rows();
  Matrix d_layer_out = d_out;
  Matrix d_input;
  for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
    auto& layer = layers_[static_cast<std::size_t>(l)];
    const auto& steps_cache = cache.steps[static_cast<std::size_t>(l)];
    if (!cache.masks.empty()) d_layer_out.array() *= cache.masks[static_cast<std::size_t>(l)].array();

    const Eigen::Index h = layer.hidden_dim();
    Matrix d_pre(steps, 4 * h);
    Vector d_h = Vector::Zero(h);
    Vector d_c = Vector::Zero(h);
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      d_h += d_layer_out.row(t).transpose();
      d_pre.row(t) = layer.backward_step(steps_cache[static_cast<std::size_t>(t)], d_h, d_c).transpose();
    }

    Matrix xs(steps, layer.input_dim());
    Matrix h_prev(steps, h);
    Matrix aux;
    if (layer.aux_dim() > 0) aux.resize(steps, layer.aux_dim());
    for (Eigen::Index t = 0; t < steps; ++t) {
      const auto& sc = steps_cache[static_cast<std::size_t>(t)];
      xs.row(t) = sc.x.transpose();
      h_prev.row(t) = sc.h_prev.transpose();
      if (layer.aux_dim() > 0) aux.row(t) = sc.aux.transpose();
    }
    layer.accumulate_grads(d_pre, xs, layer.aux_dim() > 0 ? &aux : nullptr, h_prev);

    if (l == 0 && d_aux != nullptr && layer.aux_dim() > 0) *d_aux = d_pre * layer.w_aux().value;
    d_input = d_pre * layer.w_x().value;
    d_layer_out = d_input;
  }
  return d_input;
}

}  // namespace rnntlid
