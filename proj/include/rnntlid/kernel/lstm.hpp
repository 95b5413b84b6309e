#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rnntlid/kernel/param.hpp"

namespace rnntlid {

struct LstmState {
  Vector h;
  Vector c;
};

// Unidirectional LSTM layer, gate order (input, forget, candidate, output).
// Pre-activations are (W_x x + W_aux aux) + W_h h + b. The optional auxiliary
// input block lets callers concatenate a side signal to x while keeping its
// weights separable; with W_aux == 0 the result is bit-identical to a layer
// without the block.
class LstmLayer {
 public:
  struct StepCache {
    Vector x, aux, h_prev, c_prev;
    Vector i, f, g, o, c, tanh_c;
  };

  LstmLayer() = default;
  LstmLayer(const std::string& name, int input_dim, int hidden_dim, int aux_dim = 0);

  int input_dim() const { return static_cast<int>(w_x_.value.cols()); }
  int aux_dim() const { return has_aux_ ? static_cast<int>(w_aux_.value.cols()) : 0; }
  int hidden_dim() const { return static_cast<int>(w_h_.value.cols()); }

  LstmState initial_state() const;

  // Advances `state` by one frame and returns the new hidden vector.
  Vector step(LstmState& state, const Vector& x, const Vector* aux = nullptr,
              StepCache* cache = nullptr) const;

  // Backward through one cached step. `d_h`/`d_c` carry the gradient with
  // respect to this step's outputs and are replaced by the gradient with
  // respect to the previous state. Returns dL/d(pre-activations), 4H long.
  Vector backward_step(const StepCache& cache, Vector& d_h, Vector& d_c) const;

  // Accumulates weight gradients from stacked pre-activation gradients
  // (T x 4H) and the matching step inputs.
  void accumulate_grads(const Matrix& d_pre, const Matrix& xs, const Matrix* aux,
                        const Matrix& h_prev);

  void init(Rng& rng);
  ParameterList parameters();
  Parameter& w_x() { return w_x_; }
  Parameter& w_aux() { return w_aux_; }
  Parameter& w_h() { return w_h_; }
  Parameter& bias() { return bias_; }

 private:
  Parameter w_x_;
  Parameter w_aux_;
  Parameter w_h_;
  Parameter bias_;
  bool has_aux_ = false;
};

// A stack of LSTM layers with inverted dropout on every layer's output in
// training mode. Only the first layer may carry an auxiliary input block.
class LstmStack {
 public:
  using State = std::vector<LstmState>;

  struct SequenceCache {
    std::vector<std::vector<LstmLayer::StepCache>> steps;  // [layer][t]
    std::vector<Matrix> masks;                            // [layer], T x H
  };

  LstmStack() = default;
  LstmStack(const std::string& name, int input_dim, int hidden_dim, int layers, int aux_dim = 0);

  int layers() const { return static_cast<int>(layers_.size()); }
  int input_dim() const { return layers_.front().input_dim(); }
  int hidden_dim() const { return layers_.back().hidden_dim(); }
  int aux_dim() const { return layers_.front().aux_dim(); }

  State initial_state() const;
  Vector step(State& state, const Vector& x, const Vector* aux = nullptr) const;

  // Runs a whole sequence from the initial state. When `cache` is given the
  // intermediates for backward() are recorded; `dropout_rng` enables
  // dropout with `dropout_rate`.
  Matrix forward(const Matrix& xs, const Matrix* aux, SequenceCache* cache,
                 double dropout_rate = 0.0, Rng* dropout_rng = nullptr) const;

  // BPTT. Returns dL/dxs; writes dL/daux when requested.
  Matrix backward(const SequenceCache& cache, const Matrix& d_out, Matrix* d_aux);

  void init(Rng& rng);
  ParameterList parameters();
  LstmLayer& layer(int i) { return layers_.at(static_cast<std::size_t>(i)); }
  const LstmLayer& layer(int i) const { return layers_.at(static_cast<std::size_t>(i)); }

 private:
  std::vector<LstmLayer> layers_;
};

}  // namespace rnntlid
