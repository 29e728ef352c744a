#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reviewnet/tensor.hpp"

namespace reviewnet {

/// Thrown when a backward pass is asked to run without the forward caches it needs.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <typename Scalar>
struct GateParams {
  BasicTensor<Scalar> weights;  // (cell, cell + input), acts on [h_{t-1}; x_t]
  BasicTensor<Scalar> bias;     // (cell, 1)
};

/// Weights and biases of one LSTM direction. Each gate owns a single fused
/// matrix applied to the stacked vector [h_{t-1}; x_t].
template <typename Scalar>
struct LstmParams {
  GateParams<Scalar> forget;
  GateParams<Scalar> input;
  GateParams<Scalar> candidate;
  GateParams<Scalar> output;

  Eigen::Index cell_size() const { return forget.weights.rows(); }
  Eigen::Index input_size() const { return forget.weights.cols() - forget.weights.rows(); }

  static LstmParams zeros(Eigen::Index cell_size, Eigen::Index input_size) {
    if (cell_size < 1 || input_size < 1)
      throw std::invalid_argument("LstmParams: cell_size and input_size must be >= 1");
    LstmParams p;
    for (GateParams<Scalar>* g : p.gates()) {
      g->weights = BasicTensor<Scalar>::Zero(cell_size, cell_size + input_size);
      g->bias = BasicTensor<Scalar>::Zero(cell_size, 1);
    }
    return p;
  }

  /// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
  static LstmParams random(Eigen::Index cell_size, Eigen::Index input_size, SeededRng& rng) {
    LstmParams p = zeros(cell_size, input_size);
    const Scalar limit = Scalar(1) / std::sqrt(static_cast<Scalar>(cell_size + input_size));
    for (GateParams<Scalar>* g : p.gates())
      g->weights = init_uniform<Scalar>(cell_size, cell_size + input_size, rng, limit);
    return p;
  }

  std::vector<GateParams<Scalar>*> gates() { return {&forget, &input, &candidate, &output}; }
  std::vector<const GateParams<Scalar>*> gates() const {
    return {&forget, &input, &candidate, &output};
  }

  void validate() const {
    const auto rows = forget.weights.rows();
    const auto cols = forget.weights.cols();
    if (rows < 1 || cols <= rows) throw DimensionError("LstmParams: degenerate weight shape");
    for (const auto* g : gates()) {
      if (g->weights.rows() != rows || g->weights.cols() != cols)
        throw DimensionError("LstmParams: gate weights differ in shape");
      if (g->bias.rows() != rows || g->bias.cols() != 1)
        throw DimensionError("LstmParams: gate bias must be " + shape_string(rows, 1));
    }
  }
};

template <typename Scalar>
struct LstmState {
  BasicTensor<Scalar> cell;    // C
  BasicTensor<Scalar> hidden;  // h

  static LstmState zeros(Eigen::Index cell_size, Eigen::Index batch = 1) {
    return {BasicTensor<Scalar>::Zero(cell_size, batch), BasicTensor<Scalar>::Zero(cell_size, batch)};
  }
};

template <typename Scalar>
struct GateActivations {
  BasicTensor<Scalar> forget;
  BasicTensor<Scalar> input;
  BasicTensor<Scalar> output;
  BasicTensor<Scalar> candidate;
};

/// Everything one time step must remember for backpropagation through time.
template <typename Scalar>
struct StepCache {
  BasicTensor<Scalar> stacked;    // [h_{t-1}; x_t]
  BasicTensor<Scalar> prev_cell;  // C_{t-1}
  BasicTensor<Scalar> cell;       // C_t
  GateActivations<Scalar> gates;
};

template <typename Scalar>
struct SequenceResult {
  LstmState<Scalar> final_state;
  std::vector<StepCache<Scalar>> steps;
};

namespace detail {

template <typename Scalar>
BasicTensor<Scalar> gate_preactivation(const GateParams<Scalar>& g,
                                       const BasicTensor<Scalar>& stacked) {
  BasicTensor<Scalar> z = g.weights * stacked;
  z.colwise() += g.bias.col(0);
  return z;
}

template <typename Scalar>
StepCache<Scalar> cell_step(const LstmParams<Scalar>& p, const LstmState<Scalar>& prev,
                            const BasicTensor<Scalar>& x) {
  const auto cell = p.cell_size();
  if (x.rows() != p.input_size())
    throw DimensionError("lstm_cell_forward: input " + shape_string(x.rows(), x.cols()) +
                         " does not match input_size " + std::to_string(p.input_size()));
  if (prev.hidden.rows() != cell || prev.cell.rows() != cell ||
      prev.hidden.cols() != x.cols() || prev.cell.cols() != x.cols())
    throw DimensionError("lstm_cell_forward: state " +
                         shape_string(prev.hidden.rows(), prev.hidden.cols()) +
                         " inconsistent with cell_size " + std::to_string(cell) + " and input " +
                         shape_string(x.rows(), x.cols()));

  StepCache<Scalar> s;
  s.stacked = concat_rows(prev.hidden, x);
  s.prev_cell = prev.cell;
  s.gates.forget = sigmoid(gate_preactivation(p.forget, s.stacked));
  s.gates.input = sigmoid(gate_preactivation(p.input, s.stacked));
  s.gates.candidate = tanh_act(gate_preactivation(p.candidate, s.stacked));
  s.cell = s.gates.forget.cwiseProduct(prev.cell) + s.gates.input.cwiseProduct(s.gates.candidate);
  s.gates.output = sigmoid(gate_preactivation(p.output, s.stacked));
  return s;
}

template <typename Scalar>
BasicTensor<Scalar> hidden_from(const StepCache<Scalar>& s) {
  return s.gates.output.cwiseProduct(tanh_act(s.cell));
}

}  // namespace detail

/// One LSTM step:
///   f = sigma(W_f [h;x] + b_f)   i = sigma(W_i [h;x] + b_i)
///   C~ = tanh(W_C [h;x] + b_C)   C = f*C_prev + i*C~
///   o = sigma(W_o [h;x] + b_o)   h = o*tanh(C)
template <typename Scalar>
std::pair<LstmState<Scalar>, GateActivations<Scalar>> lstm_cell_forward(
    const LstmParams<Scalar>& params, const LstmState<Scalar>& prev, const BasicTensor<Scalar>& x) {
  params.validate();
  auto s = detail::cell_step(params, prev, x);
  LstmState<Scalar> next{s.cell, detail::hidden_from(s)};
  return {std::move(next), std::move(s.gates)};
}

/// Left fold of the cell over xs from the zero state, retaining caches.
template <typename Scalar>
SequenceResult<Scalar> lstm_sequence_forward(const LstmParams<Scalar>& params,
                                             std::span<const BasicTensor<Scalar>> xs) {
  if (xs.empty()) throw std::invalid_argument("lstm_sequence_forward: empty sequence");
  params.validate();
  SequenceResult<Scalar> result;
  result.final_state = LstmState<Scalar>::zeros(params.cell_size(), xs.front().cols());
  result.steps.reserve(xs.size());
  for (const auto& x : xs) {
    if (x.rows() != xs.front().rows() || x.cols() != xs.front().cols())
      throw DimensionError("lstm_sequence_forward: non-uniform input shapes");
    auto s = detail::cell_step(params, result.final_state, x);
    result.final_state = {s.cell, detail::hidden_from(s)};
    result.steps.push_back(std::move(s));
  }
  return result;
}

template <typename Scalar>
struct BiLstmLayer {
  LstmParams<Scalar> forward;
  LstmParams<Scalar> backward;

  Eigen::Index cell_size() const { return forward.cell_size(); }
  Eigen::Index input_size() const { return forward.input_size(); }

  void validate() const {
    forward.validate();
    backward.validate();
    if (forward.cell_size() != backward.cell_size() ||
        forward.input_size() != backward.input_size())
      throw DimensionError("BiLstmLayer: directions disagree on cell/input size");
  }
};

template <typename Scalar>
struct BiLstmPass {
  SequenceResult<Scalar> forward;
  SequenceResult<Scalar> backward;  // computed over the reversed sequence
  BasicTensor<Scalar> output;       // [h_fwd_final; h_bwd_final]
};

template <typename Scalar>
BiLstmPass<Scalar> bilstm_forward_pass(const BiLstmLayer<Scalar>& layer,
                                       std::span<const BasicTensor<Scalar>> xs) {
  if (xs.empty()) throw std::invalid_argument("bilstm_forward: empty sequence");
  layer.validate();
  std::vector<BasicTensor<Scalar>> reversed(xs.rbegin(), xs.rend());
  BiLstmPass<Scalar> pass;
  pass.forward = lstm_sequence_forward(layer.forward, xs);
  pass.backward =
      lstm_sequence_forward(layer.backward, std::span<const BasicTensor<Scalar>>(reversed));
  pass.output = concat_rows(pass.forward.final_state.hidden, pass.backward.final_state.hidden);
  return pass;
}

template <typename Scalar>
BasicTensor<Scalar> bilstm_forward(const BiLstmLayer<Scalar>& layer,
                                   std::span<const BasicTensor<Scalar>> xs) {
  return bilstm_forward_pass(layer, xs).output;
}

template <typename Scalar>
struct DenseParams {
  BasicTensor<Scalar> weights;  // (classes, features)
  BasicTensor<Scalar> bias;     // (classes, 1)

  Eigen::Index classes() const { return weights.rows(); }
  Eigen::Index features() const { return weights.cols(); }

  static DenseParams zeros(Eigen::Index classes, Eigen::Index features) {
    return {BasicTensor<Scalar>::Zero(classes, features), BasicTensor<Scalar>::Zero(classes, 1)};
  }

  static DenseParams random(Eigen::Index classes, Eigen::Index features, SeededRng& rng) {
    const Scalar limit = Scalar(1) / std::sqrt(static_cast<Scalar>(features));
    return {init_uniform<Scalar>(classes, features, rng, limit),
            BasicTensor<Scalar>::Zero(classes, 1)};
  }
};

template <typename Scalar>
BasicTensor<Scalar> dense_logits(const DenseParams<Scalar>& params, const BasicTensor<Scalar>& h) {
  if (h.rows() != params.features())
    throw DimensionError("dense: features " + shape_string(h.rows(), h.cols()) +
                         " do not match weights " +
                         shape_string(params.weights.rows(), params.weights.cols()));
  if (params.bias.rows() != params.classes() || params.bias.cols() != 1)
    throw DimensionError("dense: bias must be " + shape_string(params.classes(), 1));
  BasicTensor<Scalar> z = params.weights * h;
  z.colwise() += params.bias.col(0);
  return z;
}

/// softmax(W h + b), one distribution per column of h.
template <typename Scalar>
BasicTensor<Scalar> dense_softmax_forward(const DenseParams<Scalar>& params,
                                          const BasicTensor<Scalar>& h) {
  return softmax_cols(dense_logits(params, h));
}

template <typename Scalar>
struct LossResult {
  Scalar loss = 0;
  BasicTensor<Scalar> logit_grad;  // dL/dlogits, same shape as probs
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Mean cross-entropy over the columns of probs; the gradient with respect to
/// the logits that produced probs is (probs - onehot) / batch.
template <typename Scalar>
LossResult<Scalar> cross_entropy(const BasicTensor<Scalar>& probs, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != probs.cols())
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(probs.cols()) + " columns");
  LossResult<Scalar> r;
  r.logit_grad = probs;
  const Scalar batch = static_cast<Scalar>(probs.cols());
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    const int t = targets[c];
    if (t < 0 || t >= probs.rows())
      throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " outside [0, " +
                              std::to_string(probs.rows()) + ")");
    r.loss -= std::log(std::max(probs(t, c), static_cast<Scalar>(kProbabilityFloor)));
    r.logit_grad(t, c) -= Scalar(1);
  }
  r.loss /= batch;
  r.logit_grad /= batch;
  return r;
}

template <typename Scalar>
LossResult<Scalar> cross_entropy(const BasicTensor<Scalar>& probs, int target) {
  return cross_entropy(probs, std::span<const int>(&target, 1));
}

/// Inverted-dropout keep mask: entries are 0 or 1/(1-rate).
template <typename Scalar>
BasicTensor<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                                 SeededRng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  BasicTensor<Scalar> mask(rows, cols);
  const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      mask(r, c) = rng.bernoulli(rate) ? Scalar(0) : keep_scale;
  return mask;
}

template <typename Scalar>
BasicTensor<Scalar> dropout(const BasicTensor<Scalar>& x, double rate, SeededRng& rng,
                            bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  return x.cwiseProduct(dropout_mask<Scalar>(x.rows(), x.cols(), rate, rng));
}

/// BiLSTM encoder -> dropout -> dense -> softmax, reading out the two final
/// hidden states once per sequence.
template <typename Scalar>
struct BiLstmClassifier {
  BiLstmLayer<Scalar> encoder;
  DenseParams<Scalar> head;

  Eigen::Index cell_size() const { return encoder.cell_size(); }
  Eigen::Index input_size() const { return encoder.input_size(); }
  Eigen::Index classes() const { return head.classes(); }

  static BiLstmClassifier random(Eigen::Index input_size, Eigen::Index cell_size,
                                 Eigen::Index classes, SeededRng& rng) {
    BiLstmClassifier m;
    m.encoder.forward = LstmParams<Scalar>::random(cell_size, input_size, rng);
    m.encoder.backward = LstmParams<Scalar>::random(cell_size, input_size, rng);
    m.head = DenseParams<Scalar>::random(classes, 2 * cell_size, rng);
    return m;
  }

  static BiLstmClassifier zeros(Eigen::Index input_size, Eigen::Index cell_size,
                                Eigen::Index classes) {
    BiLstmClassifier m;
    m.encoder.forward = LstmParams<Scalar>::zeros(cell_size, input_size);
    m.encoder.backward = LstmParams<Scalar>::zeros(cell_size, input_size);
    m.head = DenseParams<Scalar>::zeros(classes, 2 * cell_size);
    return m;
  }
};

/// Visits every parameter block in a fixed order with a stable dotted name.
template <typename Model, typename Fn>
void for_each_block(Model& model, Fn&& fn) {
  auto visit_lstm = [&](const std::string& prefix, auto& lstm) {
    const char* names[] = {"forget", "input", "candidate", "output"};
    auto gates = lstm.gates();
    for (std::size_t g = 0; g < gates.size(); ++g) {
      fn(prefix + names[g] + ".weights", gates[g]->weights);
      fn(prefix + names[g] + ".bias", gates[g]->bias);
    }
  };
  visit_lstm("encoder.forward.", model.encoder.forward);
  visit_lstm("encoder.backward.", model.encoder.backward);
  fn(std::string("head.weights"), model.head.weights);
  fn(std::string("head.bias"), model.head.bias);
}

template <typename Scalar>
struct ForwardPass {
  BiLstmPass<Scalar> encoder;
  BasicTensor<Scalar> mask;      // empty when dropout was inactive
  BasicTensor<Scalar> features;  // encoder output after dropout
  BasicTensor<Scalar> probs;
  std::size_t steps = 0;
};

template <typename Scalar>
ForwardPass<Scalar> classifier_forward(const BiLstmClassifier<Scalar>& model,
                                       std::span<const BasicTensor<Scalar>> xs,
                                       double dropout_rate = 0.0, SeededRng* rng = nullptr,
                                       bool training = false) {
  ForwardPass<Scalar> pass;
  pass.encoder = bilstm_forward_pass(model.encoder, xs);
  pass.steps = xs.size();
  if (training && dropout_rate > 0.0) {
    if (rng == nullptr) throw std::invalid_argument("classifier_forward: dropout needs an rng");
    pass.mask = dropout_mask<Scalar>(pass.encoder.output.rows(), pass.encoder.output.cols(),
                                     dropout_rate, *rng);
    pass.features = pass.encoder.output.cwiseProduct(pass.mask);
  } else {
    pass.features = pass.encoder.output;
  }
  pass.probs = dense_softmax_forward(model.head, pass.features);
  return pass;
}

/// Gradients mirror the model's layout; `inputs` holds dL/dx_t per step, the
/// hook through which embedding rows receive their updates.
template <typename Scalar>
struct ModelGradients {
  BiLstmClassifier<Scalar> params;
  std::vector<BasicTensor<Scalar>> inputs;
};

template <typename Scalar>
void dense_backward(const DenseParams<Scalar>& head, const BasicTensor<Scalar>& features,
                    const BasicTensor<Scalar>& logit_grad, DenseParams<Scalar>& grads,
                    BasicTensor<Scalar>* feature_grad) {
  grads.weights.noalias() += logit_grad * features.transpose();
  grads.bias += logit_grad.rowwise().sum();
  if (feature_grad) *feature_grad = head.weights.transpose() * logit_grad;
}

/// Backpropagation through time for one direction. `hidden_grad` is dL/dh at
/// the last step; parameter gradients accumulate into `grads`. Returns dL/dx_t
/// in the order the direction consumed its inputs.
template <typename Scalar>
std::vector<BasicTensor<Scalar>> lstm_sequence_backward(const LstmParams<Scalar>& params,
                                                        const SequenceResult<Scalar>& seq,
                                                        const BasicTensor<Scalar>& hidden_grad,
                                                        LstmParams<Scalar>& grads) {
  if (seq.steps.empty()) throw ContractViolation("lstm backward: no forward caches");
  const auto cell = params.cell_size();
  BasicTensor<Scalar> dh = hidden_grad;
  BasicTensor<Scalar> dc = BasicTensor<Scalar>::Zero(cell, hidden_grad.cols());
  std::vector<BasicTensor<Scalar>> input_grads(seq.steps.size());

  for (std::size_t t = seq.steps.size(); t-- > 0;) {
    const auto& s = seq.steps[t];
    if (s.stacked.rows() != params.forget.weights.cols() || s.cell.cols() != dh.cols())
      throw ContractViolation("lstm backward: cache at step " + std::to_string(t) +
                              " is inconsistent with the parameters");
    const auto& g = s.gates;
    const BasicTensor<Scalar> tanh_c = tanh_act(s.cell);

    const BasicTensor<Scalar> d_output = dh.cwiseProduct(tanh_c);
    dc.array() += dh.array() * g.output.array() * (Scalar(1) - tanh_c.array().square());

    const BasicTensor<Scalar> d_forget = dc.cwiseProduct(s.prev_cell);
    const BasicTensor<Scalar> d_input = dc.cwiseProduct(g.candidate);
    const BasicTensor<Scalar> d_candidate = dc.cwiseProduct(g.input);

    const BasicTensor<Scalar> a_forget =
        (d_forget.array() * g.forget.array() * (Scalar(1) - g.forget.array())).matrix();
    const BasicTensor<Scalar> a_input =
        (d_input.array() * g.input.array() * (Scalar(1) - g.input.array())).matrix();
    const BasicTensor<Scalar> a_candidate =
        (d_candidate.array() * (Scalar(1) - g.candidate.array().square())).matrix();
    const BasicTensor<Scalar> a_output =
        (d_output.array() * g.output.array() * (Scalar(1) - g.output.array())).matrix();

    const std::pair<const BasicTensor<Scalar>*, GateParams<Scalar>*> routes[] = {
        {&a_forget, &grads.forget},
        {&a_input, &grads.input},
        {&a_candidate, &grads.candidate},
        {&a_output, &grads.output}};
    for (const auto& [pre, gate_grad] : routes) {
      gate_grad->weights.noalias() += *pre * s.stacked.transpose();
      gate_grad->bias += pre->rowwise().sum();
    }

    BasicTensor<Scalar> d_stacked = params.forget.weights.transpose() * a_forget;
    d_stacked.noalias() += params.input.weights.transpose() * a_input;
    d_stacked.noalias() += params.candidate.weights.transpose() * a_candidate;
    d_stacked.noalias() += params.output.weights.transpose() * a_output;

    dh = d_stacked.topRows(cell);
    input_grads[t] = d_stacked.bottomRows(d_stacked.rows() - cell);
    dc = dc.cwiseProduct(g.forget);
  }
  return input_grads;
}

/// Exact analytic gradients of the loss for every parameter block given the
/// cached forward pass and dL/dlogits.
template <typename Scalar>
ModelGradients<Scalar> backward(const BiLstmClassifier<Scalar>& model,
                                const ForwardPass<Scalar>& pass,
                                const BasicTensor<Scalar>& logit_grad) {
  const std::size_t steps = pass.steps;
  if (steps == 0 || pass.encoder.forward.steps.size() != steps ||
      pass.encoder.backward.steps.size() != steps)
    throw ContractViolation("backward: forward caches missing for one or more steps");
  if (logit_grad.rows() != model.classes() || logit_grad.cols() != pass.probs.cols())
    throw DimensionError("backward: logit gradient " +
                         shape_string(logit_grad.rows(), logit_grad.cols()) +
                         " does not match probabilities " +
                         shape_string(pass.probs.rows(), pass.probs.cols()));

  const auto cell = model.cell_size();
  ModelGradients<Scalar> grads;
  grads.params = BiLstmClassifier<Scalar>::zeros(model.input_size(), cell, model.classes());

  BasicTensor<Scalar> feature_grad;
  dense_backward(model.head, pass.features, logit_grad, grads.params.head, &feature_grad);
  if (pass.mask.size() > 0) feature_grad = feature_grad.cwiseProduct(pass.mask);

  auto fwd_inputs = lstm_sequence_backward(model.encoder.forward, pass.encoder.forward,
                                           BasicTensor<Scalar>(feature_grad.topRows(cell)),
                                           grads.params.encoder.forward);
  auto bwd_inputs = lstm_sequence_backward(model.encoder.backward, pass.encoder.backward,
                                           BasicTensor<Scalar>(feature_grad.bottomRows(cell)),
                                           grads.params.encoder.backward);
  grads.inputs = std::move(fwd_inputs);
  for (std::size_t t = 0; t < steps; ++t) grads.inputs[t] += bwd_inputs[steps - 1 - t];
  return grads;
}

/// Scales all gradients so their joint L2 norm is at most max_norm. Returns the
/// norm before clipping.
template <typename Scalar>
Scalar clip_global_norm(std::span<BasicTensor<Scalar>* const> grads, Scalar max_norm) {
  Scalar sq = 0;
  for (const auto* g : grads) sq += g->squaredNorm();
  const Scalar norm = std::sqrt(sq);
  if (norm > max_norm && norm > Scalar(0)) {
    const Scalar factor = max_norm / norm;
    for (auto* g : grads) *g *= factor;
  }
  return norm;
}

template <typename Scalar>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<BasicTensor<Scalar>> first;
  std::vector<BasicTensor<Scalar>> second;
};

/// One bias-corrected Adam update over parallel lists of parameter and
/// gradient blocks. Moments are created lazily on the first call.
template <typename Scalar>
void adam_step(std::span<BasicTensor<Scalar>* const> params,
               std::span<const BasicTensor<Scalar>* const> grads, AdamState<Scalar>& state,
               double learning_rate) {
  if (params.size() != grads.size())
    throw DimensionError("adam_step: " + std::to_string(params.size()) + " parameter blocks vs " +
                         std::to_string(grads.size()) + " gradient blocks");
  if (state.first.empty()) {
    for (const auto* p : params) {
      state.first.push_back(BasicTensor<Scalar>::Zero(p->rows(), p->cols()));
      state.second.push_back(BasicTensor<Scalar>::Zero(p->rows(), p->cols()));
    }
  }
  if (state.first.size() != params.size())
    throw DimensionError("adam_step: optimizer state tracks a different number of blocks");
  for (std::size_t k = 0; k < params.size(); ++k) {
    require_same_shape(*params[k], *grads[k], "adam_step");
    require_same_shape(*params[k], state.first[k], "adam_step");
  }

  ++state.step;
  const Scalar b1 = static_cast<Scalar>(state.beta1);
  const Scalar b2 = static_cast<Scalar>(state.beta2);
  const Scalar correction1 = Scalar(1) - std::pow(b1, static_cast<Scalar>(state.step));
  const Scalar correction2 = Scalar(1) - std::pow(b2, static_cast<Scalar>(state.step));
  const Scalar lr = static_cast<Scalar>(learning_rate);
  const Scalar eps = static_cast<Scalar>(state.epsilon);

  for (std::size_t k = 0; k < params.size(); ++k) {
    auto m = state.first[k].array();
    auto v = state.second[k].array();
    const auto g = grads[k]->array();
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.square();
    params[k]->array() -= lr * (m / correction1) / ((v / correction2).sqrt() + eps);
  }
}

template <typename Scalar>
void adam_step(BiLstmClassifier<Scalar>& model, const ModelGradients<Scalar>& grads,
               AdamState<Scalar>& state, double learning_rate) {
  std::vector<BasicTensor<Scalar>*> p;
  std::vector<const BasicTensor<Scalar>*> g;
  for_each_block(model, [&](const std::string&, BasicTensor<Scalar>& t) { p.push_back(&t); });
  for_each_block(grads.params,
                 [&](const std::string&, const BasicTensor<Scalar>& t) { g.push_back(&t); });
  adam_step<Scalar>(p, g, state, learning_rate);
}

struct BlockCheck {
  std::string name;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps entries whose true gradient
/// is ~0 from turning finite-difference round-off into huge ratios.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

struct CheckedBlock {
  std::string name;
  Tensor* values;        // perturbed in place, restored afterwards
  const Tensor* analytic;
};

/// Central-difference comparison of analytic gradients against `loss`.
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  std::span<const CheckedBlock> blocks, double epsilon,
                                  double tolerance) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be > 0");
  GradCheckReport report;
  for (const auto& block : blocks) {
    require_same_shape(*block.values, *block.analytic, "grad_check");
    BlockCheck check{block.name, 0.0};
    for (Eigen::Index k = 0; k < block.values->size(); ++k) {
      double& v = block.values->data()[k];
      const double saved = v;
      v = saved + epsilon;
      const double up = loss();
      v = saved - epsilon;
      const double down = loss();
      v = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      check.max_relative_error = std::max(
          check.max_relative_error, relative_error(block.analytic->data()[k], numeric));
    }
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.blocks.push_back(std::move(check));
  }
  report.passed = report.max_relative_error < tolerance;
  return report;
}

/// Checks every classifier parameter block and the per-step input gradients
/// on one labelled sequence, with dropout off.
inline GradCheckReport grad_check(BiLstmClassifier<double>& model, std::vector<Tensor> xs,
                                  std::span<const int> targets, double epsilon,
                                  double tolerance) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("grad_check: epsilon must be > 0");
  auto loss = [&]() {
    auto pass = classifier_forward<double>(model, xs);
    return cross_entropy(pass.probs, targets).loss;
  };
  const auto pass = classifier_forward<double>(model, xs);
  const auto grads = backward(model, pass, cross_entropy(pass.probs, targets).logit_grad);

  std::vector<CheckedBlock> blocks;
  std::vector<std::pair<std::string, Tensor*>> values;
  std::vector<const Tensor*> analytic;
  for_each_block(model, [&](const std::string& name, Tensor& t) { values.emplace_back(name, &t); });
  for_each_block(grads.params, [&](const std::string&, const Tensor& t) { analytic.push_back(&t); });
  for (std::size_t k = 0; k < values.size(); ++k)
    blocks.push_back({values[k].first, values[k].second, analytic[k]});
  for (std::size_t t = 0; t < xs.size(); ++t)
    blocks.push_back({"inputs[" + std::to_string(t) + "]", &xs[t], &grads.inputs[t]});
  return grad_check(loss, blocks, epsilon, tolerance);
}

}  // namespace reviewnet
