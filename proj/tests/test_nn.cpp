#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "reviewnet/nn.hpp"

using namespace reviewnet;

namespace {

using Seq = std::vector<Tensor>;

Seq random_sequence(std::size_t steps, Eigen::Index dim, SeededRng& rng, Eigen::Index batch = 1) {
  Seq xs;
  for (std::size_t t = 0; t < steps; ++t) xs.push_back(init_uniform(dim, batch, rng, 1.0));
  return xs;
}

LstmParams<double> randomized(Eigen::Index cell, Eigen::Index input, SeededRng& rng) {
  auto p = LstmParams<double>::random(cell, input, rng);
  for (auto* g : p.gates()) g->bias = init_uniform(cell, 1, rng, 0.5);
  return p;
}

Tensor zeros(Eigen::Index r, Eigen::Index c) { return Tensor::Zero(r, c); }

Tensor col(std::initializer_list<double> v) {
  Tensor t(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) t(i++, 0) = x;
  return t;
}

}  // namespace

TEST_CASE("cell forward with zero parameters") {
  const auto p = LstmParams<double>::zeros(3, 2);
  const auto [state, gates] = lstm_cell_forward(p, LstmState<double>::zeros(3), col({0.7, -2.0}));
  CHECK((gates.forget.array() == 0.5).all());
  CHECK((gates.input.array() == 0.5).all());
  CHECK((gates.output.array() == 0.5).all());
  CHECK(gates.candidate.isZero());
  CHECK(state.cell.isZero());
  CHECK(state.hidden.isZero());
}

TEST_CASE("cell forward hand evaluation with candidate bias atanh(0.5)") {
  auto p = LstmParams<double>::zeros(1, 1);
  p.candidate.bias(0, 0) = 0.549306;
  const auto [state, gates] = lstm_cell_forward(p, LstmState<double>::zeros(1), col({3.14}));
  CHECK(std::abs(gates.candidate(0, 0) - 0.5) <= 1e-6);
  CHECK(std::abs(state.cell(0, 0) - 0.25) <= 1e-6);
  CHECK(std::abs(state.hidden(0, 0) - 0.122460) <= 1e-6);
}

TEST_CASE("saturated gates carry memory unchanged") {
  SeededRng rng(1);
  auto p = randomized(4, 3, rng);
  p.forget.bias.setConstant(1e3);
  p.input.bias.setConstant(-1e3);
  LstmState<double> s{init_uniform(4, 1, rng, 2.0), init_uniform(4, 1, rng, 0.9)};
  const Tensor start = s.cell;
  for (int t = 0; t < 60; ++t) {
    auto [next, gates] = lstm_cell_forward(p, s, init_uniform(3, 1, rng, 1.0));
    CHECK((next.cell - s.cell).cwiseAbs().maxCoeff() <= 1e-9);
    s = std::move(next);
  }
  CHECK((s.cell - start).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("gate and state ranges on random finite inputs") {
  SeededRng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = LstmParams<double>::random(5, 4, rng);
    for (auto* g : p.gates()) g->weights *= 3.0;
    const auto seq = lstm_sequence_forward<double>(p, random_sequence(6, 4, rng));
    for (const auto& s : seq.steps) {
      for (const Tensor* g : {&s.gates.forget, &s.gates.input, &s.gates.output}) {
        CHECK(g->minCoeff() > 0.0);
        CHECK(g->maxCoeff() < 1.0);
      }
      CHECK(s.gates.candidate.cwiseAbs().maxCoeff() < 1.0);
    }
    CHECK(seq.final_state.hidden.cwiseAbs().maxCoeff() < 1.0);
  }
}

TEST_CASE("cell forward shape errors") {
  const auto p = LstmParams<double>::zeros(2, 3);
  CHECK_THROWS_AS(lstm_cell_forward(p, LstmState<double>::zeros(2), zeros(2, 1)),
                  DimensionError);
  CHECK_THROWS_AS(lstm_cell_forward(p, LstmState<double>::zeros(3), zeros(3, 1)),
                  DimensionError);
  auto broken = p;
  broken.output.bias = Tensor::Zero(3, 1);
  CHECK_THROWS_AS(lstm_cell_forward(broken, LstmState<double>::zeros(2), zeros(3, 1)),
                  DimensionError);
}

TEST_CASE("sequence forward is a fold of the cell") {
  SeededRng rng(3);
  const auto p = randomized(3, 2, rng);
  const Seq xs = random_sequence(3, 2, rng);

  const auto one = lstm_sequence_forward<double>(p, Seq{xs[0]});
  const auto [single, g0] = lstm_cell_forward(p, LstmState<double>::zeros(3), xs[0]);
  CHECK(one.final_state.hidden == single.hidden);
  CHECK(one.final_state.cell == single.cell);

  auto manual = LstmState<double>::zeros(3);
  for (const auto& x : xs) manual = lstm_cell_forward(p, manual, x).first;
  const auto three = lstm_sequence_forward<double>(p, xs);
  CHECK(three.final_state.hidden == manual.hidden);
  CHECK(three.final_state.cell == manual.cell);
  CHECK(three.steps.size() == 3);

  CHECK(lstm_sequence_forward<double>(LstmParams<double>::zeros(3, 2), xs)
            .final_state.hidden.isZero());
  CHECK_THROWS_AS(lstm_sequence_forward<double>(p, Seq{}), std::invalid_argument);
}

TEST_CASE("bilstm forward") {
  SeededRng rng(4);
  const auto p = randomized(3, 2, rng);
  const Tensor a = init_uniform(2, 1, rng, 1.0), b = init_uniform(2, 1, rng, 1.0);
  const Seq palindrome{a, b, a};
  const BiLstmLayer<double> twin{p, p};
  const Tensor out = bilstm_forward<double>(twin, palindrome);
  CHECK(out.rows() == 6);
  CHECK(out.topRows(3) == out.bottomRows(3));

  const BiLstmLayer<double> zero{LstmParams<double>::zeros(3, 2), LstmParams<double>::zeros(3, 2)};
  CHECK(bilstm_forward<double>(zero, palindrome).isZero());

  const BiLstmLayer<double> layer{randomized(3, 2, rng), randomized(3, 2, rng)};
  const Seq xs = random_sequence(4, 2, rng);
  const Seq reversed(xs.rbegin(), xs.rend());
  const Tensor oracle =
      concat_rows(lstm_sequence_forward<double>(layer.forward, xs).final_state.hidden,
                  lstm_sequence_forward<double>(layer.backward, reversed).final_state.hidden);
  const Tensor got = bilstm_forward<double>(layer, xs);
  CHECK(got == oracle);
  CHECK(got.topRows(3) == lstm_sequence_forward<double>(layer.forward, xs).final_state.hidden);

  CHECK_THROWS_AS(bilstm_forward<double>(layer, Seq{}), std::invalid_argument);
}

TEST_CASE("batched columns match per-example evaluation") {
  SeededRng rng(5);
  const BiLstmLayer<double> layer{randomized(4, 3, rng), randomized(4, 3, rng)};
  const Seq batch = random_sequence(5, 3, rng, 3);
  const Tensor all = bilstm_forward<double>(layer, batch);
  for (Eigen::Index c = 0; c < 3; ++c) {
    Seq single;
    for (const auto& x : batch) single.push_back(x.col(c));
    const Tensor one = bilstm_forward<double>(layer, single);
    CHECK((all.col(c) - one).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("dense softmax head") {
  const auto zero = DenseParams<double>::zeros(3, 4);
  const Tensor p = dense_softmax_forward(zero, Tensor(Tensor::Constant(4, 1, 0.3)));
  for (int c = 0; c < 3; ++c) CHECK(std::abs(p(c, 0) - 1.0 / 3.0) <= 1e-15);

  auto biased = DenseParams<double>::zeros(2, 4);
  biased.bias(0, 0) = 10.0;
  CHECK(dense_softmax_forward(biased, zeros(4, 1))(0, 0) >= 0.9999);

  SeededRng rng(6);
  const auto head = DenseParams<double>::random(3, 6, rng);
  const Tensor h = init_uniform(6, 1, rng, 1.0);
  const Tensor logits = add(matmul(head.weights, h), head.bias);
  const Tensor oracle = softmax_rows(Tensor(logits.transpose())).transpose();
  const Tensor got = dense_softmax_forward(head, h);
  CHECK((got - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(got.sum() - 1.0) <= 1e-12);
  CHECK_THROWS_AS(dense_softmax_forward(head, zeros(5, 1)), DimensionError);
}

TEST_CASE("cross entropy") {
  CHECK(std::abs(cross_entropy<double>(col({1, 0, 0}), 0).loss) <= 1e-9);
  for (int t = 0; t < 3; ++t)
    CHECK(std::abs(cross_entropy<double>(Tensor::Constant(3, 1, 1.0 / 3.0), t).loss -
                   1.098612) <= 1e-6);
  CHECK(std::isfinite(cross_entropy<double>(col({1, 0, 0}), 1).loss));
  CHECK_THROWS_AS(cross_entropy<double>(col({0.5, 0.5}), 2), std::out_of_range);
  CHECK_THROWS_AS(cross_entropy<double>(col({0.5, 0.5}), -1), std::out_of_range);

  // Finite differences on the logits.
  SeededRng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor logits = init_uniform(3, 1, rng, 3.0);
    const int target = static_cast<int>(rng.below(3));
    const auto r = cross_entropy<double>(softmax_cols(logits), target);
    for (Eigen::Index k = 0; k < 3; ++k) {
      Tensor up = logits, down = logits;
      up(k, 0) += 1e-5;
      down(k, 0) -= 1e-5;
      const double numeric = (cross_entropy<double>(softmax_cols(up), target).loss -
                              cross_entropy<double>(softmax_cols(down), target).loss) /
                             2e-5;
      CHECK(relative_error(r.logit_grad(k, 0), numeric) <= 1e-6);
    }
  }
}

TEST_CASE("dropout") {
  SeededRng rng(8);
  const Tensor x = init_uniform(10, 10, rng, 1.0);
  CHECK(dropout(x, 0.0, rng, true) == x);
  CHECK(dropout(x, 0.0, rng, false) == x);
  CHECK(dropout(x, 0.5, rng, false) == x);
  CHECK_THROWS(dropout(x, 1.0, rng, true));
  CHECK_THROWS(dropout(x, -0.1, rng, true));

  const Tensor ones = Tensor::Ones(100, 100);
  const Tensor d = dropout(ones, 0.5, rng, true);
  CHECK(d.mean() >= 0.96);
  CHECK(d.mean() <= 1.04);
  CHECK(((d.array() == 0.0) || (d.array() == 2.0)).all());
}

TEST_CASE("backward: zero loss gradient gives zero parameter gradients") {
  SeededRng rng(9);
  auto model = BiLstmClassifier<double>::random(3, 4, 3, rng);
  const Seq xs = random_sequence(5, 3, rng);
  const auto pass = classifier_forward<double>(model, xs);
  const auto grads = backward(model, pass, zeros(3, 1));
  for_each_block(grads.params, [](const std::string& name, const Tensor& g) {
    INFO(name);
    CHECK(g.isZero());
  });
  for (const auto& g : grads.inputs) CHECK(g.isZero());
}

TEST_CASE("backward rejects missing caches") {
  SeededRng rng(10);
  auto model = BiLstmClassifier<double>::random(3, 4, 3, rng);
  auto pass = classifier_forward<double>(model, random_sequence(4, 3, rng));
  pass.encoder.backward.steps.clear();
  CHECK_THROWS_AS(backward(model, pass, zeros(3, 1)), ContractViolation);
  ForwardPass<double> empty;
  CHECK_THROWS_AS(backward(model, empty, zeros(3, 1)), ContractViolation);
}

TEST_CASE("backward: cloned directions on a palindrome receive identical gradients") {
  SeededRng rng(11);
  auto model = BiLstmClassifier<double>::random(2, 3, 3, rng);
  model.encoder.backward = model.encoder.forward;
  // Symmetric head so both halves of the readout see the same upstream gradient.
  model.head.weights.rightCols(3) = model.head.weights.leftCols(3);
  const Tensor a = init_uniform(2, 1, rng, 1.0), b = init_uniform(2, 1, rng, 1.0);
  const Seq xs{a, b, b, a};
  const auto pass = classifier_forward<double>(model, xs);
  const int target = 1;
  const auto grads = backward(model, pass, cross_entropy<double>(pass.probs, target).logit_grad);
  const auto& f = grads.params.encoder.forward;
  const auto& r = grads.params.encoder.backward;
  const auto fg = f.gates();
  const auto rg = r.gates();
  for (std::size_t g = 0; g < 4; ++g) {
    CHECK((fg[g]->weights - rg[g]->weights).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((fg[g]->bias - rg[g]->bias).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("dense-only toy gradient check is exact to round-off") {
  SeededRng rng(12);
  auto head = DenseParams<double>::random(3, 5, rng);
  const Tensor h = init_uniform(5, 1, rng, 1.0);
  const int target = 2;
  auto loss = [&]() { return cross_entropy<double>(dense_softmax_forward(head, h), target).loss; };
  const auto r = cross_entropy<double>(dense_softmax_forward(head, h), target);
  auto grads = DenseParams<double>::zeros(3, 5);
  dense_backward<double>(head, h, r.logit_grad, grads, nullptr);
  const std::vector<CheckedBlock> blocks{{"head.weights", &head.weights, &grads.weights},
                                         {"head.bias", &head.bias, &grads.bias}};
  const auto report = grad_check(loss, blocks, 1e-5, 1e-8);
  CHECK(report.max_relative_error < 1e-8);
  CHECK(report.passed);
}

TEST_CASE("full BiLSTM gradient check") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    SeededRng rng(seed);
    auto model = BiLstmClassifier<double>::random(3, 4, 3, rng);
    for (auto* lstm : {&model.encoder.forward, &model.encoder.backward})
      for (auto* g : lstm->gates()) g->bias = init_uniform(4, 1, rng, 0.5);
    const Seq xs = random_sequence(5, 3, rng);
    const int target = static_cast<int>(rng.below(3));
    const auto report = grad_check(model, xs, std::span<const int>(&target, 1), 1e-5, 1e-4);
    INFO("seed " << seed << " max rel err " << report.max_relative_error);
    CHECK(report.passed);
    CHECK(report.blocks.size() == 18 + 5);
  }
}

TEST_CASE("gradients through dropout match finite differences with a frozen mask") {
  SeededRng rng(13);
  auto model = BiLstmClassifier<double>::random(2, 3, 2, rng);
  const Seq xs = random_sequence(3, 2, rng);
  const int target = 0;
  SeededRng mask_rng(77);
  const auto pass = classifier_forward<double>(model, xs, 0.5, &mask_rng, true);
  const auto grads = backward(model, pass, cross_entropy<double>(pass.probs, target).logit_grad);
  auto loss = [&]() {
    auto p = classifier_forward<double>(model, xs);
    Tensor probs = dense_softmax_forward(model.head, Tensor(p.encoder.output.cwiseProduct(pass.mask)));
    return cross_entropy<double>(probs, target).loss;
  };
  std::vector<CheckedBlock> blocks;
  std::vector<Tensor*> values;
  std::vector<const Tensor*> analytic;
  for_each_block(model, [&](const std::string&, Tensor& t) { values.push_back(&t); });
  for_each_block(grads.params, [&](const std::string&, const Tensor& t) { analytic.push_back(&t); });
  for (std::size_t k = 0; k < values.size(); ++k) blocks.push_back({"b", values[k], analytic[k]});
  CHECK(grad_check(loss, blocks, 1e-5, 1e-4).passed);
}

TEST_CASE("grad_check rejects epsilon 0") {
  SeededRng rng(14);
  auto model = BiLstmClassifier<double>::random(2, 2, 2, rng);
  const int target = 0;
  CHECK_THROWS_AS(grad_check(model, random_sequence(2, 2, rng), std::span<const int>(&target, 1),
                             0.0, 1e-4),
                  std::invalid_argument);
}

TEST_CASE("adam") {
  SUBCASE("first step hand value") {
    Tensor p = Tensor::Zero(1, 1);
    const Tensor g = Tensor::Ones(1, 1);
    AdamState<double> st;
    std::vector<Tensor*> ps{&p};
    std::vector<const Tensor*> gs{&g};
    adam_step<double>(ps, gs, st, 1e-3);
    CHECK(std::abs(p(0, 0) - (-9.999e-4)) <= 1e-7);
    CHECK(std::abs(p(0, 0) - (-1e-3 / (1.0 + 1e-8))) <= 1e-15);
  }
  SUBCASE("zero gradient leaves parameters, moments decay") {
    Tensor p = Tensor::Constant(2, 2, 0.3);
    Tensor g = Tensor::Constant(2, 2, 0.5);
    AdamState<double> st;
    std::vector<Tensor*> ps{&p};
    std::vector<const Tensor*> gs{&g};
    adam_step<double>(ps, gs, st, 1e-3);
    const Tensor after_first = p;
    const double m0 = st.first[0](0, 0);
    g.setZero();
    adam_step<double>(ps, gs, st, 0.0);
    CHECK(p == after_first);
    CHECK(std::abs(st.first[0](0, 0)) < std::abs(m0));
    CHECK(st.step == 2);
  }
  SUBCASE("constant gradient descends") {
    Tensor p = Tensor::Zero(1, 2);
    Tensor g(1, 2);
    g << 0.7, -2.0;
    AdamState<double> st;
    std::vector<Tensor*> ps{&p};
    std::vector<const Tensor*> gs{&g};
    for (int i = 0; i < 100; ++i) adam_step<double>(ps, gs, st, 1e-2);
    CHECK(p(0, 0) < 0.0);
    CHECK(p(0, 1) > 0.0);
  }
  SUBCASE("shape mismatch") {
    Tensor p = Tensor::Zero(1, 2);
    const Tensor g = Tensor::Zero(2, 1);
    AdamState<double> st;
    std::vector<Tensor*> ps{&p};
    std::vector<const Tensor*> gs{&g};
    CHECK_THROWS_AS(adam_step<double>(ps, gs, st, 1e-3), DimensionError);
  }
}

TEST_CASE("global norm clipping") {
  Tensor a = Tensor::Constant(1, 1, 3.0), b = Tensor::Constant(1, 1, 4.0);
  std::vector<Tensor*> gs{&a, &b};
  CHECK(clip_global_norm<double>(gs, 5.0) == 5.0);
  CHECK(a(0, 0) == 3.0);
  CHECK(clip_global_norm<double>(gs, 1.0) == 5.0);
  CHECK(std::abs(std::hypot(a(0, 0), b(0, 0)) - 1.0) <= 1e-15);
}

TEST_CASE("float instantiation compiles and runs") {
  SeededRng rng(15);
  auto model = BiLstmClassifier<float>::random(2, 3, 2, rng);
  std::vector<BasicTensor<float>> xs{BasicTensor<float>::Ones(2, 1), BasicTensor<float>::Zero(2, 1)};
  const auto pass = classifier_forward<float>(model, xs);
  CHECK(std::abs(pass.probs.sum() - 1.0f) <= 1e-6f);
}
