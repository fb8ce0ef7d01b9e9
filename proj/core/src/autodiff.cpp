#include "linkpred/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "linkpred/rng.hpp"

namespace linkpred::ad {
namespace {

constexpr double kBceClampLo = 1e-7;
constexpr double kBceClampHi = 1.0 - 1e-7;

void check_finite(const Mat& m, const char* op) {
  if (!m.allFinite()) {
    throw std::runtime_error(std::string("autodiff: non-finite values out of ") + op);
  }
}

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tape::Node& Tape::node(Var v) {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::out_of_range("autodiff: invalid tape handle");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw std::out_of_range("autodiff: invalid tape handle");
  }
  return nodes_[static_cast<std::size_t>(v.id)];
}

Var Tape::push(Mat value, bool requires_grad, std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.is_leaf = !backprop;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const Mat& g) {
  Node& n = node(v);
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  }
  n.grad += g;
}

const Mat& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) {
    throw std::logic_error("autodiff: gradient not populated; run backward first");
  }
  return n.grad;
}

Var Tape::leaf(Mat value, bool requires_grad) {
  check_finite(value, "leaf");
  return push(std::move(value), requires_grad, nullptr);
}

Var Tape::matmul(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.cols() != vb.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree");
  }
  Mat out = va * vb;
  check_finite(out, "matmul");
  Var result = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  node(result).backprop = [a, b, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    if (t.requires_grad(a)) t.accumulate(a, g * t.node(b).value.transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.node(a).value.transpose() * g);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::feature_matmul(const SpMat& features, Var w) {
  const Mat& vw = value(w);
  if (features.cols() != vw.rows()) {
    throw std::invalid_argument("feature_matmul: inner dimensions disagree");
  }
  Mat out = features * vw;
  check_finite(out, "feature_matmul");
  Var result = push(std::move(out), requires_grad(w), nullptr);
  SpMat ft = features.transpose();
  node(result).backprop = [w, ft = std::move(ft), result](Tape& t) {
    if (t.requires_grad(w)) t.accumulate(w, ft * t.node(result).grad);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::spmm(const SpMat& s, Var x) {
  const Mat& vx = value(x);
  if (s.cols() != vx.rows()) {
    throw std::invalid_argument("spmm: inner dimensions disagree");
  }
  Mat out = s * vx;
  check_finite(out, "spmm");
  Var result = push(std::move(out), requires_grad(x), nullptr);
  SpMat st = s.transpose();
  node(result).backprop = [x, st = std::move(st), result](Tape& t) {
    if (t.requires_grad(x)) t.accumulate(x, st * t.node(result).grad);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::add(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw std::invalid_argument("add: shape mismatch");
  }
  Mat out = va + vb;
  check_finite(out, "add");
  Var result = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  node(result).backprop = [a, b, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    t.accumulate(a, g);
    t.accumulate(b, g);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::scale(Var a, double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("scale: non-finite factor");
  Mat out = value(a) * c;
  check_finite(out, "scale");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, c, result](Tape& t) {
    t.accumulate(a, t.node(result).grad * c);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::mul(Var a, Var b) {
  const Mat& va = value(a);
  const Mat& vb = value(b);
  if (va.rows() != vb.rows() || va.cols() != vb.cols()) {
    throw std::invalid_argument("mul: shape mismatch");
  }
  Mat out = va.cwiseProduct(vb);
  check_finite(out, "mul");
  Var result = push(std::move(out), requires_grad(a) || requires_grad(b), nullptr);
  node(result).backprop = [a, b, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.node(b).value));
    if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.node(a).value));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::row_scale(Var m, Var s) {
  const Mat& vm = value(m);
  const Mat& vs = value(s);
  if (vs.cols() != 1 || vs.rows() != vm.rows()) {
    throw std::invalid_argument("row_scale: scale must be a matching column");
  }
  Mat out = vm.array().colwise() * vs.col(0).array();
  check_finite(out, "row_scale");
  Var result = push(std::move(out), requires_grad(m) || requires_grad(s), nullptr);
  node(result).backprop = [m, s, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    if (t.requires_grad(m)) {
      t.accumulate(m, g.array().colwise() * t.node(s).value.col(0).array());
    }
    if (t.requires_grad(s)) {
      Mat gs = (g.cwiseProduct(t.node(m).value)).rowwise().sum();
      t.accumulate(s, gs);
    }
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const auto rows = value(parts[0]).rows();
  std::int64_t cols = 0;
  bool rg = false;
  for (const Var p : parts) {
    if (value(p).rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += value(p).cols();
    rg = rg || requires_grad(p);
  }
  Mat out(rows, cols);
  std::int64_t offset = 0;
  for (const Var p : parts) {
    out.middleCols(offset, value(p).cols()) = value(p);
    offset += value(p).cols();
  }
  check_finite(out, "concat_cols");
  Var result = push(std::move(out), rg, nullptr);
  std::vector<Var> owned(parts.begin(), parts.end());
  node(result).backprop = [owned = std::move(owned), result](Tape& t) {
    const Mat& g = t.node(result).grad;
    std::int64_t at = 0;
    for (const Var p : owned) {
      const auto width = t.node(p).value.cols();
      t.accumulate(p, g.middleCols(at, width));
      at += width;
    }
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::gather_rows(Var a, std::vector<std::int32_t> rows) {
  const Mat& va = value(a);
  Mat out(static_cast<std::int64_t>(rows.size()), va.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= va.rows()) {
      throw std::out_of_range("gather_rows: index out of range");
    }
    out.row(static_cast<std::int64_t>(i)) = va.row(rows[i]);
  }
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, rows = std::move(rows), result](Tape& t) {
    if (!t.requires_grad(a)) return;
    const Mat& g = t.node(result).grad;
    Mat ga = Mat::Zero(t.node(a).value.rows(), t.node(a).value.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ga.row(rows[i]) += g.row(static_cast<std::int64_t>(i));
    }
    t.accumulate(a, ga);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::scatter_sum_rows(Var a, std::vector<std::int32_t> destinations,
                           std::int64_t n_rows) {
  const Mat& va = value(a);
  if (static_cast<std::int64_t>(destinations.size()) != va.rows()) {
    throw std::invalid_argument("scatter_sum_rows: one destination per row required");
  }
  Mat out = Mat::Zero(n_rows, va.cols());
  for (std::size_t i = 0; i < destinations.size(); ++i) {
    if (destinations[i] < 0 || destinations[i] >= n_rows) {
      throw std::out_of_range("scatter_sum_rows: destination out of range");
    }
    out.row(destinations[i]) += va.row(static_cast<std::int64_t>(i));
  }
  check_finite(out, "scatter_sum_rows");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, destinations = std::move(destinations), result](Tape& t) {
    if (!t.requires_grad(a)) return;
    const Mat& g = t.node(result).grad;
    Mat ga(t.node(a).value.rows(), t.node(a).value.cols());
    for (std::size_t i = 0; i < destinations.size(); ++i) {
      ga.row(static_cast<std::int64_t>(i)) = g.row(destinations[i]);
    }
    t.accumulate(a, ga);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::rowsum(Var a) {
  Mat out = value(a).rowwise().sum();
  check_finite(out, "rowsum");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    t.accumulate(a, g * Mat::Ones(1, t.node(a).value.cols()));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::mean_rows(Var a) {
  const double inv = 1.0 / static_cast<double>(value(a).cols());
  Mat out = value(a).rowwise().mean();
  check_finite(out, "mean_rows");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, inv, result](Tape& t) {
    const Mat& g = t.node(result).grad;
    t.accumulate(a, g * Mat::Ones(1, t.node(a).value.cols()) * inv);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::relu(Var a) {
  Mat out = value(a).cwiseMax(0.0);
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, result](Tape& t) {
    const Mat mask = (t.node(a).value.array() > 0.0).cast<double>();
    t.accumulate(a, t.node(result).grad.cwiseProduct(mask));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::elu(Var a) {
  Mat out = value(a).unaryExpr(
      [](double x) { return x > 0.0 ? x : std::expm1(x); });
  check_finite(out, "elu");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, result](Tape& t) {
    // d/dx elu = 1 for x > 0, exp(x) otherwise (= elu + 1)
    const Mat& va = t.node(a).value;
    const Mat& out_value = t.node(result).value;
    Mat deriv(va.rows(), va.cols());
    for (std::int64_t j = 0; j < va.cols(); ++j) {
      for (std::int64_t i = 0; i < va.rows(); ++i) {
        deriv(i, j) = va(i, j) > 0.0 ? 1.0 : out_value(i, j) + 1.0;
      }
    }
    t.accumulate(a, t.node(result).grad.cwiseProduct(deriv));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::leaky_relu(Var a, double slope) {
  Mat out = value(a).unaryExpr(
      [slope](double x) { return x > 0.0 ? x : slope * x; });
  check_finite(out, "leaky_relu");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, slope, result](Tape& t) {
    const Mat deriv = t.node(a).value.unaryExpr(
        [slope](double x) { return x > 0.0 ? 1.0 : slope; });
    t.accumulate(a, t.node(result).grad.cwiseProduct(deriv));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::sigmoid(Var a) {
  Mat out = value(a).unaryExpr([](double x) { return stable_sigmoid(x); });
  check_finite(out, "sigmoid");
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, result](Tape& t) {
    const Mat& s = t.node(result).value;
    const Mat deriv = s.cwiseProduct(Mat::Ones(s.rows(), s.cols()) - s);
    t.accumulate(a, t.node(result).grad.cwiseProduct(deriv));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::dropout(Var a, double rate, bool train, std::uint64_t seed) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must lie in [0,1)");
  }
  if (!train || rate == 0.0) return a;  // identity in eval mode

  const Mat& va = value(a);
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  Mat mask(va.rows(), va.cols());
  for (std::int64_t i = 0; i < va.rows(); ++i) {
    for (std::int64_t j = 0; j < va.cols(); ++j) {
      mask(i, j) = rng.uniform() < rate ? 0.0 : keep_scale;
    }
  }
  Mat out = va.cwiseProduct(mask);
  Var result = push(std::move(out), requires_grad(a), nullptr);
  node(result).backprop = [a, mask = std::move(mask), result](Tape& t) {
    t.accumulate(a, t.node(result).grad.cwiseProduct(mask));
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::segment_softmax(Var logits, std::vector<std::int32_t> segments) {
  const Mat& vl = value(logits);
  if (vl.cols() != 1) {
    throw std::invalid_argument("segment_softmax: logits must be a column");
  }
  if (static_cast<std::int64_t>(segments.size()) != vl.rows()) {
    throw std::invalid_argument("segment_softmax: one segment id per logit");
  }

  std::int32_t n_segments = 0;
  for (const auto s : segments) {
    if (s < 0) throw std::invalid_argument("segment_softmax: negative segment id");
    n_segments = std::max(n_segments, s + 1);
  }

  // Shift by per-segment max for stability, exponentiate, normalize.
  std::vector<double> seg_max(static_cast<std::size_t>(n_segments),
                              -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    auto& m = seg_max[static_cast<std::size_t>(segments[i])];
    m = std::max(m, vl(static_cast<std::int64_t>(i), 0));
  }
  Mat out(vl.rows(), 1);
  std::vector<double> seg_sum(static_cast<std::size_t>(n_segments), 0.0);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double e =
        std::exp(vl(static_cast<std::int64_t>(i), 0) - seg_max[static_cast<std::size_t>(segments[i])]);
    out(static_cast<std::int64_t>(i), 0) = e;
    seg_sum[static_cast<std::size_t>(segments[i])] += e;
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out(static_cast<std::int64_t>(i), 0) /= seg_sum[static_cast<std::size_t>(segments[i])];
  }
  check_finite(out, "segment_softmax");

  Var result = push(std::move(out), requires_grad(logits), nullptr);
  node(result).backprop = [logits, segments = std::move(segments), n_segments,
                           result](Tape& t) {
    if (!t.requires_grad(logits)) return;
    const Mat& alpha = t.node(result).value;
    const Mat& g = t.node(result).grad;
    std::vector<double> seg_dot(static_cast<std::size_t>(n_segments), 0.0);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      seg_dot[static_cast<std::size_t>(segments[i])] +=
          g(static_cast<std::int64_t>(i), 0) * alpha(static_cast<std::int64_t>(i), 0);
    }
    Mat gl(alpha.rows(), 1);
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto row = static_cast<std::int64_t>(i);
      gl(row, 0) = alpha(row, 0) *
                   (g(row, 0) - seg_dot[static_cast<std::size_t>(segments[i])]);
    }
    t.accumulate(logits, gl);
  };
  node(result).is_leaf = false;
  return result;
}

Var Tape::bce_loss(Var p, Eigen::VectorXd y) {
  const Mat& vp = value(p);
  if (vp.cols() != 1 || vp.rows() != y.size()) {
    throw std::invalid_argument("bce_loss: predictions/labels length mismatch");
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < vp.rows(); ++i) {
    const double pc = std::clamp(vp(i, 0), kBceClampLo, kBceClampHi);
    total += -(y(i) * std::log(pc) + (1.0 - y(i)) * std::log(1.0 - pc));
  }
  Mat out(1, 1);
  out(0, 0) = total / static_cast<double>(vp.rows());
  check_finite(out, "bce_loss");

  Var result = push(std::move(out), requires_grad(p), nullptr);
  node(result).backprop = [p, y = std::move(y), result](Tape& t) {
    if (!t.requires_grad(p)) return;
    const Mat& vp = t.node(p).value;
    const double g0 = t.node(result).grad(0, 0);
    const double inv_n = 1.0 / static_cast<double>(vp.rows());
    Mat gp(vp.rows(), 1);
    for (std::int64_t i = 0; i < vp.rows(); ++i) {
      if (vp(i, 0) <= kBceClampLo || vp(i, 0) >= kBceClampHi) {
        gp(i, 0) = 0.0;  // clamped region is flat
      } else {
        gp(i, 0) = g0 * inv_n * (-y(i) / vp(i, 0) + (1.0 - y(i)) / (1.0 - vp(i, 0)));
      }
    }
    t.accumulate(p, gp);
  };
  node(result).is_leaf = false;
  return result;
}

void Tape::backward(Var root) {
  Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw std::invalid_argument("backward: root must be a scalar");
  }
  r.grad = Mat::Ones(1, 1);
  for (std::int32_t id = root.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this);
  }
  // Keep parameter (leaf) gradients, release the intermediates.
  for (auto& n : nodes_) {
    if (!n.is_leaf) n.grad.resize(0, 0);
  }
}

void adam_step(std::span<Mat* const> params, std::span<const Mat* const> grads,
               AdamState& state, double lr) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam: params/grads length mismatch");
  }
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i] = Mat::Zero(params[i]->rows(), params[i]->cols());
      state.v[i] = Mat::Zero(params[i]->rows(), params[i]->cols());
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam: state size mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i];
    const Mat& g = *grads[i];
    if (p.rows() != g.rows() || p.cols() != g.cols()) {
      throw std::invalid_argument("adam: parameter/gradient shape mismatch");
    }
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const Mat m_hat = state.m[i] / bc1;
    const Mat v_hat = state.v[i] / bc2;
    p.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + state.epsilon);
  }
}

}  // namespace linkpred::ad
