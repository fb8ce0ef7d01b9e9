#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace linkpred::ad {

using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Handle into a Tape's node list.
struct Var {
  std::int32_t id = -1;
};

// Reverse-mode tape over dense 64-bit matrices. Nodes are created in
// topological order by construction; backward() replays them in reverse.
// One tape belongs to one logical thread of execution.
class Tape {
 public:
  // Leaf tensor; requires_grad marks trainable parameters.
  Var leaf(Mat value, bool requires_grad = false);

  Var matmul(Var a, Var b);
  // Constant sparse LHS times dense parameter (input-feature layers).
  Var feature_matmul(const SpMat& features, Var w);
  // Constant propagation matrix times dense activations.
  Var spmm(const SpMat& s, Var x);
  Var add(Var a, Var b);
  Var scale(Var a, double c);
  Var mul(Var a, Var b);        // elementwise
  Var row_scale(Var m, Var s);  // row i of m scaled by s(i,0)
  Var concat_cols(std::span<const Var> parts);
  Var gather_rows(Var a, std::vector<std::int32_t> rows);
  Var scatter_sum_rows(Var a, std::vector<std::int32_t> destinations,
                       std::int64_t n_rows);
  Var rowsum(Var a);     // (n,1) sums
  Var mean_rows(Var a);  // (n,1) per-row means

  Var relu(Var a);
  Var elu(Var a);
  Var leaky_relu(Var a, double slope);
  Var sigmoid(Var a);
  // Inverted dropout: surviving entries scale by 1/(1-rate); identity when
  // train is false. rate must lie in [0,1).
  Var dropout(Var a, double rate, bool train, std::uint64_t seed);
  // Softmax of a column of logits within each segment (attention
  // normalization per destination node).
  Var segment_softmax(Var logits, std::vector<std::int32_t> segments);

  // Mean of -[y ln p + (1-y) ln(1-p)] with p clamped to [1e-7, 1-1e-7].
  Var bce_loss(Var p, Eigen::VectorXd y);

  // Populates grads of every requires_grad tensor reachable from the
  // scalar root; intermediate grads are released afterwards.
  void backward(Var root);

  const Mat& value(Var v) const { return node(v).value; }
  const Mat& grad(Var v) const;
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;              // empty until touched by backward
    bool requires_grad = false;
    bool is_leaf = false;
    std::function<void(Tape&)> backprop;  // empty for leaves
  };

  Var push(Mat value, bool requires_grad, std::function<void(Tape&)> backprop);
  Node& node(Var v);
  const Node& node(Var v) const;
  void accumulate(Var v, const Mat& g);
  bool has_grad(Var v) const { return node(v).grad.size() > 0; }

  std::vector<Node> nodes_;
};

// Adam accumulators for one parameter list; step count t advances once per
// adam_step call.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t t = 0;
  std::vector<Mat> m;
  std::vector<Mat> v;
};

// In-place Adam with bias correction: p -= lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(std::span<Mat* const> params, std::span<const Mat* const> grads,
               AdamState& state, double lr);

}  // namespace linkpred::ad
