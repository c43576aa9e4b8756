#pragma once

// Reverse-mode automatic differentiation over dense row-major-agnostic f64
// matrices. Every tensor is two-dimensional (rows x cols); scalars are 1x1 and
// vectors are 1xN rows.
//
// A Graph is an append-only tape. Backward passes are written in terms of the
// same differentiable operations used in the forward pass, so when
// `create_graph` is requested the gradient computation is itself recorded on
// the tape and can be differentiated again (double backprop).

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <deque>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lwgan::ad {

using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

class Graph;

/// Raised when operand shapes do not conform; the message names the operation
/// and both shapes.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by `grad` for non-scalar outputs, disconnected inputs and graph
/// misuse.
class GradError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Tensor {
public:
    Tensor();
    explicit Tensor(Matrix values);
    Tensor(Index rows, Index cols, std::initializer_list<double> row_major);

    static Tensor scalar(double value);
    static Tensor zeros(Index rows, Index cols);
    static Tensor full(Index rows, Index cols, double value);

    [[nodiscard]] Index rows() const noexcept { return values_->rows(); }
    [[nodiscard]] Index cols() const noexcept { return values_->cols(); }
    [[nodiscard]] Index size() const noexcept { return values_->size(); }
    [[nodiscard]] std::vector<std::size_t> shape() const;
    [[nodiscard]] const Matrix& values() const noexcept { return *values_; }
    [[nodiscard]] double operator()(Index r, Index c) const { return (*values_)(r, c); }
    /// Value of a 1x1 tensor.
    [[nodiscard]] double item() const;

    [[nodiscard]] bool attached() const noexcept { return graph_ != nullptr; }
    [[nodiscard]] Graph* graph() const noexcept { return graph_; }
    [[nodiscard]] int node() const noexcept { return node_; }
    /// Same values, no graph linkage. Detached tensors are constants.
    [[nodiscard]] Tensor detach() const;

private:
    friend class Graph;
    std::shared_ptr<const Matrix> values_;
    Graph* graph_ = nullptr;
    int node_ = -1;
};

std::string shape_str(const Tensor& t);

enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    SafeDiv,
    AddBias,
    Affine,
    Concat,
    SliceCols,
    PadCols,
    SumRows,
    BroadcastRows,
    SumCols,
    BroadcastCols,
    Sum,
    Fill,
    Relu,
    LeakyRelu,
    Silu,
    Sigmoid,
    Tanh,
    Square,
    Exp,
    RowNorm,
};

const char* op_name(Op op) noexcept;

/// One tape entry. Inputs are stored as tensors so the backward rule can use
/// either their values (first order) or their graph linkage (higher order).
struct Node {
    Op op = Op::Leaf;
    std::array<Tensor, 2> inputs;
    int arity = 0;
    std::shared_ptr<const Matrix> output;
    double a = 0.0;
    double b = 0.0;
    Index i0 = 0;
    Index i1 = 0;
    bool trans_a = false;
    bool trans_b = false;
};

class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;
    Graph(Graph&&) = delete;
    Graph& operator=(Graph&&) = delete;

    /// New differentiable leaf holding `values`.
    Tensor variable(Matrix values);
    /// New differentiable leaf sharing the storage of `t` (no copy).
    Tensor variable(const Tensor& t);

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

    /// Drops every node. Tensors attached to this graph must not be used
    /// afterwards.
    void clear() noexcept { nodes_.clear(); }

    /// Gradients of the scalar `output` with respect to each of `wrt`.
    /// With `create_graph` the returned tensors are attached to this graph.
    std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph = false);
    std::vector<Tensor> grad(const Tensor& output, std::initializer_list<Tensor> wrt, bool create_graph = false) {
        return grad(output, std::span<const Tensor>(wrt.begin(), wrt.size()), create_graph);
    }

    // Used by the operation implementations.
    Tensor record(Node node);

private:
    std::array<Tensor, 2> backward(const Node& node, int id, const Tensor& upstream, bool create_graph,
                                   std::array<bool, 2> wants);

    std::deque<Node> nodes_;
};

/// Convenience overload dispatching to the output's graph.
std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph = false);
std::vector<Tensor> grad(const Tensor& output, std::initializer_list<Tensor> wrt, bool create_graph = false);

// ---------------------------------------------------------------------------
// Operations. Each records a node when at least one input is attached.

/// op(a) * op(b), where op transposes when the flag is set.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Elementwise product.
Tensor mul(const Tensor& a, const Tensor& b);
/// Elementwise a / b with 0 wherever b == 0.
Tensor safe_div(const Tensor& a, const Tensor& b);
/// x (N x C) plus bias (1 x C) broadcast over rows.
Tensor add_bias(const Tensor& x, const Tensor& bias);
/// scale * x + shift, elementwise, with constant scalars.
Tensor affine(const Tensor& x, double scale, double shift);
Tensor scale(const Tensor& x, double factor);
/// Column-wise concatenation [a | b]; row counts must agree.
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor slice_cols(const Tensor& x, Index offset, Index width);
/// Embeds x into a zero matrix with `total` columns starting at `offset`.
Tensor pad_cols(const Tensor& x, Index offset, Index total);
/// N x C -> 1 x C.
Tensor sum_rows(const Tensor& x);
/// 1 x C -> N x C.
Tensor broadcast_rows(const Tensor& x, Index rows);
/// N x C -> N x 1.
Tensor sum_cols(const Tensor& x);
/// N x 1 -> N x C.
Tensor broadcast_cols(const Tensor& x, Index cols);
/// Sum of all entries, 1 x 1.
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// 1 x 1 -> rows x cols.
Tensor fill(const Tensor& x, Index rows, Index cols);
Tensor relu(const Tensor& x);
/// max(x, 0) + alpha * min(x, 0). The derivative at exactly 0 is alpha.
Tensor leaky_relu(const Tensor& x, double alpha);
Tensor silu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor square(const Tensor& x);
Tensor exp(const Tensor& x);
/// l2-norm of each row, N x C -> N x 1. The gradient at a zero row is zero.
Tensor row_norm(const Tensor& x);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator-(const Tensor& a) { return scale(a, -1.0); }

/// Max over coordinates of |autodiff - central difference| / (|central| + 1e-12)
/// for a scalar-valued function of one tensor. The function receives a tensor
/// (attached for the autodiff pass, detached for the probes) and must return a
/// 1x1 tensor.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point, double step);

}  // namespace lwgan::ad
