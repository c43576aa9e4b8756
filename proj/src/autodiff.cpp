#include "lwgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace lwgan::ad {

namespace {

std::shared_ptr<const Matrix> share(Matrix m) { return std::make_shared<const Matrix>(std::move(m)); }

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const std::string& what) {
    throw ShapeError(std::string(op) + ": " + what + " (got " + shape_str(a) + ")");
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_fail(op, a, b);
}

Graph* common_graph(const Tensor& a, const Tensor* b) {
    Graph* g = a.graph();
    if (b != nullptr && b->graph() != nullptr) {
        if (g != nullptr && g != b->graph()) throw GradError("operands belong to different graphs");
        g = b->graph();
    }
    return g;
}

/// Builds the result of an operation: a detached tensor when no input is
/// attached, otherwise a freshly recorded node.
Tensor emit(Op op, Matrix value, const Tensor& a, const Tensor* b = nullptr, double pa = 0.0, double pb = 0.0,
            Index i0 = 0, Index i1 = 0, bool ta = false, bool tb = false) {
    Graph* g = common_graph(a, b);
    if (g == nullptr) return Tensor(std::move(value));
    Node node;
    node.op = op;
    node.inputs[0] = a;
    node.arity = 1;
    if (b != nullptr) {
        node.inputs[1] = *b;
        node.arity = 2;
    }
    node.output = share(std::move(value));
    node.a = pa;
    node.b = pb;
    node.i0 = i0;
    node.i1 = i1;
    node.trans_a = ta;
    node.trans_b = tb;
    return g->record(std::move(node));
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor

Tensor::Tensor() : values_(share(Matrix(0, 0))) {}

Tensor::Tensor(Matrix values) : values_(share(std::move(values))) {}

Tensor::Tensor(Index rows, Index cols, std::initializer_list<double> row_major) {
    if (static_cast<Index>(row_major.size()) != rows * cols)
        throw ShapeError("Tensor: " + std::to_string(row_major.size()) + " values for shape (" + std::to_string(rows) +
                         ", " + std::to_string(cols) + ")");
    Matrix m(rows, cols);
    auto it = row_major.begin();
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = *it++;
    values_ = share(std::move(m));
}

Tensor Tensor::scalar(double value) { return Tensor(Matrix::Constant(1, 1, value)); }

Tensor Tensor::zeros(Index rows, Index cols) { return Tensor(Matrix::Zero(rows, cols)); }

Tensor Tensor::full(Index rows, Index cols, double value) { return Tensor(Matrix::Constant(rows, cols, value)); }

std::vector<std::size_t> Tensor::shape() const {
    return {static_cast<std::size_t>(rows()), static_cast<std::size_t>(cols())};
}

double Tensor::item() const {
    if (rows() != 1 || cols() != 1) shape_fail("item", *this, "expected a 1x1 tensor");
    return (*values_)(0, 0);
}

Tensor Tensor::detach() const {
    Tensor t;
    t.values_ = values_;
    return t;
}

std::string shape_str(const Tensor& t) {
    std::ostringstream os;
    os << '(' << t.rows() << ", " << t.cols() << ')';
    return os.str();
}

const char* op_name(Op op) noexcept {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::MatMul: return "matmul";
        case Op::Add: return "add";
        case Op::Sub: return "sub";
        case Op::Mul: return "mul";
        case Op::SafeDiv: return "safe_div";
        case Op::AddBias: return "add_bias";
        case Op::Affine: return "affine";
        case Op::Concat: return "concat_cols";
        case Op::SliceCols: return "slice_cols";
        case Op::PadCols: return "pad_cols";
        case Op::SumRows: return "sum_rows";
        case Op::BroadcastRows: return "broadcast_rows";
        case Op::SumCols: return "sum_cols";
        case Op::BroadcastCols: return "broadcast_cols";
        case Op::Sum: return "sum";
        case Op::Fill: return "fill";
        case Op::Relu: return "relu";
        case Op::LeakyRelu: return "leaky_relu";
        case Op::Silu: return "silu";
        case Op::Sigmoid: return "sigmoid";
        case Op::Tanh: return "tanh";
        case Op::Square: return "square";
        case Op::Exp: return "exp";
        case Op::RowNorm: return "row_norm";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Graph

Tensor Graph::variable(Matrix values) { return variable(Tensor(std::move(values))); }

Tensor Graph::variable(const Tensor& t) {
    Node node;
    node.op = Op::Leaf;
    node.output = t.values_;
    return record(std::move(node));
}

Tensor Graph::record(Node node) {
    Tensor out;
    out.values_ = node.output;
    out.graph_ = this;
    out.node_ = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(node));
    return out;
}

std::vector<Tensor> Graph::grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph) {
    if (output.graph() != this) throw GradError("grad: output is not attached to this graph");
    if (output.rows() != 1 || output.cols() != 1)
        throw GradError("grad: output must be a scalar, got " + shape_str(output));

    const int out_id = output.node();
    const auto count = static_cast<std::size_t>(out_id) + 1;

    // Forward sweep marking nodes that depend on any wrt tensor; the backward
    // sweep only visits those.
    std::vector<char> needed(count, 0);
    for (const Tensor& w : wrt) {
        if (w.graph() != this) throw GradError("grad: input is disconnected (not attached to this graph)");
        if (w.node() < static_cast<int>(count)) needed[static_cast<std::size_t>(w.node())] = 1;
    }
    for (std::size_t id = 0; id < count; ++id) {
        if (needed[id]) continue;
        const Node& n = nodes_[id];
        for (int k = 0; k < n.arity; ++k) {
            const Tensor& in = n.inputs[static_cast<std::size_t>(k)];
            if (in.attached() && needed[static_cast<std::size_t>(in.node())]) {
                needed[id] = 1;
                break;
            }
        }
    }

    std::vector<std::optional<Tensor>> adjoint(count);
    adjoint[static_cast<std::size_t>(out_id)] = Tensor::scalar(1.0);

    for (int id = out_id; id >= 0; --id) {
        const auto uid = static_cast<std::size_t>(id);
        if (!needed[uid] || !adjoint[uid]) continue;
        const Node& n = nodes_[uid];
        if (n.op == Op::Leaf) continue;
        // The deque keeps `n` valid while backward appends nodes.
        std::array<bool, 2> wants{false, false};
        for (int k = 0; k < n.arity; ++k) {
            const Tensor& in = n.inputs[static_cast<std::size_t>(k)];
            wants[static_cast<std::size_t>(k)] = in.attached() && needed[static_cast<std::size_t>(in.node())];
        }
        auto grads = backward(n, id, *adjoint[uid], create_graph, wants);
        for (int k = 0; k < n.arity; ++k) {
            const Tensor& in = n.inputs[static_cast<std::size_t>(k)];
            if (!in.attached()) continue;
            const auto iid = static_cast<std::size_t>(in.node());
            if (!wants[static_cast<std::size_t>(k)]) continue;
            Tensor& g = grads[static_cast<std::size_t>(k)];
            adjoint[iid] = adjoint[iid] ? add(*adjoint[iid], g) : std::move(g);
        }
    }

    std::vector<Tensor> result;
    result.reserve(wrt.size());
    for (const Tensor& w : wrt) {
        const auto wid = static_cast<std::size_t>(w.node());
        if (wid >= count || !adjoint[wid])
            throw GradError("grad: input node " + std::to_string(w.node()) + " is disconnected from the output");
        Tensor g = *adjoint[wid];
        result.push_back(create_graph ? g : g.detach());
    }
    return result;
}

std::array<Tensor, 2> Graph::backward(const Node& n, int id, const Tensor& upstream, bool create_graph,
                                      std::array<bool, 2> wants) {
    // In first-order mode all operands are detached, so the rules below run as
    // plain arithmetic. In higher-order mode they record new nodes.
    const Tensor g = create_graph ? upstream : upstream.detach();
    const Tensor a = create_graph ? n.inputs[0] : n.inputs[0].detach();
    const Tensor b = n.arity > 1 ? (create_graph ? n.inputs[1] : n.inputs[1].detach()) : Tensor();
    Tensor y;
    y.values_ = n.output;
    if (create_graph) {
        y.graph_ = this;
        y.node_ = id;
    }

    switch (n.op) {
        case Op::Leaf: return {};
        case Op::MatMul: {
            const bool ta = n.trans_a;
            const bool tb = n.trans_b;
            std::array<Tensor, 2> out;
            if (wants[0]) {
                if (!ta) out[0] = matmul(g, b, false, !tb);
                else out[0] = matmul(b, g, tb, true);
            }
            if (wants[1]) {
                if (!tb) out[1] = matmul(a, g, !ta, false);
                else out[1] = matmul(g, a, true, ta);
            }
            return out;
        }
        case Op::Add: return {g, g};
        case Op::Sub: return {g, scale(g, -1.0)};
        case Op::Mul: return {mul(g, b), mul(g, a)};
        case Op::SafeDiv: return {safe_div(g, b), scale(safe_div(mul(g, y), b), -1.0)};
        case Op::AddBias: return {g, sum_rows(g)};
        case Op::Affine: return {scale(g, n.a), {}};
        case Op::Concat: return {slice_cols(g, 0, a.cols()), slice_cols(g, a.cols(), b.cols())};
        case Op::SliceCols: return {pad_cols(g, n.i0, a.cols()), {}};
        case Op::PadCols: return {slice_cols(g, n.i0, a.cols()), {}};
        case Op::SumRows: return {broadcast_rows(g, a.rows()), {}};
        case Op::BroadcastRows: return {sum_rows(g), {}};
        case Op::SumCols: return {broadcast_cols(g, a.cols()), {}};
        case Op::BroadcastCols: return {sum_cols(g), {}};
        case Op::Sum: return {fill(g, a.rows(), a.cols()), {}};
        case Op::Fill: return {sum(g), {}};
        case Op::Relu: {
            Tensor mask((a.values().array() > 0.0).cast<double>().matrix());
            return {mul(g, mask), {}};
        }
        case Op::LeakyRelu: {
            const double alpha = n.a;
            Tensor slope(a.values().unaryExpr([alpha](double v) { return v > 0.0 ? 1.0 : alpha; }));
            return {mul(g, slope), {}};
        }
        case Op::Sigmoid: return {mul(g, mul(y, affine(y, -1.0, 1.0))), {}};
        case Op::Tanh: return {mul(g, affine(square(y), -1.0, 1.0)), {}};
        case Op::Silu: {
            const Tensor s = sigmoid(a);
            const Tensor slope = add(s, mul(a, mul(s, affine(s, -1.0, 1.0))));
            return {mul(g, slope), {}};
        }
        case Op::Square: return {mul(g, scale(a, 2.0)), {}};
        case Op::Exp: return {mul(g, y), {}};
        case Op::RowNorm: return {mul(broadcast_cols(safe_div(g, y), a.cols()), a), {}};
    }
    return {};
}

std::vector<Tensor> grad(const Tensor& output, std::span<const Tensor> wrt, bool create_graph) {
    if (!output.attached()) throw GradError("grad: output is not attached to any graph");
    return output.graph()->grad(output, wrt, create_graph);
}

std::vector<Tensor> grad(const Tensor& output, std::initializer_list<Tensor> wrt, bool create_graph) {
    return grad(output, std::span<const Tensor>(wrt.begin(), wrt.size()), create_graph);
}

// ---------------------------------------------------------------------------
// Operations

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
    const Index inner_a = trans_a ? a.rows() : a.cols();
    const Index inner_b = trans_b ? b.cols() : b.rows();
    if (inner_a != inner_b) shape_fail("matmul", a, b);
    Matrix out;
    const Matrix& av = a.values();
    const Matrix& bv = b.values();
    if (!trans_a && !trans_b) out.noalias() = av * bv;
    else if (trans_a && !trans_b) out.noalias() = av.transpose() * bv;
    else if (!trans_a && trans_b) out.noalias() = av * bv.transpose();
    else out.noalias() = av.transpose() * bv.transpose();
    return emit(Op::MatMul, std::move(out), a, &b, 0, 0, 0, 0, trans_a, trans_b);
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    return emit(Op::Add, a.values() + b.values(), a, &b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    return emit(Op::Sub, a.values() - b.values(), a, &b);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    return emit(Op::Mul, a.values().cwiseProduct(b.values()), a, &b);
}

Tensor safe_div(const Tensor& a, const Tensor& b) {
    require_same_shape("safe_div", a, b);
    Matrix out = a.values().binaryExpr(b.values(), [](double x, double y) { return y == 0.0 ? 0.0 : x / y; });
    return emit(Op::SafeDiv, std::move(out), a, &b);
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) shape_fail("add_bias", x, bias);
    Matrix out = x.values().rowwise() + bias.values().row(0);
    return emit(Op::AddBias, std::move(out), x, &bias);
}

Tensor affine(const Tensor& x, double scale_by, double shift) {
    Matrix out = (x.values().array() * scale_by + shift).matrix();
    return emit(Op::Affine, std::move(out), x, nullptr, scale_by, shift);
}

Tensor scale(const Tensor& x, double factor) { return affine(x, factor, 0.0); }

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) shape_fail("concat_cols", a, b);
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a.values(), b.values();
    return emit(Op::Concat, std::move(out), a, &b);
}

Tensor slice_cols(const Tensor& x, Index offset, Index width) {
    if (offset < 0 || width < 0 || offset + width > x.cols())
        shape_fail("slice_cols", x, "columns [" + std::to_string(offset) + ", " + std::to_string(offset + width) +
                                        ") out of range");
    return emit(Op::SliceCols, x.values().middleCols(offset, width), x, nullptr, 0, 0, offset, width);
}

Tensor pad_cols(const Tensor& x, Index offset, Index total) {
    if (offset < 0 || offset + x.cols() > total)
        shape_fail("pad_cols", x, "cannot place at offset " + std::to_string(offset) + " within " +
                                      std::to_string(total) + " columns");
    Matrix out = Matrix::Zero(x.rows(), total);
    out.middleCols(offset, x.cols()) = x.values();
    return emit(Op::PadCols, std::move(out), x, nullptr, 0, 0, offset, total);
}

Tensor sum_rows(const Tensor& x) { return emit(Op::SumRows, x.values().colwise().sum(), x); }

Tensor broadcast_rows(const Tensor& x, Index rows) {
    if (x.rows() != 1) shape_fail("broadcast_rows", x, "expected a single row");
    return emit(Op::BroadcastRows, x.values().replicate(rows, 1), x, nullptr, 0, 0, rows);
}

Tensor sum_cols(const Tensor& x) { return emit(Op::SumCols, x.values().rowwise().sum(), x); }

Tensor broadcast_cols(const Tensor& x, Index cols) {
    if (x.cols() != 1) shape_fail("broadcast_cols", x, "expected a single column");
    return emit(Op::BroadcastCols, x.values().replicate(1, cols), x, nullptr, 0, 0, cols);
}

Tensor sum(const Tensor& x) { return emit(Op::Sum, Matrix::Constant(1, 1, x.values().sum()), x); }

Tensor mean(const Tensor& x) {
    if (x.size() == 0) shape_fail("mean", x, "empty tensor");
    return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Tensor fill(const Tensor& x, Index rows, Index cols) {
    if (x.rows() != 1 || x.cols() != 1) shape_fail("fill", x, "expected a 1x1 tensor");
    return emit(Op::Fill, Matrix::Constant(rows, cols, x.values()(0, 0)), x, nullptr, 0, 0, rows, cols);
}

Tensor relu(const Tensor& x) { return emit(Op::Relu, x.values().cwiseMax(0.0), x); }

Tensor leaky_relu(const Tensor& x, double alpha) {
    Matrix out = x.values().unaryExpr([alpha](double v) { return v > 0.0 ? v : alpha * v; });
    return emit(Op::LeakyRelu, std::move(out), x, nullptr, alpha);
}

namespace {
double logistic(double v) {
    // Split by sign so exp never overflows.
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}
}  // namespace

Tensor sigmoid(const Tensor& x) { return emit(Op::Sigmoid, x.values().unaryExpr(&logistic), x); }

Tensor silu(const Tensor& x) {
    return emit(Op::Silu, x.values().unaryExpr([](double v) { return v * logistic(v); }), x);
}

Tensor tanh(const Tensor& x) { return emit(Op::Tanh, x.values().array().tanh().matrix(), x); }

Tensor square(const Tensor& x) { return emit(Op::Square, x.values().array().square().matrix(), x); }

Tensor exp(const Tensor& x) { return emit(Op::Exp, x.values().array().exp().matrix(), x); }

Tensor row_norm(const Tensor& x) { return emit(Op::RowNorm, x.values().rowwise().norm(), x); }

// ---------------------------------------------------------------------------

double finite_diff_check(const std::function<Tensor(const Tensor&)>& fn, const Tensor& point, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");
    Graph graph;
    const Tensor x = graph.variable(point.detach());
    const Tensor y = fn(x);
    if (!std::isfinite(y.item())) throw std::domain_error("finite_diff_check: non-finite function value");
    const Matrix analytic = graph.grad(y, std::span<const Tensor>(&x, 1))[0].values();

    double worst = 0.0;
    Matrix probe = point.values();
    for (Index c = 0; c < probe.cols(); ++c) {
        for (Index r = 0; r < probe.rows(); ++r) {
            const double orig = probe(r, c);
            probe(r, c) = orig + step;
            const double up = fn(Tensor(probe)).item();
            probe(r, c) = orig - step;
            const double down = fn(Tensor(probe)).item();
            probe(r, c) = orig;
            if (!std::isfinite(up) || !std::isfinite(down))
                throw std::domain_error("finite_diff_check: non-finite function value");
            const double central = (up - down) / (2.0 * step);
            worst = std::max(worst, std::abs(analytic(r, c) - central) / (std::abs(central) + 1e-12));
        }
    }
    return worst;
}

}  // namespace lwgan::ad
