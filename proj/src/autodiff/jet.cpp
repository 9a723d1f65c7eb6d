#include "pmsm/autodiff/jet.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "pmsm/error.hpp"

namespace pmsm {
namespace {

// Carrier layout: a layer of width m over P points is an m x (C*P) matrix made
// of C column blocks of width P: the activations, then one Jacobian block per
// input coordinate, then the spatial Laplacian block. C depends on the order.
int carrier_blocks(JetOrder order, int input_dim) {
  switch (order) {
    case JetOrder::value: return 1;
    case JetOrder::gradient: return 1 + input_dim;
    case JetOrder::laplacian: return 2 + input_dim;
  }
  return 1;
}

// Saved state of one hidden layer, needed by the reverse sweep.
struct HiddenTape {
  Eigen::MatrixXd z;    // pre-activation carrier
  Eigen::ArrayXXd a;    // tanh(z_value)
  Eigen::ArrayXXd s1;   // tanh'
  Eigen::ArrayXXd s2;   // tanh''
  Eigen::ArrayXXd q;    // sum over spatial k of (dz/dx_k)^2
};

struct ForwardTape {
  std::vector<Eigen::MatrixXd> inputs;  // carrier entering each layer
  std::vector<HiddenTape> hidden;
};

class Propagator {
 public:
  Propagator(const DenseNet& net, JetOrder order)
      : net_(net),
        order_(order),
        n0_(net.input_dim()),
        d_(net.spatial_dim()),
        blocks_(carrier_blocks(order, net.input_dim())) {}

  // Runs the forward sweep on `points` (n0 x P). When `tape` is non-null the
  // intermediate carriers are kept for the reverse sweep.
  void forward(const Eigen::Ref<const Eigen::MatrixXd>& points, JetBatch& out, ForwardTape* tape) const {
    const Eigen::Index P = points.cols();
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n0_, blocks_ * P);
    s.leftCols(P) = points;
    if (order_ != JetOrder::value) {
      for (int k = 0; k < n0_; ++k) s.row(k).segment((1 + k) * P, P).setOnes();
    }
    const int L = net_.num_layers();
    if (tape) {
      tape->inputs.resize(L);
      tape->hidden.resize(L - 1);
    }
    for (int l = 0; l < L; ++l) {
      Eigen::MatrixXd z = net_.weight(l) * s;
      z.leftCols(P).colwise() += net_.bias(l);
      if (l == L - 1) {
        if (tape) tape->inputs[l] = std::move(s);
        unpack_output(z, P, out);
        return;
      }
      HiddenTape h;
      h.a = z.leftCols(P).array().tanh();
      h.s1 = 1.0 - h.a.square();
      h.s2 = -2.0 * h.a * h.s1;
      Eigen::MatrixXd next(z.rows(), z.cols());
      next.leftCols(P) = h.a.matrix();
      if (order_ != JetOrder::value) {
        for (int k = 0; k < n0_; ++k) {
          next.middleCols((1 + k) * P, P) = (h.s1 * z.middleCols((1 + k) * P, P).array()).matrix();
        }
      }
      if (order_ == JetOrder::laplacian) {
        h.q = Eigen::ArrayXXd::Zero(z.rows(), P);
        for (int k = 0; k < d_; ++k) h.q += z.middleCols((1 + k) * P, P).array().square();
        next.middleCols((1 + n0_) * P, P) =
            (h.s2 * h.q + h.s1 * z.middleCols((1 + n0_) * P, P).array()).matrix();
      }
      if (tape) {
        tape->inputs[l] = std::move(s);
        h.z = std::move(z);
        tape->hidden[l] = std::move(h);
      }
      s = std::move(next);
    }
  }

  // Reverse sweep. Accumulates d(loss)/d(params) into `grad` (pre-zeroed).
  void backward(const ForwardTape& tape, const JetBatch& adjoint, Eigen::VectorXd& grad) const {
    const Eigen::Index P = adjoint.size();
    const int L = net_.num_layers();
    Eigen::MatrixXd g(1, blocks_ * P);
    g.leftCols(P) = adjoint.values.transpose();
    if (order_ != JetOrder::value) {
      for (int k = 0; k < n0_; ++k) g.middleCols((1 + k) * P, P) = adjoint.grads.row(k);
    }
    if (order_ == JetOrder::laplacian) g.middleCols((1 + n0_) * P, P) = adjoint.laps.transpose();

    for (int l = L - 1; l >= 0; --l) {
      const int out = net_.layer_sizes()[l + 1];
      const int in = net_.layer_sizes()[l];
      Eigen::Map<RowMatrix> dw(grad.data() + net_.weight_offset(l), out, in);
      dw.noalias() += g * tape.inputs[l].transpose();
      Eigen::Map<Eigen::VectorXd> db(grad.data() + net_.bias_offset(l), out);
      db += g.leftCols(P).rowwise().sum();
      if (l == 0) break;
      Eigen::MatrixXd ds = net_.weight(l).transpose() * g;
      g = hidden_backward(tape.hidden[l - 1], ds, P);
    }
  }

 private:
  // Maps the adjoint of a hidden layer's output carrier to the adjoint of its
  // pre-activation carrier.
  Eigen::MatrixXd hidden_backward(const HiddenTape& h, const Eigen::MatrixXd& da, Eigen::Index P) const {
    Eigen::MatrixXd dz(da.rows(), da.cols());
    Eigen::ArrayXXd dz_value = h.s1 * da.leftCols(P).array();
    if (order_ == JetOrder::value) {
      dz.leftCols(P) = dz_value.matrix();
      return dz;
    }
    const bool with_lap = order_ == JetOrder::laplacian;
    Eigen::ArrayXXd dlap;
    if (with_lap) dlap = da.middleCols((1 + n0_) * P, P).array();
    for (int k = 0; k < n0_; ++k) {
      const auto zj = h.z.middleCols((1 + k) * P, P).array();
      const auto daj = da.middleCols((1 + k) * P, P).array();
      dz_value += h.s2 * daj * zj;
      if (with_lap && k < d_) {
        dz.middleCols((1 + k) * P, P) = (h.s1 * daj + 2.0 * h.s2 * zj * dlap).matrix();
      } else {
        dz.middleCols((1 + k) * P, P) = (h.s1 * daj).matrix();
      }
    }
    if (with_lap) {
      const Eigen::ArrayXXd s3 = -2.0 * h.s1.square() + 4.0 * h.a.square() * h.s1;
      const auto zl = h.z.middleCols((1 + n0_) * P, P).array();
      dz_value += dlap * (s3 * h.q + h.s2 * zl);
      dz.middleCols((1 + n0_) * P, P) = (h.s1 * dlap).matrix();
    }
    dz.leftCols(P) = dz_value.matrix();
    return dz;
  }

  void unpack_output(const Eigen::MatrixXd& z, Eigen::Index P, JetBatch& out) const {
    out.resize(P, n0_, order_);
    out.values = z.leftCols(P).transpose();
    if (order_ != JetOrder::value) {
      for (int k = 0; k < n0_; ++k) out.grads.row(k) = z.middleCols((1 + k) * P, P);
    }
    if (order_ == JetOrder::laplacian) out.laps = z.middleCols((1 + n0_) * P, P).transpose();
  }

  const DenseNet& net_;
  JetOrder order_;
  int n0_;
  int d_;
  int blocks_;
};

Eigen::Index first_nonfinite(const JetBatch& b) {
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    bool ok = std::isfinite(b.values[i]);
    if (b.grads.size() > 0) ok = ok && b.grads.col(i).allFinite();
    if (b.laps.size() > 0) ok = ok && std::isfinite(b.laps[i]);
    if (!ok) return i;
  }
  return -1;
}

void check_input(const DenseNet& net, Eigen::Index rows) {
  if (rows != net.input_dim()) {
    throw ConfigError("point dimension " + std::to_string(rows) + " does not match network input width " +
                      std::to_string(net.input_dim()));
  }
}

}  // namespace

Jet JetBatch::at(Eigen::Index i) const {
  Jet j;
  j.value = values[i];
  if (grads.size() > 0) j.grad = grads.col(i);
  if (laps.size() > 0) j.lap_x = laps[i];
  return j;
}

void JetBatch::resize(Eigen::Index points, int input_dim, JetOrder order) {
  values.resize(points);
  grads.resize(order == JetOrder::value ? 0 : input_dim, order == JetOrder::value ? 0 : points);
  laps.resize(order == JetOrder::laplacian ? points : 0);
}

void JetBatch::set_zero() {
  values.setZero();
  grads.setZero();
  laps.setZero();
}

Jet forward_extended(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& point) {
  check_input(net, point.size());
  return forward_batch(net, point, JetOrder::laplacian).at(0);
}

JetBatch forward_batch(const DenseNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points, JetOrder order) {
  check_input(net, points.rows());
  JetBatch out;
  out.resize(points.cols(), net.input_dim(), order);
  const Propagator prop(net, order);
  constexpr Eigen::Index kChunk = 2048;
  for (Eigen::Index start = 0; start < points.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, points.cols() - start);
    JetBatch part;
    prop.forward(points.middleCols(start, n), part, nullptr);
    out.values.segment(start, n) = part.values;
    if (order != JetOrder::value) out.grads.middleCols(start, n) = part.grads;
    if (order == JetOrder::laplacian) out.laps.segment(start, n) = part.laps;
  }
  return out;
}

LossGrad loss_and_param_grad(const DenseNet& net, const Eigen::Ref<const Eigen::MatrixXd>& points,
                             const PointwiseJetLoss& loss, const GradOptions& opts) {
  check_input(net, points.rows());
  const Eigen::Index total = points.cols();
  const Eigen::Index chunk = std::max<Eigen::Index>(1, opts.chunk);
  const Eigen::Index num_chunks = (total + chunk - 1) / chunk;
  const Propagator prop(net, opts.order);

  std::vector<double> chunk_loss(num_chunks, 0.0);
  std::vector<Eigen::VectorXd> chunk_grad(num_chunks);

  auto run_chunk = [&](Eigen::Index c) {
    const Eigen::Index start = c * chunk;
    const Eigen::Index n = std::min(chunk, total - start);
    ForwardTape tape;
    JetBatch jets;
    prop.forward(points.middleCols(start, n), jets, &tape);
    if (Eigen::Index bad = first_nonfinite(jets); bad >= 0) {
      throw NumericError("non-finite network jet", static_cast<std::size_t>(start + bad));
    }
    JetBatch adjoint;
    adjoint.resize(n, net.input_dim(), opts.order);
    adjoint.set_zero();
    const double value = loss(jets, start, adjoint);
    if (Eigen::Index bad = first_nonfinite(adjoint); bad >= 0 || !std::isfinite(value)) {
      throw NumericError("non-finite loss contribution",
                         static_cast<std::size_t>(start + std::max<Eigen::Index>(bad, 0)));
    }
    chunk_loss[c] = value;
    chunk_grad[c] = Eigen::VectorXd::Zero(net.num_params());
    prop.backward(tape, adjoint, chunk_grad[c]);
  };

  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(num_chunks)));
  if (threads == 1) {
    for (Eigen::Index c = 0; c < num_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (Eigen::Index c = w; c < num_chunks; c += threads) run_chunk(c);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  LossGrad result;
  result.grad = Eigen::VectorXd::Zero(net.num_params());
  for (Eigen::Index c = 0; c < num_chunks; ++c) {
    result.loss += chunk_loss[c];
    result.grad += chunk_grad[c];
  }
  return result;
}

}  // namespace pmsm
