#include "dagnn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dagnn/errors.hpp"

namespace dagnn {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

void require_same_tape(Value a, Value b, const char* what) {
  require(a.tape != nullptr && a.tape == b.tape, what);
}

int next_id(Tape& t) { return static_cast<int>(t.size()); }

}  // namespace

Value Tape::input(DenseArray v) { return make_node(std::move(v), {}); }

Value Tape::make_node(DenseArray v, std::function<void(Tape&)> back) {
  Node node;
  node.grad = DenseArray::zeros(v.rows(), v.cols());
  node.val = std::move(v);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  return Value{this, static_cast<int>(nodes_.size() - 1)};
}

void Tape::backward(Value output) {
  require(output.tape == this, "backward: value from another tape");
  const DenseArray& out = nodes_[output.id].val;
  require(out.is_scalar(), "backward: output must be scalar");
  if (!out.all_finite()) throw NonFiniteError("backward: output is not finite");

  for (int i = 0; i <= output.id; ++i) nodes_[i].grad.fill(0.0);
  nodes_[output.id].grad[0] = 1.0;
  for (int i = output.id; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this);
}

Value add(Value a, Value b) {
  require_same_tape(a, b, "add: operands on different tapes");
  require(a.val().same_shape(b.val()), "add: shape mismatch");
  Tape& t = *a.tape;
  DenseArray out = a.val();
  const auto& bv = b.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, ib = b.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    DenseArray& ga = t.grad_mut(ia);
    DenseArray& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] += g[i];
    }
  });
}

Value sub(Value a, Value b) {
  require_same_tape(a, b, "sub: operands on different tapes");
  require(a.val().same_shape(b.val()), "sub: shape mismatch");
  Tape& t = *a.tape;
  DenseArray out = a.val();
  const auto& bv = b.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, ib = b.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    DenseArray& ga = t.grad_mut(ia);
    DenseArray& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i];
      gb[i] -= g[i];
    }
  });
}

Value mul(Value a, Value b) {
  require_same_tape(a, b, "mul: operands on different tapes");
  require(a.val().same_shape(b.val()), "mul: shape mismatch");
  Tape& t = *a.tape;
  DenseArray out = a.val();
  const auto& bv = b.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, ib = b.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& av = t.val(ia);
    const DenseArray& bv = t.val(ib);
    DenseArray& ga = t.grad_mut(ia);
    DenseArray& gb = t.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga[i] += g[i] * bv[i];
      gb[i] += g[i] * av[i];
    }
  });
}

Value scale(Value s, Value a) {
  require_same_tape(s, a, "scale: operands on different tapes");
  require(s.val().is_scalar(), "scale: first operand must be scalar");
  Tape& t = *a.tape;
  const double sv = s.val()[0];
  DenseArray out = a.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sv;
  const int io = next_id(t);
  return t.make_node(std::move(out), [is = s.id, ia = a.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& av = t.val(ia);
    const double sv = t.val(is)[0];
    DenseArray& gs = t.grad_mut(is);
    DenseArray& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      gs[0] += g[i] * av[i];
      ga[i] += g[i] * sv;
    }
  });
}

Value scale_const(Value a, double c) {
  Tape& t = *a.tape;
  DenseArray out = a.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, io, c](Tape& t) {
    const DenseArray& g = t.grad(io);
    DenseArray& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
  });
}

Value one_minus(Value a) {
  Tape& t = *a.tape;
  DenseArray out = a.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - out[i];
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    DenseArray& ga = t.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
  });
}

Value matmul(Value a, Value b) {
  require_same_tape(a, b, "matmul: operands on different tapes");
  const auto& av = a.val();
  const auto& bv = b.val();
  require(av.cols() == bv.rows(), "matmul: inner dimensions differ");
  Tape& t = *a.tape;
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  DenseArray out = DenseArray::zeros(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double x = av(i, p);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += x * bv(p, j);
    }
  const int io = next_id(t);
  return t.make_node(std::move(out), [ia = a.id, ib = b.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& av = t.val(ia);
    const DenseArray& bv = t.val(ib);
    DenseArray& ga = t.grad_mut(ia);
    DenseArray& gb = t.grad_mut(ib);
    const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t p = 0; p < k; ++p) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += g(i, j) * bv(p, j);
        ga(i, p) += acc;
      }
    for (std::size_t p = 0; p < k; ++p)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += av(i, p) * g(i, j);
        gb(p, j) += acc;
      }
  });
}

Value matvec(Value m, Value x) {
  require_same_tape(m, x, "matvec: operands on different tapes");
  const auto& mv = m.val();
  const auto& xv = x.val();
  require(xv.is_vector(), "matvec: second operand must be a vector");
  require(mv.cols() == xv.rows(), "matvec: dimensions differ");
  Tape& t = *m.tape;
  const std::size_t rows = mv.rows(), cols = mv.cols();
  DenseArray out = DenseArray::vector(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += mv(r, c) * xv[c];
    out[r] = acc;
  }
  const int io = next_id(t);
  return t.make_node(std::move(out), [im = m.id, ix = x.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& mv = t.val(im);
    const DenseArray& xv = t.val(ix);
    DenseArray& gm = t.grad_mut(im);
    DenseArray& gx = t.grad_mut(ix);
    const std::size_t rows = mv.rows(), cols = mv.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      const double gr = g[r];
      for (std::size_t c = 0; c < cols; ++c) {
        gm(r, c) += gr * xv[c];
        gx[c] += mv(r, c) * gr;
      }
    }
  });
}

Value concat(std::span<const Value> parts) {
  require(!parts.empty(), "concat: no operands");
  Tape& t = *parts.front().tape;
  std::size_t total = 0;
  for (const Value& p : parts) {
    require(p.tape == &t, "concat: operands on different tapes");
    require(p.val().is_vector(), "concat: operands must be vectors");
    total += p.val().size();
  }
  DenseArray out = DenseArray::vector(total);
  std::size_t at = 0;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const Value& p : parts) {
    const auto& pv = p.val();
    for (std::size_t i = 0; i < pv.size(); ++i) out[at + i] = pv[i];
    at += pv.size();
    ids.push_back(p.id);
  }
  const int io = next_id(t);
  return t.make_node(std::move(out), [ids = std::move(ids), io](Tape& t) {
    const DenseArray& g = t.grad(io);
    std::size_t at = 0;
    for (int id : ids) {
      DenseArray& gp = t.grad_mut(id);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[at + i];
      at += gp.size();
    }
  });
}

Value slice(Value x, std::size_t offset, std::size_t len) {
  const auto& xv = x.val();
  require(offset + len <= xv.size(), "slice: range out of bounds");
  Tape& t = *x.tape;
  DenseArray out = DenseArray::vector(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = xv[offset + i];
  const int io = next_id(t);
  return t.make_node(std::move(out), [ix = x.id, offset, len, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    DenseArray& gx = t.grad_mut(ix);
    for (std::size_t i = 0; i < len; ++i) gx[offset + i] += g[i];
  });
}

Value sum(Value x) {
  Tape& t = *x.tape;
  const auto& xv = x.val();
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i];
  const int io = next_id(t);
  return t.make_node(DenseArray::scalar(acc), [ix = x.id, io](Tape& t) {
    const double g = t.grad(io)[0];
    DenseArray& gx = t.grad_mut(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

Value dot(Value x, Value y) {
  require_same_tape(x, y, "dot: operands on different tapes");
  require(x.val().same_shape(y.val()), "dot: shape mismatch");
  Tape& t = *x.tape;
  const auto& xv = x.val();
  const auto& yv = y.val();
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * yv[i];
  const int io = next_id(t);
  return t.make_node(DenseArray::scalar(acc), [ix = x.id, iy = y.id, io](Tape& t) {
    const double g = t.grad(io)[0];
    const DenseArray& xv = t.val(ix);
    const DenseArray& yv = t.val(iy);
    DenseArray& gx = t.grad_mut(ix);
    DenseArray& gy = t.grad_mut(iy);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      gx[i] += g * yv[i];
      gy[i] += g * xv[i];
    }
  });
}

Value sigmoid(Value x) {
  Tape& t = *x.tape;
  DenseArray out = x.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  const int io = next_id(t);
  return t.make_node(std::move(out), [ix = x.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& s = t.val(io);
    DenseArray& gx = t.grad_mut(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
  });
}

Value tanh(Value x) {
  Tape& t = *x.tape;
  DenseArray out = x.val();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  const int io = next_id(t);
  return t.make_node(std::move(out), [ix = x.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& y = t.val(io);
    DenseArray& gx = t.grad_mut(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Value softmax(Value x) {
  const auto& xv = x.val();
  require(xv.is_vector() && xv.size() > 0, "softmax: needs a nonempty vector");
  Tape& t = *x.tape;
  double mx = xv[0];
  for (std::size_t i = 1; i < xv.size(); ++i) mx = std::max(mx, xv[i]);
  DenseArray out = DenseArray::vector(xv.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::exp(xv[i] - mx);
    total += out[i];
  }
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] /= total;
  const int io = next_id(t);
  return t.make_node(std::move(out), [ix = x.id, io](Tape& t) {
    const DenseArray& g = t.grad(io);
    const DenseArray& y = t.val(io);
    DenseArray& gx = t.grad_mut(ix);
    double gy = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) gy += g[i] * y[i];
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += y[i] * (g[i] - gy);
  });
}

Value log_sum_exp(Value x) {
  const auto& xv = x.val();
  require(xv.is_vector() && xv.size() > 0, "log_sum_exp: needs a nonempty vector");
  Tape& t = *x.tape;
  double mx = xv[0];
  for (std::size_t i = 1; i < xv.size(); ++i) mx = std::max(mx, xv[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += std::exp(xv[i] - mx);
  const int io = next_id(t);
  return t.make_node(DenseArray::scalar(mx + std::log(total)),
                     [ix = x.id, io](Tape& t) {
                       const double g = t.grad(io)[0];
                       const DenseArray& xv = t.val(ix);
                       DenseArray& gx = t.grad_mut(ix);
                       double mx = xv[0];
                       for (std::size_t i = 1; i < xv.size(); ++i)
                         mx = std::max(mx, xv[i]);
                       double total = 0.0;
                       for (std::size_t i = 0; i < xv.size(); ++i)
                         total += std::exp(xv[i] - mx);
                       for (std::size_t i = 0; i < xv.size(); ++i)
                         gx[i] += g * std::exp(xv[i] - mx) / total;
                     });
}

Value max_pool(std::span<const Value> vectors) {
  require(!vectors.empty(), "max_pool: no operands");
  Tape& t = *vectors.front().tape;
  const std::size_t len = vectors.front().val().size();
  for (const Value& v : vectors) {
    require(v.tape == &t, "max_pool: operands on different tapes");
    require(v.val().is_vector() && v.val().size() == len,
            "max_pool: operands must be vectors of one length");
  }
  DenseArray out = DenseArray::vector(len);
  std::vector<int> winner(len, 0);  // input index holding each coordinate max
  for (std::size_t j = 0; j < len; ++j) {
    double best = vectors[0].val()[j];
    for (std::size_t i = 1; i < vectors.size(); ++i) {
      const double v = vectors[i].val()[j];
      if (v > best) {  // strict: ties stay with the earliest input
        best = v;
        winner[j] = static_cast<int>(i);
      }
    }
    out[j] = best;
  }
  std::vector<int> ids;
  ids.reserve(vectors.size());
  for (const Value& v : vectors) ids.push_back(v.id);
  const int io = next_id(t);
  return t.make_node(std::move(out),
                     [ids = std::move(ids), winner = std::move(winner), io](Tape& t) {
                       const DenseArray& g = t.grad(io);
                       for (std::size_t j = 0; j < g.size(); ++j)
                         t.grad_mut(ids[winner[j]])[j] += g[j];
                     });
}

double grad_check(const TapeProgram& f, const std::vector<DenseArray>& params,
                  double step) {
  require(step > 0, "grad_check: step must be positive");

  const auto evaluate = [&](const std::vector<DenseArray>& p) {
    Tape t;
    std::vector<Value> leaves;
    leaves.reserve(p.size());
    for (const DenseArray& a : p) leaves.push_back(t.input(a));
    const Value out = f(t, leaves);
    if (!out.val().is_scalar()) throw ShapeError("grad_check: output must be scalar");
    const double v = out.val()[0];
    if (!std::isfinite(v)) throw NonFiniteError("grad_check: non-finite evaluation");
    return v;
  };

  // analytic gradients
  std::vector<DenseArray> analytic;
  {
    Tape t;
    std::vector<Value> leaves;
    leaves.reserve(params.size());
    for (const DenseArray& a : params) leaves.push_back(t.input(a));
    const Value out = f(t, leaves);
    t.backward(out);
    for (const Value& leaf : leaves) {
      if (!leaf.grad().all_finite())
        throw NonFiniteError("grad_check: non-finite gradient");
      analytic.push_back(leaf.grad());
    }
  }

  double worst = 0.0;
  std::vector<DenseArray> probe = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double saved = probe[p][i];
      probe[p][i] = saved + step;
      const double hi = evaluate(probe);
      probe[p][i] = saved - step;
      const double lo = evaluate(probe);
      probe[p][i] = saved;
      const double numeric = (hi - lo) / (2.0 * step);
      const double a = analytic[p][i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace dagnn
