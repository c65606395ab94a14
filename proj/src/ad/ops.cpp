// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "mcmg/common/error.hpp"

namespace mcmg::ad {
namespace {

Tape& tape_of(Var a) {
  if (a.tape == nullptr) throw std::invalid_argument("operation on a detached variable");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("operands belong to different tapes");
  return tape_of(a);
}

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": shapes " + to_string(a) + " and " + to_string(b) +
                   " are not conformable");
}

Shape with_last(Shape s, std::size_t n) {
  if (s.empty()) s.push_back(n);
  else s.back() = n;
  return s;
}

// C[R,N] += A[R,K] * B[K,N]
void gemm_nn(std::size_t R, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C) {
  for (std::size_t i = 0; i < R; ++i) {
    double* c = C + i * N;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = A[i * K + k];
      const double* b = B + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += a * b[j];
    }
  }
}

// C[R,N] += A[R,K] * B[N,K]^T
void gemm_nt(std::size_t R, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C) {
  for (std::size_t i = 0; i < R; ++i) {
    const double* a = A + i * K;
    for (std::size_t j = 0; j < N; ++j) {
      const double* b = B + j * K;
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += a[k] * b[k];
      C[i * N + j] += s;
    }
  }
}

// C[K,N] += A[R,K]^T * B[R,N]
void gemm_tn(std::size_t R, std::size_t K, std::size_t N, const double* A, const double* B,
             double* C) {
  for (std::size_t r = 0; r < R; ++r) {
    const double* b = B + r * N;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = A[r * K + k];
      if (a == 0.0) continue;
      double* c = C + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += a * b[j];
    }
  }
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }
bool clamped(double p) { return p < kProbFloor || p > 1.0 - kProbFloor; }

void check_targets(const char* op, std::span<const std::size_t> targets, const Tensor& probs) {
  if (targets.size() != probs.rows()) {
    throw ShapeError(std::string(op) + ": " + std::to_string(targets.size()) +
                     " targets for probabilities of shape " + to_string(probs.shape()));
  }
  for (std::size_t t : targets) {
    if (t >= probs.cols()) {
      throw DataError(std::string(op) + ": target id " + std::to_string(t) +
                      " outside vocabulary of size " + std::to_string(probs.cols()));
    }
  }
}

}  // namespace

Var matmul(Var a, Var b, bool transpose_b) {
  Tape& tape = tape_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (B.rank() != 2 || A.rank() == 0) shape_error("matmul", A.shape(), B.shape());
  const std::size_t K = A.cols();
  const std::size_t R = A.rows();
  const std::size_t N = transpose_b ? B.dim(0) : B.dim(1);
  if ((transpose_b ? B.dim(1) : B.dim(0)) != K) shape_error("matmul", A.shape(), B.shape());

  Tensor out(with_last(A.shape(), N));
  if (transpose_b) gemm_nt(R, K, N, A.data(), B.data(), out.data());
  else gemm_nn(R, K, N, A.data(), B.data(), out.data());

  const NodeId ia = a.id, ib = b.id;
  return tape.record("matmul", std::move(out), {ia, ib},
                     [ia, ib, R, K, N, transpose_b](Tape& t, NodeId o) {
                       const Tensor& g = t.grad(o);
                       const Tensor& Av = t.value(ia);
                       const Tensor& Bv = t.value(ib);
                       // dA = G * B^T  (or G * B when B was transposed)
                       Tensor& dA = t.grad_accumulator(ia);
                       if (transpose_b) gemm_nn(R, N, K, g.data(), Bv.data(), dA.data());
                       else gemm_nt(R, N, K, g.data(), Bv.data(), dA.data());
                       Tensor& dB = t.grad_accumulator(ib);
                       if (transpose_b) gemm_tn(R, N, K, g.data(), Av.data(), dB.data());
                       else gemm_tn(R, K, N, Av.data(), g.data(), dB.data());
                     });
}

Var bmm(Var a, Var b, bool transpose_b) {
  Tape& tape = tape_of(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rank() != 3 || B.rank() != 3 || A.dim(0) != B.dim(0)) shape_error("bmm", A.shape(), B.shape());
  const std::size_t batch = A.dim(0), M = A.dim(1), K = A.dim(2);
  const std::size_t N = transpose_b ? B.dim(1) : B.dim(2);
  if ((transpose_b ? B.dim(2) : B.dim(1)) != K) shape_error("bmm", A.shape(), B.shape());

  Tensor out({batch, M, N});
  for (std::size_t s = 0; s < batch; ++s) {
    const double* pa = A.data() + s * M * K;
    const double* pb = B.data() + s * K * N;
    double* pc = out.data() + s * M * N;
    if (transpose_b) gemm_nt(M, K, N, pa, pb, pc);
    else gemm_nn(M, K, N, pa, pb, pc);
  }
  const NodeId ia = a.id, ib = b.id;
  return tape.record("bmm", std::move(out), {ia, ib},
                     [ia, ib, batch, M, K, N, transpose_b](Tape& t, NodeId o) {
                       const Tensor& g = t.grad(o);
                       const Tensor& Av = t.value(ia);
                       const Tensor& Bv = t.value(ib);
                       Tensor& dA = t.grad_accumulator(ia);
                       Tensor& dB = t.grad_accumulator(ib);
                       for (std::size_t s = 0; s < batch; ++s) {
                         const double* pg = g.data() + s * M * N;
                         const double* pa = Av.data() + s * M * K;
                         const double* pb = Bv.data() + s * K * N;
                         double* da = dA.data() + s * M * K;
                         double* db = dB.data() + s * K * N;
                         if (transpose_b) {
                           gemm_nn(M, N, K, pg, pb, da);
                           gemm_tn(M, N, K, pg, pa, db);
                         } else {
                           gemm_nt(M, N, K, pg, pb, da);
                           gemm_tn(M, K, N, pa, pg, db);
                         }
                       }
                     });
}

Var add(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  const NodeId ia = a.id, ib = b.id;
  return tape.record("add", std::move(out), {ia, ib}, [ia, ib](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    for (NodeId in : {ia, ib}) {
      Tensor& d = t.grad_accumulator(in);
      for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
    }
  });
}

Var sub(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("sub", a.shape(), b.shape());
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  const NodeId ia = a.id, ib = b.id;
  return tape.record("sub", std::move(out), {ia, ib}, [ia, ib](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& da = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    Tensor& db = t.grad_accumulator(ib);
    for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
  });
}

Var mul(Var a, Var b) {
  Tape& tape = tape_of(a, b);
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  Tensor out = a.value();
  const Tensor& B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  const NodeId ia = a.id, ib = b.id;
  return tape.record("mul", std::move(out), {ia, ib}, [ia, ib](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    const Tensor& Av = t.value(ia);
    const Tensor& Bv = t.value(ib);
    Tensor& da = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * Bv[i];
    Tensor& db = t.grad_accumulator(ib);
    for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * Av[i];
  });
}

Var add_row(Var a, Var row) {
  Tape& tape = tape_of(a, row);
  const std::size_t N = a.value().cols();
  if (row.value().size() != N) shape_error("add_row", a.shape(), row.shape());
  Tensor out = a.value();
  const Tensor& r = row.value();
  const std::size_t R = out.rows();
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < N; ++j) out[i * N + j] += r[j];
  }
  const NodeId ia = a.id, ir = row.id;
  return tape.record("add_row", std::move(out), {ia, ir}, [ia, ir, R, N](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& da = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i];
    Tensor& dr = t.grad_accumulator(ir);
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < N; ++j) dr[j] += g[i * N + j];
    }
  });
}

Var scale_rows(Var a, Var s) {
  Tape& tape = tape_of(a, s);
  const std::size_t R = a.value().rows(), N = a.value().cols();
  if (s.value().size() != R) shape_error("scale_rows", a.shape(), s.shape());
  Tensor out = a.value();
  const Tensor& sv = s.value();
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < N; ++j) out[i * N + j] *= sv[i];
  }
  const NodeId ia = a.id, is = s.id;
  return tape.record("scale_rows", std::move(out), {ia, is}, [ia, is, R, N](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    const Tensor& Av = t.value(ia);
    const Tensor& Sv = t.value(is);
    Tensor& da = t.grad_accumulator(ia);
    Tensor& ds = t.grad_accumulator(is);
    for (std::size_t i = 0; i < R; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        da[i * N + j] += g[i * N + j] * Sv[i];
        acc += g[i * N + j] * Av[i * N + j];
      }
      ds[i] += acc;
    }
  });
}

Var scale(Var a, double factor) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.values()) v *= factor;
  const NodeId ia = a.id;
  return tape.record("scale", std::move(out), {ia}, [ia, factor](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * factor;
  });
}

Var relu(Var a) {
  Tape& tape = tape_of(a);
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const NodeId ia = a.id;
  return tape.record("relu", std::move(out), {ia}, [ia](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    const Tensor& x = t.value(ia);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0.0) d[i] += g[i];
    }
  });
}

Var softmax(Var a) {
  Tape& tape = tape_of(a);
  const Tensor& x = a.value();
  const std::size_t R = x.rows(), N = x.cols();
  Tensor out(x.shape());
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < R; ++i) {
    const double* row = x.data() + i * N;
    double* p = out.data() + i * N;
    double m = kNegInf;
    for (std::size_t j = 0; j < N; ++j) m = std::max(m, row[j]);
    if (m == kNegInf) continue;
    double total = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      p[j] = std::exp(row[j] - m);
      total += p[j];
    }
    for (std::size_t j = 0; j < N; ++j) p[j] /= total;
  }
  const NodeId ia = a.id;
  return tape.record("softmax", std::move(out), {ia}, [ia, R, N](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    const Tensor& p = t.value(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < R; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < N; ++j) dot += g[i * N + j] * p[i * N + j];
      for (std::size_t j = 0; j < N; ++j) d[i * N + j] += p[i * N + j] * (g[i * N + j] - dot);
    }
  });
}

Var masked_fill(Var a, std::span<const std::uint8_t> mask, double fill) {
  Tape& tape = tape_of(a);
  if (mask.size() != a.value().size()) {
    throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) +
                     " entries for shape " + to_string(a.shape()));
  }
  Tensor out = a.value();
  auto kept = std::make_shared<std::vector<std::uint8_t>>(mask.begin(), mask.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i]) out[i] = fill;
  }
  const NodeId ia = a.id;
  return tape.record("masked_fill", std::move(out), {ia}, [ia, kept](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(*kept)[i]) d[i] += g[i];
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids, Shape prefix) {
  Tape& tape = tape_of(table);
  const Tensor& T = table.value();
  const std::size_t R = T.rows(), N = T.cols();
  if (numel(prefix) != ids.size()) {
    throw ShapeError("gather_rows: prefix " + to_string(prefix) + " does not match " +
                     std::to_string(ids.size()) + " ids");
  }
  for (std::size_t id : ids) {
    if (id >= R) {
      throw std::out_of_range("gather_rows: row " + std::to_string(id) + " outside table of " +
                              std::to_string(R) + " rows");
    }
  }
  prefix.push_back(N);
  Tensor out(std::move(prefix));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::copy_n(T.data() + ids[i] * N, N, out.data() + i * N);
  }
  auto rows = std::make_shared<std::vector<std::size_t>>(ids.begin(), ids.end());
  const NodeId it = table.id;
  return tape.record("gather_rows", std::move(out), {it}, [it, rows, N](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(it);
    for (std::size_t i = 0; i < rows->size(); ++i) {
      double* dst = d.data() + (*rows)[i] * N;
      const double* src = g.data() + i * N;
      for (std::size_t j = 0; j < N; ++j) dst[j] += src[j];
    }
  });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  return gather_rows(table, ids, Shape{ids.size()});
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t N = parts[0].value().cols();
  std::size_t total = 0;
  std::vector<NodeId> inputs;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    if (p.value().cols() != N) shape_error("concat_rows", parts[0].shape(), p.shape());
    total += p.value().rows();
    inputs.push_back(p.id);
  }
  Tensor out({total, N});
  std::size_t at = 0;
  for (const Var& p : parts) {
    std::copy_n(p.value().data(), p.value().size(), out.data() + at);
    at += p.value().size();
  }
  return tape.record("concat_rows", std::move(out), inputs, [inputs](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    std::size_t at = 0;
    for (NodeId in : inputs) {
      Tensor& d = t.grad_accumulator(in);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[at + i];
      at += d.size();
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Tape& tape = tape_of(parts[0]);
  const std::size_t R = parts[0].value().rows();
  std::vector<NodeId> inputs;
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    tape_of(parts[0], p);
    if (p.value().rows() != R) shape_error("concat_cols", parts[0].shape(), p.shape());
    inputs.push_back(p.id);
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor out(with_last(parts[0].shape(), total));
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.value().cols();
    for (std::size_t i = 0; i < R; ++i) {
      std::copy_n(p.value().data() + i * w, w, out.data() + i * total + offset);
    }
    offset += w;
  }
  return tape.record("concat_cols", std::move(out), inputs,
                     [inputs, widths, R, total](Tape& t, NodeId o) {
                       const Tensor& g = t.grad(o);
                       std::size_t offset = 0;
                       for (std::size_t k = 0; k < inputs.size(); ++k) {
                         Tensor& d = t.grad_accumulator(inputs[k]);
                         const std::size_t w = widths[k];
                         for (std::size_t i = 0; i < R; ++i) {
                           for (std::size_t j = 0; j < w; ++j) d[i * w + j] += g[i * total + offset + j];
                         }
                         offset += w;
                       }
                     });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Tape& tape = tape_of(a);
  const std::size_t R = a.value().rows(), N = a.value().cols();
  if (begin > end || end > N) {
    throw ShapeError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") outside shape " + to_string(a.shape()));
  }
  const std::size_t w = end - begin;
  Tensor out(with_last(a.shape(), w));
  for (std::size_t i = 0; i < R; ++i) {
    std::copy_n(a.value().data() + i * N + begin, w, out.data() + i * w);
  }
  const NodeId ia = a.id;
  return tape.record("slice_cols", std::move(out), {ia}, [ia, R, N, begin, w](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < w; ++j) d[i * N + begin + j] += g[i * w + j];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tape& tape = tape_of(a);
  Tensor out = a.value().reshaped(std::move(shape));
  const NodeId ia = a.id;
  return tape.record("reshape", std::move(out), {ia}, [ia](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i];
  });
}

Var dropout(Var a, double rate, bool train, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate " + std::to_string(rate) + " outside [0,1)");
  }
  if (!train || rate == 0.0) return a;
  Tape& tape = tape_of(a);
  const double keep_scale = 1.0 / (1.0 - rate);
  auto factors = std::make_shared<std::vector<double>>(a.value().size());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*factors)[i] = rng.uniform() < rate ? 0.0 : keep_scale;
    out[i] *= (*factors)[i];
  }
  const NodeId ia = a.id;
  return tape.record("dropout", std::move(out), {ia}, [ia, factors](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    Tensor& d = t.grad_accumulator(ia);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * (*factors)[i];
  });
}

Var sum(Var a) {
  Tape& tape = tape_of(a);
  const NodeId ia = a.id;
  return tape.record("sum", Tensor::scalar(a.value().sum()), {ia}, [ia](Tape& t, NodeId o) {
    const double g = t.grad(o)[0];
    Tensor& d = t.grad_accumulator(ia);
    for (double& v : d.values()) v += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var binary_cross_entropy(Var probs, std::span<const std::size_t> targets) {
  Tape& tape = tape_of(probs);
  const Tensor& P = probs.value();
  check_targets("binary_cross_entropy", targets, P);
  const std::size_t R = P.rows(), N = P.cols();
  Tensor out({R, 1});
  for (std::size_t i = 0; i < R; ++i) {
    double loss = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      const double p = clamp_prob(P[i * N + j]);
      loss -= (j == targets[i]) ? std::log(p) : std::log(1.0 - p);
    }
    out[i] = loss;
  }
  auto tgt = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
  const NodeId ip = probs.id;
  return tape.record("binary_cross_entropy", std::move(out), {ip}, [ip, tgt, R, N](Tape& t, NodeId o) {
    const Tensor& g = t.grad(o);
    const Tensor& Pv = t.value(ip);
    Tensor& d = t.grad_accumulator(ip);
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < N; ++j) {
        const double p = Pv[i * N + j];
        if (clamped(p)) continue;
        d[i * N + j] += g[i] * ((j == (*tgt)[i]) ? -1.0 / p : 1.0 / (1.0 - p));
      }
    }
  });
}

Var categorical_cross_entropy(Var probs, std::span<const std::size_t> targets) {
  Tape& tape = tape_of(probs);
  const Tensor& P = probs.value();
  check_targets("categorical_cross_entropy", targets, P);
  const std::size_t R = P.rows(), N = P.cols();
  Tensor out({R, 1});
  for (std::size_t i = 0; i < R; ++i) out[i] = -std::log(clamp_prob(P[i * N + targets[i]]));
  auto tgt = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
  const NodeId ip = probs.id;
  return tape.record("categorical_cross_entropy", std::move(out), {ip},
                     [ip, tgt, R, N](Tape& t, NodeId o) {
                       const Tensor& g = t.grad(o);
                       const Tensor& Pv = t.value(ip);
                       Tensor& d = t.grad_accumulator(ip);
                       for (std::size_t i = 0; i < R; ++i) {
                         const double p = Pv[i * N + (*tgt)[i]];
                         if (!clamped(p)) d[i * N + (*tgt)[i]] -= g[i] / p;
                       }
                     });
}

namespace {

// Forward value and d(loss)/d(logits) of one of the softmax losses, row by row.
Var softmax_loss(const char* name, Var logits, std::span<const std::size_t> targets, bool binary) {
  Tape& tape = tape_of(logits);
  const Tensor& x = logits.value();
  check_targets(name, targets, x);
  const std::size_t R = x.rows(), N = x.cols();
  Tensor out({R, 1});
  auto dx = std::make_shared<Tensor>(x.shape());
  std::vector<double> e(N);
  for (std::size_t i = 0; i < R; ++i) {
    const double* row = x.data() + i * N;
    double* d = dx->data() + i * N;
    const std::size_t t = targets[i];
    const std::size_t top = static_cast<std::size_t>(std::max_element(row, row + N) - row);
    const double m = row[top];
    if (!std::isfinite(m) || !std::isfinite(row[t])) {
      throw NumericError(std::string(name) + ": non-finite logit in row " + std::to_string(i));
    }
    double total = 0.0;
    for (std::size_t j = 0; j < N; ++j) total += e[j] = std::exp(row[j] - m);
    const double log_total = std::log(total);
    double loss = log_total - (row[t] - m);
    for (std::size_t j = 0; j < N; ++j) d[j] = e[j] / total;
    d[t] -= 1.0;
    if (binary) {
      // 1 - p_j = (total - e_j) / total; only the largest entry needs the
      // explicit sum to avoid cancellation.
      double rest_top = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        if (j != top) rest_top += e[j];
      }
      double odds_sum = 0.0;
      std::vector<double> odds(N, 0.0);
      for (std::size_t j = 0; j < N; ++j) {
        if (j == t) continue;
        const double rest = std::max(j == top ? rest_top : total - e[j], std::numeric_limits<double>::min());
        loss -= std::log(rest) - log_total;
        odds[j] = e[j] / rest;
        odds_sum += odds[j];
      }
      for (std::size_t j = 0; j < N; ++j) d[j] += odds[j] - e[j] / total * odds_sum;
    }
    out[i] = loss;
  }
  const NodeId il = logits.id;
  return tape.record(name, std::move(out), {il}, [il, dx, R, N](Tape& tp, NodeId o) {
    const Tensor& g = tp.grad(o);
    Tensor& d = tp.grad_accumulator(il);
    for (std::size_t i = 0; i < R; ++i) {
      for (std::size_t j = 0; j < N; ++j) d[i * N + j] += g[i] * (*dx)[i * N + j];
    }
  });
}

}  // namespace

Var softmax_binary_cross_entropy(Var logits, std::span<const std::size_t> targets) {
  return softmax_loss("softmax_binary_cross_entropy", logits, targets, true);
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets) {
  return softmax_loss("softmax_cross_entropy", logits, targets, false);
}

}  // namespace mcmg::ad
