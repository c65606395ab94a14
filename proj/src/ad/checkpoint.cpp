// SPDX-License-Identifier: Apache-2.0

#include "mcmg/ad/checkpoint.hpp"

#include "mcmg/common/error.hpp"

namespace mcmg::ad {
namespace {

void put_tensor(ByteWriter& w, const Tensor& t) {
  w.ints<std::size_t>(t.shape());
  w.f64s(t.values());
}

Tensor get_tensor(ByteReader& r) {
  Shape shape = r.ints<std::size_t>();
  std::vector<double> values = r.f64s();
  if (numel(shape) != values.size()) r.fail("tensor shape does not match its data");
  return Tensor(std::move(shape), std::move(values));
}

}  // namespace

std::string encode_params(const ParamStore& params) {
  ByteWriter w;
  w.u64(params.size());
  for (const Parameter& p : params) {
    w.str(p.name);
    put_tensor(w, p.value);
  }
  return w.take();
}

void decode_params(ByteReader reader, ParamStore& params) {
  ParamStore loaded = decode_params(std::move(reader));
  if (loaded.size() != params.size()) {
    throw FormatError("section 'params': holds " + std::to_string(loaded.size()) +
                      " parameters, model expects " + std::to_string(params.size()));
  }
  for (Parameter& p : params) {
    if (!loaded.contains(p.name)) throw FormatError("section 'params': missing '" + p.name + "'");
    const Tensor& v = loaded.at(p.name).value;
    if (v.shape() != p.value.shape()) {
      throw FormatError("section 'params': '" + p.name + "' has shape " + to_string(v.shape()) +
                        ", model expects " + to_string(p.value.shape()));
    }
    p.value = v;
  }
}

ParamStore decode_params(ByteReader reader) {
  ParamStore out;
  const std::uint64_t n = reader.count(4);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = reader.str();
    Tensor value = get_tensor(reader);
    if (out.contains(name)) reader.fail("duplicate parameter '" + name + "'");
    out.add(std::move(name), std::move(value));
  }
  if (!reader.done()) reader.fail("unexpected trailing bytes");
  return out;
}

std::string encode_adam(const Adam& adam) {
  ByteWriter w;
  const AdamConfig& c = adam.config();
  w.f64(c.lr);
  w.f64(c.lambda);
  w.f64(c.beta1);
  w.f64(c.beta2);
  w.f64(c.epsilon);
  w.u64(adam.steps());
  w.u64(adam.moments().size());
  for (const auto& [name, m] : adam.moments()) {
    w.str(name);
    put_tensor(w, m.first);
    put_tensor(w, m.second);
  }
  return w.take();
}

Adam decode_adam(ByteReader reader) {
  AdamConfig c;
  c.lr = reader.f64();
  c.lambda = reader.f64();
  c.beta1 = reader.f64();
  c.beta2 = reader.f64();
  c.epsilon = reader.f64();
  const std::uint64_t steps = reader.u64();
  const std::uint64_t n = reader.count(4);
  std::map<std::string, Moments> moments;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string name = reader.str();
    Moments m;
    m.first = get_tensor(reader);
    m.second = get_tensor(reader);
    if (m.first.shape() != m.second.shape()) reader.fail("moment shapes differ for '" + name + "'");
    moments.emplace(std::move(name), std::move(m));
  }
  if (!reader.done()) reader.fail("unexpected trailing bytes");
  Adam adam(c);
  adam.restore(c, steps, std::move(moments));
  return adam;
}

}  // namespace mcmg::ad
