#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "o2orl/nn.hpp"

namespace o2orl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint and dataset files are little-endian; big-endian hosts are unsupported");

namespace io {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string read_header_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(std::string(what) + ": truncated header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline void expect_line(std::istream& in, const std::string& expected, const char* what) {
  const std::string line = read_header_line(in, what);
  if (line != expected)
    throw std::runtime_error(std::string(what) + ": expected '" + expected + "', got '" + line + "'");
}

// Header lines are "<key> <values...>"; returns the values part.
inline std::string header_field(std::istream& in, const std::string& key, const char* what) {
  const std::string line = read_header_line(in, what);
  if (line.rfind(key + " ", 0) != 0)
    throw std::runtime_error(std::string(what) + ": expected field '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

inline void write_f32(std::ostream& out, const float* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
}

inline void read_f32(std::istream& in, float* data, std::size_t count, const char* what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw std::runtime_error(std::string(what) + ": truncated payload");
}

inline void write_i32(std::ostream& out, const std::int32_t* data, std::size_t count) {
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(std::int32_t)));
}

inline void read_i32(std::istream& in, std::int32_t* data, std::size_t count, const char* what) {
  in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(std::int32_t)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::int32_t))
    throw std::runtime_error(std::string(what) + ": truncated payload");
}

}  // namespace io

// Self-describing network checkpoint: a text header (dims, activation tag,
// output bounds, init seed) followed by row-major little-endian float32
// parameter arrays, per layer weights then biases.
template <class S>
void save_net(std::ostream& out, const DenseNet<S>& net) {
  out << "o2orl-net v1\n";
  const auto& d = net.dims();
  out << "dims " << d[0] << ' ' << d[1] << ' ' << d[2] << ' ' << d[3] << '\n';
  if (net.activation() == OutputActivation::scaled_tanh) {
    out << "activation scaled_tanh\n";
    out << "out_low";
    for (double v : net.out_low()) out << ' ' << io::format_double(v);
    out << "\nout_high";
    for (double v : net.out_high()) out << ' ' << io::format_double(v);
    out << '\n';
  } else {
    out << "activation linear\n";
  }
  out << "seed " << net.init_seed() << "\nend\n";
  std::vector<float> buf;
  for (int l = 0; l < 3; ++l) {
    const auto& w = net.weights(l);
    buf.resize(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        buf[static_cast<std::size_t>(r * w.cols() + c)] = static_cast<float>(w(r, c));
    io::write_f32(out, buf.data(), buf.size());
    const auto& b = net.bias(l);
    buf.resize(static_cast<std::size_t>(b.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<float>(b(i));
    io::write_f32(out, buf.data(), buf.size());
  }
  if (!out) throw std::runtime_error("save_net: write failed");
}

template <class S>
DenseNet<S> load_net(std::istream& in) {
  io::expect_line(in, "o2orl-net v1", "load_net");
  std::istringstream dims(io::header_field(in, "dims", "load_net"));
  int in_dim = 0, h1 = 0, h2 = 0, out_dim = 0;
  if (!(dims >> in_dim >> h1 >> h2 >> out_dim)) throw std::runtime_error("load_net: malformed dims");
  const std::string act = io::header_field(in, "activation", "load_net");
  OutputActivation activation;
  VectorXd low = VectorXd::Zero(out_dim), high = VectorXd::Ones(out_dim);
  if (act == "scaled_tanh") {
    activation = OutputActivation::scaled_tanh;
    std::istringstream ls(io::header_field(in, "out_low", "load_net"));
    std::istringstream hs(io::header_field(in, "out_high", "load_net"));
    for (int i = 0; i < out_dim; ++i)
      if (!(ls >> low(i)) || !(hs >> high(i))) throw std::runtime_error("load_net: malformed bounds");
  } else if (act == "linear") {
    activation = OutputActivation::linear;
  } else {
    throw std::runtime_error("load_net: unknown activation '" + act + "'");
  }
  std::uint64_t seed = 0;
  {
    std::istringstream ss(io::header_field(in, "seed", "load_net"));
    if (!(ss >> seed)) throw std::runtime_error("load_net: malformed seed");
  }
  io::expect_line(in, "end", "load_net");

  DenseNet<S> net(in_dim, h1, h2, out_dim, activation, low, high, seed);
  std::vector<float> buf;
  for (int l = 0; l < 3; ++l) {
    auto& w = net.weights(l);
    buf.resize(static_cast<std::size_t>(w.size()));
    io::read_f32(in, buf.data(), buf.size(), "load_net");
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        w(r, c) = static_cast<S>(buf[static_cast<std::size_t>(r * w.cols() + c)]);
    auto& b = net.bias(l);
    buf.resize(static_cast<std::size_t>(b.size()));
    io::read_f32(in, buf.data(), buf.size(), "load_net");
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = static_cast<S>(buf[static_cast<std::size_t>(i)]);
  }
  return net;
}

}  // namespace o2orl
