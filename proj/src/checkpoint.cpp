#include "trajrl/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace trajrl::nn {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'J', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}
void write_doubles(std::ostream& os, const std::vector<double>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::int64_t read_i64(std::istream& is) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string read_string(std::istream& is) {
  std::string s(read_u64(is), '\0');
  is.read(s.data(), static_cast<std::streamsize>(s.size()));
  return s;
}
std::vector<double> read_doubles(std::istream& is) {
  std::vector<double> v(read_u64(is));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  return v;
}

}  // namespace

void Checkpoint::put_params(const ParamList& params) {
  for (const auto& p : params)
    tensors[p.name] = {p.tensor.shape(), p.tensor.value()};
}

void Checkpoint::load_params(ParamList& params) const {
  for (auto& p : params) {
    const auto it = tensors.find(p.name);
    if (it == tensors.end())
      throw std::runtime_error("checkpoint missing tensor: " + p.name);
    if (it->second.first != p.tensor.shape())
      throw ShapeMismatch("checkpoint shape mismatch for " + p.name);
    p.tensor.mutable_value() = it->second.second;
  }
}

void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + tmp);
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, config_hash);
    write_i64(os, epochs_trained);
    write_u64(os, tensors.size());
    for (const auto& [name, sv] : tensors) {
      write_string(os, name);
      write_u64(os, sv.first.size());
      for (int d : sv.first) write_i64(os, d);
      write_doubles(os, sv.second);
    }
    write_u64(os, optimizers.size());
    for (const auto& [name, st] : optimizers) {
      write_string(os, name);
      write_i64(os, st.t);
      write_u64(os, st.m.size());
      for (std::size_t i = 0; i < st.m.size(); ++i) {
        write_doubles(os, st.m[i]);
        write_doubles(os, st.v[i]);
      }
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename checkpoint into place: " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::string(magic, 8) != std::string(kMagic, 8))
    throw std::runtime_error("not a checkpoint file: " + path);
  Checkpoint c;
  c.config_hash = read_u64(is);
  c.epochs_trained = read_i64(is);
  const std::uint64_t nt = read_u64(is);
  for (std::uint64_t i = 0; i < nt; ++i) {
    const std::string name = read_string(is);
    Shape shape(read_u64(is));
    for (auto& d : shape) d = static_cast<int>(read_i64(is));
    c.tensors[name] = {std::move(shape), read_doubles(is)};
  }
  const std::uint64_t no = read_u64(is);
  for (std::uint64_t i = 0; i < no; ++i) {
    const std::string name = read_string(is);
    Adam::State st;
    st.t = read_i64(is);
    const std::uint64_t np = read_u64(is);
    st.m.resize(np);
    st.v.resize(np);
    for (std::uint64_t j = 0; j < np; ++j) {
      st.m[j] = read_doubles(is);
      st.v[j] = read_doubles(is);
    }
    c.optimizers[name] = std::move(st);
  }
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return c;
}

}  // namespace trajrl::nn
