#include "graphparse/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "graphparse/errors.hpp"

namespace graphparse {

namespace {

constexpr char kMagic[8] = {'G', 'P', 'C', 'K', 'P', 'T', '0', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

template <typename U>
void put(std::ostream& out, U v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::istream& in, const std::string& path) {
  U v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(U))) throw DataError("truncated checkpoint '" + path + "'");
  return v;
}

std::string get_bytes(std::istream& in, std::uint64_t n, const std::string& path) {
  if (n > (1ull << 32)) throw DataError("corrupt checkpoint '" + path + "'");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw DataError("truncated checkpoint '" + path + "'");
  return s;
}

template <typename T>
void add_params_impl(Checkpoint& ck, const ParamSet<T>& p, const std::string& prefix, DType dtype) {
  for (std::size_t i = 0; i < p.count(); ++i) ck.records.push_back(make_record(prefix + p[i].name, p[i].value, dtype));
}

template <typename T>
void load_params_impl(const Checkpoint& ck, ParamSet<T>& p, const std::string& prefix) {
  for (std::size_t i = 0; i < p.count(); ++i) restore(ck.at(prefix + p[i].name), p[i].value);
}

}  // namespace

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

const TensorRecord& Checkpoint::at(const std::string& name) const {
  if (const auto* r = find(name)) return *r;
  throw DataError("checkpoint has no tensor '" + name + "'");
}

void Checkpoint::save(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint '" + tmp + "'");
    out.write(kMagic, sizeof kMagic);
    const std::string m = manifest.dump();
    put<std::uint64_t>(out, m.size());
    out.write(m.data(), static_cast<std::streamsize>(m.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
    for (const auto& r : records) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
      out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
      put<std::uint32_t>(out, 2);
      put<std::uint64_t>(out, r.rows);
      put<std::uint64_t>(out, r.cols);
      put<std::uint8_t>(out, static_cast<std::uint8_t>(r.dtype));
      for (double v : r.data) {
        if (r.dtype == DType::F32)
          put<float>(out, static_cast<float>(v));
        else
          put<double>(out, v);
      }
    }
    out.flush();
    if (!out) throw DataError("failed writing checkpoint '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw DataError("cannot move checkpoint into '" + path + "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw DataError("'" + path + "' is not a checkpoint");
  Checkpoint ck;
  const auto mlen = get<std::uint64_t>(in, path);
  try {
    ck.manifest = nlohmann::json::parse(get_bytes(in, mlen, path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad checkpoint manifest in '" + path + "': " + e.what());
  }
  const auto n = get<std::uint32_t>(in, path);
  for (std::uint32_t k = 0; k < n; ++k) {
    TensorRecord r;
    r.name = get_bytes(in, get<std::uint32_t>(in, path), path);
    const auto rank = get<std::uint32_t>(in, path);
    if (rank != 2) throw DataError("unsupported tensor rank in '" + path + "'");
    r.rows = get<std::uint64_t>(in, path);
    r.cols = get<std::uint64_t>(in, path);
    const auto dt = get<std::uint8_t>(in, path);
    if (dt > 1) throw DataError("unknown dtype in '" + path + "'");
    r.dtype = static_cast<DType>(dt);
    if (r.rows * r.cols > (1ull << 28)) throw DataError("corrupt tensor size in '" + path + "'");
    r.data.resize(r.rows * r.cols);
    for (auto& v : r.data) v = r.dtype == DType::F32 ? get<float>(in, path) : get<double>(in, path);
    ck.records.push_back(std::move(r));
  }
  return ck;
}

template <typename T>
TensorRecord make_record(const std::string& name, const Tensor<T>& t, DType dtype) {
  TensorRecord r;
  r.name = name;
  r.rows = t.rows();
  r.cols = t.cols();
  r.dtype = dtype;
  r.data.assign(t.values().begin(), t.values().end());
  return r;
}

template <typename T>
void restore(const TensorRecord& rec, Tensor<T>& out) {
  if (rec.rows != out.rows() || rec.cols != out.cols())
    throw DataError("tensor '" + rec.name + "' has shape " + std::to_string(rec.rows) + "x" +
                    std::to_string(rec.cols) + ", expected " + out.shape_string());
  for (std::size_t i = 0; i < rec.data.size(); ++i) out[i] = static_cast<T>(rec.data[i]);
}

template TensorRecord make_record(const std::string&, const Tensor<float>&, DType);
template TensorRecord make_record(const std::string&, const Tensor<double>&, DType);
template void restore(const TensorRecord&, Tensor<float>&);
template void restore(const TensorRecord&, Tensor<double>&);

void add_params(Checkpoint& ck, const ParamSet<float>& p, const std::string& prefix, DType dtype) {
  add_params_impl(ck, p, prefix, dtype);
}
void add_params(Checkpoint& ck, const ParamSet<double>& p, const std::string& prefix, DType dtype) {
  add_params_impl(ck, p, prefix, dtype);
}
void load_params(const Checkpoint& ck, ParamSet<float>& p, const std::string& prefix) {
  load_params_impl(ck, p, prefix);
}
void load_params(const Checkpoint& ck, ParamSet<double>& p, const std::string& prefix) {
  load_params_impl(ck, p, prefix);
}

}  // namespace graphparse
