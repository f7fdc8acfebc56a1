#include "cpks/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace cpks {

namespace {

constexpr char kMagic[4] = {'C', 'P', 'K', 'S'};

template <class U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    U out = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
    return out;
  }
  return v;
}

class Writer {
 public:
  explicit Writer(std::vector<char>& buf) : buf_(buf) {}
  void u32(std::uint32_t v) { raw(to_little(v)); }
  void f64(double v) { raw(to_little(std::bit_cast<std::uint64_t>(v))); }
  void bytes(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }

 private:
  template <class U>
  void raw(U v) {
    char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    bytes(b, sizeof(U));
  }
  std::vector<char>& buf_;
};

class Reader {
 public:
  Reader(const std::vector<char>& buf, const std::string& path) : buf_(buf), path_(path) {}
  std::uint32_t u32() { return to_little(raw<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(to_little(raw<std::uint64_t>())); }
  void bytes(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > buf_.size()) throw std::runtime_error(path_ + ": truncated checkpoint");
  }
  template <class U>
  U raw() {
    U v;
    char b[sizeof(U)];
    bytes(b, sizeof(U));
    std::memcpy(&v, b, sizeof(U));
    return v;
  }
  const std::vector<char>& buf_;
  std::string path_;
  std::size_t pos_ = 0;
};

void write_field(Writer& w, const SpecField& f) {
  for (const Complex& c : f.data()) {
    w.f64(c.real());
    w.f64(c.imag());
  }
}

void read_field(Reader& r, SpecField& f) {
  for (Complex& c : f.data()) {
    const double re = r.f64();
    const double im = r.f64();
    c = Complex(re, im);
  }
}

}  // namespace

void save_checkpoint(const State& state, const Grid& grid, const Params& params,
                     const std::filesystem::path& path) {
  const SpecField* fields[] = {&state.n, &state.omega2, &state.delta_u2};
  for (const auto* f : fields)
    if (f->nx() != grid.nx() || f->ny() != grid.ny() || f->nz() != grid.nz())
      throw std::invalid_argument("save_checkpoint: state does not match grid");
  if (state.mean_u1.size() != static_cast<std::size_t>(grid.ny()) ||
      state.mean_u3.size() != static_cast<std::size_t>(grid.ny()))
    throw std::invalid_argument("save_checkpoint: mean profiles do not match grid");

  std::vector<char> buf;
  Writer w(buf);
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(grid.nx()));
  w.u32(static_cast<std::uint32_t>(grid.ny()));
  w.u32(static_cast<std::uint32_t>(grid.nz()));
  w.f64(state.t);
  w.f64(params.A);
  w.f64(params.a);
  for (const auto* f : fields) write_field(w, *f);
  for (double v : state.mean_u1) w.f64(v);
  for (double v : state.mean_u3) w.f64(v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(buf, path.string());

  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a checkpoint (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw std::runtime_error(path.string() + ": checkpoint version " + std::to_string(version) +
                             ", expected " + std::to_string(kCheckpointVersion));
  Checkpoint cp;
  cp.nx = static_cast<int>(r.u32());
  cp.ny = static_cast<int>(r.u32());
  cp.nz = static_cast<int>(r.u32());
  if (cp.nx <= 0 || cp.ny <= 0 || cp.nz <= 0 || cp.nx > 4096 || cp.ny > 4096 || cp.nz > 4096)
    throw std::runtime_error(path.string() + ": implausible grid size in header");
  cp.state.t = r.f64();
  cp.A = r.f64();
  cp.a = r.f64();
  for (SpecField* f : {&cp.state.n, &cp.state.omega2, &cp.state.delta_u2}) {
    *f = SpecField(cp.nx, cp.ny, cp.nz);
    read_field(r, *f);
  }
  cp.state.mean_u1.resize(cp.ny);
  cp.state.mean_u3.resize(cp.ny);
  for (double& v : cp.state.mean_u1) v = r.f64();
  for (double& v : cp.state.mean_u3) v = r.f64();
  if (!r.at_end()) throw std::runtime_error(path.string() + ": trailing bytes after checkpoint data");
  return cp;
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const Grid& grid) {
  Checkpoint cp = load_checkpoint(path);
  if (cp.nx != grid.nx() || cp.ny != grid.ny() || cp.nz != grid.nz())
    throw std::runtime_error(path.string() + ": checkpoint grid " + std::to_string(cp.nx) + "x" +
                             std::to_string(cp.ny) + "x" + std::to_string(cp.nz) +
                             " does not match the configured grid");
  return cp;
}

}  // namespace cpks
