#include "tenprop/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tenprop/types.hpp"

namespace tenprop::ser {
namespace {

constexpr char kMagic[4] = {'Q', 'S', 'T', 'T'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kDtypeComplex128 = 0;

// Fields are written in native byte order; the container is specified as
// little-endian and the build targets only little-endian hosts.
void put_u32(std::string& s, std::uint32_t v) { s.append((const char*)&v, sizeof v); }
void put_u64(std::string& s, std::uint64_t v) { s.append((const char*)&v, sizeof v); }
void put_f64(std::string& s, double v) { s.append((const char*)&v, sizeof v); }

struct Cursor {
  const std::string* buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf->size()) throw ConfigError("kernel file: truncated container");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf->data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf->data() + pos, 8);
    pos += 8;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, buf->data() + pos, 8);
    pos += 8;
    return v;
  }
};

long checked_dim(std::uint32_t v, const char* what) {
  if (v < 1 || v > 1u << 20) throw ConfigError(std::string("kernel file: implausible ") + what);
  return (long)v;
}

}  // namespace

void save_kernel(const std::string& path, const stt::KernelModel& km) {
  std::string s;
  s.append(kMagic, 4);
  put_u32(s, kVersion);
  put_u32(s, kDtypeComplex128);
  put_u64(s, km.config_hash);
  put_u32(s, (std::uint32_t)km.m_comp);
  put_u32(s, (std::uint32_t)km.n_basis);
  put_u32(s, (std::uint32_t)km.mem);
  put_u32(s, (std::uint32_t)km.sets.size());
  for (const auto& b : km.basis) {
    put_f64(s, b.lo);
    put_f64(s, b.hi);
  }
  for (const auto& set : km.sets) put_u32(s, (std::uint32_t)set.bond);

  for (const auto& set : km.sets) {
    put_u32(s, (std::uint32_t)set.n_slice);
    put_u32(s, (std::uint32_t)set.span);
    put_u32(s, (std::uint32_t)set.slots.size());
    for (const auto& slot : set.slots) {
      put_u32(s, (std::uint32_t)slot.comp);
      put_u32(s, (std::uint32_t)slot.rows);
      put_u32(s, (std::uint32_t)slot.cols);
      put_u32(s, (std::uint32_t)slot.coef.size());
      for (const auto& m : slot.coef)
        for (long i = 0; i < slot.rows; ++i)
          for (long j = 0; j < slot.cols; ++j) {
            put_f64(s, m(i, j).real());
            put_f64(s, m(i, j).imag());
          }
    }
  }
  write_file(path, s);
}

stt::KernelModel load_kernel(const std::string& path) {
  const std::string buf = read_file(path);
  Cursor c{&buf};
  c.need(4);
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw ConfigError("kernel file '" + path + "': bad magic");
  c.pos = 4;
  if (c.u32() != kVersion) throw ConfigError("kernel file '" + path + "': unsupported version");
  if (c.u32() != kDtypeComplex128) throw ConfigError("kernel file '" + path + "': unsupported dtype");

  stt::KernelModel km;
  km.config_hash = c.u64();
  km.m_comp = (int)checked_dim(c.u32(), "component count");
  km.n_basis = (int)checked_dim(c.u32(), "basis size");
  km.mem = (long)c.u32();
  const long n_sets = checked_dim(c.u32(), "set count");
  if (n_sets != km.mem + 1)
    throw ConfigError("kernel file '" + path + "': set count does not match the memory depth");
  for (int i = 0; i < km.m_comp; ++i) {
    const double lo = c.f64(), hi = c.f64();
    km.basis.push_back(stt::basis_for_range(lo, hi, km.n_basis));
  }
  std::vector<long> sched;
  for (long i = 0; i < n_sets; ++i) sched.push_back(checked_dim(c.u32(), "bond"));
  km.bond = *std::max_element(sched.begin(), sched.end());

  for (long i = 0; i < n_sets; ++i) {
    stt::LinkingMatrixSet set;
    set.n_slice = (int)checked_dim(c.u32(), "slice index");
    set.span = (int)checked_dim(c.u32(), "span");
    set.m_comp = km.m_comp;
    set.n_basis = km.n_basis;
    set.bond = sched[(std::size_t)i];
    set.basis = km.basis;
    const long n_slots = checked_dim(c.u32(), "slot count");
    if (n_slots != (long)set.span * km.m_comp)
      throw ConfigError("kernel file '" + path + "': slot count does not match span");
    for (long sl = 0; sl < n_slots; ++sl) {
      stt::TransferSlot slot;
      slot.comp = (int)c.u32();
      if (slot.comp < 0 || slot.comp >= km.m_comp)
        throw ConfigError("kernel file '" + path + "': slot component out of range");
      slot.rows = checked_dim(c.u32(), "slot rows");
      slot.cols = checked_dim(c.u32(), "slot cols");
      const long k = checked_dim(c.u32(), "coefficient count");
      if (k != km.n_basis)
        throw ConfigError("kernel file '" + path + "': coefficient count does not match basis");
      c.need((std::size_t)k * slot.rows * slot.cols * 16);
      for (long q = 0; q < k; ++q) {
        Mat m(slot.rows, slot.cols);
        for (long r = 0; r < slot.rows; ++r)
          for (long cc = 0; cc < slot.cols; ++cc) {
            const double re = c.f64(), im = c.f64();
            m(r, cc) = cplx(re, im);
          }
        slot.coef.push_back(std::move(m));
      }
      set.slots.push_back(std::move(slot));
    }
    km.sets.push_back(std::move(set));
  }
  if (c.pos != buf.size()) throw ConfigError("kernel file '" + path + "': trailing bytes");
  return km;
}

std::string curve_csv(const stt::TrainResult& r) {
  std::string s = "step,loss\n";
  char line[64];
  for (const auto& p : r.curve) {
    std::snprintf(line, sizeof line, "%ld,%.17g\n", p.step, p.loss);
    s += line;
  }
  return s;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string fixture_header(std::uint64_t config_hash) {
  return "# config_hash=" + hash_hex(config_hash) + "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), (std::streamsize)text.size());
  out.flush();
  if (!out) throw ResourceError("failed writing '" + path + "'");
}

}  // namespace tenprop::ser
