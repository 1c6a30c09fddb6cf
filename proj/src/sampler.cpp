#include "htpc/sampler.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "htpc/rng.hpp"

namespace htpc {

int effective_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HTPC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

constexpr std::uint32_t kOccupancyStream = 0;

// occupied <=> lane < threshold; exact for p = 0 and p = 1 via fast paths.
std::uint64_t bernoulli_threshold(double p) {
  return static_cast<std::uint64_t>(ldexpl(static_cast<long double>(p), 64));
}

// Fills words [word_begin, word_end); each Philox block covers two vertices.
void fill_range(std::vector<std::uint64_t>& words, std::int64_t word_begin,
                std::int64_t word_end, std::int64_t num_vertices,
                std::uint64_t seed, std::uint64_t threshold,
                std::int64_t& occupied) {
  std::int64_t count = 0;
  for (std::int64_t w = word_begin; w < word_end; ++w) {
    std::uint64_t bits = 0;
    const std::int64_t base = w << 6;
    const int valid = static_cast<int>(std::min<std::int64_t>(64, num_vertices - base));
    for (int pair = 0; pair < (valid + 1) / 2; ++pair) {
      const std::uint64_t counter = static_cast<std::uint64_t>(base / 2 + pair);
      const auto lanes = philox::block64(seed, counter, kOccupancyStream);
      const int bit = pair * 2;
      if (lanes[0] < threshold) bits |= 1ull << bit;
      if (bit + 1 < valid && lanes[1] < threshold) bits |= 1ull << (bit + 1);
    }
    words[w] = bits;
    count += std::popcount(bits);
  }
  occupied = count;
}

}  // namespace

SiteConfig sample(const TorusSpec& spec, double p, std::uint64_t seed,
                  int threads) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("occupation probability p must lie in [0, 1]");

  SiteConfig config;
  config.spec = spec;
  config.p = p;
  config.seed = seed;
  const std::int64_t nv = spec.num_vertices;
  const std::int64_t nwords = (nv + 63) / 64;
  config.words.assign(nwords, 0);

  if (p == 0.0) {
    config.occupied_count = 0;
    return config;
  }
  if (p == 1.0) {
    for (std::int64_t w = 0; w < nwords; ++w) config.words[w] = ~0ull;
    if (nv & 63) config.words[nwords - 1] = (~0ull) >> (64 - (nv & 63));
    config.occupied_count = nv;
    return config;
  }

  const std::uint64_t threshold = bernoulli_threshold(p);
  const int nthreads = std::min<std::int64_t>(effective_threads(threads), nwords);
  if (nthreads <= 1) {
    fill_range(config.words, 0, nwords, nv, seed, threshold,
               config.occupied_count);
    return config;
  }

  std::vector<std::thread> pool;
  std::vector<std::int64_t> counts(nthreads, 0);
  const std::int64_t chunk = (nwords + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min<std::int64_t>(lo + chunk, nwords);
    pool.emplace_back([&, lo, hi, t] {
      fill_range(config.words, lo, hi, nv, seed, threshold, counts[t]);
    });
  }
  for (auto& th : pool) th.join();
  for (std::int64_t c : counts) config.occupied_count += c;
  return config;
}

SiteConfig from_occupancy(const TorusSpec& spec, const std::vector<bool>& bits,
                          double p, std::uint64_t seed) {
  if (static_cast<std::int64_t>(bits.size()) != spec.num_vertices)
    throw std::invalid_argument("occupancy length does not match vertex count");
  SiteConfig config;
  config.spec = spec;
  config.p = p;
  config.seed = seed;
  config.words.assign((spec.num_vertices + 63) / 64, 0);
  for (std::int64_t v = 0; v < spec.num_vertices; ++v) {
    if (bits[v]) {
      config.words[v >> 6] |= 1ull << (v & 63);
      ++config.occupied_count;
    }
  }
  return config;
}

double lambda_to_p(const TorusSpec& spec, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  const double p = lambda / static_cast<double>(spec.n);
  if (p > 1.0)
    throw std::invalid_argument("lambda / n exceeds 1; not a probability");
  return p;
}

double c_log_to_p(const TorusSpec& spec, double c) {
  if (!(c >= 0.0)) throw std::invalid_argument("c must be >= 0");
  const double nn = static_cast<double>(spec.n);
  const double p = c * std::log(nn) / nn;
  if (p > 1.0)
    throw std::invalid_argument("c log(n) / n exceeds 1; not a probability");
  return p;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

constexpr std::uint32_t kDumpVersion = 1;

}  // namespace

void dump_config(const SiteConfig& config, std::ostream& out) {
  out.write("HTPC", 4);
  put_u32(out, kDumpVersion);
  put_u32(out, static_cast<std::uint32_t>(config.spec.d));
  for (std::int64_t side : config.spec.L)
    put_u64(out, static_cast<std::uint64_t>(side));
  std::uint64_t p_bits;
  std::memcpy(&p_bits, &config.p, 8);
  put_u64(out, p_bits);
  put_u64(out, config.seed);
  for (std::uint64_t w : config.words) put_u64(out, w);
  if (!out) throw std::runtime_error("occupancy dump failed");
}

void dump_config(const SiteConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  dump_config(config, out);
}

SiteConfig load_config(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HTPC", 4) != 0)
    throw std::runtime_error("not an HTPC occupancy dump");
  const std::uint32_t version = get_u32(in);
  if (version != kDumpVersion)
    throw std::runtime_error("unsupported dump version " + std::to_string(version));
  const std::uint32_t d = get_u32(in);
  if (!in || d < 1 || d > 64) throw std::runtime_error("corrupt dump header");

  Eigen::VectorXd a(d);
  for (std::uint32_t i = 0; i < d; ++i) {
    const std::uint64_t side = get_u64(in);
    if (!in || side < 1) throw std::runtime_error("corrupt dump header");
    a[i] = static_cast<double>(side);
  }
  const std::uint64_t p_bits = get_u64(in);
  double p;
  std::memcpy(&p, &p_bits, 8);
  const std::uint64_t seed = get_u64(in);

  SiteConfig config;
  config.spec = make_spec(static_cast<int>(d), a, 1);
  config.p = p;
  config.seed = seed;
  const std::int64_t nwords = (config.spec.num_vertices + 63) / 64;
  config.words.resize(nwords);
  for (std::int64_t w = 0; w < nwords; ++w) config.words[w] = get_u64(in);
  if (!in) throw std::runtime_error("occupancy dump truncated");
  const std::int64_t nv = config.spec.num_vertices;
  if ((nv & 63) && (config.words[nwords - 1] >> (nv & 63)) != 0)
    throw std::runtime_error("occupancy dump has bits past the vertex count");
  config.occupied_count = 0;
  for (std::uint64_t w : config.words)
    config.occupied_count += std::popcount(w);
  return config;
}

SiteConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_config(in);
}

}  // namespace htpc
