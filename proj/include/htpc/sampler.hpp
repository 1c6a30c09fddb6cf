#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "htpc/torus.hpp"

namespace htpc {

// One Bernoulli(p) site realization. Each vertex's bit is a pure function of
// (seed, vertex index) via a counter-based generator, so regeneration is
// bit-identical regardless of thread count and any index sub-range can be
// produced independently.
struct SiteConfig {
  TorusSpec spec;
  double p = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> words;  // bit k of words[k/64] at position k%64
  std::int64_t occupied_count = 0;

  bool occupied(VertexId v) const {
    return (words[static_cast<std::uint64_t>(v) >> 6] >> (v & 63)) & 1u;
  }
};

// threads == 0 means HTPC_THREADS or hardware concurrency.
SiteConfig sample(const TorusSpec& spec, double p, std::uint64_t seed,
                  int threads = 0);

// Builds a config from explicit occupancy (diagnostics and tests).
SiteConfig from_occupancy(const TorusSpec& spec, const std::vector<bool>& bits,
                          double p = 0.0, std::uint64_t seed = 0);

// p = lambda / n; throws when the ratio leaves [0, 1].
double lambda_to_p(const TorusSpec& spec, double lambda);

// p = c * ln(n) / n (natural log); throws when the result leaves [0, 1].
double c_log_to_p(const TorusSpec& spec, double c);

// Binary occupancy dump, little-endian: "HTPC", u32 version, u32 d,
// u64 L_i (d of them), f64 p, u64 seed, then ceil(|V|/64) u64 words.
void dump_config(const SiteConfig& config, std::ostream& out);
void dump_config(const SiteConfig& config, const std::string& path);

// Reads a dump back. The header stores sides only, so the reconstructed spec
// uses n = 1 and a_i = L_i (which rounds back to the same sides).
SiteConfig load_config(std::istream& in);
SiteConfig load_config(const std::string& path);

// Effective worker count: `requested` if > 0, else HTPC_THREADS, else
// hardware concurrency; always >= 1.
int effective_threads(int requested);

}  // namespace htpc
