#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xladapt/errors.hpp"
#include "xladapt/hash.hpp"
#include "xladapt/io.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/utf8.hpp"

namespace xladapt::encoder {

struct EncoderConfig {
  int d = 64;
  int num_buckets = 65536;
  int ngram = 3;
};

// Feature-hashed character n-gram embedding table. Embedding of a text is
// the mean of the rows selected by its hashed n-grams, L2-normalized.
struct EncoderParams {
  EncoderConfig config;
  uint64_t seed = 0;
  std::vector<double> table;  // num_buckets x d, row-major

  std::span<const double> row(uint32_t bucket) const {
    return {table.data() + static_cast<size_t>(bucket) * config.d,
            static_cast<size_t>(config.d)};
  }
  std::span<double> row(uint32_t bucket) {
    return {table.data() + static_cast<size_t>(bucket) * config.d,
            static_cast<size_t>(config.d)};
  }
};

struct Embedding {
  std::vector<double> values;
};

inline void validate_config(const EncoderConfig& c) {
  if (c.d < 2) throw ConfigError("encoder: d must be >= 2");
  if (c.num_buckets < 1) throw ConfigError("encoder: num_buckets must be >= 1");
  if (c.ngram < 1) throw ConfigError("encoder: ngram must be >= 1");
}

// Entries uniform in the open interval (-0.05, 0.05), deterministic per seed.
inline EncoderParams init_encoder(const EncoderConfig& config, uint64_t seed) {
  validate_config(config);
  EncoderParams p;
  p.config = config;
  p.seed = seed;
  p.table.resize(static_cast<size_t>(config.num_buckets) * config.d);
  rng::Rng r(rng::derive(seed, "encoder-init"));
  for (double& x : p.table) x = r.uniform_open(-0.05, 0.05);
  return p;
}

// Bucket ids for every character n-gram occurrence, in text order. The hash
// runs over the raw UTF-8 bytes of each codepoint window (FNV-1a 64).
inline std::vector<uint32_t> bucket_ids(std::string_view text, const EncoderConfig& config) {
  std::vector<size_t> offsets;
  auto cps = utf8::decode_lenient_with_offsets(text, offsets);
  size_t n = static_cast<size_t>(config.ngram);
  if (cps.size() < n)
    throw DataError("encode: text has fewer than " + std::to_string(config.ngram) +
                    " characters");
  std::vector<uint32_t> ids;
  ids.reserve(cps.size() - n + 1);
  for (size_t i = 0; i + n <= cps.size(); ++i) {
    std::string_view gram = text.substr(offsets[i], offsets[i + n] - offsets[i]);
    ids.push_back(static_cast<uint32_t>(hash::fnv1a64(gram) %
                                        static_cast<uint64_t>(config.num_buckets)));
  }
  return ids;
}

// Forward pass with the intermediates the backward pass needs.
struct EncodeResult {
  Embedding embedding;            // unit norm
  std::vector<uint32_t> ids;      // one per n-gram occurrence
  double pooled_norm = 0.0;       // ||mean of selected rows||
};

inline EncodeResult encode_detailed(std::string_view text, const EncoderParams& params) {
  EncodeResult res;
  res.ids = bucket_ids(text, params.config);
  const size_t d = static_cast<size_t>(params.config.d);
  std::vector<double> mean(d, 0.0);
  for (uint32_t b : res.ids) {
    auto r = params.row(b);
    for (size_t j = 0; j < d; ++j) mean[j] += r[j];
  }
  const double inv_k = 1.0 / static_cast<double>(res.ids.size());
  double norm_sq = 0.0;
  for (size_t j = 0; j < d; ++j) {
    mean[j] *= inv_k;
    norm_sq += mean[j] * mean[j];
  }
  res.pooled_norm = std::sqrt(norm_sq);
  if (!(res.pooled_norm > 0.0))
    throw NumericError("encode: zero-norm pooled vector");
  res.embedding.values.resize(d);
  for (size_t j = 0; j < d; ++j) res.embedding.values[j] = mean[j] / res.pooled_norm;
  return res;
}

inline Embedding encode(std::string_view text, const EncoderParams& params) {
  return encode_detailed(text, params).embedding;
}

// dot(a,b)/(|a||b|), clamped to [-1,1] against rounding.
inline double cosine(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw DataError("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t j = 0; j < a.values.size(); ++j) {
    dot += a.values[j] * b.values[j];
    na += a.values[j] * a.values[j];
    nb += b.values[j] * b.values[j];
  }
  if (!(na > 0.0) || !(nb > 0.0)) throw NumericError("cosine: zero-norm input");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

// Sparse parameter gradient: only buckets touched by the text appear.
using SparseGrad = std::map<uint32_t, std::vector<double>>;

// Exact gradient of normalize(mean(rows)) given dL/d(embedding).
// With m = mean of selected rows, r = ||m||, e = m/r:
//   dL/dm    = (g - (g.e) e) / r
//   dL/drow_b = (count_b / K) dL/dm
inline SparseGrad encode_backward_from(const EncodeResult& fwd, const EncoderParams& params,
                                       std::span<const double> grad_wrt_embedding) {
  const size_t d = static_cast<size_t>(params.config.d);
  if (grad_wrt_embedding.size() != d)
    throw DataError("encode_backward: gradient dimension mismatch");
  const auto& e = fwd.embedding.values;
  double ge = 0.0;
  for (size_t j = 0; j < d; ++j) ge += grad_wrt_embedding[j] * e[j];
  std::vector<double> dmean(d);
  for (size_t j = 0; j < d; ++j)
    dmean[j] = (grad_wrt_embedding[j] - ge * e[j]) / fwd.pooled_norm;

  std::map<uint32_t, size_t> counts;
  for (uint32_t b : fwd.ids) ++counts[b];
  const double inv_k = 1.0 / static_cast<double>(fwd.ids.size());

  SparseGrad grad;
  for (const auto& [b, c] : counts) {
    std::vector<double> row(d);
    const double w = static_cast<double>(c) * inv_k;
    for (size_t j = 0; j < d; ++j) row[j] = w * dmean[j];
    grad.emplace(b, std::move(row));
  }
  return grad;
}

inline SparseGrad encode_backward(std::string_view text, const EncoderParams& params,
                                  std::span<const double> grad_wrt_embedding) {
  return encode_backward_from(encode_detailed(text, params), params, grad_wrt_embedding);
}

// --- checkpoint format -----------------------------------------------------
// 8-byte magic, then little-endian u32 version, u32 d, u64 num_buckets,
// u32 ngram, u64 seed, then num_buckets*d doubles (row-major, little-endian).
// A JSON sidecar (<path>.json) duplicates the config for inspection.

inline constexpr char kCheckpointMagic[8] = {'X', 'L', 'A', 'E', 'N', 'C', '0', '1'};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  uint64_t v = 0;
  std::memcpy(&v, &value, sizeof(T));
  for (size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::string_view in, size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DataError("checkpoint: truncated file");
  uint64_t v = 0;
  for (size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  T out;
  std::memcpy(&out, &v, sizeof(T));
  return out;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const EncoderParams& params) {
  std::string blob;
  blob.reserve(32 + params.table.size() * 8);
  blob.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_le<uint32_t>(blob, 1);
  detail::put_le<uint32_t>(blob, static_cast<uint32_t>(params.config.d));
  detail::put_le<uint64_t>(blob, static_cast<uint64_t>(params.config.num_buckets));
  detail::put_le<uint32_t>(blob, static_cast<uint32_t>(params.config.ngram));
  detail::put_le<uint64_t>(blob, params.seed);
  for (double x : params.table) {
    uint64_t bits;
    std::memcpy(&bits, &x, 8);
    detail::put_le<uint64_t>(blob, bits);
  }
  io::write_file_atomic(path, blob);

  nlohmann::json sidecar{{"d", params.config.d},
                         {"num_buckets", params.config.num_buckets},
                         {"ngram", params.config.ngram},
                         {"seed", params.seed}};
  std::filesystem::path side = path;
  side += ".json";
  io::write_file_atomic(side, sidecar.dump(2) + "\n");
}

inline EncoderParams load_checkpoint(const std::filesystem::path& path) {
  std::string blob = io::read_file(path);
  if (blob.size() < 8 || std::memcmp(blob.data(), kCheckpointMagic, 8) != 0)
    throw DataError("checkpoint: bad magic in " + path.string());
  size_t pos = 8;
  uint32_t version = detail::get_le<uint32_t>(blob, pos);
  if (version != 1) throw DataError("checkpoint: unsupported version");
  EncoderParams p;
  p.config.d = static_cast<int>(detail::get_le<uint32_t>(blob, pos));
  p.config.num_buckets = static_cast<int>(detail::get_le<uint64_t>(blob, pos));
  p.config.ngram = static_cast<int>(detail::get_le<uint32_t>(blob, pos));
  p.seed = detail::get_le<uint64_t>(blob, pos);
  validate_config(p.config);
  size_t n = static_cast<size_t>(p.config.num_buckets) * p.config.d;
  if (blob.size() - pos != n * 8) throw DataError("checkpoint: size mismatch");
  p.table.resize(n);
  for (size_t i = 0; i < n; ++i) {
    uint64_t bits = detail::get_le<uint64_t>(blob, pos);
    std::memcpy(&p.table[i], &bits, 8);
  }
  return p;
}

}  // namespace xladapt::encoder
