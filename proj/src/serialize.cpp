#include "pufmc/serialize.hpp"

#include <array>
#include <chrono>
#include <cstring>
#include <ctime>
#include <istream>
#include <ostream>

#include "pufmc/batch.hpp"
#include "pufmc/errors.hpp"

namespace pufmc {

nlohmann::json arch_to_json(const ArchSpec& arch) {
  nlohmann::json j;
  j["arch"] = arch.label();
  j["spec"] = arch.to_text();
  j["k"] = arch.k;
  j["n"] = arch.chains;
  j["f1"] = arch.f1;
  j["f2"] = arch.f2;
  return j;
}

ArchSpec arch_from_json(const nlohmann::json& j) {
  return ArchSpec::parse(j.at("spec").get<std::string>(), j.at("k").get<std::size_t>());
}

nlohmann::json manifest_to_json(const RunManifest& m) {
  nlohmann::json j = arch_to_json(m.arch);
  j["N"] = m.n_crps;
  j["N_PUF"] = m.n_puf;
  j["M_eval"] = m.m_eval;
  j["seed"] = m.seed;
  j["known_seed"] = m.known_seed;
  j["eval_seed"] = m.eval_seed;
  j["instance_seed"] = m.instance_seed;
  j["weighting"] = to_string(m.weighting);
  j["mode"] = m.fixed_transcript ? "fixed-transcript" : "all-transcripts";
  j["min_group_size"] = m.min_group_size;
  j["se_inflation"] = m.se_inflation;
  if (!m.ct_slicing.empty()) j["ct_slicing"] = m.ct_slicing;
  return j;
}

nlohmann::json estimate_to_json(const AdvantageEstimate& e, bool detail) {
  nlohmann::json j;
  j["advantage"] = e.advantage;
  j["bias"] = e.bias;
  j["stderr"] = e.standard_error;
  j["bias_stderr"] = e.bias_standard_error;
  j["se_between"] = e.se_components.between;
  j["se_within"] = e.se_components.within;
  j["groups"] = e.retained_groups;
  j["retained_instances"] = e.retained_instances;
  j["total_groups"] = e.total_groups;
  j["M_eval"] = e.m_eval;
  j["weighting"] = to_string(e.weighting);
  j["manifest"] = manifest_to_json(e.manifest);
  j["wall_time_s"] = e.wall_time_s;
  if (detail) {
    j["per_challenge"] = e.per_challenge;
    j["group_bias"] = e.group_bias;
  }
  return j;
}

std::string config_hash(const nlohmann::json& config) {
  const std::string text = config.dump();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

constexpr std::array<char, 4> kMagic{'P', 'U', 'F', 'B'};

void put_u32(unsigned char* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
void put_u64(unsigned char* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void write_archive(std::ostream& out, const PufBatch& batch) {
  const ArchSpec& a = batch.arch();
  unsigned char header[32];
  std::memcpy(header, kMagic.data(), 4);
  put_u32(header + 4, static_cast<std::uint32_t>(a.tag));
  put_u32(header + 8, static_cast<std::uint32_t>(a.k));
  put_u32(header + 12, static_cast<std::uint32_t>(a.chains));
  put_u32(header + 16, static_cast<std::uint32_t>(a.f1));
  put_u32(header + 20, static_cast<std::uint32_t>(a.f2));
  put_u64(header + 24, batch.instance_count());
  out.write(reinterpret_cast<const char*>(header), sizeof header);

  const std::size_t p = batch.params_per_instance();
  std::vector<double> row(p);
  std::vector<unsigned char> bytes(p * 8);
  for (std::size_t i = 0; i < batch.instance_count(); ++i) {
    batch.instance_params(i, row);
    for (std::size_t j = 0; j < p; ++j) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &row[j], 8);
      put_u64(bytes.data() + 8 * j, bits);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw Error("failed to write parameter archive");
}

PufBatch read_archive(std::istream& in) {
  unsigned char header[32];
  if (!in.read(reinterpret_cast<char*>(header), sizeof header)) throw ConfigError("truncated archive header");
  if (std::memcmp(header, kMagic.data(), 4) != 0) throw ConfigError("not a parameter archive (bad magic)");
  ArchSpec a;
  const std::uint32_t tag = get_u32(header + 4);
  if (tag < 1 || tag > 4) throw ConfigError("archive has unknown architecture tag " + std::to_string(tag));
  a.tag = static_cast<ArchTag>(tag);
  a.k = get_u32(header + 8);
  a.chains = get_u32(header + 12);
  a.f1 = get_u32(header + 16);
  a.f2 = get_u32(header + 20);
  const std::uint64_t count = get_u64(header + 24);
  a.validate();
  const std::size_t p = a.params_per_instance();
  std::vector<double> params(count * p);
  std::vector<unsigned char> bytes(p * 8);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
      throw ConfigError("truncated archive body");
    }
    for (std::size_t j = 0; j < p; ++j) {
      const std::uint64_t bits = get_u64(bytes.data() + 8 * j);
      std::memcpy(&params[i * p + j], &bits, 8);
    }
  }
  return PufBatch::from_parameters(a, count, std::move(params));
}

}  // namespace pufmc
