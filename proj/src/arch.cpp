#include "pufmc/arch.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

#include "pufmc/errors.hpp"

namespace pufmc {

const char* to_string(ArchTag tag) noexcept {
  switch (tag) {
    case ArchTag::Apuf: return "apuf";
    case ArchTag::Xor: return "xor";
    case ArchTag::FfXor: return "ffxor";
    case ArchTag::Ct: return "ct";
  }
  return "?";
}

ArchSpec ArchSpec::apuf(std::size_t k) {
  ArchSpec s{ArchTag::Apuf, k, 1, 0, 0};
  s.validate();
  return s;
}

ArchSpec ArchSpec::xor_puf(std::size_t k, std::size_t chains) {
  ArchSpec s{ArchTag::Xor, k, chains, 0, 0};
  s.validate();
  return s;
}

ArchSpec ArchSpec::ff_xor(std::size_t k, std::size_t chains, std::size_t f1, std::size_t f2) {
  if (f1 == 0 && f2 == 0) {
    f1 = std::max<std::size_t>(1, k / 3);
    f2 = std::max<std::size_t>(f1, 2 * k / 3);
  }
  ArchSpec s{ArchTag::FfXor, k, chains, f1, f2};
  s.validate();
  return s;
}

ArchSpec ArchSpec::ct(std::size_t k) {
  ArchSpec s{ArchTag::Ct, k, 1, 0, 0};
  s.validate();
  return s;
}

namespace {

std::size_t parse_count(std::string_view s, std::string_view whole) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError("bad number in architecture spec '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

ArchSpec ArchSpec::parse(std::string_view text, std::size_t k) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  const auto name = parts[0];
  auto arg = [&](std::size_t i, std::size_t dflt) {
    return parts.size() > i ? parse_count(parts[i], text) : dflt;
  };
  if (name == "apuf" && parts.size() == 1) return apuf(k);
  if (name == "ct" && parts.size() == 1) return ct(k);
  if (name == "xor" && parts.size() <= 2) return xor_puf(k, arg(1, 2));
  if (name == "ff" && parts.size() <= 3) return ff_xor(k, 1, arg(1, 0), arg(2, 0));
  if (name == "ffxor" && parts.size() <= 4) return ff_xor(k, arg(1, 2), arg(2, 0), arg(3, 0));
  throw ConfigError("unsupported architecture '" + std::string(text) + "'");
}

void ArchSpec::validate() const {
  if (k == 0) throw ConfigError("stage count must be positive");
  switch (tag) {
    case ArchTag::Apuf:
      if (chains != 1) throw ConfigError("apuf has exactly one chain");
      break;
    case ArchTag::Xor:
      if (chains == 0) throw ConfigError("xor order must be at least 1");
      break;
    case ArchTag::FfXor:
      if (chains == 0) throw ConfigError("ff-xor needs at least one chain");
      if (f1 < 1 || f1 > f2 || f2 > k) throw ConfigError("feed-forward loop requires 1 <= f1 <= f2 <= k");
      break;
    case ArchTag::Ct:
      if (k < 3) throw ConfigError("CT-PUF needs at least 3 stages");
      if (chains != 1) throw ConfigError("CT-PUF has no chain parameter");
      break;
    default:
      throw ConfigError("unsupported architecture tag");
  }
}

std::size_t ArchSpec::params_per_instance() const noexcept {
  switch (tag) {
    case ArchTag::Apuf: return k;
    case ArchTag::Xor:
    case ArchTag::FfXor: return chains * k;
    case ArchTag::Ct: return k + k / 2 + 4 * (k / 3);
  }
  return 0;
}

ArchSpec ArchSpec::with_stages(std::size_t new_k) const {
  switch (tag) {
    case ArchTag::Apuf: return apuf(new_k);
    case ArchTag::Xor: return xor_puf(new_k, chains);
    case ArchTag::FfXor: {
      const bool defaulted = f1 == std::max<std::size_t>(1, k / 3) &&
                             f2 == std::max<std::size_t>(f1, 2 * k / 3);
      return defaulted ? ff_xor(new_k, chains) : ff_xor(new_k, chains, f1, f2);
    }
    case ArchTag::Ct: return ct(new_k);
  }
  throw ConfigError("unsupported architecture tag");
}

std::string ArchSpec::label() const {
  switch (tag) {
    case ArchTag::Apuf: return "apuf";
    case ArchTag::Xor: return "xor" + std::to_string(chains);
    case ArchTag::FfXor: return "ffxor" + std::to_string(chains);
    case ArchTag::Ct: return "ct";
  }
  return "?";
}

std::string ArchSpec::to_text() const {
  switch (tag) {
    case ArchTag::Apuf: return "apuf";
    case ArchTag::Xor: return "xor:" + std::to_string(chains);
    case ArchTag::FfXor:
      return "ffxor:" + std::to_string(chains) + ":" + std::to_string(f1) + ":" + std::to_string(f2);
    case ArchTag::Ct: return "ct";
  }
  return "?";
}

}  // namespace pufmc
