#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace pufmc {

enum class ArchTag : std::uint32_t {
  Apuf = 1,
  Xor = 2,
  FfXor = 3,
  Ct = 4,
};

const char* to_string(ArchTag tag) noexcept;

/// Architecture plus shape parameters. `chains` is the XOR order for Xor and
/// FfXor (an FfXor with one chain is a plain feed-forward PUF); f1/f2 are the
/// 1-indexed feed-forward loop endpoints.
struct ArchSpec {
  ArchTag tag = ArchTag::Apuf;
  std::size_t k = 64;
  std::size_t chains = 1;
  std::size_t f1 = 0;
  std::size_t f2 = 0;

  static ArchSpec apuf(std::size_t k);
  static ArchSpec xor_puf(std::size_t k, std::size_t chains);
  /// Loop defaults to f1 = floor(k/3), f2 = floor(2k/3) when f1 == f2 == 0.
  static ArchSpec ff_xor(std::size_t k, std::size_t chains, std::size_t f1 = 0, std::size_t f2 = 0);
  static ArchSpec ct(std::size_t k);

  /// Parses "apuf", "xor:2", "ff", "ffxor:2", "ffxor:2:21:42", "ct"; k is supplied separately.
  static ArchSpec parse(std::string_view text, std::size_t k);

  /// Throws ConfigError on an inconsistent spec.
  void validate() const;

  /// Real parameters per instance.
  std::size_t params_per_instance() const noexcept;

  /// Same spec with a different stage count (loop defaults recomputed if they
  /// were defaulted).
  ArchSpec with_stages(std::size_t new_k) const;

  /// Short label, e.g. "apuf", "xor2", "ffxor1", "ct".
  std::string label() const;

  /// Text accepted by parse(), with loop positions spelled out: "xor:2", "ffxor:1:21:42".
  std::string to_text() const;

  friend bool operator==(const ArchSpec&, const ArchSpec&) = default;
};

}  // namespace pufmc
